# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``; identical semantics."""

from libc.math cimport fabs, sqrt
from libc.stdlib cimport malloc, calloc, free

cdef double EPS = 1e-9

cdef int CLASS_OF[3][3]
CLASS_OF[0][0] = 0
CLASS_OF[0][1] = 1
CLASS_OF[0][2] = 2
CLASS_OF[1][0] = 1
CLASS_OF[1][1] = -1
CLASS_OF[1][2] = 3
CLASS_OF[2][0] = 2
CLASS_OF[2][1] = 3
CLASS_OF[2][2] = -1


def route(int n, link_a, link_b, relay, type_code):
    cdef int m = len(link_a)
    cdef int *deg = <int *> calloc(n + 1, sizeof(int))
    cdef int *nbr = <int *> malloc((2 * m + 1) * sizeof(int))
    cdef int *edg = <int *> malloc((2 * m + 1) * sizeof(int))
    cdef int *tc = <int *> malloc(n * sizeof(int))
    cdef char *rl = <char *> malloc(n * sizeof(char))
    cdef int *dist = <int *> malloc(n * sizeof(int))
    cdef int *par = <int *> malloc(n * sizeof(int))
    cdef int *plink = <int *> malloc(n * sizeof(int))
    cdef int *order = <int *> malloc(n * sizeof(int))
    cdef int *cnt = <int *> malloc(3 * n * sizeof(int))
    cdef int *loads = <int *> calloc(4 * m + 1, sizeof(int))
    cdef int *fill = <int *> calloc(n + 1, sizeof(int))
    cdef int *la = <int *> malloc((m + 1) * sizeof(int))
    cdef int *lb = <int *> malloc((m + 1) * sizeof(int))
    cdef long hop_sum[4]
    cdef long pairs[4]
    cdef long unreach[4]
    cdef int max_load[4]
    cdef int i, j, e, a, b, s, u, v, d, c, t, k, head, tail, du, lo, hi, key_v, key_e
    try:
        for i in range(4):
            hop_sum[i] = 0
            pairs[i] = 0
            unreach[i] = 0
            max_load[i] = 0
        for i in range(n):
            tc[i] = type_code[i]
            rl[i] = 1 if relay[i] else 0
        for e in range(m):
            a = link_a[e]
            b = link_b[e]
            la[e] = a
            lb[e] = b
            deg[a + 1] += 1
            deg[b + 1] += 1
        for i in range(n):
            deg[i + 1] += deg[i]
        for e in range(m):
            a = la[e]
            b = lb[e]
            k = deg[a] + fill[a]
            nbr[k] = b
            edg[k] = e
            fill[a] += 1
            k = deg[b] + fill[b]
            nbr[k] = a
            edg[k] = e
            fill[b] += 1
        # insertion sort each adjacency row by (neighbor, link)
        for i in range(n):
            lo = deg[i]
            hi = deg[i + 1]
            for j in range(lo + 1, hi):
                key_v = nbr[j]
                key_e = edg[j]
                k = j - 1
                while k >= lo and (nbr[k] > key_v or (nbr[k] == key_v and edg[k] > key_e)):
                    nbr[k + 1] = nbr[k]
                    edg[k + 1] = edg[k]
                    k -= 1
                nbr[k + 1] = key_v
                edg[k + 1] = key_e

        for s in range(n):
            for v in range(n):
                dist[v] = -1
            dist[s] = 0
            order[0] = s
            head = 0
            tail = 1
            while head < tail:
                u = order[head]
                head += 1
                if u != s and not rl[u]:
                    continue
                du = dist[u] + 1
                for k in range(deg[u], deg[u + 1]):
                    v = nbr[k]
                    if dist[v] < 0:
                        dist[v] = du
                        par[v] = u
                        plink[v] = edg[k]
                        order[tail] = v
                        tail += 1
            for d in range(n):
                if d == s:
                    continue
                c = CLASS_OF[tc[s]][tc[d]]
                if c < 0:
                    continue
                pairs[c] += 1
                if dist[d] < 0:
                    unreach[c] += 1
                else:
                    hop_sum[c] += dist[d]
            for v in range(3 * n):
                cnt[v] = 0
            for i in range(tail - 1, 0, -1):
                v = order[i]
                cnt[3 * v + tc[v]] += 1
                u = par[v]
                e = plink[v]
                for t in range(3):
                    k = cnt[3 * v + t]
                    if k:
                        c = CLASS_OF[tc[s]][t]
                        if c >= 0:
                            loads[c * m + e] += k
                        cnt[3 * u + t] += k
        for c in range(4):
            for e in range(m):
                if loads[c * m + e] > max_load[c]:
                    max_load[c] = loads[c * m + e]
        return (
            [hop_sum[0], hop_sum[1], hop_sum[2], hop_sum[3]],
            [pairs[0], pairs[1], pairs[2], pairs[3]],
            [max_load[0], max_load[1], max_load[2], max_load[3]],
            [unreach[0], unreach[1], unreach[2], unreach[3]],
        )
    finally:
        free(deg)
        free(nbr)
        free(edg)
        free(tc)
        free(rl)
        free(dist)
        free(par)
        free(plink)
        free(order)
        free(cnt)
        free(loads)
        free(fill)
        free(la)
        free(lb)


cdef inline int _overlaps(double x, double y, double w, double h,
                          double *X0, double *Y0, double *X1, double *Y1, int count):
    cdef int j
    for j in range(count):
        if x < X1[j] - EPS and X0[j] < x + w - EPS and y < Y1[j] - EPS and Y0[j] < y + h - EPS:
            return j
    return -1


cdef inline bint _is_free(double x, double y, double *X0, double *Y0, double *X1, double *Y1, int count):
    cdef int j
    for j in range(count):
        if X0[j] - EPS <= x < X1[j] - EPS and Y0[j] - EPS <= y < Y1[j] - EPS:
            return False
    return True


cdef int _corners(double *X0, double *Y0, double *X1, double *Y1, int count,
                  double *cx, double *cy):
    """Fill cx/cy (capacity (count+1)^2 + 2) with corners; returns how many."""
    cdef double maxx = 0.0, maxy = 0.0, x, y
    cdef int i, j, q, nc = 0
    cdef bint dup
    for j in range(count):
        if X1[j] > maxx:
            maxx = X1[j]
        if Y1[j] > maxy:
            maxy = Y1[j]
    for j in range(-1, count):
        x = 0.0 if j < 0 else X1[j]
        for i in range(-1, count):
            y = 0.0 if i < 0 else Y1[i]
            if j >= 0 and not (Y0[j] - EPS <= y < Y1[j] - EPS):
                continue
            if i >= 0 and not (X0[i] - EPS <= x < X1[i] - EPS):
                continue
            dup = False
            for q in range(nc):
                if cx[q] == x and cy[q] == y:
                    dup = True
                    break
            if dup:
                continue
            if _is_free(x, y, X0, Y0, X1, Y1, count):
                cx[nc] = x
                cy[nc] = y
                nc += 1
    for i in range(2):
        x = maxx if i == 0 else 0.0
        y = 0.0 if i == 0 else maxy
        dup = False
        for q in range(nc):
            if cx[q] == x and cy[q] == y:
                dup = True
                break
        if not dup:
            cx[nc] = x
            cy[nc] = y
            nc += 1
    return nc


def corners(X0, Y0, X1, Y1, int count):
    cdef int cap = (count + 1) * (count + 1) + 2
    cdef double *a0 = <double *> malloc((count + 1) * sizeof(double))
    cdef double *b0 = <double *> malloc((count + 1) * sizeof(double))
    cdef double *a1 = <double *> malloc((count + 1) * sizeof(double))
    cdef double *b1 = <double *> malloc((count + 1) * sizeof(double))
    cdef double *cx = <double *> malloc(cap * sizeof(double))
    cdef double *cy = <double *> malloc(cap * sizeof(double))
    cdef int j, nc
    try:
        for j in range(count):
            a0[j] = X0[j]
            b0[j] = Y0[j]
            a1[j] = X1[j]
            b1[j] = Y1[j]
        nc = _corners(a0, b0, a1, b1, count, cx, cy)
        return [(cx[j], cy[j]) for j in range(nc)]
    finally:
        free(a0)
        free(b0)
        free(a1)
        free(b1)
        free(cx)
        free(cy)


def decode(widths, heights):
    cdef int n = len(widths)
    if n == 0:
        return [], []
    cdef int cap = (n + 1) * (n + 1) + 2
    cdef double *X0 = <double *> malloc(n * sizeof(double))
    cdef double *Y0 = <double *> malloc(n * sizeof(double))
    cdef double *X1 = <double *> malloc(n * sizeof(double))
    cdef double *Y1 = <double *> malloc(n * sizeof(double))
    cdef double *cx = <double *> malloc(cap * sizeof(double))
    cdef double *cy = <double *> malloc(cap * sizeof(double))
    cdef double w, h, x, y, bx, by, bside, side, maxx, maxy
    cdef int k, q, nc, j, it
    cdef bint resolved
    try:
        X0[0] = 0.0
        Y0[0] = 0.0
        X1[0] = widths[0]
        Y1[0] = heights[0]
        maxx = X1[0]
        maxy = Y1[0]
        for k in range(1, n):
            w = widths[k]
            h = heights[k]
            bx = 0.0
            by = 0.0
            bside = -1.0
            nc = _corners(X0, Y0, X1, Y1, k, cx, cy)
            for q in range(nc):
                x = cx[q]
                y = cy[q]
                side = maxx
                if x + w > side:
                    side = x + w
                if maxy > side:
                    side = maxy
                if y + h > side:
                    side = y + h
                if bside < 0 or side < bside - EPS or (
                    side <= bside + EPS and (y < by - EPS or (y <= by + EPS and x < bx - EPS))
                ):
                    bside = side
                    bx = x
                    by = y
            x = bx
            y = by
            resolved = False
            for it in range(4 * n):
                j = _overlaps(x, y, w, h, X0, Y0, X1, Y1, k)
                if j < 0:
                    resolved = True
                    break
                if X0[j] - x > Y0[j] - y:
                    y = Y1[j]
                else:
                    x = X1[j]
            if not resolved and _overlaps(x, y, w, h, X0, Y0, X1, Y1, k) >= 0:
                x = 0.0
                y = maxy
            X0[k] = x
            Y0[k] = y
            X1[k] = x + w
            Y1[k] = y + h
            if X1[k] > maxx:
                maxx = X1[k]
            if Y1[k] > maxy:
                maxy = Y1[k]
        return [X0[k] for k in range(n)], [Y0[k] for k in range(n)]
    finally:
        free(X0)
        free(Y0)
        free(X1)
        free(Y1)
        free(cx)
        free(cy)


def candidate_edges(px, py, owner, double max_len, bint manhattan):
    cdef int p = len(px)
    cdef double *xs = <double *> malloc((p + 1) * sizeof(double))
    cdef double *ys = <double *> malloc((p + 1) * sizeof(double))
    cdef int *ow = <int *> malloc((p + 1) * sizeof(int))
    cdef double lim = max_len + EPS, dx, dy, d
    cdef int i, j
    out = []
    try:
        for i in range(p):
            xs[i] = px[i]
            ys[i] = py[i]
            ow[i] = owner[i]
        for i in range(p):
            for j in range(i + 1, p):
                if ow[i] == ow[j]:
                    continue
                dx = fabs(xs[i] - xs[j])
                if dx > lim:
                    continue
                dy = fabs(ys[i] - ys[j])
                if dy > lim:
                    continue
                if manhattan:
                    d = dx + dy
                else:
                    d = sqrt(dx * dx + dy * dy)
                if d <= lim:
                    out.append((d, i, j))
        out.sort()
        return out
    finally:
        free(xs)
        free(ys)
        free(ow)
