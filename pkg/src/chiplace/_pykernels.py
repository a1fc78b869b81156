"""Pure-Python implementations of the hot kernels.

``_ckernels.pyx`` mirrors these functions one to one; the two are checked
against each other in ``tests/test_kernels.py``.
"""

from math import sqrt

EPS = 1e-9

# CLASS_OF[src_type][dst_type] -> traffic class index, or -1.
# Type codes: 0 compute, 1 memory, 2 io. Classes: 0 C2C, 1 C2M, 2 C2I, 3 M2I.
CLASS_OF = (
    (0, 1, 2),
    (1, -1, 3),
    (2, 3, -1),
)


def route(n, link_a, link_b, relay, type_code):
    """Route every classed ordered chiplet pair along its min-hop path.

    Intermediate chiplets must relay. Among equal-hop paths, the one with the
    lexicographically smallest chiplet-id sequence is used; between parallel
    links, the lowest link index.

    Returns ``(hop_sum, pairs, max_load, unreachable)``, each a 4-list indexed
    by traffic class.
    """
    m = len(link_a)
    adj = [[] for _ in range(n)]
    for e in range(m):
        a = link_a[e]
        b = link_b[e]
        adj[a].append((b, e))
        adj[b].append((a, e))
    for lst in adj:
        lst.sort()

    hop_sum = [0, 0, 0, 0]
    pairs = [0, 0, 0, 0]
    unreachable = [0, 0, 0, 0]
    loads = [[0] * m for _ in range(4)]

    dist = [-1] * n
    parent = [-1] * n
    plink = [-1] * n
    for s in range(n):
        cls_row = CLASS_OF[type_code[s]]
        for v in range(n):
            dist[v] = -1
        dist[s] = 0
        order = [s]
        head = 0
        while head < len(order):
            u = order[head]
            head += 1
            if u != s and not relay[u]:
                continue
            du = dist[u] + 1
            for v, e in adj[u]:
                if dist[v] < 0:
                    dist[v] = du
                    parent[v] = u
                    plink[v] = e
                    order.append(v)

        for d in range(n):
            if d == s:
                continue
            c = cls_row[type_code[d]]
            if c < 0:
                continue
            pairs[c] += 1
            if dist[d] < 0:
                unreachable[c] += 1
            else:
                hop_sum[c] += dist[d]

        # Subtree destination counts give per-link loads of the BFS tree.
        cnt = [[0, 0, 0] for _ in range(n)]
        for idx in range(len(order) - 1, 0, -1):
            v = order[idx]
            own = cnt[v]
            own[type_code[v]] += 1
            p = cnt[parent[v]]
            e = plink[v]
            for t in range(3):
                k = own[t]
                if k:
                    c = cls_row[t]
                    if c >= 0:
                        loads[c][e] += k
                    p[t] += k

    max_load = [max(row) if m else 0 for row in loads]
    return hop_sum, pairs, max_load, unreachable


def _overlaps(x, y, w, h, X0, Y0, X1, Y1, count):
    for j in range(count):
        if x < X1[j] - EPS and X0[j] < x + w - EPS and y < Y1[j] - EPS and Y0[j] < y + h - EPS:
            return j
    return -1


def _is_free(x, y, X0, Y0, X1, Y1, count):
    for j in range(count):
        if X0[j] - EPS <= x < X1[j] - EPS and Y0[j] - EPS <= y < Y1[j] - EPS:
            return False
    return True


def corners(X0, Y0, X1, Y1, count):
    """Concave corners of the current layout, plus the two axis-anchored corners.

    A corner is a point with support directly below (the floor or a chiplet's
    top edge), support directly to the left (the left wall or a chiplet's right
    edge), and free space to its upper right.
    """
    maxx = 0.0
    maxy = 0.0
    for j in range(count):
        if X1[j] > maxx:
            maxx = X1[j]
        if Y1[j] > maxy:
            maxy = Y1[j]
    found = []
    seen = set()
    # Index -1 is the left wall (for j) or the floor (for i).
    for j in range(-1, count):
        x = 0.0 if j < 0 else X1[j]
        for i in range(-1, count):
            y = 0.0 if i < 0 else Y1[i]
            if j >= 0 and not (Y0[j] - EPS <= y < Y1[j] - EPS):
                continue
            if i >= 0 and not (X0[i] - EPS <= x < X1[i] - EPS):
                continue
            key = (x, y)
            if key in seen:
                continue
            seen.add(key)
            if _is_free(x, y, X0, Y0, X1, Y1, count):
                found.append(key)
    for key in ((maxx, 0.0), (0.0, maxy)):
        if key not in seen:
            seen.add(key)
            found.append(key)
    return found


def decode(widths, heights):
    """Place rectangles one by one in the given order; returns (xs, ys) origins.

    Each rectangle goes to the corner minimizing the side of the enclosing
    square (ties: lower y, then lower x); overlaps are then resolved by moving
    up past obstacles on the right and right past obstacles above.
    """
    n = len(widths)
    X0 = [0.0] * n
    Y0 = [0.0] * n
    X1 = [0.0] * n
    Y1 = [0.0] * n
    if n == 0:
        return [], []
    X1[0] = widths[0]
    Y1[0] = heights[0]
    maxx = X1[0]
    maxy = Y1[0]
    for k in range(1, n):
        w = widths[k]
        h = heights[k]
        bx = by = 0.0
        bside = -1.0
        for x, y in corners(X0, Y0, X1, Y1, k):
            side = max(maxx, x + w, maxy, y + h)
            if bside < 0 or side < bside - EPS or (
                side <= bside + EPS and (y < by - EPS or (y <= by + EPS and x < bx - EPS))
            ):
                bside = side
                bx = x
                by = y
        x = bx
        y = by
        for _ in range(4 * n):
            j = _overlaps(x, y, w, h, X0, Y0, X1, Y1, k)
            if j < 0:
                break
            if X0[j] - x > Y0[j] - y:
                y = Y1[j]
            else:
                x = X1[j]
        else:
            if _overlaps(x, y, w, h, X0, Y0, X1, Y1, k) >= 0:
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
    return X0, Y0


def candidate_edges(px, py, owner, max_len, manhattan):
    """All PHY pairs of different chiplets within ``max_len``; sorted (weight, i, j)."""
    p = len(px)
    lim = max_len + EPS
    out = []
    for i in range(p):
        xi = px[i]
        yi = py[i]
        oi = owner[i]
        for j in range(i + 1, p):
            if owner[j] == oi:
                continue
            dx = abs(xi - px[j])
            if dx > lim:
                continue
            dy = abs(yi - py[j])
            if dy > lim:
                continue
            d = dx + dy if manhattan else sqrt(dx * dx + dy * dy)
            if d <= lim:
                out.append((d, i, j))
    out.sort()
    return out
