"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Inputs come from random 32C+4M+4I placements, so the numbers reflect what
one cost evaluation pays.
"""

import argparse
import random
import timeit

from chiplace import _pykernels, catalog
from chiplace.heterogeneous import HeterogeneousRepresentation
from chiplace.homogeneous import HomogeneousRepresentation

try:
    from chiplace import _ckernels
except ImportError:
    _ckernels = None


def _inputs(seed=0):
    rng = random.Random(seed)
    hom = HomogeneousRepresentation(catalog.homogeneous_architecture(32, 4, 4))
    topo = hom.random_candidate(rng).topology
    route_args = (
        topo.n_chiplets,
        [a[0] for a, _, _ in topo.d2d_links],
        [b[0] for _, b, _ in topo.d2d_links],
        topo.relay,
        [t.code for t in topo.chiplet_types],
    )
    het = HeterogeneousRepresentation(catalog.heterogeneous_architecture(32, 4, 4))
    g = het.random_genome(rng)
    sizes = [het.arch.chiplets[i].footprint(r) for i, r in zip(g.order, g.rotations)]
    decode_args = ([w for w, _ in sizes], [h for _, h in sizes])
    layout = het.decode(g)
    px, py = [], []
    for p in layout.placed:
        for x, y in p.absolute_phys():
            px.append(x)
            py.append(y)
    edge_args = (px, py, het._owner, het.arch.max_link_length_mm, False)
    return {"route": route_args, "decode": decode_args, "candidate_edges": edge_args}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    inputs = _inputs()
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    print(f"{'kernel':<16}" + "".join(f"{name + ' us':>14}" for name, _ in backends) + f"{'speedup':>10}")
    for kernel, call_args in inputs.items():
        times = []
        for _, mod in backends:
            fn = getattr(mod, kernel)
            best = min(timeit.repeat(lambda: fn(*call_args), number=args.repeat, repeat=3))
            times.append(best / args.repeat * 1e6)
        speed = f"{times[0] / times[1]:>9.1f}x" if len(times) == 2 else f"{'n/a':>10}"
        print(f"{kernel:<16}" + "".join(f"{t:>14.1f}" for t in times) + speed)
    if _ckernels is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
