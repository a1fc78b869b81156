import logging
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chiplace import catalog
from chiplace.errors import UnreachablePair
from chiplace.evaluate import (
    CLASSES,
    CostWeights,
    Evaluator,
    Normalizers,
    Proxies,
    TrafficClass,
    cost,
    estimate_normalizers,
    latency_proxy,
    proxies,
    throughput_proxy,
)
from chiplace.heterogeneous import HeterogeneousRepresentation
from chiplace.homogeneous import GridPlacement, HomogeneousRepresentation
from chiplace.model import Architecture, ChipletType, LatencyParams
from oracles import grid_bfs_mean_latency, link_loads, phy_graph_latency

C, M, I = ChipletType.COMPUTE, ChipletType.MEMORY, ChipletType.IO
LAT = LatencyParams(12, 1, 10)
UNIT = Normalizers((1.0,) * 4, (1.0,) * 4, 1.0)


def small_arch(types):
    specs = {
        C: catalog.square_chiplet("c", C, can_relay=True),
        M: catalog.square_chiplet("m", M, sides=("S", "N")),
        I: catalog.square_chiplet("i", I, sides=("S", "N")),
    }
    return Architecture(tuple(specs[t] for t in types))


def chain(types, phy_pairs=None):
    """Chiplets 0-1-2-... linked in a row, east PHY to west PHY where possible."""
    arch = small_arch(types)
    links = []
    for k in range(len(types) - 1):
        pa = 1 if arch.phy_counts[k] == 4 else 1 % arch.phy_counts[k]
        pb = 3 if arch.phy_counts[k + 1] == 4 else 0
        links.append(((k, pa), (k + 1, pb), 1.0))
    return arch.topology(links)


def test_direct_link_latency():
    topo = chain([C, C])
    assert latency_proxy(topo, TrafficClass.C2C, LAT) == 25


def test_two_hops_through_a_relay():
    topo = chain([C, C, C])
    # pairs 0-1, 1-2 are one hop, 0-2 is two hops through chiplet 1
    assert latency_proxy(topo, "c2c", LAT) == pytest.approx((4 * 25 + 2 * 60) / 6)
    arch = small_arch([C, C, M])
    topo = arch.topology([((0, 1), (1, 3), 1.0), ((1, 1), (2, 0), 1.0)])
    px = proxies(topo, LAT)
    assert px.latency[TrafficClass.C2M.index] == pytest.approx((60 + 25) / 2)


def test_relay_incapable_middle_is_unreachable():
    topo = chain([C, M, C])
    with pytest.raises(UnreachablePair):
        proxies(topo, LAT)


def test_single_link_throughput_is_half():
    topo = chain([C, M])
    assert throughput_proxy(topo, TrafficClass.C2M) == 0.5


def test_two_memory_links_share_nothing():
    arch = small_arch([C, M, M])
    topo = arch.topology([((0, 0), (1, 1), 1.0), ((0, 2), (2, 0), 1.0)])
    px = proxies(topo, LAT)
    assert px.throughput[TrafficClass.C2M.index] == 0.5
    assert px.latency[TrafficClass.C2M.index] == 25


def mesh(k):
    arch = catalog.homogeneous_architecture(k * k, 0, 0)
    rep = HomogeneousRepresentation(arch)
    p = GridPlacement(k, k, tuple(range(k * k)), (0,) * (k * k))
    return arch, rep.extract_topology(p)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_mesh_latency_matches_bfs(k):
    _, topo = mesh(k)
    assert latency_proxy(topo, TrafficClass.C2C, LAT) == grid_bfs_mean_latency(k, k, 12, 1, 10)


def test_three_by_three_mesh_value():
    _, topo = mesh(3)
    # 72 ordered pairs: 24 at 1 hop, 28 at 2, 16 at 3, 4 at 4
    expected = (24 * 25 + 28 * 60 + 16 * 95 + 4 * 130) / 72
    assert expected == 60
    assert latency_proxy(topo, "c2c", LAT) == expected


@pytest.mark.parametrize("k", [2, 3, 4])
def test_mesh_throughput_matches_path_enumeration(k):
    arch, topo = mesh(k)
    loads, _, _ = link_loads([t.code for t in arch.types], list(arch.relay), topo.chiplet_links())
    assert throughput_proxy(topo, TrafficClass.C2C) == min(1.0, 1.0 / loads[0])


def random_topology(rng, n=None):
    n = n or rng.randint(2, 7)
    types = [rng.choice([C, C, M, I]) for _ in range(n)]
    arch = small_arch(types)
    free = {i: list(range(arch.phy_counts[i])) for i in range(n)}
    links = []
    order = list(range(n))
    rng.shuffle(order)
    for k in range(1, n):
        b = order[k]
        hosts = [a for a in order[:k] if free[a]]
        if not hosts or not free[b]:
            break
        a = rng.choice(hosts)
        links.append(((a, free[a].pop(rng.randrange(len(free[a])))), (b, free[b].pop(0)), 1.0))
    for _ in range(rng.randint(0, 3)):
        ends = [i for i in range(n) if free[i]]
        if len(ends) < 2:
            break
        a, b = rng.sample(ends, 2)
        links.append(((a, free[a].pop()), (b, free[b].pop()), 1.0))
    return arch, arch.topology(links), free


def _oracles(arch, topo):
    codes = [t.code for t in arch.types]
    nodes = [(a, b) for a, b, _ in topo.d2d_links]
    return phy_graph_latency(codes, list(arch.phy_counts), list(arch.relay), nodes, 12, 1, 10)


def test_random_topologies_match_phy_graph_oracle():
    rng = random.Random(0)
    compared = unreachable = 0
    for _ in range(400):
        arch, topo, _ = random_topology(rng)
        means, counts = _oracles(arch, topo)
        if any(m is None for m in means):
            with pytest.raises(UnreachablePair):
                proxies(topo, LAT)
            unreachable += 1
            continue
        px = proxies(topo, LAT)
        assert list(px.pairs) == counts
        for c in range(4):
            assert px.latency[c] == pytest.approx(means[c], abs=1e-9)
        loads, _, _ = link_loads([t.code for t in arch.types], list(arch.relay), topo.chiplet_links())
        for c in range(4):
            if counts[c]:
                assert px.throughput[c] == min(1.0, 1.0 / loads[c])
        compared += 1
    assert compared > 100 and unreachable > 10


def test_adding_a_link_never_increases_latency():
    rng = random.Random(1)
    checked = 0
    while checked < 150:
        arch, topo, free = random_topology(rng)
        ends = [i for i in range(arch.n) if free[i]]
        if len(ends) < 2:
            continue
        try:
            before = proxies(topo, LAT)
        except UnreachablePair:
            continue
        a, b = rng.sample(ends, 2)
        extra = arch.topology(topo.d2d_links + (((a, free[a][0]), (b, free[b][0]), 1.0),))
        after = proxies(extra, LAT)
        for c in range(4):
            assert after.latency[c] <= before.latency[c] + 1e-12
            if before.pairs[c]:
                assert after.latency[c] >= 25
            assert 0 < after.throughput[c] <= 1
        checked += 1


def test_area_only_weight_on_mean_area():
    w = CostWeights((0,) * 4, (0,) * 4, 3.0)
    norm = Normalizers((5.0,) * 4, (2.0,) * 4, 40.0)
    px = Proxies((30.0,) * 4, (0.5,) * 4, (2,) * 4)
    assert cost(px, 40.0, w, norm).total == 3.0


def test_doubling_normalizers_halves_everything():
    w = CostWeights.running_example()
    norm = Normalizers((50.0, 40.0, 45.0, 70.0), (4.0, 2.0, 3.0, 2.5), 300.0)
    px = Proxies((41.0, 38.0, 50.0, 90.0), (0.25, 0.5, 0.2, 0.125), (9, 4, 4, 2))
    a = cost(px, 280.0, w, norm)
    b = cost(px, 280.0, w, norm.scaled(2.0))
    assert b.total == pytest.approx(a.total / 2)
    for x, y in zip(a.normalized, b.normalized):
        assert y == pytest.approx(x / 2)


def test_cost_is_the_weighted_sum():
    w = CostWeights.running_example()
    norm = Normalizers((50.0, 40.0, 45.0, 70.0), (4.0, 2.0, 3.0, 2.5), 300.0)
    px = Proxies((41.0, 38.0, 50.0, 90.0), (0.25, 0.5, 0.2, 0.125), (9, 4, 4, 2))
    r = cost(px, 280.0, w, norm)
    expected = (
        0.1 * 41 / 50 + 2 * 38 / 40 + 0.1 * 50 / 45 + 2 * 90 / 70
        + 0.1 * 4 / 4 + 2 * 2 / 2 + 0.1 * 5 / 3 + 2 * 8 / 2.5
        + 2 * 280 / 300
    )
    assert r.total == pytest.approx(expected)


def test_running_example_weights():
    w = CostWeights.running_example()
    assert w.latency == (0.1, 2.0, 0.1, 2.0)
    assert w.throughput == (0.1, 2.0, 0.1, 2.0)
    assert w.area == 2.0


def test_all_zero_weights_rejected():
    with pytest.raises(ValueError):
        CostWeights((0,) * 4, (0,) * 4, 0)
    with pytest.raises(ValueError):
        CostWeights((0, 0, -1, 0), (0,) * 4, 1)


_pos = st.floats(0.01, 1000, allow_nan=False)
_thr = st.floats(0.01, 1.0)


@given(st.lists(_pos, min_size=4, max_size=4), st.lists(_thr, min_size=4, max_size=4),
       st.integers(0, 3), _pos, st.floats(1.01, 3.0))
def test_cost_is_monotone(lat, thr, c, area, factor):
    w = CostWeights.running_example()
    norm = Normalizers((30.0,) * 4, (2.0,) * 4, 100.0)
    pairs = (1, 1, 1, 1)
    base = cost(Proxies(tuple(lat), tuple(thr), pairs), area, w, norm).total
    lat2 = list(lat)
    lat2[c] *= factor
    assert cost(Proxies(tuple(lat2), tuple(thr), pairs), area, w, norm).total >= base
    thr2 = list(thr)
    thr2[c] = min(1.0, thr2[c] * factor)
    assert cost(Proxies(tuple(lat), tuple(thr2), pairs), area, w, norm).total <= base


def test_empty_class_contributes_zero_and_warns(caplog):
    arch = small_arch([C, C, M])
    topo = arch.topology([((0, 1), (1, 3), 1.0), ((1, 1), (2, 0), 1.0)])
    px = proxies(topo, LAT)
    assert px.pairs[TrafficClass.C2I.index] == 0 and px.pairs[TrafficClass.M2I.index] == 0
    from chiplace import evaluate

    evaluate._warned.clear()
    with caplog.at_level(logging.WARNING, logger="chiplace.evaluate"):
        r = cost(px, 27.0, CostWeights.running_example(), UNIT)
    for name in ("c2i", "m2i"):
        assert r.component(f"latency_{name}") == 0.0
        assert r.component(f"throughput_{name}") == 0.0
    assert "C2I" in caplog.text and "M2I" in caplog.text


def test_single_sample_normalizes_to_one():
    arch = catalog.homogeneous_architecture(8, 2, 2)
    rep = HomogeneousRepresentation(arch)
    norm = estimate_normalizers(rep, LAT, 1, random.Random(5))
    cand = rep.random_candidate(random.Random(5))
    r = Evaluator(LAT, CostWeights.running_example(), norm).report(cand)
    assert r.normalized == pytest.approx((1.0,) * 9)


def test_homogeneous_area_normalizer_is_the_grid_area():
    arch = catalog.homogeneous_architecture(32, 4, 4)
    rep = HomogeneousRepresentation(arch)
    norm = estimate_normalizers(rep, LAT, 20, random.Random(6))
    assert norm.area == pytest.approx(rep.area())
    assert norm.samples == 20


def test_empty_class_normalizer_is_one():
    arch = catalog.homogeneous_architecture(6, 0, 2)
    norm = estimate_normalizers(HomogeneousRepresentation(arch), LAT, 5, random.Random(7))
    assert norm.latency[TrafficClass.C2M.index] == 1.0
    assert norm.inv_throughput[TrafficClass.M2I.index] == 1.0


def test_heterogeneous_normalizers_positive():
    rep = HeterogeneousRepresentation(catalog.heterogeneous_architecture(6, 2, 2))
    norm = estimate_normalizers(rep, LAT, 10, random.Random(8))
    assert all(v > 0 for v in norm.as_vector())


def test_normalizers_validated():
    with pytest.raises(ValueError):
        Normalizers((1, 1, 0, 1), (1,) * 4, 1)
    with pytest.raises(ValueError):
        estimate_normalizers(None, LAT, 0, random.Random(0))


def test_report_round_trip():
    arch, topo = mesh(3)
    cand = HomogeneousRepresentation(arch).random_candidate(random.Random(9))
    r = Evaluator(LAT, CostWeights.running_example(), UNIT).report(cand)
    from chiplace.evaluate import CostReport

    assert CostReport.from_dict(r.to_dict()) == r
    assert [c.value for c in CLASSES] == ["c2c", "c2m", "c2i", "m2i"]
