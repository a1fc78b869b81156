import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chiplace.errors import InvalidSpec
from chiplace.model import (
    ChipletSpec,
    ChipletType,
    IciTopology,
    LatencyParams,
    Phy,
    PlacedChiplet,
    Rotation,
    RotationClass,
    absolute_phys,
    allowed_rotations,
    rotate_point,
    rotation_class,
)
from oracles import exp_rotate

C = ChipletType.COMPUTE


def spec(w, h, pts, relay=False, name="x"):
    return ChipletSpec(name, C, w, h, tuple(Phy(x, y) for x, y in pts), relay)


def test_four_side_phys_are_invariant():
    s = spec(3, 3, [(1.5, 0), (3, 1.5), (1.5, 3), (0, 1.5)])
    assert rotation_class(s) is RotationClass.INVARIANT
    assert allowed_rotations(s) == (Rotation.R0,)


def test_single_phy_is_sensitive():
    s = spec(3, 3, [(1.5, 0)])
    assert rotation_class(s) is RotationClass.SENSITIVE
    assert allowed_rotations(s) == tuple(Rotation)


def test_short_side_phys_of_rectangle_are_hybrid():
    s = spec(2, 1, [(0, 0.5), (2, 0.5)])
    assert rotation_class(s) is RotationClass.HYBRID
    assert allowed_rotations(RotationClass.HYBRID) == (Rotation.R0, Rotation.R90)


def test_absolute_phys_examples():
    s = spec(3, 3, [(0, 1.5)])
    assert absolute_phys(PlacedChiplet(s, 0, (10, 10), Rotation.R0)) == [(10, 11.5)]
    assert absolute_phys(PlacedChiplet(s, 0, (0, 0), Rotation.R180)) == [(3, 1.5)]
    assert absolute_phys(PlacedChiplet(s, 0, (0, 0), Rotation.R90)) == [(1.5, 0)]


def test_rectangle_rotation_swaps_footprint():
    s = spec(4, 2, [(0, 1)])
    assert s.footprint(Rotation.R90) == (2, 4)
    assert s.footprint(Rotation.R180) == (4, 2)


def test_phy_off_boundary_rejected():
    with pytest.raises(InvalidSpec):
        spec(3, 3, [(1, 1)])


@pytest.mark.parametrize("w,h,pts", [(0, 1, [(0, 0)]), (1, -1, [(0, 0)]), (1, 1, [])])
def test_invalid_dimensions_rejected(w, h, pts):
    with pytest.raises(InvalidSpec):
        spec(w, h, pts)


def test_relay_needs_two_phys():
    assert not spec(3, 3, [(0, 1)], relay=True).relays
    assert spec(3, 3, [(0, 1), (3, 1)], relay=True).relays


@pytest.mark.parametrize("kw", [{"l_phy": -1}, {"l_link": 1.5}, {"l_relay": -3}])
def test_latency_params_validation(kw):
    with pytest.raises(ValueError):
        LatencyParams(**kw)


def test_latency_hop():
    assert LatencyParams(12, 1, 10).hop == 25


def _on_side(w, h, side, t):
    return [(t * w, 0.0), (w, t * h), (t * w, h), (0.0, t * h)][side]


@st.composite
def chiplet_specs(draw):
    w = draw(st.floats(0.5, 6))
    h = draw(st.floats(0.5, 6))
    n = draw(st.integers(1, 5))
    pts = [_on_side(w, h, draw(st.integers(0, 3)), draw(st.floats(0, 1))) for _ in range(n)]
    return spec(w, h, pts)


@given(chiplet_specs(), st.integers(0, 3), st.floats(-5, 5), st.floats(-5, 5))
def test_rotation_matches_rotation_matrix(s, r, ox, oy):
    got = absolute_phys(PlacedChiplet(s, 0, (ox, oy), Rotation(r)))
    for (gx, gy), p in zip(got, s.phys):
        ex, ey = exp_rotate(p.x, p.y, s.width, s.height, r)
        assert math.isclose(gx, ox + ex, abs_tol=1e-9) and math.isclose(gy, oy + ey, abs_tol=1e-9)


@given(chiplet_specs())
def test_four_quarter_turns_are_identity(s):
    for p in s.phys:
        x, y, w, h = p.x, p.y, s.width, s.height
        for _ in range(4):
            x, y = rotate_point(x, y, w, h, Rotation.R90)
            w, h = h, w
        assert math.isclose(x, p.x, abs_tol=1e-9) and math.isclose(y, p.y, abs_tol=1e-9)


@given(chiplet_specs(), st.integers(0, 3))
def test_rotated_phys_stay_on_boundary(s, r):
    pc = PlacedChiplet(s, 0, (1.0, 2.0), Rotation(r))
    x0, y0, x1, y1 = pc.rect
    for x, y in pc.absolute_phys():
        inside = x0 - 1e-9 <= x <= x1 + 1e-9 and y0 - 1e-9 <= y <= y1 + 1e-9
        edge = min(abs(x - x0), abs(x - x1), abs(y - y0), abs(y - y1)) <= 1e-9
        assert inside and edge


def _signature(s, r):
    return s.footprint(r), sorted((round(x, 6), round(y, 6)) for x, y in s.rotated_phys(r))


@given(chiplet_specs())
def test_allowed_rotations_are_pairwise_distinct(s):
    sigs = [_signature(s, r) for r in s.allowed_rotations]
    assert len(set(map(repr, sigs))) == len(sigs)


@given(chiplet_specs())
def test_allowed_rotations_cover_every_distinct_orientation(s):
    allowed = {repr(_signature(s, r)) for r in s.allowed_rotations}
    assert all(repr(_signature(s, r)) in allowed for r in Rotation)


def _topo(links, counts=(1, 1), relay=(False, False)):
    return IciTopology(tuple([C] * len(counts)), counts, relay, tuple(links))


def test_topology_violations():
    assert _topo([((0, 0), (1, 0), 1.0)]).violations(3.0) == []
    assert any("exceeds" in v for v in _topo([((0, 0), (1, 0), 4.0)]).violations(3.0))
    assert any("reachable" in v for v in _topo([]).violations(3.0))
    bad = _topo([((0, 0), (1, 0), 1.0), ((0, 0), (2, 0), 1.0)], counts=(1, 1, 1), relay=(False,) * 3)
    assert any("already used" in v for v in bad.violations(3.0))
    same = _topo([((0, 0), (0, 1), 1.0)], counts=(2, 1))
    assert any("two PHYs of chiplet 0" in v for v in same.violations(3.0))


def test_topology_round_trip():
    t = IciTopology((C, C), (2, 1), (True, False), (((0, 1), (1, 0), 0.5),), (((0, 0), (0, 1)),), 0.5)
    assert IciTopology.from_dict(t.to_dict()) == t
