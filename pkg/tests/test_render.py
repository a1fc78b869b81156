import os
import random
import xml.etree.ElementTree as ET

import pytest

from chiplace import catalog
from chiplace.heterogeneous import HeterogeneousRepresentation
from chiplace.homogeneous import GridPlacement, HomogeneousRepresentation
from chiplace.model import ChipletType, PlacedChiplet
from chiplace.render import render_svg, svg_document, write_atomic

NS = "{http://www.w3.org/2000/svg}"


def elements(text, tag, cls):
    root = ET.fromstring(text)
    return [e for e in root.iter(NS + tag) if cls in e.get("class", "").split()]


def counts(text):
    return (
        len(elements(text, "rect", "chiplet")),
        len(elements(text, "circle", "phy")),
        len(elements(text, "line", "link")),
    )


def test_single_chiplet():
    spec = catalog.square_chiplet("c", ChipletType.COMPUTE, can_relay=True)
    text = svg_document([PlacedChiplet(spec, 0, (0.0, 0.0))], None)
    assert counts(text) == (1, 4, 0)
    assert len(elements(text, "rect", "legend-key")) == 3
    assert len(elements(text, "rect", "bbox")) == 1


def test_one_by_two_grid_with_link():
    arch = catalog.homogeneous_architecture(2, 0, 0, grid_rows=1, grid_cols=2)
    rep = HomogeneousRepresentation(arch)
    p = GridPlacement(1, 2, (0, 1), (0, 0))
    text = svg_document(rep.placed_chiplets(p), rep.extract_topology(p))
    assert counts(text) == (2, 8, 1)


@pytest.mark.parametrize("seed", range(5))
def test_counts_match_placement(seed):
    arch = catalog.heterogeneous_architecture(6, 2, 2)
    rep = HeterogeneousRepresentation(arch)
    cand = rep.random_candidate(random.Random(seed))
    text = svg_document(cand.layout.placed, cand.topology, scale=7.5, title="a < b")
    assert counts(text) == (arch.n, sum(arch.phy_counts), len(cand.topology.d2d_links))
    by_type = {t: len(elements(text, "rect", t.value)) for t in ChipletType}
    assert by_type == {t: arch.count(t) for t in ChipletType}


def test_scale_sets_canvas_size():
    spec = catalog.square_chiplet("c", ChipletType.COMPUTE)
    small = ET.fromstring(svg_document([PlacedChiplet(spec, 0, (0, 0))], None, scale=10))
    big = ET.fromstring(svg_document([PlacedChiplet(spec, 0, (0, 0))], None, scale=20))
    assert float(big.get("width")) - float(small.get("width")) == pytest.approx(30)


def test_empty_rejected():
    with pytest.raises(ValueError):
        svg_document([], None)


def test_write_atomic(tmp_path):
    path = tmp_path / "x.svg"
    spec = catalog.square_chiplet("c", ChipletType.COMPUTE)
    render_svg([PlacedChiplet(spec, 0, (0, 0))], None, path)
    assert path.read_text().startswith("<svg")
    mask = os.umask(0)
    os.umask(mask)
    assert path.stat().st_mode & 0o777 == 0o666 & ~mask
    assert [p.name for p in tmp_path.iterdir()] == ["x.svg"]


def test_write_error_names_the_path(tmp_path):
    with pytest.raises(OSError) as e:
        write_atomic(tmp_path / "missing" / "x.svg", "text")
    assert "missing" in str(e.value)
