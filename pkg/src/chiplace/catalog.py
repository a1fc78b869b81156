"""Reference chiplet definitions and architectures.

The heterogeneous shapes are placeholders chosen to exercise all three
rotation classes; they are not measured from any real product.
"""

from __future__ import annotations

from .model import Architecture, ChipletSpec, ChipletType, Phy


def square_chiplet(name, ctype, size=3.0, sides=("S", "E", "N", "W"), can_relay=False) -> ChipletSpec:
    """Square chiplet with one PHY centered on each listed side."""
    h = size / 2
    at = {"S": Phy(h, 0.0), "E": Phy(size, h), "N": Phy(h, size), "W": Phy(0.0, h)}
    return ChipletSpec(name, ctype, size, size, tuple(at[s] for s in sides), can_relay)


def homogeneous_specs(size=3.0) -> dict[ChipletType, ChipletSpec]:
    return {
        ChipletType.COMPUTE: square_chiplet("compute", ChipletType.COMPUTE, size, can_relay=True),
        ChipletType.MEMORY: square_chiplet("memory", ChipletType.MEMORY, size, sides=("S",)),
        ChipletType.IO: square_chiplet("io", ChipletType.IO, size, sides=("S",)),
    }


def heterogeneous_specs() -> dict[ChipletType, ChipletSpec]:
    return {
        # four side-centered PHYs: rotation invariant
        ChipletType.COMPUTE: square_chiplet("compute", ChipletType.COMPUTE, 3.0, can_relay=True),
        # PHYs on both long sides: 180-degree symmetric
        ChipletType.MEMORY: ChipletSpec("memory", ChipletType.MEMORY, 4.0, 2.0, (Phy(2.0, 0.0), Phy(2.0, 2.0))),
        # single PHY: every rotation differs
        ChipletType.IO: ChipletSpec("io", ChipletType.IO, 2.0, 3.0, (Phy(1.0, 0.0),)),
    }


def build(specs: dict[ChipletType, ChipletSpec], n_compute: int, n_memory: int = 0, n_io: int = 0,
          **kwargs) -> Architecture:
    catalog = [
        (specs[ChipletType.COMPUTE], n_compute),
        (specs[ChipletType.MEMORY], n_memory),
        (specs[ChipletType.IO], n_io),
    ]
    return Architecture.from_counts(catalog, **kwargs)


def homogeneous_architecture(n_compute=32, n_memory=4, n_io=4, **kwargs) -> Architecture:
    return build(homogeneous_specs(), n_compute, n_memory, n_io, **kwargs)


def heterogeneous_architecture(n_compute=32, n_memory=4, n_io=4, **kwargs) -> Architecture:
    return build(heterogeneous_specs(), n_compute, n_memory, n_io, **kwargs)
