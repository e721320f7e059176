"""Named example graphs and groups used by the CLI and the test suite."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import InputError
from .graph_core import CayleySource, Fig1Source, GraphSource, GridSource, RingSource
from .group_oracle import (
    FiniteTableOracle,
    FreeAbelianOracle,
    FreeGroupOracle,
    FreeProductOracle,
    GroupOracle,
    VirtuallyFreeData,
    VirtuallyFreeOracle,
)


def free_group_f2() -> FreeGroupOracle:
    return FreeGroupOracle(["a", "b"])


def pgl_oracle() -> FreeProductOracle:
    """ℤ/2 * ℤ/3 with letters a and b, b^-1 (isomorphic to PSL(2,ℤ))."""
    return FreeProductOracle([FiniteTableOracle.cyclic(2, "a"), FiniteTableOracle.cyclic(3, "b")])


def dinf_oracle() -> VirtuallyFreeOracle:
    """ℤ ⋊ ℤ/2 with t a t = a^-1, over the free subgroup ⟨a⟩ with transversal {1, t}."""
    rules = {
        ("t", "a"): (("a^-1",), "t"),
        ("t", "a^-1"): (("a",), "t"),
        ("t", "t"): ((), "1"),
    }
    return VirtuallyFreeOracle(VirtuallyFreeData(("a",), ("1", "t"), rules))


def zz2_oracle() -> FreeProductOracle:
    """(ℤ × ℤ/2) * ℤ/2; the first factor has a central involution t."""
    rules = {
        ("t", "x"): (("x",), "t"),
        ("t", "x^-1"): (("x^-1",), "t"),
        ("t", "t"): ((), "1"),
    }
    sheet = VirtuallyFreeOracle(VirtuallyFreeData(("x",), ("1", "t"), rules))
    flip = FiniteTableOracle(["1", "s"], {("s", "s"): "1"})
    return FreeProductOracle([sheet, flip])


def grid_z2_oracle() -> FreeProductOracle:
    """(ℤ × ℤ) * ℤ/2."""
    flip = FiniteTableOracle(["1", "s"], {("s", "s"): "1"})
    return FreeProductOracle([FreeAbelianOracle(["x", "y"]), flip])


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    make_source: Callable[[], GraphSource]
    k: int
    oracle: Callable[[], GroupOracle] | None = None
    generators: tuple[str, ...] | None = None


def _cayley(make_oracle, gens=None):
    return lambda: CayleySource(make_oracle(), gens)


FIXTURES: dict[str, Fixture] = {
    "f2": Fixture("f2", "free group on a, b", _cayley(free_group_f2), 1, free_group_f2),
    "pgl": Fixture("pgl", "ℤ/2 * ℤ/3 on a, b, b^-1", _cayley(pgl_oracle), 1, pgl_oracle),
    "dinf": Fixture(
        "dinf", "infinite dihedral group on a, a^-1, t", _cayley(dinf_oracle, ("a", "a^-1", "t")), 2,
        dinf_oracle, ("a", "a^-1", "t"),
    ),
    "zz2": Fixture(
        "zz2", "(ℤ × ℤ/2) * ℤ/2 on x, x^-1, t, s", _cayley(zz2_oracle, ("x", "x^-1", "t", "s")), 2,
        zz2_oracle, ("x", "x^-1", "t", "s"),
    ),
    "grid_z2": Fixture("grid_z2", "(ℤ × ℤ) * ℤ/2 on x, y, s", _cayley(grid_z2_oracle), 1, grid_z2_oracle),
    "grid": Fixture("grid", "the square grid ℤ × ℤ", GridSource, 4),
    "fig1": Fixture("fig1", "two-row strip with a vertical spike at i = 0", Fig1Source, 2),
    "ring": Fixture("ring", "two rays joined through a 4-cycle", RingSource, 2),
}


def get_fixture(name: str) -> Fixture:
    try:
        return FIXTURES[name]
    except KeyError:
        raise InputError(f"unknown fixture {name!r} (known: {', '.join(sorted(FIXTURES))})") from None
