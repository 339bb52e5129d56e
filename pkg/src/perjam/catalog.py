"""Built-in example packings.

``dodecagon_16`` is a regular unit-edge dodecagon plus one unit square per
period, on a square lattice of cell area ``11 + 6*sqrt(3)``.  Coordinates are
exact in ``sqrt(3)``; every entry is checked against its expected invariants
the first time it is loaded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .lattice import Lattice
from .packing import PeriodicPacking, density, detect_contacts, validate

S3 = math.sqrt(3.0)


class CatalogError(KeyError):
    pass


def _one_disk_square() -> PeriodicPacking:
    return PeriodicPacking(Lattice(np.eye(2)), [[0.0, 0.0]], [0.5])


def _one_disk_triangular() -> PeriodicPacking:
    basis = np.array([[1.0, 0.5], [0.0, S3 / 2]])
    return PeriodicPacking(Lattice(basis), [[0.0, 0.0]], [0.5])


def _dodecagon_16() -> PeriodicPacking:
    a = 1 + S3 / 2  # apothem of the unit dodecagon
    h = (1 + S3) / 2
    ring = [
        (a, 0.5), (h, h), (0.5, a), (-0.5, a), (-h, h), (-a, 0.5),
        (-a, -0.5), (-h, -h), (-0.5, -a), (0.5, -a), (h, -h), (a, -0.5),
    ]
    square = [(1 + S3, 0.0), (1 + S3, -1.0), (2 + S3, -1.0), (2 + S3, 0.0)]
    basis = np.array([[S3 + 1, S3 + 2], [-S3 - 2, S3 + 1]])
    return PeriodicPacking(Lattice(basis), ring + square, [0.5] * 16)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    build: Callable[[], PeriodicPacking]
    n_vertices: int
    n_contacts: int
    density: float
    faces: dict[int, int] = field(default_factory=dict)  # face size -> count


_ENTRIES = (
    CatalogEntry(
        "one_disk_square",
        "one disk on the unit square torus; collectively jammed, not strictly jammed, N_min = 2",
        _one_disk_square, 1, 2, math.pi / 4, {4: 1}),
    CatalogEntry(
        "one_disk_triangular",
        "one disk on the hexagonal torus; strictly jammed, hence consistently jammed",
        _one_disk_triangular, 1, 3, math.pi / math.sqrt(12), {3: 2}),
    CatalogEntry(
        "dodecagon_16",
        "16 disks around a dodecagonal hole; consistently collectively jammed, not strictly jammed",
        _dodecagon_16, 16, 34, 4 * math.pi / (6 * S3 + 11), {3: 12, 4: 5, 12: 1}),
)
_BY_NAME = {e.name: e for e in _ENTRIES}


def list_catalog() -> list[tuple[str, str]]:
    return [(e.name, e.description) for e in _ENTRIES]


def entry(name: str) -> CatalogEntry:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise CatalogError(f"unknown catalog packing {name!r}; known: {', '.join(_BY_NAME)}") from None


@lru_cache(maxsize=None)
def get_packing(name: str) -> PeriodicPacking:
    e = entry(name)
    packing = e.build()
    check_entry(e, packing)
    return packing


def check_entry(e: CatalogEntry, packing: PeriodicPacking) -> None:
    """Raise ``AssertionError`` if the packing drifts from the entry's invariants."""
    from .edgeflex import trace_faces

    problems = []
    if validate(packing, 1e-9):
        problems.append("overlapping balls")
    t = detect_contacts(packing)
    if t.n_vertices != e.n_vertices:
        problems.append(f"{t.n_vertices} vertices, expected {e.n_vertices}")
    if t.n_contacts != e.n_contacts:
        problems.append(f"{t.n_contacts} contacts, expected {e.n_contacts}")
    if abs(density(packing) - e.density) > 1e-12:
        problems.append(f"density {density(packing)!r}, expected {e.density!r}")
    if e.faces and packing.dim == 2:
        census = trace_faces(t).census()
        if census != e.faces:
            problems.append(f"faces {census}, expected {e.faces}")
    if problems:
        raise AssertionError(f"catalog entry {e.name}: " + "; ".join(problems))
