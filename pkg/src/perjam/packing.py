"""Periodic ball packings: overlap checks, contact detection and density."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .framework import Contact, Kind, Tensegrity
from .lattice import Lattice, dual_basis


class PackingError(ValueError):
    pass


@dataclass(frozen=True)
class PeriodicPacking:
    lattice: Lattice
    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        c = np.array(self.centers, dtype=float)
        r = np.array(self.radii, dtype=float).reshape(-1)
        if c.ndim != 2 or c.shape[1] != self.lattice.dim:
            raise PackingError("centers must be an n x d array")
        if r.size != c.shape[0]:
            raise PackingError("need one radius per center")
        if c.shape[0] == 0:
            raise PackingError("a packing needs at least one ball")
        if np.any(~np.isfinite(r)) or np.any(r <= 0):
            raise PackingError("radii must be positive")
        c.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)

    @property
    def dim(self) -> int:
        return self.lattice.dim

    @property
    def n(self) -> int:
        return self.centers.shape[0]

    def default_tol(self) -> float:
        return 1e-9 * float(np.mean(self.radii))


@dataclass(frozen=True)
class Overlap:
    i: int
    j: int
    offset: tuple[int, ...]
    depth: float


def _pairs(packing: PeriodicPacking, reach: float):
    """Yield ``(i, j, offset, distance)`` for every canonical pair closer than ``r_i + r_j + reach``."""
    h = dual_basis(packing.lattice)
    hnorm = np.linalg.norm(h, axis=1)
    p, r = packing.centers, packing.radii
    basis = packing.lattice.basis
    for i in range(packing.n):
        for j in range(i, packing.n):
            cutoff = r[i] + r[j] + reach
            # lattice coordinates of -(p_j - p_i) bound the offsets worth testing
            centre = h @ (p[i] - p[j])
            width = cutoff * hnorm
            ranges = [range(math.ceil(c - w), math.floor(c + w) + 1) for c, w in zip(centre, width)]
            for off in itertools.product(*ranges):
                if i == j and not _lex_positive(off):
                    continue
                dist = float(np.linalg.norm(p[j] + basis @ np.array(off, dtype=float) - p[i]))
                if dist <= cutoff:
                    yield i, j, tuple(int(v) for v in off), dist


def _lex_positive(off) -> bool:
    for v in off:
        if v:
            return v > 0
    return False


def validate(packing: PeriodicPacking, tol: float | None = None) -> list[Overlap]:
    """Every canonical pair that interpenetrates by more than ``tol``."""
    if tol is None:
        tol = packing.default_tol()
    if tol < 0:
        raise PackingError("tolerance must be nonnegative")
    r = packing.radii
    out = []
    for i, j, off, dist in _pairs(packing, 0.0):
        depth = r[i] + r[j] - dist
        if depth > tol:
            out.append(Overlap(i, j, off, float(depth)))
    return out


def detect_contacts(packing: PeriodicPacking, tol: float | None = None,
                    kind: Kind = Kind.STRUT) -> Tensegrity:
    """Contact framework of the packing, one canonical contact per tangency."""
    if tol is None:
        tol = packing.default_tol()
    r = packing.radii
    contacts = [Contact(i, j, off, kind) for i, j, off, dist in _pairs(packing, tol)
                if abs(dist - (r[i] + r[j])) <= tol]
    contacts.sort(key=lambda c: (c.i, c.j, c.offset))
    return Tensegrity(packing.lattice, packing.centers, tuple(contacts))


def ball_volume(d: int, radius: float) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * radius ** d


def density(packing: PeriodicPacking) -> float:
    """Fraction of the period cell covered by balls."""
    return sum(ball_volume(packing.dim, float(r)) for r in packing.radii) / packing.lattice.volume
