"""Periodic tensegrities and their rigidity operators.

Flex coordinates are laid out vertex-major (``d`` columns per vertex); the
affine operator appends the ``d*d`` entries of the lattice deformation ``A``
in row-major order.  Every operator keeps one row per contact, including the
identically-zero rows of self-contacts, so row ``k`` always means contact ``k``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .lattice import Lattice, QuotientCharacter, Sublattice, reduce_to_transversal, transversal


class Kind(str, enum.Enum):
    BAR = "bar"
    CABLE = "cable"
    STRUT = "strut"


class FrameworkError(ValueError):
    """Malformed tensegrity data."""


def canonical_offset(i: int, j: int, offset: Sequence[int]) -> tuple[int, int, tuple[int, ...]]:
    """Orient a contact so that ``i <= j`` and self-contacts have a positive offset."""
    off = tuple(int(v) for v in offset)
    if i > j or (i == j and _lex_negative(off)):
        return j, i, tuple(-v for v in off)
    return i, j, off


def _lex_negative(off: Sequence[int]) -> bool:
    for v in off:
        if v:
            return v < 0
    return False


@dataclass(frozen=True)
class Contact:
    i: int
    j: int
    offset: tuple[int, ...]
    kind: Kind = Kind.STRUT

    def __post_init__(self):
        object.__setattr__(self, "offset", tuple(int(v) for v in self.offset))
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.i == self.j and not any(self.offset):
            raise FrameworkError(f"contact joins vertex {self.i} to itself with zero offset")

    def canonical(self) -> "Contact":
        i, j, off = canonical_offset(self.i, self.j, self.offset)
        return Contact(i, j, off, self.kind)


@dataclass(frozen=True)
class Tensegrity:
    lattice: Lattice
    vertices: np.ndarray
    contacts: tuple[Contact, ...]

    def __post_init__(self):
        p = np.array(self.vertices, dtype=float)
        if p.ndim != 2 or p.shape[1] != self.lattice.dim:
            raise FrameworkError("vertex array must be n x d")
        p.setflags(write=False)
        object.__setattr__(self, "vertices", p)
        object.__setattr__(self, "contacts", tuple(self.contacts))
        n, d = p.shape
        for k, c in enumerate(self.contacts):
            if not (0 <= c.i < n and 0 <= c.j < n):
                raise FrameworkError(f"contact {k} references a missing vertex")
            if len(c.offset) != d:
                raise FrameworkError(f"contact {k} offset has wrong dimension")
        vecs = self.edge_vectors()
        lengths = np.linalg.norm(vecs, axis=1) if len(self.contacts) else np.zeros(0)
        scale = max(1.0, float(np.abs(self.lattice.basis).max()))
        zero = np.flatnonzero(lengths <= 1e-12 * scale)
        if zero.size:
            raise FrameworkError(f"contact {int(zero[0])} has a zero edge vector")

    @property
    def dim(self) -> int:
        return self.lattice.dim

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_contacts(self) -> int:
        return len(self.contacts)

    @property
    def kinds(self) -> list[Kind]:
        return [c.kind for c in self.contacts]

    def edge_vectors(self) -> np.ndarray:
        if not self.contacts:
            return np.zeros((0, self.dim))
        ii = np.array([c.i for c in self.contacts])
        jj = np.array([c.j for c in self.contacts])
        off = np.array([c.offset for c in self.contacts], dtype=float)
        return self.vertices[jj] + off @ self.lattice.basis.T - self.vertices[ii]

    def with_kind(self, kind: Kind | str) -> "Tensegrity":
        kind = Kind(kind)
        return replace(self, contacts=tuple(replace(c, kind=kind) for c in self.contacts))


def edge_vector(t: Tensegrity, k: int) -> np.ndarray:
    """``p_j + B @ offset - p_i`` for contact ``k``."""
    c = t.contacts[k]
    return t.vertices[c.j] + t.lattice.point(c.offset) - t.vertices[c.i]


@dataclass
class FlexVector:
    """Vertex velocities, optionally with a lattice deformation ``affine``."""

    per_vertex: np.ndarray
    affine: np.ndarray | None = None

    @classmethod
    def from_coords(cls, coords, n: int, d: int, affine: bool = False) -> "FlexVector":
        coords = np.asarray(coords)
        pv = coords[:n * d].reshape(n, d)
        a = coords[n * d:n * d + d * d].reshape(d, d) if affine else None
        return cls(pv, a)

    def coords(self) -> np.ndarray:
        parts = [np.asarray(self.per_vertex).reshape(-1)]
        if self.affine is not None:
            parts.append(np.asarray(self.affine).reshape(-1))
        return np.concatenate(parts)

    @property
    def real(self) -> "FlexVector":
        return FlexVector(np.real(self.per_vertex),
                          None if self.affine is None else np.real(self.affine))

    def __neg__(self) -> "FlexVector":
        return FlexVector(-self.per_vertex, None if self.affine is None else -self.affine)


@dataclass
class RigidityOperator:
    matrix: np.ndarray
    variant: str  # "periodic" | "affine" | "phase"
    n_vertices: int
    dim: int
    character: QuotientCharacter | None = field(default=None)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def apply(self, flex: FlexVector) -> np.ndarray:
        return self.matrix @ flex.coords()


def rigidity_matrix(t: Tensegrity) -> RigidityOperator:
    """Periodic operator: row ``k`` is ``e_k . (p'_j - p'_i)``."""
    n, d = t.n_vertices, t.dim
    r = np.zeros((t.n_contacts, n * d))
    for k, (c, e) in enumerate(zip(t.contacts, t.edge_vectors())):
        if c.i == c.j:
            continue
        r[k, c.j * d:(c.j + 1) * d] += e
        r[k, c.i * d:(c.i + 1) * d] -= e
    return RigidityOperator(r, "periodic", n, d)


def affine_rigidity_matrix(t: Tensegrity) -> RigidityOperator:
    """Periodic operator plus ``d*d`` columns for ``e_k . (A e_k)``."""
    n, d = t.n_vertices, t.dim
    base = rigidity_matrix(t).matrix
    e = t.edge_vectors()
    a_block = np.einsum("ka,kb->kab", e, e).reshape(t.n_contacts, d * d)
    return RigidityOperator(np.hstack([base, a_block]), "affine", n, d)


def phase_matrix(t: Tensegrity, chi: QuotientCharacter) -> RigidityOperator:
    """Complex operator for flexes that pick up ``chi(lambda)`` across lattice translates."""
    n, d = t.n_vertices, t.dim
    if chi.dim != d:
        raise FrameworkError("character dimension does not match the lattice")
    r = np.zeros((t.n_contacts, n * d), dtype=complex)
    for k, (c, e) in enumerate(zip(t.contacts, t.edge_vectors())):
        rho = chi(c.offset)
        if c.i == c.j:
            r[k, c.i * d:(c.i + 1) * d] = (rho - 1) * e
        else:
            r[k, c.j * d:(c.j + 1) * d] = rho * e
            r[k, c.i * d:(c.i + 1) * d] = -e
    return RigidityOperator(r, "phase", n, d, chi)


def translation_flexes(t: Tensegrity, affine: bool = False) -> np.ndarray:
    """Columns spanning the ``d`` rigid translations."""
    n, d = t.n_vertices, t.dim
    cols = n * d + (d * d if affine else 0)
    out = np.zeros((cols, d))
    for a in range(d):
        out[a:n * d:d, a] = 1.0
    return out


def affine_trivial_flexes(t: Tensegrity) -> np.ndarray:
    """Translations plus ``p' = 0`` with skew ``A``: ``d + d(d-1)/2`` columns."""
    n, d = t.n_vertices, t.dim
    cols = [translation_flexes(t, affine=True)]
    for a in range(d):
        for b in range(a + 1, d):
            v = np.zeros(n * d + d * d)
            v[n * d + a * d + b] = 1.0
            v[n * d + b * d + a] = -1.0
            cols.append(v[:, None])
    return np.hstack(cols)


def cover_framework(t: Tensegrity, sub: Sublattice) -> Tensegrity:
    """The same tensegrity viewed with the coarser period lattice ``sub``.

    Vertex ``(i, r)`` of the cover sits at ``p_i + B @ r`` for each canonical
    representative ``r``; its index is ``copy * n + i``.  Offsets are
    expressed in the sublattice's own generators.
    """
    if sub.dim != t.dim:
        raise FrameworkError("sublattice dimension does not match the lattice")
    reps = transversal(sub)
    where = {r: c for c, r in enumerate(reps)}
    n = t.n_vertices
    verts = np.vstack([t.vertices + t.lattice.point(r) for r in reps])
    contacts = []
    for c_src, r in enumerate(reps):
        for c in t.contacts:
            target = tuple(a + b for a, b in zip(c.offset, r))
            rep, y = reduce_to_transversal(sub, target)
            contacts.append(Contact(c_src * n + c.i, where[rep] * n + c.j, y, c.kind).canonical())
    return Tensegrity(t.lattice.sublattice_basis(sub), verts, tuple(contacts))


def lift_phase_flex(t: Tensegrity, sub: Sublattice, chi: QuotientCharacter,
                    flex: FlexVector | np.ndarray) -> FlexVector:
    """Spread a phase-periodic flex over the cover: ``q_(i, r) = chi(r) q_i``."""
    pv = flex.per_vertex if isinstance(flex, FlexVector) else np.asarray(flex).reshape(t.n_vertices, t.dim)
    reps = transversal(sub)
    return FlexVector(np.vstack([chi(r) * pv for r in reps]))


def contacts_from_records(records: Iterable[dict], d: int) -> tuple[Contact, ...]:
    out = []
    for rec in records:
        off = tuple(int(v) for v in rec["offset"])
        if len(off) != d:
            raise FrameworkError("contact offset has wrong dimension")
        out.append(Contact(int(rec["i"]), int(rec["j"]), off, Kind(rec.get("kind", "strut"))))
    return tuple(out)
