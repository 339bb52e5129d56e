"""Period lattices, integer sublattices and the characters of their quotients.

Integer work (Smith and Hermite forms, transversals) is done with plain
Python ints, so there is no overflow and no wraparound.  Characters keep
their phases as exact fractions of a turn and only become complex numbers
when asked.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

IntMatrix = list[list[int]]


class LatticeError(ValueError):
    """Raised for singular or otherwise malformed lattice input."""


def _as_int_matrix(rows: Sequence[Sequence[int]]) -> IntMatrix:
    out = []
    for row in rows:
        new = []
        for v in row:
            iv = int(v)
            if iv != v:
                raise LatticeError(f"non-integer entry {v!r}")
            new.append(iv)
        out.append(new)
    n = len(out)
    if n == 0 or any(len(r) != n for r in out):
        raise LatticeError("expected a non-empty square integer matrix")
    return out


def _identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))]
            for i in range(len(a))]


def int_det(m: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    a = [list(row) for row in m]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class Lattice:
    """A period lattice given by the columns of ``basis`` (Cartesian units)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise LatticeError("lattice basis must be a square matrix")
        if not np.all(np.isfinite(b)):
            raise LatticeError("lattice basis has non-finite entries")
        scale = max(np.abs(b).max(), 1.0)
        if abs(np.linalg.det(b)) <= 1e-12 * scale ** b.shape[0]:
            raise LatticeError("lattice basis is singular")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def generators(self) -> list[np.ndarray]:
        return [self.basis[:, m] for m in range(self.dim)]

    @property
    def volume(self) -> float:
        return abs(float(np.linalg.det(self.basis)))

    def point(self, coords) -> np.ndarray:
        """Cartesian position of the lattice vector with integer coordinates ``coords``."""
        return self.basis @ np.asarray(coords, dtype=float)

    def sublattice_basis(self, sub: "Sublattice") -> "Lattice":
        return Lattice(self.basis @ np.array(sub.coeffs, dtype=float))


def dual_basis(lattice: Lattice) -> np.ndarray:
    """Rows h_j of the inverse basis, so that ``h_j . g_i`` is the Kronecker delta."""
    return np.linalg.inv(lattice.basis)


@dataclass(frozen=True)
class Sublattice:
    """Finite-index sublattice; columns of ``coeffs`` are its generators in lattice coordinates."""

    coeffs: tuple[tuple[int, ...], ...]

    def __init__(self, coeffs: Sequence[Sequence[int]]):
        m = _as_int_matrix(coeffs)
        if int_det(m) == 0:
            raise LatticeError("sublattice matrix is singular")
        object.__setattr__(self, "coeffs", tuple(tuple(r) for r in m))

    @classmethod
    def from_columns(cls, *columns: Sequence[int]) -> "Sublattice":
        d = len(columns)
        return cls([[int(columns[j][i]) for j in range(d)] for i in range(d)])

    @classmethod
    def diagonal(cls, *entries: int) -> "Sublattice":
        d = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(d)] for i in range(d)])

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    @property
    def index(self) -> int:
        return abs(int_det(self.matrix))

    @property
    def matrix(self) -> IntMatrix:
        return [list(r) for r in self.coeffs]

    @property
    def columns(self) -> list[tuple[int, ...]]:
        return [tuple(r[j] for r in self.coeffs) for j in range(self.dim)]

    def __str__(self) -> str:
        return "cols" + "".join(str(c) for c in self.columns)


@dataclass(frozen=True)
class QuotientGroup:
    """Smith decomposition ``left @ S @ right == diag(factors)`` of a sublattice matrix."""

    factors: tuple[int, ...]
    left: tuple[tuple[int, ...], ...]
    right: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return math.prod(self.factors)


def smith_normal_form(sub: Sublattice | Sequence[Sequence[int]]) -> QuotientGroup:
    """Smith normal form with unimodular transforms, exact integer arithmetic.

    The returned factors are positive and satisfy ``factors[i] | factors[i+1]``.
    """
    s = sub.matrix if isinstance(sub, Sublattice) else _as_int_matrix(sub)
    if int_det(s) == 0:
        raise LatticeError("cannot form the quotient by a singular sublattice")
    n = len(s)
    a = [row[:] for row in s]
    left = _identity(n)
    right = _identity(n)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        left[i], left[j] = left[j], left[i]

    def swap_cols(i, j):
        for mat in (a, right):
            for row in mat:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst -= q * row_src
        for mat in (a, left):
            mat[dst] = [x - q * y for x, y in zip(mat[dst], mat[src])]

    def add_col(dst, src, q):  # col_dst -= q * col_src
        for mat in (a, right):
            for row in mat:
                row[dst] -= q * row[src]

    for t in range(n):
        while True:
            # smallest nonzero entry of the trailing block becomes the pivot
            piv = min(((abs(a[i][j]), i, j) for i in range(t, n) for j in range(t, n)
                       if a[i][j] != 0))
            _, pi, pj = piv
            swap_rows(t, pi)
            swap_cols(t, pj)
            done = True
            for i in range(t + 1, n):
                q = a[i][t] // a[t][t]
                if q:
                    add_row(i, t, q)
                if a[i][t] != 0:
                    done = False
            for j in range(t + 1, n):
                q = a[t][j] // a[t][t]
                if q:
                    add_col(j, t, q)
                if a[t][j] != 0:
                    done = False
            if not done:
                continue
            # pivot must divide the rest of the block
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, n)
                        if a[i][j] % a[t][t] != 0), None)
            if bad is None:
                break
            add_row(t, bad[0], -1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            left[t] = [-x for x in left[t]]

    factors = tuple(a[i][i] for i in range(n))
    return QuotientGroup(factors, tuple(map(tuple, left)), tuple(map(tuple, right)))


def hermite_normal_form(sub: Sublattice | Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix]:
    """Column Hermite form ``H = S @ V`` with V unimodular.

    H is lower triangular with positive diagonal and ``0 <= H[i][j] < H[i][i]``
    for ``j < i``.  Two matrices generate the same sublattice iff their forms agree.
    """
    s = sub.matrix if isinstance(sub, Sublattice) else _as_int_matrix(sub)
    n = len(s)
    h = [row[:] for row in s]
    v = _identity(n)

    def col_op(dst, src, q):
        for mat in (h, v):
            for row in mat:
                row[dst] -= q * row[src]

    def col_swap(i, j):
        for mat in (h, v):
            for row in mat:
                row[i], row[j] = row[j], row[i]

    def col_neg(i):
        for mat in (h, v):
            for row in mat:
                row[i] = -row[i]

    for r in range(n):
        # gcd of row r across columns r.. collected into column r
        while True:
            nz = [j for j in range(r, n) if h[r][j] != 0]
            if not nz:
                raise LatticeError("sublattice matrix is singular")
            jmin = min(nz, key=lambda j: abs(h[r][j]))
            if jmin != r:
                col_swap(r, jmin)
            others = [j for j in range(r + 1, n) if h[r][j] != 0]
            if not others:
                break
            for j in others:
                col_op(j, r, h[r][j] // h[r][r])
        if h[r][r] < 0:
            col_neg(r)
        for j in range(r):
            col_op(j, r, h[r][j] // h[r][r])
    return h, v


def hnf_key(sub: Sublattice) -> tuple[tuple[int, ...], ...]:
    """Hashable invariant of the sublattice (its Hermite form)."""
    return tuple(map(tuple, hermite_normal_form(sub)[0]))


def transversal(sub: Sublattice) -> list[tuple[int, ...]]:
    """Canonical coset representatives of lattice/sublattice.

    Digits come from the Hermite diagonal: ``0 <= t_i < H[i][i]``.  Ordered
    lexicographically; the zero vector comes first.
    """
    h, _ = hermite_normal_form(sub)
    ranges = [range(h[i][i]) for i in range(len(h))]
    return [tuple(t) for t in itertools.product(*ranges)]


def reduce_to_transversal(sub: Sublattice, point: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split ``point = r + S @ y`` with r a canonical representative.

    Returns ``(r, y)``; y is in the sublattice's own generator coordinates.
    """
    h, v = hermite_normal_form(sub)
    n = len(h)
    x = [int(c) for c in point]
    yh = [0] * n
    for i in range(n):
        q = x[i] // h[i][i]
        yh[i] = q
        for k in range(i, n):
            x[k] -= q * h[k][i]
    # S @ (V @ yh) == H @ yh
    y = tuple(sum(v[i][j] * yh[j] for j in range(n)) for i in range(n))
    return tuple(x), y


def _hnf_diagonals(d: int, m: int) -> Iterator[tuple[int, ...]]:
    if d == 1:
        yield (m,)
        return
    for a in range(1, m + 1):
        if m % a == 0:
            for rest in _hnf_diagonals(d - 1, m // a):
                yield (a,) + rest


def enumerate_sublattices(d: int, index: int) -> list[Sublattice]:
    """Every sublattice of Z^d with the given index, each once, as a Hermite form."""
    if index <= 0:
        raise LatticeError("sublattice index must be positive")
    if d <= 0:
        raise LatticeError("dimension must be positive")
    out = []
    for diag in _hnf_diagonals(d, index):
        slots = [(i, j) for i in range(d) for j in range(i)]
        for vals in itertools.product(*(range(diag[i]) for i, _ in slots)):
            h = [[0] * d for _ in range(d)]
            for i in range(d):
                h[i][i] = diag[i]
            for (i, j), val in zip(slots, vals):
                h[i][j] = val
            out.append(Sublattice(h))
    return out


def divisor_sum(m: int) -> int:
    return sum(k for k in range(1, m + 1) if m % k == 0)


@dataclass(frozen=True)
class QuotientCharacter:
    """A character of lattice/sublattice, stored as exact phase turns per generator.

    ``turns[m]`` is the fraction of a full turn, so the generator phase is
    ``exp(2*pi*i*turns[m])``.
    """

    turns: tuple[Fraction, ...]
    labels: tuple[int, ...] = field(default=(), compare=False)

    @classmethod
    def trivial(cls, d: int) -> "QuotientCharacter":
        return cls(tuple(Fraction(0) for _ in range(d)))

    @classmethod
    def from_turns(cls, *turns) -> "QuotientCharacter":
        return cls(tuple(Fraction(t) % 1 for t in turns))

    @property
    def dim(self) -> int:
        return len(self.turns)

    @property
    def is_trivial(self) -> bool:
        return all(t == 0 for t in self.turns)

    @property
    def phases(self) -> np.ndarray:
        return np.array([_root(t) for t in self.turns])

    def turns_at(self, point: Sequence[int]) -> Fraction:
        return sum((int(c) * t for c, t in zip(point, self.turns)), Fraction(0)) % 1

    def __call__(self, point: Sequence[int]) -> complex:
        """Value of the character at a lattice vector given in lattice coordinates."""
        return _root(self.turns_at(point))

    def conjugate(self) -> "QuotientCharacter":
        return QuotientCharacter(tuple((-t) % 1 for t in self.turns))

    def kills(self, sub: Sublattice) -> bool:
        return all(self.turns_at(col) == 0 for col in sub.columns)

    def __str__(self) -> str:
        return "(" + ", ".join(str(t) for t in self.turns) + ") turns"


def _root(t: Fraction) -> complex:
    t = Fraction(t) % 1
    # exact values on the axes keep trivial-character matrices bit-identical
    if t == 0:
        return 1 + 0j
    if t == Fraction(1, 2):
        return -1 + 0j
    if t == Fraction(1, 4):
        return 1j
    if t == Fraction(3, 4):
        return -1j
    ang = 2 * math.pi * float(t)
    return complex(math.cos(ang), math.sin(ang))


def enumerate_characters(sub: Sublattice, quotient: QuotientGroup | None = None) -> list[QuotientCharacter]:
    """All ``index`` characters of lattice/sublattice, trivial one first.

    With ``U S V = D`` the map ``x -> U x mod D`` identifies the quotient with
    a product of cyclic groups, whose characters are ``x -> sum k_i (Ux)_i / d_i``.
    """
    q = quotient if quotient is not None else smith_normal_form(sub)
    d = len(q.factors)
    chars = []
    for ks in itertools.product(*(range(f) for f in q.factors)):
        turns = tuple(
            sum((Fraction(ks[i] * q.left[i][m], q.factors[i]) for i in range(d)), Fraction(0)) % 1
            for m in range(d))
        chars.append(QuotientCharacter(turns, labels=ks))
    chars.sort(key=lambda c: (not c.is_trivial, c.turns))
    return chars
