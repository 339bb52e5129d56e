"""Closed-form analytics for the equilateral pentagon unit of the twenty-disk family.

Edge directions are ``alpha, beta, gamma, delta, phi``; all formulas use
angles relative to ``alpha``.  The shape constant ``x`` decides which phase
pairs ``(mu, mu')`` admit a phase-periodic flex:
``Re(mu') - 1 = x (Re(mu) - 1)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

AF = math.asin(4 / 5)
AT = math.asin(3 / 10)


class PentagonError(ValueError):
    pass


@dataclass(frozen=True)
class PentagonAngles:
    alpha: float
    beta: float
    gamma: float
    delta: float
    phi: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.alpha, self.beta, self.gamma, self.delta, self.phi)

    def relative(self) -> "PentagonAngles":
        """Same shape rotated so that ``alpha = 0``."""
        a = self.alpha
        return PentagonAngles(0.0, self.beta - a, self.gamma - a, self.delta - a, self.phi - a)

    def closure_residual(self) -> float:
        return abs(sum(cmath.exp(1j * t) for t in self.as_tuple()))

    def check(self) -> None:
        rel = self.relative()
        for name in ("beta", "gamma", "delta"):
            if abs(math.sin(getattr(rel, name))) < 1e-12:
                raise PentagonError(f"{name} - alpha is a multiple of pi")


@dataclass(frozen=True)
class PentagonRotations:
    """Edge rotations of the lower pentagon, in the order (a, b, c, d, r)."""

    a: complex
    b: complex
    c: complex
    d: complex
    r: complex


@dataclass(frozen=True)
class QuadraticCoefficients:
    A: float
    B: float
    C: float

    def roots(self) -> tuple[complex, complex]:
        disc = cmath.sqrt(self.B ** 2 - 4 * self.A * self.C)
        return ((-self.B + disc) / (2 * self.A), (-self.B - disc) / (2 * self.A))


def reference_realization() -> PentagonAngles:
    """The realization built from ``asin(4/5)`` and ``asin(3/10)``."""
    return PentagonAngles(0.0, -AF - AT, AF - AT + math.pi, math.pi - 2 * AT, math.pi / 2 - AT)


def _cot(t: float) -> float:
    return math.cos(t) / math.sin(t)


def shape_constant(angles: PentagonAngles) -> float:
    angles.check()
    r = angles.relative()
    den = _cot(r.beta) - _cot(r.gamma)
    if abs(den) < 1e-12:
        raise PentagonError("beta - alpha and gamma - alpha agree mod pi")
    return (_cot(r.delta) - _cot(r.gamma)) / den


def flex_matrix(angles: PentagonAngles, mu: complex, mu2: complex) -> np.ndarray:
    """The 4 x 4 system in the rotations (a, b, c, d) once ``r = 0``."""
    r = angles.relative()
    cb, cg, cd = math.cos(r.beta), math.cos(r.gamma), math.cos(r.delta)
    sb, sg, sd = math.sin(r.beta), math.sin(r.gamma), math.sin(r.delta)
    return np.array([
        [1, cb, cg, cd],
        [0, sb, sg, sd],
        [1, mu2 * cb, mu2 * mu * cg, mu * cd],
        [0, mu2 * sb, mu2 * mu * sg, mu * sd],
    ], dtype=complex)


def flex_determinant(angles: PentagonAngles, mu: complex, mu2: complex) -> complex:
    return complex(np.linalg.det(flex_matrix(angles, mu, mu2)))


def normalized_flex_determinant(angles: PentagonAngles, mu: complex, mu2: complex) -> float:
    """``|det|`` divided by the product of row norms (Hadamard bound), so it lies in [0, 1]."""
    m = flex_matrix(angles, mu, mu2)
    scale = float(np.prod(np.linalg.norm(m, axis=1)))
    return abs(np.linalg.det(m)) / scale


def quadratic(angles: PentagonAngles, mu: complex) -> QuadraticCoefficients:
    """Coefficients of ``A mu'^2 + B mu' + C`` with the common ``mu`` factor removed."""
    r = angles.relative()
    a = _cot(r.beta) - _cot(r.gamma)
    if abs(a) < 1e-12:
        raise PentagonError("degenerate packing: A = 0")
    re = complex(mu).real
    b = -2 * _cot(r.beta) + (2 - 2 * re) * _cot(r.delta) + 2 * re * _cot(r.gamma)
    return QuadraticCoefficients(a, b, a)


def critical_real_part(angles: PentagonAngles, mu: complex) -> tuple[float, bool]:
    """``Re(mu') = -B / 2A`` and whether the roots lie on the unit circle."""
    q = quadratic(angles, mu)
    re = -q.B / (2 * q.A)
    return re, abs(re) <= 1.0


def phase_flex_predicate(angles: PentagonAngles, mu: complex, mu2: complex, tol: float = 1e-8) -> bool:
    """Whether the unit phases ``(mu, mu')`` admit a flex, from the shape constant alone."""
    if abs(mu - 1) < 1e-15 and abs(mu2 - 1) < 1e-15:
        raise PentagonError("the trivial phase pair is excluded")
    x = shape_constant(angles)
    # cross-multiplied form covers the mu = 1 branch without a division
    return abs((complex(mu2).real - 1) - x * (complex(mu).real - 1)) <= tol * max(1.0, abs(x))


def phases_for_ratio(angles: PentagonAngles, mu: complex) -> tuple[complex, complex] | None:
    """The two unit ``mu'`` with ``Re(mu') - 1 = x (Re(mu) - 1)``, if they exist."""
    re = 1 + shape_constant(angles) * (complex(mu).real - 1)
    if abs(re) > 1:
        return None
    im = math.sqrt(max(0.0, 1 - re * re))
    return complex(re, im), complex(re, -im)


@dataclass(frozen=True)
class RealizationCheck:
    rigid: bool
    determinant: float
    nullity: int
    kernel: PentagonRotations | None = None


def realization_matrix(angles: PentagonAngles) -> np.ndarray:
    """The 5 x 5 vertex-tour system in (a, b, c, d, r)."""
    al, be, ga, de, ph = angles.as_tuple()
    c, s = math.cos, math.sin
    p3 = ph + math.pi / 3
    return np.array([
        [1, 0, 0, c(de), 4 * c(ph)],
        [0, 0, 0, s(de), 4 * s(ph)],
        [0, 0, c(ga), c(de), 3 * c(p3) - c(ph)],
        [0, 0, s(ga), s(de), 3 * s(p3) - s(ph)],
        [s(al), s(be), s(ga), s(de), s(ph)],
    ])


def realization_rigidity_check(angles: PentagonAngles, tol: float = 1e-10) -> RealizationCheck:
    if angles.closure_residual() > 1e-8:
        raise PentagonError("angles do not close up into a pentagon")
    m = realization_matrix(angles)
    _, s, vt = np.linalg.svd(m)
    nullity = int(np.sum(s <= tol * s[0]))
    kernel = PentagonRotations(*vt[-1]) if nullity else None
    return RealizationCheck(nullity == 0, float(np.linalg.det(m)), nullity, kernel)


def reference_phi() -> float:
    return reference_realization().phi


def solve_symmetric_pentagon(alpha: float, phi: float | None = None) -> PentagonAngles:
    """Bilaterally symmetric pentagon with given ``alpha`` and fixed ``phi``.

    Symmetry fixes ``delta = 2 phi - alpha`` and ``gamma = 2 phi - beta``;
    closure along the symmetry axis reads
    ``2 cos(alpha - phi) + 2 cos(beta - phi) + 1 = 0`` and ``beta`` is taken on
    the branch ``beta - phi`` in ``(-pi, 0)``, the one holding the reference shape.
    """
    phi = reference_phi() if phi is None else phi

    def axis(beta: float) -> float:
        return 2 * math.cos(alpha - phi) + 2 * math.cos(beta - phi) + 1

    lo, hi = phi - math.pi, phi
    if axis(lo) * axis(hi) > 0:
        raise PentagonError(f"no symmetric pentagon for alpha = {alpha!r}")
    beta = brentq(axis, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    out = PentagonAngles(alpha, beta, 2 * phi - beta, 2 * phi - alpha, phi)
    if out.closure_residual() > 1e-10:
        raise PentagonError("symmetric pentagon failed to close")
    return out


def squish_direction(angles: PentagonAngles) -> tuple[float, ...]:
    """Exact tangent ``(d alpha, d beta, d gamma, d delta, d phi)`` of the symmetric family."""
    db = -math.sin(angles.alpha - angles.phi) / math.sin(angles.beta - angles.phi)
    return (1.0, db, -db, -1.0, 0.0)


def shape_gradient(angles: PentagonAngles) -> np.ndarray:
    """Partial derivatives of ``x`` with respect to (alpha, beta, gamma, delta, phi)."""
    r = angles.relative()
    cb, cg, cd = _cot(r.beta), _cot(r.gamma), _cot(r.delta)
    den = cb - cg
    num = cd - cg
    dcot = {n: -1.0 / math.sin(getattr(r, n)) ** 2 for n in ("beta", "gamma", "delta")}
    d_beta = -num * dcot["beta"] / den ** 2
    d_gamma = (-dcot["gamma"] * den + num * dcot["gamma"]) / den ** 2
    d_delta = dcot["delta"] / den
    # x depends only on differences from alpha
    return np.array([-(d_beta + d_gamma + d_delta), d_beta, d_gamma, d_delta, 0.0])


def shape_derivative(angles: PentagonAngles, direction) -> float:
    """Chain rule: directional derivative of ``x`` along ``direction``."""
    return float(shape_gradient(angles) @ np.asarray(direction, dtype=float))


def finite_difference_shape_derivative(alpha: float, h: float = 1e-5, phi: float | None = None) -> float:
    """Central difference of ``x`` along the symmetric family."""
    xp = shape_constant(solve_symmetric_pentagon(alpha + h, phi))
    xm = shape_constant(solve_symmetric_pentagon(alpha - h, phi))
    return (xp - xm) / (2 * h)


def finite_difference_slope(alpha: float, h: float = 1e-5, phi: float | None = None) -> float:
    """Central difference of ``beta`` along the symmetric family."""
    bp = solve_symmetric_pentagon(alpha + h, phi).beta
    bm = solve_symmetric_pentagon(alpha - h, phi).beta
    return (bp - bm) / (2 * h)


def find_shape_for_x(x_target: float, bracket: tuple[float, float] = (-0.1, 0.1),
                     phi: float | None = None, tol: float = 1e-8,
                     samples: int = 64) -> PentagonAngles | None:
    """Symmetric pentagon whose shape constant is ``x_target``, or ``None`` if not bracketed.

    ``x`` is not monotone across the default bracket (it bottoms out just
    right of ``alpha = 0``), so the bracket is scanned for sign changes and
    the root nearest its midpoint wins.
    """

    def f(alpha: float) -> float:
        return shape_constant(solve_symmetric_pentagon(alpha, phi)) - x_target

    grid = np.linspace(bracket[0], bracket[1], samples + 1)
    values = []
    for a in grid:
        try:
            values.append(f(a))
        except PentagonError:
            values.append(math.nan)
    roots = []
    for k in range(samples):
        lo, hi = values[k], values[k + 1]
        if math.isnan(lo) or math.isnan(hi):
            continue
        if lo == 0:
            roots.append(float(grid[k]))
        elif lo * hi < 0:
            roots.append(brentq(f, grid[k], grid[k + 1], xtol=1e-15, maxiter=200))
    if values[-1] == 0:
        roots.append(float(grid[-1]))
    centre = 0.5 * (bracket[0] + bracket[1])
    for alpha in sorted(roots, key=lambda a: abs(a - centre)):
        out = solve_symmetric_pentagon(alpha, phi)
        if abs(shape_constant(out) - x_target) <= tol:
            return out
    return None
