"""Dense numerical primitives: tolerance-aware rank/nullspace and a small LP solver.

The LP solver is a two-phase tableau simplex using Bland's rule, so a given
input always takes the same pivot path.  Problems here have at most a few
hundred variables; nothing is sparse.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

DEFAULT_RANK_TOL = 1e-9


class NumericalError(RuntimeError):
    """Non-finite input or a solver that failed to converge."""


@dataclass
class RankResult:
    rank: int
    nullity: int
    nullspace: np.ndarray  # orthonormal columns
    singular_values: np.ndarray  # descending
    threshold: float

    @property
    def sigma_min(self) -> float:
        """Smallest singular value, counting missing rows as zeros."""
        if self.nullity > 0 and self.singular_values.size < self.rank + self.nullity:
            return 0.0
        return float(self.singular_values[-1]) if self.singular_values.size else 0.0


def rank_nullspace(m, tol_factor: float = DEFAULT_RANK_TOL, *, abs_floor: float = 0.0) -> RankResult:
    """Numerical rank and an orthonormal nullspace basis.

    Singular values at or below ``max(tol_factor * sigma_max, abs_floor)`` count
    as zero.  Works for real and complex input.
    """
    a = np.asarray(m)
    if a.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if not np.all(np.isfinite(a)):
        raise NumericalError("matrix has NaN or infinite entries")
    rows, cols = a.shape
    if rows == 0 or cols == 0:
        return RankResult(0, cols, np.eye(cols, dtype=a.dtype if cols else float),
                          np.zeros(0), abs_floor)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    thresh = max(tol_factor * smax, abs_floor)
    rank = int(np.sum(s > thresh)) if smax > 0 else 0
    basis = vh[rank:].conj().T
    return RankResult(rank, cols - rank, basis, s, thresh)


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpOutcome:
    status: LpStatus
    optimum: float = float("nan")
    witness: np.ndarray | None = None
    # sensitivities of the reported optimum to the right-hand sides
    dual_eq: np.ndarray | None = None
    dual_ub: np.ndarray | None = None
    pivots: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _as_2d(a, ncols):
    if a is None:
        return np.zeros((0, ncols))
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return np.zeros((0, ncols))
    if a.shape[1] != ncols:
        raise ValueError(f"constraint matrix has {a.shape[1]} columns, expected {ncols}")
    return a


def _as_1d(b, nrows, what):
    if b is None:
        b = np.zeros(nrows)
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.size != nrows:
        raise ValueError(f"{what} has length {b.size}, expected {nrows}")
    return b


def solve_lp(c, *, a_eq=None, b_eq=None, a_ub=None, b_ub=None, bounds=None,
             maximize: bool = False, method: str = "bland", tol: float = 1e-9,
             max_pivots: int = 50_000) -> LpOutcome:
    """Optimize ``c @ x`` subject to ``a_eq x = b_eq``, ``a_ub x <= b_ub`` and bounds.

    ``bounds`` is a list of ``(lo, hi)`` pairs (``None`` for no bound) or a single
    pair applied to all variables; variables are free by default.  ``method``
    selects the in-house Bland simplex (``"bland"``) or SciPy's HiGHS (``"highs"``).
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    n = c.size
    a_eq = _as_2d(a_eq, n)
    a_ub = _as_2d(a_ub, n)
    b_eq = _as_1d(b_eq, a_eq.shape[0], "b_eq")
    b_ub = _as_1d(b_ub, a_ub.shape[0], "b_ub")
    if bounds is None:
        bounds = [(None, None)] * n
    elif len(bounds) == 2 and not isinstance(bounds[0], (tuple, list)):
        bounds = [tuple(bounds)] * n
    if len(bounds) != n:
        raise ValueError(f"bounds has {len(bounds)} entries, expected {n}")
    for arr in (c, a_eq, a_ub, b_eq, b_ub):
        if not np.all(np.isfinite(arr)):
            raise NumericalError("LP data has NaN or infinite entries")
    if method == "highs":
        return _solve_highs(c, a_eq, b_eq, a_ub, b_ub, bounds, maximize)
    if method != "bland":
        raise ValueError(f"unknown LP method {method!r}")
    return _solve_bland(c, a_eq, b_eq, a_ub, b_ub, bounds, maximize, tol, max_pivots)


def _solve_highs(c, a_eq, b_eq, a_ub, b_ub, bounds, maximize):
    from scipy.optimize import linprog

    sign = -1.0 if maximize else 1.0
    res = linprog(sign * c, A_ub=a_ub if a_ub.size else None, b_ub=b_ub if a_ub.size else None,
                  A_eq=a_eq if a_eq.size else None, b_eq=b_eq if a_eq.size else None,
                  bounds=bounds, method="highs")
    if res.status == 2:
        return LpOutcome(LpStatus.INFEASIBLE)
    if res.status == 3:
        return LpOutcome(LpStatus.UNBOUNDED)
    if res.status != 0:
        raise NumericalError(f"HiGHS failed: {res.message}")
    dual_eq = sign * np.asarray(res.eqlin.marginals) if a_eq.size else np.zeros(0)
    dual_ub = sign * np.asarray(res.ineqlin.marginals) if a_ub.size else np.zeros(0)
    return LpOutcome(LpStatus.OPTIMAL, float(sign * res.fun), np.asarray(res.x),
                     dual_eq, dual_ub, int(getattr(res, "nit", 0)))


def _solve_bland(c, a_eq, b_eq, a_ub, b_ub, bounds, maximize, tol, max_pivots):
    n = c.size
    # --- rewrite every variable as an affine image of nonnegative ones:
    #     x = shift + cols @ y,  y >= 0
    shift = np.zeros(n)
    cols = []  # list of (original var, coefficient)
    extra_ub = []  # (new var index, bound) for finite-width boxes
    for j, (lo, hi) in enumerate(bounds):
        lo = -np.inf if lo is None else float(lo)
        hi = np.inf if hi is None else float(hi)
        if lo > hi:
            return LpOutcome(LpStatus.INFEASIBLE)
        if np.isfinite(lo):
            shift[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                extra_ub.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            shift[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    ny = len(cols)
    embed = np.zeros((n, ny))
    for k, (j, s) in enumerate(cols):
        embed[j, k] = s

    m_eq, m_ub, m_box = a_eq.shape[0], a_ub.shape[0], len(extra_ub)
    m = m_eq + m_ub + m_box
    nslack = m_ub + m_box
    a = np.zeros((m, ny + nslack))
    b = np.zeros(m)
    a[:m_eq, :ny] = a_eq @ embed
    b[:m_eq] = b_eq - a_eq @ shift
    a[m_eq:m_eq + m_ub, :ny] = a_ub @ embed
    b[m_eq:m_eq + m_ub] = b_ub - a_ub @ shift
    for r, (k, width) in enumerate(extra_ub):
        a[m_eq + m_ub + r, k] = 1.0
        b[m_eq + m_ub + r] = width
    for r in range(nslack):
        a[m_eq + r, ny + r] = 1.0
    row_sign = np.where(b < 0, -1.0, 1.0)
    a *= row_sign[:, None]
    b *= row_sign

    sign = -1.0 if maximize else 1.0
    cost = np.zeros(ny + nslack)
    cost[:ny] = sign * (c @ embed)
    nvar = ny + nslack

    # tableau: [A | I_art | b]; the artificial block tracks B^{-1}
    tab = np.zeros((m, nvar + m + 1))
    tab[:, :nvar] = a
    tab[:, nvar:nvar + m] = np.eye(m)
    tab[:, -1] = b
    basis = list(range(nvar, nvar + m))
    scale = max(1.0, np.abs(a).max() if a.size else 1.0, np.abs(b).max() if b.size else 1.0)
    ptol = tol * scale
    pivots = 0

    def run(obj, allowed):
        nonlocal pivots
        while True:
            cb = obj[basis]
            reduced = obj[:nvar + m] - cb @ tab[:, :nvar + m]
            entering = next((j for j in allowed if reduced[j] < -ptol), None)
            if entering is None:
                return True
            col = tab[:, entering]
            best, leave = None, None
            for i in range(m):
                if col[i] > ptol:
                    ratio = tab[i, -1] / col[i]
                    if (best is None or ratio < best - ptol
                            or (abs(ratio - best) <= ptol and basis[i] < basis[leave])):
                        best, leave = ratio, i
            if leave is None:
                return False
            _pivot(tab, leave, entering)
            basis[leave] = entering
            pivots += 1
            if pivots > max_pivots:
                raise NumericalError("simplex exceeded the pivot limit")

    # phase 1
    obj1 = np.zeros(nvar + m)
    obj1[nvar:] = 1.0
    run(obj1, range(nvar))
    infeas = float(tab[:, -1] @ obj1[basis])
    if infeas > 1e-7 * scale:
        return LpOutcome(LpStatus.INFEASIBLE, pivots=pivots)
    # push zero-level artificials out where a real column is available
    for i in range(m):
        if basis[i] >= nvar:
            j = next((j for j in range(nvar) if abs(tab[i, j]) > ptol), None)
            if j is not None:
                _pivot(tab, i, j)
                basis[i] = j
                pivots += 1
    # phase 2: artificial columns may never re-enter
    obj2 = np.zeros(nvar + m)
    obj2[:nvar] = cost
    if not run(obj2, range(nvar)):
        return LpOutcome(LpStatus.UNBOUNDED, pivots=pivots)

    y = np.zeros(nvar)
    for i, bj in enumerate(basis):
        if bj < nvar:
            y[bj] = tab[i, -1]
    y = np.maximum(y, 0.0)
    x = shift + embed @ y[:ny]
    opt = float(c @ x)
    # duals: c_B B^{-1}, mapped back through row signs and the objective sign
    binv = tab[:, nvar:nvar + m]
    duals = (obj2[basis] @ binv) * row_sign * sign
    return LpOutcome(LpStatus.OPTIMAL, opt, x, duals[:m_eq].copy(),
                     duals[m_eq:m_eq + m_ub].copy(), pivots)


def _pivot(tab: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    factors = tab[:, col].copy()
    factors[row] = 0.0
    tab -= np.outer(factors, tab[row])
