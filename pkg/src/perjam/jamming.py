"""Jamming decisions for periodic strut tensegrities, with certificates.

Collective jamming is decided as "bar framework periodically rigid and a
proper equilibrium stress exists"; strict jamming as "bar framework affinely
rigid and a strict equilibrium stress exists".  Sublattice jamming goes
through the characters of the finite quotient, one small complex nullspace
per character, instead of building the cover.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .framework import (FlexVector, Kind, Tensegrity, affine_rigidity_matrix,
                        affine_trivial_flexes, cover_framework, lift_phase_flex,
                        phase_matrix, rigidity_matrix, translation_flexes)
from .lattice import (QuotientCharacter, Sublattice, enumerate_characters,
                      enumerate_sublattices, smith_normal_form)
from .numkernel import NumericalError, rank_nullspace, solve_lp

STRICT_MARGIN = 1e-7
CERT_TOL = 1e-8


class JammingError(ValueError):
    pass


def _deflate(basis: np.ndarray, trivial: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis of the part of ``basis`` orthogonal to ``trivial``."""
    if basis.size == 0:
        return basis
    q, _ = np.linalg.qr(trivial)
    rest = basis - q @ (q.conj().T @ basis)
    u, s, _ = np.linalg.svd(rest, full_matrices=False)
    keep = s > tol * max(1.0, s[0] if s.size else 0.0)
    return u[:, keep]


@dataclass
class StressVector:
    per_contact: np.ndarray

    def vertex_residual(self, t: Tensegrity) -> float:
        """Largest force imbalance at any vertex."""
        r = rigidity_matrix(t).matrix
        if r.size == 0:
            return 0.0
        return float(np.abs(r.T @ self.per_contact).max(initial=0.0))

    def moment(self, t: Tensegrity) -> np.ndarray:
        """``sum_k omega_k e_k e_k^T``."""
        e = t.edge_vectors()
        return np.einsum("k,ka,kb->ab", self.per_contact, e, e)

    def strict_residual(self, t: Tensegrity, scale: float = 1.0) -> float:
        return float(np.linalg.norm(self.moment(t) + scale * np.eye(t.dim)))

    def signs_ok(self, t: Tensegrity, margin: float = 0.0) -> bool:
        for w, kind in zip(self.per_contact, t.kinds):
            if kind is Kind.STRUT and not w < -margin:
                return False
            if kind is Kind.CABLE and not w > margin:
                return False
        return True

    def lifted(self, copies: int) -> "StressVector":
        """Same stress on a cover built by :func:`cover_framework` (copy-major contacts)."""
        return StressVector(np.tile(self.per_contact, copies))


@dataclass
class BarRigidity:
    rigid: bool
    nullity: int
    trivial: int
    flexes: np.ndarray  # nontrivial flex directions, columns


def bar_periodically_rigid(t: Tensegrity, tol_factor: float = 1e-9) -> BarRigidity:
    """Periodic infinitesimal rigidity of the bar framework on the contacts."""
    res = rank_nullspace(rigidity_matrix(t).matrix, tol_factor)
    d = t.dim
    flexes = _deflate(res.nullspace, translation_flexes(t)) if res.nullity > d else np.zeros((t.n_vertices * d, 0))
    return BarRigidity(res.nullity == d, res.nullity, d, flexes)


def affinely_rigid(t: Tensegrity, tol_factor: float = 1e-9) -> BarRigidity:
    """Affine infinitesimal rigidity of the bar framework (lattice allowed to deform)."""
    res = rank_nullspace(affine_rigidity_matrix(t).matrix, tol_factor)
    d = t.dim
    trivial = d + d * (d - 1) // 2
    if res.nullity > trivial:
        flexes = _deflate(res.nullspace, affine_trivial_flexes(t))
    else:
        flexes = np.zeros((t.n_vertices * d + d * d, 0))
    return BarRigidity(res.nullity == trivial, res.nullity, trivial, flexes)


def _member_bounds(t: Tensegrity, unit: float = 1.0):
    bounds = []
    for kind in t.kinds:
        if kind is Kind.STRUT:
            bounds.append((None, -unit))
        elif kind is Kind.CABLE:
            bounds.append((unit, None))
        else:
            bounds.append((None, None))
    return bounds


def _member_sign(kind: Kind) -> float:
    return {Kind.STRUT: -1.0, Kind.CABLE: 1.0, Kind.BAR: 0.0}[kind]


def equilibrium_stress(t: Tensegrity, method: str = "bland") -> StressVector | None:
    """A proper equilibrium stress (struts <= -1, cables >= 1) or ``None``.

    Among feasible stresses the LP picks one of least total magnitude on the
    signed members.
    """
    r = rigidity_matrix(t).matrix
    c = np.array([_member_sign(k) for k in t.kinds])  # total |omega| on signed members
    out = solve_lp(c, a_eq=r.T, b_eq=np.zeros(r.shape[1]), bounds=_member_bounds(t), method=method)
    if not out.optimal:
        return None
    return StressVector(out.witness)


@dataclass
class Verdict:
    jammed: bool
    stress: StressVector | None = None
    flex: FlexVector | None = None
    bar: BarRigidity | None = None
    reason: str = ""


def _strut_flex_lp(matrix: np.ndarray, kinds: list[Kind], pin: np.ndarray | None,
                   extra_rows: np.ndarray | None = None, method: str = "bland"):
    """Maximize capped slacks of a sign-respecting flex.

    Finds ``f`` with ``(M f)_k`` of the right sign for every member (= 0 on
    bars) and as many slacks switched on as possible.  ``extra_rows`` are
    additional ``row @ f >= slack`` conditions (used for the volume trace).
    """
    m, nv = matrix.shape
    signed = [k for k in range(m) if kinds[k] is not Kind.BAR]
    bars = [k for k in range(m) if kinds[k] is Kind.BAR]
    extras = [] if extra_rows is None else list(extra_rows)
    ns = len(signed) + len(extras)
    nvar = nv + ns
    a_ub = np.zeros((ns, nvar))
    for s_idx, k in enumerate(signed):
        sign = 1.0 if kinds[k] is Kind.STRUT else -1.0
        a_ub[s_idx, :nv] = -sign * matrix[k]
        a_ub[s_idx, nv + s_idx] = 1.0
    for e_idx, row in enumerate(extras):
        r_idx = len(signed) + e_idx
        a_ub[r_idx, :nv] = -row
        a_ub[r_idx, nv + r_idx] = 1.0
    eq_rows = [np.concatenate([matrix[k], np.zeros(ns)]) for k in bars]
    if pin is not None:
        for col in pin.T:
            eq_rows.append(np.concatenate([col, np.zeros(ns)]))
    a_eq = np.array(eq_rows) if eq_rows else None
    b_eq = np.zeros(len(eq_rows)) if eq_rows else None
    c = np.concatenate([np.zeros(nv), np.ones(ns)])
    bounds = [(None, None)] * nv + [(0.0, 1.0)] * ns
    out = solve_lp(c, a_eq=a_eq, b_eq=b_eq, a_ub=a_ub if ns else None,
                   b_ub=np.zeros(ns) if ns else None, bounds=bounds, maximize=True, method=method)
    if not out.optimal:
        raise NumericalError(f"flex LP ended {out.status.value}")
    return out.optimum, out.witness[:nv]


def strut_rigid_direct_lp(t: Tensegrity, method: str = "highs") -> tuple[bool, FlexVector | None]:
    """Decide collective jamming straight from the sign-constrained flex LP.

    Independent of the bar/stress decomposition: translations are pinned by
    ``sum_i p'_i = 0`` and the LP looks for a flex that opens some contact.
    The packing is rigid iff no contact can open and the bar nullity is ``d``.
    """
    r = rigidity_matrix(t).matrix
    pin = translation_flexes(t)
    opt, f = _strut_flex_lp(r, t.kinds, pin, method=method)
    if opt > 0.5:
        return False, FlexVector(f.reshape(t.n_vertices, t.dim))
    res = rank_nullspace(r)
    if res.nullity != t.dim:
        flex = _deflate(res.nullspace, pin)[:, 0]
        return False, FlexVector(flex.reshape(t.n_vertices, t.dim))
    return True, None


def collectively_jammed(t: Tensegrity) -> Verdict:
    """Collective jamming with a stress certificate, or an unjamming flex."""
    bar = bar_periodically_rigid(t)
    if not bar.rigid:
        flex = bar.flexes[:, 0]
        return Verdict(False, flex=FlexVector(flex.reshape(t.n_vertices, t.dim)), bar=bar,
                       reason=f"bar framework has {bar.nullity - bar.trivial} nontrivial flex(es)")
    stress = equilibrium_stress(t)
    if stress is not None:
        return Verdict(True, stress=stress, bar=bar)
    # rigid as bars but no proper stress: some flex opens a contact
    _, f = _strut_flex_lp(rigidity_matrix(t).matrix, t.kinds, translation_flexes(t))
    return Verdict(False, flex=FlexVector(f.reshape(t.n_vertices, t.dim)), bar=bar,
                   reason="no proper equilibrium stress")


def strict_equilibrium_stress(t: Tensegrity, method: str = "bland") -> StressVector | None:
    """A stress in equilibrium with ``sum omega e e^T = -I`` and margin ``> 1e-7``."""
    r = rigidity_matrix(t).matrix
    m, d = t.n_contacts, t.dim
    e = t.edge_vectors()
    pairs = [(a, b) for a in range(d) for b in range(a, d)]
    nvar = m + 1
    a_eq = np.zeros((r.shape[1] + len(pairs), nvar))
    b_eq = np.zeros(r.shape[1] + len(pairs))
    a_eq[:r.shape[1], :m] = r.T
    for row, (a, b) in enumerate(pairs, start=r.shape[1]):
        a_eq[row, :m] = e[:, a] * e[:, b]
        b_eq[row] = -1.0 if a == b else 0.0
    signed = [k for k, kind in enumerate(t.kinds) if kind is not Kind.BAR]
    a_ub = np.zeros((len(signed), nvar))
    for row, k in enumerate(signed):
        a_ub[row, k] = -_member_sign(t.kinds[k])
        a_ub[row, m] = 1.0
    c = np.zeros(nvar)
    c[m] = 1.0
    bounds = [(None, None)] * m + [(None, 1.0)]
    out = solve_lp(c, a_eq=a_eq, b_eq=b_eq, a_ub=a_ub if signed else None,
                   b_ub=np.zeros(len(signed)) if signed else None, bounds=bounds,
                   maximize=True, method=method)
    if not out.optimal or out.optimum <= STRICT_MARGIN:
        return None
    return StressVector(out.witness[:m])


@dataclass
class StrictVerdict:
    strict: bool
    affine: BarRigidity
    stress: StressVector | None
    flex: FlexVector | None = None
    reason: str = ""


def strictly_jammed(t: Tensegrity) -> StrictVerdict:
    """Strict jamming: affinely rigid bars plus a strict equilibrium stress."""
    aff = affinely_rigid(t)
    stress = strict_equilibrium_stress(t)
    n, d = t.n_vertices, t.dim
    if aff.rigid and stress is not None:
        return StrictVerdict(True, aff, stress)
    if not aff.rigid:
        f = FlexVector.from_coords(aff.flexes[:, 0], n, d, affine=True)
        # orient the flex so the cell does not grow
        if np.trace(f.affine) > 0:
            f = -f
        return StrictVerdict(False, aff, stress, f, "bar framework is not affinely rigid")
    f = strict_flex_lp(t)
    return StrictVerdict(False, aff, None, f, "no strict equilibrium stress")


def strict_flex_lp(t: Tensegrity, method: str = "bland") -> FlexVector | None:
    """A nontrivial sign-respecting affine flex with ``tr A <= 0``, if any contact or the trace can move."""
    n, d = t.n_vertices, t.dim
    mat = affine_rigidity_matrix(t).matrix
    trace_row = np.zeros(n * d + d * d)
    for a in range(d):
        trace_row[n * d + a * d + a] = -1.0
    opt, f = _strut_flex_lp(mat, t.kinds, affine_trivial_flexes(t), extra_rows=[trace_row],
                            method=method)
    if opt <= 0.5:
        return None
    return FlexVector.from_coords(f, n, d, affine=True)


@dataclass
class CharacterFlex:
    character: QuotientCharacter
    nullity: int
    flex: np.ndarray  # complex phase flex on the base vertices, n x d


@dataclass
class SublatticeVerdict:
    sublattice: Sublattice
    jammed: bool
    flexing: list[CharacterFlex] = field(default_factory=list)
    base_jammed: bool = True

    def real_cover_flex(self, t: Tensegrity) -> FlexVector | None:
        """Real part of the first flexing character's flex, spread over the cover."""
        if not self.flexing:
            return None
        cf = self.flexing[0]
        q = cf.flex
        big = q.reshape(-1)[np.argmax(np.abs(q))]
        q = q * (abs(big) / big)
        return lift_phase_flex(t, self.sublattice, cf.character, q).real


class _PhaseCache:
    """Per-character phase nullities, shared across sublattices of one framework."""

    def __init__(self, t: Tensegrity, tol_factor: float = 1e-9):
        self.bars = t.with_kind(Kind.BAR)
        self.tol_factor = tol_factor
        self.data: dict[tuple, CharacterFlex] = {}

    def get(self, chi: QuotientCharacter) -> CharacterFlex:
        key = chi.turns
        if key not in self.data:
            res = rank_nullspace(phase_matrix(self.bars, chi).matrix, self.tol_factor)
            flex = res.nullspace[:, 0].reshape(self.bars.n_vertices, self.bars.dim) if res.nullity else None
            self.data[key] = CharacterFlex(chi, res.nullity, flex)
        return self.data[key]


def sublattice_jammed(t: Tensegrity, sub: Sublattice, *, base: Verdict | None = None,
                      cache: _PhaseCache | None = None) -> SublatticeVerdict:
    """Jamming on the cover defined by ``sub``, tested character by character."""
    base = base if base is not None else collectively_jammed(t)
    if not base.jammed:
        return SublatticeVerdict(sub, False, base_jammed=False)
    cache = cache if cache is not None else _PhaseCache(t)
    flexing = []
    for chi in enumerate_characters(sub, smith_normal_form(sub)):
        if chi.is_trivial:
            continue
        cf = cache.get(chi)
        if cf.nullity > 0:
            flexing.append(CharacterFlex(chi, cf.nullity, cf.flex))
    return SublatticeVerdict(sub, not flexing, flexing)


def cover_jammed(t: Tensegrity, sub: Sublattice) -> Verdict:
    """Brute force: build the cover and decide it directly."""
    return collectively_jammed(cover_framework(t, sub))


@dataclass
class NMinResult:
    value: int | None  # None means no unjamming sublattice up to the bound
    bound: int
    sublattice: Sublattice | None = None
    character: QuotientCharacter | None = None

    def __str__(self) -> str:
        return str(self.value) if self.value is not None else f">= {self.bound + 1}"


def n_min(t: Tensegrity, max_index: int, *, base: Verdict | None = None,
          threads: int = 1) -> NMinResult:
    """Smallest sublattice index on which a collectively jammed packing unjams.

    Within one index the sublattices may be tested in parallel; the first
    unjammed one in enumeration order wins, so the answer does not depend on
    ``threads``.
    """
    if max_index < 1:
        raise JammingError("max_index must be at least 1")
    base = base if base is not None else collectively_jammed(t)
    if not base.jammed:
        raise JammingError("N_min is only defined for collectively jammed packings")
    cache = _PhaseCache(t)
    pool = None
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        pool = ThreadPoolExecutor(max_workers=threads)
    try:
        for m in range(2, max_index + 1):
            subs = enumerate_sublattices(t.dim, m)
            test = lambda sub: sublattice_jammed(t, sub, base=base, cache=cache)  # noqa: E731
            verdicts = pool.map(test, subs) if pool else map(test, subs)
            for v in verdicts:
                if not v.jammed:
                    return NMinResult(m, max_index, v.sublattice, v.flexing[0].character)
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)
    return NMinResult(None, max_index)


def one_disk_gcd_predicate(sub: Sublattice) -> bool:
    """Flexibility of the one-disk square packing on ``sub`` (True = flexible)."""
    if sub.dim != 2:
        raise JammingError("the gcd law is stated for planar sublattices")
    (a, b), (c, d) = sub.columns
    return math.gcd(a, c) * math.gcd(b, d) != 1


@dataclass
class JammingReport:
    collective: Verdict
    strict: StrictVerdict
    n_min: NMinResult | None
    tested_index_bound: int
    consistently_strict: bool
    scaling_checks: list[tuple[str, int, float]] = field(default_factory=list)

    @property
    def max_scaling_residual(self) -> float:
        return max((r for _, _, r in self.scaling_checks), default=0.0)


def lifted_strict_residual(t: Tensegrity, sub: Sublattice, stress: StressVector) -> tuple[float, float]:
    """Lift a strict stress to the cover; return (||sum w e e^T + m I||, equilibrium residual)."""
    cover = cover_framework(t, sub)
    lifted = stress.lifted(sub.index)
    return lifted.strict_residual(cover, scale=sub.index), lifted.vertex_residual(cover)


def consistency_report(t: Tensegrity, max_index: int) -> JammingReport:
    """Collective, strict and bounded consistency verdicts in one pass."""
    collective = collectively_jammed(t)
    strict = strictly_jammed(t)
    nmin = n_min(t, max_index, base=collective) if collective.jammed else None
    no_unjamming = nmin is not None and nmin.value is None
    checks = []
    if strict.stress is not None:
        for m in range(1, max_index + 1):
            for sub in enumerate_sublattices(t.dim, m):
                res, _ = lifted_strict_residual(t, sub, strict.stress)
                checks.append((str(sub), m, res))
    return JammingReport(collective, strict, nmin, max_index, strict.strict and no_unjamming, checks)
