"""Rigid-unit-mode spectrum scans and 1 x k line sweeps.

Grid phases are exact roots of unity ``exp(2 pi i j / N)``, so whenever ``N``
is a multiple of a quotient exponent the sampled points are literally the
characters used by :func:`perjam.jamming.sublattice_jammed`.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TextIO

import numpy as np

from .framework import Kind, Tensegrity, phase_matrix
from .jamming import JammingError, collectively_jammed, sublattice_jammed
from .lattice import QuotientCharacter, Sublattice

DEFAULT_SPECTRUM_TOL = 1e-8


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class SpectrumSample:
    index: tuple[int, ...]  # grid indices j, theta_m = 2 pi j_m / N
    thetas: tuple[float, ...]
    sigma_min: float
    nullity: int


@dataclass
class SpectrumGrid:
    resolution: int
    dim: int
    samples: list[SpectrumSample] = field(default_factory=list)
    tol_factor: float = DEFAULT_SPECTRUM_TOL

    def near_zero(self, threshold: float = DEFAULT_SPECTRUM_TOL) -> list[SpectrumSample]:
        return [s for s in self.samples if s.sigma_min <= threshold]

    def nontrivial_flexing(self) -> list[SpectrumSample]:
        return [s for s in self.samples if any(s.index) and s.nullity > 0]

    def at(self, *index: int) -> SpectrumSample:
        n = self.resolution
        flat = 0
        for j in index:
            flat = flat * n + (j % n)
        return self.samples[flat]

    def write_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow([f"theta{m + 1}" for m in range(self.dim)] + ["sigma_min", "nullity"])
        for s in self.samples:
            w.writerow([f"{v:.17g}" for v in s.thetas] + [f"{s.sigma_min:.17g}", s.nullity])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _sample(bars: Tensegrity, index: tuple[int, ...], n: int, tol_factor: float) -> SpectrumSample:
    chi = QuotientCharacter.from_turns(*(Fraction(j, n) for j in index))
    m = phase_matrix(bars, chi).matrix
    cols = m.shape[1]
    s = np.linalg.svd(m, compute_uv=False) if m.size else np.zeros(0)
    full = np.zeros(cols)
    full[:min(len(s), cols)] = s[:cols]
    smax = float(full.max(initial=0.0))
    nullity = int(np.sum(full <= tol_factor * smax)) if smax > 0 else cols
    thetas = tuple(2 * math.pi * j / n for j in index)
    return SpectrumSample(index, thetas, float(full.min()) if cols else 0.0, nullity)


def rum_scan(t: Tensegrity, resolution: int, *, tol_factor: float = DEFAULT_SPECTRUM_TOL,
             threads: int = 1) -> SpectrumGrid:
    """Smallest singular value and nullity of the phase operator on an ``N^d`` grid.

    Samples are in row-major order of the grid indices regardless of
    ``threads``.
    """
    if resolution < 2:
        raise SpectrumError("resolution must be at least 2")
    bars = t.with_kind(Kind.BAR)
    indices = list(itertools.product(range(resolution), repeat=t.dim))
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(lambda ix: _sample(bars, ix, resolution, tol_factor), indices))
    else:
        samples = [_sample(bars, ix, resolution, tol_factor) for ix in indices]
    return SpectrumGrid(resolution, t.dim, samples, tol_factor)


@dataclass(frozen=True)
class LineSweepRow:
    k: int
    jammed: bool
    flexing_orders: tuple[int, ...]  # orders of the roots of unity that admit a flex


def line_sweep_1xk(t: Tensegrity, k_max: int) -> list[LineSweepRow]:
    """Test the sublattices ``diag(1, ..., 1, k)`` for ``k = 1..k_max``."""
    base = collectively_jammed(t)
    if not base.jammed:
        raise JammingError("line sweep needs a collectively jammed packing")
    rows = []
    for k in range(1, k_max + 1):
        sub = Sublattice.diagonal(*([1] * (t.dim - 1) + [k]))
        v = sublattice_jammed(t, sub, base=base)
        orders = sorted({cf.character.turns[-1].denominator for cf in v.flexing})
        rows.append(LineSweepRow(k, v.jammed, tuple(orders)))
    return rows
