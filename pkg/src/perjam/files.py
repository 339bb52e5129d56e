"""JSON packing files and re-verifiable report certificates.

Packing file::

    {"dim": 2,
     "lattice": [[g1_x, g1_y], [g2_x, g2_y]],      # one array per generator
     "disks": [{"center": [x, y], "radius": r}, ...],
     "contacts": [{"i": 0, "j": 0, "offset": [1, 0], "kind": "strut"}, ...]}

``contacts`` is optional and overrides detection.  Floats are written with
Python's shortest round-trip ``repr``, so export/import is bit-exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .framework import (Contact, FlexVector, FrameworkError, Kind, Tensegrity,
                        affine_rigidity_matrix, affine_trivial_flexes, contacts_from_records,
                        phase_matrix, rigidity_matrix, translation_flexes)
from .jamming import StressVector
from .lattice import Lattice, LatticeError, QuotientCharacter, Sublattice
from .numkernel import rank_nullspace
from .packing import PackingError, PeriodicPacking, detect_contacts

SCHEMA = "perjam.report/1"


class FileFormatError(ValueError):
    """Input file could not be parsed; the message names the offending location."""


@dataclass
class PackingFile:
    packing: PeriodicPacking
    contacts: tuple[Contact, ...] | None = None

    def tensegrity(self, tol: float | None = None) -> Tensegrity:
        if self.contacts is not None:
            p = self.packing
            return Tensegrity(p.lattice, p.centers, self.contacts)
        return detect_contacts(self.packing, tol)


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FileFormatError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise FileFormatError(f"{where}: number must be finite")
    return float(value)


def _vector(value: Any, d: int, where: str) -> list[float]:
    if not isinstance(value, list) or len(value) != d:
        raise FileFormatError(f"{where}: expected a list of {d} numbers")
    return [_number(v, f"{where}[{k}]") for k, v in enumerate(value)]


def packing_from_dict(doc: Any) -> PackingFile:
    if not isinstance(doc, dict):
        raise FileFormatError("top level: expected an object")
    for key in ("dim", "lattice", "disks"):
        if key not in doc:
            raise FileFormatError(f"top level: missing field {key!r}")
    d = doc["dim"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise FileFormatError("dim: expected a positive integer")
    gens = doc["lattice"]
    if not isinstance(gens, list) or len(gens) != d:
        raise FileFormatError(f"lattice: expected {d} generator arrays")
    basis = np.array([_vector(g, d, f"lattice[{m}]") for m, g in enumerate(gens)]).T
    disks = doc["disks"]
    if not isinstance(disks, list) or not disks:
        raise FileFormatError("disks: expected a non-empty list")
    centers, radii = [], []
    for k, disk in enumerate(disks):
        if not isinstance(disk, dict) or "center" not in disk or "radius" not in disk:
            raise FileFormatError(f"disks[{k}]: expected an object with center and radius")
        centers.append(_vector(disk["center"], d, f"disks[{k}].center"))
        radii.append(_number(disk["radius"], f"disks[{k}].radius"))
    try:
        packing = PeriodicPacking(Lattice(basis), centers, radii)
    except (LatticeError, PackingError) as exc:
        raise FileFormatError(str(exc)) from None
    contacts = None
    if "contacts" in doc and doc["contacts"] is not None:
        recs = doc["contacts"]
        if not isinstance(recs, list):
            raise FileFormatError("contacts: expected a list")
        try:
            contacts = contacts_from_records(recs, d)
            Tensegrity(packing.lattice, packing.centers, contacts)
        except (KeyError, TypeError, ValueError) as exc:
            raise FileFormatError(f"contacts: {exc}") from None
    return PackingFile(packing, contacts)


def loads_packing(text: str) -> PackingFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return packing_from_dict(doc)


def load_packing(path: str | Path) -> PackingFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc.strerror}") from None
    return loads_packing(text)


def packing_to_dict(packing: PeriodicPacking, contacts: tuple[Contact, ...] | None = None) -> dict:
    doc = {
        "dim": packing.dim,
        "lattice": [[float(v) for v in g] for g in packing.lattice.generators],
        "disks": [{"center": [float(v) for v in c], "radius": float(r)}
                  for c, r in zip(packing.centers, packing.radii)],
    }
    if contacts is not None:
        doc["contacts"] = [contact_to_dict(c) for c in contacts]
    return doc


def dumps_packing(packing: PeriodicPacking, contacts: tuple[Contact, ...] | None = None) -> str:
    return json.dumps(packing_to_dict(packing, contacts), indent=2) + "\n"


def cover_packing(packing: PeriodicPacking, sub: Sublattice) -> PeriodicPacking:
    """The same packing described with the coarser period lattice ``sub``."""
    from .lattice import transversal

    reps = transversal(sub)
    centers = np.vstack([packing.centers + packing.lattice.point(r) for r in reps])
    radii = np.tile(packing.radii, len(reps))
    return PeriodicPacking(packing.lattice.sublattice_basis(sub), centers, radii)


def parse_sublattice(text: str) -> Sublattice:
    """``"a,b;c,d"``: semicolon-separated generator columns."""
    try:
        cols = [tuple(int(v) for v in part.split(",")) for part in text.split(";")]
        return Sublattice.from_columns(*cols)
    except (ValueError, LatticeError) as exc:
        raise FileFormatError(f"sublattice {text!r}: {exc}") from None


# ----- framework and certificate serialization -------------------------------------------

def contact_to_dict(c: Contact) -> dict:
    return {"i": c.i, "j": c.j, "offset": list(c.offset), "kind": c.kind.value}


def tensegrity_to_dict(t: Tensegrity) -> dict:
    return {
        "dim": t.dim,
        "lattice": [[float(v) for v in g] for g in t.lattice.generators],
        "vertices": [[float(v) for v in p] for p in t.vertices],
        "contacts": [contact_to_dict(c) for c in t.contacts],
    }


def tensegrity_from_dict(doc: dict) -> Tensegrity:
    try:
        d = int(doc["dim"])
        basis = np.array(doc["lattice"], dtype=float).T
        return Tensegrity(Lattice(basis), np.array(doc["vertices"], dtype=float),
                          contacts_from_records(doc["contacts"], d))
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"framework: {exc}") from None


def _complex_list(arr) -> list:
    arr = np.asarray(arr).reshape(-1)
    return [[float(v.real), float(v.imag)] for v in arr]


def _complex_array(doc) -> np.ndarray:
    return np.array([complex(a, b) for a, b in doc])


def stress_certificate(kind: str, stress: StressVector) -> dict:
    return {"type": kind, "omega": [float(w) for w in stress.per_contact]}


def flex_certificate(kind: str, flex: FlexVector) -> dict:
    doc = {"type": kind, "per_vertex": np.real(flex.per_vertex).tolist()}
    if flex.affine is not None:
        doc["affine"] = np.real(flex.affine).tolist()
    return doc


def phase_flex_certificate(chi: QuotientCharacter, flex: np.ndarray, sub: Sublattice | None = None) -> dict:
    doc = {"type": "phase_flex", "turns": [str(t) for t in chi.turns], "flex": _complex_list(flex)}
    if sub is not None:
        doc["sublattice"] = [list(c) for c in sub.columns]
    return doc


@dataclass
class CertificateCheck:
    ok: bool
    detail: str


def _signed_rows_ok(values: np.ndarray, kinds: list[Kind], tol: float) -> bool:
    for v, kind in zip(values, kinds):
        if kind is Kind.STRUT and v < -tol:
            return False
        if kind is Kind.CABLE and v > tol:
            return False
        if kind is Kind.BAR and abs(v) > tol:
            return False
    return True


def _outside_span(vec: np.ndarray, span: np.ndarray, tol: float) -> bool:
    q, _ = np.linalg.qr(span)
    rest = vec - q @ (q.T @ vec)
    return float(np.linalg.norm(rest)) > tol * max(1.0, float(np.linalg.norm(vec)))


def verify_certificate(t: Tensegrity, cert: dict, tol: float = 1e-8) -> CertificateCheck:
    """Re-check one certificate against the framework it was issued for."""
    kind = cert.get("type")
    d, n = t.dim, t.n_vertices
    scale = max(1.0, float(np.abs(t.edge_vectors()).max(initial=0.0))) ** 2
    if kind in ("stress", "strict_stress"):
        omega = np.array(cert["omega"], dtype=float)
        if omega.shape != (t.n_contacts,):
            return CertificateCheck(False, "stress has the wrong length")
        s = StressVector(omega)
        res = s.vertex_residual(t) / max(1.0, float(np.abs(omega).max()))
        if res > tol * scale:
            return CertificateCheck(False, f"vertex imbalance {res:.3e}")
        if not s.signs_ok(t):
            return CertificateCheck(False, "stress has a wrong-signed member")
        if kind == "stress":
            nullity = rank_nullspace(rigidity_matrix(t).matrix).nullity
            if nullity != d:
                return CertificateCheck(False, f"bar framework nullity {nullity}, expected {d}")
            return CertificateCheck(True, f"equilibrium residual {res:.3e}; bar nullity {nullity}")
        strict_res = s.strict_residual(t)
        if strict_res > tol:
            return CertificateCheck(False, f"moment residual {strict_res:.3e}")
        trivial = d + d * (d - 1) // 2
        nullity = rank_nullspace(affine_rigidity_matrix(t).matrix).nullity
        if nullity != trivial:
            return CertificateCheck(False, f"affine nullity {nullity}, expected {trivial}")
        return CertificateCheck(True, f"moment residual {strict_res:.3e}; affine nullity {nullity}")
    if kind == "flex":
        f = np.array(cert["per_vertex"], dtype=float).reshape(-1)
        if f.shape != (n * d,):
            return CertificateCheck(False, "flex has the wrong length")
        f = f / max(float(np.abs(f).max()), 1e-300)
        rows = rigidity_matrix(t).matrix @ f
        if not _signed_rows_ok(rows, t.kinds, tol * scale):
            return CertificateCheck(False, "flex violates a member constraint")
        opens = float(np.abs(rows).max(initial=0.0)) > tol * scale
        if not opens and not _outside_span(f, translation_flexes(t), 1e-6):
            return CertificateCheck(False, "flex is a translation")
        return CertificateCheck(True, "nontrivial flex respecting every member")
    if kind == "affine_flex":
        f = np.concatenate([np.array(cert["per_vertex"], dtype=float).reshape(-1),
                            np.array(cert["affine"], dtype=float).reshape(-1)])
        if f.shape != (n * d + d * d,):
            return CertificateCheck(False, "affine flex has the wrong length")
        f = f / max(float(np.abs(f).max()), 1e-300)
        rows = affine_rigidity_matrix(t).matrix @ f
        trace = float(np.trace(f[n * d:].reshape(d, d)))
        if not _signed_rows_ok(rows, t.kinds, tol * scale) or trace > tol:
            return CertificateCheck(False, "affine flex violates a member or volume constraint")
        moves = float(np.abs(rows).max(initial=0.0)) > tol * scale or trace < -tol
        if not moves and not _outside_span(f, affine_trivial_flexes(t), 1e-6):
            return CertificateCheck(False, "affine flex is trivial")
        return CertificateCheck(True, f"nontrivial affine flex, tr A = {trace:.3e}")
    if kind == "phase_flex":
        chi = QuotientCharacter.from_turns(*(Fraction(v) for v in cert["turns"]))
        if chi.is_trivial:
            return CertificateCheck(False, "phase flex at the trivial character")
        if "sublattice" in cert:
            sub = Sublattice.from_columns(*cert["sublattice"])
            if not chi.kills(sub):
                return CertificateCheck(False, "character is not trivial on the sublattice")
        q = _complex_array(cert["flex"])
        if q.shape != (n * d,) or np.linalg.norm(q) == 0:
            return CertificateCheck(False, "phase flex is empty or has the wrong length")
        q = q / np.linalg.norm(q)
        res = float(np.abs(phase_matrix(t.with_kind(Kind.BAR), chi).matrix @ q).max(initial=0.0))
        if res > tol * scale:
            return CertificateCheck(False, f"phase residual {res:.3e}")
        return CertificateCheck(True, f"phase residual {res:.3e}")
    return CertificateCheck(False, f"unknown certificate type {kind!r}")


def load_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def verify_report(doc: dict, tol: float = 1e-8) -> list[CertificateCheck]:
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise FileFormatError(f"not a {SCHEMA} report")
    t = tensegrity_from_dict(doc["framework"])
    certs = doc.get("certificates", [])
    if not certs:
        raise FileFormatError("report carries no certificates")
    return [verify_certificate(t, c, tol) for c in certs]


__all__ = [
    "FileFormatError", "FrameworkError", "PackingFile", "SCHEMA", "CertificateCheck",
    "load_packing", "loads_packing", "dumps_packing", "packing_from_dict", "packing_to_dict",
    "cover_packing", "parse_sublattice", "tensegrity_to_dict", "tensegrity_from_dict",
    "stress_certificate", "flex_certificate", "phase_flex_certificate", "verify_certificate",
    "verify_report", "load_json",
]
