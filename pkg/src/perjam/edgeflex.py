"""Edge-flex calculus for planar periodic frameworks.

Instead of moving vertices, assign each contact a velocity ``e'_k`` for its
edge vector.  Such an assignment integrates back to a vertex flex exactly when
it sums to zero around every face and along one tour per lattice generator.
For bar frameworks in the plane, ``e'_k = alpha_k * R90 @ e_k``, so a flex
reduces to one scalar rotation rate per contact.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .framework import FlexVector, Kind, Tensegrity
from .numkernel import rank_nullspace

R90 = np.array([[0.0, -1.0], [1.0, 0.0]])


class PlanarityError(ValueError):
    """Input is not a crossing-free periodic planar embedding."""


class EdgeFlexError(ValueError):
    """An edge flex fails one of its closing conditions."""

    def __init__(self, message: str, face: int | None = None, tour: int | None = None):
        super().__init__(message)
        self.face = face
        self.tour = tour


# a half-edge is (contact index, +1 for i->j or -1 for j->i)
HalfEdge = tuple[int, int]


@dataclass
class Face:
    half_edges: list[HalfEdge]
    area: float  # signed, positive for counter-clockwise traversal

    @property
    def size(self) -> int:
        return len(self.half_edges)


@dataclass
class FaceStructure:
    rotation: list[list[HalfEdge]]  # counter-clockwise order of outgoing half-edges
    faces: list[Face]
    n_vertices: int
    n_edges: int

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + len(self.faces)

    def census(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for f in self.faces:
            out[f.size] = out.get(f.size, 0) + 1
        return dict(sorted(out.items()))


def _half_vector(vecs: np.ndarray, h: HalfEdge) -> np.ndarray:
    return h[1] * vecs[h[0]]


def find_crossings(t: Tensegrity, tol: float = 1e-9) -> list[tuple[int, int, tuple[int, ...]]]:
    """Pairs of contacts whose straight segments cross (in some lattice translate)."""
    vecs = t.edge_vectors()
    if not len(vecs):
        return []
    starts = t.vertices[[c.i for c in t.contacts]]
    h = np.linalg.inv(t.lattice.basis)
    reach = 2 * float(np.linalg.norm(vecs, axis=1).max())
    width = reach * np.linalg.norm(h, axis=1)
    out = []
    for a in range(t.n_contacts):
        centre = h @ (starts[a] - starts[a:]).T  # d x (m - a)
        lo = np.floor(centre.min(axis=1) - width).astype(int) - 1
        hi = np.ceil(centre.max(axis=1) + width).astype(int) + 1
        grid = np.stack(np.meshgrid(*[np.arange(l, u + 1) for l, u in zip(lo, hi)],
                                    indexing="ij"), -1).reshape(-1, t.dim)
        shifts = grid @ t.lattice.basis.T
        q = (starts[a:, None, :] + shifts[None, :, :]).reshape(-1, 2)
        s = np.repeat(vecs[a:], len(grid), axis=0)
        hit = _segments_cross(starts[a], vecs[a], q, s, tol)
        for flat in np.flatnonzero(hit):
            b, g = divmod(int(flat), len(grid))
            off = tuple(int(v) for v in grid[g])
            if b == 0 and not any(off):
                continue
            out.append((a, a + b, off))
    return out


def _segments_cross(p, r, q, s, tol):
    denom = r[0] * s[:, 1] - r[1] * s[:, 0]
    qp = q - p
    par = np.abs(denom) <= tol * np.linalg.norm(r) * np.linalg.norm(s, axis=1)
    denom = np.where(par, 1.0, denom)
    u = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / denom
    v = (qp[:, 0] * r[1] - qp[:, 1] * r[0]) / denom
    # parallel segments never cross in a proper contact graph
    return ~par & (u > tol) & (u < 1 - tol) & (v > tol) & (v < 1 - tol)


def trace_faces(t: Tensegrity, check_crossings: bool = True) -> FaceStructure:
    """Faces of a periodic planar framework, read off the angular rotation system."""
    if t.dim != 2:
        raise PlanarityError("face tracing needs a planar (d = 2) framework")
    if check_crossings:
        bad = find_crossings(t)
        if bad:
            a, b, off = bad[0]
            raise PlanarityError(f"contacts {a} and {b} cross (translate {off})")
    vecs = t.edge_vectors()
    n = t.n_vertices
    rotation: list[list[HalfEdge]] = [[] for _ in range(n)]
    for k, c in enumerate(t.contacts):
        rotation[c.i].append((k, 1))
        rotation[c.j].append((k, -1))
    position: dict[HalfEdge, tuple[int, int]] = {}
    for v in range(n):
        rotation[v].sort(key=lambda h: math.atan2(*_half_vector(vecs, h)[::-1]))
        for idx, h in enumerate(rotation[v]):
            position[h] = (v, idx)

    seen: set[HalfEdge] = set()
    faces = []
    for start in sorted(position):
        if start in seen:
            continue
        walk = []
        h = start
        total = np.zeros(2)
        area = 0.0
        while h not in seen:
            seen.add(h)
            walk.append(h)
            step = _half_vector(vecs, h)
            area += 0.5 * (total[0] * step[1] - total[1] * step[0])
            total = total + step
            twin = (h[0], -h[1])
            v, idx = position[twin]
            h = rotation[v][(idx - 1) % len(rotation[v])]
        if h != start or np.linalg.norm(total) > 1e-8 * max(1.0, float(np.abs(vecs).max())):
            raise PlanarityError("face walk does not close; embedding is not planar")
        faces.append(Face(walk, area))
    fs = FaceStructure(rotation, faces, n, t.n_contacts)
    if fs.euler_characteristic != 0:
        raise PlanarityError(f"Euler characteristic {fs.euler_characteristic} != 0 on the torus")
    return fs


def vertex_to_edge_flex(t: Tensegrity, flex: FlexVector) -> np.ndarray:
    """``e'_k = p'_j - p'_i (+ A e_k)``, one row per contact."""
    pv = np.asarray(flex.per_vertex)
    ii = [c.i for c in t.contacts]
    jj = [c.j for c in t.contacts]
    out = pv[jj] - pv[ii]
    if flex.affine is not None:
        out = out + t.edge_vectors() @ np.asarray(flex.affine).T
    return out


def edge_flex_signs_ok(t: Tensegrity, edge_flex: np.ndarray, tol: float = 1e-9) -> bool:
    """Check ``e_k . e'_k`` against each contact's kind (=0 bar, <=0 cable, >=0 strut)."""
    dots = np.real(np.einsum("kd,kd->k", t.edge_vectors(), edge_flex))
    for dot, kind in zip(dots, t.kinds):
        if kind is Kind.BAR and abs(dot) > tol:
            return False
        if kind is Kind.CABLE and dot > tol:
            return False
        if kind is Kind.STRUT and dot < -tol:
            return False
    return True


def lattice_tours(t: Tensegrity) -> list[list[HalfEdge]]:
    """For each generator, a shortest contact path from vertex 0 to its translate."""
    d = t.dim
    adj: list[list[tuple[HalfEdge, int, tuple[int, ...]]]] = [[] for _ in range(t.n_vertices)]
    for k, c in enumerate(t.contacts):
        adj[c.i].append(((k, 1), c.j, c.offset))
        adj[c.j].append(((k, -1), c.i, tuple(-v for v in c.offset)))
    tours = []
    for m in range(d):
        goal = (0, tuple(int(a == m) for a in range(d)))
        start = (0, (0,) * d)
        prev = {start: None}
        queue = deque([start])
        limit = 10 * (t.n_vertices + 1) * (t.n_contacts + 1)
        while queue and goal not in prev and len(prev) < limit:
            v, off = queue.popleft()
            for h, w, step in adj[v]:
                node = (w, tuple(a + b for a, b in zip(off, step)))
                if node not in prev:
                    prev[node] = ((v, off), h)
                    queue.append(node)
        if goal not in prev:
            raise EdgeFlexError(f"no contact path realizes generator {m}", tour=m)
        path = []
        node = goal
        while prev[node] is not None:
            node, h = prev[node]
            path.append(h)
        tours.append(path[::-1])
    return tours


def _cycle_sum(vectors: np.ndarray, cycle: list[HalfEdge]) -> np.ndarray:
    return sum((s * vectors[k] for k, s in cycle), np.zeros(vectors.shape[1], dtype=vectors.dtype))


def edge_to_vertex_flex(t: Tensegrity, edge_flex, anchor: int = 0, anchor_value=None,
                        affine=None, tol: float = 1e-9,
                        faces: FaceStructure | None = None) -> FlexVector:
    """Integrate an edge flex along contact paths, starting from ``anchor``.

    Raises :class:`EdgeFlexError` naming the offending face (or tour) when the
    edge velocities do not close up.
    """
    ef = np.asarray(edge_flex)
    d = t.dim
    a = None if affine is None else np.asarray(affine)
    # remove the lattice part so what is left must close around every cycle
    target = ef if a is None else ef - t.edge_vectors() @ a.T
    pv = np.full((t.n_vertices, d), np.nan, dtype=np.result_type(target.dtype, float))
    pv[anchor] = 0.0 if anchor_value is None else np.asarray(anchor_value)
    adj: list[list[tuple[int, int, int]]] = [[] for _ in range(t.n_vertices)]
    for k, c in enumerate(t.contacts):
        adj[c.i].append((k, 1, c.j))
        adj[c.j].append((k, -1, c.i))
    queue = deque([anchor])
    while queue:
        v = queue.popleft()
        for k, s, w in adj[v]:
            if np.isnan(pv[w]).any():
                pv[w] = pv[v] + s * target[k]
                queue.append(w)
    if np.isnan(pv).any():
        raise EdgeFlexError("contact graph is disconnected")
    flex = FlexVector(pv, a)
    resid = vertex_to_edge_flex(t, flex) - ef
    scale = max(1.0, float(np.abs(ef).max()) if ef.size else 1.0)
    if np.abs(resid).max(initial=0.0) > tol * scale:
        _raise_violation(t, target, tol * scale, faces)
    return flex


def _raise_violation(t, target, tol, faces):
    if t.dim == 2:
        fs = faces if faces is not None else trace_faces(t, check_crossings=False)
        for idx, face in enumerate(fs.faces):
            if np.linalg.norm(_cycle_sum(target, face.half_edges)) > tol:
                raise EdgeFlexError(f"edge flex does not close around face {idx}", face=idx)
        for m, tour in enumerate(lattice_tours(t)):
            if np.linalg.norm(_cycle_sum(target, tour)) > tol:
                raise EdgeFlexError(f"edge flex does not close along the tour for generator {m}",
                                    tour=m)
    raise EdgeFlexError("edge flex does not close around some cycle")


def rotation_constraints(t: Tensegrity, faces: FaceStructure | None = None) -> np.ndarray:
    """Stacked face and tour closing conditions on the rotation rates ``alpha``.

    Two scalar rows per face, then two per generator tour.
    """
    if t.dim != 2:
        raise PlanarityError("rotation rates are defined for planar frameworks only")
    fs = faces if faces is not None else trace_faces(t)
    rotated = t.edge_vectors() @ R90.T
    rows = []
    for cycle in [f.half_edges for f in fs.faces] + lattice_tours(t):
        block = np.zeros((2, t.n_contacts))
        for k, s in cycle:
            block[:, k] += s * rotated[k]
        rows.append(block)
    return np.vstack(rows)


def rotation_flex_space(t: Tensegrity, faces: FaceStructure | None = None,
                        tol_factor: float = 1e-9) -> np.ndarray:
    """Basis (columns) of rotation-rate vectors that are periodic edge flexes."""
    if any(k is not Kind.BAR for k in t.kinds):
        t = t.with_kind(Kind.BAR)
    cons = rotation_constraints(t, faces)
    return rank_nullspace(cons, tol_factor).nullspace


def rotation_to_edge_flex(t: Tensegrity, alpha) -> np.ndarray:
    return np.asarray(alpha)[:, None] * (t.edge_vectors() @ R90.T)


@dataclass
class LemmaViolation:
    face: int
    lemma: str  # "triangle" | "rhombus"
    values: tuple[float, ...]


def check_triangle_rhombus(t: Tensegrity, alpha, faces: FaceStructure | None = None,
                           tol: float = 1e-9) -> list[LemmaViolation]:
    """Equal rates on triangle edges; equal rates on parallel rhombus sides."""
    fs = faces if faces is not None else trace_faces(t)
    a = np.asarray(alpha, dtype=float)
    vecs = t.edge_vectors()
    scale = max(1.0, float(np.abs(a).max()) if a.size else 1.0)
    out = []
    for idx, face in enumerate(fs.faces):
        ks = [k for k, _ in face.half_edges]
        vals = tuple(float(a[k]) for k in ks)
        if face.size == 3:
            if max(vals) - min(vals) > tol * scale:
                out.append(LemmaViolation(idx, "triangle", vals))
        elif face.size == 4 and _is_rhombus(vecs, face.half_edges):
            if abs(vals[0] - vals[2]) > tol * scale or abs(vals[1] - vals[3]) > tol * scale:
                out.append(LemmaViolation(idx, "rhombus", vals))
    return out


def _is_rhombus(vecs, cycle, tol=1e-9) -> bool:
    sides = [s * vecs[k] for k, s in cycle]
    lengths = [np.linalg.norm(v) for v in sides]
    if max(lengths) - min(lengths) > tol * max(lengths):
        return False
    return (np.linalg.norm(sides[0] + sides[2]) <= tol * lengths[0]
            and np.linalg.norm(sides[1] + sides[3]) <= tol * lengths[1])
