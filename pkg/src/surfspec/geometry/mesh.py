"""Intrinsic triangle meshes and discrete metrics.

A :class:`SurfaceMesh` is purely combinatorial: vertices are the integers
``0..n_vertices-1`` and quotient identifications are already applied, so a
Klein bottle or a cross cap is just a triangle list whose vertex labels wrap
around. All geometry lives in :class:`DiscreteMetric` as one length per
edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np


class GeometryError(ValueError):
    """Raised when a mesh, metric or surgery request is invalid."""


def edge_key(a, b, n):
    lo = np.minimum(a, b).astype(np.int64)
    hi = np.maximum(a, b).astype(np.int64)
    return lo * np.int64(n) + hi


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    n_vertices: int
    triangles: np.ndarray
    boundary_loops: tuple = ()
    identification: dict = field(default_factory=dict)
    face_part: np.ndarray | None = None
    chart: Any = None
    holes: tuple = ()

    def __post_init__(self):
        tri = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if tri.ndim != 2 or tri.shape[1] != 3:
            raise GeometryError("triangles must have shape (F, 3)")
        if tri.size and (tri.min() < 0 or tri.max() >= self.n_vertices):
            raise GeometryError("triangle index out of range")
        if np.any((tri[:, 0] == tri[:, 1]) | (tri[:, 1] == tri[:, 2]) | (tri[:, 0] == tri[:, 2])):
            raise GeometryError("degenerate triangle with repeated vertex")
        tri.setflags(write=False)
        object.__setattr__(self, "triangles", tri)
        loops = tuple(np.asarray(l, dtype=np.int64) for l in self.boundary_loops)
        object.__setattr__(self, "boundary_loops", loops)
        part = self.face_part
        part = np.zeros(len(tri), dtype=np.int64) if part is None else np.asarray(part, dtype=np.int64)
        if part.shape != (len(tri),):
            raise GeometryError("face_part must have one label per triangle")
        object.__setattr__(self, "face_part", part)

    @property
    def n_faces(self) -> int:
        return len(self.triangles)

    @cached_property
    def _edge_table(self):
        t = self.triangles
        # edge opposite corner i joins corners i+1, i+2
        a = np.concatenate([t[:, 1], t[:, 2], t[:, 0]])
        b = np.concatenate([t[:, 2], t[:, 0], t[:, 1]])
        keys = edge_key(a, b, self.n_vertices)
        uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
        edges = np.stack([uniq // self.n_vertices, uniq % self.n_vertices], axis=1)
        face_edges = inverse.reshape(3, -1).T.copy()
        return edges, face_edges, counts

    @property
    def edges(self) -> np.ndarray:
        return self._edge_table[0]

    @property
    def face_edges(self) -> np.ndarray:
        """(F, 3) edge index opposite each corner."""
        return self._edge_table[1]

    @property
    def edge_face_count(self) -> np.ndarray:
        return self._edge_table[2]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_index(self, a, b) -> np.ndarray:
        keys = edge_key(np.atleast_1d(a), np.atleast_1d(b), self.n_vertices)
        uniq = edge_key(self.edges[:, 0], self.edges[:, 1], self.n_vertices)
        idx = np.searchsorted(uniq, keys)
        idx = np.clip(idx, 0, len(uniq) - 1)
        if np.any(uniq[idx] != keys):
            raise GeometryError("requested edge is not in the mesh")
        return idx

    def euler_characteristic(self) -> int:
        used = np.unique(self.triangles).size
        return int(used - self.n_edges + self.n_faces)

    @property
    def is_closed(self) -> bool:
        return bool(np.all(self.edge_face_count == 2))

    @cached_property
    def face_orientation(self) -> np.ndarray | None:
        """Signs making the triangle list coherently oriented, or None."""
        return _coherent_orientation(self)

    @property
    def is_orientable(self) -> bool:
        return self.face_orientation is not None

    @cached_property
    def vertex_faces(self):
        """CSR-style (indptr, faces) incidence from vertices to triangles."""
        flat = self.triangles.ravel()
        order = np.argsort(flat, kind="stable")
        counts = np.bincount(flat, minlength=self.n_vertices)
        indptr = np.concatenate([[0], np.cumsum(counts)])
        return indptr, order // 3

    def validate(self) -> None:
        counts = self.edge_face_count
        if np.any(counts > 2):
            raise GeometryError(f"{int(np.sum(counts > 2))} non-manifold edges")
        bnd = self.edges[counts == 1]
        deg = np.bincount(bnd.ravel(), minlength=self.n_vertices)
        if np.any(deg[deg > 0] != 2):
            raise GeometryError("boundary is not a disjoint union of cycles")
        in_loops = np.zeros(self.n_vertices, dtype=bool)
        for loop in self.boundary_loops:
            if len(np.unique(loop)) != len(loop) or len(loop) < 3:
                raise GeometryError("boundary loop must be a simple cycle")
            k = self.edge_index(loop, np.roll(loop, -1))
            if np.any(counts[k] != 1):
                raise GeometryError("declared boundary loop uses an interior edge")
            in_loops[loop] = True
        if np.any(in_loops != (deg > 0)):
            raise GeometryError("declared boundary loops do not match mesh boundary")

    def replace(self, **changes) -> "SurfaceMesh":
        kw = dict(
            n_vertices=self.n_vertices,
            triangles=self.triangles,
            boundary_loops=self.boundary_loops,
            identification=dict(self.identification),
            face_part=self.face_part,
            chart=self.chart,
            holes=self.holes,
        )
        kw.update(changes)
        return SurfaceMesh(**kw)


def _coherent_orientation(mesh: SurfaceMesh):
    """Breadth-first propagation of triangle orientation across edges."""
    t = mesh.triangles
    F = len(t)
    fe = mesh.face_edges
    # direction of edge opposite corner i inside triangle: corner i+1 -> i+2
    starts = np.stack([t[:, 1], t[:, 2], t[:, 0]], axis=1)
    edges = mesh.edges
    dir_sign = np.where(starts == edges[fe, 0], 1, -1)
    # pair up faces across each interior edge
    flat_e = fe.ravel()
    order = np.argsort(flat_e, kind="stable")
    se = flat_e[order]
    first = np.flatnonzero(np.r_[True, se[1:] != se[:-1]])
    counts = np.diff(np.r_[first, len(se)])
    pairs = first[counts == 2]
    fa, fb = order[pairs] // 3, order[pairs + 1] // 3
    da = dir_sign.ravel()[order[pairs]]
    db = dir_sign.ravel()[order[pairs + 1]]
    # coherent iff s_a*da == -s_b*db
    rel = -da * db
    nbr = [[] for _ in range(F)]
    for a, b, r in zip(fa.tolist(), fb.tolist(), rel.tolist()):
        nbr[a].append((b, r))
        nbr[b].append((a, r))
    sign = np.zeros(F, dtype=np.int64)
    for seed in range(F):
        if sign[seed]:
            continue
        sign[seed] = 1
        stack = [seed]
        while stack:
            f = stack.pop()
            for g, r in nbr[f]:
                want = sign[f] * r
                if sign[g] == 0:
                    sign[g] = want
                    stack.append(g)
                elif sign[g] != want:
                    return None
    return sign


def find_boundary_loops(triangles: np.ndarray, n_vertices: int) -> list[np.ndarray]:
    """Boundary cycles, each traversed along the direction induced by its triangle."""
    t = np.asarray(triangles)
    a = np.concatenate([t[:, 0], t[:, 1], t[:, 2]])
    b = np.concatenate([t[:, 1], t[:, 2], t[:, 0]])
    keys = edge_key(a, b, n_vertices)
    uniq, counts = np.unique(keys, return_counts=True)
    single = set(uniq[counts == 1].tolist())
    nxt = {}
    for u, v, k in zip(a.tolist(), b.tolist(), keys.tolist()):
        if k in single:
            if u in nxt:
                raise GeometryError("boundary vertex with more than one outgoing edge")
            nxt[u] = v
    loops = []
    seen = set()
    for start in sorted(nxt):
        if start in seen:
            continue
        loop = [start]
        seen.add(start)
        v = nxt[start]
        while v != start:
            if v in seen or v not in nxt:
                raise GeometryError("boundary edges do not form simple cycles")
            loop.append(v)
            seen.add(v)
            v = nxt[v]
        loops.append(np.array(loop, dtype=np.int64))
    return loops


def _heron(l0, l1, l2):
    # Kahan's stable Heron formula
    s = np.sort(np.stack([l0, l1, l2]), axis=0)[::-1]
    a, b, c = s
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * np.sqrt(np.maximum(prod, 0.0))


@dataclass(frozen=True, eq=False)
class DiscreteMetric:
    """Edge lengths aligned with ``mesh.edges`` plus a per-vertex log factor.

    The effective length of edge ij is ``exp((phi_i + phi_j) / 2) * l_ij``.
    """

    edge_lengths: np.ndarray
    log_conformal_factor: np.ndarray | None = None

    def __post_init__(self):
        l = np.array(self.edge_lengths, dtype=float)
        if np.any(~np.isfinite(l)) or np.any(l <= 0):
            raise GeometryError("edge lengths must be positive and finite")
        l.setflags(write=False)
        object.__setattr__(self, "edge_lengths", l)
        if self.log_conformal_factor is not None:
            phi = np.array(self.log_conformal_factor, dtype=float)
            phi.setflags(write=False)
            object.__setattr__(self, "log_conformal_factor", phi)

    def lengths(self, mesh: SurfaceMesh) -> np.ndarray:
        if len(self.edge_lengths) != mesh.n_edges:
            raise GeometryError("metric does not match mesh edge count")
        if self.log_conformal_factor is None:
            return self.edge_lengths
        phi = self.log_conformal_factor
        e = mesh.edges
        return self.edge_lengths * np.exp(0.5 * (phi[e[:, 0]] + phi[e[:, 1]]))

    def face_lengths(self, mesh: SurfaceMesh, check: bool = True) -> np.ndarray:
        L = self.lengths(mesh)[mesh.face_edges]
        if check:
            l0, l1, l2 = L.T
            slack = np.minimum.reduce([l1 + l2 - l0, l0 + l2 - l1, l0 + l1 - l2])
            bad = slack <= 1e-12 * L.max(axis=1)
            if np.any(bad):
                raise GeometryError(f"triangle inequality violated in {int(bad.sum())} triangles")
        return L

    def face_areas(self, mesh: SurfaceMesh) -> np.ndarray:
        L = self.face_lengths(mesh)
        return _heron(L[:, 0], L[:, 1], L[:, 2])

    def area(self, mesh: SurfaceMesh) -> float:
        return float(np.sum(self.face_areas(mesh)))

    def corner_angles(self, mesh: SurfaceMesh) -> np.ndarray:
        L = self.face_lengths(mesh)
        out = np.empty_like(L)
        for i in range(3):
            a, b, c = L[:, i], L[:, (i + 1) % 3], L[:, (i + 2) % 3]
            out[:, i] = np.arccos(np.clip((b * b + c * c - a * a) / (2 * b * c), -1.0, 1.0))
        return out

    def angle_sums(self, mesh: SurfaceMesh) -> np.ndarray:
        return np.bincount(mesh.triangles.ravel(), weights=self.corner_angles(mesh).ravel(),
                           minlength=mesh.n_vertices)

    def cone_points(self, mesh: SurfaceMesh, tol: float = 1e-6) -> list[tuple[int, float]]:
        """Interior vertices whose total angle differs from 2*pi by more than tol."""
        total = self.angle_sums(mesh)
        interior = np.ones(mesh.n_vertices, dtype=bool)
        bnd = mesh.edges[mesh.edge_face_count == 1]
        interior[bnd.ravel()] = False
        idx = np.flatnonzero(interior & (np.abs(total - 2 * np.pi) > tol))
        return [(int(v), float(total[v])) for v in idx]

    def scaled(self, c: float) -> "DiscreteMetric":
        return DiscreteMetric(self.edge_lengths * c, self.log_conformal_factor)

    def with_conformal_factor(self, phi) -> "DiscreteMetric":
        return DiscreteMetric(self.edge_lengths, phi)

    def baked(self, mesh: SurfaceMesh) -> "DiscreteMetric":
        """Same metric with the conformal factor folded into the lengths."""
        return DiscreteMetric(self.lengths(mesh))


def metric_from_face_lengths(mesh: SurfaceMesh, face_lengths: np.ndarray, rtol: float = 1e-9) -> DiscreteMetric:
    """Collapse per-corner lengths onto edges, insisting that copies agree."""
    fe = mesh.face_edges.ravel()
    fl = np.asarray(face_lengths, dtype=float).ravel()
    lengths = np.zeros(mesh.n_edges)
    lengths[fe] = fl
    mismatch = np.abs(lengths[fe] - fl) > rtol * np.maximum(fl, 1e-300)
    if np.any(mismatch):
        raise GeometryError(
            f"{int(mismatch.sum())} edges carry inconsistent lengths; mesh too coarse for its identifications"
        )
    return DiscreteMetric(lengths)


def check_surface(mesh: SurfaceMesh, metric: DiscreteMetric) -> None:
    mesh.validate()
    metric.face_lengths(mesh)
