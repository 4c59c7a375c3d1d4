"""Reference surfaces that can be re-triangulated with round holes.

A chart owns a background point set (flat torus: a periodic lattice grid,
sphere: a geodesic icosphere). Cutting a disk replaces the background points
near the center by staggered polar rings whose radii grow geometrically from
the hole radius, then re-triangulates (periodic Delaunay on the torus, convex
hull on the sphere). The innermost ring is the boundary loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, Delaunay

from .mesh import DiscreteMetric, GeometryError, SurfaceMesh, find_boundary_loops, metric_from_face_lengths


@dataclass(frozen=True, eq=False)
class BoundaryLoop:
    """Boundary circle left by a removed disk, with its polar patch."""

    vertices: np.ndarray
    center: np.ndarray
    epsilon: float
    rings: tuple = ()
    ring_radii: np.ndarray = field(default_factory=lambda: np.zeros(0))
    patch_radius: float = 0.0
    polar_vertices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    polar_r: np.ndarray = field(default_factory=lambda: np.zeros(0))
    polar_theta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    radial_profile: str = "flat"

    @property
    def n(self) -> int:
        return len(self.vertices)

    def as_hole(self) -> "Hole":
        return Hole(tuple(np.asarray(self.center, dtype=float).tolist()), self.epsilon, self.n)

    def perimeter(self, mesh: SurfaceMesh, metric: DiscreteMetric) -> float:
        v = self.vertices
        return float(np.sum(metric.lengths(mesh)[mesh.edge_index(v, np.roll(v, -1))]))

    def relabel(self, vmap: np.ndarray) -> "BoundaryLoop":
        return BoundaryLoop(
            vertices=vmap[self.vertices],
            center=self.center,
            epsilon=self.epsilon,
            rings=tuple(vmap[r] for r in self.rings),
            ring_radii=self.ring_radii,
            patch_radius=self.patch_radius,
            polar_vertices=vmap[self.polar_vertices],
            polar_r=self.polar_r,
            polar_theta=self.polar_theta,
            radial_profile=self.radial_profile,
        )


@dataclass(frozen=True)
class Hole:
    center: tuple
    epsilon: float
    n_angular: int


def _ring_radii(epsilon: float, n: int, spacing: float) -> np.ndarray:
    q = 1.0 + np.pi * np.sqrt(3.0) / n
    r_stop = n * spacing / (2 * np.pi)
    radii = [epsilon]
    while radii[-1] * q < r_stop:
        radii.append(radii[-1] * q)
    return np.array(radii)


def _exclusion_radius(radii: np.ndarray, n: int, spacing: float) -> float:
    last = radii[-1]
    return last + 0.5 * (2 * np.pi * last / n) + 0.55 * spacing


class TorusChart:
    """Flat torus R^2 / (Z b1 + Z b2) sampled by a periodic grid."""

    kind = "flat_torus"

    def __init__(self, basis, resolution: int):
        B = np.asarray(basis, dtype=float)
        if B.shape != (2, 2):
            raise GeometryError("lattice basis must be 2x2")
        det = float(np.linalg.det(B))
        if abs(det) < 1e-12 * max(1.0, float(np.abs(B).max()) ** 2):
            raise GeometryError("degenerate lattice basis")
        if det < 0:
            B = B[::-1].copy()
        if resolution < 3:
            raise GeometryError("resolution must be >= 3")
        self.basis = B
        self.resolution = int(resolution)
        self.area = abs(det)
        l1, l2 = np.linalg.norm(B, axis=1)
        cosang = float(B[0] @ B[1]) / (l1 * l2)
        n = self.resolution
        if abs(l1 - l2) < 1e-9 * l1 and abs(abs(cosang) - 0.5) < 1e-9:
            i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
            lat = np.stack([i.ravel() / n, j.ravel() / n], axis=1)
        else:
            height = self.area / l1
            m = int(round(n * height / (l1 * np.sqrt(3) / 2)))
            m = max(4, m + (m % 2))
            i, j = np.meshgrid(np.arange(n), np.arange(m), indexing="ij")
            lat = np.stack([(i.ravel() + 0.5 * (j.ravel() % 2)) / n, j.ravel() / m], axis=1)
        self.lattice_points = lat
        self.spacing = l1 / n
        self.inj_radius = 0.5 * min(np.linalg.norm(v) for v in (B[0], B[1], B[0] + B[1], B[0] - B[1]))

    def identification(self) -> dict:
        return {"kind": "flat_torus", "basis": self.basis.tolist()}

    def to_cartesian(self, lat):
        return np.asarray(lat) @ self.basis

    def to_lattice(self, xy):
        return np.asarray(xy) @ np.linalg.inv(self.basis)

    def displacement(self, frm, to):
        """Shortest lattice-periodic displacement vectors from frm to to."""
        d = self.to_lattice(np.asarray(to, dtype=float) - np.asarray(frm, dtype=float))
        d = d - np.round(d)
        best = None
        for a in (-1, 0, 1):
            for b in (-1, 0, 1):
                cand = (d + np.array([a, b])) @ self.basis
                if best is None:
                    best = cand
                else:
                    shorter = np.linalg.norm(cand, axis=-1) < np.linalg.norm(best, axis=-1)
                    best = np.where(shorter[..., None], cand, best)
        return best

    def distance(self, p, q) -> float:
        return float(np.linalg.norm(self.displacement(p, q)))

    def vertex_position(self, mesh: SurfaceMesh, v: int) -> np.ndarray:
        pts = mesh.identification.get("points")
        if pts is None:
            raise GeometryError("mesh carries no chart positions")
        return np.asarray(pts[v], dtype=float)

    def triangulate(self, holes=()):
        B = self.basis
        spacing = self.spacing
        lat = self.lattice_points
        xy = self.to_cartesian(lat)
        keep = np.ones(len(lat), dtype=bool)
        ring_pts, ring_meta = [], []
        for h in holes:
            c = np.asarray(h.center, dtype=float)
            radii = _ring_radii(h.epsilon, h.n_angular, spacing)
            rex = _exclusion_radius(radii, h.n_angular, spacing)
            if rex + spacing >= self.inj_radius:
                raise GeometryError(
                    f"epsilon={h.epsilon} needs a flat patch of radius {rex:.4g}, torus allows {self.inj_radius:.4g}"
                )
            keep &= np.linalg.norm(self.displacement(c, xy), axis=1) >= rex
            k = np.arange(len(radii))[:, None]
            th = 2 * np.pi * (np.arange(h.n_angular)[None, :] + 0.5 * k) / h.n_angular
            pts = c + np.stack([radii[:, None] * np.cos(th), radii[:, None] * np.sin(th)], axis=-1)
            ring_pts.append(pts.reshape(-1, 2))
            ring_meta.append((c, radii, rex, th))
        _check_disjoint(holes, [m[2] for m in ring_meta], spacing, self.distance)
        base = xy[keep]
        allpts = np.concatenate([base] + ring_pts) if ring_pts else base
        lat_all = self.to_lattice(allpts)
        lat_all = lat_all - np.floor(lat_all)
        N = len(lat_all)

        margin = min(0.35, max(0.15, 6.0 / self.resolution))
        tiles, owners, shifts = [], [], []
        for a in (-1, 0, 1):
            for b in (-1, 0, 1):
                s = lat_all + np.array([a, b])
                m = np.all((s > -margin) & (s < 1 + margin), axis=1)
                tiles.append(s[m])
                owners.append(np.flatnonzero(m))
                shifts.append(np.tile([a, b], (int(m.sum()), 1)))
        tl = np.concatenate(tiles)
        own = np.concatenate(owners)
        shift = np.concatenate(shifts)
        cart = tl @ B
        simp = Delaunay(cart).simplices
        cen = tl[simp].mean(axis=1)
        # keep one translate per periodic triangle; a loose window plus a
        # canonical key avoids double counting centroids on the seam
        near = np.all((cen > -1e-6) & (cen < 1 + 1e-6), axis=1)
        simp = simp[near]
        cen = cen[near]
        o = own[simp]
        order = np.argsort(o, axis=1, kind="stable")
        so = np.take_along_axis(o, order, 1)
        ssh = shift[np.take_along_axis(simp, order, 1)]
        rel = ssh - ssh[:, :1]
        key = np.concatenate([so, rel[:, 1:].reshape(len(so), -1)], axis=1)
        rank = np.lexsort((np.abs(cen - 0.5).max(axis=1),) + tuple(key.T[::-1]))
        ks = key[rank]
        first = np.r_[True, np.any(ks[1:] != ks[:-1], axis=1)]
        simp = simp[np.sort(rank[first])]
        P = cart[simp]
        cross = (P[:, 1, 0] - P[:, 0, 0]) * (P[:, 2, 1] - P[:, 0, 1]) - (P[:, 1, 1] - P[:, 0, 1]) * (
            P[:, 2, 0] - P[:, 0, 0]
        )
        flip = cross < 0
        simp[flip] = simp[flip][:, [0, 2, 1]]
        P = cart[simp]
        tri = own[simp]

        # ring vertex ids
        offset = len(base)
        hole_rings = []
        for (c, radii, rex, th), h in zip(ring_meta, holes):
            ids = offset + np.arange(radii.size * h.n_angular).reshape(radii.size, h.n_angular)
            offset += ids.size
            hole_rings.append(ids)
        drop = np.zeros(len(tri), dtype=bool)
        for ids in hole_rings:
            drop |= np.all(np.isin(tri, ids[0]), axis=1)
        tri, P = tri[~drop], P[~drop]
        face_len = np.stack(
            [np.linalg.norm(P[:, (i + 2) % 3] - P[:, (i + 1) % 3], axis=1) for i in range(3)], axis=1
        )
        return self._finish(tri, face_len, N, allpts, holes, ring_meta, hole_rings,
                            lambda c, p: self.displacement(c, p))

    def _finish(self, tri, face_len, N, allpts, holes, ring_meta, hole_rings, disp):
        loops = []
        for (c, radii, rex, th), ids, h in zip(ring_meta, hole_rings, holes):
            d = disp(c, allpts)
            r = np.linalg.norm(d, axis=-1)
            near = np.flatnonzero(r < rex + 3 * self.spacing)
            loops.append(
                BoundaryLoop(
                    vertices=ids[0].copy(),
                    center=np.asarray(c, dtype=float),
                    epsilon=float(h.epsilon),
                    rings=tuple(ids),
                    ring_radii=radii,
                    patch_radius=float(rex),
                    polar_vertices=near,
                    polar_r=r[near],
                    polar_theta=np.arctan2(d[near, 1], d[near, 0]),
                    radial_profile="flat",
                )
            )
        ident = self.identification()
        ident["points"] = allpts
        mesh = SurfaceMesh(N, tri, boundary_loops=tuple(l.vertices for l in loops), identification=ident,
                           chart=self, holes=tuple(loops))
        _orient_loops(mesh, loops)
        metric = metric_from_face_lengths(mesh, face_len)
        mesh.validate()
        return mesh, metric, loops


class SphereChart:
    """Unit round sphere sampled by a frequency-nu geodesic icosphere."""

    kind = "round_sphere"

    def __init__(self, frequency: int, radius: float = 1.0):
        if frequency < 1:
            raise GeometryError("icosphere frequency must be >= 1")
        self.frequency = int(frequency)
        self.radius = float(radius)
        self.points, self.faces = icosphere(self.frequency)
        e = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        self.spacing = float(np.mean(np.linalg.norm(self.points[e[:, 0]] - self.points[e[:, 1]], axis=1)))
        self.inj_radius = np.pi / 2

    def identification(self) -> dict:
        return {"kind": "round_sphere", "radius": self.radius}

    def distance(self, p, q) -> float:
        p = np.asarray(p, dtype=float) / np.linalg.norm(p)
        q = np.asarray(q, dtype=float) / np.linalg.norm(q)
        return float(np.arccos(np.clip(p @ q, -1, 1)))

    def vertex_position(self, mesh: SurfaceMesh, v: int) -> np.ndarray:
        return np.asarray(mesh.identification["points"][v], dtype=float)

    def triangulate(self, holes=()):
        pts = self.points
        if not holes:
            return self._assemble(pts, self.faces.copy(), [], [], [])
        keep = np.ones(len(pts), dtype=bool)
        ring_pts, ring_meta = [], []
        for h in holes:
            c = np.asarray(h.center, dtype=float)
            c = c / np.linalg.norm(c)
            radii = _ring_radii(h.epsilon, h.n_angular, self.spacing)
            rex = _exclusion_radius(radii, h.n_angular, self.spacing)
            if rex + self.spacing >= self.inj_radius:
                raise GeometryError(f"epsilon={h.epsilon} too large for a polar patch on the sphere")
            keep &= np.arccos(np.clip(pts @ c, -1, 1)) >= rex
            e1, e2 = _tangent_frame(c)
            k = np.arange(len(radii))[:, None]
            th = 2 * np.pi * (np.arange(h.n_angular)[None, :] + 0.5 * k) / h.n_angular
            r = radii[:, None]
            ring = (np.cos(r)[..., None] * c + np.sin(r)[..., None] *
                    (np.cos(th)[..., None] * e1 + np.sin(th)[..., None] * e2))
            ring_pts.append(ring.reshape(-1, 3))
            ring_meta.append((c, radii, rex, th))
        _check_disjoint(holes, [m[2] for m in ring_meta], self.spacing, self.distance)
        base = pts[keep]
        allpts = np.concatenate([base] + ring_pts)
        hull = ConvexHull(allpts)
        tri = hull.simplices.copy()
        offset = len(base)
        hole_rings = []
        for (c, radii, rex, th), h in zip(ring_meta, holes):
            ids = offset + np.arange(radii.size * h.n_angular).reshape(radii.size, h.n_angular)
            offset += ids.size
            hole_rings.append(ids)
        drop = np.zeros(len(tri), dtype=bool)
        for ids in hole_rings:
            drop |= np.all(np.isin(tri, ids[0]), axis=1)
        tri = tri[~drop]
        return self._assemble(allpts, tri, holes, ring_meta, hole_rings)

    def _assemble(self, allpts, tri, holes, ring_meta, hole_rings):
        P = allpts[tri]
        nrm = np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0])
        flip = np.einsum("ij,ij->i", nrm, P.mean(axis=1)) < 0
        tri[flip] = tri[flip][:, [0, 2, 1]]
        P = allpts[tri] * self.radius
        face_len = np.stack(
            [np.linalg.norm(P[:, (i + 2) % 3] - P[:, (i + 1) % 3], axis=1) for i in range(3)], axis=1
        )
        loops = []
        for (c, radii, rex, th), ids, h in zip(ring_meta, hole_rings, holes):
            e1, e2 = _tangent_frame(c)
            r = np.arccos(np.clip(allpts @ c, -1, 1))
            near = np.flatnonzero(r < rex + 3 * self.spacing)
            loops.append(
                BoundaryLoop(
                    vertices=ids[0].copy(),
                    center=c,
                    epsilon=float(h.epsilon),
                    rings=tuple(ids),
                    ring_radii=radii,
                    patch_radius=float(rex),
                    polar_vertices=near,
                    polar_r=r[near] * self.radius,
                    polar_theta=np.arctan2(allpts[near] @ e2, allpts[near] @ e1),
                    radial_profile="sphere",
                )
            )
        ident = self.identification()
        ident["points"] = allpts * self.radius
        mesh = SurfaceMesh(len(allpts), tri, boundary_loops=tuple(l.vertices for l in loops),
                           identification=ident, chart=self, holes=tuple(loops))
        _orient_loops(mesh, loops)
        metric = metric_from_face_lengths(mesh, face_len)
        mesh.validate()
        return mesh, metric, loops


def _tangent_frame(c):
    a = np.array([1.0, 0.0, 0.0]) if abs(c[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = a - (a @ c) * c
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(c, e1)


def _check_disjoint(holes, radii, spacing, dist):
    for i in range(len(holes)):
        for j in range(i + 1, len(holes)):
            d = dist(holes[i].center, holes[j].center)
            if d < radii[i] + radii[j] + spacing:
                raise GeometryError(f"disk patches {i} and {j} overlap (centers {d:.4g} apart)")


def _orient_loops(mesh: SurfaceMesh, loops) -> None:
    """Check that each ring-0 cycle is a boundary loop of the mesh."""
    found = find_boundary_loops(mesh.triangles, mesh.n_vertices)
    found_sets = [frozenset(f.tolist()) for f in found]
    for l in loops:
        if frozenset(l.vertices.tolist()) not in found_sets:
            raise GeometryError("hole ring did not become a clean boundary loop; refine the background mesh")


def icosphere(frequency: int):
    """Class-I geodesic subdivision of the icosahedron (10 nu^2 + 2 vertices)."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    V = np.array(
        [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
         [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
         [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]], dtype=float)
    V /= np.linalg.norm(V, axis=1)[:, None]
    F = np.array(
        [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
         [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
         [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
         [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]])
    nu = frequency
    pts, tris = [], []
    for a, b, c in F:
        A, Bv, C = V[a], V[b], V[c]
        idx = {}
        for i in range(nu + 1):
            for j in range(nu + 1 - i):
                idx[(i, j)] = len(pts)
                pts.append(A + (i / nu) * (Bv - A) + (j / nu) * (C - A))
        for i in range(nu):
            for j in range(nu - i):
                tris.append((idx[(i, j)], idx[(i + 1, j)], idx[(i, j + 1)]))
                if i + j < nu - 1:
                    tris.append((idx[(i + 1, j)], idx[(i + 1, j + 1)], idx[(i, j + 1)]))
    pts = np.array(pts)
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    key = np.round(pts * 1e9).astype(np.int64)
    uniq, first, inv = np.unique(key, axis=0, return_index=True, return_inverse=True)
    out = pts[first]
    faces = inv.ravel()[np.array(tris)]
    return out, faces
