"""Constructors for reference surfaces and the flat surgery models."""

from __future__ import annotations

import numpy as np

from .charts import BoundaryLoop, SphereChart, TorusChart, icosphere
from .mesh import DiscreteMetric, GeometryError, SurfaceMesh, metric_from_face_lengths

EQUILATERAL_BASIS = np.array([[1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]])


def lattice_basis(name: str, area: float | None = None) -> np.ndarray:
    """Named lattices; ``area`` rescales to the requested area."""
    if name == "equilateral":
        B = EQUILATERAL_BASIS.copy()
    elif name == "square":
        B = np.eye(2)
    else:
        raise GeometryError(f"unknown lattice {name!r}")
    if area is not None:
        B = B * np.sqrt(area / abs(np.linalg.det(B)))
    return B


def build_standard(kind: str, resolution: int, **params):
    """Reference surfaces.

    kind is one of ``round_sphere``, ``flat_torus`` (``basis``), ``flat_klein_bottle``
    (``sides``), ``projective_plane`` or ``flat_rectangle`` (``sides``). For the
    sphere and RP^2 the resolution is the icosphere frequency.
    """
    if resolution < 1 or (kind not in ("round_sphere", "projective_plane") and resolution < 3):
        raise GeometryError("resolution too small")
    if kind == "round_sphere":
        chart = SphereChart(resolution, params.get("radius", 1.0))
        mesh, metric, _ = chart.triangulate(())
        return mesh, metric
    if kind == "flat_torus":
        basis = params.get("basis", np.eye(2) * 2 * np.pi)
        if isinstance(basis, str):
            basis = lattice_basis(basis, params.get("area"))
        chart = TorusChart(basis, resolution)
        mesh, metric, _ = chart.triangulate(())
        return mesh, metric
    if kind == "flat_klein_bottle":
        a, b = params.get("sides", (np.pi, 2 * np.pi))
        return _klein_bottle(float(a), float(b), resolution)
    if kind == "projective_plane":
        return _projective_plane(resolution, params.get("radius", 1.0))
    if kind == "flat_rectangle":
        a, b = params.get("sides", (1.0, 1.0))
        return _rectangle(float(a), float(b), resolution)
    raise GeometryError(f"unsupported surface kind {kind!r}")


def _grid_faces(nx, ny, vid):
    """Two triangles per grid quad; returns faces and the (i, j) corners."""
    I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    I, J = I.ravel(), J.ravel()
    v00, v10, v11, v01 = vid(I, J), vid(I + 1, J), vid(I + 1, J + 1), vid(I, J + 1)
    faces = np.concatenate([np.stack([v00, v10, v11], 1), np.stack([v00, v11, v01], 1)])
    return faces


def _grid_face_lengths(n_quads, dx, dy):
    d = np.hypot(dx, dy)
    a = np.tile([dy, d, dx], (n_quads, 1))
    b = np.tile([dx, dy, d], (n_quads, 1))
    return np.concatenate([a, b])


def _klein_bottle(a, b, n):
    nx = n
    ny = max(3, int(round(n * b / a)))

    def vid(i, j):
        i = np.asarray(i)
        j = np.asarray(j)
        wrap = i >= nx
        jj = np.where(wrap, -j, j) % ny
        return np.where(wrap, 0, i) * ny + jj

    faces = _grid_faces(nx, ny, vid)
    mesh = SurfaceMesh(nx * ny, faces, identification={
        "kind": "flat_klein_bottle", "sides": [a, b],
        "glide": "(x, y) ~ (x + a, -y), (x, y) ~ (x, y + b)"})
    metric = metric_from_face_lengths(mesh, _grid_face_lengths(nx * ny, a / nx, b / ny))
    mesh.validate()
    return mesh, metric


def _rectangle(a, b, n):
    nx = n
    ny = max(3, int(round(n * b / a)))

    def vid(i, j):
        return np.asarray(j) * (nx + 1) + np.asarray(i)

    faces = _grid_faces(nx, ny, vid)
    loop = np.concatenate([
        vid(np.arange(nx), 0), vid(nx, np.arange(ny)),
        vid(np.arange(nx, 0, -1), ny), vid(0, np.arange(ny, 0, -1))])
    xs, ys = np.meshgrid(np.linspace(0, a, nx + 1), np.linspace(0, b, ny + 1))
    pts = np.stack([xs.ravel(), ys.ravel()], 1)
    mesh = SurfaceMesh((nx + 1) * (ny + 1), faces, boundary_loops=(loop,),
                       identification={"kind": "flat_rectangle", "sides": [a, b], "points": pts})
    metric = metric_from_face_lengths(mesh, _grid_face_lengths(nx * ny, a / nx, b / ny))
    mesh.validate()
    return mesh, metric


def _projective_plane(frequency, radius=1.0):
    pts, faces = icosphere(frequency)
    key = np.round(pts * 1e9).astype(np.int64)
    lookup = {tuple(k): i for i, k in enumerate(key.tolist())}
    anti = np.array([lookup[tuple((-k).tolist())] for k in key])

    def positive(p):
        s = np.sign(np.where(np.abs(p[:, 2]) > 1e-9, p[:, 2], np.where(np.abs(p[:, 1]) > 1e-9, p[:, 1], p[:, 0])))
        return s > 0

    rep = np.where(positive(pts), np.arange(len(pts)), anti)
    uniq, orbit = np.unique(rep, return_inverse=True)
    keepf = positive(pts[faces].mean(axis=1))
    tri = faces[keepf]
    P = pts[tri] * radius
    face_len = np.stack([np.linalg.norm(P[:, (i + 2) % 3] - P[:, (i + 1) % 3], axis=1) for i in range(3)], 1)
    mesh = SurfaceMesh(len(uniq), orbit[tri], identification={
        "kind": "projective_plane", "radius": radius, "points": pts[uniq] * radius})
    metric = metric_from_face_lengths(mesh, face_len)
    mesh.validate()
    return mesh, metric


def _model_rows(epsilon, h, resolution):
    if epsilon <= 0 or h <= 0:
        raise GeometryError("epsilon and h must be positive")
    n, nt = resolution
    if n < 3 or nt < 1:
        raise GeometryError("need at least 3 angular and 1 axial subdivisions")
    return int(n), int(nt), 2 * np.pi * epsilon / n


def build_cylinder(epsilon: float, h: float, resolution=(32, 16)):
    """Flat S^1(epsilon) x [0, h] with its two boundary circles as loops."""
    n, nt, a = _model_rows(epsilon, h, resolution)
    dt = h / nt

    def vid(i, j):
        return np.asarray(j) * n + np.asarray(i) % n

    faces = _grid_faces(n, nt, vid)
    bottom = vid(np.arange(n), 0)
    top = vid(np.arange(n), nt)
    mesh = SurfaceMesh(n * (nt + 1), faces, boundary_loops=(bottom, top),
                       identification={"kind": "cylinder", "epsilon": epsilon, "h": h,
                                       "axial": np.repeat(np.arange(nt + 1) * dt, n)})
    metric = metric_from_face_lengths(mesh, _grid_face_lengths(n * nt, a, dt))
    mesh.validate()
    return mesh, metric


def build_cross_cap(epsilon: float, h: float, resolution=(32, 16)):
    """Flat Moebius cap S^1(epsilon) x [0, 2h] / (theta, t) ~ (theta + pi, 2h - t).

    Built on the fundamental domain t in [0, h]; the middle circle t = h is
    folded onto itself by the half turn.
    """
    n, nt, a = _model_rows(epsilon, h, resolution)
    if n % 2:
        raise GeometryError("cross cap needs an even angular resolution")
    if n < 6:
        raise GeometryError("cross cap needs at least 6 angular subdivisions")
    dt = h / nt
    half = n // 2

    def vid(i, j):
        i = np.asarray(i) % n
        j = np.asarray(j)
        return np.where(j < nt, j * n + i, nt * n + i % half)

    faces = _grid_faces(n, nt, vid)
    bottom = vid(np.arange(n), 0)
    axial = np.concatenate([np.repeat(np.arange(nt) * dt, n), np.full(half, h)])
    mesh = SurfaceMesh(nt * n + half, faces, boundary_loops=(bottom,),
                       identification={"kind": "cross_cap", "epsilon": epsilon, "h": h, "axial": axial})
    metric = metric_from_face_lengths(mesh, _grid_face_lengths(n * nt, a, dt))
    mesh.validate()
    return mesh, metric


def build_disk(epsilon: float, resolution=(32, 8)):
    """Flat polar disk of radius epsilon; boundary vertex i sits at angle 2 pi i / n."""
    n, nr = resolution
    if n < 3 or nr < 1:
        raise GeometryError("need at least 3 angular and 1 radial subdivisions")
    r = epsilon * np.arange(1, nr + 1) / nr
    th = 2 * np.pi * np.arange(n) / n
    pts = np.concatenate([[[0.0, 0.0]], (r[:, None, None] * np.stack([np.cos(th), np.sin(th)], -1)).reshape(-1, 2)])

    def ring(k, i):
        return 1 + (k - 1) * n + np.asarray(i) % n

    i = np.arange(n)
    faces = [np.stack([np.zeros(n, dtype=int), ring(1, i), ring(1, i + 1)], 1)]
    for k in range(1, nr):
        faces.append(np.stack([ring(k, i), ring(k + 1, i), ring(k + 1, i + 1)], 1))
        faces.append(np.stack([ring(k, i), ring(k + 1, i + 1), ring(k, i + 1)], 1))
    tri = np.concatenate(faces)
    P = pts[tri]
    face_len = np.stack([np.linalg.norm(P[:, (j + 2) % 3] - P[:, (j + 1) % 3], axis=1) for j in range(3)], 1)
    loop = ring(nr, i)
    mesh = SurfaceMesh(len(pts), tri, boundary_loops=(loop,),
                       identification={"kind": "disk", "epsilon": epsilon, "points": pts})
    metric = metric_from_face_lengths(mesh, face_len)
    mesh.validate()
    return mesh, metric


def model_loop(mesh: SurfaceMesh, which: int = 0) -> BoundaryLoop:
    v = mesh.boundary_loops[which]
    eps = float(mesh.identification.get("epsilon", 0.0))
    return BoundaryLoop(vertices=v, center=np.zeros(2), epsilon=eps)


__all__ = [
    "build_standard", "build_cylinder", "build_cross_cap", "build_disk", "lattice_basis",
    "EQUILATERAL_BASIS", "DiscreteMetric", "model_loop",
]
