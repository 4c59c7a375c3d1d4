"""Symmetry reduction, harmonic extension and energies of vertex fields."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..geometry.mesh import DiscreteMetric, GeometryError, SurfaceMesh
from .operators import OperatorPair, SpectralError, corner_cotangents, stiffness_matrix
from .solve import DEFAULT_CLUSTER_TOL, Spectrum, restricted_spectrum


def orbit_projection(involution, parity: int = 1) -> sp.csr_matrix:
    """Columns spanning the even (parity=+1) or odd (-1) functions of a free involution."""
    inv = np.asarray(involution, dtype=np.int64)
    n = len(inv)
    if np.any(inv[inv] != np.arange(n)):
        raise SpectralError("map is not an involution")
    if np.any(inv == np.arange(n)):
        raise SpectralError("involution has fixed points")
    rep = np.flatnonzero(np.arange(n) < inv)
    cols = np.arange(len(rep))
    rows = np.concatenate([rep, inv[rep]])
    vals = np.concatenate([np.ones(len(rep)), np.full(len(rep), float(parity))])
    return sp.csr_matrix((vals, (rows, np.concatenate([cols, cols]))), shape=(n, len(rep)))


def check_isometry(ops: OperatorPair, involution, rtol: float = 1e-9) -> None:
    inv = np.asarray(involution)
    if ops.size != len(inv):
        raise SpectralError("involution must act on every unknown of the operator pair")
    for A, name in ((ops.stiffness, "stiffness"), (ops.mass, "mass")):
        B = A[inv][:, inv]
        diff = abs(B - A).max()
        if diff > rtol * abs(A).max():
            raise SpectralError(f"involution is not an isometry ({name} differs by {diff:.3g})")


def even_spectrum(cover_ops: OperatorPair, involution, k: int, seed: int = 0,
                  cluster_tol: float = DEFAULT_CLUSTER_TOL) -> Spectrum:
    """Spectrum on involution-invariant functions, solved on the reduced system."""
    check_isometry(cover_ops, involution)
    return restricted_spectrum(cover_ops, orbit_projection(involution, 1), k, "even", seed, cluster_tol)


def odd_spectrum(cover_ops: OperatorPair, involution, k: int, seed: int = 0,
                 cluster_tol: float = DEFAULT_CLUSTER_TOL) -> Spectrum:
    check_isometry(cover_ops, involution)
    return restricted_spectrum(cover_ops, orbit_projection(involution, -1), k, "odd", seed, cluster_tol)


def even_part(u, involution) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return 0.5 * (u + u[np.asarray(involution)])


def harmonic_extension(mesh: SurfaceMesh, metric: DiscreteMetric, boundary, boundary_values,
                       faces=None) -> tuple[np.ndarray, float]:
    """Discrete harmonic function on a region with prescribed boundary values.

    ``faces`` selects the region (default: the whole mesh); ``boundary`` is the
    vertex list carrying the data. Returns the field (NaN outside the region)
    and its Dirichlet energy.
    """
    tri = mesh.triangles if faces is None else mesh.triangles[np.asarray(faces)]
    sub = mesh if faces is None else SurfaceMesh(mesh.n_vertices, tri)
    if faces is not None:
        lengths = metric.lengths(mesh)[mesh.edge_index(sub.edges[:, 0], sub.edges[:, 1])]
        metric = DiscreteMetric(lengths)
    K = stiffness_matrix(sub, metric).tocsr()
    region = np.unique(tri)
    b = np.asarray(boundary, dtype=np.int64)
    g = np.asarray(boundary_values, dtype=float)
    if b.shape != g.shape:
        raise SpectralError("one boundary value per boundary vertex")
    if not np.all(np.isin(b, region)):
        raise GeometryError("boundary vertices are not in the region")
    interior = np.setdiff1d(region, b)
    u = np.full(mesh.n_vertices, np.nan)
    u[b] = g
    if interior.size:
        Kii = K[interior][:, interior].tocsc()
        rhs = -(K[interior][:, b] @ g)
        u[interior] = spla.spsolve(Kii, rhs)
    w = np.where(np.isnan(u), 0.0, u)
    return u, float(w @ (K @ w))


def boundary_tangential_energy(mesh: SurfaceMesh, metric: DiscreteMetric, u, loop) -> float:
    """Sum over loop segments of (du)^2 / length, the discrete int |d_T u|^2 ds."""
    v = np.asarray(getattr(loop, "vertices", loop), dtype=np.int64)
    if len(v) < 3 or len(np.unique(v)) != len(v):
        raise GeometryError("degenerate loop")
    seg = metric.lengths(mesh)[mesh.edge_index(v, np.roll(v, -1))]
    u = np.asarray(u, dtype=float)
    du = u[np.roll(v, -1)] - u[v]
    return float(np.sum(du * du / seg))


def dirichlet_energy(mesh: SurfaceMesh, metric: DiscreteMetric, u, faces=None) -> float:
    """int |grad u|^2 summed over the selected triangles."""
    dens, areas = gradient_sq(mesh, metric, u)
    sel = slice(None) if faces is None else np.asarray(faces)
    return float(np.sum(dens[sel] * areas[sel]))


def gradient_sq(mesh: SurfaceMesh, metric: DiscreteMetric, u):
    """Per-triangle |grad u|^2 of the piecewise-linear interpolant, and the areas.

    Uses int_T |grad u|^2 = 1/2 sum_k cot(theta_k) (u_i - u_j)^2 with (i, j)
    the edge opposite corner k. ``u`` may have trailing dimensions, which are
    summed (|grad Phi|^2 for vector fields).
    """
    cot, areas = corner_cotangents(mesh, metric)
    t = mesh.triangles
    U = np.asarray(u, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    total = np.zeros(len(t))
    for k in range(3):
        i, j = t[:, (k + 1) % 3], t[:, (k + 2) % 3]
        total += 0.5 * cot[:, k] * np.sum((U[i] - U[j]) ** 2, axis=1)
    return total / areas, areas
