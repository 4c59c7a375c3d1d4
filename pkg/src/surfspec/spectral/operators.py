"""Cotangent stiffness and mass matrices from intrinsic edge lengths."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..geometry.mesh import DiscreteMetric, GeometryError, SurfaceMesh


class SpectralError(RuntimeError):
    """Raised when an operator cannot be built or a solve fails."""


@dataclass(frozen=True, eq=False)
class OperatorPair:
    """Stiffness and mass restricted to the free vertices.

    ``free`` lists the mesh vertices that carry unknowns; Dirichlet vertices
    are eliminated, everything else (closed and Neumann) keeps all vertices.
    """

    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    bc: str
    free: np.ndarray
    n_vertices: int
    area: float
    dirichlet_loops: tuple = ()

    @property
    def size(self) -> int:
        return self.stiffness.shape[0]

    def expand(self, u: np.ndarray) -> np.ndarray:
        """Lift free-vertex values to all mesh vertices (zero on Dirichlet vertices)."""
        u = np.asarray(u)
        out = np.zeros((self.n_vertices,) + u.shape[1:], dtype=u.dtype)
        out[self.free] = u
        return out

    def restrict(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u)[self.free]


def corner_cotangents(mesh: SurfaceMesh, metric: DiscreteMetric):
    """Cotangent of every corner angle and triangle areas, both from lengths only."""
    L = metric.face_lengths(mesh)
    areas = metric.face_areas(mesh)
    if np.any(areas <= 0):
        raise GeometryError("degenerate triangle with zero area")
    L2 = L * L
    cot = np.empty_like(L)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        cot[:, i] = (L2[:, j] + L2[:, k] - L2[:, i]) / (4.0 * areas)
    return cot, areas


def cotan_weights(mesh: SurfaceMesh, metric: DiscreteMetric) -> np.ndarray:
    """Edge weights w_ij = (cot a + cot b) / 2, aligned with ``mesh.edges``."""
    cot, _ = corner_cotangents(mesh, metric)
    return np.bincount(mesh.face_edges.ravel(), weights=0.5 * cot.ravel(), minlength=mesh.n_edges)


def stiffness_matrix(mesh: SurfaceMesh, metric: DiscreteMetric) -> sp.csr_matrix:
    w = cotan_weights(mesh, metric)
    e = mesh.edges
    n = mesh.n_vertices
    rows = np.concatenate([e[:, 0], e[:, 1], e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0], e[:, 0], e[:, 1]])
    vals = np.concatenate([-w, -w, w, w])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def mass_matrix(mesh: SurfaceMesh, metric: DiscreteMetric, kind: str = "lumped") -> sp.csr_matrix:
    areas = metric.face_areas(mesh)
    n = mesh.n_vertices
    t = mesh.triangles
    if kind == "lumped":
        m = np.bincount(t.ravel(), weights=np.repeat(areas / 3.0, 3), minlength=n)
        return sp.diags(m).tocsr()
    if kind == "consistent":
        rows = np.repeat(t, 3, axis=1).ravel()
        cols = np.tile(t, (1, 3)).ravel()
        local = np.array([2, 1, 1, 1, 2, 1, 1, 1, 2], dtype=float) / 12.0
        vals = (areas[:, None] * local[None, :]).ravel()
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    raise SpectralError(f"unknown mass matrix kind {kind!r}")


def _parse_bc(mesh: SurfaceMesh, bc):
    if isinstance(bc, str):
        name, loops = bc, None
    else:
        name, loops = bc[0], bc[1]
    if name not in ("closed", "neumann", "dirichlet"):
        raise SpectralError(f"unknown boundary condition {name!r}")
    if name == "closed" and not mesh.is_closed:
        raise SpectralError("closed boundary condition on a mesh with boundary; use neumann or dirichlet")
    if loops is None:
        loops = tuple(range(len(mesh.boundary_loops))) if name != "closed" else ()
    loops = tuple(int(i) for i in loops)
    for i in loops:
        if not 0 <= i < len(mesh.boundary_loops):
            raise SpectralError(f"boundary loop {i} does not exist")
    return name, loops


def assemble(mesh: SurfaceMesh, metric: DiscreteMetric, bc="closed", mass: str = "lumped") -> OperatorPair:
    """Discrete Laplace operator pair.

    ``bc`` is ``"closed"``, ``"neumann"`` or ``"dirichlet"``, optionally as a
    tuple ``(name, loop_indices)``. Neumann is the natural condition and
    needs no modification; Dirichlet vertices are eliminated.
    """
    name, loops = _parse_bc(mesh, bc)
    K = stiffness_matrix(mesh, metric)
    M = mass_matrix(mesh, metric, mass)
    free = np.arange(mesh.n_vertices)
    used = np.zeros(mesh.n_vertices, dtype=bool)
    used[mesh.triangles.ravel()] = True
    if name == "dirichlet":
        fixed = np.zeros(mesh.n_vertices, dtype=bool)
        for i in loops:
            fixed[mesh.boundary_loops[i]] = True
        used &= ~fixed
    free = free[used]
    K = K[free][:, free].tocsr()
    M = M[free][:, free].tocsr()
    K.sort_indices()
    M.sort_indices()
    return OperatorPair(K, M, name, free, mesh.n_vertices, metric.area(mesh),
                        loops if name == "dirichlet" else ())
