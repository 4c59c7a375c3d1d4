"""Bottom of the generalized spectrum K u = lambda M u."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .operators import OperatorPair, SpectralError

log = logging.getLogger(__name__)

DEFAULT_CLUSTER_TOL = 1e-3


def cluster_ids(values, tol: float = DEFAULT_CLUSTER_TOL) -> np.ndarray:
    """Group ascending values whose neighbours agree to relative tolerance ``tol``."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return np.zeros(0, dtype=np.int64)
    floor = 1e-10 * max(np.abs(v).max(), 1e-300)
    gap = np.diff(v)
    scale = np.maximum(np.maximum(np.abs(v[1:]), np.abs(v[:-1])), floor)
    new = gap > tol * scale
    return np.concatenate([[0], np.cumsum(new)]).astype(np.int64)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues with M-orthonormal eigenvectors on the free vertices."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    bc: str
    cluster_tol: float = DEFAULT_CLUSTER_TOL
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ops: OperatorPair | None = None
    method: str = ""

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def clusters(self) -> np.ndarray:
        return cluster_ids(self.eigenvalues, self.cluster_tol)

    def multiplicity(self, index: int) -> int:
        c = self.clusters
        return int(np.sum(c == c[index]))

    def full_vectors(self) -> np.ndarray:
        if self.ops is None:
            return self.eigenvectors
        return self.ops.expand(self.eigenvectors)

    def normalized(self) -> np.ndarray:
        """lambda_k times area, the scale-invariant quantity."""
        if self.ops is None:
            raise SpectralError("spectrum carries no operator pair, area unknown")
        return self.eigenvalues * self.ops.area


def rayleigh(ops: OperatorPair, u) -> float:
    u = np.asarray(u, dtype=float)
    if u.shape[0] == ops.n_vertices and ops.size != ops.n_vertices:
        u = ops.restrict(u)
    den = float(u @ (ops.mass @ u))
    if not den > 0:
        raise SpectralError("vector has zero mass norm")
    return float(u @ (ops.stiffness @ u)) / den


def multiplicity(spec: Spectrum, value: float, tol: float | None = None) -> int:
    """Number of eigenvalues within relative ``tol`` of ``value``."""
    tol = spec.cluster_tol if tol is None else tol
    return int(np.sum(np.abs(spec.eigenvalues - value) <= tol * max(abs(value), 1e-300)))


def _default_shift(ops: OperatorPair) -> float:
    d = ops.stiffness.diagonal() / ops.mass.diagonal()
    return -1e-7 * float(np.median(np.abs(d)))


def _sign_fix(U: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(U) > (1 - 1e-8) * np.abs(U).max(axis=0), axis=0)
    s = np.sign(U[idx, np.arange(U.shape[1])])
    s[s == 0] = 1
    return U * s


def _rayleigh_ritz(K, M, U):
    Kr = U.T @ (K @ U)
    Mr = U.T @ (M @ U)
    Kr = 0.5 * (Kr + Kr.T)
    Mr = 0.5 * (Mr + Mr.T)
    w, Y = sla.eigh(Kr, Mr)
    return w, U @ Y


def _shift_invert(K, M, k, sigma, v0, tol):
    A = (K - sigma * M).tocsc()
    lu = spla.splu(A)
    op = spla.LinearOperator(A.shape, matvec=lu.solve, dtype=float)
    w, U = spla.eigsh(K, k=k, M=M, sigma=sigma, which="LM", OPinv=op, v0=v0, tol=tol)
    return w, U


def _lobpcg(K, M, k, sigma, rng, tol):
    n = K.shape[0]
    X = rng.standard_normal((n, k))
    try:
        import pyamg  # noqa: F401

        ml = pyamg.smoothed_aggregation_solver((K - sigma * M).tocsr())
        prec = ml.aspreconditioner()
    except Exception:
        prec = None
    w, U = spla.lobpcg(K, X, B=M, M=prec, largest=False, tol=max(tol, 1e-10), maxiter=2000)
    return w, U


def solve_spectrum(ops: OperatorPair, k: int, shift: float | None = None, seed: int = 0,
                   tol: float = 1e-12, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> Spectrum:
    """The k smallest eigenpairs by shift-invert Lanczos around ``shift``.

    The factorization is retried at a perturbed shift once; if that also fails
    LOBPCG takes over. The starting vector is drawn from ``seed``, and the
    final basis is re-orthonormalized by a Rayleigh-Ritz step with a fixed
    sign convention, so results are reproducible.
    """
    n = ops.size
    if k < 1:
        raise SpectralError("k must be positive")
    if k >= n:
        raise SpectralError(f"k={k} must be smaller than the problem size {n}")
    K, M = ops.stiffness, ops.mass
    sigma = _default_shift(ops) if shift is None else float(shift)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    method = "shift-invert"
    if n <= 400:
        w, U = sla.eigh(K.toarray(), M.toarray(), subset_by_index=[0, k - 1])
        method = "dense"
    else:
        try:
            w, U = _shift_invert(K, M, k, sigma, v0, tol)
        except (RuntimeError, spla.ArpackError, spla.ArpackNoConvergence) as err:
            log.warning("shift-invert failed at sigma=%g (%s); retrying", sigma, err)
            sigma2 = sigma - 1e-3 * max(abs(sigma), 1e-6)
            try:
                w, U = _shift_invert(K, M, k, sigma2, v0, tol)
            except (RuntimeError, spla.ArpackError, spla.ArpackNoConvergence) as err2:
                log.warning("retry failed (%s); falling back to LOBPCG", err2)
                method = "lobpcg"
                try:
                    w, U = _lobpcg(K, M, k, sigma, rng, tol)
                except Exception as err3:  # pragma: no cover - reported to the caller
                    raise SpectralError(f"eigensolver failed: {err3}") from err3
        w, U = _rayleigh_ritz(K, M, U)
    order = np.argsort(w, kind="stable")
    w, U = w[order], U[:, order]
    U = _sign_fix(U)
    MU = M @ U
    R = K @ U - MU * w
    res = np.linalg.norm(R, axis=0) / np.linalg.norm(MU, axis=0)
    return Spectrum(w, U, ops.bc, cluster_tol, res, ops, method)


def eigen_residuals(spec: Spectrum):
    """(max residual ||Ku - lambda Mu|| / ||Mu||, max deviation from M-orthonormality)."""
    K, M = spec.ops.stiffness, spec.ops.mass
    U = spec.eigenvectors
    G = U.T @ (M @ U)
    R = K @ U - (M @ U) * spec.eigenvalues
    res = np.linalg.norm(R, axis=0) / np.linalg.norm(M @ U, axis=0)
    return float(res.max()), float(np.abs(G - np.eye(len(G))).max())


def restricted_spectrum(ops: OperatorPair, P: sp.spmatrix, k: int, bc: str, seed: int = 0,
                        cluster_tol: float = DEFAULT_CLUSTER_TOL) -> Spectrum:
    """Spectrum of the Galerkin restriction P^T K P, P^T M P."""
    Kr = (P.T @ ops.stiffness @ P).tocsr()
    Mr = (P.T @ ops.mass @ P).tocsr()
    sub = OperatorPair(Kr, Mr, bc, np.arange(Kr.shape[0]), Kr.shape[0], ops.area)
    spec = solve_spectrum(sub, k, seed=seed, cluster_tol=cluster_tol)
    return spec
