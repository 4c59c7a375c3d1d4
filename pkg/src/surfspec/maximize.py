"""First-eigenvalue ascent inside a conformal class, and the harmonic map it produces.

The metric is e^{2 phi} times a reference metric. The Dirichlet energy is
conformally invariant in two dimensions, so the cotangent stiffness of the
reference metric is reused unchanged and only the lumped mass is reweighted:
M(phi) = diag(m_i e^{2 phi_i}). For a simple eigenvalue with M-normalized
eigenvector u the derivative is d lambda / d phi_i = -2 lambda w_i u_i^2 with
w_i = m_i e^{2 phi_i}.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .config import MaximizeConfig
from .geometry import DiscreteMetric, GeometryError, SurfaceMesh
from .reports import atomic_write
from .spectral import OperatorPair, SpectralError, gradient_sq, mass_matrix, solve_spectrum, stiffness_matrix

log = logging.getLogger(__name__)

CHECKPOINT_SCHEMA = "surfspec.maximizer"


@dataclass(eq=False)
class MaximizerState:
    mesh: SurfaceMesh
    reference: DiscreteMetric
    log_conformal_factor: np.ndarray
    value: float
    eigenvalue: float
    multiplicity: int
    eigenframe: np.ndarray
    stationarity: float
    iterations: int
    status: str
    history: list = field(default_factory=list)
    failed: bool = False
    message: str = ""

    @property
    def vertex_areas(self) -> np.ndarray:
        return _reference_mass(self.mesh, self.reference) * np.exp(2 * self.log_conformal_factor)

    @property
    def area(self) -> float:
        return float(self.vertex_areas.sum())

    @property
    def peak_ratio(self) -> float:
        """Largest pointwise conformal factor over its area-weighted mean; large values flag concentration."""
        f = np.exp(2 * self.log_conformal_factor)
        w = _reference_mass(self.mesh, self.reference)
        return float(f.max() / (np.sum(w * f) / w.sum()))


def _reference_mass(mesh, reference) -> np.ndarray:
    return mass_matrix(mesh, reference, "lumped").diagonal()


class _Problem:
    """Fixed stiffness and reference mass, reused across every ascent step."""

    def __init__(self, mesh: SurfaceMesh, reference: DiscreteMetric, k: int, seed: int, cluster_tol: float):
        if not mesh.is_closed:
            raise GeometryError("conformal maximization needs a closed surface")
        self.mesh = mesh
        self.reference = reference
        self.K = stiffness_matrix(mesh, reference).tocsr()
        self.m = _reference_mass(mesh, reference)
        self.k = min(k, mesh.n_vertices - 1)
        self.seed = seed
        self.cluster_tol = cluster_tol

    def solve(self, phi):
        w = self.m * np.exp(2 * phi)
        ops = OperatorPair(self.K, sp.diags(w).tocsr(), "closed", np.arange(len(w)), len(w), float(w.sum()))
        spec = solve_spectrum(ops, self.k, seed=self.seed, cluster_tol=self.cluster_tol)
        lam = spec.eigenvalues
        lam1 = lam[1]
        mult = int(np.sum(lam[1:] <= lam1 * (1 + self.cluster_tol)))
        return w, lam1, mult, spec.eigenvectors[:, 1:1 + mult]


def objective(mesh: SurfaceMesh, reference: DiscreteMetric, phi, k: int = 4, seed: int = 0) -> float:
    """lambda_1 times area for the conformal factor ``phi``."""
    pb = _Problem(mesh, reference, k, seed, 1e-3)
    w, lam1, _, _ = pb.solve(np.asarray(phi, dtype=float))
    return float(lam1 * w.sum())


def _project_simplex(v):
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1
    idx = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def _project_spectraplex(Q):
    s, V = np.linalg.eigh(0.5 * (Q + Q.T))
    return (V * _project_simplex(s)) @ V.T


def ascent_direction(U, w, area: float, iters: int = 500):
    """Min-norm element of the cluster's superdifferential, as a dimensionless density.

    Every density 1 - area * u_i^T Q u_i with Q positive semidefinite of unit
    trace is a supergradient of lambda_1 * area (up to the factor 2 lambda).
    The one of least w-weighted norm is the steepest feasible ascent
    direction; its norm is the stationarity measure. Solved by accelerated
    projected gradient over the spectraplex.
    """
    U = np.asarray(U, dtype=float)
    m = U.shape[1]
    Q = np.eye(m) / m

    def density(Q):
        return 1.0 - area * np.einsum("ia,ab,ib->i", U, Q, U)

    lip = 2 * area**2 * float(np.sum(w * np.sum(U * U, axis=1) ** 2)) + 1e-300
    Y, t = Q.copy(), 1.0
    for _ in range(iters if m > 1 else 0):
        d = density(Y)
        grad = -2 * area * np.einsum("i,ia,ib->ab", w * d, U, U)
        Qn = _project_spectraplex(Y - grad / lip)
        tn = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        Y = Qn + (t - 1) / tn * (Qn - Q)
        if np.abs(Qn - Q).max() < 1e-12:
            Q = Qn
            break
        Q, t = Qn, tn
    d = density(Q)
    return d, float(np.sqrt(np.sum(w * d * d) / np.sum(w))), Q


def maximize_in_class(mesh: SurfaceMesh, reference: DiscreteMetric, config: MaximizeConfig | None = None,
                      phi0=None) -> MaximizerState:
    """Ascend lambda_1 * area over conformal factors, area renormalized to 1.

    Steps move phi along the ascent density of the current first cluster and
    are accepted only if the objective strictly improves; rejected steps
    shrink the step size, accepted ones grow it. The loop ends at the
    iteration cap, the step floor, or when the stationarity measure drops
    below its tolerance. Zero iterations return the (area-normalized)
    starting metric.
    """
    cfg = config or MaximizeConfig()
    reference = reference.baked(mesh) if reference.log_conformal_factor is not None else reference
    pb = _Problem(mesh, reference, cfg.k, cfg.seed, cfg.cluster_tol)
    phi = np.zeros(mesh.n_vertices) if phi0 is None else np.array(phi0, dtype=float)
    if phi.shape != (mesh.n_vertices,):
        raise ValueError("phi0 needs one value per vertex")

    def normalize(phi):
        return phi - 0.5 * np.log(np.sum(pb.m * np.exp(2 * phi)))

    phi = normalize(phi)
    history = []
    try:
        w, lam, mult, U = pb.solve(phi)
    except SpectralError as err:
        return MaximizerState(mesh, reference, phi, float("nan"), float("nan"), 0, np.zeros((mesh.n_vertices, 0)),
                              float("nan"), 0, "failed", history, True, str(err))
    value = lam * w.sum()
    d, stat, _ = ascent_direction(U, w, w.sum())
    step = cfg.step0
    status = "max_iter"
    it = 0
    history.append(dict(iteration=0, value=float(value), step=0.0, stationarity=stat, multiplicity=mult,
                        accepted=True))
    if cfg.track_residuals:
        history[-1].update(_residuals(mesh, reference, phi, lam, U, w))
    failed, message = False, ""
    while it < cfg.max_iter:
        if stat < cfg.stationarity_tol:
            status = "stationary"
            break
        if step < cfg.step_floor:
            status = "step_floor"
            break
        it += 1
        trial = normalize(phi + step * d)
        try:
            w2, lam2, mult2, U2 = pb.solve(trial)
        except SpectralError as err:
            failed, message, status = True, str(err), "failed"
            break
        value2 = lam2 * w2.sum()
        accepted = bool(value2 > value)
        history.append(dict(iteration=it, value=float(value2 if accepted else value), step=float(step),
                            stationarity=stat, multiplicity=mult2 if accepted else mult, accepted=accepted))
        if accepted:
            phi, w, lam, mult, U, value = trial, w2, lam2, mult2, U2, value2
            d, stat, _ = ascent_direction(U, w, w.sum())
            history[-1]["stationarity"] = stat
            if cfg.track_residuals:
                history[-1].update(_residuals(mesh, reference, phi, lam, U, w))
            step *= cfg.growth
        else:
            step *= cfg.backtrack
    return MaximizerState(mesh, reference, phi, float(value), float(lam), int(mult), U, float(stat), it, status,
                          history, failed, message)


@dataclass
class HarmonicMap:
    values: np.ndarray
    coefficients: np.ndarray
    cluster_size: int
    sphericality_residual: float
    metric_residual: float


def extract_harmonic_map(state: MaximizerState) -> HarmonicMap:
    """Sphere-valued map from the first eigenframe and its two residuals.

    A symmetric Q is fitted by weighted least squares so that u^T Q u is as
    close to 1 as possible at every vertex; the map is U Q^{1/2} (negative
    parts of Q clipped). The metric residual compares |grad Phi|^2 / lambda_1,
    measured in the reference metric, with the conformal factor e^{2 phi} in
    relative L^2 over triangles.
    """
    U = np.asarray(state.eigenframe, dtype=float)
    if U.shape[1] == 0:
        raise ValueError("state carries no eigenframe")
    Phi, Q, spherical, metric_res = _fit_map(state.mesh, state.reference, state.log_conformal_factor,
                                             state.eigenvalue, U, state.vertex_areas)
    m = U.shape[1]
    return HarmonicMap(Phi, Q, m, spherical, metric_res)


def _fit_map(mesh, reference, phi, lam, U, w):
    m = U.shape[1]
    iu = np.triu_indices(m)
    scale = np.where(iu[0] == iu[1], 1.0, 2.0)
    A = U[:, iu[0]] * U[:, iu[1]] * scale
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], sw, rcond=None)
    Q = np.zeros((m, m))
    Q[iu] = coef
    Q = Q + np.triu(Q, 1).T
    s, V = np.linalg.eigh(Q)
    Phi = U @ ((V * np.sqrt(np.clip(s, 0, None))) @ V.T)
    spherical = float(np.abs(np.sum(Phi**2, axis=1) - 1).max())
    dens, areas = gradient_sq(mesh, reference, Phi)
    f = np.exp(2 * phi)[mesh.triangles].mean(axis=1)
    g = dens / lam
    metric_res = float(np.sqrt(np.sum(areas * (g - f) ** 2) / np.sum(areas * f * f)))
    return Phi, Q, spherical, metric_res


def _residuals(mesh, reference, phi, lam, U, w) -> dict:
    _, _, a, b = _fit_map(mesh, reference, phi, lam, U, w)
    return {"sphericality": a, "metric_residual": b}


def state_from_metric(mesh: SurfaceMesh, reference: DiscreteMetric, phi=None, k: int = 10, seed: int = 0,
                      cluster_tol: float = 2e-2) -> MaximizerState:
    """Evaluate a conformal factor without ascending (zero iterations)."""
    cfg = MaximizeConfig(max_iter=0, k=k, seed=seed, cluster_tol=cluster_tol)
    return maximize_in_class(mesh, reference, cfg, phi)


# ---------------------------------------------------------------- checkpoints

def save_checkpoint(state: MaximizerState, path, config: MaximizeConfig | None = None) -> None:
    """JSON document plus a little-endian float64 sidecar holding the eigenframe row-major."""
    path = Path(path)
    frame = path.with_suffix(".eigenframe.f64")
    atomic_write(frame, np.ascontiguousarray(state.eigenframe, dtype="<f8").tobytes())
    doc = {
        "schema": CHECKPOINT_SCHEMA,
        "version": 1,
        "log_conformal_factor": state.log_conformal_factor.tolist(),
        "value": state.value,
        "eigenvalue": state.eigenvalue,
        "multiplicity": state.multiplicity,
        "stationarity": state.stationarity,
        "iterations": state.iterations,
        "status": state.status,
        "failed": state.failed,
        "message": state.message,
        "history": state.history,
        "eigenframe": {"file": frame.name, "dtype": "<f8", "shape": list(state.eigenframe.shape)},
        "config": asdict(config) if config is not None else None,
    }
    atomic_write(path, json.dumps(doc, indent=1).encode())


def load_checkpoint(path, mesh: SurfaceMesh, reference: DiscreteMetric) -> MaximizerState:
    path = Path(path)
    doc = json.loads(path.read_text())
    if doc.get("schema") != CHECKPOINT_SCHEMA:
        raise ValueError(f"{path} is not a maximizer checkpoint")
    phi = np.asarray(doc["log_conformal_factor"], dtype=float)
    if phi.shape != (mesh.n_vertices,):
        raise ValueError("checkpoint does not match the mesh")
    info = doc["eigenframe"]
    U = np.fromfile(path.parent / info["file"], dtype=info["dtype"]).reshape(info["shape"])
    return MaximizerState(mesh, reference, phi, doc["value"], doc["eigenvalue"], doc["multiplicity"], U,
                          doc["stationarity"], doc["iterations"], doc["status"], doc["history"], doc["failed"],
                          doc["message"])


def trajectory_rows(state: MaximizerState):
    keys = ("iteration", "value", "step", "stationarity", "multiplicity", "accepted", "sphericality",
            "metric_residual")
    return keys, [tuple(h.get(k, "") for k in keys) for h in state.history]
