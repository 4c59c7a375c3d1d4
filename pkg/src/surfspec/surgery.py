"""Attaching thin cross caps and handles, and the spectral checks built on top.

A surgery removes geodesic disks of radius epsilon from a base surface and
glues in a flat model piece: the Moebius cap S^1 x [0, 2h] / (theta, t) ~
(theta + pi, 2h - t) for a cross cap, the cylinder S^1 x [0, h] for a handle.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import optimize, stats

from . import analytic
from .config import ScanConfig, SolverConfig, SurgeryConfig
from .geometry import (BoundaryLoop, DiscreteMetric, GeometryError, SurfaceMesh, build_cross_cap, build_cylinder,
                       build_disk, build_standard, glue, lattice_basis, model_loop, mollify_metric, remove_disk,
                       stitch)
from .spectral import (Spectrum, assemble, boundary_tangential_energy, gradient_sq, harmonic_extension,
                       solve_spectrum)

log = logging.getLogger(__name__)

KINDS = ("cross_cap", "handle")


@dataclass(frozen=True)
class SurgerySpec:
    kind: str
    centers: tuple
    epsilon: float
    height: float
    n_angular: int = 32
    n_axial: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GeometryError(f"surgery kind must be one of {KINDS}, got {self.kind!r}")
        want = 1 if self.kind == "cross_cap" else 2
        if len(self.centers) != want:
            raise GeometryError(f"{self.kind} needs exactly {want} center(s)")
        if want == 2 and np.allclose(self.centers[0], self.centers[1]):
            raise GeometryError("handle centers must be distinct")
        if not (self.epsilon > 0 and self.height > 0):
            raise GeometryError("epsilon and height must be positive")
        if self.kind == "cross_cap" and self.n_angular % 2:
            raise GeometryError("cross cap needs an even angular resolution")

    def with_height(self, h: float) -> "SurgerySpec":
        return SurgerySpec(self.kind, self.centers, self.epsilon, float(h), self.n_angular, self.n_axial)


@dataclass(frozen=True, eq=False)
class BaseSurface:
    """A closed reference surface with known lambda_1 and default surgery sites."""

    name: str
    mesh: SurfaceMesh
    metric: DiscreteMetric
    centers: dict
    exact_lambda1: float | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)

    @cached_property
    def spectrum(self) -> Spectrum:
        return solve_spectrum(assemble(self.mesh, self.metric, mass=self.solver.mass), max(self.solver.k, 8),
                              seed=self.solver.seed, cluster_tol=self.solver.cluster_tol)

    @property
    def area(self) -> float:
        return self.metric.area(self.mesh)

    @property
    def lambda1(self) -> float:
        return float(self.spectrum.eigenvalues[1])

    @property
    def multiplicity1(self) -> int:
        return self.spectrum.multiplicity(1)

    @property
    def fem_error(self) -> float | None:
        """Relative discretization error of lambda_1, when the exact value is known."""
        if self.exact_lambda1 is None:
            return None
        return abs(self.lambda1 - self.exact_lambda1) / self.exact_lambda1


def standard_base(name: str, resolution: int, solver: SolverConfig | None = None,
                  handle_separation: float | None = None, n_angular: int = 32) -> BaseSurface:
    """``equilateral_torus`` (unit area), ``square_torus`` (side 2 pi) or ``round_sphere``.

    On tori the cross cap sits at the cell center and the handle feet lie
    on either side of it along the first lattice vector; the sphere uses the
    north pole, and the two poles for a handle.
    """
    solver = solver or SolverConfig()
    if name in ("equilateral_torus", "square_torus"):
        B = lattice_basis("equilateral", 1.0) if name == "equilateral_torus" else 2 * np.pi * np.eye(2)
        mesh, metric = build_standard("flat_torus", resolution, basis=B)
        c = 0.5 * (B[0] + B[1])
        e1 = B[0] / np.linalg.norm(B[0])
        if handle_separation is None:
            # feet just far enough apart for two graded polar patches
            spacing = np.linalg.norm(B[0]) / resolution
            r_patch = n_angular * spacing / (2 * np.pi)
            handle_separation = max(0.25 * np.linalg.norm(B[0]), 2.5 * r_patch + spacing)
        d = 0.5 * handle_separation * e1
        centers = {"cross_cap": (tuple(c),), "handle": (tuple(c - d), tuple(c + d))}
        return BaseSurface(name, mesh, metric, centers, analytic.torus_lambda1_area(B) / abs(np.linalg.det(B)),
                           solver)
    if name == "round_sphere":
        mesh, metric = build_standard("round_sphere", resolution)
        centers = {"cross_cap": ((0.0, 0.0, 1.0),), "handle": ((0.0, 0.0, 1.0), (0.0, 0.0, -1.0))}
        return BaseSurface(name, mesh, metric, centers, 2.0, solver)
    raise GeometryError(f"unknown base surface {name!r}")


@dataclass(frozen=True, eq=False)
class Surgered:
    """Result of one surgery with the pieces kept for the checks."""

    mesh: SurfaceMesh
    metric: DiscreteMetric
    spec: SurgerySpec
    model_part: int
    removed_mesh: SurfaceMesh
    removed_metric: DiscreteMetric
    loops: tuple
    model_mesh: SurfaceMesh
    model_metric: DiscreteMetric
    glue_epsilon: float

    @property
    def area(self) -> float:
        return self.metric.area(self.mesh)

    @property
    def model_faces(self) -> np.ndarray:
        return np.flatnonzero(self.mesh.face_part == self.model_part)


def cut(base: BaseSurface, spec: SurgerySpec, delta: float = 0.0):
    """Sigma minus the disks of ``spec``, optionally with the metric mollified near each circle."""
    mesh, metric = base.mesh, base.metric
    for c in spec.centers:
        mesh, metric, _ = remove_disk(mesh, metric, c, spec.epsilon, spec.n_angular)
    loops = tuple(mesh.holes)
    if delta > 0:
        for loop in loops:
            metric = mollify_metric(mesh, metric, loop, delta)
    return mesh, metric, loops


def axial_rows(spec: SurgerySpec, glue_eps: float, cfg: SurgeryConfig) -> int:
    if spec.n_axial is not None:
        return int(spec.n_axial)
    arc = 2 * np.pi * glue_eps / spec.n_angular
    length = spec.height
    return int(np.clip(np.ceil(length / arc), cfg.n_axial_min, cfg.n_axial_max))


def attach(base: BaseSurface, spec: SurgerySpec, cfg: SurgeryConfig | None = None, removed=None) -> Surgered:
    """Glue the model piece of ``spec`` into ``base``.

    ``removed`` may carry a precomputed ``cut`` result to reuse across heights.
    """
    cfg = cfg or SurgeryConfig()
    rmesh, rmetric, loops = removed if removed is not None else cut(base, spec, cfg.mollify_delta)
    perims = [l.perimeter(rmesh, rmetric) for l in loops]
    glue_eps = float(np.mean(perims) / (2 * np.pi))
    nt = axial_rows(spec, glue_eps, cfg)
    if spec.kind == "cross_cap":
        mm, mg = build_cross_cap(glue_eps, spec.height, (spec.n_angular, nt))
        mesh, metric, part = glue(rmesh, rmetric, loops[0], mm, mg, model_loop(mm, 0))
    else:
        mm, mg = build_cylinder(glue_eps, spec.height, (spec.n_angular, nt))
        mesh, metric, part = glue(rmesh, rmetric, loops[0], mm, mg, model_loop(mm, 0))
        far = mm.boundary_loops[1] + (rmesh.n_vertices - spec.n_angular)
        second = rmesh.holes[1].vertices
        attempt = None
        for reverse in (False, True):
            m2, g2 = stitch(mesh, metric, second, far, reverse=reverse)
            if m2.is_orientable == base.mesh.is_orientable:
                attempt = (m2, g2)
                break
        if attempt is None:
            raise GeometryError("no handle alignment keeps the orientability of the base")
        mesh, metric = attempt
    if not mesh.is_closed:
        raise GeometryError("surgery did not produce a closed surface")
    return Surgered(mesh, metric, spec, part, rmesh, rmetric, loops, mm, mg, glue_eps)


def surgered_spectrum(s: Surgered, solver: SolverConfig) -> Spectrum:
    return solve_spectrum(assemble(s.mesh, s.metric, mass=solver.mass), solver.k, seed=solver.seed,
                          cluster_tol=solver.cluster_tol)


def model_fraction(s: Surgered, U) -> np.ndarray:
    """Share of each vector's lumped mass norm that lives on the model piece."""
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    areas = s.metric.face_areas(s.mesh)
    t = s.mesh.triangles
    per_face = (areas / 3.0)[:, None] * (U[t] ** 2).sum(axis=1)
    on = s.mesh.face_part == s.model_part
    return per_face[on].sum(axis=0) / per_face.sum(axis=0)


def model_energy_fraction(s: Surgered, U) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    on = s.mesh.face_part == s.model_part
    out = []
    for j in range(U.shape[1]):
        dens, areas = gradient_sq(s.mesh, s.metric, U[:, j])
        e = dens * areas
        out.append(e[on].sum() / e.sum())
    return np.array(out)


# ---------------------------------------------------------------- height scan

@dataclass
class ScanPoint:
    h: float
    eigenvalues: np.ndarray
    fractions: np.ndarray
    gap: float
    branch_gap: float
    branch: tuple

    @property
    def fraction(self) -> float:
        return float(self.fractions[self.branch[0]])


@dataclass
class HeightScanResult:
    kind: str
    epsilon: float
    bracket: tuple
    bracket_values: tuple
    lambda1_base: float
    h_star: float
    h_epsilon: float
    gap: float
    branch_gap: float
    multiplicity: int
    status: str
    branch_low: str
    branch_high: str
    branch_at_h0: str
    fraction_at_h0: float
    points: list
    glue_convention: str = "matched polygon perimeter"


def interval_value(kind: str, h: float) -> float:
    """Lowest Dirichlet eigenvalue of the model piece, the branch that crosses lambda_1."""
    return analytic.model_mode_values("cross_cap" if kind == "cross_cap" else "cylinder", 1.0, h).dirichlet


def crossing_height(kind: str, lam1: float) -> float:
    return float(np.pi / (2 * np.sqrt(lam1)) if kind == "cross_cap" else np.pi / np.sqrt(lam1))


def check_bracket(kind: str, lam1: float, h0: float, h1: float):
    v0, v1 = interval_value(kind, h0), interval_value(kind, h1)
    if not (v0 > lam1 > v1):
        raise GeometryError(
            f"heights [{h0}, {h1}] do not bracket the crossing: model values {v0:.6g}, {v1:.6g} vs lambda_1 {lam1:.6g}")
    return v0, v1


def _branch(frac: float, threshold: float) -> str:
    return "interval" if frac >= threshold else "surface"


def branch_pair(eigenvalues, fractions, active_tol: float = 1e-3):
    """Indices of the two lowest nonzero eigenpairs that see the model piece.

    Eigenfunctions vanishing at the surgery site are spectators: they keep
    their eigenvalue and cannot take part in the crossing. Falls back to
    (1, 2) when fewer than two pairs are active.
    """
    idx = [j for j in range(1, len(eigenvalues)) if fractions[j] >= active_tol]
    if len(idx) < 2:
        return 1, 2
    return idx[0], idx[1]


def height_scan(base: BaseSurface, kind: str, epsilon: float, h_range=None, scan: ScanConfig | None = None,
                solver: SolverConfig | None = None, surgery: SurgeryConfig | None = None) -> HeightScanResult:
    """Locate the height where the model branch meets lambda_1 of the base.

    At every height the two lowest eigenpairs with weight on the model piece
    form the branch pair; their distance, scaled by lambda_1 of the base, is minimized,
    first on a grid and then by a bounded scalar search around the best grid
    point. The plain gap (lambda_2 - lambda_1) / lambda_1 at the located height
    decides the CROSSED / NOT_CROSSED status.
    """
    scan = scan or ScanConfig()
    solver = solver or SolverConfig()
    surgery = surgery or SurgeryConfig()
    lam1 = base.lambda1
    h_star = crossing_height(kind, lam1)
    if h_range is None:
        h_range = (0.7 * h_star, 1.3 * h_star)
    h0, h1 = map(float, h_range)
    values = check_bracket(kind, lam1, h0, h1)
    spec0 = SurgerySpec(kind, base.centers[kind], epsilon, h0, surgery.n_angular)
    removed = cut(base, spec0, surgery.mollify_delta)
    cache = {}

    def evaluate(h):
        h = float(h)
        if h not in cache:
            s = attach(base, spec0.with_height(h), surgery, removed)
            sp = surgered_spectrum(s, solver)
            lam = sp.eigenvalues
            fr = model_fraction(s, sp.eigenvectors)
            a, b = branch_pair(lam, fr)
            cache[h] = ScanPoint(h, lam, fr, float((lam[2] - lam[1]) / lam[1]), float((lam[b] - lam[a]) / lam1),
                                 (a, b))
        return cache[h]

    grid = np.linspace(h0, h1, scan.grid_size)
    pts = [evaluate(h) for h in grid]
    bgaps = np.array([p.branch_gap for p in pts])
    i = int(np.argmin(bgaps))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(lambda h: evaluate(h).branch_gap, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-4 * (h1 - h0), "maxiter": scan.bisect_steps * 2})
    best = min((evaluate(res.x), pts[i]), key=lambda p: p.branch_gap)
    status = "CROSSED" if best.gap < scan.gap_tol else "NOT_CROSSED"
    a, b = best.branch
    mult = int(np.sum(np.abs(best.eigenvalues[1:] - best.eigenvalues[1]) <= solver.cluster_tol * best.eigenvalues[1]))
    p0 = pts[0]
    lowest0 = branch_pair(p0.eigenvalues, p0.fractions)[0]
    all_pts = sorted(cache.values(), key=lambda p: p.h)
    return HeightScanResult(kind, float(epsilon), (h0, h1), values, lam1, h_star, best.h, best.gap, best.branch_gap,
                            mult, status, _branch(best.fractions[a], scan.fraction_threshold),
                            _branch(best.fractions[b], scan.fraction_threshold),
                            _branch(p0.fractions[lowest0], scan.fraction_threshold), float(p0.fractions[lowest0]),
                            all_pts)


# ---------------------------------------------------------------- sandwich

@dataclass
class ChainReport:
    epsilon: float
    h: float
    mu1_removed: float
    lambda1_surgered: float
    lambda0_model_fem: float
    lambda0_model_exact: float
    tau: float
    lower_holds: bool
    upper_holds: bool

    @property
    def holds(self) -> bool:
        return self.lower_holds and self.upper_holds


def neumann_first(mesh, metric, solver: SolverConfig, count: int = 1) -> Spectrum:
    return solve_spectrum(assemble(mesh, metric, "neumann", mass=solver.mass), max(solver.k, count + 2),
                          seed=solver.seed, cluster_tol=solver.cluster_tol)


def model_dirichlet(s: Surgered, solver: SolverConfig) -> float:
    sp = solve_spectrum(assemble(s.model_mesh, s.model_metric, "dirichlet", mass=solver.mass), 2,
                        seed=solver.seed)
    return float(sp.eigenvalues[0])


def verify_chain(base: BaseSurface, kind: str, epsilon: float, h: float, tau: float | None = None,
                 solver: SolverConfig | None = None, surgery: SurgeryConfig | None = None) -> ChainReport:
    """mu_1(Sigma - B) <= lambda_1(Sigma_{eps,h}) <= lambda_0(model), each up to (1 + tau).

    ``tau`` defaults to the measured relative error of lambda_1 of the base at
    the same resolution.
    """
    solver = solver or SolverConfig()
    surgery = surgery or SurgeryConfig()
    if tau is None:
        tau = base.fem_error if base.fem_error is not None else 1e-2
    spec = SurgerySpec(kind, base.centers[kind], epsilon, h, surgery.n_angular)
    s = attach(base, spec, surgery)
    lam1 = float(surgered_spectrum(s, solver).eigenvalues[1])
    mu1 = float(neumann_first(s.removed_mesh, s.removed_metric, solver).eigenvalues[1])
    lam0 = model_dirichlet(s, solver)
    exact = interval_value(kind, h)
    return ChainReport(float(epsilon), float(h), mu1, lam1, lam0, exact, float(tau),
                       bool(mu1 <= lam1 * (1 + tau)), bool(lam1 <= lam0 * (1 + tau)))


# ---------------------------------------------------------------- convergence

@dataclass
class SweepResult:
    kind: str
    grid: list
    eigenvalues: dict
    limit: dict
    deviations: dict
    relative: dict
    monotone: dict
    failures: dict
    k_max: int
    base_spectrum: np.ndarray

    def max_relative(self, eps: float, h: float) -> float:
        return float(np.max(self.relative[(eps, h)]))


def convergence_sweep(base: BaseSurface, kind: str, h_list, eps_list, k_max: int = 4,
                      solver: SolverConfig | None = None, surgery: SurgeryConfig | None = None,
                      jobs: int = 1) -> SweepResult:
    """Tabulate |lambda_k(Sigma_{eps,h}) - nu_k^h| against the limit spectrum.

    The base part of nu is the FEM spectrum of the unperturbed surface at the
    same resolution, so discretization error of the base does not enter the
    deviations. Relative deviations divide by max(nu_k, nu_1).
    """
    solver = solver or SolverConfig()
    surgery = surgery or SurgeryConfig()
    eps_list = sorted(map(float, eps_list), reverse=True)
    h_list = list(map(float, h_list))
    base_vals = base.spectrum.eigenvalues
    grid = [(e, h) for e in eps_list for h in h_list]
    k = max(solver.k, k_max + 3)
    solver_k = SolverConfig(k, solver.seed, solver.cluster_tol, solver.mass, solver.tol)

    def work(point):
        e, h = point
        spec = SurgerySpec(kind, base.centers[kind], e, h, surgery.n_angular)
        s = attach(base, spec, surgery)
        return surgered_spectrum(s, solver_k).eigenvalues

    results = _map(work, grid, jobs)
    eig, lim, dev, rel, fail = {}, {}, {}, {}, {}
    for point, out in zip(grid, results):
        e, h = point
        if isinstance(out, Exception):
            fail[point] = repr(out)
            continue
        nu = _limit(kind, base_vals, h, k_max + 1)
        eig[point] = out
        lim[point] = nu
        d = np.abs(out[:k_max + 1] - nu)
        dev[point] = d
        rel[point] = d / np.maximum(nu, nu[1])
    mono = {}
    for h in h_list:
        series = [np.max(rel[(e, h)]) for e in eps_list if (e, h) in rel]
        mono[h] = bool(len(series) == len(eps_list) and np.all(np.diff(series) <= 0))
    return SweepResult(kind, grid, eig, lim, dev, rel, mono, fail, k_max, base_vals)


def _limit(kind: str, base_vals, h: float, count: int) -> np.ndarray:
    if kind == "cross_cap":
        return analytic.merge_limit_spectrum(base_vals, h, count).merged
    # the cylinder contributes its Dirichlet spectrum (n pi / h)^2
    iv = (np.arange(1, count + 1) * np.pi / h) ** 2
    return np.sort(np.concatenate([base_vals, iv]), kind="stable")[:count]


def _map(fn, items, jobs: int):
    def safe(x):
        try:
            return fn(x)
        except (GeometryError, RuntimeError, ValueError) as err:
            log.warning("grid point %s failed: %s", x, err)
            return err

    if jobs <= 1:
        return [safe(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(safe, items))


# ---------------------------------------------------------------- scaling laws

@dataclass
class SlopeFit:
    slope: float
    stderr: float
    ci95: tuple
    n: int


def fit_slope(x, y) -> SlopeFit:
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(y, dtype=float))
    if len(x) < 3 or np.ptp(x) == 0 or not np.all(np.isfinite(y)):
        return SlopeFit(float("nan"), float("nan"), (float("nan"), float("nan")), len(x))
    r = stats.linregress(x, y)
    q = stats.t.ppf(0.975, len(x) - 2)
    return SlopeFit(float(r.slope), float(r.stderr), (float(r.slope - q * r.stderr), float(r.slope + q * r.stderr)),
                    len(x))


@dataclass
class ScalingResult:
    eps: list
    extension_energy: list
    tangential_energy: list
    ring_radius: list
    ring_gradient: list
    extension: SlopeFit
    tangential: SlopeFit
    gradient: SlopeFit
    cluster_size: int


def _first_cluster(base: BaseSurface, mesh, metric, solver: SolverConfig):
    m = base.multiplicity1
    sp = neumann_first(mesh, metric, solver, m + 1)
    return sp, sp.eigenvectors[:, 1:1 + m]


def scaling_laws(base: BaseSurface, eps_list, solver: SolverConfig | None = None,
                 surgery: SurgeryConfig | None = None) -> ScalingResult:
    """Log-log slopes against epsilon for Neumann eigenfunctions of Sigma minus B_eps.

    Quantities are summed over the first eigenvalue cluster, which makes them
    independent of the basis chosen inside a multiple eigenvalue:
    (a) energy of the harmonic extension into the flat disk of radius eps,
    (b) int |d_T u|^2 along the circle,
    (c) the largest |grad u| on each ring band r_k <= r <= r_{k+1}, fitted
    against r with all epsilons pooled.
    """
    solver = solver or SolverConfig()
    surgery = surgery or SurgeryConfig()
    if len(eps_list) < 4:
        raise ValueError("scaling fits need at least 4 epsilons")
    ea, eb, rr, gg = [], [], [], []
    m = base.multiplicity1
    for e in eps_list:
        spec = SurgerySpec("cross_cap", base.centers["cross_cap"], float(e), 1.0, surgery.n_angular)
        mesh, metric, loops = cut(base, spec)
        loop = loops[0]
        _, U = _first_cluster(base, mesh, metric, solver)
        glue_eps = loop.perimeter(mesh, metric) / (2 * np.pi)
        disk, dmetric = build_disk(glue_eps, (spec.n_angular, max(4, spec.n_angular // 4)))
        dloop = disk.boundary_loops[0]
        energy = 0.0
        for j in range(U.shape[1]):
            _, en = harmonic_extension(disk, dmetric, dloop, U[loop.vertices, j])
            energy += en
        ea.append(energy)
        eb.append(sum(boundary_tangential_energy(mesh, metric, U[:, j], loop) for j in range(m)))
        dens, _ = gradient_sq(mesh, metric, U)
        rad = np.full(mesh.n_vertices, np.nan)
        rad[loop.polar_vertices] = loop.polar_r
        for a, b in zip(loop.ring_radii[:-1], loop.ring_radii[1:]):
            ring_faces = np.all((rad[mesh.triangles] >= a * (1 - 1e-9)) & (rad[mesh.triangles] <= b * (1 + 1e-9)),
                                axis=1)
            if ring_faces.any():
                rr.append(float(np.sqrt(a * b)))
                gg.append(float(np.sqrt(dens[ring_faces].max())))
    return ScalingResult(list(map(float, eps_list)), ea, eb, rr, gg, fit_slope(eps_list, ea),
                         fit_slope(eps_list, eb), fit_slope(rr, gg), m)


# ---------------------------------------------------------------- certificates

@dataclass
class MonotonicityCertificate:
    kind: str
    base_value: float
    surgered_value: float
    epsilon: float
    h_epsilon: float
    margin: float
    chain: ChainReport
    area_gain: float
    area_gain_over_eps: float
    scan_status: str
    valid: bool
    glue_convention: str = "matched polygon perimeter"


def monotonicity_certificate(base: BaseSurface, kind: str, epsilon: float, h_range=None,
                             scan: ScanConfig | None = None, solver: SolverConfig | None = None,
                             surgery: SurgeryConfig | None = None, area_band=(0.1, 100.0)) -> MonotonicityCertificate:
    """Compare lambda_1 * area before and after surgery at the located height."""
    solver = solver or SolverConfig()
    surgery = surgery or SurgeryConfig()
    res = height_scan(base, kind, epsilon, h_range, scan, solver, surgery)
    h = res.h_epsilon
    spec = SurgerySpec(kind, base.centers[kind], epsilon, h, surgery.n_angular)
    s = attach(base, spec, surgery)
    lam = float(surgered_spectrum(s, solver).eigenvalues[1])
    base_value = base.lambda1 * base.area
    value = lam * s.area
    chain = verify_chain(base, kind, epsilon, h, solver=solver, surgery=surgery)
    gain = s.area - base.area
    c = gain / epsilon
    valid = bool(value > base_value and chain.holds and area_band[0] <= c <= area_band[1])
    return MonotonicityCertificate(kind, base_value, value, float(epsilon), h, value - base_value, chain, gain, c,
                                   res.status, valid)


def margin_at(base: BaseSurface, kind: str, epsilon: float, h: float, solver: SolverConfig | None = None,
              surgery: SurgeryConfig | None = None) -> float:
    solver = solver or SolverConfig()
    spec = SurgerySpec(kind, base.centers[kind], epsilon, h, (surgery or SurgeryConfig()).n_angular)
    s = attach(base, spec, surgery)
    return float(surgered_spectrum(s, solver).eigenvalues[1] * s.area - base.lambda1 * base.area)
