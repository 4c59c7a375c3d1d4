"""The acceptance suite: every quantitative check at its stated tolerance.

Each check returns a :class:`CheckResult`; ``run_suite`` collects them into a
manifest keyed by check name. Expensive shared objects (base surfaces, the
crossing scan) are cached so the suite builds each of them once.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import analytic
from .config import ScanConfig, SolverConfig, SurgeryConfig
from .geometry import build_cross_cap, build_cylinder, build_standard, lattice_basis, orientation_double_cover
from .spectral import assemble, even_spectrum, odd_spectrum, solve_spectrum, spectrum_csv
from .surgery import (SurgerySpec, attach, convergence_sweep, fit_slope, height_scan, monotonicity_certificate,
                      scaling_laws, standard_base, surgered_spectrum, verify_chain)


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    values: dict = field(default_factory=dict)
    parts: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        bits = [f"{k}={'pass' if v else 'FAIL'}" for k, v in self.parts.items()]
        return f"[{status}] criterion {self.key}: {self.title}" + (f" ({', '.join(bits)})" if bits else "")

    def to_dict(self) -> dict:
        return {"passed": self.passed, "title": self.title, "parts": self.parts, "values": _plain(self.values),
                "seconds": round(self.seconds, 3)}


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


def _rel(a, b) -> float:
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------- shared objects

EPS_CONVERGENCE = (0.08, 0.04, 0.02)
H_CONVERGENCE = (0.15, 0.3, 0.45)
CONVERGENCE_RES = 60
TORUS_RES = 30
SPHERE_FREQ = 32
SPHERE_SURGERY_FREQ = 16
SCAN_EPS = 0.01
CERT_EPS = (0.04, 0.02, 0.01)
SCALING_EPS = (0.08, 0.04, 0.02, 0.01)


@lru_cache(maxsize=None)
def base_surface(name: str, res: int):
    return standard_base(name, res)


@lru_cache(maxsize=None)
def torus_crossing_scan():
    return height_scan(base_surface("equilateral_torus", TORUS_RES), "cross_cap", SCAN_EPS)


@lru_cache(maxsize=None)
def certificates(name: str, res: int, kind: str):
    base = base_surface(name, res)
    return tuple(monotonicity_certificate(base, kind, e) for e in CERT_EPS)


# ---------------------------------------------------------------- checks

def check_known_values() -> CheckResult:
    t0 = time.perf_counter()
    m, g = build_standard("round_sphere", SPHERE_FREQ)
    sp = solve_spectrum(assemble(m, g), 5)
    sphere = sp.eigenvalues[1] * g.area(m)
    t_sphere = time.perf_counter() - t0

    m2, g2 = build_standard("projective_plane", SPHERE_FREQ)
    cover = orientation_double_cover(m2, g2)
    rp2 = even_spectrum(assemble(cover.mesh, cover.metric), cover.involution, 6).eigenvalues[1] * g2.area(m2)

    t1 = time.perf_counter()
    m3, g3 = build_standard("flat_torus", TORUS_RES, basis="equilateral", area=1.0)
    torus = solve_spectrum(assemble(m3, g3), 8).eigenvalues[1] * g3.area(m3)
    t_torus = time.perf_counter() - t1
    lattice = analytic.torus_lambda1_area(lattice_basis("equilateral", 1.0))

    c = analytic.known_constants()
    parts = {
        "sphere_1pct": _rel(sphere, c["sphere"]["value"]) < 1e-2 and t_sphere < 30 and m.n_vertices >= 10000,
        "rp2_1pct": _rel(rp2, c["projective_plane"]["value"]) < 1e-2,
        "torus_0.5pct": _rel(torus, c["torus"]["value"]) < 5e-3 and t_torus < 5,
        "torus_lattice_formula": _rel(lattice, c["torus"]["value"]) < 1e-12,
    }
    vals = dict(sphere=sphere, sphere_vertices=m.n_vertices, sphere_seconds=t_sphere, rp2=rp2, torus=torus,
                torus_seconds=t_torus, lattice=lattice, targets={k: v["value"] for k, v in c.items()})
    return CheckResult("1", "known maximizer values", all(parts.values()), vals, parts, time.perf_counter() - t0)


def check_model_modes(eps: float = 0.05, h: float = 1.0, resolution=(32, 32)) -> CheckResult:
    t0 = time.perf_counter()
    mm, mg = build_cross_cap(eps, h, resolution)
    cm, cg = build_cylinder(eps, h, resolution)
    cap = solve_spectrum(assemble(mm, mg, "dirichlet"), 2).eigenvalues[0]
    cyl = solve_spectrum(assemble(cm, cg, "dirichlet"), 2).eigenvalues[0]
    exact_cap = analytic.model_mode_values("cross_cap", eps, h).dirichlet
    exact_cyl = analytic.model_mode_values("cylinder", eps, h).dirichlet
    parts = {"cross_cap_1pct": _rel(cap, exact_cap) < 1e-2, "cylinder_1pct": _rel(cyl, exact_cyl) < 1e-2}
    vals = dict(cross_cap=cap, cross_cap_exact=exact_cap, cylinder=cyl, cylinder_exact=exact_cyl)
    return CheckResult("2", "model modes", all(parts.values()), vals, parts, time.perf_counter() - t0)


def check_convergence(jobs: int = 1) -> CheckResult:
    t0 = time.perf_counter()
    base = base_surface("square_torus", CONVERGENCE_RES)
    parts, vals = {}, {}
    for kind in ("handle", "cross_cap"):
        sw = convergence_sweep(base, kind, H_CONVERGENCE, EPS_CONVERGENCE, k_max=4, jobs=jobs)
        table = {f"h={h}": [sw.max_relative(e, h) if (e, h) in sw.relative else float("nan")
                            for e in EPS_CONVERGENCE] for h in H_CONVERGENCE}
        vals[kind] = table
        parts[f"{kind}_monotone"] = all(sw.monotone.values()) and not sw.failures
        parts[f"{kind}_below_5pct"] = all(row[-1] < 0.05 for row in table.values())
    seconds = time.perf_counter() - t0
    parts["runtime_10min"] = seconds < 600
    vals["eps"] = EPS_CONVERGENCE
    vals["base"] = f"square flat torus, side 2 pi, resolution {CONVERGENCE_RES}"
    return CheckResult("3", "limit-spectrum convergence", all(parts.values()), vals, parts, seconds)


def check_crossing() -> CheckResult:
    t0 = time.perf_counter()
    res = torus_crossing_scan()
    target = analytic.crossing_height(analytic.known_constants()["torus"]["value"])
    parts = {"h_within_10pct": _rel(res.h_epsilon, target) < 0.1, "gap_below_5e-3": res.gap < 5e-3}
    vals = dict(h_epsilon=res.h_epsilon, h_target=target, h_star_fem=res.h_star, gap=res.gap,
                branch_gap=res.branch_gap, status=res.status, multiplicity=res.multiplicity,
                bracket=res.bracket, branch_at_h0=res.branch_at_h0, fraction_at_h0=res.fraction_at_h0)
    return CheckResult("4", "multiplicity-two crossing", all(parts.values()), vals, parts, time.perf_counter() - t0)


def _chain_dict(c):
    return dict(epsilon=c.epsilon, h=c.h, mu1_removed=c.mu1_removed, lambda1=c.lambda1_surgered,
                lambda0_model=c.lambda0_model_fem, lambda0_exact=c.lambda0_model_exact, tau=c.tau,
                lower=c.lower_holds, upper=c.upper_holds)


def check_sandwich() -> CheckResult:
    t0 = time.perf_counter()
    scan = torus_crossing_scan()
    torus = verify_chain(base_surface("equilateral_torus", TORUS_RES), "cross_cap", SCAN_EPS, scan.h_epsilon)
    sphere = certificates("round_sphere", SPHERE_SURGERY_FREQ, "handle")[CERT_EPS.index(0.02)].chain
    parts = {"torus_cross_cap": torus.holds, "sphere_handle": sphere.holds}
    vals = {"torus_cross_cap": _chain_dict(torus), "sphere_handle": _chain_dict(sphere)}
    return CheckResult("5", "eigenvalue sandwich", all(parts.values()), vals, parts, time.perf_counter() - t0)


def check_scaling() -> CheckResult:
    t0 = time.perf_counter()
    r = scaling_laws(base_surface("equilateral_torus", TORUS_RES), SCALING_EPS)
    parts = {
        "extension_slope_2": abs(r.extension.slope - 2.0) <= 0.3,
        "tangential_slope_1": abs(r.tangential.slope - 1.0) <= 0.25,
        "gradient_slope_-1": abs(r.gradient.slope + 1.0) <= 0.25,
    }
    vals = dict(eps=SCALING_EPS, extension_energy=r.extension_energy, tangential_energy=r.tangential_energy,
                extension_slope=r.extension.slope, extension_ci95=r.extension.ci95,
                tangential_slope=r.tangential.slope, tangential_ci95=r.tangential.ci95,
                gradient_slope=r.gradient.slope, gradient_ci95=r.gradient.ci95, cluster_size=r.cluster_size)
    return CheckResult("6", "scaling laws", all(parts.values()), vals, parts, time.perf_counter() - t0)


def _cert_part(certs):
    margins = np.array([c.margin for c in certs])
    at = certs[CERT_EPS.index(0.02)]
    slope = fit_slope(CERT_EPS, margins).slope if np.all(margins > 0) else float("nan")
    info = dict(margins=margins, h_epsilon=[c.h_epsilon for c in certs], base_value=at.base_value,
                surgered_value=[c.surgered_value for c in certs], valid=[c.valid for c in certs],
                area_gain_over_eps=[c.area_gain_over_eps for c in certs], scan_status=[c.scan_status for c in certs],
                slope=slope, abs_margin_slope=fit_slope(CERT_EPS, np.abs(margins)).slope)
    return at.margin > 0, bool(np.isfinite(slope) and abs(slope - 1.0) <= 0.4), info


def check_monotonicity() -> CheckResult:
    t0 = time.perf_counter()
    parts, vals = {}, {}
    for label, (name, res, kind) in {"sphere_handle": ("round_sphere", SPHERE_SURGERY_FREQ, "handle"),
                                     "torus_cross_cap": ("equilateral_torus", TORUS_RES, "cross_cap")}.items():
        pos, slope_ok, info = _cert_part(certificates(name, res, kind))
        parts[f"{label}_margin"] = pos
        parts[f"{label}_slope"] = slope_ok
        vals[label] = info
    vals["eps"] = CERT_EPS
    return CheckResult("7", "monotonicity certificates", all(parts.values()), vals, parts, time.perf_counter() - t0)


def check_veronese() -> CheckResult:
    t0 = time.perf_counter()
    t_list = (1.0, 2.0, 4.0, 8.0, 16.0)
    energies = [analytic.veronese_energy(128, t) for t in t_list]
    closed = [analytic.veronese_energy_closed_form(t) for t in t_list]
    errors = [abs(e - 12 * np.pi) / (12 * np.pi) for e in energies]
    parts = {"limit_1pct": errors[-1] < 1e-2, "converging": bool(np.all(np.diff(errors) <= 0)),
             "quadrature_matches_closed_form": max(abs(a - b) / b for a, b in zip(energies, closed)) < 1e-8}
    vals = dict(t_max=t_list, energy=energies, relative_error=errors)
    return CheckResult("8", "Veronese energy", all(parts.values()), vals, parts, time.perf_counter() - t0)


def check_properties() -> CheckResult:
    t0 = time.perf_counter()
    parts, vals = {}, {}
    m, g = build_standard("flat_torus", 12, basis="equilateral", area=1.0)
    a = solve_spectrum(assemble(m, g), 7)
    b = solve_spectrum(assemble(m, g.scaled(3.7)), 7)
    na, nb = a.eigenvalues[1:] * g.area(m), b.eigenvalues[1:] * g.scaled(3.7).area(m)
    vals["scale_invariance"] = float(np.max(np.abs(na - nb) / na))
    parts["scale_invariance_1e-10"] = vals["scale_invariance"] < 1e-10

    km, kg = build_standard("flat_klein_bottle", 12)
    cover = orientation_double_cover(km, kg)
    ops = assemble(cover.mesh, cover.metric)
    k = 12
    full = solve_spectrum(ops, k).eigenvalues
    ev = even_spectrum(ops, cover.involution, k).eigenvalues
    od = odd_spectrum(ops, cover.involution, k).eigenvalues
    merged = np.sort(np.concatenate([ev, od]))[:k]
    direct = solve_spectrum(assemble(km, kg), k).eigenvalues
    dev = float(np.max(np.abs(merged - full) / np.maximum(full, full[1])))
    dev_base = float(np.max(np.abs(ev - direct) / np.maximum(direct, direct[1])))
    vals["even_odd_vs_cover"], vals["even_vs_direct"] = dev, dev_base
    parts["even_odd_decomposition"] = dev < 1e-3 and dev_base < 1e-3

    chi_rows = []
    ok = True
    for name, res in (("equilateral_torus", TORUS_RES), ("round_sphere", 6)):
        base = standard_base(name, res)
        chi0 = base.mesh.euler_characteristic()
        for kind, drop in (("cross_cap", 1), ("handle", 2)):
            eps = 0.02 if name == "equilateral_torus" else 0.1
            s = attach(base, SurgerySpec(kind, base.centers[kind], eps, 0.2, 16))
            chi = s.mesh.euler_characteristic()
            orient = s.mesh.is_orientable
            want_orient = base.mesh.is_orientable and kind == "handle"
            chi_rows.append((name, kind, chi0, chi, orient))
            ok &= chi == chi0 - drop and orient == want_orient
    vals["euler"] = chi_rows
    parts["euler_bookkeeping"] = bool(ok)

    base = standard_base("equilateral_torus", 12)
    s = attach(base, SurgerySpec("cross_cap", base.centers["cross_cap"], 0.02, 0.2, 16))
    runs = [spectrum_csv(surgered_spectrum(s, SolverConfig(k=8, seed=7))) for _ in range(2)]
    runs += [spectrum_csv(solve_spectrum(assemble(*build_standard("round_sphere", 12)), 8, seed=7))
             for _ in range(2)]
    parts["byte_identical_reruns"] = runs[0] == runs[1] and runs[2] == runs[3]
    return CheckResult("9", "property suites", all(parts.values()), vals, parts, time.perf_counter() - t0)


CHECKS = {
    "1": check_known_values,
    "2": check_model_modes,
    "3": check_convergence,
    "4": check_crossing,
    "5": check_sandwich,
    "6": check_scaling,
    "7": check_monotonicity,
    "8": check_veronese,
    "9": check_properties,
}

SUITES = {"full": tuple(CHECKS), "paper": tuple(CHECKS), "quick": ("1", "2", "8", "9")}


def run_suite(name: str = "full", jobs: int = 1, echo=None) -> dict:
    """Run a suite and return the manifest; ``echo`` receives one line per check."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    manifest = {}
    for key in SUITES[name]:
        fn = CHECKS[key]
        res = fn(jobs=jobs) if key == "3" else fn()
        manifest[f"criterion_{key}"] = res.to_dict()
        if echo is not None:
            echo(res.line())
    return manifest
