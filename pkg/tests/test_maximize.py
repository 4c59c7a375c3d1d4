import numpy as np
import pytest
from scipy import stats

from surfspec.config import MaximizeConfig
from surfspec.geometry import GeometryError, build_cylinder, build_standard, lattice_basis
from surfspec.maximize import (ascent_direction, extract_harmonic_map, load_checkpoint, maximize_in_class, objective,
                               save_checkpoint, state_from_metric, trajectory_rows)

TORUS_EQ = 8 * np.pi**2 / np.sqrt(3)


@pytest.fixture(scope="module")
def square():
    return build_standard("flat_torus", 16, basis=np.eye(2))


@pytest.fixture(scope="module")
def equilateral():
    return build_standard("flat_torus", 16, basis=lattice_basis("equilateral", 1.0))


def perturbation(mesh):
    p = np.array([mesh.chart.vertex_position(mesh, v) for v in range(mesh.n_vertices)])
    p = p / np.sqrt(abs(np.linalg.det(mesh.chart.basis)))
    return 0.3 * np.cos(2 * np.pi * p[:, 0]) + 0.2 * np.sin(2 * np.pi * (p[:, 0] + p[:, 1]))


@pytest.fixture(scope="module")
def perturbed_run(square):
    mesh, metric = square
    return maximize_in_class(mesh, metric, MaximizeConfig(max_iter=40), phi0=perturbation(mesh))


def test_scale_invariance(square):
    mesh, metric = square
    phi = perturbation(mesh)
    a = objective(mesh, metric, phi)
    for c in (-1.0, 0.3, 2.0):
        assert objective(mesh, metric, phi + c) == pytest.approx(a, rel=1e-10)


def test_zero_iterations_is_identity(square):
    mesh, metric = square
    phi = perturbation(mesh)
    st = maximize_in_class(mesh, metric, MaximizeConfig(max_iter=0), phi0=phi)
    assert st.iterations == 0
    assert st.area == pytest.approx(1.0, rel=1e-12)
    # only the additive area normalization is applied
    shift = st.log_conformal_factor - phi
    assert np.ptp(shift) < 1e-12
    assert st.value == pytest.approx(objective(mesh, metric, phi), rel=1e-10)


def test_equilateral_near_stationary(equilateral):
    mesh, metric = equilateral
    st = maximize_in_class(mesh, metric, MaximizeConfig(max_iter=50))
    start = st.history[0]["value"]
    assert (st.value - start) / start < 1e-3
    assert st.multiplicity == 6
    assert st.value == pytest.approx(TORUS_EQ, rel=2e-2)


def test_equilateral_metric_recovery(equilateral):
    mesh, metric = equilateral
    hm = extract_harmonic_map(state_from_metric(mesh, metric))
    assert hm.cluster_size == 6
    assert hm.metric_residual < 5e-2
    assert hm.sphericality_residual < 5e-2


def test_sphere_sphericality():
    mesh, metric = build_standard("round_sphere", 32)
    hm = extract_harmonic_map(state_from_metric(mesh, metric, k=6))
    assert hm.cluster_size == 3
    assert hm.sphericality_residual < 1e-2


def test_random_metric_not_spherical(square):
    mesh, metric = square
    phi = 0.5 * np.random.default_rng(0).standard_normal(mesh.n_vertices)
    hm = extract_harmonic_map(state_from_metric(mesh, metric, phi))
    assert hm.sphericality_residual > 0.3
    assert hm.metric_residual > 0.1


def test_accepted_steps_monotone(perturbed_run):
    vals = [h["value"] for h in perturbed_run.history if h["accepted"]]
    assert np.all(np.diff(vals) > 0)
    assert perturbed_run.value > perturbed_run.history[0]["value"]
    assert perturbed_run.area == pytest.approx(1.0, rel=1e-10)


def test_stationarity_certificate(perturbed_run):
    st = perturbed_run
    if st.status == "stationary":
        assert st.stationarity < MaximizeConfig().stationarity_tol
    d, stat, Q = ascent_direction(st.eigenframe, st.vertex_areas, st.area)
    assert stat == pytest.approx(st.stationarity, rel=1e-6, abs=1e-12)
    assert np.trace(Q) == pytest.approx(1.0)
    assert np.linalg.eigvalsh(Q).min() > -1e-10


def test_residuals_decrease_along_trajectory(perturbed_run):
    acc = [h for h in perturbed_run.history if h["accepted"]]
    sph = np.array([h["sphericality"] for h in acc])
    met = np.array([h["metric_residual"] for h in acc])
    mult = np.array([h["multiplicity"] for h in acc])
    assert sph[-1] < 0.5 * sph[0]
    assert met[-1] < 0.5 * met[0]
    assert stats.spearmanr(np.arange(len(acc)), met)[0] < -0.5
    assert stats.spearmanr(np.arange(len(acc)), sph)[0] < -0.5
    # once the final cluster has formed the residuals fall step by step
    start = len(mult) - 1
    while start > 0 and mult[start - 1] == mult[-1]:
        start -= 1
    tail = np.arange(start, len(mult))
    assert len(tail) >= 3
    assert np.all(np.diff(met[tail]) < 1e-3)
    assert np.all(np.diff(sph[tail]) < 1e-3)


def test_simple_eigenvalue_direction():
    # a single eigenvector gives direction 1 - A u^2 exactly
    rng = np.random.default_rng(3)
    w = rng.uniform(0.5, 1.5, 50)
    u = rng.standard_normal((50, 1))
    u /= np.sqrt(np.sum(w[:, None] * u**2))
    d, stat, Q = ascent_direction(u, w, w.sum())
    assert np.allclose(d, 1 - w.sum() * u[:, 0] ** 2)
    assert Q.shape == (1, 1)


def test_checkpoint_roundtrip(tmp_path, square, perturbed_run):
    mesh, metric = square
    save_checkpoint(perturbed_run, tmp_path / "ck.json", MaximizeConfig(max_iter=40))
    back = load_checkpoint(tmp_path / "ck.json", mesh, metric)
    assert np.array_equal(back.log_conformal_factor, perturbed_run.log_conformal_factor)
    assert np.array_equal(back.eigenframe, perturbed_run.eigenframe)
    assert back.value == perturbed_run.value
    assert back.history == perturbed_run.history
    other, g = build_standard("flat_torus", 8, basis=np.eye(2))
    with pytest.raises(ValueError):
        load_checkpoint(tmp_path / "ck.json", other, g)


def test_resume_continues_ascent(square, perturbed_run):
    mesh, metric = square
    st = maximize_in_class(mesh, metric, MaximizeConfig(max_iter=5), phi0=perturbed_run.log_conformal_factor)
    assert st.value >= perturbed_run.value * (1 - 1e-12)


def test_trajectory_rows(perturbed_run):
    keys, rows = trajectory_rows(perturbed_run)
    assert keys[0] == "iteration"
    assert len(rows) == len(perturbed_run.history)


def test_open_surface_rejected():
    mesh, metric = build_cylinder(0.1, 1.0)
    with pytest.raises(GeometryError):
        maximize_in_class(mesh, metric)


@pytest.mark.xfail(strict=True, reason="the flat square torus is critical and maximal in its own conformal class "
                                       "(4 pi^2); see decisions ledger")
def test_square_torus_reaches_equilateral_value(square):
    mesh, metric = square
    st = maximize_in_class(mesh, metric, MaximizeConfig(max_iter=200))
    assert st.value == pytest.approx(TORUS_EQ, rel=2e-2)
