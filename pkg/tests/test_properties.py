import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from surfspec import analytic
from surfspec.cli import parse_list
from surfspec.geometry import (GeometryError, build_cross_cap, build_cylinder, build_standard, check_surface, glue,
                               orientation_double_cover, remove_disk)
from surfspec.maximize import objective
from surfspec.spectral import (assemble, cluster_ids, even_spectrum, mass_matrix, odd_spectrum, solve_spectrum,
                               stiffness_matrix)

TORUS = build_standard("flat_torus", 30, basis=2 * np.pi * np.eye(2))
SMALL_TORUS = build_standard("flat_torus", 10, basis=np.array([[1.0, 0.0], [0.4, 0.9]]))
SPHERE = build_standard("round_sphere", 4)
KLEIN_CACHE = {}

scales = st.floats(0.05, 20.0)
angles = st.floats(0.0, 2 * np.pi)


@given(c=scales)
def test_area_scales_quadratically(c):
    for mesh, metric in (TORUS, SPHERE):
        assert metric.scaled(c).area(mesh) == pytest.approx(c * c * metric.area(mesh), rel=1e-12)


@given(c=scales)
def test_lambda_area_scale_invariant(c):
    mesh, metric = SMALL_TORUS
    a = solve_spectrum(assemble(mesh, metric), 6).normalized()
    b = solve_spectrum(assemble(mesh, metric.scaled(c)), 6).normalized()
    assert np.allclose(b[1:], a[1:], rtol=1e-10)


@given(c=scales)
def test_stiffness_scale_free_mass_quadratic(c):
    mesh, metric = SMALL_TORUS
    K0, K1 = stiffness_matrix(mesh, metric), stiffness_matrix(mesh, metric.scaled(c))
    assert abs(K1 - K0).max() < 1e-12 * abs(K0).max()
    assert np.allclose(mass_matrix(mesh, metric.scaled(c)).diagonal(), c * c * mass_matrix(mesh, metric).diagonal(),
                       rtol=1e-12)


@given(x=st.floats(0.3, 2 * np.pi - 0.3), y=st.floats(0.3, 2 * np.pi - 0.3), eps=st.floats(0.02, 0.3))
def test_remove_disk_bookkeeping(x, y, eps):
    mesh, metric = TORUS
    m2, g2, loop = remove_disk(mesh, metric, (x, y), eps)
    check_surface(m2, g2)
    assert m2.euler_characteristic() == -1
    assert len(m2.boundary_loops) == 1
    assert metric.area(mesh) - g2.area(m2) == pytest.approx(np.pi * eps * eps, rel=2e-2)
    assert loop.perimeter(m2, g2) == pytest.approx(2 * np.pi * eps, rel=1e-2)


@given(eps=st.floats(0.05, 0.3), h=st.floats(0.1, 2.0), offset=st.integers(0, 31),
       kind=st.sampled_from(["cross_cap", "cylinder"]))
def test_glue_is_additive_in_area(eps, h, offset, kind):
    mesh, metric = TORUS
    m2, g2, loop = remove_disk(mesh, metric, (np.pi, np.pi), eps)
    r = loop.perimeter(m2, g2) / (2 * np.pi)
    build = build_cross_cap if kind == "cross_cap" else build_cylinder
    mm, gm = build(r, h)
    out, gout, _ = glue(m2, g2, loop, mm, gm, mm.boundary_loops[0], offset=offset)
    check_surface(out, gout)
    assert gout.area(out) == pytest.approx(g2.area(m2) + gm.area(mm), rel=1e-12)
    assert out.euler_characteristic() == -1
    assert out.is_closed == (kind == "cross_cap")


@given(eps=st.floats(0.05, 0.3), stretch=st.floats(1.05, 1.5))
def test_glue_rejects_mismatch(eps, stretch):
    mesh, metric = TORUS
    m2, g2, loop = remove_disk(mesh, metric, (np.pi, np.pi), eps)
    mm, gm = build_cross_cap(stretch * loop.perimeter(m2, g2) / (2 * np.pi), 1.0)
    with pytest.raises(GeometryError):
        glue(m2, g2, loop, mm, gm, mm.boundary_loops[0])


def _klein(a, b):
    key = (round(a, 3), round(b, 3))
    if key not in KLEIN_CACHE:
        mesh, metric = build_standard("flat_klein_bottle", 8, sides=key)
        dc = orientation_double_cover(mesh, metric)
        KLEIN_CACHE[key] = (mesh, metric, dc)
    return KLEIN_CACHE[key]


@given(a=st.floats(0.5, 2.0), b=st.floats(0.5, 2.0))
def test_double_cover_spectra(a, b):
    mesh, metric, dc = _klein(a, b)
    inv = np.asarray(dc.involution)
    assert np.all(inv[inv] == np.arange(len(inv))) and not np.any(inv == np.arange(len(inv)))
    assert dc.mesh.euler_characteristic() == 2 * mesh.euler_characteristic()
    ops = assemble(dc.mesh, dc.metric)
    k = 10
    direct = solve_spectrum(assemble(mesh, metric), k).eigenvalues
    ev = even_spectrum(ops, dc.involution, k).eigenvalues
    od = odd_spectrum(ops, dc.involution, k).eigenvalues
    full = solve_spectrum(ops, k).eigenvalues
    assert np.allclose(ev[1:], direct[1:], rtol=1e-6)
    assert np.allclose(np.sort(np.concatenate([ev, od]))[:k], full, rtol=1e-8, atol=1e-9)


@given(base=st.lists(st.floats(0.0, 100.0), min_size=1, max_size=12), h=st.floats(0.05, 3.0),
       count=st.integers(1, 20))
def test_merge_is_multiset_union(base, h, count):
    base = np.sort(base)
    out = analytic.merge_limit_spectrum(base, h, count)
    union = np.sort(np.concatenate([base, analytic.interval_z2_dirichlet(h, count)]))
    assert np.array_equal(np.sort(out.merged), union[:count])
    assert np.all(np.diff(out.merged) >= 0)


@given(h=st.floats(0.01, 10.0), n=st.integers(1, 30))
def test_z2_modes_are_odd_dirichlet_modes(h, n):
    assert np.allclose(analytic.interval_z2_dirichlet(h, n), analytic.interval_dirichlet(h, 2 * n)[0::2])


@given(t=st.floats(-50, 50), th=angles)
def test_sphere_map_unit(t, th):
    assert abs(np.linalg.norm(analytic.sphere_map(t, th)) - 1) < 1e-12


@given(l=st.floats(1e-3, 10.0), frac=st.floats(-0.99, 0.99), kind=st.sampled_from(["two_sided", "one_sided"]))
def test_collar_factor_positive_and_even(l, frac, kind):
    t = frac * analytic.collar_width(kind, l)
    f = analytic.collar_conformal_factor(kind, l, t)
    assert f > 0
    assert f == pytest.approx(analytic.collar_conformal_factor(kind, l, -t), rel=1e-12)
    assert f >= analytic.collar_conformal_factor(kind, l, 0.0) * (1 - 1e-12)


@given(vals=st.lists(st.floats(0.1, 100.0), min_size=1, max_size=20), tol=st.floats(1e-6, 1e-1))
def test_cluster_ids_are_consistent(vals, tol):
    v = np.sort(vals)
    c = cluster_ids(v, tol)
    assert c[0] == 0
    assert np.all(np.diff(c) >= 0) and np.all(np.diff(c) <= 1)
    split = np.diff(c) == 1
    gaps = np.diff(v) / v[1:]
    assert np.all(gaps[split] > tol * (1 - 1e-12))
    assert np.all(gaps[~split] <= tol * (1 + 1e-12))


@given(c=st.floats(-3, 3), seed=st.integers(0, 1000))
def test_objective_invariant_under_constant_shift(c, seed):
    mesh, metric = SMALL_TORUS
    phi = 0.2 * np.random.default_rng(seed).standard_normal(mesh.n_vertices)
    assert objective(mesh, metric, phi + c) == pytest.approx(objective(mesh, metric, phi), rel=1e-10)


@given(vals=st.lists(st.floats(0.001, 10.0, allow_subnormal=False), min_size=1, max_size=8))
def test_parse_list_roundtrip(vals):
    text = ",".join(repr(v) for v in vals)
    assert parse_list(text) == tuple(vals)


@given(a=st.floats(0.01, 1.0), b=st.floats(1.1, 5.0), n=st.integers(2, 20))
def test_parse_list_linspace(a, b, n):
    out = parse_list(f"{a!r}:{b!r}:{n}")
    assume(len(out) == n)
    assert out[0] == pytest.approx(a, abs=1e-11) and out[-1] == pytest.approx(b, abs=1e-11)
