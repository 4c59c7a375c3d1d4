import json

import numpy as np
import pytest

from surfspec import analytic


def test_z2_interval_first_value():
    assert analytic.interval_z2_dirichlet(np.pi / 2, 3) == pytest.approx([1.0, 9.0, 25.0])
    for h in (0.1, 0.5, 2.0):
        assert analytic.interval_z2_dirichlet(h, 1)[0] == pytest.approx(np.pi**2 / (4 * h * h))


def test_z2_interval_scaling():
    a = analytic.interval_z2_dirichlet(0.7, 6)
    b = analytic.interval_z2_dirichlet(1.4, 6)
    assert np.allclose(b, a / 4)


def test_z2_interval_is_odd_subsequence():
    h = 0.37
    full = analytic.interval_dirichlet(h, 20)
    odd = analytic.interval_z2_dirichlet(h, 10)
    assert np.allclose(odd, full[0::2])
    assert not np.any(np.isclose(full[1::2][:, None], odd[None, :]).any(axis=1))


def test_interval_rejects_bad_height():
    with pytest.raises(ValueError):
        analytic.interval_z2_dirichlet(0.0, 3)


def test_model_modes():
    cc = analytic.model_mode_values("cross_cap", 0.1, 1.0)
    assert cc.dirichlet == pytest.approx(np.pi**2 / 4)
    assert cc.neumann == pytest.approx(np.pi**2)
    assert cc.valid
    cyl = analytic.model_mode_values("cylinder", 0.1, 1.0)
    assert cyl.dirichlet == pytest.approx(np.pi**2)
    assert not analytic.model_mode_values("cross_cap", 1.0, 1.0).valid
    with pytest.raises(ValueError):
        analytic.model_mode_values("torus", 0.1, 1.0)


def test_merge_limit_spectrum():
    out = analytic.merge_limit_spectrum([0.0], np.pi / 2, 3)
    assert out.merged == pytest.approx([0.0, 1.0, 9.0])
    assert list(out.source) == [0, 1, 1]
    assert analytic.merge_limit_spectrum([0.0, 5.0], 1.0, 1).merged == pytest.approx([0.0])


def test_merge_tie_at_crossing():
    lam1 = 8 * np.pi**2 / np.sqrt(3)
    h = analytic.crossing_height(lam1)
    assert h == pytest.approx(0.2326, abs=1e-4)
    base = [0.0] + [lam1] * 6 + [3 * lam1]
    out = analytic.merge_limit_spectrum(base, h, 8)
    assert out.merged[1] == pytest.approx(out.merged[2])
    assert out.merged[7] == pytest.approx(lam1, rel=1e-12)
    # ties keep base values first
    assert list(out.source[:8]) == [0, 0, 0, 0, 0, 0, 0, 1]


def test_merge_rejects_unsorted():
    with pytest.raises(ValueError):
        analytic.merge_limit_spectrum([0.0, 3.0, 1.0], 1.0, 3)


def test_collar_width_values():
    assert analytic.collar_width("two_sided", 1.0) == pytest.approx(np.pi * (np.pi - 2 * np.arctan(np.sinh(0.5))))
    assert analytic.collar_width("two_sided", 1.0) == pytest.approx(6.851, abs=1e-3)
    ls = np.geomspace(1e-3, 5, 30)
    for kind in ("two_sided", "one_sided"):
        w = [analytic.collar_width(kind, l) for l in ls]
        assert np.all(np.diff(w) < 0)
    small = 1e-6
    assert analytic.collar_width("two_sided", small) * small == pytest.approx(np.pi**2, rel=1e-5)


def test_collar_factor():
    l = 0.8
    assert analytic.collar_conformal_factor("two_sided", l, 0.0) == pytest.approx((l / (2 * np.pi)) ** 2)
    assert analytic.collar_conformal_factor("one_sided", l, 0.0) == pytest.approx((2 * l / (2 * np.pi)) ** 2)
    w = analytic.collar_width("two_sided", l)
    with pytest.raises(ValueError):
        analytic.collar_conformal_factor("two_sided", l, w * 1.01)
    with pytest.raises(ValueError):
        analytic.collar_width("two_sided", -1.0)


def test_sphere_map():
    rng = np.random.default_rng(0)
    t = rng.uniform(-30, 30, 200)
    th = rng.uniform(0, 2 * np.pi, 200)
    p = analytic.sphere_map(t, th)
    assert np.abs(np.linalg.norm(p, axis=-1) - 1).max() < 1e-12
    assert analytic.sphere_map(0.0, 0.0) == pytest.approx([1.0, 0.0, 0.0])


def test_sphere_map_matches_rational_form():
    t, th = 0.7, 1.1
    e = np.exp(t)
    ref = np.array([2 * e * np.cos(th), 2 * e * np.sin(th), e * e - 1]) / (e * e + 1)
    assert analytic.sphere_map(t, th) == pytest.approx(ref, abs=1e-14)


def test_veronese_lands_on_unit_sphere():
    rng = np.random.default_rng(2)
    p = rng.standard_normal((100, 3))
    p /= np.linalg.norm(p, axis=1, keepdims=True)
    v = analytic.veronese(p)
    assert np.abs(np.linalg.norm(v, axis=1) - 1).max() < 1e-12
    assert np.allclose(analytic.veronese(p), analytic.veronese(-p))


def test_veronese_energy_converges():
    for t_max in (2.0, 4.0, 8.0):
        assert analytic.veronese_energy(64, t_max) == pytest.approx(analytic.veronese_energy_closed_form(t_max),
                                                                    rel=1e-10)
    assert analytic.veronese_energy(64, 16.0) == pytest.approx(12 * np.pi, rel=1e-2)


def test_klein_value():
    v = analytic.klein_maximizer_value()
    assert v == pytest.approx(12 * np.pi * analytic.elliptic_e_quadrature(2 * np.sqrt(2) / 3), rel=1e-13)
    assert v == pytest.approx(41.98705035770842, rel=1e-12)
    assert v == pytest.approx(41.7, rel=1e-2)
    assert 12 * np.pi * analytic.elliptic_e(0.0) == pytest.approx(6 * np.pi**2)


def test_elliptic_monotone():
    ks = np.linspace(0, 0.99, 30)
    e = [analytic.elliptic_e(k) for k in ks]
    assert np.all(np.diff(e) < 0)
    assert np.allclose(e, [analytic.elliptic_e_quadrature(k) for k in ks], rtol=1e-12)


def test_known_constants_reproduce():
    c = analytic.known_constants()
    assert c["sphere"]["value"] == pytest.approx(8 * np.pi, rel=1e-12)
    assert c["projective_plane"]["value"] == pytest.approx(12 * np.pi, rel=1e-12)
    assert c["torus"]["value"] == pytest.approx(analytic.torus_lambda1_area(analytic_basis()), rel=1e-12)
    doc = json.loads(analytic.known_constants_json())
    assert all("citation" in v for v in doc.values())


def analytic_basis():
    return np.array([[1.0, 0.0], [0.5, np.sqrt(3) / 2]])


def test_torus_lattice_formula():
    assert analytic.torus_lambda1_area(np.eye(2)) == pytest.approx(4 * np.pi**2)
    assert analytic.torus_lambda1_area(2 * np.pi * np.eye(2)) == pytest.approx(4 * np.pi**2)
