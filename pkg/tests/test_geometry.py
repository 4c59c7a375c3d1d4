import numpy as np
import pytest

from surfspec.geometry import (GeometryError, build_cross_cap, build_cylinder, build_standard, check_surface,
                               glue, load_json, mollify_metric, orientation_double_cover, remove_disk,
                               save_json, stitch)
from surfspec.spectral import assemble, solve_spectrum


def loop_length(mesh, metric, loop):
    v = np.asarray(loop.vertices if hasattr(loop, "vertices") else loop)
    L = metric.lengths(mesh)
    return float(L[mesh.edge_index(v, np.roll(v, -1))].sum())


def test_sphere_topology_and_area():
    mesh, metric = build_standard("round_sphere", 32)
    assert mesh.n_vertices == 10242
    assert mesh.euler_characteristic() == 2
    assert mesh.is_closed and mesh.is_orientable
    assert metric.area(mesh) == pytest.approx(4 * np.pi, rel=1e-2)


def test_sphere_area_converges():
    errs = [abs(build_standard("round_sphere", f)[1].area(build_standard("round_sphere", f)[0]) - 4 * np.pi)
            for f in (4, 8, 16)]
    assert errs[0] > errs[1] > errs[2]


def test_square_torus(square_torus):
    mesh, metric = square_torus
    assert mesh.euler_characteristic() == 0
    assert metric.area(mesh) == pytest.approx(4 * np.pi**2, rel=1e-12)
    assert mesh.is_orientable


def test_klein_bottle(klein_bottle):
    mesh, _ = klein_bottle
    assert mesh.euler_characteristic() == 0
    assert not mesh.is_orientable


def test_projective_plane():
    mesh, metric = build_standard("projective_plane", 8)
    assert mesh.euler_characteristic() == 1
    assert not mesh.is_orientable
    assert metric.area(mesh) == pytest.approx(2 * np.pi, rel=2e-2)


def test_rectangle_has_boundary():
    mesh, metric = build_standard("flat_rectangle", 6, sides=(1.0, 2.0))
    assert not mesh.is_closed
    assert mesh.euler_characteristic() == 1
    assert metric.area(mesh) == pytest.approx(2.0)


def test_unknown_kind_rejected():
    with pytest.raises(GeometryError):
        build_standard("hyperbolic_pants", 8)


def test_remove_disk_circumference_and_area(square_torus):
    mesh, metric = square_torus
    c = (np.pi, np.pi)
    m2, g2, loop = remove_disk(mesh, metric, c, 0.05)
    assert loop_length(m2, g2, loop) == pytest.approx(2 * np.pi * 0.05, rel=1e-2)
    removed = metric.area(mesh) - g2.area(m2)
    assert removed == pytest.approx(np.pi * 0.05**2, rel=2e-2)
    assert m2.euler_characteristic() == -1
    check_surface(m2, g2)


def test_overlapping_disks_rejected(square_torus):
    mesh, metric = square_torus
    m2, g2, _ = remove_disk(mesh, metric, (np.pi, np.pi), 0.3)
    with pytest.raises(GeometryError):
        remove_disk(m2, g2, (np.pi + 0.2, np.pi), 0.3)


def test_cross_cap_model():
    mesh, metric = build_cross_cap(0.1, 1.0)
    assert len(mesh.boundary_loops) == 1
    assert not mesh.is_orientable
    assert metric.area(mesh) == pytest.approx(2 * np.pi * 0.1, rel=1e-2)
    assert mesh.euler_characteristic() == 0


def test_odd_angular_cross_cap_rejected():
    with pytest.raises(GeometryError):
        build_cross_cap(0.1, 1.0, (31, 16))


def test_cylinder_model():
    mesh, metric = build_cylinder(0.1, 1.0)
    assert len(mesh.boundary_loops) == 2
    assert mesh.euler_characteristic() == 0
    assert metric.area(mesh) == pytest.approx(0.2 * np.pi, rel=1e-2)
    for lp in mesh.boundary_loops:
        assert loop_length(mesh, metric, lp) == pytest.approx(0.2 * np.pi, rel=1e-2)


def test_torus_plus_cross_cap(square_torus):
    mesh, metric = square_torus
    m2, g2, loop = remove_disk(mesh, metric, (np.pi, np.pi), 0.2)
    # model radius matched to the polygon perimeter so seam edges agree exactly
    cc, gc = build_cross_cap(loop.perimeter(m2, g2) / (2 * np.pi), 0.5)
    out, gout, _ = glue(m2, g2, loop, cc, gc, cc.boundary_loops[0])
    assert out.is_closed
    assert out.euler_characteristic() == -1
    assert not out.is_orientable
    assert gout.area(out) == pytest.approx(g2.area(m2) + gc.area(cc), rel=1e-12)


def test_sphere_plus_handle(sphere):
    mesh, metric = sphere
    m1, g1, _ = remove_disk(mesh, metric, (0.0, 0.0, 1.0), 0.3, 16)
    m2, g2, l2 = remove_disk(m1, g1, (0.0, 0.0, -1.0), 0.3, 16)
    l1 = m2.holes[0]
    cyl, gcyl = build_cylinder(l2.perimeter(m2, g2) / (2 * np.pi), 0.5, (16, 8))
    a, ga, _ = glue(m2, g2, l1.vertices, cyl, gcyl, cyl.boundary_loops[0])
    far = cyl.boundary_loops[1] + m2.n_vertices - 16
    results = [stitch(a, ga, a.holes[1].vertices, far, reverse=r) for r in (False, True)]
    out, gout = next(r for r in results if r[0].is_orientable)
    assert out.is_closed
    assert out.euler_characteristic() == 0
    assert gout.area(out) == pytest.approx(g2.area(m2) + gcyl.area(cyl), rel=1e-12)


def test_genus_two_from_two_tori(square_torus):
    mesh, metric = square_torus
    a, ga, la = remove_disk(mesh, metric, (np.pi, np.pi), 0.3)
    b, gb, lb = remove_disk(mesh, metric, (np.pi, np.pi), 0.3)
    out, gout, _ = glue(a, ga, la, b, gb, lb, reverse=True)
    assert out.euler_characteristic() == -2
    assert out.is_orientable
    assert gout.area(out) == pytest.approx(ga.area(a) + gb.area(b), rel=1e-12)


def test_circumference_mismatch_rejected(square_torus):
    mesh, metric = square_torus
    m2, g2, loop = remove_disk(mesh, metric, (np.pi, np.pi), 0.2)
    cc, gc = build_cross_cap(0.22, 0.5)
    with pytest.raises(GeometryError):
        glue(m2, g2, loop, cc, gc, cc.boundary_loops[0])


def test_klein_double_cover(klein_bottle):
    mesh, metric = klein_bottle
    dc = orientation_double_cover(mesh, metric)
    inv = np.asarray(dc.involution)
    assert np.all(inv[inv] == np.arange(len(inv)))
    assert np.count_nonzero(inv == np.arange(len(inv))) == 0
    assert dc.mesh.is_orientable
    assert dc.mesh.euler_characteristic() == 2 * mesh.euler_characteristic()
    assert dc.metric.area(dc.mesh) == pytest.approx(2 * metric.area(mesh), rel=1e-12)


def test_projective_plane_cover_is_sphere():
    mesh, metric = build_standard("projective_plane", 4)
    dc = orientation_double_cover(mesh, metric)
    assert dc.mesh.euler_characteristic() == 2
    assert dc.mesh.is_orientable


def test_double_cover_rejects_orientable(square_torus):
    with pytest.raises(GeometryError):
        orientation_double_cover(*square_torus)


def _mollify_case(delta):
    mesh, metric = build_standard("flat_torus", 30, basis=2 * np.pi * np.eye(2))
    m2, g2, loop = remove_disk(mesh, metric, (np.pi, np.pi), 0.2)
    return m2, g2, loop, (mollify_metric(m2, g2, loop, delta) if delta else g2)


def test_mollify_zero_is_identity():
    m2, g2, loop, out = _mollify_case(0.0)
    assert mollify_metric(m2, g2, loop, 0.0) is g2


def test_mollify_sequence_converges():
    m2, g2, loop, _ = _mollify_case(0.0)
    base = solve_spectrum(assemble(m2, g2, "neumann"), 3).eigenvalues[1]
    diffs, areas = [], []
    for delta in (0.08, 0.04, 0.02):
        g = mollify_metric(m2, g2, loop, delta)
        check_surface(m2, g)
        diffs.append(abs(solve_spectrum(assemble(m2, g, "neumann"), 3).eigenvalues[1] - base))
        areas.append(abs(g.area(m2) - g2.area(m2)))
    assert diffs[0] >= diffs[1] >= diffs[2]
    # area change is O(delta * eps)
    for delta, da in zip((0.08, 0.04, 0.02), areas):
        assert da <= 10 * delta * 0.2


def test_mollify_rejects_wide_annulus():
    m2, g2, loop, _ = _mollify_case(0.0)
    with pytest.raises(GeometryError):
        mollify_metric(m2, g2, loop, 10.0)


def test_json_and_off_roundtrip(tmp_path, klein_bottle):
    mesh, metric = klein_bottle
    save_json(tmp_path / "k.json", mesh, metric)
    m2, g2 = load_json(tmp_path / "k.json")
    assert np.array_equal(m2.triangles, mesh.triangles)
    assert np.allclose(g2.lengths(m2), metric.lengths(mesh))
    assert m2.euler_characteristic() == 0
