"""Surgery on intrinsic meshes: disk removal, gluing, double covers, smoothing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from .charts import BoundaryLoop, Hole
from .mesh import DiscreteMetric, GeometryError, SurfaceMesh, edge_key, find_boundary_loops


def remove_disk(mesh: SurfaceMesh, metric: DiscreteMetric, center, epsilon: float, n_angular: int = 32):
    """Cut a round disk of radius epsilon around ``center``.

    ``center`` is a chart point or a vertex index. The chart re-triangulates
    with graded polar rings so the new boundary loop lies exactly on the
    circle of radius epsilon.
    """
    if mesh.chart is None:
        raise GeometryError("remove_disk needs a mesh built from a chart")
    if metric.log_conformal_factor is not None:
        raise GeometryError("remove_disk works on the chart metric; bake or drop the conformal factor first")
    if epsilon <= 0:
        raise GeometryError("epsilon must be positive")
    if np.ndim(center) == 0:
        center = mesh.chart.vertex_position(mesh, int(center))
    holes = [h.as_hole() for h in mesh.holes]
    holes.append(Hole(tuple(np.asarray(center, dtype=float).tolist()), float(epsilon), int(n_angular)))
    new_mesh, new_metric, loops = mesh.chart.triangulate(tuple(holes))
    return new_mesh, new_metric, loops[-1]


def _loop_vertices(loop) -> np.ndarray:
    return np.asarray(loop.vertices if isinstance(loop, BoundaryLoop) else loop, dtype=np.int64)


def _merge_lengths(mesh: SurfaceMesh, pairs: np.ndarray, lengths: np.ndarray, rtol: float) -> DiscreteMetric:
    keys = edge_key(pairs[:, 0], pairs[:, 1], mesh.n_vertices)
    uniq, inv = np.unique(keys, return_inverse=True)
    total = np.bincount(inv, weights=lengths)
    count = np.bincount(inv)
    mean = total / count
    spread = np.abs(lengths - mean[inv]) / mean[inv]
    if np.any(spread > rtol):
        raise GeometryError(f"glued edges disagree in length by up to {spread.max():.3g} (tolerance {rtol})")
    mesh_keys = edge_key(mesh.edges[:, 0], mesh.edges[:, 1], mesh.n_vertices)
    idx = np.searchsorted(uniq, mesh_keys)
    if np.any(idx >= len(uniq)) or np.any(uniq[np.minimum(idx, len(uniq) - 1)] != mesh_keys):
        raise GeometryError("edge created by gluing has no length")
    return DiscreteMetric(mean[idx])


def disjoint_union(a: SurfaceMesh, ga: DiscreteMetric, b: SurfaceMesh, gb: DiscreteMetric):
    off = a.n_vertices
    part_off = int(a.face_part.max()) + 1 if a.n_faces else 0
    tri = np.concatenate([a.triangles, b.triangles + off])
    part = np.concatenate([a.face_part, b.face_part + part_off])
    loops = tuple(a.boundary_loops) + tuple(l + off for l in b.boundary_loops)
    holes = tuple(a.holes) + tuple(h.relabel(np.arange(b.n_vertices) + off) for h in b.holes)
    mesh = SurfaceMesh(a.n_vertices + b.n_vertices, tri, boundary_loops=loops, face_part=part,
                       identification={"kind": "union", "parts": [a.identification.get("kind"),
                                                                   b.identification.get("kind")]},
                       holes=holes)
    pairs = np.concatenate([a.edges, b.edges + off])
    lengths = np.concatenate([ga.lengths(a), gb.lengths(b)])
    return mesh, _merge_lengths(mesh, pairs, lengths, 0.0), part_off


def stitch(mesh: SurfaceMesh, metric: DiscreteMetric, loop_a, loop_b, offset: int = 0,
           reverse: bool = False, rtol: float = 1e-2):
    """Identify two boundary loops of one mesh; loop_b's vertices are removed."""
    a = _loop_vertices(loop_a)
    b = _loop_vertices(loop_b)
    n = len(a)
    if len(b) != n:
        raise GeometryError(f"loop vertex counts differ ({n} vs {len(b)})")
    if np.intersect1d(a, b).size:
        raise GeometryError("loops share vertices")
    L = metric.lengths(mesh)
    la = L[mesh.edge_index(a, np.roll(a, -1))]
    lb = L[mesh.edge_index(b, np.roll(b, -1))]
    ca, cb = la.sum(), lb.sum()
    if abs(ca - cb) > rtol * max(ca, cb):
        raise GeometryError(f"loop circumferences differ: {ca:.6g} vs {cb:.6g} (tolerance {rtol})")
    s = -1 if reverse else 1
    target = a[(s * np.arange(n) + offset) % n]
    vmap = np.arange(mesh.n_vertices)
    vmap[b] = target
    keep = np.ones(mesh.n_vertices, dtype=bool)
    keep[b] = False
    compress = np.cumsum(keep) - 1
    vmap = compress[vmap]
    tri = vmap[mesh.triangles]
    sets = {frozenset(a.tolist()), frozenset(b.tolist())}
    loops = tuple(vmap[l] for l in mesh.boundary_loops if frozenset(l.tolist()) not in sets)
    holes = tuple(h.relabel(vmap) for h in mesh.holes)
    ident = dict(mesh.identification)
    ident.pop("points", None)
    ident.setdefault("stitches", [])
    ident["stitches"] = list(ident["stitches"]) + [{"offset": int(offset), "reverse": bool(reverse)}]
    out = SurfaceMesh(int(keep.sum()), tri, boundary_loops=loops, face_part=mesh.face_part,
                      identification=ident, holes=holes)
    out.validate()
    pairs = vmap[mesh.edges]
    new_metric = _merge_lengths(out, pairs, L, rtol)
    new_metric.face_lengths(out)
    return out, new_metric


def glue(mesh_a, metric_a, loop_a, mesh_b, metric_b, loop_b, offset: int = 0, reverse: bool = False,
         rtol: float = 1e-2):
    """Glue mesh_b onto mesh_a along a pair of boundary loops.

    Vertex i of loop_b lands on vertex ``(+/-i + offset) mod n`` of loop_a.
    Lengths on both sides are kept, so the glued metric is only piecewise
    smooth across the seam. Returns the glued mesh, metric and the face_part
    label that mesh_b's faces carry.
    """
    u, gu, part_off = disjoint_union(mesh_a, metric_a, mesh_b, metric_b)
    lb = _loop_vertices(loop_b) + mesh_a.n_vertices
    mesh, metric = stitch(u, gu, _loop_vertices(loop_a), lb, offset=offset, reverse=reverse, rtol=rtol)
    return mesh, metric, part_off


@dataclass(frozen=True, eq=False)
class DoubleCover:
    mesh: SurfaceMesh
    metric: DiscreteMetric
    involution: np.ndarray
    projection: np.ndarray


def orientation_double_cover(mesh: SurfaceMesh, metric: DiscreteMetric) -> DoubleCover:
    """Orientable two-sheeted cover with its deck involution.

    Each triangle gets two oriented copies; copies are glued across an edge
    when they induce opposite directions on it. Vertices of the cover are the
    resulting classes of corners.
    """
    if mesh.is_orientable:
        raise GeometryError("orientation double cover requested for an orientable surface")
    t = mesh.triangles
    F = len(t)
    fe = mesh.face_edges
    starts = np.stack([t[:, 1], t[:, 2], t[:, 0]], axis=1)
    ends = np.stack([t[:, 2], t[:, 0], t[:, 1]], axis=1)
    dsign = np.where(starts == mesh.edges[fe, 0], 1, -1)

    def corner(f, sheet, c):
        return (sheet * F + f) * 3 + c

    ds = DisjointSet(range(6 * F))
    flat = fe.ravel()
    order = np.argsort(flat, kind="stable")
    se = flat[order]
    first = np.flatnonzero(np.r_[True, se[1:] != se[:-1]])
    counts = np.diff(np.r_[first, len(se)])
    for p in first[counts == 2]:
        fa, ia = divmod(int(order[p]), 3)
        fb, ib = divmod(int(order[p + 1]), 3)
        da, db = dsign[fa, ia], dsign[fb, ib]
        u, v = int(starts[fa, ia]), int(ends[fa, ia])
        ca = {int(t[fa, k]): k for k in range(3)}
        cb = {int(t[fb, k]): k for k in range(3)}
        for sa in (0, 1):
            oa = 1 if sa == 0 else -1
            ob = -oa * da * db
            sb = 0 if ob == 1 else 1
            for w in (u, v):
                ds.merge(corner(fa, sa, ca[w]), corner(fb, sb, cb[w]))
    roots = np.array([ds[i] for i in range(6 * F)])
    _, cls = np.unique(roots, return_inverse=True)
    cls = cls.reshape(2, F, 3)
    n_cover = int(cls.max()) + 1
    projection = np.zeros(n_cover, dtype=np.int64)
    projection[cls[0].ravel()] = t.ravel()
    projection[cls[1].ravel()] = t.ravel()
    if np.any(np.bincount(projection, minlength=mesh.n_vertices) != 2):
        raise GeometryError("cover construction did not produce two preimages per vertex")
    inv = np.zeros(n_cover, dtype=np.int64)
    inv[cls[0].ravel()] = cls[1].ravel()
    inv[cls[1].ravel()] = cls[0].ravel()
    tri = np.concatenate([cls[0], cls[1][:, [0, 2, 1]]])
    face_len = metric.face_lengths(mesh)
    face_len = np.concatenate([face_len, face_len[:, [0, 2, 1]]])
    loops = tuple(find_boundary_loops(tri, n_cover))
    cover = SurfaceMesh(n_cover, tri, boundary_loops=loops,
                        face_part=np.concatenate([mesh.face_part, mesh.face_part]),
                        identification={"kind": "orientation_cover", "base": mesh.identification.get("kind")})
    cover.validate()
    fe2 = cover.face_edges.ravel()
    lengths = np.zeros(cover.n_edges)
    lengths[fe2] = face_len.ravel()
    return DoubleCover(cover, DiscreteMetric(lengths), inv, projection)


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f0 = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        f1 = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return f0 / (f0 + f1)


def mollified_profile(r, epsilon: float, delta: float, profile: str = "flat"):
    """Squared angular metric coefficient after both blending stages."""
    r = np.asarray(r, dtype=float)
    old = r**2 if profile == "flat" else np.sin(r) ** 2
    eta = 1.0 - _smoothstep((r - epsilon - delta) / delta)
    stage1 = np.where(r <= epsilon + delta, r**2, (1 - eta) * old + eta * r**2)
    eta2 = 1.0 - _smoothstep((r - epsilon) / delta)
    return np.where(r <= epsilon + delta, (1 - eta2) * stage1 + eta2 * epsilon**2, stage1)


def mollify_metric(mesh: SurfaceMesh, metric: DiscreteMetric, loop: BoundaryLoop, delta: float) -> DiscreteMetric:
    """Blend the metric near a glued circle into the flat cylinder metric.

    On [eps+delta, eps+2 delta] the metric is first pulled to the Euclidean
    polar metric, then on [eps, eps+delta] the angular part is pulled to
    eps^2 dtheta^2 so it matches the attached cylinder. Edge lengths inside
    the annulus are rescaled by the ratio of new to old polar lengths.
    """
    if delta < 0:
        raise GeometryError("delta must be non-negative")
    if delta == 0:
        return metric
    eps = loop.epsilon
    if eps + 2 * delta > loop.patch_radius:
        raise GeometryError(f"delta={delta} needs an annulus to {eps + 2 * delta:.4g}, patch ends at {loop.patch_radius:.4g}")
    r = np.full(mesh.n_vertices, np.nan)
    th = np.full(mesh.n_vertices, np.nan)
    r[loop.polar_vertices] = loop.polar_r
    th[loop.polar_vertices] = loop.polar_theta
    e = mesh.edges
    r1, r2 = r[e[:, 0]], r[e[:, 1]]
    rm = 0.5 * (r1 + r2)
    sel = np.isfinite(rm) & (rm > eps * (1 + 1e-9)) & (rm < eps + 2 * delta)
    dr = (r2 - r1)[sel]
    dth = np.angle(np.exp(1j * (th[e[sel, 1]] - th[e[sel, 0]])))
    rho_old2 = rm[sel] ** 2 if loop.radial_profile == "flat" else np.sin(rm[sel]) ** 2
    rho_new2 = mollified_profile(rm[sel], eps, delta, loop.radial_profile)
    ratio = np.sqrt((dr**2 + rho_new2 * dth**2) / (dr**2 + rho_old2 * dth**2))
    lengths = np.array(metric.edge_lengths)
    lengths[sel] *= ratio
    out = DiscreteMetric(lengths, metric.log_conformal_factor)
    out.face_lengths(mesh)
    return out
