"""Serialization of meshes and metrics: versioned JSON and OFF."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .mesh import DiscreteMetric, GeometryError, SurfaceMesh, find_boundary_loops, metric_from_face_lengths

SCHEMA = "surfspec.mesh"
SCHEMA_VERSION = 1


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def mesh_to_dict(mesh: SurfaceMesh, metric: DiscreteMetric, cone_tol: float = 1e-6) -> dict:
    return {
        "schema": SCHEMA,
        "version": SCHEMA_VERSION,
        "n_vertices": int(mesh.n_vertices),
        "triangles": mesh.triangles.tolist(),
        "boundary_loops": [l.tolist() for l in mesh.boundary_loops],
        "face_part": mesh.face_part.tolist(),
        "edges": mesh.edges.tolist(),
        "edge_lengths": metric.edge_lengths.tolist(),
        "log_conformal_factor": None if metric.log_conformal_factor is None else metric.log_conformal_factor.tolist(),
        "cone_points": [[v, a] for v, a in metric.cone_points(mesh, cone_tol)],
        "identification": _plain(mesh.identification),
    }


def mesh_from_dict(doc: dict):
    if doc.get("schema") != SCHEMA:
        raise GeometryError(f"not a mesh document (schema={doc.get('schema')!r})")
    if int(doc.get("version", -1)) > SCHEMA_VERSION:
        raise GeometryError(f"mesh schema version {doc['version']} is newer than supported {SCHEMA_VERSION}")
    mesh = SurfaceMesh(
        int(doc["n_vertices"]), np.asarray(doc["triangles"], dtype=np.int64),
        boundary_loops=tuple(np.asarray(l, dtype=np.int64) for l in doc.get("boundary_loops", [])),
        identification=dict(doc.get("identification", {})),
        face_part=np.asarray(doc["face_part"]) if doc.get("face_part") is not None else None,
    )
    mesh.validate()
    if not np.array_equal(mesh.edges, np.asarray(doc["edges"], dtype=np.int64).reshape(-1, 2)):
        raise GeometryError("edge table in document does not match triangles")
    phi = doc.get("log_conformal_factor")
    metric = DiscreteMetric(np.asarray(doc["edge_lengths"], dtype=float), None if phi is None else np.asarray(phi))
    metric.face_lengths(mesh)
    return mesh, metric


def save_json(path, mesh: SurfaceMesh, metric: DiscreteMetric) -> None:
    Path(path).write_text(json.dumps(mesh_to_dict(mesh, metric)))


def load_json(path):
    return mesh_from_dict(json.loads(Path(path).read_text()))


def write_off(path, mesh: SurfaceMesh, points) -> None:
    """OFF with the supplied vertex coordinates (2D points are padded with z=0)."""
    P = np.asarray(points, dtype=float)
    if P.shape[0] != mesh.n_vertices:
        raise GeometryError("need one point per vertex")
    if P.shape[1] == 2:
        P = np.column_stack([P, np.zeros(len(P))])
    lines = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} {mesh.n_edges}"]
    lines += [" ".join(repr(float(x)) for x in p) for p in P]
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles]
    Path(path).write_text("\n".join(lines) + "\n")


def read_off(path):
    """Read an OFF triangulation; edge lengths come from the coordinates."""
    tokens = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise GeometryError("missing OFF header")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    P = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        k = int(tokens[pos])
        if k != 3:
            raise GeometryError("only triangular faces are supported")
        faces.append([int(x) for x in tokens[pos + 1:pos + 4]])
        pos += 4
    tri = np.asarray(faces, dtype=np.int64)
    mesh = SurfaceMesh(nv, tri, boundary_loops=tuple(find_boundary_loops(tri, nv)),
                       identification={"kind": "off", "points": P})
    mesh.validate()
    Q = P[tri]
    face_len = np.stack([np.linalg.norm(Q[:, (i + 2) % 3] - Q[:, (i + 1) % 3], axis=1) for i in range(3)], 1)
    return mesh, metric_from_face_lengths(mesh, face_len)
