"""Intrinsic triangle meshes, reference surfaces and surgery operations."""

from .build import (EQUILATERAL_BASIS, build_cross_cap, build_cylinder, build_disk, build_standard,
                    lattice_basis, model_loop)
from .charts import BoundaryLoop, Hole, SphereChart, TorusChart, icosphere
from .io import load_json, mesh_from_dict, mesh_to_dict, read_off, save_json, write_off
from .mesh import DiscreteMetric, GeometryError, SurfaceMesh, check_surface, metric_from_face_lengths
from .ops import (DoubleCover, disjoint_union, glue, mollified_profile, mollify_metric,
                  orientation_double_cover, remove_disk, stitch)

__all__ = [
    "EQUILATERAL_BASIS", "BoundaryLoop", "DiscreteMetric", "DoubleCover", "GeometryError", "Hole",
    "SphereChart", "SurfaceMesh", "TorusChart", "build_cross_cap", "build_cylinder", "build_disk",
    "build_standard", "check_surface", "disjoint_union", "glue", "icosphere", "lattice_basis", "load_json",
    "mesh_from_dict", "mesh_to_dict", "metric_from_face_lengths", "model_loop", "mollified_profile", "mollify_metric",
    "orientation_double_cover", "read_off", "remove_disk", "save_json", "stitch", "write_off",
]
