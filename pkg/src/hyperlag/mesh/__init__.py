"""Unstructured triangle meshes: connectivity, geometry, refinement and I/O."""

from hyperlag.mesh.generate import structured_rectangle
from hyperlag.mesh.geometry import (
    MassPartition,
    MeshGeometry,
    cell_volume,
    characteristic_length,
    compute_geometry,
    corner_vector,
    subcell_masses,
)
from hyperlag.mesh.io import read_mesh, write_ascii
from hyperlag.mesh.refine import refine_all
from hyperlag.mesh.summary import mesh_summary
from hyperlag.mesh.topology import Mesh, MeshTopology, build_topology

__all__ = [
    "Mesh",
    "MeshTopology",
    "MeshGeometry",
    "MassPartition",
    "build_topology",
    "cell_volume",
    "characteristic_length",
    "compute_geometry",
    "corner_vector",
    "subcell_masses",
    "refine_all",
    "structured_rectangle",
    "read_mesh",
    "write_ascii",
    "mesh_summary",
]
