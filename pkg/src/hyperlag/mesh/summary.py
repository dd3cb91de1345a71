"""Mesh census printed by the ``mesh-info`` command."""

from typing import Any, Dict

import numpy as np

from hyperlag.mesh.geometry import compute_geometry
from hyperlag.mesh.topology import Mesh


def mesh_summary(mesh: Mesh) -> Dict[str, Any]:
    """Entity counts, Euler characteristic, size statistics and tag census."""
    topo = mesh.topology
    geom = compute_geometry(topo, mesh.coords)
    bf = topo.boundary_faces
    tags, counts = np.unique(topo.face_tags[bf], return_counts=True)
    lo = mesh.coords.min(axis=0)
    hi = mesh.coords.max(axis=0)
    return {
        "name": mesh.name,
        "nodes": topo.n_nodes,
        "cells": topo.n_cells,
        "faces": topo.n_faces,
        "boundary_faces": int(bf.size),
        "euler_characteristic": topo.euler_characteristic(),
        "min_volume": float(geom.volume.min()),
        "max_volume": float(geom.volume.max()),
        "total_volume": float(np.sum(geom.volume)),
        "min_char_length": float(geom.char_length.min()),
        "max_char_length": float(geom.char_length.max()),
        "bounding_box": [float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])],
        "boundary_tags": {int(t): int(c) for t, c in zip(tags, counts)},
    }
