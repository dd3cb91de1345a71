"""Structured triangulations of rectangles."""

import logging

import numpy as np

from hyperlag.errors import MeshError
from hyperlag.mesh.topology import Mesh

logger = logging.getLogger(__name__)

BOTTOM, RIGHT, TOP, LEFT = 1, 2, 3, 4

PATTERNS = ("right", "left", "alternate")


def structured_rectangle(x0: float, x1: float, y0: float, y1: float,
                         nx: int, ny: int, pattern: str = "alternate",
                         name: str = "rectangle") -> Mesh:
    """
    Split an nx-by-ny quad grid of [x0, x1] x [y0, y1] into triangles.

    Args:
        pattern: ``right`` (all diagonals SW-NE), ``left`` (all SE-NW) or
            ``alternate`` (checkerboard of both)

    Returns:
        Mesh with boundary tags 1=bottom, 2=right, 3=top, 4=left

    Raises:
        MeshError: non-positive resolution, empty rectangle or unknown pattern
    """
    if nx < 1 or ny < 1:
        raise MeshError(f"Resolution must be positive, got nx={nx}, ny={ny}")
    if not (x1 > x0 and y1 > y0):
        raise MeshError(f"Empty rectangle [{x0}, {x1}] x [{y0}, {y1}]")
    if pattern not in PATTERNS:
        raise MeshError(f"Unknown diagonal pattern '{pattern}', expected one of {PATTERNS}")

    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    i, j = i.ravel(), j.ravel()
    n00 = j * (nx + 1) + i
    n10 = n00 + 1
    n01 = n00 + nx + 1
    n11 = n01 + 1

    if pattern == "right":
        sw_ne = np.ones(i.size, dtype=bool)
    elif pattern == "left":
        sw_ne = np.zeros(i.size, dtype=bool)
    else:
        sw_ne = (i + j) % 2 == 0

    first = np.where(sw_ne[:, None],
                     np.column_stack([n00, n10, n11]),
                     np.column_stack([n00, n10, n01]))
    second = np.where(sw_ne[:, None],
                      np.column_stack([n00, n11, n01]),
                      np.column_stack([n10, n11, n01]))
    cells = np.stack([first, second], axis=1).reshape(-1, 3)

    k = np.arange(nx)
    l = np.arange(ny)
    bottom = np.column_stack([k, k + 1, np.full(nx, BOTTOM)])
    top_row = ny * (nx + 1)
    top = np.column_stack([top_row + k + 1, top_row + k, np.full(nx, TOP)])
    right = np.column_stack([l * (nx + 1) + nx, (l + 1) * (nx + 1) + nx, np.full(ny, RIGHT)])
    left = np.column_stack([(l + 1) * (nx + 1), l * (nx + 1), np.full(ny, LEFT)])
    edges = np.concatenate([bottom, right, top, left])

    mesh = Mesh.from_arrays(nodes, cells, edges, name=name)
    logger.debug(f"Generated {mesh.topology.n_cells} triangles on [{x0}, {x1}] x [{y0}, {y1}]")
    return mesh
