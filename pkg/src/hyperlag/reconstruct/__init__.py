"""Linear reconstruction, Barth-Jespersen limiting and the local space-time predictor."""

from hyperlag.reconstruct.limiting import (
    LinearPoly,
    barth_jespersen,
    least_squares_gradient,
    least_squares_gradients,
    reconstruct,
    vertex_neighborhood_bounds,
)
from hyperlag.reconstruct.predictor import SpaceTimePredictor, ader_predict

__all__ = [
    "LinearPoly",
    "SpaceTimePredictor",
    "ader_predict",
    "barth_jespersen",
    "least_squares_gradient",
    "least_squares_gradients",
    "reconstruct",
    "vertex_neighborhood_bounds",
]
