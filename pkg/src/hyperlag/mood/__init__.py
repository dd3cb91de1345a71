"""A-posteriori detection and the MOOD cascade."""

from hyperlag.mood.levels import Cascade, SchemeLevel, SchemeLevelMap, decrement

__all__ = ["Cascade", "SchemeLevel", "SchemeLevelMap", "decrement"]
