"""
Scheme levels of the MOOD cascade and the per-step level map.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Any, Dict, List

import numpy as np

from hyperlag.errors import ConfigurationError
from hyperlag.mesh.topology import MeshTopology

logger = logging.getLogger(__name__)


class SchemeLevel(IntEnum):
    """Rungs of the cascade; larger is more accurate."""
    P0 = 0
    P1_BJ = 1
    P1 = 2


class Cascade(Enum):
    """Available cascades"""
    THREE_LEVEL = "P1-P1BJ-P0"
    TWO_LEVEL = "P1-P0"

    @property
    def rungs(self) -> List[SchemeLevel]:
        if self is Cascade.THREE_LEVEL:
            return [SchemeLevel.P1, SchemeLevel.P1_BJ, SchemeLevel.P0]
        return [SchemeLevel.P1, SchemeLevel.P0]

    @classmethod
    def parse(cls, name: str) -> "Cascade":
        try:
            return cls(name)
        except ValueError as e:
            raise ConfigurationError(f"Unknown cascade '{name}', expected one of {[c.value for c in cls]}") from e


def next_level_table(cascade: Cascade) -> np.ndarray:
    """Lookup table level -> next rung down (P0 maps to itself)."""
    table = np.zeros(len(SchemeLevel), dtype=np.int8)
    rungs = cascade.rungs
    for hi, lo in zip(rungs[:-1], rungs[1:]):
        table[hi] = lo
    table[SchemeLevel.P0] = SchemeLevel.P0
    return table


@dataclass
class SchemeLevelMap:
    """Per-cell cascade level and troubled bookkeeping for one time step."""
    levels: np.ndarray
    troubled: np.ndarray
    reasons: np.ndarray
    cascade: Cascade = Cascade.THREE_LEVEL
    iterations: int = 0
    recomputed: int = 0  # cells recomputed after the first candidate
    history: List[int] = field(default_factory=list)

    @classmethod
    def fresh(cls, n_cells: int, cascade: Cascade = Cascade.THREE_LEVEL) -> "SchemeLevelMap":
        return cls(
            levels=np.full(n_cells, cascade.rungs[0], dtype=np.int8),
            troubled=np.zeros(n_cells, dtype=bool),
            reasons=np.zeros(n_cells, dtype=np.int8),
            cascade=cascade,
        )

    @property
    def n_cells(self) -> int:
        return int(self.levels.shape[0])

    def counts(self) -> Dict[str, int]:
        return {
            "P0": int(np.sum(self.levels == SchemeLevel.P0)),
            "P1BJ": int(np.sum(self.levels == SchemeLevel.P1_BJ)),
            "P1": int(np.sum(self.levels == SchemeLevel.P1)),
        }

    @property
    def troubled_count(self) -> int:
        """Cells troubled at least once during the step."""
        return int(self.troubled.sum())

    @property
    def troubled_fraction(self) -> float:
        return self.troubled_count / max(self.n_cells, 1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iterations": self.iterations,
            "troubled": self.troubled_count,
            "recomputed": self.recomputed,
            **self.counts(),
        }


def decrement(level_map: SchemeLevelMap, troubled: np.ndarray, topology: MeshTopology) -> np.ndarray:
    """
    Drop each troubled cell one rung and return the recompute set.

    The recompute set is the troubled cells plus their face neighbours;
    neighbours keep their level. Cells already at P0 stay there.

    Returns:
        Sorted cell ids to recompute
    """
    troubled = np.asarray(troubled, dtype=bool)
    if not troubled.any():
        return np.empty(0, dtype=np.int64)
    table = next_level_table(level_map.cascade)
    level_map.levels[troubled] = table[level_map.levels[troubled]]
    level_map.troubled |= troubled

    ids = np.flatnonzero(troubled)
    neighbors = topology.cell_neighbors[ids].reshape(-1)
    recompute = np.union1d(ids, neighbors[neighbors >= 0])
    level_map.history.append(int(ids.size))
    return recompute
