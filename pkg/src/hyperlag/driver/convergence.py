"""
Mesh-convergence study against an exact solution.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from hyperlag.driver.runner import Simulation
from hyperlag.driver.testcases import TestCase
from hyperlag.errors import ConfigurationError

logger = logging.getLogger(__name__)

VARIABLES = ("u", "B11", "T11")


def convergence_order(err_coarse: float, err_fine: float, length_coarse: float, length_fine: float) -> float:
    """log(e_i / e_{i+1}) / log(L_i / L_{i+1}); NaN when undefined."""
    if not (err_coarse > 0.0 and err_fine > 0.0 and length_coarse > 0.0 and length_fine > 0.0):
        return math.nan
    if length_coarse == length_fine:
        return math.nan
    return math.log(err_coarse / err_fine) / math.log(length_coarse / length_fine)


def l2_error_and_order(runs: Sequence[Tuple[float, Dict[str, float]]],
                       variables: Sequence[str] = VARIABLES) -> pd.DataFrame:
    """
    Error/order table.

    Args:
        runs: (characteristic length, {variable: L2 error}) from coarsest to finest

    Returns:
        DataFrame with columns L, err_<var>, order_<var>; the first row's orders
        are NaN, and so are all orders with fewer than two runs
    """
    rows = []
    for i, (length, errors) in enumerate(runs):
        row = {"L": length}
        for var in variables:
            row[f"err_{var}"] = errors[var]
            if i == 0:
                row[f"order_{var}"] = math.nan
            else:
                prev_length, prev = runs[i - 1]
                row[f"order_{var}"] = convergence_order(prev[var], errors[var], prev_length, length)
        rows.append(row)
    columns = ["L"] + [c for var in variables for c in (f"err_{var}", f"order_{var}")]
    return pd.DataFrame(rows, columns=columns)


def run_convergence(make_case: Callable[[int], TestCase], levels: int,
                    simulation_kwargs: Optional[Dict] = None) -> pd.DataFrame:
    """
    Run the same problem on ``levels`` nested meshes and tabulate errors and orders.

    Args:
        make_case: builds the problem on refinement level k (0 = coarsest)
        levels: number of meshes
        simulation_kwargs: forwarded to ``Simulation``

    Raises:
        ConfigurationError: fewer than one level or a problem without exact solution
    """
    if levels < 1:
        raise ConfigurationError(f"Convergence study needs at least one level, got {levels}")
    runs: List[Tuple[float, Dict[str, float]]] = []
    cells: List[int] = []
    for k in range(levels):
        case = make_case(k)
        if case.exact is None:
            raise ConfigurationError(f"Test case {case.name} has no exact solution")
        sim = Simulation(case, **(simulation_kwargs or {}))
        sim.run()
        errors = sim.errors()
        length = sim.characteristic_length()
        runs.append((length, errors))
        cells.append(case.mesh.topology.n_cells)
        logger.info(f"Level {k}: {cells[-1]} cells, L={length:.3e}, "
                    + ", ".join(f"e({v})={errors[v]:.3e}" for v in VARIABLES))
    table = l2_error_and_order(runs)
    table.insert(0, "cells", cells)
    table.insert(0, "level", list(range(levels)))
    if levels < 2:
        logger.info("Single level: convergence orders are undefined")
    return table
