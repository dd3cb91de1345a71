import math

import numpy as np
import pytest

from hyperlag.driver.convergence import convergence_order, l2_error_and_order, run_convergence
from hyperlag.driver.testcases import init_testcase
from hyperlag.errors import ConfigurationError


def test_observed_order():
    assert convergence_order(3.085e-4, 2.212e-4, 3.13e-2, 2.60e-2) == pytest.approx(1.793, abs=1e-3)
    assert convergence_order(4.0, 1.0, 2.0, 1.0) == pytest.approx(2.0)


def test_undefined_orders_are_nan():
    assert math.isnan(convergence_order(1.0, 0.5, 0.1, 0.1))
    assert math.isnan(convergence_order(0.0, 0.5, 0.2, 0.1))
    table = l2_error_and_order([(0.1, {"u": 1.0, "B11": 2.0, "T11": 3.0})])
    assert len(table) == 1
    assert table[["order_u", "order_B11", "order_T11"]].isna().all(axis=None)


def test_table_layout():
    runs = [(0.2, {"u": 4e-3, "B11": 1e-3, "T11": 8.0}), (0.1, {"u": 1e-3, "B11": 5e-4, "T11": 2.0})]
    table = l2_error_and_order(runs)
    assert list(table.columns) == ["L", "err_u", "order_u", "err_B11", "order_B11", "err_T11", "order_T11"]
    assert table["order_u"].iloc[1] == pytest.approx(2.0)
    assert table["order_B11"].iloc[1] == pytest.approx(1.0)


def test_run_convergence_requires_an_exact_solution():
    with pytest.raises(ConfigurationError):
        run_convergence(lambda k: init_testcase("uniform_block"), 2)
    with pytest.raises(ConfigurationError):
        run_convergence(lambda k: init_testcase("swinging_plate"), 0)


def test_run_convergence_smoke():
    def make_case(k):
        return init_testcase("swinging_plate", nx=2 * 2 ** k, ny=2 * 2 ** k, t_final=1e-4)

    table = run_convergence(make_case, 2)
    assert table["level"].tolist() == [0, 1]
    assert table["cells"].tolist() == [8, 32]
    assert table["L"].iloc[1] < table["L"].iloc[0]
    assert np.isfinite(table[["err_u", "err_B11", "err_T11"]].to_numpy()).all()
