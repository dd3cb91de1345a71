import json

import pandas as pd
import pytest
import yaml

from hyperlag import __version__
from hyperlag.__main__ import main, setup_argparse
from hyperlag.mesh.io import write_ascii


def write_config(path, output_dir, **blocks):
    data = {
        "version": 1,
        "testcase": {"name": "uniform_block"},
        "mesh": {"generate": {"nx": 2, "ny": 2}},
        "time": {"t_final": 0.05},
        "output": {"directory": str(output_dir)},
        **blocks,
    }
    path.write_text(yaml.safe_dump(data))
    return path


def test_parser():
    args = setup_argparse().parse_args(["convergence", "run.yaml"])
    assert args.command == "convergence"
    assert args.levels == 3


def test_version(capsys):
    with pytest.raises(SystemExit) as exit_info:
        main(["--version"])
    assert exit_info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_no_command_prints_help():
    assert main([]) == 2


def test_mesh_info(tmp_path, unit_square, capsys):
    path = tmp_path / "square.mesh"
    write_ascii(unit_square, path)
    assert main(["mesh-info", str(path)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["cells"] == 32
    assert summary["euler_characteristic"] == 1
    assert summary["total_volume"] == pytest.approx(1.0)


def test_run(tmp_path, capsys):
    out = tmp_path / "out"
    config = write_config(tmp_path / "run.yaml", out)
    assert main(["--log-level", "WARNING", "run", str(config)]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["completed"]
    assert result["name"] == "uniform_block"
    assert (out / "diag.csv").exists()
    assert (out / "uniform_block_0000.vtk").exists()


def test_run_stopped_by_max_steps(tmp_path):
    # 2x2 block needs more than one step to reach t_final at CFL 0.1
    config = write_config(tmp_path / "run.yaml", tmp_path / "out",
                          time={"t_final": 0.05, "cfl": 0.1, "max_steps": 1})
    assert main(["run", str(config)]) == 1


def test_bad_configuration_fails_cleanly(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"version": 7}))
    assert main(["run", str(bad)]) == 1
    assert main(["run", str(tmp_path / "missing.yaml")]) == 1
    assert main(["mesh-info", str(tmp_path / "missing.mesh")]) == 1


def test_convergence(tmp_path, capsys):
    out = tmp_path / "out"
    config = write_config(tmp_path / "run.yaml", out, testcase={"name": "swinging_plate"}, time={"t_final": 1e-4},
                          mesh={"generate": {"x1": 2.0, "y1": 2.0, "nx": 2, "ny": 2}})
    assert main(["convergence", str(config), "--levels", "2"]) == 0
    table = pd.read_csv(out / "convergence.csv")
    assert table["cells"].tolist() == [8, 32]
    assert "order_u" in table.columns
    assert not (out / "diag.csv").exists()
    assert "err_u" in capsys.readouterr().out
