from pathlib import Path

import pytest
import yaml

from hyperlag.config import RunConfig, Settings, load_config, parse_config
from hyperlag.driver.runner import build_case, simulation_options
from hyperlag.errors import ConfigurationError
from hyperlag.mesh.generate import BOTTOM
from hyperlag.mesh.io import write_ascii
from hyperlag.mood.levels import Cascade
from hyperlag.solver.boundary import BcKind

MINIMAL = {"version": 1, "testcase": {"name": "uniform_block"}}


def config(**blocks) -> RunConfig:
    return parse_config({**MINIMAL, **blocks})


def test_defaults():
    cfg = config()
    assert cfg.time.cfl == 0.4
    assert cfg.mood.cascade == "P1-P1BJ-P0"
    assert cfg.mood.delta0 == 1e-4 and cfg.mood.delta1 == 1e-3
    assert cfg.predictor.iterations == 2
    assert cfg.mesh is None and cfg.material is None
    assert cfg.boundary == {}


@pytest.mark.parametrize("data", [
    [1, 2, 3],
    {"testcase": {"name": "uniform_block"}},
    {"version": 2, "testcase": {"name": "uniform_block"}},
    {**MINIMAL, "solver": {}},
    {"version": 1, "testcase": {"name": "sod"}},
    {**MINIMAL, "time": {"cfl": 1.5}},
    {**MINIMAL, "mood": {"cascade": "P2-P1-P0"}},
    {**MINIMAL, "material": {"rho0": 1.0, "E": 1.0, "nu": 0.5}},
    {**MINIMAL, "mesh": {"path": "a.msh", "generate": {"nx": 2, "ny": 2}}},
    {**MINIMAL, "boundary": {1: {"kind": "glue"}}},
])
def test_invalid_configurations(data):
    with pytest.raises(ConfigurationError):
        parse_config(data)


def test_load_config(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump({**MINIMAL, "boundary": {1: {"kind": "symmetry_plane"}}}))
    cfg = load_config(path)
    assert cfg.boundary[1].kind == "symmetry_plane"

    with pytest.raises(ConfigurationError, match="Cannot read"):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("version: [1\n")
    with pytest.raises(ConfigurationError, match="Malformed YAML"):
        load_config(bad)


def test_build_case_with_generated_mesh_and_refinement():
    cfg = config(mesh={"generate": {"nx": 2, "ny": 2}})
    assert build_case(cfg).mesh.topology.n_cells == 8
    assert build_case(cfg, refine=1).mesh.topology.n_cells == 32
    cfg = config(mesh={"generate": {"nx": 2, "ny": 2}, "refine": 1})
    assert build_case(cfg, refine=1).mesh.topology.n_cells == 128


def test_build_case_refines_the_default_mesh():
    assert build_case(config(), refine=1).mesh.topology.n_cells == 4 * build_case(config()).mesh.topology.n_cells


def test_build_case_reads_a_mesh_file(tmp_path, unit_square):
    path = tmp_path / "square.mesh"
    write_ascii(unit_square, path)
    case = build_case(config(mesh={"path": str(path)}))
    assert case.mesh.topology.n_cells == 32


def test_build_case_overrides():
    cfg = config(
        material={"rho0": 2.0, "E": 3.0, "nu": 0.25},
        time={"t_final": 0.25},
        boundary={BOTTOM: {"kind": "symmetry_plane"}},
    )
    case = build_case(cfg)
    assert case.model.rho0 == 2.0
    assert case.model.mu == pytest.approx(1.2)
    assert case.t_final == 0.25
    assert case.boundary[BOTTOM].kind is BcKind.SYMMETRY_PLANE

    with pytest.raises(ConfigurationError, match="Boundary tag 9"):
        build_case(config(boundary={9: {"kind": "symmetry_plane"}}))
    with pytest.raises(ConfigurationError):
        build_case(config(testcase={"name": "uniform_block", "params": {"omega": 1.0}}))


def test_simulation_options():
    settings = Settings(HYPERLAG_OUTPUT_DIR="elsewhere")
    options = simulation_options(config(mood={"cascade": "P1-P0", "delta0": 1e-3}), settings)
    assert options["cascade"] is Cascade.TWO_LEVEL
    assert options["criteria"].delta0 == 1e-3
    assert options["output_dir"] == "elsewhere"
    options = simulation_options(config(output={"directory": "here"}), settings)
    assert options["output_dir"] == "here"


@pytest.mark.parametrize("path", sorted((Path(__file__).parent.parent / "configs").glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configurations_build(path):
    cfg = load_config(path)
    case = build_case(cfg)
    assert case.name == path.stem
    assert case.mesh.topology.n_cells > 0
