import numpy as np

from hyperlag.driver.output import SnapshotWriter, write_vtk
from hyperlag.state import CellState

SECTIONS = [
    "POINTS 25 double",
    "CELLS 32 128",
    "CELL_TYPES 32",
    "CELL_DATA 32",
    "SCALARS rho double 1",
    "SCALARS p double 1",
    "SCALARS level int 1",
    "TENSORS B double",
    "TENSORS T double",
    "POINT_DATA 25",
    "VECTORS velocity double",
]


def test_vtk_layout(tmp_path, unit_square, unit_material):
    state = CellState.uniform(32, 2.0)
    levels = np.arange(32) % 3
    path = write_vtk(tmp_path / "out" / "s.vtk", unit_square.coords, unit_square.cells, state, unit_material,
                     levels=levels, node_velocity=np.ones((25, 2)))
    lines = path.read_text().splitlines()
    assert lines[0] == "# vtk DataFile Version 2.0"
    assert lines[2:4] == ["ASCII", "DATASET UNSTRUCTURED_GRID"]
    positions = [lines.index(s) for s in SECTIONS]
    assert positions == sorted(positions)

    start = lines.index("CELLS 32 128") + 1
    assert lines[start] == "3 " + " ".join(str(i) for i in unit_square.cells[0])
    rho = lines.index("SCALARS rho double 1") + 2
    assert float(lines[rho]) == 2.0
    level = lines.index("SCALARS level int 1") + 2
    assert [int(v) for v in lines[level:level + 32]] == levels.tolist()
    assert lines[-1] == "1 1 0"


def test_snapshot_writer(tmp_path, unit_square, unit_material):
    state = CellState.uniform(32, 1.0)
    writer = SnapshotWriter(tmp_path, prefix="block")
    first = writer.write(0.0, unit_square.coords, unit_square.cells, state, unit_material)
    second = writer.write(0.5, unit_square.coords, unit_square.cells, state, unit_material)
    assert [first.name, second.name] == ["block_0000.vtk", "block_0001.vtk"]
    assert "block t=0.5" in second.read_text().splitlines()[1]

    disabled = SnapshotWriter(tmp_path / "none", enabled=False)
    assert disabled.write(0.0, unit_square.coords, unit_square.cells, state, unit_material) is None
    assert not (tmp_path / "none").exists()
