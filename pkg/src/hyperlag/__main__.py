#!/usr/bin/env python3
"""
hyperlag command line

    python -m hyperlag run config.yaml
    python -m hyperlag convergence config.yaml --levels 3
    python -m hyperlag mesh-info mesh.msh
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from hyperlag import __version__
from hyperlag.config import get_settings, load_config
from hyperlag.driver.convergence import run_convergence
from hyperlag.driver.runner import build_case, run_config, simulation_options
from hyperlag.errors import HyperlagError
from hyperlag.mesh.io import read_mesh
from hyperlag.mesh.summary import mesh_summary

logger = logging.getLogger("hyperlag")


def setup_argparse() -> argparse.ArgumentParser:
    """Set up command line argument parser."""
    parser = argparse.ArgumentParser(
        prog="hyperlag",
        description="Cell-centered Lagrangian solver for hyperelastic solids",
        epilog="Example: python -m hyperlag run configs/swinging_plate.yaml",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None,
                        help="DEBUG, INFO, WARNING or ERROR (default: LOG_LEVEL or INFO)")

    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    run_parser = subparsers.add_parser("run", help="Run a configured problem to its final time")
    run_parser.add_argument("config", help="YAML run configuration")

    conv_parser = subparsers.add_parser("convergence", help="Mesh-convergence study on nested refinements")
    conv_parser.add_argument("config", help="YAML run configuration")
    conv_parser.add_argument("--levels", type=int, default=3, help="Number of meshes (default: 3)")

    info_parser = subparsers.add_parser("mesh-info", help="Print mesh statistics")
    info_parser.add_argument("mesh", help="Mesh file (.msh or native ASCII)")

    return parser


def configure_logging(level: Optional[str]) -> None:
    level = (level or get_settings().LOG_LEVEL).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        force=True,
    )


def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    result = run_config(config)
    print(json.dumps(result.to_dict(), indent=2))
    return result.exit_status


def cmd_convergence(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    options = simulation_options(config)
    output_dir = Path(options["output_dir"])
    # nested runs only report errors
    options.update(output_dir=None, output_every=0, vtk=False)
    table = run_convergence(lambda k: build_case(config, refine=k), args.levels, options)
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / "convergence.csv"
    table.to_csv(path, index=False, float_format="%.17g")
    logger.info(f"Wrote {path}")
    print(table.to_string(index=False))
    return 0


def cmd_mesh_info(args: argparse.Namespace) -> int:
    mesh = read_mesh(args.mesh)
    print(json.dumps(mesh_summary(mesh), indent=2))
    return 0


COMMANDS = {
    "run": cmd_run,
    "convergence": cmd_convergence,
    "mesh-info": cmd_mesh_info,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    parser = setup_argparse()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    if not args.command:
        parser.print_help()
        return 2

    try:
        return COMMANDS[args.command](args)
    except HyperlagError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1
    except KeyboardInterrupt:
        logger.info("Interrupted")
        return 130


if __name__ == "__main__":
    sys.exit(main())
