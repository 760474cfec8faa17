#!/usr/bin/env python3
"""
UDN Capacity Toolkit - Main Entry Point
---------------------------------------
Coverage and capacity of ultra-dense downlink networks from the command line.

    python main.py limit --rho 300
    python main.py reproduce fig1 --output data/results/fig1.csv
    python main.py deploy --config configs/default.toml --workers 8
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

# Add the project root to the Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from core.errors import UdnError
from utils.logger import setup_logging
from utils.settings import get_settings

COMMANDS = ["limit", "coverage-sweep", "simulate", "ase-sweep", "deploy", "schedule"]
RECIPES = ["fig1", "fig2", "numbers"]


def _radius(value: str):
    if value == "auto":
        return value
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {value!r}") from None


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML run recipe")
    parser.add_argument("--output", help="CSV output path (default: stdout)")
    parser.add_argument("--metrics", help="Save collected performance metrics as JSON here")
    parser.add_argument("--workers", type=int, help="Worker processes for Monte Carlo trials")
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--no-progress", action="store_true", help="Hide progress bars")

    scenario = parser.add_argument_group("scenario")
    scenario.add_argument("--lambda", dest="lambda_", type=float, help="BS density, BSs/km^2")
    scenario.add_argument("--rho", type=float, help="UE density, UEs/km^2")
    scenario.add_argument("--height-m", type=float, help="Antenna height difference L, m")
    scenario.add_argument("--gamma-db", type=float, help="SINR threshold, dB")
    scenario.add_argument("--gamma0-db", type=float, help="Minimum working SINR for the ASE, dB")
    scenario.add_argument("--epsilon", type=float, help="Allowed relative ASE gap for deploy")
    scenario.add_argument("--q", type=float, help="Idle-mode exponent")
    scenario.add_argument("--engine", choices=["monte-carlo", "dense-approx"], help="Finite-density engine")
    scenario.add_argument("--radius-km", type=_radius, help="Simulation window radius in km, or 'auto'")


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(description="Coverage and capacity of ultra-dense networks")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_common(sub.add_parser(name))
    reproduce = sub.add_parser("reproduce", help="Built-in reproduction recipes")
    reproduce.add_argument("recipe", choices=RECIPES)
    _add_common(reproduce)
    return parser.parse_args(argv)


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Config keys set on the command line."""
    mapping = {
        ("scenario", "lambda_per_km2"): args.lambda_,
        ("scenario", "rho_per_km2"): args.rho,
        ("scenario", "height_m"): args.height_m,
        ("scenario", "gamma_db"): args.gamma_db,
        ("scenario", "gamma0_db"): args.gamma0_db,
        ("scenario", "epsilon"): args.epsilon,
        ("scenario", "q"): args.q,
        ("engine", "kind"): args.engine,
        ("engine", "trials"): args.trials,
        ("engine", "seed"): args.seed,
        ("engine", "workers"): args.workers,
        ("engine", "radius_km"): args.radius_km,
        ("engine", "progress"): False if args.no_progress else None,
        ("output", "path"): args.output,
        ("output", "metrics"): args.metrics,
    }
    overrides: Dict[str, Dict[str, Any]] = {}
    for (section, key), value in mapping.items():
        if value is not None:
            overrides.setdefault(section, {})[key] = value
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the application."""
    load_dotenv()
    args = parse_args(argv)
    settings = get_settings()

    setup_logging(
        level=args.log_level or settings.log_level,
        use_json=settings.log_json,
        log_dir=settings.log_dir,
        config_path=settings.log_config,
    )
    logger = logging.getLogger(__name__)

    from cli.commands import run
    from cli.config import load_config

    try:
        config = load_config(
            args.config,
            command=args.command,
            recipe=getattr(args, "recipe", None),
            overrides=overrides_from_args(args),
        )
        return run(config)
    except UdnError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        logger.debug(f"{type(e).__name__} details: {e.details}")
        return 2
    except Exception:
        logger.exception("Unexpected failure")
        return 1


if __name__ == "__main__":
    sys.exit(main())
