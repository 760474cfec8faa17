"""
Command Runners
---------------
One function per CLI command. Each returns the result table; run() writes
it with provenance and saves metrics when asked.
"""

import math
import uuid
from typing import Any, Callable, Dict, List

import pandas as pd

from cli.config import RunConfig
from cli.output import quantity_table, write_csv
from core.analytic import coverage_limit, dense_coverage_approx, power_law_factors
from core.capacity import (
    LimitAseProfile,
    ase_finite,
    ase_limit,
    linear_scaling_ase,
    solve_bs_deployment,
    solve_ue_scheduling,
)
from core.channel import PathLossModel
from core.deployment import NetworkParams, active_bs_density, db_to_linear
from core.errors import DivergenceError
from core.simulator import CoverageEstimate, estimate_coverage, simulate_trials
from monitoring.metrics import save_metrics
from monitoring.performance import report_stats
from utils.logger import RunLogger, get_logger

logger = get_logger(__name__)

CommandFn = Callable[[RunConfig, PathLossModel, RunLogger], pd.DataFrame]

TIMED_CATEGORIES = ("analytic", "capacity", "simulator")


LIMIT_COLUMNS = ["rho", "height_m", "gamma_db", "pcov_limit", "c", "g", "ase_limit"]
COVERAGE_COLUMNS = ["lambda", "rho", "gamma_db", "pcov_limit", "pcov_dense_approx", "c", "g",
                    "height_m", "pcov_mc", "pcov_stderr"]
SIMULATE_COLUMNS = ["lambda", "rho", "height_m", "gamma_db", "pcov_mc", "pcov_stderr", "active_density_mc",
                    "trials", "seed", "radius_km", "active_density_law", "resample_rate"]


def _mc_kwargs(config: RunConfig) -> Dict[str, Any]:
    engine = config.engine
    return {
        "radius": None if engine.radius_km == "auto" else float(engine.radius_km),
        "tail_fraction": engine.tail_fraction,
        "workers": engine.workers,
        "progress": engine.progress,
        "quad": engine.quadrature(),
    }


def _ase_limit_or_inf(params: NetworkParams, model: PathLossModel, quad) -> float:
    try:
        return ase_limit(params, model, quad=quad)
    except DivergenceError:
        logger.warning(f"ASE limit diverges at L = {params.height_km * 1000.0:g} m; reporting inf")
        return math.inf


def limit_table(config: RunConfig, model: PathLossModel, run_log: RunLogger) -> pd.DataFrame:
    """Dense-network coverage limit with its power-law factors and the ASE limit."""
    scenario, sweep, quad = config.scenario, config.sweep, config.engine.quadrature()
    rows: List[Dict[str, Any]] = []
    for height in sweep.heights(scenario.height_m):
        for rho in sweep.rhos(scenario.rho_per_km2):
            params = scenario.to_params(rho_per_km2=rho, height_m=height)
            ase = _ase_limit_or_inf(params, model, quad)
            for gamma_db in sweep.gammas_db(scenario.gamma_db):
                gamma = db_to_linear(gamma_db)
                factors = power_law_factors(params, model, gamma, quad)
                rows.append({
                    "rho": rho, "height_m": height, "gamma_db": gamma_db,
                    "pcov_limit": coverage_limit(params, model, gamma, quad),
                    "c": factors.c, "g": factors.g, "ase_limit": ase,
                })
    return pd.DataFrame(rows, columns=LIMIT_COLUMNS)


def coverage_sweep(config: RunConfig, model: PathLossModel, run_log: RunLogger) -> pd.DataFrame:
    """Coverage versus BS density from all three engines."""
    scenario, sweep, engine = config.scenario, config.sweep, config.engine
    quad = engine.quadrature()
    use_mc = engine.kind == "monte-carlo"
    rows: List[Dict[str, Any]] = []
    for height in sweep.heights(scenario.height_m):
        for rho in sweep.rhos(scenario.rho_per_km2):
            for gamma_db in sweep.gammas_db(scenario.gamma_db):
                gamma = db_to_linear(gamma_db)
                run_log.start_step(f"coverage L={height:g}m rho={rho:g} gamma={gamma_db:g}dB")
                base = scenario.to_params(rho_per_km2=rho, height_m=height)
                limit = coverage_limit(base, model, gamma, quad)
                factors = power_law_factors(base, model, gamma, quad)
                for lam in sweep.lambdas():
                    params = base.replace(bs_density=float(lam))
                    mc, se = math.nan, math.nan
                    if use_mc and lam >= sweep.mc_min_lambda:
                        est = estimate_coverage(params, model, gamma, engine.trials, engine.seed, **_mc_kwargs(config))
                        mc, se = est.mean, est.std_error
                    rows.append({
                        "lambda": float(lam), "rho": rho, "gamma_db": gamma_db, "pcov_limit": limit,
                        "pcov_dense_approx": dense_coverage_approx(params, model, gamma, quad),
                        "c": factors.c, "g": factors.g,
                        "height_m": height, "pcov_mc": mc, "pcov_stderr": se,
                    })
    return pd.DataFrame(rows, columns=COVERAGE_COLUMNS)


def simulate_table(config: RunConfig, model: PathLossModel, run_log: RunLogger) -> pd.DataFrame:
    """One Monte Carlo run: coverage and active-BS density."""
    scenario, engine = config.scenario, config.engine
    params = scenario.to_params()
    run_log.start_step("simulate")
    batch = simulate_trials(params, model, engine.trials, engine.seed, **_mc_kwargs(config))
    coverage = CoverageEstimate.from_indicators(batch.sinr > scenario.gamma, scenario.gamma)
    per_trial = batch.n_active / batch.window_area
    run_log.log_metric("resamples", batch.resamples)
    run_log.log_metric("radius_km", batch.radius_km, "km")
    row = {
        "lambda": params.bs_density, "rho": params.ue_density, "height_m": scenario.height_m,
        "gamma_db": scenario.gamma_db, "pcov_mc": coverage.mean, "pcov_stderr": coverage.std_error,
        "active_density_mc": float(per_trial.mean()), "trials": batch.trials, "seed": batch.seed,
        "radius_km": batch.radius_km,
        "active_density_law": active_bs_density(params.bs_density, params.ue_density, params.idle_exponent),
        "resample_rate": batch.diagnostics["resample_rate"],
    }
    return pd.DataFrame([row], columns=SIMULATE_COLUMNS)


def ase_sweep(config: RunConfig, model: PathLossModel, run_log: RunLogger,
              with_linear: bool = False) -> pd.DataFrame:
    """ASE versus BS density next to its dense-network limit."""
    scenario, sweep, engine_cfg = config.scenario, config.sweep, config.engine
    quad = engine_cfg.quadrature()
    engine = engine_cfg.spec()
    lambdas = sweep.lambdas()
    rows: List[Dict[str, Any]] = []
    for rho in sweep.rhos(scenario.rho_per_km2):
        run_log.start_step(f"ase rho={rho:g}")
        base = scenario.to_params(rho_per_km2=rho)
        floor = active_bs_density(float(lambdas[0]), rho, base.idle_exponent)
        profile = LimitAseProfile.build(base, model, min_density=floor, quad=quad)
        limit = ase_limit(base, model, quad=quad, profile=profile)
        for lam in lambdas:
            params = base.replace(bs_density=float(lam))
            value, error = math.nan, math.nan
            if engine.kind == "dense-approx" or lam >= sweep.mc_min_lambda:
                est = ase_finite(params, model, engine=engine, quad=quad, profile=profile)
                value, error = est.value, est.std_error
            row = {"lambda": float(lam), "rho": rho, "gamma0_db": scenario.gamma0_db, "ase": value,
                   "ase_limit": limit, "engine": engine.kind, "uncertainty": error}
            if with_linear:
                row["ase_linear"] = linear_scaling_ase(float(lam), model.outer.alpha_nlos, base.gamma0)
            rows.append(row)
    columns = ["lambda", "rho", "gamma0_db", "ase", "ase_limit", "engine", "uncertainty"]
    return pd.DataFrame(rows, columns=columns + (["ase_linear"] if with_linear else []))


def deploy_table(config: RunConfig, model: PathLossModel, run_log: RunLogger) -> pd.DataFrame:
    """Smallest BS density within epsilon of the ASE limit."""
    sweep = config.sweep
    params = config.scenario.to_params()
    run_log.start_step("deploy")
    solution = solve_bs_deployment(params, model, engine=config.engine.spec(), quad=config.engine.quadrature(),
                                   lambda_range=(sweep.lambda_min, sweep.lambda_max),
                                   points_per_decade=sweep.lambda_per_decade)
    diag = solution.diagnostics
    for key in ("verification_ase", "verification_gap"):
        if key in diag:
            run_log.log_metric(key, diag[key])
    rows = [
        ("lambda_star", solution.located_value),
        ("target_ase", solution.target),
        ("achieved_ase", solution.achieved_ase),
        ("limit_ase", diag["limit"]),
        ("gap", diag["gap"]),
        ("iterations", solution.iterations),
        ("bracket_low", solution.bracketing[0]),
        ("bracket_high", solution.bracketing[1]),
        ("ssr_density", solution.ssr_density),
    ]
    if "verified" in diag:
        rows += [("verification_ase", diag["verification_ase"]),
                 ("verification_std_error", diag["verification_std_error"]),
                 ("verified", int(diag["verified"]))]
    return quantity_table(rows)


def schedule_table(config: RunConfig, model: PathLossModel, run_log: RunLogger) -> pd.DataFrame:
    """ASE-maximising UE density."""
    sweep, engine = config.sweep, config.engine
    params = config.scenario.to_params()
    rho_range = (sweep.rho_min, sweep.rho_max) if sweep.rho_min is not None else None
    run_log.start_step("schedule")
    solution = solve_ue_scheduling(params, model, engine=engine.spec() if engine.kind == "monte-carlo" else None,
                                   quad=engine.quadrature(), rho_range=rho_range)
    return quantity_table([
        ("rho_star", solution.located_value),
        ("ase_max", solution.achieved_ase),
        ("ssr_density", solution.ssr_density),
        ("iterations", solution.iterations),
        ("bracket_low", solution.bracketing[0]),
        ("bracket_high", solution.bracketing[1]),
        ("unimodal", int(solution.diagnostics["unimodal"])),
    ])


def numbers_table(config: RunConfig, model: PathLossModel, run_log: RunLogger) -> pd.DataFrame:
    """Headline values: coverage and ASE limits, deployment target, scheduling optimum."""
    scenario, quad = config.scenario, config.engine.quadrature()
    rows = []
    run_log.start_step("coverage limits")
    for rho in config.sweep.rhos(scenario.rho_per_km2):
        params = scenario.to_params(rho_per_km2=rho)
        rows.append((f"coverage_limit_rho{rho:g}", coverage_limit(params, model, scenario.gamma, quad)))

    run_log.start_step("ase limit")
    params = scenario.to_params()
    limit = ase_limit(params, model, quad=quad)
    rows += [(f"ase_limit_rho{scenario.rho_per_km2:g}", limit),
             ("deployment_target_ase", (1.0 - params.epsilon) * limit)]

    run_log.start_step("schedule")
    solution = solve_ue_scheduling(params, model, quad=quad)
    rows += [("rho_star", solution.located_value),
             ("ase_max", solution.achieved_ase),
             ("ssr_density_star", solution.ssr_density)]
    return quantity_table(rows)


COMMANDS: Dict[str, CommandFn] = {
    "limit": limit_table,
    "coverage-sweep": coverage_sweep,
    "simulate": simulate_table,
    "ase-sweep": ase_sweep,
    "deploy": deploy_table,
    "schedule": schedule_table,
}

RECIPE_COMMANDS: Dict[str, CommandFn] = {
    "fig1": coverage_sweep,
    "fig2": lambda config, model, run_log: ase_sweep(config, model, run_log, with_linear=True),
    "numbers": numbers_table,
}


def log_timings(run_log: RunLogger) -> None:
    """Copy the tracked call timings of the core modules into the run log."""
    for category in TIMED_CATEGORIES:
        for name, stats in sorted(report_stats(category).items()):
            run_log.log_metric(f"{category}.{name}", f"{stats['count']} calls, mean {stats['mean']:.4g}", "s")


def run(config: RunConfig) -> int:
    """
    Execute one command and write its table.

    Returns:
        Exit status (0 on success); failures propagate as exceptions
    """
    label = f"reproduce {config.recipe}" if config.recipe else config.command
    handler = RECIPE_COMMANDS[config.recipe] if config.recipe else COMMANDS[config.command]
    run_log = RunLogger(f"{label.replace(' ', '-')}-{uuid.uuid4().hex[:8]}", context={"command": label})
    logger.info(f"Running {label}")

    try:
        model = config.model.build()
        frame = handler(config, model, run_log)
        run_log.start_step("write")
        write_csv(frame, config.output.path, label, config.provenance())
        log_timings(run_log)
        if config.output.metrics is not None:
            save_metrics(config.output.metrics)
    except Exception as e:
        run_log.finish(status="failed", error=e)
        raise

    summary = run_log.finish()
    logger.info(f"{label} finished in {summary['duration']:.2f} s")
    return 0
