"""
Capacity
--------
Area spectral efficiency (ASE) from coverage curves, its dense-network
limit, and the two design problems built on it: how many BSs to deploy for a
given UE density, and how many UEs to schedule for a given BS density.

The ASE is evaluated in its integrated-by-parts form

    ASE = ssr/ln2 * int_{gamma0}^inf p(gamma)/(1+gamma) dgamma
          + ssr * log2(1+gamma0) * p(gamma0)

with the integral taken by the trapezoid rule in t = ln(1+gamma).
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import integrate

from core.analytic import LimitRegime, limit_regime, power_law_factors
from core.channel import PathLossModel
from core.deployment import NetworkParams, active_bs_density
from core.errors import DivergenceError, DomainError, NoSolutionError, NumericalError
from core.quadrature import QuadratureSpec
from core.search import bisect_crossing, golden_section_max, is_unimodal
from monitoring.performance import PerformanceTracker
from utils.logger import get_logger

logger = get_logger(__name__)
tracker = PerformanceTracker(category="capacity")

LN2 = math.log(2.0)
ASE_GRID_POINTS = 120
# The limit-curve grid ends where coverage drops below this value.
COVERAGE_FLOOR = 1e-4
# A curve ending above this value gets a warning about its tail estimate.
TAIL_FLOOR = 1e-3
MAX_GRID_DOUBLINGS = 120


@dataclass(frozen=True)
class CoverageCurve:
    """
    Tabulated coverage probability over increasing SINR thresholds.

    Curves built from Monte Carlo keep the sorted SINR samples so that ASE
    uncertainties can be computed per trial.
    """

    gammas: np.ndarray
    values: np.ndarray
    errors: Optional[np.ndarray] = None
    samples: Optional[np.ndarray] = None

    def __post_init__(self):
        gammas = np.asarray(self.gammas, dtype=float).ravel()
        values = np.asarray(self.values, dtype=float).ravel()
        if gammas.size == 0 or gammas.size != values.size:
            raise DomainError(f"coverage curve needs equal, non-empty grids "
                              f"(got {gammas.size} thresholds, {values.size} values)")
        if np.any(gammas <= 0) or np.any(np.diff(gammas) <= 0):
            raise DomainError("coverage curve thresholds must be positive and strictly increasing")
        if np.any(values < -1e-12) or np.any(values > 1 + 1e-12):
            raise DomainError("coverage values must lie in [0, 1]")
        if np.any(np.diff(values) > 1e-12):
            raise DomainError("coverage values must be non-increasing in gamma")
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "values", np.clip(values, 0.0, 1.0))
        if self.errors is not None:
            object.__setattr__(self, "errors", np.asarray(self.errors, dtype=float).ravel())
        if self.samples is not None:
            object.__setattr__(self, "samples", np.sort(np.asarray(self.samples, dtype=float).ravel()))

    def __len__(self) -> int:
        return self.gammas.size

    @classmethod
    def from_samples(cls, gammas: np.ndarray, samples: np.ndarray) -> "CoverageCurve":
        """Empirical CCDF of SINR samples with binomial standard errors."""
        ordered = np.sort(np.asarray(samples, dtype=float))
        n = ordered.size
        values = (n - np.searchsorted(ordered, gammas, side="right")) / n
        errors = np.sqrt(values * (1.0 - values) / n)
        return cls(gammas=gammas, values=values, errors=errors, samples=ordered)

    def at(self, gamma: float) -> float:
        """Coverage at gamma: exact for sampled curves, linear in ln(1+gamma) otherwise."""
        if self.samples is not None:
            return float(np.count_nonzero(self.samples > gamma)) / self.samples.size
        t = np.log1p(self.gammas)
        return float(np.interp(math.log1p(gamma), t, self.values))


class AseEstimate(BaseModel):
    """ASE in bps/Hz/km^2 with its uncertainty and tail contribution."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(ge=0)
    std_error: float = Field(default=0.0, ge=0)
    tail: float = Field(default=0.0, ge=0)
    ssr_density: float
    gamma0: float
    engine: str = "curve"


class EngineSpec(BaseModel):
    """How finite-lambda coverage curves are produced."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["monte-carlo", "dense-approx"] = "monte-carlo"
    trials: int = Field(default=2000, ge=1)
    seed: int = Field(default=1, ge=0)
    workers: Optional[int] = Field(default=None, ge=1)
    radius_km: Optional[float] = Field(default=None, gt=0)
    tail_fraction: float = Field(default=1e-3, gt=0, lt=1)
    progress: bool = False

    def verification(self) -> "EngineSpec":
        """Monte Carlo engine with doubled trials and an independent seed."""
        return self.model_copy(update={"kind": "monte-carlo", "trials": 2 * self.trials,
                                       "seed": self.seed + 1})


class DesignSolution(BaseModel):
    """Result of a design problem."""

    model_config = ConfigDict(frozen=True)

    located_value: float = Field(gt=0)
    achieved_ase: float = Field(ge=0)
    target: Optional[float] = None
    iterations: int = Field(ge=0)
    bracketing: Tuple[float, float]
    ssr_density: Optional[float] = None
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _bracket_contains_value(self) -> "DesignSolution":
        lo, hi = self.bracketing
        if not lo * (1 - 1e-9) <= self.located_value <= hi * (1 + 1e-9):
            raise ValueError(f"bracketing [{lo}, {hi}] does not contain {self.located_value}")
        return self


def ase_weights(gammas: np.ndarray) -> np.ndarray:
    """Trapezoid weights in t = ln(1+gamma) for the integral of p(gamma)/(1+gamma)."""
    t = np.log1p(np.asarray(gammas, dtype=float))
    weights = np.zeros_like(t)
    if t.size > 1:
        dt = np.diff(t)
        weights[:-1] += dt / 2.0
        weights[1:] += dt / 2.0
    return weights


def _restrict(curve: CoverageCurve, gamma0: float) -> Tuple[np.ndarray, np.ndarray]:
    gammas, values = curve.gammas, curve.values
    if gamma0 < gammas[0] * (1.0 - 1e-12):
        raise DomainError(f"coverage curve starts at {gammas[0]:.6g} and does not cover gamma0 = {gamma0:.6g}")
    if gamma0 >= gammas[-1]:
        raise DomainError(f"gamma0 = {gamma0:.6g} is not below the last threshold {gammas[-1]:.6g}")
    j = max(int(np.searchsorted(gammas, gamma0, side="right")), 1)
    head_gamma = gamma0 if abs(gammas[j - 1] - gamma0) > 1e-12 * gamma0 else gammas[j - 1]
    head_value = curve.at(gamma0) if head_gamma != gammas[j - 1] else values[j - 1]
    return (np.concatenate(([head_gamma], gammas[j:])),
            np.concatenate(([head_value], values[j:])))


def integrate_ase(curve: CoverageCurve, ssr_density: float, gamma0: float,
                  tail_floor: float = TAIL_FLOOR) -> AseEstimate:
    """
    ASE of a coverage curve with the tail beyond the last threshold closed
    by a local power-law fit.

    Raises:
        DomainError: if the curve does not cover gamma0
        DivergenceError: if the curve does not decay at its end
    """
    if ssr_density < 0:
        raise DomainError(f"SSR density must be non-negative, got {ssr_density}")
    gammas, values = _restrict(curve, gamma0)
    weights = ase_weights(gammas)
    body = float(np.dot(weights, values))

    tail = 0.0
    p_last = values[-1]
    if p_last > 0:
        kappa = -(math.log(p_last) - math.log(values[-2])) / (math.log(gammas[-1]) - math.log(gammas[-2]))
        if kappa <= 0:
            raise DivergenceError(
                f"coverage curve does not decay at gamma = {gammas[-1]:.4g} (p = {p_last:.4g}); ASE diverges",
                details={"p_last": p_last, "decay_exponent": kappa},
            )
        tail = p_last / kappa
        if p_last > tail_floor:
            logger.warning(f"coverage curve ends at p = {p_last:.3g} > {tail_floor:g}; "
                           f"tail estimate contributes {ssr_density * tail / LN2:.4g} bps/Hz/km^2")

    p0 = values[0]
    value = ssr_density * ((body + tail) / LN2 + math.log2(1.0 + gamma0) * p0)

    std_error = 0.0
    if curve.samples is not None and curve.samples.size > 1:
        # Trial i covers the grid points strictly below its SINR.
        cumulative = np.concatenate(([0.0], np.cumsum(weights)))
        covered = np.searchsorted(gammas, curve.samples, side="left")
        per_trial = cumulative[covered] / LN2 + math.log2(1.0 + gamma0) * (curve.samples > gamma0)
        std_error = ssr_density * float(per_trial.std(ddof=1)) / math.sqrt(curve.samples.size)
    elif curve.errors is not None:
        # Pointwise errors only: treat them as fully correlated.
        errors = np.interp(np.log1p(gammas), np.log1p(curve.gammas), curve.errors)
        std_error = ssr_density * (float(np.dot(weights, errors)) / LN2
                                   + math.log2(1.0 + gamma0) * float(errors[0]))

    return AseEstimate(value=value, std_error=std_error, tail=ssr_density * tail / LN2,
                       ssr_density=ssr_density, gamma0=gamma0)


def ase_from_curve(curve: CoverageCurve, ssr_density: float, gamma0: float) -> float:
    """ASE in bps/Hz/km^2 of a coverage curve at the given SSR density."""
    return integrate_ase(curve, ssr_density, gamma0).value


def ase_gamma_grid(gamma0: float, gamma_max: float, n_points: int = ASE_GRID_POINTS) -> np.ndarray:
    """Log-spaced SINR thresholds from gamma0 to gamma_max."""
    if not 0 < gamma0 < gamma_max:
        raise DomainError(f"ASE grid needs 0 < gamma0 < gamma_max, got [{gamma0}, {gamma_max}]")
    return np.geomspace(gamma0, gamma_max, n_points)


@dataclass(frozen=True)
class LimitAseProfile:
    """
    The dense-network coverage limit tabulated once per threshold grid.

    The limit is c(gamma) * g(gamma)^rho, so a single table of log c and
    log g serves every UE density at or above the density the grid was
    built for.
    """

    gammas: np.ndarray
    log_c: np.ndarray
    log_g: np.ndarray
    gamma0: float
    min_density: float

    @classmethod
    def build(cls, params: NetworkParams, model: PathLossModel, gamma0: Optional[float] = None,
              min_density: Optional[float] = None, quad: Optional[QuadratureSpec] = None,
              n_points: int = ASE_GRID_POINTS, floor: float = COVERAGE_FLOOR) -> "LimitAseProfile":
        """
        Tabulate the limit on a grid that reaches coverage below floor at
        min_density (default: the scenario's UE density).

        Raises:
            DivergenceError: if L = 0 (coverage is 1 at every threshold)
            NumericalError: if coverage never falls below floor
        """
        gamma0 = params.gamma0 if gamma0 is None else gamma0
        density = params.ue_density if min_density is None else min_density
        if params.height_km <= 0:
            raise DivergenceError("the ASE limit diverges for L = 0: coverage is 1 at every threshold")
        if not 0 < density < math.inf:
            raise DomainError(f"profile density must be positive and finite, got {density}")
        quad = quad or QuadratureSpec()

        log_floor = math.log(floor)
        gamma_max = 10.0 * gamma0
        for _ in range(MAX_GRID_DOUBLINGS):
            factors = power_law_factors(params, model, gamma_max, quad)
            if factors.log_c + density * factors.log_g < log_floor:
                break
            gamma_max *= 2.0
        else:
            raise NumericalError(
                f"limit coverage stays above {floor:g} up to gamma = {gamma_max:.4g}",
                details={"density": density, "gamma_max": gamma_max},
            )

        gammas = ase_gamma_grid(gamma0, gamma_max, n_points)
        table = [power_law_factors(params, model, float(g), quad) for g in gammas]
        logger.debug(f"limit profile: {n_points} thresholds up to {gamma_max:.4g} for density >= {density:.4g}")
        return cls(gammas=gammas,
                   log_c=np.array([f.log_c for f in table]),
                   log_g=np.array([f.log_g for f in table]),
                   gamma0=gamma0, min_density=density)

    def coverage(self, density: float) -> np.ndarray:
        values = np.exp(self.log_c + density * self.log_g)
        return np.minimum.accumulate(values)

    def curve(self, density: float) -> CoverageCurve:
        return CoverageCurve(gammas=self.gammas, values=self.coverage(density))

    def ase(self, density: float, ssr_density: Optional[float] = None) -> AseEstimate:
        """
        ASE of the power-law curve at interferer density `density`, weighted
        by ssr_density (default: the same density).
        """
        ssr = density if ssr_density is None else ssr_density
        if density == 0 or math.isinf(density):
            return AseEstimate(value=0.0, ssr_density=ssr if math.isfinite(ssr) else 0.0,
                               gamma0=self.gamma0, engine="limit")
        if density < self.min_density * (1.0 - 1e-9):
            logger.debug(f"density {density:.4g} is below the profile's {self.min_density:.4g}; "
                         f"tail estimate may dominate")
        estimate = integrate_ase(self.curve(density), ssr, self.gamma0)
        return estimate.model_copy(update={"engine": "limit"})


@tracker.track()
def ase_limit(params: NetworkParams, model: PathLossModel, gamma0: Optional[float] = None,
              quad: Optional[QuadratureSpec] = None,
              profile: Optional[LimitAseProfile] = None) -> float:
    """
    ASE in the lambda -> inf limit, in bps/Hz/km^2. Does not depend on lambda.

    rho = inf with L > 0 gives 0.

    Raises:
        DivergenceError: if L = 0
    """
    gamma0 = params.gamma0 if gamma0 is None else gamma0
    regime = limit_regime(params.height_km, params.ue_density)
    if regime in (LimitRegime.NEAR_FIELD_IDLE, LimitRegime.NEAR_FIELD_FULL_LOAD):
        raise DivergenceError("the ASE limit diverges for L = 0: coverage is 1 at every threshold")
    if regime is LimitRegime.HEIGHT_FULL_LOAD:
        return 0.0
    if profile is None:
        profile = LimitAseProfile.build(params, model, gamma0, params.ue_density, quad)
    return profile.ase(params.ue_density).value


@tracker.track()
def ase_finite(params: NetworkParams, model: PathLossModel, gamma0: Optional[float] = None,
               engine: Optional[EngineSpec] = None, quad: Optional[QuadratureSpec] = None,
               profile: Optional[LimitAseProfile] = None) -> AseEstimate:
    """
    ASE at a finite BS density, weighted by the active-BS density.

    The dense-approx engine uses the limit curve at the active-BS density;
    the monte-carlo engine builds the curve from simulated SINR samples.
    """
    gamma0 = params.gamma0 if gamma0 is None else gamma0
    engine = engine or EngineSpec()
    ssr = active_bs_density(params.bs_density, params.ue_density, params.idle_exponent)

    if engine.kind == "dense-approx":
        if profile is None:
            profile = LimitAseProfile.build(params, model, gamma0, ssr, quad)
        return profile.ase(ssr).model_copy(update={"engine": engine.kind})

    from core.simulator import simulate_trials

    batch = simulate_trials(params, model, engine.trials, engine.seed, radius=engine.radius_km,
                            tail_fraction=engine.tail_fraction, workers=engine.workers,
                            progress=engine.progress, quad=quad)
    top = max(10.0 * gamma0, 1.01 * float(batch.sinr.max()))
    curve = CoverageCurve.from_samples(ase_gamma_grid(gamma0, top), batch.sinr)
    estimate = integrate_ase(curve, ssr, gamma0)
    logger.debug(f"MC ASE at lambda={params.bs_density:g}, rho={params.ue_density:g}: "
                 f"{estimate.value:.5g} +- {estimate.std_error:.2g}")
    return estimate.model_copy(update={"engine": engine.kind})


def _relative_gap(limit: float, value: float) -> float:
    return abs(limit - value) / limit


@tracker.track()
def solve_bs_deployment(params: NetworkParams, model: PathLossModel, engine: Optional[EngineSpec] = None,
                        quad: Optional[QuadratureSpec] = None, lambda_range: Tuple[float, float] = (1e2, 1e6),
                        points_per_decade: int = 4, rel_tol: float = 0.01,
                        verify: bool = True) -> DesignSolution:
    """
    Smallest BS density beyond which the ASE stays within epsilon of its
    dense-network limit.

    The gap curve is not monotone, so a log grid is scanned from the top
    down to the first failing point; bisection then refines the last
    crossing. Every evaluation uses the same engine seed.

    Raises:
        NoSolutionError: if the gap exceeds epsilon at the top of the range
    """
    engine = engine or EngineSpec()
    eps = params.epsilon
    lo, hi = lambda_range
    if not 0 < lo < hi:
        raise DomainError(f"lambda range must satisfy 0 < lo < hi, got {lambda_range}")

    profile = LimitAseProfile.build(params, model, min_density=active_bs_density(lo, params.ue_density,
                                                                                 params.idle_exponent),
                                    quad=quad)
    limit = ase_limit(params, model, quad=quad, profile=profile)
    target = (1.0 - eps) * limit
    logger.info(f"ASE limit {limit:.5g} bps/Hz/km^2, target {target:.5g} (epsilon={eps:g})")

    evaluations: Dict[float, AseEstimate] = {}

    def evaluate(lam: float) -> AseEstimate:
        if lam not in evaluations:
            evaluations[lam] = ase_finite(params.replace(bs_density=lam), model, engine=engine,
                                          quad=quad, profile=profile)
        return evaluations[lam]

    def passes(lam: float) -> bool:
        return _relative_gap(limit, evaluate(lam).value) <= eps

    n_grid = int(round(points_per_decade * math.log10(hi / lo))) + 1
    grid = np.geomspace(lo, hi, n_grid)
    passing = failing = None
    for lam in grid[::-1]:
        lam = float(lam)
        if passes(lam):
            passing = lam
            continue
        failing = lam
        break
    logger.debug(f"lambda scan: {len(evaluations)} points, failing={failing}, passing={passing}")

    if passing is None:
        gap = _relative_gap(limit, evaluate(float(hi)).value)
        raise NoSolutionError(
            f"ASE gap {gap:.3g} exceeds epsilon={eps:g} at lambda={hi:g}",
            residual_gap=gap, details={"lambda_range": [lo, hi], "limit": limit},
        )

    iterations = len(evaluations)
    if failing is None:
        located, bracket = passing, (passing, passing)
    else:
        result = bisect_crossing(passes, failing, passing, rel_tol=rel_tol)
        located, bracket = result.x, result.bracket
        iterations += result.iterations

    achieved = evaluate(located)
    diagnostics: Dict[str, Any] = {
        "limit": limit,
        "gap": _relative_gap(limit, achieved.value),
        "engine": engine.kind,
        "scan": {f"{lam:.6g}": est.value for lam, est in sorted(evaluations.items())},
    }

    if verify:
        check = ase_finite(params.replace(bs_density=located), model, engine=engine.verification(), quad=quad)
        gap = _relative_gap(limit, check.value)
        verified = gap <= eps + 3.0 * check.std_error / limit
        diagnostics.update(verification_ase=check.value, verification_std_error=check.std_error,
                           verification_gap=gap, verified=verified)
        if not verified:
            logger.warning(f"verification at lambda={located:.5g}: gap {gap:.4f} exceeds "
                           f"epsilon={eps:g} by more than 3 standard errors")

    logger.info(f"lambda* = {located:.5g} BSs/km^2 after {iterations} evaluations")
    return DesignSolution(located_value=located, achieved_ase=achieved.value, target=target,
                          iterations=iterations, bracketing=bracket, ssr_density=achieved.ssr_density,
                          diagnostics=diagnostics)


@tracker.track()
def solve_ue_scheduling(params: NetworkParams, model: PathLossModel, gamma0: Optional[float] = None,
                        engine: Optional[EngineSpec] = None, quad: Optional[QuadratureSpec] = None,
                        rho_range: Optional[Tuple[float, float]] = None, grid_points: int = 25,
                        rel_tol: float = 0.005) -> DesignSolution:
    """
    UE density that maximises the ASE at the scenario's BS density.

    The objective is the limit ASE when lambda is infinite or far above the
    searched densities, and the dense-approx ASE otherwise. A coarse log grid
    checks unimodality before golden-section refinement; a non-unimodal
    profile returns the grid argmax instead.
    """
    gamma0 = params.gamma0 if gamma0 is None else gamma0
    lam, q = params.bs_density, params.idle_exponent
    lo, hi = rho_range or (10.0, min(1e4, lam))
    if not 0 < lo < hi <= lam:
        raise DomainError(f"rho range must satisfy 0 < lo < hi <= lambda, got [{lo}, {hi}] with lambda={lam:g}")

    use_limit = math.isinf(lam) or lam >= 100.0 * hi

    def ssr(rho: float) -> float:
        return rho if use_limit else active_bs_density(lam, rho, q)

    profile = LimitAseProfile.build(params, model, gamma0, ssr(lo), quad)
    evaluations = 0

    def objective(rho: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return profile.ase(ssr(rho)).value

    grid = np.geomspace(lo, hi, grid_points)
    values = [objective(float(r)) for r in grid]
    k = int(np.argmax(values))
    bracket = (float(grid[max(k - 1, 0)]), float(grid[min(k + 1, grid.size - 1)]))
    diagnostics: Dict[str, Any] = {"objective": "limit" if use_limit else "dense-approx",
                                   "unimodal": is_unimodal(values)}

    if not diagnostics["unimodal"]:
        logger.warning(f"ASE profile over rho in [{lo:g}, {hi:g}] is not unimodal; returning the grid argmax")
        diagnostics["grid"] = {f"{r:.6g}": v for r, v in zip(grid, values)}
        located, best = float(grid[k]), float(values[k])
    else:
        result = golden_section_max(objective, bracket[0], bracket[1], rel_tol=rel_tol)
        located, best, bracket = result.x, result.fx, result.bracket
        if values[k] > best:
            located, best = float(grid[k]), float(values[k])
            bracket = (min(bracket[0], located), max(bracket[1], located))

    if engine is not None and engine.kind == "monte-carlo" and not use_limit:
        checks = {
            f"{rho:.6g}": ase_finite(params.replace(ue_density=rho), model, gamma0, engine, quad)
            for rho in (bracket[0], located, bracket[1])
        }
        centre = checks[f"{located:.6g}"]
        for key, est in checks.items():
            if est.value > centre.value + 3.0 * math.hypot(est.std_error, centre.std_error):
                logger.warning(f"MC ASE at rho={key} exceeds the located optimum beyond 3 standard errors")
        diagnostics["mc_checks"] = {key: [est.value, est.std_error] for key, est in checks.items()}

    implied = active_bs_density(lam, located, q)
    logger.info(f"rho* = {located:.5g} UEs/km^2, ASE {best:.5g}, SSR density {implied:.5g}")
    return DesignSolution(located_value=located, achieved_ase=best, target=None,
                          iterations=evaluations, bracketing=bracket, ssr_density=implied,
                          diagnostics=diagnostics)


@lru_cache(maxsize=4096)
def linear_scaling_coverage(gamma: float, alpha: float) -> float:
    """
    Coverage of a fully loaded, single-slope, noise-free network with
    nearest-BS association and Rayleigh fading. Does not depend on density.
    """
    if alpha <= 2:
        raise DivergenceError(f"path-loss exponent must exceed 2, got {alpha}")
    if gamma <= 0:
        return 1.0
    lower = gamma ** (-2.0 / alpha)
    integral, _ = integrate.quad(lambda u: 1.0 / (1.0 + u ** (alpha / 2.0)), lower, math.inf)
    return 1.0 / (1.0 + gamma ** (2.0 / alpha) * integral)


@lru_cache(maxsize=256)
def _linear_ase_per_bs(alpha: float, gamma0: float) -> float:
    body, _ = integrate.quad(lambda g: linear_scaling_coverage(g, alpha) / (1.0 + g), gamma0, math.inf,
                             limit=200)
    return body / LN2 + math.log2(1.0 + gamma0) * linear_scaling_coverage(gamma0, alpha)


def linear_scaling_ase(lam: float, alpha: float, gamma0: float = 1.0) -> float:
    """
    ASE of the single-slope reference network, which grows linearly in the
    BS density.
    """
    if lam < 0 or gamma0 <= 0:
        raise DomainError(f"need lambda >= 0 and gamma0 > 0, got lambda={lam}, gamma0={gamma0}")
    return lam * _linear_ase_per_bs(float(alpha), float(gamma0))
