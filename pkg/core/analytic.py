"""
Analytic Coverage
-----------------
Dense-network asymptotics of the downlink coverage probability.

In the lambda -> inf limit every active UE is served by a BS right above it,
at 3D distance L, through the first segment's LoS law. The active interferers
then form a PPP of density rho with no exclusion zone, so the coverage
probability reduces to

    exp(-P_N s) * Laplace_I(s),    s = gamma / (P zeta_1^L(L))

and is a power law in rho: c(gamma) * g(gamma)^rho.
"""

import math
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from core.channel import PathLossModel
from core.deployment import NetworkParams, active_bs_density
from core.errors import DomainError
from core.quadrature import QuadratureSpec, campbell_integral, laplace_integrals
from monitoring.performance import PerformanceTracker
from utils.logger import get_logger

logger = get_logger(__name__)
tracker = PerformanceTracker(category="analytic")


class LimitRegime(str, Enum):
    """The four (L, rho) combinations of the dense-network limit."""

    NEAR_FIELD_FULL_LOAD = "L=0, rho=inf"
    HEIGHT_FULL_LOAD = "L>0, rho=inf"
    NEAR_FIELD_IDLE = "L=0, rho<inf"
    HEIGHT_IDLE = "L>0, rho<inf"


class PowerLawFactors(BaseModel):
    """coverage_limit(rho) = c * g^rho."""

    model_config = ConfigDict(frozen=True)

    c: float = Field(ge=0, le=1)
    g: float = Field(ge=0, le=1)
    log_c: float = Field(le=0)
    log_g: float = Field(le=0)

    def coverage(self, rho: float) -> float:
        """Coverage probability for UE density rho."""
        if math.isinf(rho):
            return 0.0 if self.log_g < 0 else self.c
        return math.exp(self.log_c + rho * self.log_g)


def limit_regime(height_km: float, rho: float) -> LimitRegime:
    """Classify the dense-network limit by antenna height and UE density."""
    if math.isinf(rho):
        return LimitRegime.NEAR_FIELD_FULL_LOAD if height_km == 0 else LimitRegime.HEIGHT_FULL_LOAD
    return LimitRegime.NEAR_FIELD_IDLE if height_km == 0 else LimitRegime.HEIGHT_IDLE


def serving_gain(model: PathLossModel, height_km: float) -> float:
    """
    First-piece LoS path gain at distance L.

    Used even if L lies beyond the first break, with a warning.
    """
    if height_km <= 0:
        return math.inf
    first = model.segments[0]
    if first.upper_break_km is not None and height_km > first.upper_break_km:
        logger.warning(f"L = {height_km * 1000:.2f} m exceeds the first break "
                       f"d1 = {first.upper_break_km * 1000:.2f} m; using the first-piece LoS law anyway")
    return first.a_los * height_km ** -first.alpha_los


def interference_scale(params: NetworkParams, model: PathLossModel, gamma: float) -> float:
    """s = gamma / (P zeta_1^L(L)), in 1/mW."""
    if not gamma >= 0:
        raise DomainError(f"SINR threshold must be non-negative, got {gamma}")
    return gamma / (params.tx_power_mw * serving_gain(model, params.height_km))


def laplace_interference(s: float, density: float, model: PathLossModel, height_km: float,
                         tx_power_mw: float, quad: Optional[QuadratureSpec] = None) -> float:
    """
    Laplace transform E[exp(-s I)] of the aggregate interference from a PPP
    of active BSs with no exclusion zone.

    Args:
        s: Transform variable in 1/mW
        density: Interferer density per km^2
        model: Path-loss model
        height_km: Antenna height difference L
        tx_power_mw: BS transmit power P
        quad: Quadrature tolerances

    Returns:
        Value in (0, 1]
    """
    if s < 0 or density < 0:
        raise DomainError(f"Laplace transform needs s >= 0 and density >= 0, got s={s}, density={density}")
    if s == 0 or density == 0:
        return 1.0
    if math.isinf(density):
        return 0.0
    quad = quad or QuadratureSpec()
    integral = laplace_integrals(model, height_km, s * tx_power_mw, quad)
    return math.exp(-2.0 * math.pi * density * integral.value)


def _log_g(params: NetworkParams, model: PathLossModel, s: float, quad: QuadratureSpec) -> float:
    if s == 0:
        return 0.0
    integral = laplace_integrals(model, params.height_km, s * params.tx_power_mw, quad)
    return -2.0 * math.pi * integral.value


def power_law_factors(params: NetworkParams, model: PathLossModel, gamma: float,
                      quad: Optional[QuadratureSpec] = None) -> PowerLawFactors:
    """
    Split the coverage limit into a noise factor c and a per-UE-density
    interference factor g.
    """
    quad = quad or QuadratureSpec()
    if params.height_km == 0:
        return PowerLawFactors(c=1.0, g=1.0, log_c=0.0, log_g=0.0)
    s = interference_scale(params, model, gamma)
    log_c = -params.noise_power_mw * s
    log_g = _log_g(params, model, s, quad)
    return PowerLawFactors(c=math.exp(log_c), g=math.exp(log_g), log_c=log_c, log_g=log_g)


@tracker.track()
def coverage_limit(params: NetworkParams, model: PathLossModel, gamma: float,
                   quad: Optional[QuadratureSpec] = None) -> float:
    """
    Coverage probability in the lambda -> inf limit. Does not depend on lambda.

    L = 0 with finite rho gives 1 (unbounded serving gain); rho = inf with
    L > 0 gives 0 (fully loaded network with a height offset).
    """
    regime = limit_regime(params.height_km, params.ue_density)
    if regime is LimitRegime.NEAR_FIELD_IDLE:
        return 1.0
    if regime is LimitRegime.HEIGHT_FULL_LOAD:
        return 0.0 if gamma > 0 else 1.0
    if regime is LimitRegime.NEAR_FIELD_FULL_LOAD:
        raise DomainError("the L = 0, rho = inf limit depends on the path-loss exponents "
                          "only and is not covered by this model")
    return power_law_factors(params, model, gamma, quad).coverage(params.ue_density)


def dense_coverage_approx(params: NetworkParams, model: PathLossModel, gamma: float,
                          quad: Optional[QuadratureSpec] = None) -> float:
    """
    Finite-lambda approximation: the limit formula with the interferer
    density replaced by the active-BS density.

    Keeps the serving BS at distance L, so it overstates coverage when BSs
    are sparse. Converges to coverage_limit as lambda -> inf.
    """
    if math.isinf(params.bs_density):
        return coverage_limit(params, model, gamma, quad)
    if params.height_km <= 0:
        raise DomainError("dense_coverage_approx needs L > 0")
    density = active_bs_density(params.bs_density, params.ue_density, params.idle_exponent)
    return power_law_factors(params, model, gamma, quad).coverage(density)


def mean_interference(density: float, model: PathLossModel, height_km: float, tx_power_mw: float,
                      quad: Optional[QuadratureSpec] = None) -> float:
    """
    Mean aggregate interference of a PPP of interferers (Campbell's theorem,
    unit-mean fading).

    Raises:
        DivergenceError: if the outermost exponents are <= 2 or L = 0
    """
    if density < 0:
        raise DomainError(f"density must be non-negative, got {density}")
    if density == 0:
        return 0.0
    quad = quad or QuadratureSpec()
    return 2.0 * math.pi * density * tx_power_mw * campbell_integral(model, height_km, quad).value
