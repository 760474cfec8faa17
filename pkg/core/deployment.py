"""
Deployment
----------
Scenario parameters, HPPP sampling on a disk window, the active-BS density
law under idle mode, and the truncation radius used by the simulator.

Internal units are km, BSs/km^2 and linear mW. The conversions from the
external units used in configs (m, dBm, dB) live here and are applied once.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import optimize

from core.channel import PathLossModel
from core.errors import DomainError
from core.quadrature import QuadratureSpec, campbell_integral, check_tail_convergence
from utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_IDLE_EXPONENT = 3.5
# Simulation windows never shrink below this many mean BS spacings.
RADIUS_FLOOR_SPACINGS = 10.0


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value) if value > 0 else -math.inf


def m_to_km(metres: float) -> float:
    return metres / 1000.0


class NetworkParams(BaseModel):
    """
    Scenario scalars in internal units.

    Build from config units with NetworkParams.from_external().
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    bs_density: float = Field(gt=0, description="lambda, BSs/km^2")
    ue_density: float = Field(gt=0, description="rho, active UEs/km^2")
    height_km: float = Field(default=0.0085, ge=0, description="L, km")
    tx_power_mw: float = Field(default=dbm_to_mw(24.0), gt=0)
    noise_power_mw: float = Field(default=dbm_to_mw(-95.0), gt=0)
    idle_exponent: float = Field(default=DEFAULT_IDLE_EXPONENT, gt=0)
    gamma0: float = Field(default=1.0, gt=0, description="minimum working SINR, linear")
    epsilon: float = Field(default=0.05, gt=0, lt=1)

    @field_validator("height_km", "tx_power_mw", "noise_power_mw", "gamma0")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @classmethod
    def from_external(cls, lambda_per_km2: float, rho_per_km2: float, height_m: float = 8.5,
                      tx_power_dbm: float = 24.0, noise_power_dbm: float = -95.0,
                      q: float = DEFAULT_IDLE_EXPONENT, gamma0_db: float = 0.0,
                      epsilon: float = 0.05) -> "NetworkParams":
        """Create params from config units (m, dBm, dB)."""
        return cls(
            bs_density=lambda_per_km2,
            ue_density=rho_per_km2,
            height_km=m_to_km(height_m),
            tx_power_mw=dbm_to_mw(tx_power_dbm),
            noise_power_mw=dbm_to_mw(noise_power_dbm),
            idle_exponent=q,
            gamma0=db_to_linear(gamma0_db),
            epsilon=epsilon,
        )

    def replace(self, **changes: Any) -> "NetworkParams":
        """Validated copy with some fields changed."""
        return type(self).model_validate({**self.model_dump(), **changes})

    def external(self) -> Dict[str, float]:
        """Parameters in config units, for provenance records."""
        return {
            "lambda_per_km2": self.bs_density,
            "rho_per_km2": self.ue_density,
            "height_m": self.height_km * 1000.0,
            "tx_power_dbm": mw_to_dbm(self.tx_power_mw),
            "noise_power_dbm": mw_to_dbm(self.noise_power_mw),
            "q": self.idle_exponent,
            "gamma0_db": linear_to_db(self.gamma0),
            "epsilon": self.epsilon,
        }


@dataclass(frozen=True)
class PointSet:
    """Points (km) of one HPPP draw inside a disk centred on the origin."""

    points: np.ndarray
    window_radius: float
    density: float = field(default=math.nan)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def count(self) -> int:
        return len(self)

    @property
    def area(self) -> float:
        return math.pi * self.window_radius ** 2

    @property
    def radii(self) -> np.ndarray:
        """2D distances of the points from the origin."""
        return np.hypot(self.points[:, 0], self.points[:, 1])


def active_bs_density(lam: float, rho: float, q: float = DEFAULT_IDLE_EXPONENT) -> float:
    """
    Density of BSs with at least one associated UE.

    lambda * [1 - (1 + rho / (q lambda))^(-q)], evaluated with log1p/expm1 so
    that very dense networks (rho / lambda -> 0) keep full precision.

    Raises:
        DomainError: if any input is not positive
    """
    if not (lam > 0 and rho > 0 and q > 0):
        raise DomainError(f"active_bs_density needs positive inputs, got "
                          f"lambda={lam}, rho={rho}, q={q}")
    if math.isinf(lam):
        return float(rho)
    if math.isinf(rho):
        return float(lam)
    return float(-lam * math.expm1(-q * math.log1p(rho / (q * lam))))


def distance_3d(r: Union[float, np.ndarray], height_km: float) -> Union[float, np.ndarray]:
    """3D link distance sqrt(r^2 + L^2)."""
    if height_km < 0 or np.any(np.asarray(r) < 0):
        raise DomainError(f"distances must be non-negative, got r={r}, L={height_km}")
    out = np.hypot(r, height_km)
    return float(out) if np.ndim(out) == 0 else out


def mean_bs_spacing(lam: float) -> float:
    """Mean spacing 1/sqrt(lambda) of an HPPP of density lambda."""
    return 1.0 / math.sqrt(lam)


def sample_hppp(density: float, radius: float, rng: np.random.Generator) -> PointSet:
    """
    Draw an HPPP of the given density on the disk of the given radius.

    Args:
        density: Points per km^2
        radius: Window radius in km
        rng: Seeded generator, consumed deterministically

    Returns:
        PointSet with a Poisson number of uniformly placed points
    """
    if not density >= 0 or math.isinf(density):
        raise DomainError(f"density must be finite and non-negative, got {density}")
    if not radius > 0:
        raise DomainError(f"window radius must be positive, got {radius}")
    n = int(rng.poisson(density * math.pi * radius * radius))
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return PointSet(np.column_stack((r * np.cos(theta), r * np.sin(theta))), radius, density)


def radius_floor(params: NetworkParams) -> float:
    return RADIUS_FLOOR_SPACINGS * mean_bs_spacing(params.bs_density)


def required_sim_radius(params: NetworkParams, model: PathLossModel, tail_fraction: float = 1e-3,
                        quad: Optional[QuadratureSpec] = None) -> float:
    """
    Smallest window radius whose outside holds at most tail_fraction of the
    Campbell mean interference, clamped below by ten mean BS spacings.

    The active density cancels in the ratio, so only the geometry matters.

    Raises:
        DomainError: if tail_fraction is outside (0, 1)
        DivergenceError: if the outermost exponents make the tail infinite
    """
    if not 0.0 < tail_fraction < 1.0:
        raise DomainError(f"tail_fraction must lie in (0, 1), got {tail_fraction}")
    check_tail_convergence(model)
    quad = quad or QuadratureSpec()
    L = params.height_km
    floor = radius_floor(params)

    if L > 0:
        total = campbell_integral(model, L, quad).value
        start = 0.0
    else:
        # With L = 0 the mean diverges at the origin; measure the tail against
        # the mass beyond a tenth of the floor instead.
        start = floor / 10.0
        total = campbell_integral(model, L, quad, lower=start).value

    def log_excess(log_r: float) -> float:
        tail = campbell_integral(model, L, quad, lower=math.exp(log_r)).value
        return math.log(tail / total) - math.log(tail_fraction)

    lo = max(L, start, 1e-4)
    if log_excess(math.log(lo)) <= 0:
        return max(lo, floor)
    hi = lo * 2.0
    while log_excess(math.log(hi)) > 0:
        lo, hi = hi, hi * 2.0
    radius = math.exp(optimize.brentq(log_excess, math.log(lo), math.log(hi), xtol=1e-6))
    logger.debug(f"tail radius {radius:.5g} km for tail_fraction={tail_fraction:g}, "
                 f"floor {floor:.5g} km")
    return max(radius, floor)
