"""
Radial Quadrature
-----------------
Adaptive integration of radial Campbell-type integrals over [0, inf).

Every integrand here is a function of the 2D distance u whose physics depends
on the 3D distance w = sqrt(u^2 + L^2). The half-line is split at u = L, at
the abscissae of the model's segment breaks and on a geometric ladder, each
piece is handed to scipy's QUADPACK wrapper, and the remaining tail is added
in closed form using the pure power-law behaviour of the outer segment.
"""

import math
from typing import Callable, List, NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate

from core.channel import PathLossModel
from core.errors import DivergenceError, DomainError, NumericalError
from utils.logger import get_logger

logger = get_logger(__name__)

# Ratio between consecutive split points of the geometric ladder.
LADDER_RATIO = 4.0
# Smallest radial scale used when L = 0.
MIN_SCALE_KM = 1e-4
MAX_DOUBLINGS = 200


class QuadratureSpec(BaseModel):
    """Tolerances for the radial integrals."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    rel_tol: float = Field(default=1e-9, gt=0)
    abs_tol: float = Field(default=1e-15, gt=0)
    max_subdivisions: int = Field(default=200, ge=1)
    truncation_tail: float = Field(default=1e-9, gt=0)


class QuadratureResult(NamedTuple):
    value: float
    error: float


def check_tail_convergence(model: PathLossModel) -> None:
    """
    Raise DivergenceError when the outer segment's interference tail
    cannot be integrated.
    """
    outer = model.outer
    if outer.alpha_nlos <= 2.0:
        raise DivergenceError(
            f"outermost NLoS exponent {outer.alpha_nlos} <= 2: the interference tail diverges",
            details={"alpha_nlos": outer.alpha_nlos},
        )
    if outer.alpha_los <= 2.0 and outer.los_prob.kind != "exp":
        raise DivergenceError(
            f"outermost LoS exponent {outer.alpha_los} <= 2 with non-vanishing LoS probability",
            details={"alpha_los": outer.alpha_los},
        )


def power_tail(coef: float, alpha: float, w0: float) -> float:
    """Closed form of the integral of coef * w^(1 - alpha) over [w0, inf)."""
    if alpha <= 2.0:
        raise DivergenceError(f"power-law tail with exponent {alpha} <= 2 diverges")
    return coef * w0 ** (2.0 - alpha) / (alpha - 2.0)


def break_abscissae(model: PathLossModel, height_km: float) -> np.ndarray:
    """2D distances u_n = sqrt(d_n^2 - L^2) of the breaks lying beyond L."""
    d = model.breaks
    d = d[d > height_km]
    return np.sqrt(d * d - height_km * height_km)


def tail_start(model: PathLossModel, height_km: float, u0: float, spec: QuadratureSpec,
               small: Optional[Callable[[float], bool]] = None) -> float:
    """
    First u >= u0 on a doubling ladder where the tail can be closed analytically.

    The tail is closed once the LoS probability is locally flat to within
    spec.truncation_tail and, when given, the extra predicate small(w) holds.
    """
    u = max(u0, height_km, MIN_SCALE_KM)
    last = break_abscissae(model, height_km)
    if last.size:
        u = max(u, float(last[-1]) * 2.0)
    for _ in range(MAX_DOUBLINGS):
        w = math.hypot(u, height_km)
        p_here = model.link_terms(w)[0]
        p_next = model.link_terms(2.0 * w)[0]
        flat = abs(p_here - p_next) <= spec.truncation_tail
        if flat and (small is None or small(w)):
            return u
        u *= 2.0
    raise NumericalError(
        "could not find a tail start within the doubling budget",
        details={"u_reached_km": u},
    )


def radial_points(model: PathLossModel, height_km: float, lower: float, upper: float) -> List[float]:
    """Sorted split points in [lower, upper] for one radial integral."""
    points = {lower, upper}
    if lower < height_km < upper:
        points.add(height_km)
    for u in break_abscissae(model, height_km):
        if lower < u < upper:
            points.add(float(u))
    rung = max(height_km, MIN_SCALE_KM, lower)
    while rung < upper:
        if rung > lower:
            points.add(rung)
        rung *= LADDER_RATIO
    return sorted(points)


def integrate_pieces(fn: Callable[[float], float], points: List[float],
                     spec: QuadratureSpec) -> QuadratureResult:
    """
    Integrate fn over consecutive intervals of points.

    Raises:
        NumericalError: if QUADPACK exhausts its subdivision budget or reports
            an error estimate far above the requested tolerance
    """
    total = 0.0
    error = 0.0
    for a, b in zip(points[:-1], points[1:]):
        if b <= a:
            continue
        out = integrate.quad(fn, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                             limit=spec.max_subdivisions, full_output=1)
        value, abserr, info = out[0], out[1], out[2]
        if len(out) > 3:
            tolerance = max(spec.abs_tol, spec.rel_tol * abs(value))
            exhausted = info.get("last", 0) >= spec.max_subdivisions
            if exhausted or abserr > 1e3 * tolerance:
                raise NumericalError(
                    f"quadrature did not converge on [{a:.6g}, {b:.6g}] km",
                    details={
                        "interval_km": (a, b),
                        "value": value,
                        "abs_error": abserr,
                        "subintervals": info.get("last"),
                        "message": str(out[3]).strip(),
                    },
                )
            logger.debug(f"quad warning on [{a:.3g}, {b:.3g}] accepted: abserr={abserr:.3g}")
        total += value
        error += abserr
    return QuadratureResult(total, error)


def campbell_integral(model: PathLossModel, height_km: float, spec: QuadratureSpec,
                      lower: float = 0.0) -> QuadratureResult:
    """
    Integral over u in [lower, inf) of mean_path_gain(sqrt(u^2 + L^2)) * u.

    Multiplying by 2 pi density P gives the mean interference from a PPP of
    interferers beyond 2D distance `lower` (unit-mean fading).
    """
    check_tail_convergence(model)
    if lower < 0:
        raise DomainError(f"lower radius must be non-negative, got {lower}")
    if height_km <= 0 and lower <= 0:
        raise DivergenceError("mean interference diverges at the origin when L = 0")

    # Normalise so the integrand is O(1) near its peak.
    w_ref = max(height_km, lower, MIN_SCALE_KM)
    _, g_los, g_nlos = model.link_terms(w_ref)
    scale = max(g_los, g_nlos) * w_ref

    def integrand(u: float) -> float:
        p, g_los, g_nlos = model.link_terms(math.hypot(u, height_km))
        g = p * g_los + (1.0 - p) * g_nlos
        return g * u / scale

    u_tail = tail_start(model, height_km, lower, spec)
    body = integrate_pieces(integrand, radial_points(model, height_km, lower, u_tail), spec)
    w_tail = math.hypot(u_tail, height_km)
    outer = model.outer
    p_tail = model.link_terms(w_tail)[0]
    tail = (p_tail * power_tail(outer.a_los, outer.alpha_los, w_tail)
            if p_tail > 0 else 0.0)
    tail += (1.0 - p_tail) * power_tail(outer.a_nlos, outer.alpha_nlos, w_tail)
    return QuadratureResult(body.value * scale + tail, body.error * scale)


def laplace_integrals(model: PathLossModel, height_km: float, s_times_p: float,
                      spec: QuadratureSpec) -> QuadratureResult:
    """
    Sum of the LoS and NLoS Laplace-functional integrals per unit density.

    Integrand: Pr^L(w) u / (1 + 1/x_L) + (1 - Pr^L(w)) u / (1 + 1/x_NL) with
    x = s P zeta(w). Returns the bare integral; the Laplace functional is
    exp(-2 pi density * value).
    """
    check_tail_convergence(model)
    if s_times_p <= 0:
        return QuadratureResult(0.0, 0.0)

    def share(x: float) -> float:
        return x / (1.0 + x) if x < 1e300 else 1.0

    def integrand(u: float) -> float:
        p, g_los, g_nlos = model.link_terms(math.hypot(u, height_km))
        return u * (p * share(s_times_p * g_los) + (1.0 - p) * share(s_times_p * g_nlos))

    def interference_small(w: float) -> bool:
        _, g_los, g_nlos = model.link_terms(w)
        return s_times_p * max(g_los, g_nlos) <= spec.truncation_tail

    u_tail = tail_start(model, height_km, 0.0, spec, small=interference_small)
    body = integrate_pieces(integrand, radial_points(model, height_km, 0.0, u_tail), spec)

    w_tail = math.hypot(u_tail, height_km)
    outer = model.outer
    p_tail = model.link_terms(w_tail)[0]
    tail = (p_tail * power_tail(s_times_p * outer.a_los, outer.alpha_los, w_tail)
            if p_tail > 0 else 0.0)
    tail += (1.0 - p_tail) * power_tail(s_times_p * outer.a_nlos, outer.alpha_nlos, w_tail)
    logger.debug(f"Laplace integral: body={body.value:.6g} (err {body.error:.2g}), "
                 f"tail={tail:.3g} from u={u_tail:.4g} km")
    return QuadratureResult(body.value + tail, body.error)
