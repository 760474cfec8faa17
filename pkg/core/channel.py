"""
Channel Model
-------------
Multi-piece probabilistic LoS/NLoS path-loss model and the 3GPP preset.

All distances are 3D link distances in kilometres; path gains are linear
(the inverse of the path loss), so A^L = 10^(-10.38) with alpha^L = 2.09
reproduces 103.8 + 20.9 log10(R[km]) dB.
"""

import bisect
import math
from enum import Enum
from functools import cached_property
from typing import Callable, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.errors import DomainError, ModelError
from utils.logger import get_logger

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]


class LinkState(str, Enum):
    """Propagation state of one BS-to-UE link."""

    LOS = "LoS"
    NLOS = "NLoS"


class LosProbability(BaseModel):
    """
    One-dimensional LoS probability descriptor.

    Kinds:
        one-minus-exp: 1 - coef * exp(-scale_km / w)
        exp:           coef * exp(-w / scale_km)
        constant:      value
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["one-minus-exp", "exp", "constant"]
    scale_km: float = Field(default=1.0, gt=0)
    coef: float = 1.0
    value: float = Field(default=1.0, ge=0, le=1)

    def __call__(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if self.kind == "one-minus-exp":
            return 1.0 - self.coef * np.exp(-self.scale_km / w)
        if self.kind == "exp":
            return self.coef * np.exp(-w / self.scale_km)
        return np.full_like(w, self.value)

    def scalar(self, w: float) -> float:
        if self.kind == "one-minus-exp":
            return 1.0 - self.coef * math.exp(-self.scale_km / w)
        if self.kind == "exp":
            return self.coef * math.exp(-w / self.scale_km)
        return self.value

    def check_piece(self, lower_km: float, upper_km: Optional[float]) -> None:
        """
        Raise ModelError unless the probability stays in [0, 1] and is
        non-increasing on (lower_km, upper_km].

        Both parametric kinds are monotone in w, so the extremes sit at the
        ends of the piece.
        """
        if self.kind == "constant":
            return
        if self.coef < 0:
            raise ModelError(f"{self.kind} LoS probability needs coef >= 0, got {self.coef}")
        if self.kind == "one-minus-exp":
            tail = self.coef if upper_km is None else self.coef * math.exp(-self.scale_km / upper_km)
            if 1.0 - tail < -1e-12:
                raise ModelError(
                    f"one-minus-exp LoS probability (coef={self.coef}) drops below 0 before "
                    f"{'infinity' if upper_km is None else f'{upper_km} km'}"
                )
        else:
            head = self.coef * math.exp(-lower_km / self.scale_km)
            if head > 1.0 + 1e-12:
                raise ModelError(
                    f"exp LoS probability (coef={self.coef}) exceeds 1 just above {lower_km} km"
                )


class PathLossSegment(BaseModel):
    """One piece of the path-loss model, valid up to (and including) upper_break_km."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    upper_break_km: Optional[float] = Field(default=None, gt=0)
    a_los: float = Field(gt=0)
    a_nlos: float = Field(gt=0)
    alpha_los: float = Field(gt=0)
    alpha_nlos: float = Field(gt=0)
    los_prob: LosProbability


class PathLossModel(BaseModel):
    """
    Ordered path-loss segments covering (0, inf).

    The lower segment owns its upper break: a distance equal to d_n is
    evaluated with piece n.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "custom"
    segments: Tuple[PathLossSegment, ...]
    r1_km: Optional[float] = None
    r2_km: Optional[float] = None

    @model_validator(mode="after")
    def _check_segments(self) -> "PathLossModel":
        if not self.segments:
            raise ModelError("path-loss model needs at least one segment")
        if self.segments[-1].upper_break_km is not None:
            raise ModelError("the last segment must be unbounded (no upper_break_km)")
        breaks = [seg.upper_break_km for seg in self.segments[:-1]]
        if any(b is None for b in breaks):
            raise ModelError("only the last segment may omit upper_break_km")
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise ModelError(f"segment breaks must be strictly increasing, got {breaks}")
        for lower, seg in zip([0.0] + breaks, self.segments):
            seg.los_prob.check_piece(lower, seg.upper_break_km)
        los_discontinuities(self)
        return self

    @property
    def n_pieces(self) -> int:
        return len(self.segments)

    @cached_property
    def breaks(self) -> np.ndarray:
        """Finite segment breaks d_1 < ... < d_{N-1} in km."""
        return np.array([seg.upper_break_km for seg in self.segments[:-1]], dtype=float)

    @cached_property
    def coefficients(self) -> Dict[str, np.ndarray]:
        return {
            "a_los": np.array([s.a_los for s in self.segments]),
            "a_nlos": np.array([s.a_nlos for s in self.segments]),
            "alpha_los": np.array([s.alpha_los for s in self.segments]),
            "alpha_nlos": np.array([s.alpha_nlos for s in self.segments]),
        }

    @property
    def outer(self) -> PathLossSegment:
        """The unbounded outermost segment."""
        return self.segments[-1]

    def segment_index(self, w: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.breaks, w, side="left")

    @cached_property
    def break_list(self) -> List[float]:
        return [float(b) for b in self.breaks]

    def link_terms(self, w: float) -> Tuple[float, float, float]:
        """
        (Pr^L(w), zeta^L(w), zeta^NL(w)) for one scalar distance.

        Plain-float path for quadrature integrands, which call it thousands
        of times per integral. No domain check.
        """
        seg = self.segments[bisect.bisect_left(self.break_list, w)]
        return seg.los_prob.scalar(w), seg.a_los * w ** -seg.alpha_los, seg.a_nlos * w ** -seg.alpha_nlos


def _as_distance(w: ArrayLike) -> np.ndarray:
    arr = np.asarray(w, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"distance must be positive, got min {np.min(arr)!r} km")
    return arr


def _unwrap(value: np.ndarray, like: ArrayLike):
    return float(value) if np.ndim(like) == 0 else value


def _los_mask(state: Union[LinkState, np.ndarray, bool], shape) -> np.ndarray:
    if isinstance(state, LinkState):
        return np.full(shape, state is LinkState.LOS, dtype=bool)
    return np.broadcast_to(np.asarray(state, dtype=bool), shape)


def eval_pathloss(model: PathLossModel, w: ArrayLike,
                  state: Union[LinkState, np.ndarray, bool]) -> ArrayLike:
    """
    Evaluate the linear path gain zeta(w) for the given link state.

    Args:
        model: Path-loss model
        w: 3D distance(s) in km, strictly positive
        state: A LinkState, or a boolean LoS mask broadcastable to w

    Returns:
        Linear path gain, scalar if w is scalar
    """
    arr = _as_distance(w)
    los = _los_mask(state, arr.shape)
    idx = model.segment_index(arr)
    coef = model.coefficients
    a = np.where(los, coef["a_los"][idx], coef["a_nlos"][idx])
    alpha = np.where(los, coef["alpha_los"][idx], coef["alpha_nlos"][idx])
    return _unwrap(a * np.power(arr, -alpha), w)


def los_probability(model: PathLossModel, w: ArrayLike) -> ArrayLike:
    """Probability that a link of 3D length w is LoS."""
    arr = _as_distance(w)
    idx = model.segment_index(arr)
    out = np.empty_like(arr)
    for n, seg in enumerate(model.segments):
        mask = idx == n
        if np.any(mask):
            out[mask] = seg.los_prob(arr[mask])
    return _unwrap(out, w)


def sample_los_mask(model: PathLossModel, w: ArrayLike, rng: np.random.Generator) -> np.ndarray:
    """Vectorized Bernoulli draw of LoS states, True meaning LoS."""
    p = np.asarray(los_probability(model, w), dtype=float)
    return rng.random(p.shape) < p


def sample_link_state(model: PathLossModel, w: float, rng: np.random.Generator) -> LinkState:
    """Draw one link state with success probability los_probability(w)."""
    return LinkState.LOS if bool(sample_los_mask(model, w, rng)) else LinkState.NLOS


def mean_path_gain(model: PathLossModel, w: ArrayLike) -> ArrayLike:
    """Expected path gain over the LoS/NLoS mixture at distance w."""
    arr = _as_distance(w)
    p = np.asarray(los_probability(model, arr))
    g_los = eval_pathloss(model, arr, LinkState.LOS)
    g_nlos = eval_pathloss(model, arr, LinkState.NLOS)
    return _unwrap(p * g_los + (1.0 - p) * g_nlos, w)


def gain_upper_bound(model: PathLossModel, w: ArrayLike) -> ArrayLike:
    """
    Supremum over w' >= w of the best-state path gain.

    Used to prune association candidates: a BS at distance w cannot offer a
    mean received power above this bound whatever its drawn state.
    """
    arr = _as_distance(w)
    envelope = np.maximum(eval_pathloss(model, arr, LinkState.LOS),
                          eval_pathloss(model, arr, LinkState.NLOS))
    if model.n_pieces == 1:
        return _unwrap(envelope, w)
    starts = []
    for d, seg in zip(model.breaks, model.segments[1:]):
        starts.append(max(seg.a_los * d ** -seg.alpha_los, seg.a_nlos * d ** -seg.alpha_nlos))
    starts = np.asarray(starts)
    later = np.where(model.breaks[None, :] >= arr.reshape(-1, 1), starts[None, :], 0.0)
    bound = np.maximum(envelope.reshape(-1), later.max(axis=1)).reshape(arr.shape)
    return _unwrap(bound, w)


def los_discontinuities(model: PathLossModel, n_points: int = 10_000,
                        w_min: float = 1e-4, w_max: float = 1e2) -> List[Tuple[float, float]]:
    """
    Check that the stitched LoS probability never increases with distance.

    Increases inside a piece are a model error. Upward jumps exactly at a
    segment break are tolerated and returned as (break_km, jump) pairs.

    Raises:
        ModelError: if a probability leaves [0, 1] or rises inside a piece
    """
    grid = np.logspace(math.log10(w_min), math.log10(w_max), n_points)
    grid = np.union1d(grid, model.breaks)
    raw = np.empty_like(grid)
    idx = model.segment_index(grid)
    for n, seg in enumerate(model.segments):
        mask = idx == n
        raw[mask] = seg.los_prob(grid[mask])
    if np.any(raw < -1e-12) or np.any(raw > 1 + 1e-12):
        raise ModelError(f"model {model.name!r}: LoS probability leaves [0, 1]")

    rises = np.nonzero(np.diff(raw) > 1e-12)[0]
    jumps = []
    for i in rises:
        crossing = idx[i + 1] != idx[i]
        if not crossing:
            raise ModelError(
                f"model {model.name!r}: LoS probability increases inside piece {idx[i] + 1} "
                f"near w = {grid[i]:.6g} km"
            )
        jumps.append((float(grid[i]), float(raw[i + 1] - raw[i])))
    for where, size in jumps:
        logger.debug(f"LoS probability of {model.name!r} jumps up by {size:.4f} at d = {where:.6g} km")
    return jumps


def three_gpp_case(r1_km: float = 0.156, r2_km: float = 0.030) -> PathLossModel:
    """
    The two-piece 3GPP urban model: identical path-loss laws on both pieces
    and a LoS probability split at d1 = R1 / ln 10.
    """
    d1 = r1_km / math.log(10.0)
    common = dict(a_los=10 ** -10.38, a_nlos=10 ** -14.54, alpha_los=2.09, alpha_nlos=3.75)
    return PathLossModel(
        name="3gpp-36828",
        r1_km=r1_km,
        r2_km=r2_km,
        segments=(
            PathLossSegment(upper_break_km=d1,
                            los_prob=LosProbability(kind="one-minus-exp", scale_km=r1_km, coef=5.0),
                            **common),
            PathLossSegment(los_prob=LosProbability(kind="exp", scale_km=r2_km, coef=5.0),
                            **common),
        ),
    )


MODEL_PRESETS: Dict[str, Callable[[], PathLossModel]] = {
    "3gpp-36828": three_gpp_case,
}


def get_model(name: str) -> PathLossModel:
    """Build a preset model by name."""
    try:
        return MODEL_PRESETS[name]()
    except KeyError:
        raise ModelError(f"unknown path-loss model preset {name!r}; "
                         f"available: {sorted(MODEL_PRESETS)}") from None
