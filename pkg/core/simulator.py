"""
Monte Carlo Simulator
---------------------
Ground truth for finite BS densities.

One trial realizes BSs and UEs as HPPPs on a disk around a typical UE at the
origin. It draws a LoS/NLoS state per UE-BS link once, and associates every
UE with the BS of largest mean received power. BSs left without UEs go idle,
and the trial finally samples the typical UE's SINR under Rayleigh fading.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial import cKDTree

from core.capacity import CoverageCurve
from core.channel import PathLossModel, eval_pathloss, gain_upper_bound, sample_los_mask
from core.deployment import (
    NetworkParams,
    PointSet,
    active_bs_density,
    radius_floor,
    required_sim_radius,
    sample_hppp,
)
from core.errors import DomainError, NumericalError
from core.quadrature import QuadratureSpec
from monitoring.performance import PerformanceTracker
from scheduler.pool import WorkerPool, trial_rng
from utils.logger import get_logger

logger = get_logger(__name__)
tracker = PerformanceTracker(category="simulator")

INITIAL_CANDIDATES = 8
MAX_EMPTY_WINDOWS = 10_000
RESAMPLE_REPORT_RATE = 1e-6


class LinkStateTable(ABC):
    """LoS states of UE-BS links, fixed for the lifetime of one realization."""

    @abstractmethod
    def los(self, ue: np.ndarray, bs: np.ndarray) -> np.ndarray:
        """Boolean LoS mask for broadcastable UE and BS index arrays."""

    @property
    @abstractmethod
    def n_drawn(self) -> int:
        """Number of link states realized so far."""


class DenseLinkStates(LinkStateTable):
    """All UE-BS states drawn up front. Only for small instances and tests."""

    def __init__(self, matrix: np.ndarray):
        self.matrix = np.asarray(matrix, dtype=bool)

    @classmethod
    def draw(cls, model: PathLossModel, ue_xy: np.ndarray, bs_xy: np.ndarray,
             height_km: float, rng: np.random.Generator) -> "DenseLinkStates":
        r = np.hypot(ue_xy[:, None, 0] - bs_xy[None, :, 0], ue_xy[:, None, 1] - bs_xy[None, :, 1])
        return cls(sample_los_mask(model, np.hypot(r, height_km), rng))

    def los(self, ue: np.ndarray, bs: np.ndarray) -> np.ndarray:
        return self.matrix[ue, bs]

    @property
    def n_drawn(self) -> int:
        return self.matrix.size


class LazyLinkStates(LinkStateTable):
    """
    States drawn on first request and stored under the key ue * n_bs + bs.

    Missing states are drawn in the order they are first requested, so the
    table is deterministic for a deterministic request sequence.
    """

    def __init__(self, model: PathLossModel, ue_xy: np.ndarray, bs_xy: np.ndarray,
                 height_km: float, rng: np.random.Generator):
        self.model = model
        self.ue_xy = ue_xy
        self.bs_xy = bs_xy
        self.height_km = height_km
        self.rng = rng
        self.n_bs = bs_xy.shape[0]
        self._keys = np.empty(0, dtype=np.int64)
        self._values = np.empty(0, dtype=bool)

    def _lookup(self, flat: np.ndarray):
        pos = np.searchsorted(self._keys, flat)
        if self._keys.size == 0:
            return pos, np.zeros(flat.shape, dtype=bool)
        found = self._keys[np.minimum(pos, self._keys.size - 1)] == flat
        return pos, found

    def los(self, ue: np.ndarray, bs: np.ndarray) -> np.ndarray:
        ue, bs = np.broadcast_arrays(np.asarray(ue, dtype=np.int64), np.asarray(bs, dtype=np.int64))
        flat = (ue * self.n_bs + bs).ravel()
        pos, found = self._lookup(flat)
        if not found.all():
            missing = flat[~found]
            unique, first = np.unique(missing, return_index=True)
            new_keys = unique[np.argsort(first, kind="stable")]
            u, b = np.divmod(new_keys, self.n_bs)
            delta = self.ue_xy[u] - self.bs_xy[b]
            w = np.hypot(np.hypot(delta[:, 0], delta[:, 1]), self.height_km)
            draws = sample_los_mask(self.model, w, self.rng)
            keys = np.concatenate((self._keys, new_keys))
            order = np.argsort(keys, kind="stable")
            self._keys = keys[order]
            self._values = np.concatenate((self._values, draws))[order]
            pos, _ = self._lookup(flat)
        return self._values[pos].reshape(ue.shape)

    @property
    def n_drawn(self) -> int:
        return int(self._keys.size)


@dataclass
class NetworkRealization:
    """
    One sampled network. UE index 0 is the typical UE at the origin.

    serving holds the associated BS index per UE (-1 before association).
    """

    bs_points: PointSet
    ue_points: PointSet
    link_states: LinkStateTable
    height_km: float
    serving: Optional[np.ndarray] = None
    resamples: int = 0

    @property
    def associated(self) -> bool:
        return self.serving is not None

    @property
    def serving_bs(self) -> int:
        self._require_association()
        return int(self.serving[0])

    @property
    def active_mask(self) -> np.ndarray:
        self._require_association()
        mask = np.zeros(self.bs_points.count, dtype=bool)
        mask[self.serving] = True
        return mask

    @property
    def active_set(self) -> np.ndarray:
        return np.flatnonzero(self.active_mask)

    def _require_association(self) -> None:
        if self.serving is None:
            raise DomainError("realization has not been associated yet")


@dataclass(frozen=True)
class SinrSample:
    """Typical-UE SINR draw with its mean-power bookkeeping."""

    signal: float
    interference: float
    noise_power: float
    serving_gain: float
    max_interferer_gain: float = 0.0
    n_interferers: int = 0

    @property
    def sinr(self) -> float:
        return self.signal / (self.interference + self.noise_power)


class CoverageEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean: float = Field(ge=0, le=1)
    std_error: float = Field(ge=0)
    trials: int = Field(ge=1)
    gamma: float

    @classmethod
    def from_indicators(cls, hits: np.ndarray, gamma: float) -> "CoverageEstimate":
        n = int(hits.size)
        mean = float(np.count_nonzero(hits)) / n
        return cls(mean=mean, std_error=math.sqrt(mean * (1.0 - mean) / n), trials=n, gamma=gamma)


class ActiveDensityEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean: float
    std_error: float
    trials: int
    predicted: float
    relative_deviation: float


@dataclass
class SimulationBatch:
    """Per-trial outputs of one seeded Monte Carlo run."""

    sinr: np.ndarray
    signal: np.ndarray
    interference: np.ndarray
    n_active: np.ndarray
    n_bs: np.ndarray
    resamples: int
    radius_km: float
    seed: int
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return int(self.sinr.size)

    @property
    def window_area(self) -> float:
        return math.pi * self.radius_km ** 2


def _build_states(model: PathLossModel, ue: PointSet, bs: PointSet, height_km: float,
                  rng: np.random.Generator, dense: bool) -> LinkStateTable:
    if dense:
        return DenseLinkStates.draw(model, ue.points, bs.points, height_km, rng)
    return LazyLinkStates(model, ue.points, bs.points, height_km, rng)


def realize_network(params: NetworkParams, model: PathLossModel, radius: float,
                    rng: np.random.Generator, dense_states: bool = False) -> NetworkRealization:
    """
    Sample BSs and UEs on the disk and attach a link-state table.

    A window without BSs is redrawn; the number of redraws is kept on the
    realization.
    """
    if math.isinf(params.bs_density) or math.isinf(params.ue_density):
        raise DomainError("the simulator needs finite BS and UE densities")
    if radius < radius_floor(params):
        logger.debug(f"window radius {radius:.4g} km is below the floor {radius_floor(params):.4g} km")

    resamples = 0
    bs = sample_hppp(params.bs_density, radius, rng)
    while bs.count == 0:
        resamples += 1
        if resamples >= MAX_EMPTY_WINDOWS:
            raise NumericalError(
                f"no BS fell in a {radius:.4g} km window after {resamples} draws",
                details={"radius_km": radius, "bs_density": params.bs_density},
            )
        bs = sample_hppp(params.bs_density, radius, rng)

    others = sample_hppp(params.ue_density, radius, rng)
    ue = PointSet(np.vstack((np.zeros((1, 2)), others.points)), radius, params.ue_density)
    states = _build_states(model, ue, bs, params.height_km, rng, dense_states)
    return NetworkRealization(bs_points=bs, ue_points=ue, link_states=states,
                              height_km=params.height_km, resamples=resamples)


def associate(real: NetworkRealization, model: PathLossModel, params: NetworkParams,
              prune: bool = True, initial_candidates: int = INITIAL_CANDIDATES) -> NetworkRealization:
    """
    Associate every UE with the BS of largest mean path gain.

    Fading is ignored. Ties go to the smaller 2D distance, then the lower BS
    index. With pruning, each UE first looks at its k nearest BSs and keeps
    doubling k until no farther BS can beat its best candidate even in its
    best link state.

    Returns:
        A copy of the realization with serving indices filled in
    """
    bs_xy = real.bs_points.points
    ue_xy = real.ue_points.points
    n_bs = bs_xy.shape[0]
    tree = cKDTree(bs_xy)
    serving = np.full(ue_xy.shape[0], -1, dtype=np.int64)
    pending = np.arange(ue_xy.shape[0])
    k = n_bs if not prune else min(initial_candidates, n_bs)

    while pending.size:
        dist, idx = tree.query(ue_xy[pending], k=k)
        dist = np.asarray(dist, dtype=float).reshape(pending.size, k)
        idx = np.asarray(idx, dtype=np.int64).reshape(pending.size, k)
        w = np.hypot(dist, real.height_km)
        los = real.link_states.los(pending[:, None], idx)
        gain = eval_pathloss(model, w, los)

        order = np.lexsort((idx, dist, -gain), axis=-1)
        rows = np.arange(pending.size)
        best_bs = idx[rows, order[:, 0]]
        best_gain = gain[rows, order[:, 0]]

        if k >= n_bs:
            certified = np.ones(pending.size, dtype=bool)
        else:
            certified = best_gain > gain_upper_bound(model, w[:, -1])
        serving[pending[certified]] = best_bs[certified]
        pending = pending[~certified]
        k = min(2 * k, n_bs)

    return replace(real, serving=serving)


def typical_ue_sinr(real: NetworkRealization, params: NetworkParams, model: PathLossModel,
                    rng: np.random.Generator) -> SinrSample:
    """
    Sample the typical UE's SINR: Rayleigh-faded signal from its serving BS
    over Rayleigh-faded interference from every other active BS plus noise.
    """
    b0 = real.serving_bs
    bs_xy = real.bs_points.points
    typical = np.zeros(1, dtype=np.int64)

    w0 = math.hypot(math.hypot(*bs_xy[b0]), real.height_km)
    los0 = real.link_states.los(typical, np.array([b0]))[0]
    gain0 = float(eval_pathloss(model, w0, los0))
    signal = params.tx_power_mw * gain0 * rng.exponential()

    interferers = real.active_set
    interferers = interferers[interferers != b0]
    if interferers.size == 0:
        return SinrSample(signal=signal, interference=0.0, noise_power=params.noise_power_mw,
                          serving_gain=gain0)

    w = np.hypot(np.hypot(bs_xy[interferers, 0], bs_xy[interferers, 1]), real.height_km)
    los = real.link_states.los(np.zeros(interferers.size, dtype=np.int64), interferers)
    gains = eval_pathloss(model, w, los)
    fading = rng.exponential(size=interferers.size)
    interference = params.tx_power_mw * float(np.dot(gains, fading))
    return SinrSample(signal=signal, interference=interference, noise_power=params.noise_power_mw,
                      serving_gain=gain0, max_interferer_gain=float(gains.max()),
                      n_interferers=int(interferers.size))


def _simulate_chunk(start: int, stop: int, params: NetworkParams, model: PathLossModel,
                    radius: float, seed: int) -> Dict[str, np.ndarray]:
    n = stop - start
    out = {
        "sinr": np.empty(n),
        "signal": np.empty(n),
        "interference": np.empty(n),
        "n_active": np.empty(n, dtype=np.int64),
        "n_bs": np.empty(n, dtype=np.int64),
        "resamples": np.empty(n, dtype=np.int64),
    }
    for i, trial in enumerate(range(start, stop)):
        rng = trial_rng(seed, trial)
        real = associate(realize_network(params, model, radius, rng), model, params)
        sample = typical_ue_sinr(real, params, model, rng)
        out["sinr"][i] = sample.sinr
        out["signal"][i] = sample.signal
        out["interference"][i] = sample.interference
        out["n_active"][i] = real.active_set.size
        out["n_bs"][i] = real.bs_points.count
        out["resamples"][i] = real.resamples
    return out


def simulate_trials(params: NetworkParams, model: PathLossModel, trials: int, seed: int,
                    radius: Optional[float] = None, tail_fraction: float = 1e-3,
                    workers: Optional[int] = None, progress: bool = False,
                    quad: Optional[QuadratureSpec] = None) -> SimulationBatch:
    """
    Run independent trials and collect the typical UE's SINR and the number
    of active BSs per trial.

    Args:
        params: Scenario
        model: Path-loss model
        trials: Number of i.i.d. realizations
        seed: Master seed; trial t uses the stream (seed, t)
        radius: Window radius in km, or None for required_sim_radius
        tail_fraction: Interference tail bound used when radius is None
        workers: Process count (None reads UDN_WORKERS)
        progress: Show a progress bar

    Returns:
        SimulationBatch with per-trial arrays in trial order
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if radius is None:
        radius = required_sim_radius(params, model, tail_fraction, quad)
    elif radius <= 0:
        raise DomainError(f"window radius must be positive, got {radius}")

    pool = WorkerPool(workers, progress=progress)
    with tracker.track_context("simulate_trials"):
        chunks = pool.map_trials(_simulate_chunk, trials, args=(params, model, radius, seed),
                                 desc=f"lambda={params.bs_density:g}")

    merged = {key: np.concatenate([c[key] for c in chunks]) for key in chunks[0]}
    resamples = int(merged["resamples"].sum())
    rate = resamples / (trials + resamples)
    if rate > RESAMPLE_REPORT_RATE:
        logger.warning(f"{resamples} empty windows redrawn over {trials} trials "
                       f"(rate {rate:.3g}) at lambda={params.bs_density:g}, radius={radius:.4g} km")
    logger.debug(f"simulated {trials} trials at lambda={params.bs_density:g}, rho={params.ue_density:g}, "
                 f"radius={radius:.4g} km, mean BSs={merged['n_bs'].mean():.1f}")
    return SimulationBatch(
        sinr=merged["sinr"],
        signal=merged["signal"],
        interference=merged["interference"],
        n_active=merged["n_active"],
        n_bs=merged["n_bs"],
        resamples=resamples,
        radius_km=radius,
        seed=seed,
        diagnostics={"resample_rate": rate},
    )


def estimate_coverage(params: NetworkParams, model: PathLossModel, gamma: float, trials: int,
                      seed: int, **kwargs) -> CoverageEstimate:
    """Fraction of trials with SINR > gamma, with its binomial standard error."""
    batch = simulate_trials(params, model, trials, seed, **kwargs)
    return CoverageEstimate.from_indicators(batch.sinr > gamma, gamma)


def estimate_coverage_curve(params: NetworkParams, model: PathLossModel, gamma_grid: Sequence[float],
                            trials: int, seed: int, **kwargs) -> CoverageCurve:
    """
    Coverage curve over a threshold grid from one shared set of SINR samples.

    Sharing the samples makes the curve non-increasing exactly.
    """
    gammas = np.asarray(gamma_grid, dtype=float)
    if gammas.size == 0:
        raise DomainError("gamma grid is empty")
    if np.any(np.diff(gammas) <= 0):
        raise DomainError("gamma grid must be strictly increasing")
    batch = simulate_trials(params, model, trials, seed, **kwargs)
    return CoverageCurve.from_samples(gammas, batch.sinr)


def estimate_active_density(params: NetworkParams, model: PathLossModel, trials: int, seed: int,
                            **kwargs) -> ActiveDensityEstimate:
    """
    Density of active BSs per km^2, compared with the idle-mode law.

    The deviation is reported, not asserted; the law is an empirical fit.
    """
    batch = simulate_trials(params, model, trials, seed, **kwargs)
    per_trial = batch.n_active / batch.window_area
    mean = float(per_trial.mean())
    std_error = float(per_trial.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    predicted = active_bs_density(params.bs_density, params.ue_density, params.idle_exponent)
    deviation = (mean - predicted) / predicted
    logger.info(f"active density {mean:.4g} +- {std_error:.2g} /km^2 vs law {predicted:.4g} "
                f"({deviation:+.2%})")
    return ActiveDensityEstimate(mean=mean, std_error=std_error, trials=trials,
                                 predicted=predicted, relative_deviation=deviation)


def shot_noise_interference(density: float, model: PathLossModel, height_km: float, tx_power_mw: float,
                            radius: float, rng: np.random.Generator) -> float:
    """
    Aggregate interference at the origin from an HPPP of always-on
    interferers with independent link states and Rayleigh fading.
    """
    points = sample_hppp(density, radius, rng)
    if points.count == 0:
        return 0.0
    w = np.hypot(points.radii, height_km)
    gains = eval_pathloss(model, w, sample_los_mask(model, w, rng))
    return tx_power_mw * float(np.dot(gains, rng.exponential(size=points.count)))


def shot_noise_samples(density: float, model: PathLossModel, height_km: float, tx_power_mw: float,
                       radius: float, samples: int, seed: int) -> np.ndarray:
    """Independent shot_noise_interference draws, one stream per sample."""
    return np.array([
        shot_noise_interference(density, model, height_km, tx_power_mw, radius, trial_rng(seed, i))
        for i in range(samples)
    ])
