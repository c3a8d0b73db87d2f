"""Stochastic oracle for the closed forms: draws shadowed-Rician gains,
arrival times, and waiting periods, and reports empirical rate, power, and
delay-outage estimates with standard errors.

Replications are split into fixed-size blocks, each driven by its own
counter-based generator spawned from the master seed, so block results can
be computed in any order (or in parallel) and reduced in block order to the
same aggregate.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import GainPartition, SrFading, sr_cdf_many
from .geometry import PassGeometry, PassTimeline, sub_point_speed
from .schemes import LinkBudget, PatConfig, RatConfig, TrafficSpec

__all__ = [
    "SimConfig",
    "SimResult",
    "sample_sr_gain",
    "simulate_rate_power",
    "simulate_dor",
    "ks_statistic",
    "KS_CRIT_ALPHA01",
]

_BLOCK = 1 << 16
_RNG_NAME = "philox4x64-10"

# Asymptotic Kolmogorov critical coefficient at alpha = 0.01: reject when
# D > KS_CRIT_ALPHA01 / sqrt(n).
KS_CRIT_ALPHA01 = 1.62762


@dataclass(frozen=True)
class SimConfig:
    """Replication count, master seed, and which scheme is simulated."""

    n_samples: int
    seed: int
    scheme: str

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.scheme not in ("rat", "pat"):
            raise ValueError(f"scheme must be 'rat' or 'pat', got {self.scheme!r}")


@dataclass(frozen=True)
class SimResult:
    """Empirical estimates with standard errors; fields the run does not
    produce stay None."""

    n_samples: int
    rng: str
    mean_rate_bps: float | None = None
    rate_se_bps: float | None = None
    mean_power_w: float | None = None
    power_se_w: float | None = None
    dor: float | None = None
    dor_se: float | None = None

    def __post_init__(self):
        for se in (self.rate_se_bps, self.power_se_w, self.dor_se):
            if se is not None and se < 0:
                raise ValueError("standard errors must be >= 0")
        if self.dor is not None and not (0.0 <= self.dor <= 1.0):
            raise ValueError(f"dor must be in [0, 1], got {self.dor}")


def _block_rngs(seed: int, n_samples: int):
    """(generator, count) per block, derived from the master seed."""
    n_blocks = (n_samples + _BLOCK - 1) // _BLOCK
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    out = []
    for i, child in enumerate(children):
        count = min(_BLOCK, n_samples - i * _BLOCK)
        out.append((np.random.Generator(np.random.Philox(child)), count))
    return out


def sample_sr_gain(fading: SrFading, rng: np.random.Generator, size: int | None = None):
    """Power-gain draws from the generative shadowed-Rician model.

    Scattered part: complex Gaussian with per-dimension variance b0.
    Line of sight: Nakagami-distributed amplitude (gamma power with shape m
    and mean omega) at a uniform phase. Returns |sum|^2.
    """
    n = 1 if size is None else size
    sigma = math.sqrt(fading.b0)
    re = rng.normal(0.0, sigma, n)
    im = rng.normal(0.0, sigma, n)
    if fading.omega > 0.0:
        los_power = rng.gamma(fading.m, fading.omega / fading.m, n)
        phase = rng.uniform(0.0, 2.0 * math.pi, n)
        re = re + np.sqrt(los_power) * np.cos(phase)
        im = im + np.sqrt(los_power) * np.sin(phase)
    g = re * re + im * im
    return float(g[0]) if size is None else g


def _slant_range(geo: PassGeometry, t: np.ndarray) -> np.ndarray:
    # Vectorized slant range over elapsed pass times.
    v = sub_point_speed(geo)
    along = geo.half_track_m - v * t
    return np.sqrt(along * along
                   + geo.terminal_offset_m**2
                   + geo.orbit_height_m**2)


def _mean_se(total: float, total_sq: float, n: int) -> tuple[float, float]:
    mean = total / n
    if n < 2:
        return mean, 0.0
    var = max(total_sq - total * total / n, 0.0) / (n - 1)
    return mean, math.sqrt(var / n)


def _rate_power_block(
    geo: PassGeometry,
    tl: PassTimeline,
    fading: SrFading,
    part: GainPartition,
    budget: LinkBudget,
    scheme: RatConfig | PatConfig,
    rng: np.random.Generator,
    count: int,
) -> tuple[float, float, float, float]:
    """One block of rate/power replications; returns (sum r, sum r^2,
    sum p, sum p^2)."""
    t = rng.uniform(0.0, tl.span_s, count)
    g = sample_sr_gain(fading, rng, count)
    state = part.classify(g)
    transmitting = state >= 2
    rho = budget.path_loss_exp
    if isinstance(scheme, RatConfig):
        d = _slant_range(geo, t)
        snr = scheme.tx_power_w / budget.noise_power_w * g / d**rho
        rate = np.where(transmitting, budget.bandwidth_hz * np.log2(1.0 + snr), 0.0)
        power = np.where(transmitting, scheme.tx_power_w, 0.0)
    else:
        slot = np.minimum((t // tl.slot_len_s).astype(np.int64), tl.n_slots - 1)
        d_ref = np.asarray(tl.slot_dist_max)[slot]
        snr_needed = 2.0 ** (scheme.fixed_rate_bps / budget.bandwidth_hz) - 1.0
        needed = budget.noise_power_w * d_ref**rho * snr_needed / g
        on = transmitting & (needed <= scheme.max_power_w)
        rate = np.where(on, scheme.fixed_rate_bps, 0.0)
        power = np.where(on, needed, 0.0)
    return (
        float(np.sum(rate)),
        float(np.sum(rate * rate)),
        float(np.sum(power)),
        float(np.sum(power * power)),
    )


def simulate_rate_power(
    geo: PassGeometry,
    tl: PassTimeline,
    fading: SrFading,
    part: GainPartition,
    budget: LinkBudget,
    scheme: RatConfig | PatConfig,
    cfg: SimConfig,
) -> SimResult:
    """Empirical mean rate and transmit power over random arrival instants.

    Each replication draws an instant in the discretized pass and a gain;
    the fixed-power scheme then transmits at the instantaneous capacity of
    the drawn gain and exact range whenever the state allows, while the
    fixed-rate scheme inverts its power against the drawn gain at the
    slot's reference range, subject to the cap.
    """
    _check_scheme(cfg, scheme)
    blocks = _block_rngs(cfg.seed, cfg.n_samples)
    partials = [
        _rate_power_block(geo, tl, fading, part, budget, scheme, rng, count)
        for rng, count in blocks
    ]
    sum_r = sum_r2 = sum_p = sum_p2 = 0.0
    for r1, r2_, p1, p2 in partials:  # reduce in block order
        sum_r += r1
        sum_r2 += r2_
        sum_p += p1
        sum_p2 += p2
    mean_rate, rate_se = _mean_se(sum_r, sum_r2, cfg.n_samples)
    mean_power, power_se = _mean_se(sum_p, sum_p2, cfg.n_samples)
    return SimResult(
        n_samples=cfg.n_samples,
        rng=_RNG_NAME,
        mean_rate_bps=mean_rate,
        rate_se_bps=rate_se,
        mean_power_w=mean_power,
        power_se_w=power_se,
    )


def _dor_block(
    tl: PassTimeline,
    fading: SrFading,
    part: GainPartition,
    budget: LinkBudget,
    scheme: RatConfig | PatConfig,
    traffic: TrafficSpec,
    lam_s: float,
    rng: np.random.Generator,
    count: int,
) -> float:
    """One block of packet arrivals; returns the outage count."""
    t = rng.uniform(0.0, tl.service_time_s, count)
    g = sample_sr_gain(fading, rng, count)
    state = part.classify(g)
    waiting = state == 1
    t_wait = np.where(waiting, rng.exponential(lam_s, count), 0.0)

    # Completion slot: ceil((t + wait)/slot) wrapped onto 1..N, then 0-based.
    idx = np.ceil((t + t_wait) / tl.slot_len_s).astype(np.int64) % tl.n_slots
    slot = np.where(idx == 0, tl.n_slots, idx) - 1

    if isinstance(scheme, RatConfig):
        # Drain at the lower-edge rate of the state (state 2 after a wait).
        rho = budget.path_loss_exp
        edge_state = np.where(waiting, 2, state)
        edge_gain = np.asarray(part.thresholds)[edge_state - 1] ** 2
        snr = (scheme.tx_power_w / budget.noise_power_w * edge_gain
               / np.asarray(tl.slot_dist_max)[slot] ** rho)
        rate = budget.bandwidth_hz * np.log2(1.0 + snr)
    else:
        rate = np.full(count, scheme.fixed_rate_bps)

    with np.errstate(divide="ignore"):
        drain = np.where(rate > 0.0, traffic.packet_bits / rate, np.inf)
    delivery = t_wait + drain
    return float(np.sum(delivery > traffic.delay_threshold_s))


def simulate_dor(
    tl: PassTimeline,
    fading: SrFading,
    part: GainPartition,
    budget: LinkBudget,
    scheme: RatConfig | PatConfig,
    traffic: TrafficSpec,
    lam_s: float,
    cfg: SimConfig,
) -> SimResult:
    """Empirical delay outage rate over random packet arrivals.

    Arrivals landing in the bottom state wait an exponential time with mean
    lam_s before draining in the slot where the wait ends; other arrivals
    drain immediately at their state's rate.
    """
    _check_scheme(cfg, scheme)
    if lam_s <= 0 or not math.isfinite(lam_s):
        raise ValueError(f"lam_s must be positive and finite, got {lam_s}")
    blocks = _block_rngs(cfg.seed, cfg.n_samples)
    partials = [
        _dor_block(tl, fading, part, budget, scheme, traffic, lam_s, rng, count)
        for rng, count in blocks
    ]
    outages = 0.0
    for c in partials:  # reduce in block order
        outages += c
    p = outages / cfg.n_samples
    se = math.sqrt(max(p * (1.0 - p), 0.0) / cfg.n_samples)
    return SimResult(
        n_samples=cfg.n_samples,
        rng=_RNG_NAME,
        dor=p,
        dor_se=se,
    )


def _check_scheme(cfg: SimConfig, scheme: RatConfig | PatConfig):
    want = "rat" if isinstance(scheme, RatConfig) else "pat"
    if cfg.scheme != want:
        raise ValueError(f"SimConfig.scheme={cfg.scheme!r} but a {want} config was passed")


def ks_statistic(fading: SrFading, gains: np.ndarray) -> float:
    """Kolmogorov-Smirnov distance between sampled gains and the analytic
    CDF; compare against KS_CRIT_ALPHA01 / sqrt(n)."""
    xs = np.sort(np.asarray(gains, dtype=float))
    n = len(xs)
    if n < 1:
        raise ValueError("need at least one sample")
    f = sr_cdf_many(fading, xs)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
