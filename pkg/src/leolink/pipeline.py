"""Scenario-level pipelines: analytic reports, parameter sweeps with
optional simulation columns, simulation runs, and the oracle cross-check
suite behind the `validate` subcommand.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import channel, montecarlo, schemes
from .channel import GainPartition, StateProbMatrix, afd, equal_probability_partition
from .geometry import PassTimeline, build_timeline, distance_range
from .montecarlo import KS_CRIT_ALPHA01, SimConfig, ks_statistic, sample_sr_gain
from .scenario import Scenario, SweepSpec, apply_sweep_value
from .schemes import SchemeReport

__all__ = [
    "ScenarioParts",
    "prepare",
    "run_analyze",
    "report_lines",
    "SWEEP_CSV_COLUMNS",
    "sweep_column_name",
    "run_sweep",
    "run_simulate",
    "SIMULATE_CSV_HEADER",
    "run_validate",
]


@dataclass(frozen=True)
class ScenarioParts:
    """Derived objects shared by every pipeline for one scenario."""

    timeline: PassTimeline
    d_max_m: float
    first_threshold: float
    partition: GainPartition
    probs: StateProbMatrix
    lam_s: float


def prepare(scn: Scenario) -> ScenarioParts:
    """Timeline, partition, state probabilities, and waiting-time mean.

    When the crossing rate at the first threshold underflows double
    precision the waiting-time mean is astronomically large; the closed
    forms are evaluated in their exact infinite-wait limit (lam_s = inf).
    Simulation entry points reject that limit instead of sampling it.
    """
    tl = build_timeline(scn.geometry, scn.slot_len_s)
    d_max = distance_range(scn.geometry, all_terminals=True)[1]
    if scn.scheme == "rat":
        first = schemes.rat_first_threshold(scn.budget, scn.rat, d_max)
    else:
        first = schemes.pat_first_threshold(scn.budget, scn.pat, d_max)
    part = equal_probability_partition(
        scn.fading, first, scn.n_states, scn.upper_thresholds
    )
    probs = channel.state_prob_matrix(scn.fading, part, tl.n_slots)
    try:
        lam = afd(scn.fading, scn.doppler, first)
    except channel.ZeroCrossingRate:
        lam = math.inf
    return ScenarioParts(
        timeline=tl,
        d_max_m=d_max,
        first_threshold=first,
        partition=part,
        probs=probs,
        lam_s=lam,
    )


def run_analyze(scn: Scenario, parts: ScenarioParts | None = None) -> SchemeReport:
    """Closed-form report for the scenario's scheme."""
    p = parts or prepare(scn)
    if scn.scheme == "rat":
        return schemes.rat_report(
            scn.budget, scn.rat, p.partition, p.timeline, p.probs, scn.traffic, p.lam_s
        )
    return schemes.pat_report(
        scn.budget, scn.pat, p.partition, p.timeline, p.probs, scn.traffic, p.lam_s
    )


def _fmt(x) -> str:
    return repr(float(x))


def _require_finite_wait(lam_s: float) -> None:
    if not math.isfinite(lam_s):
        raise channel.ZeroCrossingRate(
            "waiting-time mean overflowed double precision; simulation is "
            "unavailable for this configuration"
        )


def report_lines(scn: Scenario, report: SchemeReport) -> list[str]:
    """Stable key = value rendering of a report (the `analyze` output)."""
    return [
        f"scheme = {scn.scheme}",
        f"throughput_lo_bps = {_fmt(report.throughput_lo_bps)}",
        f"throughput_hi_bps = {_fmt(report.throughput_hi_bps)}",
        f"avg_power_lo_w = {_fmt(report.avg_power_lo_w)}",
        f"avg_power_hi_w = {_fmt(report.avg_power_hi_w)}",
        f"ee_lo_bpj = {_fmt(report.ee_lo_bpj)}",
        f"ee_hi_bpj = {_fmt(report.ee_hi_bpj)}",
        f"dor = {_fmt(report.dor)}",
        f"lambda_s = {_fmt(report.lam_s)}",
    ]


SWEEP_CSV_COLUMNS = [
    "throughput_lo_bps",
    "throughput_hi_bps",
    "ee_lo_bpj",
    "ee_hi_bpj",
    "dor",
]

_SIM_COLUMNS = ["sim_rate_bps", "sim_rate_se", "sim_dor", "sim_dor_se"]

# Stable first-column names for commonly swept parameters.
_SWEEP_COLUMN_NAMES = {
    "geometry.orbit_height": "h_m",
    "rat.tx_power": "pt_w",
    "rat.min_snr": "gamma_min",
    "pat.max_power": "pmax_w",
    "pat.fixed_rate": "rfix_bps",
    "traffic.delay_threshold": "tth_s",
    "traffic.packet_bits": "d_bits",
    "link.bandwidth": "b_hz",
}


def sweep_column_name(path: str) -> str:
    return _SWEEP_COLUMN_NAMES.get(path, path.replace(".", "_"))


def run_sweep(
    scn: Scenario,
    sweep: SweepSpec,
    with_sim: bool = False,
    seed: int | None = None,
) -> tuple[list[str], list[list[str]]]:
    """One CSV row per sweep value, in input order.

    Simulation columns (when requested) use the scenario's replication
    count with a per-point seed derived from the base seed by offset.
    """
    header = [sweep_column_name(sweep.path)] + list(SWEEP_CSV_COLUMNS)
    if with_sim:
        header += _SIM_COLUMNS
    base_seed = scn.sim.seed if seed is None else seed
    rows = []
    for i, value in enumerate(sweep.values):
        point = apply_sweep_value(scn, sweep.path, value)
        parts = prepare(point)
        report = run_analyze(point, parts)
        row = [
            _fmt(value),
            _fmt(report.throughput_lo_bps),
            _fmt(report.throughput_hi_bps),
            _fmt(report.ee_lo_bpj),
            _fmt(report.ee_hi_bpj),
            _fmt(report.dor),
        ]
        if with_sim:
            _require_finite_wait(parts.lam_s)
            cfg = SimConfig(
                n_samples=point.sim.n_samples, seed=base_seed + i, scheme=point.scheme
            )
            scheme_cfg = point.rat if point.scheme == "rat" else point.pat
            rate = montecarlo.simulate_rate_power(
                point.geometry, parts.timeline, point.fading, parts.partition,
                point.budget, scheme_cfg, cfg,
            )
            dor = montecarlo.simulate_dor(
                parts.timeline, point.fading, parts.partition, point.budget,
                scheme_cfg, point.traffic, parts.lam_s, cfg,
            )
            row += [
                _fmt(rate.mean_rate_bps),
                _fmt(rate.rate_se_bps),
                _fmt(dor.dor),
                _fmt(dor.dor_se),
            ]
        rows.append(row)
    return header, rows


SIMULATE_CSV_HEADER = [
    "sim_rate_bps",
    "sim_rate_se",
    "sim_power_w",
    "sim_power_se",
    "sim_dor",
    "sim_dor_se",
    "n_samples",
    "rng",
]


def run_simulate(scn: Scenario, seed: int | None = None) -> tuple[list[str], list[str]]:
    """Monte-Carlo estimates for the scenario itself (header, one row)."""
    parts = prepare(scn)
    _require_finite_wait(parts.lam_s)
    cfg = SimConfig(
        n_samples=scn.sim.n_samples,
        seed=scn.sim.seed if seed is None else seed,
        scheme=scn.scheme,
    )
    scheme_cfg = scn.rat if scn.scheme == "rat" else scn.pat
    rate = montecarlo.simulate_rate_power(
        scn.geometry, parts.timeline, scn.fading, parts.partition,
        scn.budget, scheme_cfg, cfg,
    )
    dor = montecarlo.simulate_dor(
        parts.timeline, scn.fading, parts.partition, scn.budget,
        scheme_cfg, scn.traffic, parts.lam_s, cfg,
    )
    row = [
        _fmt(rate.mean_rate_bps),
        _fmt(rate.rate_se_bps),
        _fmt(rate.mean_power_w),
        _fmt(rate.power_se_w),
        _fmt(dor.dor),
        _fmt(dor.dor_se),
        str(cfg.n_samples),
        rate.rng,
    ]
    return SIMULATE_CSV_HEADER, row


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def run_validate(scn: Scenario, seed: int | None = None) -> list[CheckResult]:
    """Oracle cross-check suite on one scenario.

    Exercises the density normalization, the two CDF evaluation routes,
    state probabilities against sampled frequencies, the sampler against
    the analytic CDF, the closed forms against simulation, and the outage
    closed form against its definitional time integral.
    """
    checks: list[CheckResult] = []
    parts = prepare(scn)
    _require_finite_wait(parts.lam_s)
    report = run_analyze(scn, parts)
    fading = scn.fading
    base_seed = scn.sim.seed if seed is None else seed
    n_samples = scn.sim.n_samples

    # Density normalization.
    cutoff = channel._tail_cutoff(fading)
    mass, _ = integrate.quad(
        lambda y: channel.sr_pdf(fading, y), 0.0, cutoff,
        epsabs=1e-12, epsrel=1e-12, limit=300,
        points=[fading.mean_gain],
    )
    err = abs(mass - 1.0)
    checks.append(CheckResult("pdf_normalization", err < 1e-6, f"|integral-1| = {err:.3e}"))

    # Two independent CDF routes agree.
    grid = np.linspace(0.05, 4.0, 25) * fading.mean_gain
    worst = max(
        abs((1.0 - channel.sr_cdf_quadrature(fading, float(x)))
            - channel.tail_mass(fading, float(x)))
        for x in grid
    )
    checks.append(CheckResult("cdf_routes_agree", worst < 1e-8, f"max diff = {worst:.3e}"))

    # State probabilities: normalization and sampled frequencies.
    pi = parts.probs.probs[:, 0]
    sum_err = abs(float(pi.sum()) - 1.0)
    checks.append(CheckResult("state_probs_sum", sum_err < 1e-9, f"|sum-1| = {sum_err:.3e}"))

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(base_seed)))
    gains = sample_sr_gain(fading, rng, n_samples)
    states = parts.partition.classify(gains)
    freq = np.bincount(states, minlength=pi.size + 1)[1:] / n_samples
    se = np.sqrt(np.maximum(pi * (1.0 - pi), 1e-300) / n_samples)
    worst_z = float(np.max(np.abs(freq - pi) / np.maximum(se, 1e-15)))
    checks.append(CheckResult(
        "state_frequencies", worst_z <= 3.0, f"max |z| = {worst_z:.2f} (limit 3)"
    ))

    # Sampler against the analytic CDF.
    ks = ks_statistic(fading, gains)
    crit = KS_CRIT_ALPHA01 / math.sqrt(len(gains))
    checks.append(CheckResult(
        "sampler_ks", ks < crit, f"D = {ks:.5f}, crit(1%) = {crit:.5f}"
    ))

    # Closed forms against simulation.
    cfg = SimConfig(n_samples=n_samples, seed=base_seed + 1, scheme=scn.scheme)
    scheme_cfg = scn.rat if scn.scheme == "rat" else scn.pat
    rate = montecarlo.simulate_rate_power(
        scn.geometry, parts.timeline, fading, parts.partition, scn.budget,
        scheme_cfg, cfg,
    )
    slack = 3.0 * rate.rate_se_bps
    in_rate = (report.throughput_lo_bps - slack <= rate.mean_rate_bps
               <= report.throughput_hi_bps + slack)
    checks.append(CheckResult(
        "rate_bracket", in_rate,
        f"sim {rate.mean_rate_bps:.6g} vs [{report.throughput_lo_bps:.6g}, "
        f"{report.throughput_hi_bps:.6g}] (3se = {slack:.3g})",
    ))
    if rate.mean_power_w > 0:
        ee = rate.mean_rate_bps / rate.mean_power_w
        rel = math.sqrt(
            (rate.rate_se_bps / max(rate.mean_rate_bps, 1e-300)) ** 2
            + (rate.power_se_w / rate.mean_power_w) ** 2
        )
        ee_slack = 3.0 * ee * rel
        in_ee = report.ee_lo_bpj - ee_slack <= ee <= report.ee_hi_bpj + ee_slack
        checks.append(CheckResult(
            "ee_bracket", in_ee,
            f"sim {ee:.6g} vs [{report.ee_lo_bpj:.6g}, {report.ee_hi_bpj:.6g}]",
        ))

    dor_sim = montecarlo.simulate_dor(
        parts.timeline, fading, parts.partition, scn.budget, scheme_cfg,
        scn.traffic, parts.lam_s, cfg,
    )
    tol = 3.0 * dor_sim.dor_se + 1e-9
    dor_ok = abs(dor_sim.dor - report.dor) <= tol
    checks.append(CheckResult(
        "dor_closed_vs_sim", dor_ok,
        f"sim {dor_sim.dor:.6g} vs closed {report.dor:.6g} (tol {tol:.3g})",
    ))

    # Outage closed form against the definitional time integral.
    if scn.scheme == "rat":
        integral = schemes.rat_dor_integral(
            scn.budget, scn.rat, parts.partition, parts.timeline, parts.probs,
            scn.traffic, parts.lam_s,
        )
    else:
        integral = schemes.pat_dor_integral(
            parts.probs, scn.pat, parts.timeline, scn.traffic, parts.lam_s
        )
    diff = abs(integral - report.dor)
    checks.append(CheckResult(
        "dor_integral", diff < 1e-9, f"|integral - closed| = {diff:.3e}"
    ))

    # Determinism of the simulation pipeline.
    again = montecarlo.simulate_dor(
        parts.timeline, fading, parts.partition, scn.budget, scheme_cfg,
        scn.traffic, parts.lam_s, cfg,
    )
    checks.append(CheckResult(
        "determinism", again == dor_sim, "bit-identical repeat run"
    ))

    return checks
