"""Shadowed-Rician fading statistics and the finite-state gain partition.

Covers the power-gain PDF/CDF, steady-state probabilities of the amplitude
partition, the level-crossing rate of the envelope, and the average fade
duration used as the mean waiting time in the no-transmission state.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .special import (
    DEFAULT_SERIES,
    NonConvergent,
    SeriesControl,
    bessel_i,
    confluent_1f1,
    log_gamma,
    pochhammer,
)

__all__ = [
    "SrFading",
    "DopplerSpec",
    "GainPartition",
    "StateProbMatrix",
    "ZeroCrossingRate",
    "sr_pdf",
    "sr_cdf",
    "sr_cdf_quadrature",
    "sr_cdf_many",
    "tail_mass",
    "state_probs",
    "state_prob_matrix",
    "lcr",
    "afd",
    "doppler_moments",
    "tail_mean_gain",
    "gain_quantile",
    "equal_probability_partition",
]

_INT_M_TOL = 1e-9

# Density evaluations feed 1e-10 quadratures; keep their series tighter.
_PDF_SERIES = SeriesControl(rel_tol=1e-13, max_terms=10_000)


class ZeroCrossingRate(ArithmeticError):
    """Fade duration is undefined: the crossing rate (or the CDF mass
    below the threshold) underflowed to zero."""


@dataclass(frozen=True)
class SrFading:
    """Shadowed-Rician power-gain parameters.

    m: severity of the line-of-sight shadowing (>= 0.5, not necessarily
       integer); b0: half the average multipath power; omega: average
       line-of-sight power.
    """

    m: float
    b0: float
    omega: float

    def __post_init__(self):
        if self.m < 0.5:
            raise ValueError(f"m must be >= 0.5, got {self.m}")
        if self.b0 <= 0:
            raise ValueError(f"b0 must be > 0, got {self.b0}")
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")

    @property
    def alpha(self) -> float:
        num = 2.0 * self.b0 * self.m
        return (num / (num + self.omega)) ** self.m / (2.0 * self.b0)

    @property
    def beta(self) -> float:
        return 1.0 / (2.0 * self.b0)

    @property
    def delta(self) -> float:
        return self.omega / (2.0 * self.b0 * (2.0 * self.b0 * self.m + self.omega))

    @property
    def mean_gain(self) -> float:
        """First moment of the power gain: multipath plus LOS power."""
        return 2.0 * self.b0 + self.omega

    @property
    def integer_m(self) -> int | None:
        """m as an int when it is one (within 1e-9), else None."""
        r = round(self.m)
        if r >= 1 and abs(self.m - r) < _INT_M_TOL:
            return int(r)
        return None


@dataclass(frozen=True)
class DopplerSpec:
    """Doppler statistics of the scattered component.

    f_scatter_max_hz: maximum Doppler frequency of the scattering; the
    line-of-sight Doppler is taken as negligible against it. mean_aoa_rad
    in [-pi, pi) and aoa_width >= 0 shape the angle-of-arrival spectrum.
    """

    f_scatter_max_hz: float
    mean_aoa_rad: float = 0.0
    aoa_width: float = 0.0

    def __post_init__(self):
        if self.f_scatter_max_hz <= 0:
            raise ValueError(f"f_scatter_max_hz must be > 0, got {self.f_scatter_max_hz}")
        if not (-math.pi <= self.mean_aoa_rad < math.pi):
            raise ValueError(f"mean_aoa_rad must be in [-pi, pi), got {self.mean_aoa_rad}")
        if self.aoa_width < 0:
            raise ValueError(f"aoa_width must be >= 0, got {self.aoa_width}")


def doppler_moments(fading: SrFading, dop: DopplerSpec) -> tuple[float, float]:
    """Spectral moments (b1, b2) of the scattered component.

    b1 = b0 * 2 pi f cos(aoa) I1(k)/I0(k);
    b2 = b0 * 2 pi^2 f^2 [I0(k) + cos(aoa) I2(k)] / I0(k).
    Raises ValueError if the moment determinant b0 b2 - b1^2 is not positive.
    """
    b0 = fading.b0
    f = dop.f_scatter_max_hz
    cos_aoa = math.cos(dop.mean_aoa_rad)
    i0 = bessel_i(0, dop.aoa_width)
    i1 = bessel_i(1, dop.aoa_width)
    i2 = bessel_i(2, dop.aoa_width)
    b1 = b0 * 2.0 * math.pi * f * cos_aoa * i1 / i0
    b2 = b0 * 2.0 * math.pi**2 * f**2 * (i0 + cos_aoa * i2) / i0
    if b0 * b2 - b1 * b1 <= 0:
        raise ValueError("degenerate Doppler spectrum: b0*b2 - b1^2 <= 0")
    return b1, b2


def _pdf_coeffs_integer_m(fading: SrFading) -> np.ndarray:
    # zeta_k = (-1)^k (1-m)_k delta^k / (k!)^2, k = 0..m-1; all positive.
    m = fading.integer_m
    coeffs = np.empty(m)
    for k in range(m):
        coeffs[k] = ((-1.0) ** k * pochhammer(1.0 - m, k) * fading.delta**k
                     / math.factorial(k) ** 2)
    return coeffs


def _hyp1f1_m_1_array(m: float, x: np.ndarray, rel_tol: float = 1e-13,
                      max_terms: int = 10_000) -> np.ndarray:
    # 1F1(m; 1; x) on an array of x >= 0; positive-term recurrence.
    term = np.ones_like(x)
    total = np.ones_like(x)
    for n in range(max_terms):
        term = term * ((m + n) * x / ((1.0 + n) * (n + 1.0)))
        total += term
        if np.all(term <= rel_tol * total):
            return total
    raise ArithmeticError("1F1 array evaluation did not converge")


def _scaled_hyp1f1_b1(a: float, z: float) -> float:
    # exp(-z) * 1F1(a; 1; z) without forming exp(z). Direct product while
    # 1F1 stays in range; large-argument expansion beyond:
    # z^(a-1)/Gamma(a) * sum_k [(1-a)_k]^2 / (k! z^k), truncated at the
    # smallest term.
    if z <= 600.0:
        return math.exp(-z) * confluent_1f1(a, 1.0, z, _PDF_SERIES)
    total = 1.0
    term = 1.0
    prev = math.inf
    k = 0
    while True:
        k += 1
        term *= (k - a) ** 2 / (k * z)
        if abs(term) >= prev or abs(term) < 1e-17 * abs(total):
            break
        total += term
        prev = abs(term)
    return math.exp((a - 1.0) * math.log(z) - log_gamma(a)) * total


def sr_pdf(fading: SrFading, y):
    """Power-gain density alpha * exp(-beta y) * 1F1(m; 1; delta y).

    Accepts a scalar or ndarray; integer m uses the finite polynomial
    expansion, otherwise the series form is summed directly.
    """
    if isinstance(y, (int, float)):  # fast path for quadrature integrands
        if y < 0:
            raise ValueError("power gain must be >= 0")
        m_int = fading.integer_m
        if m_int is not None:
            coeffs = _pdf_coeffs_integer_m(fading)
            poly = 0.0
            for c in reversed(coeffs):
                poly = poly * y + c
            return fading.alpha * poly * math.exp(-(fading.beta - fading.delta) * y)
        by = fading.beta * y
        if by < 700.0:
            return (fading.alpha * math.exp(-by)
                    * confluent_1f1(fading.m, 1.0, fading.delta * y, _PDF_SERIES))
        # exp(-beta y) alone would underflow; fold everything into one
        # exponent so values survive down to the denormal floor.
        scaled = _scaled_hyp1f1_b1(fading.m, fading.delta * y)
        log_pdf = (math.log(fading.alpha)
                   - (fading.beta - fading.delta) * y
                   + math.log(scaled))
        return math.exp(log_pdf) if log_pdf > -745.0 else 0.0
    x = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(x < 0):
        raise ValueError("power gain must be >= 0")
    m_int = fading.integer_m
    if m_int is not None:
        coeffs = _pdf_coeffs_integer_m(fading)
        poly = np.polynomial.polynomial.polyval(x, coeffs)
        out = fading.alpha * poly * np.exp(-(fading.beta - fading.delta) * x)
    else:
        out = (fading.alpha * np.exp(-fading.beta * x)
               * _hyp1f1_m_1_array(fading.m, fading.delta * x))
    return out


def _cdf_closed_integer_m(fading: SrFading, x: float) -> float:
    # 1 - alpha * sum_k zeta_k sum_{p<=k} k!/p! x^p e^{-(b-d)x} / (b-d)^{k+1-p}
    m = fading.integer_m
    bd = fading.beta - fading.delta
    coeffs = _pdf_coeffs_integer_m(fading)
    expo = math.exp(-bd * x)
    total = 0.0
    for k in range(m):
        inner = 0.0
        for p in range(k + 1):
            inner += (math.factorial(k) / math.factorial(p)
                      * x**p * expo / bd ** (k + 1 - p))
        total += coeffs[k] * inner
    return 1.0 - fading.alpha * total


def _tail_cutoff(fading: SrFading) -> float:
    # Beyond this gain the remaining CDF mass is far below 1e-16.
    bd = fading.beta - fading.delta
    return fading.mean_gain + (80.0 + 20.0 * max(fading.m, 1.0)) / bd


def sr_cdf_quadrature(fading: SrFading, x: float) -> float:
    """CDF by adaptive quadrature of the density over [0, x].

    The interval is split at the distribution mean so the quadrature sees
    the exponential tail separately; absolute tolerance 1e-10.
    """
    if x < 0:
        raise ValueError(f"power gain must be >= 0, got {x}")
    if x == 0.0:
        return 0.0
    hi = min(x, _tail_cutoff(fading))
    mean = fading.mean_gain
    f = lambda y: sr_pdf(fading, y)
    if hi <= mean:
        val, _ = integrate.quad(f, 0.0, hi, epsabs=1e-10, epsrel=1e-10, limit=200)
    else:
        v1, _ = integrate.quad(f, 0.0, mean, epsabs=1e-10, epsrel=1e-10, limit=200)
        v2, _ = integrate.quad(f, mean, hi, epsabs=1e-10, epsrel=1e-10, limit=200)
        val = v1 + v2
    return min(max(val, 0.0), 1.0)


def sr_cdf(fading: SrFading, x: float) -> float:
    """Power-gain CDF at x >= 0.

    Integer m takes the closed form; non-integer m integrates the density
    (adaptive quadrature, abs tol 1e-10).
    """
    if x < 0:
        raise ValueError(f"power gain must be >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if fading.integer_m is not None:
        return min(max(float(_cdf_closed_integer_m(fading, x)), 0.0), 1.0)
    return sr_cdf_quadrature(fading, x)


def tail_mass(fading: SrFading, x: float) -> float:
    """Complementary CDF P(G >= x), stable deep into the tail.

    Formally 1 - sr_cdf(x), but evaluated without the cancellation that
    flushes tail probabilities below ~1e-16 to zero: integer m keeps the
    closed form's explicit tail term, non-integer m integrates the density
    over [x, cutoff] directly.
    """
    if x < 0:
        raise ValueError(f"power gain must be >= 0, got {x}")
    if x == 0.0:
        return 1.0
    m_int = fading.integer_m
    if m_int is not None:
        bd = fading.beta - fading.delta
        coeffs = _pdf_coeffs_integer_m(fading)
        expo = math.exp(-bd * x)
        total = 0.0
        for k in range(m_int):
            inner = 0.0
            for p in range(k + 1):
                inner += (math.factorial(k) / math.factorial(p)
                          * x**p * expo / bd ** (k + 1 - p))
            total += coeffs[k] * inner
        return min(max(float(fading.alpha) * total, 0.0), 1.0)
    hi = x + (80.0 + 20.0 * max(fading.m, 1.0)) / (fading.beta - fading.delta)
    f = lambda y: sr_pdf(fading, y)
    mean = fading.mean_gain
    if x < mean < hi:
        v1, _ = integrate.quad(f, x, mean, epsabs=1e-300, epsrel=1e-11, limit=200)
        v2, _ = integrate.quad(f, mean, hi, epsabs=1e-300, epsrel=1e-11, limit=200)
        val = v1 + v2
    else:
        val, _ = integrate.quad(f, x, hi, epsabs=1e-300, epsrel=1e-11, limit=200)
    return min(max(val, 0.0), 1.0)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def sr_cdf_many(fading: SrFading, xs: np.ndarray) -> np.ndarray:
    """CDF at many points at once (same values as sr_cdf, vectorized).

    Anchors at the smallest point with the scalar routine, then accumulates
    panel integrals of the density between consecutive sorted points with
    8-node Gauss-Legendre quadrature.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1:
        raise ValueError("xs must be one-dimensional")
    if np.any(xs < 0):
        raise ValueError("power gain must be >= 0")
    order = np.argsort(xs)
    sx = xs[order]
    out_sorted = np.empty_like(sx)
    out_sorted[0] = sr_cdf(fading, sx[0])
    if len(sx) > 1:
        a = sx[:-1]
        b = sx[1:]
        halfw = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        nodes = mid[None, :] + halfw[None, :] * _GL_NODES[:, None]
        vals = sr_pdf(fading, nodes.ravel()).reshape(nodes.shape)
        panels = halfw * np.einsum("i,ij->j", _GL_WEIGHTS, vals)
        out_sorted[1:] = out_sorted[0] + np.cumsum(panels)
    out = np.empty_like(out_sorted)
    out[order] = np.clip(out_sorted, 0.0, 1.0)
    return out


@dataclass(frozen=True)
class GainPartition:
    """Amplitude thresholds mu_0 < mu_1 < ... < mu_{K-1} of the K-state
    gain partition; mu_0 = 0 and the top state is open-ended.

    mu_1 == 0 is tolerated as the degenerate no-outage partition.
    top_mean_gain optionally records E[G | G >= mu_{K-1}^2]; when present
    it gives the open-ended top state a finite upper-bound gain.
    """

    thresholds: np.ndarray
    top_mean_gain: float | None = None

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=float)
        object.__setattr__(self, "thresholds", t)
        if t.ndim != 1 or len(t) < 2:
            raise ValueError("need at least two thresholds (K >= 2)")
        if t[0] != 0.0:
            raise ValueError(f"mu_0 must be 0, got {t[0]}")
        if t[1] < 0.0 or np.any(np.diff(t[1:]) <= 0.0):
            raise ValueError("thresholds must be strictly increasing above mu_0")
        if self.top_mean_gain is not None and self.top_mean_gain < t[-1] ** 2:
            raise ValueError("top_mean_gain below the top threshold's gain")

    @property
    def n_states(self) -> int:
        return len(self.thresholds)

    def classify(self, gains: np.ndarray) -> np.ndarray:
        """1-based state index for each power gain sample."""
        sq = self.thresholds**2
        return np.searchsorted(sq, np.asarray(gains, dtype=float), side="right")


@dataclass(frozen=True)
class StateProbMatrix:
    """K x N grid of steady-state probabilities, one column per time slot."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", p)
        if p.ndim != 2:
            raise ValueError("probs must be a K x N matrix")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        colsums = p.sum(axis=0)
        if np.any(np.abs(colsums - 1.0) > 1e-9):
            raise ValueError("each slot's state probabilities must sum to 1")

    @property
    def n_states(self) -> int:
        return self.probs.shape[0]

    @property
    def n_slots(self) -> int:
        return self.probs.shape[1]


def state_probs(fading: SrFading, part: GainPartition) -> np.ndarray:
    """Steady-state probability of each gain state.

    pi_k = F(mu_k^2) - F(mu_{k-1}^2) for interior states; the top state
    takes the remaining tail mass.
    """
    k = part.n_states
    # Interior probabilities as complementary-CDF differences: identical to
    # CDF differences in exact arithmetic but they keep deep-tail states
    # from cancelling to zero.
    tails = np.array([tail_mass(fading, float(mu) ** 2) for mu in part.thresholds])
    pi = np.empty(k)
    pi[0] = sr_cdf(fading, float(part.thresholds[1]) ** 2)
    pi[1:-1] = tails[1:-1] - tails[2:]
    pi[-1] = tails[-1]
    return np.clip(pi, 0.0, 1.0)


def state_prob_matrix(fading: SrFading, part: GainPartition, n_slots: int) -> StateProbMatrix:
    """Per-slot state probabilities.

    Fading parameters are constant within a pass here, so every column is
    the same vector; the matrix shape stays so slot-varying fading can be
    introduced without touching consumers.
    """
    if n_slots < 1:
        raise ValueError(f"n_slots must be >= 1, got {n_slots}")
    pi = state_probs(fading, part)
    return StateProbMatrix(probs=np.tile(pi[:, None], (1, n_slots)))


def lcr(
    fading: SrFading,
    dop: DopplerSpec,
    r_th: float,
    ctl: SeriesControl = DEFAULT_SERIES,
    xi_exponent: str = "squared",
) -> float:
    """Level-crossing rate of the fading envelope at amplitude r_th.

    Series evaluation; each term couples a half-integer Pochhammer weight
    with a pair of confluent-hypergeometric factors. xi_exponent selects how
    the spectral-moment bracket enters each factor: "squared" (default)
    keeps the fixed square, "index" raises it to the term index instead.
    """
    if r_th <= 0:
        raise ValueError(f"r_th must be > 0, got {r_th}")
    if xi_exponent not in ("squared", "index"):
        raise ValueError(f"xi_exponent must be 'squared' or 'index', got {xi_exponent!r}")
    m, b0, om = fading.m, fading.b0, fading.omega
    b1, b2 = doppler_moments(fading, dop)
    det = b0 * b2 - b1 * b1
    bracket = b1 * b1 / (b0 * det)
    q = 2.0 * b0 * om / (2.0 * b0 * m + om)
    z = fading.delta * r_th * r_th

    def xi(n: int) -> float:
        scale = math.exp(log_gamma(n + m) - n * math.log(2.0) - log_gamma(n + 1.0))
        power = 2.0 if xi_exponent == "squared" else float(n)
        return (scale * bracket**power * q**n
                * confluent_1f1(n + m, n + 1.0, z, ctl))

    prefactor = (
        1.0 / (math.sqrt(2.0 * math.pi) * math.exp(log_gamma(m)))
        * (2.0 * b0 * m / (2.0 * b0 * m + om)) ** m
        * math.sqrt(det / b0)
        * (r_th / b0)
        * math.exp(-r_th * r_th / b0)
    )

    total = 0.0
    weight = 1.0  # (1/2)_n (-1)^n / n!
    xi_next = xi(0)
    for n in range(ctl.max_terms):
        xi_n, xi_next = xi_next, xi(n + 1)
        term = weight * (xi_n + xi_next)
        total += term
        if n > 0 and abs(term) < ctl.rel_tol * abs(total):
            return max(prefactor * total, 0.0)
        weight *= -(0.5 + n) / (n + 1.0)
    raise NonConvergent(
        f"crossing-rate series at r_th={r_th} did not reach rel_tol="
        f"{ctl.rel_tol} within {ctl.max_terms} terms"
    )


def afd(fading: SrFading, dop: DopplerSpec, r_th: float,
        ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """Average fade duration below amplitude r_th: CDF mass / crossing rate."""
    if r_th <= 0:
        raise ValueError(f"r_th must be > 0, got {r_th}")
    rate = lcr(fading, dop, r_th, ctl)
    mass = sr_cdf(fading, r_th * r_th)
    if rate <= 0.0 or mass <= 0.0:
        raise ZeroCrossingRate(
            f"fade duration undefined at r_th={r_th}: crossing rate {rate}, "
            f"below-threshold mass {mass}"
        )
    return mass / rate


def tail_mean_gain(fading: SrFading, x: float) -> float:
    """Conditional mean power gain E[G | G >= x].

    Both the tail mass and the tail first moment are integrated over the
    same interval, so the ratio stays accurate even where each underflows
    relative to 1.
    """
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return fading.mean_gain
    hi = x + (80.0 + 20.0 * max(fading.m, 1.0)) / (fading.beta - fading.delta)
    mean = fading.mean_gain
    pieces = [x, mean, hi] if x < mean < hi else [x, hi]
    mass = 0.0
    moment = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        v, _ = integrate.quad(lambda y: sr_pdf(fading, y), a, b,
                              epsabs=1e-300, epsrel=1e-11, limit=200)
        w, _ = integrate.quad(lambda y: y * sr_pdf(fading, y), a, b,
                              epsabs=1e-300, epsrel=1e-11, limit=200)
        mass += v
        moment += w
    if mass <= 0.0 or not math.isfinite(moment / mass):
        raise ValueError(f"no resolvable tail mass above x={x}")
    return moment / mass


def gain_quantile(fading: SrFading, p: float) -> float:
    """Power gain g with F(g) = p, for p in (0, 1)."""
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must be in (0, 1), got {p}")
    hi = fading.mean_gain
    while sr_cdf(fading, hi) < p:
        hi *= 2.0
        if hi > 1e9:
            raise ArithmeticError(f"quantile search diverged for p={p}")
    return optimize.brentq(lambda g: sr_cdf(fading, g) - p, 0.0, hi, xtol=1e-13, rtol=8.9e-16)


def _tail_quantile(fading: SrFading, target: float, lo_gain: float) -> float:
    """Gain g >= lo_gain with tail_mass(g) = target (target < tail at lo)."""
    hi = max(2.0 * lo_gain, fading.mean_gain)
    while tail_mass(fading, hi) > target:
        hi *= 2.0
        if hi > 1e12:
            raise ArithmeticError(f"tail quantile search diverged at target={target}")
    # Ratio form keeps the root-finder stable when target is deep in the tail.
    return optimize.brentq(
        lambda g: tail_mass(fading, g) / target - 1.0,
        lo_gain, hi, xtol=1e-13, rtol=8.9e-16,
    )


def equal_probability_partition(
    fading: SrFading,
    first_threshold: float,
    n_states: int,
    upper_thresholds: np.ndarray | None = None,
) -> GainPartition:
    """Build the K-state partition above a scheme-defined first threshold.

    By default the states above the first threshold share the remaining
    probability mass equally (solved in tail-mass domain, which survives
    first thresholds far into the tail); pass upper_thresholds (amplitudes,
    length K - 2) to pin them explicitly instead. The top state's
    conditional mean gain is recorded for finite upper-bound evaluation.
    """
    if n_states < 2:
        raise ValueError(f"n_states must be >= 2, got {n_states}")
    if first_threshold < 0:
        raise ValueError(f"first_threshold must be >= 0, got {first_threshold}")
    if upper_thresholds is not None:
        uppers = np.asarray(upper_thresholds, dtype=float)
        if len(uppers) != n_states - 2:
            raise ValueError(
                f"need {n_states - 2} upper thresholds for K={n_states}, got {len(uppers)}"
            )
        thresholds = np.concatenate(([0.0, first_threshold], uppers))
    else:
        s1 = tail_mass(fading, first_threshold**2)
        # Below ~1e-290 the quantile targets leave the normal double range
        # and the root finder sees quantized garbage; fail explicitly.
        if s1 < 1e-290:
            raise ArithmeticError(
                f"no resolvable probability mass above threshold {first_threshold} "
                f"(tail mass {s1:.3g})"
            )
        uppers = []
        lo_gain = first_threshold**2
        for j in range(2, n_states):
            target = s1 * (n_states - j) / (n_states - 1)
            lo_gain = _tail_quantile(fading, target, lo_gain)
            uppers.append(math.sqrt(lo_gain))
        thresholds = np.concatenate(([0.0, first_threshold], uppers))
    top = tail_mean_gain(fading, float(thresholds[-1]) ** 2)
    return GainPartition(thresholds=thresholds, top_mean_gain=top)
