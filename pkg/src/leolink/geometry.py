"""Pass geometry: time-varying satellite-terminal distance and its
per-slot discretization.

The ground track is treated as a straight chord at the sub-satellite-point
speed; the slant range at elapsed time t is
sqrt(|d_half - v t|^2 + d_offset^2 + H^2), symmetric about mid-pass.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PassGeometry",
    "PassTimeline",
    "OutOfPass",
    "SlotTooLong",
    "sub_point_speed",
    "service_duration",
    "distance_at",
    "distance_range",
    "build_timeline",
    "half_track_from_plane",
    "circular_orbit_speed",
]

log = logging.getLogger(__name__)

# Standard gravitational parameter of Earth, m^3/s^2.
MU_EARTH = 3.986004418e14


@dataclass(frozen=True)
class PassGeometry:
    """Constants of a single overhead pass.

    earth_radius_m / orbit_height_m: Earth radius and orbital altitude.
    coverage_radius_m: ground radius of the beam footprint.
    half_track_m: half the sub-satellite ground track served per pass.
    sat_speed_ms: orbital speed of the satellite.
    terminal_offset_m: cross-track distance of the terminal from the track.
    path_loss_exp: path-loss exponent (>= 2).
    """

    earth_radius_m: float
    orbit_height_m: float
    coverage_radius_m: float
    half_track_m: float
    sat_speed_ms: float
    terminal_offset_m: float = 0.0
    path_loss_exp: float = 2.0

    def __post_init__(self):
        if self.earth_radius_m <= 0:
            raise ValueError(f"earth_radius_m must be > 0, got {self.earth_radius_m}")
        if self.orbit_height_m <= 0:
            raise ValueError(f"orbit_height_m must be > 0, got {self.orbit_height_m}")
        if self.coverage_radius_m <= 0:
            raise ValueError(f"coverage_radius_m must be > 0, got {self.coverage_radius_m}")
        if self.half_track_m <= 0:
            raise ValueError(f"half_track_m must be > 0, got {self.half_track_m}")
        if self.sat_speed_ms <= 0:
            raise ValueError(f"sat_speed_ms must be > 0, got {self.sat_speed_ms}")
        if self.terminal_offset_m < 0:
            raise ValueError(f"terminal_offset_m must be >= 0, got {self.terminal_offset_m}")
        if self.path_loss_exp < 2:
            raise ValueError(f"path_loss_exp must be >= 2, got {self.path_loss_exp}")


@dataclass(frozen=True)
class PassTimeline:
    """Discretized pass: per-slot bracketing of the slant range.

    Slot n (1-based) covers [(n-1)*slot_len_s, n*slot_len_s]; slot_dist_min/max
    bracket the distance over that interval. Any remainder of the pass past
    n_slots * slot_len_s is dropped.
    """

    service_time_s: float
    slot_len_s: float
    n_slots: int
    slot_dist_min: np.ndarray
    slot_dist_max: np.ndarray

    def __post_init__(self):
        if self.n_slots < 1:
            raise ValueError(f"n_slots must be >= 1, got {self.n_slots}")
        tol = 1e-9 * max(self.service_time_s, self.slot_len_s)
        if not (self.n_slots * self.slot_len_s <= self.service_time_s + tol
                and self.service_time_s < (self.n_slots + 1) * self.slot_len_s + tol):
            raise ValueError(
                f"n_slots={self.n_slots} inconsistent with service_time_s="
                f"{self.service_time_s}, slot_len_s={self.slot_len_s}"
            )
        if len(self.slot_dist_min) != self.n_slots or len(self.slot_dist_max) != self.n_slots:
            raise ValueError("slot distance arrays must have length n_slots")
        if np.any(self.slot_dist_min > self.slot_dist_max):
            raise ValueError("slot_dist_min must not exceed slot_dist_max")

    @property
    def span_s(self) -> float:
        """Length of the discretized portion of the pass."""
        return self.n_slots * self.slot_len_s


class OutOfPass(ValueError):
    """Requested time lies outside [0, service duration]."""


class SlotTooLong(ValueError):
    """Slot length exceeds the whole service duration."""


def sub_point_speed(geo: PassGeometry) -> float:
    """Ground speed of the sub-satellite point, v_sat * Re / (Re + H)."""
    return geo.sat_speed_ms * geo.earth_radius_m / (geo.earth_radius_m + geo.orbit_height_m)


def service_duration(geo: PassGeometry) -> float:
    """Time the terminal spends inside one satellite's service arc.

    Equals 2 * half_track / sub-point speed; independent of the terminal's
    cross-track offset.
    """
    return 2.0 * geo.half_track_m / sub_point_speed(geo)


def distance_at(geo: PassGeometry, t: float) -> float:
    """Slant range at elapsed pass time t in [0, T_s]."""
    t_s = service_duration(geo)
    if not (0.0 <= t <= t_s):
        raise OutOfPass(f"t={t} outside [0, {t_s}]")
    v = sub_point_speed(geo)
    along = geo.half_track_m - v * t
    return math.sqrt(along * along
                     + geo.terminal_offset_m**2
                     + geo.orbit_height_m**2)


def distance_range(geo: PassGeometry, all_terminals: bool = False) -> tuple[float, float]:
    """(min, max) slant range.

    Default is the envelope for this terminal's offset; with all_terminals
    the footprint-wide envelope (H, sqrt(H^2 + R^2)) is returned.
    """
    if all_terminals:
        return (
            geo.orbit_height_m,
            math.hypot(geo.orbit_height_m, geo.coverage_radius_m),
        )
    lo = math.hypot(geo.terminal_offset_m, geo.orbit_height_m)
    hi = math.sqrt(geo.half_track_m**2
                   + geo.terminal_offset_m**2
                   + geo.orbit_height_m**2)
    return lo, hi


def build_timeline(geo: PassGeometry, slot_len_s: float) -> PassTimeline:
    """Split the pass into slots and bracket the slant range in each.

    The range is piecewise monotone with its single minimum at mid-pass, so
    per-slot extrema come from the slot endpoints plus the mid-pass point
    when it falls inside the slot.
    """
    if slot_len_s <= 0:
        raise ValueError(f"slot_len_s must be > 0, got {slot_len_s}")
    t_s = service_duration(geo)
    if slot_len_s > t_s:
        raise SlotTooLong(f"slot_len_s={slot_len_s} exceeds service duration {t_s}")
    ratio = t_s / slot_len_s
    n = int(math.floor(ratio))
    if ratio - n > 1.0 - 1e-9:  # t_s is a whole number of slots up to rounding
        n += 1
    remainder = t_s - n * slot_len_s
    if remainder > 1e-9 * t_s:
        log.warning(
            "pass duration %.6g s is not a multiple of the %.6g s slot; "
            "dropping the trailing %.6g s", t_s, slot_len_s, remainder,
        )
    v = sub_point_speed(geo)
    t_mid = geo.half_track_m / v
    d_min = np.empty(n)
    d_max = np.empty(n)
    for i in range(n):
        t0 = i * slot_len_s
        t1 = min((i + 1) * slot_len_s, t_s)  # last edge can round past T_s
        candidates = [distance_at(geo, t0), distance_at(geo, t1)]
        if t0 < t_mid < t1:
            candidates.append(distance_at(geo, t_mid))
        d_min[i] = min(candidates)
        d_max[i] = max(candidates)
    return PassTimeline(
        service_time_s=t_s,
        slot_len_s=slot_len_s,
        n_slots=n,
        slot_dist_min=d_min,
        slot_dist_max=d_max,
    )


def half_track_from_plane(earth_radius_m: float, sats_per_plane: int) -> float:
    """Half the sub-satellite arc spacing for evenly spaced satellites."""
    if sats_per_plane < 1:
        raise ValueError(f"sats_per_plane must be >= 1, got {sats_per_plane}")
    return math.pi * earth_radius_m / sats_per_plane


def circular_orbit_speed(earth_radius_m: float, orbit_height_m: float) -> float:
    """Orbital speed of a circular orbit at the given altitude."""
    return math.sqrt(MU_EARTH / (earth_radius_m + orbit_height_m))
