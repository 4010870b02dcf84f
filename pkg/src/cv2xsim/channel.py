"""Large-scale channel: pathloss, log-normal shadowing and vehicle blockage.

Three pathloss models are provided (Two-Ray ground reflection, WINNER II D1
rural macro-cell, 3GPP Rel-15 sidelink). All pathloss functions are pure and
accept either a scalar distance or a numpy array; an optional boolean ``los``
array overrides ``params.los_state`` element-wise.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .rng import RandomStream
from .scenario import Node, Scenario

SPEED_OF_LIGHT = 299_792_458.0

WINNER_STANDARD_INTERCEPT_DB = 44.2

# WINNER II D1 validity windows (metres)
WINNER_LOS_MIN_M = 10.0
WINNER_LOS_MAX_M = 10_000.0
WINNER_NLOS_MIN_M = 50.0
WINNER_NLOS_MAX_M = 5_000.0

WINNER_SIGMA_LOS_PRE_BP = 4.0
WINNER_SIGMA_LOS_POST_BP = 6.0
WINNER_SIGMA_NLOS = 8.0
GPP3_SIGMA = 3.0


class ChannelModelKind(str, enum.Enum):
    TWO_RAY = "two_ray"
    WINNER_II_D1 = "winner_ii_d1"
    GPP3_REL15 = "3gpp_rel15"


class LosState(str, enum.Enum):
    LOS = "los"
    NLOS = "nlos"


class RangePolicy(str, enum.Enum):
    CLAMP = "clamp"
    STRICT = "strict"


class ChannelDomainError(ValueError):
    pass


class OutOfValidityRangeError(ChannelDomainError):
    pass


@dataclass(frozen=True)
class PropagationParams:
    carrier_freq_hz: float = 5.9e9
    tx_height_m: float = 1.5
    rx_height_m: float = 1.5
    los_state: LosState = LosState.LOS
    shadowing_enabled: bool = False
    blockage_enabled: bool = True
    gpp3_nlos_corrected: bool = False
    winner_standard_intercept: bool = False
    winner_range_policy: RangePolicy = RangePolicy.STRICT
    two_ray_shadowing_std_db: float = 0.0
    blockage_per_blocker_db: float = 5.0
    blockage_cap_db: float = 25.0

    def __post_init__(self):
        if not self.carrier_freq_hz > 0:
            raise ChannelDomainError("carrier_freq_hz must be > 0")
        if not (self.tx_height_m > 0 and self.rx_height_m > 0):
            raise ChannelDomainError("antenna heights must be > 0")
        if self.two_ray_shadowing_std_db < 0:
            raise ChannelDomainError("two_ray_shadowing_std_db must be >= 0")
        if self.blockage_per_blocker_db < 0 or self.blockage_cap_db < 0:
            raise ChannelDomainError("blockage parameters must be >= 0")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    @property
    def freq_ghz(self) -> float:
        return self.carrier_freq_hz / 1e9


@dataclass(frozen=True)
class ShadowingSpec:
    std_dev_db: float
    enabled: bool = True


@dataclass(frozen=True)
class LinkLoss:
    pathloss_db: float
    shadowing_db: float = 0.0
    blockage_db: float = 0.0

    @property
    def total_db(self) -> float:
        return self.pathloss_db + self.shadowing_db + self.blockage_db


def _unwrap(values, scalar_input: bool):
    return float(values[0]) if scalar_input else values


def _prepare(d, los, params: PropagationParams):
    scalar_input = np.ndim(d) == 0 and (los is None or np.ndim(los) == 0)
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if los is None:
        los = np.full(d.shape, params.los_state == LosState.LOS)
    else:
        los = np.broadcast_to(np.asarray(los, dtype=bool), d.shape)
    return d, los, scalar_input


def _require_positive(d: np.ndarray):
    if np.any(~(d > 0)):
        raise ChannelDomainError(f"distance must be > 0, got {d[~(d > 0)][0]}")


def two_ray_cross_distance(params: PropagationParams) -> float:
    return 4.0 * math.pi * params.tx_height_m * params.rx_height_m / params.wavelength_m


def two_ray_pathloss(d, params: PropagationParams, los=None):
    """Free-space loss up to the cross distance, 40 dB/decade beyond it."""
    d, _, scalar = _prepare(d, None, params)
    _require_positive(d)
    dc = two_ray_cross_distance(params)
    near = 20.0 * np.log10(4.0 * np.pi * d / params.wavelength_m)
    far = 20.0 * np.log10(d**2 / (params.tx_height_m * params.rx_height_m))
    return _unwrap(np.where(d <= dc, near, far), scalar)


def winner_breakpoint_distance(params: PropagationParams) -> float:
    return 4.0 * params.tx_height_m * params.rx_height_m * params.carrier_freq_hz / SPEED_OF_LIGHT


def _winner_clamp(d, los, params: PropagationParams, counter: Counter | None):
    lo = np.where(los, WINNER_LOS_MIN_M, WINNER_NLOS_MIN_M)
    hi = np.where(los, WINNER_LOS_MAX_M, WINNER_NLOS_MAX_M)
    # validity windows are open intervals; a value sitting exactly on a bound
    # is out of range (strict) or counted as clamped (no-op clamp)
    bad = (d <= lo) | (d >= hi)
    if np.any(bad):
        if params.winner_range_policy == RangePolicy.STRICT:
            i = int(np.flatnonzero(bad)[0])
            state = "LOS" if los[i] else "NLOS"
            bound = "lower" if d[i] <= lo[i] else "upper"
            raise OutOfValidityRangeError(
                f"WINNER II D1 {state}: d={d[i]} m violates {bound} bound "
                f"({lo[i]}, {hi[i]}) m"
            )
        if counter is not None:
            counter["winner_clamped"] += int(bad.sum())
    return np.clip(d, lo, hi)


def winner_d1_pathloss(d, params: PropagationParams, los=None, counter: Counter | None = None):
    """WINNER II D1 rural macro-cell pathloss (f_c in GHz inside the log terms).

    Out-of-window distances are clamped to the nearest bound (tallied in
    ``counter["winner_clamped"]``) or raise under the strict range policy.
    """
    d, los, scalar = _prepare(d, los, params)
    _require_positive(d)
    d = _winner_clamp(d, los, params, counter)
    h_bs, h_ms = params.tx_height_m, params.rx_height_m
    f_ratio = params.freq_ghz / 5.0
    d_bp = winner_breakpoint_distance(params)

    los_near = 21.5 * np.log10(d) + 20.0 * np.log10(f_ratio)
    if params.winner_standard_intercept:
        los_near = los_near + WINNER_STANDARD_INTERCEPT_DB
    los_far = (
        40.0 * np.log10(d)
        + 10.5
        - 18.5 * np.log10(h_bs)
        - 18.5 * np.log10(h_ms)
        + 1.5 * np.log10(f_ratio)
    )
    nlos = (
        25.1 * np.log10(d)
        + 55.4
        - 0.13 * (h_bs - 25.0) * np.log10(d / 100.0)
        - 0.9 * (h_ms - 1.5)
        + 21.3 * np.log10(f_ratio)
    )
    out = np.where(los, np.where(d <= d_bp, los_near, los_far), nlos)
    return _unwrap(out, scalar)


def gpp3_pathloss(d, params: PropagationParams, los=None):
    d, los, scalar = _prepare(d, los, params)
    _require_positive(d)
    log_f = np.log10(params.freq_ghz)
    los_pl = 32.4 + 20.0 * np.log10(d) + 20.0 * log_f
    if params.gpp3_nlos_corrected:
        nlos_pl = 36.85 + 30.0 * np.log10(d) + 18.9 * log_f
    else:
        nlos_pl = np.full(d.shape, 36.85 + 18.9 * log_f)
    return _unwrap(np.where(los, los_pl, nlos_pl), scalar)


def pathloss(model: ChannelModelKind, d, params: PropagationParams, los=None, counter=None):
    model = ChannelModelKind(model)
    if model is ChannelModelKind.TWO_RAY:
        return two_ray_pathloss(d, params)
    if model is ChannelModelKind.WINNER_II_D1:
        return winner_d1_pathloss(d, params, los=los, counter=counter)
    return gpp3_pathloss(d, params, los=los)


def shadowing_std_db(model: ChannelModelKind, d, params: PropagationParams, los=None):
    """Shadowing standard deviation per link (0 where shadowing is disabled)."""
    model = ChannelModelKind(model)
    d, los, scalar = _prepare(d, los, params)
    if not params.shadowing_enabled:
        return _unwrap(np.zeros(d.shape), scalar)
    if model is ChannelModelKind.TWO_RAY:
        std = np.full(d.shape, params.two_ray_shadowing_std_db)
    elif model is ChannelModelKind.GPP3_REL15:
        std = np.full(d.shape, GPP3_SIGMA)
    else:
        # branch selection follows the (clamped) distance used for the pathloss
        lo = np.where(los, WINNER_LOS_MIN_M, WINNER_NLOS_MIN_M)
        hi = np.where(los, WINNER_LOS_MAX_M, WINNER_NLOS_MAX_M)
        dc = np.clip(d, lo, hi)
        d_bp = winner_breakpoint_distance(params)
        std = np.where(
            los,
            np.where(dc <= d_bp, WINNER_SIGMA_LOS_PRE_BP, WINNER_SIGMA_LOS_POST_BP),
            WINNER_SIGMA_NLOS,
        )
    return _unwrap(std, scalar)


def is_stochastic(model: ChannelModelKind, params: PropagationParams) -> bool:
    """Whether any link of this model can draw a non-zero shadowing value."""
    if not params.shadowing_enabled:
        return False
    if ChannelModelKind(model) is ChannelModelKind.TWO_RAY:
        return params.two_ray_shadowing_std_db > 0
    return True


def sample_shadowing(spec: ShadowingSpec, rng_stream: RandomStream) -> float:
    if spec.std_dev_db < 0:
        raise ChannelDomainError("std_dev_db must be >= 0")
    if not spec.enabled or spec.std_dev_db == 0:
        return 0.0
    return spec.std_dev_db * rng_stream.normal()


def blockage_from_count(n_blockers, params: PropagationParams):
    if not params.blockage_enabled:
        return np.zeros(np.shape(n_blockers)) if np.ndim(n_blockers) else 0.0
    loss = params.blockage_per_blocker_db * np.maximum(0, n_blockers)
    loss = np.minimum(loss, params.blockage_cap_db)
    return loss if np.ndim(loss) else float(loss)


def count_blockers(scenario: Scenario, tx: Node, rx: Node) -> int:
    """Vehicles strictly between tx and rx, counted only for same-lane links."""
    if tx.lane_index is None or tx.lane_index != rx.lane_index:
        return 0
    lo, hi = sorted((tx.position[0], rx.position[0]))
    return sum(
        1
        for v in scenario.vehicles
        if v.lane_index == tx.lane_index and lo < v.position[0] < hi
    )


def blockage_loss(scenario: Scenario, tx: Node, rx: Node, params: PropagationParams) -> float:
    return blockage_from_count(count_blockers(scenario, tx, rx), params)


def link_loss(
    model: ChannelModelKind,
    d: float,
    params: PropagationParams,
    n_blockers: int = 0,
    rng_stream: RandomStream | None = None,
    counter: Counter | None = None,
) -> LinkLoss:
    """Pathloss + shadowing + (3GPP only) blockage for a single link.

    ``n_blockers`` carries the link geometry; see :func:`count_blockers`.
    """
    model = ChannelModelKind(model)
    pl = pathloss(model, d, params, counter=counter)
    std = shadowing_std_db(model, d, params)
    shadow = 0.0
    if std > 0:
        if rng_stream is None:
            raise ValueError("shadowing is enabled but no random stream was given")
        shadow = sample_shadowing(ShadowingSpec(std, params.shadowing_enabled), rng_stream)
    blockage = 0.0
    if model is ChannelModelKind.GPP3_REL15:
        blockage = blockage_from_count(n_blockers, params)
    return LinkLoss(float(pl), float(shadow), float(blockage))
