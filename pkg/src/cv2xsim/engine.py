"""Vectorised per-drop link evaluation over a scenario."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .channel import (
    ChannelModelKind,
    LinkLoss,
    PropagationParams,
    blockage_from_count,
    pathloss,
    shadowing_std_db,
)
from .phy import LinkResult, McsEntry, RadioConfig, noise_power_dbm, rx_power_dbm, sinr_db
from .rng import link_normals
from .scenario import Scenario

TX_CHUNK = 1024


class LosPolicy(str, enum.Enum):
    GEOMETRIC = "geometric"
    ALWAYS_LOS = "always_los"
    ALWAYS_NLOS = "always_nlos"


@dataclass(frozen=True)
class LinkOptions:
    los_policy: LosPolicy = LosPolicy.GEOMETRIC
    los_cross_lane_distance_m: float = 200.0
    noise_limited: bool = True
    # None reuses the resource pool once per cell (reuse distance = ISD)
    reuse_distance_m: float | None = None
    range_m: float = 1000.0
    interior_only: bool = False


@dataclass
class LinkBatch:
    tx: np.ndarray
    rx: np.ndarray
    distance_m: np.ndarray
    los: np.ndarray
    n_blockers: np.ndarray
    pathloss_db: np.ndarray
    shadowing_db: np.ndarray
    blockage_db: np.ndarray
    total_db: np.ndarray
    interference_dbm: np.ndarray
    rx_power_dbm: np.ndarray
    sinr_db: np.ndarray
    success: np.ndarray

    def __len__(self):
        return len(self.tx)

    def to_results(self, scenario: Scenario) -> list[LinkResult]:
        ids = [v.id for v in scenario.vehicles]
        return [
            LinkResult(
                tx_id=ids[t],
                rx_id=ids[r],
                distance_m=float(d),
                loss=LinkLoss(float(pl), float(sh), float(bl)),
                rx_power_dbm=float(p),
                sinr_db=float(s),
                success=bool(ok),
            )
            for t, r, d, pl, sh, bl, p, s, ok in zip(
                self.tx, self.rx, self.distance_m, self.pathloss_db, self.shadowing_db,
                self.blockage_db, self.rx_power_dbm, self.sinr_db, self.success,
            )
        ]


def link_blockers(scenario: Scenario, tx: np.ndarray, rx: np.ndarray) -> np.ndarray:
    """Vehicles strictly between tx and rx for same-lane links, 0 otherwise."""
    same = scenario.lane[tx] == scenario.lane[rx]
    gap = np.abs(scenario.slot[tx] - scenario.slot[rx]) - 1
    return np.where(same, np.maximum(gap, 0), 0)


def classify_los(same_lane, n_blockers, distance_m, options: LinkOptions) -> np.ndarray:
    """Boolean LOS flag per link under the configured policy.

    Geometric policy: a same-lane link is NLOS once any vehicle sits between
    the ends; a cross-lane link is NLOS beyond ``los_cross_lane_distance_m``.
    """
    n = np.shape(distance_m)
    if options.los_policy is LosPolicy.ALWAYS_LOS:
        return np.ones(n, dtype=bool)
    if options.los_policy is LosPolicy.ALWAYS_NLOS:
        return np.zeros(n, dtype=bool)
    same_lane = np.asarray(same_lane, dtype=bool)
    return np.where(
        same_lane,
        np.asarray(n_blockers) == 0,
        np.asarray(distance_m) <= options.los_cross_lane_distance_m,
    )


def transmitters(scenario: Scenario, options: LinkOptions) -> np.ndarray:
    idx = np.arange(len(scenario.vehicles))
    if not options.interior_only:
        return idx
    x = scenario.positions[:, 0]
    r = options.range_m
    return idx[(x >= r) & (x <= scenario.config.length_m - r)]


def _lane_sorted_x(scenario: Scenario) -> dict[int, np.ndarray]:
    return {
        int(lane): np.sort(scenario.positions[scenario.lane == lane, 0])
        for lane in np.unique(scenario.lane)
    }


def interference_dbm(
    scenario: Scenario,
    tx: np.ndarray,
    rx: np.ndarray,
    model: ChannelModelKind,
    params: PropagationParams,
    radio: RadioConfig,
    options: LinkOptions,
    counter: Counter | None = None,
) -> np.ndarray:
    """Received power from the nearest co-channel transmitter of a reuse area.

    The interferer is a virtual transmitter in the tx lane, shifted by one
    reuse distance towards (or away from) the receiver, whichever lands on
    the highway closer to the receiver. A twin that coincides with the
    receiver is skipped. No shadowing on interferer links.
    """
    reuse = options.reuse_distance_m or scenario.config.isd_m
    length = scenario.config.length_m
    pos = scenario.positions
    x_tx, x_rx = pos[tx, 0], pos[rx, 0]

    cands = np.stack([x_tx - reuse, x_tx + reuse])
    lateral = (pos[tx, 1] - pos[rx, 1]) ** 2 + (pos[tx, 2] - pos[rx, 2]) ** 2
    # a twin sitting on the receiver is the receiver itself transmitting
    valid = (cands >= 0) & (cands <= length) & ((cands - x_rx) ** 2 + lateral > 0)
    gap = np.where(valid, np.abs(cands - x_rx), np.inf)
    pick = np.argmin(gap, axis=0)
    x_int = np.take_along_axis(cands, pick[None], 0)[0]
    has_int = np.isfinite(np.take_along_axis(gap, pick[None], 0)[0])

    out = np.full(len(tx), -np.inf)
    if not np.any(has_int):
        return out
    sel = np.flatnonzero(has_int)
    dx = x_int[sel] - x_rx[sel]
    dy = pos[tx[sel], 1] - pos[rx[sel], 1]
    dz = pos[tx[sel], 2] - pos[rx[sel], 2]
    dist = np.sqrt(dx**2 + dy**2 + dz**2)

    same_lane = scenario.lane[tx[sel]] == scenario.lane[rx[sel]]
    blockers = np.zeros(len(sel), dtype=np.int64)
    lanes = _lane_sorted_x(scenario)
    for lane, xs in lanes.items():
        m = same_lane & (scenario.lane[rx[sel]] == lane)
        if np.any(m):
            lo = np.minimum(x_int[sel][m], x_rx[sel][m])
            hi = np.maximum(x_int[sel][m], x_rx[sel][m])
            blockers[m] = np.searchsorted(xs, hi, "left") - np.searchsorted(xs, lo, "right")
    los = classify_los(same_lane, blockers, dist, options)
    loss = pathloss(model, dist, params, los=los, counter=counter)
    if ChannelModelKind(model) is ChannelModelKind.GPP3_REL15:
        loss = loss + blockage_from_count(blockers, params)
    out[sel] = rx_power_dbm(loss, radio)
    return out


def evaluate_links(
    scenario: Scenario,
    model: ChannelModelKind,
    params: PropagationParams,
    radio: RadioConfig,
    mcs: McsEntry,
    options: LinkOptions,
    seed: int,
    drop: int,
    tx_indices: np.ndarray | None = None,
    eval_range_m: float | None = None,
    counter: Counter | None = None,
) -> LinkBatch:
    """Evaluate every link from ``tx_indices`` to receivers within range."""
    model = ChannelModelKind(model)
    reach = options.range_m if eval_range_m is None else eval_range_m
    if tx_indices is None:
        tx_indices = transmitters(scenario, options)
    tx, rx, dist = scenario.candidate_links(reach, tx_indices)

    same_lane = scenario.lane[tx] == scenario.lane[rx]
    blockers = link_blockers(scenario, tx, rx)
    los = classify_los(same_lane, blockers, dist, options)

    pl = np.asarray(pathloss(model, dist, params, los=los, counter=counter)) if len(tx) else np.empty(0)
    std = np.asarray(shadowing_std_db(model, dist, params, los=los)) if len(tx) else np.empty(0)
    shadow = np.zeros(len(tx))
    active = std > 0
    if np.any(active):
        ids = np.fromiter((v.id for v in scenario.vehicles), np.int64, len(scenario.vehicles))
        z = link_normals(seed, drop, ids[tx[active]], ids[rx[active]])
        shadow[active] = std[active] * z
    if model is ChannelModelKind.GPP3_REL15:
        block = np.asarray(blockage_from_count(blockers, params), dtype=float)
    else:
        block = np.zeros(len(tx))
    total = pl + shadow + block

    if options.noise_limited or len(tx) == 0:
        interf = np.full(len(tx), -np.inf)
    else:
        interf = interference_dbm(scenario, tx, rx, model, params, radio, options, counter)
    p_rx = rx_power_dbm(total, radio)
    sinr = np.asarray(sinr_db(p_rx, noise_power_dbm(radio), interf), dtype=float)
    return LinkBatch(
        tx=tx, rx=rx, distance_m=dist, los=los, n_blockers=blockers,
        pathloss_db=pl, shadowing_db=shadow, blockage_db=block, total_db=total,
        interference_dbm=interf, rx_power_dbm=p_rx, sinr_db=sinr,
        success=sinr >= mcs.sinr_threshold_db,
    )


@dataclass
class DropTally:
    """Per-transmitter success/total link counts for one drop."""

    successes: np.ndarray
    totals: np.ndarray
    winner_clamped: int = 0

    @property
    def prr(self) -> float:
        total = int(self.totals.sum())
        return int(self.successes.sum()) / total if total else float("nan")


def run_drop(
    scenario: Scenario,
    model: ChannelModelKind,
    params: PropagationParams,
    radio: RadioConfig,
    mcs: McsEntry,
    options: LinkOptions,
    seed: int,
    drop: int,
    chunk: int = TX_CHUNK,
) -> DropTally:
    n = len(scenario.vehicles)
    successes = np.zeros(n, dtype=np.int64)
    totals = np.zeros(n, dtype=np.int64)
    counter = Counter()
    txs = transmitters(scenario, options)
    for start in range(0, len(txs), chunk):
        batch = evaluate_links(
            scenario, model, params, radio, mcs, options, seed, drop,
            tx_indices=txs[start:start + chunk], counter=counter,
        )
        totals += np.bincount(batch.tx, minlength=n)
        successes += np.bincount(batch.tx, weights=batch.success, minlength=n).astype(np.int64)
    return DropTally(successes, totals, counter["winner_clamped"])
