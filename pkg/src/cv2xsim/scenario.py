"""Static highway geometry: vehicle and base-station placement.

Vehicles sit on a regular grid (one row per lane, fixed inter-vehicle
distance); base stations are placed alongside the road every
``isd_m`` metres starting at the origin.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np


class ConfigError(ValueError):
    """A configuration value violates its invariant."""


class UnknownNodeError(KeyError):
    pass


# floor(length / ivd) must not lose a vehicle to float round-off (0.3 / 0.1)
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class HighwayConfig:
    length_m: float = 20000.0
    lanes: int = 3
    lane_width_m: float = 4.0
    ivd_m: float = 10.0
    isd_m: float = 6000.0
    bs_height_m: float = 35.0
    vehicle_antenna_height_m: float = 1.5
    # None places the first vehicle at ivd_m / 2
    first_vehicle_offset_m: float | None = None
    bs_lateral_offset_m: float = 10.0

    def __post_init__(self):
        checks = [
            (self.length_m > 0, "length_m must be > 0"),
            (isinstance(self.lanes, int) and self.lanes >= 1, "lanes must be an integer >= 1"),
            (self.lane_width_m >= 0, "lane_width_m must be >= 0"),
            (self.ivd_m > 0, "ivd_m must be > 0"),
            (self.isd_m > 0, "isd_m must be > 0"),
            (self.bs_height_m > 0, "bs_height_m must be > 0"),
            (self.vehicle_antenna_height_m > 0, "vehicle_antenna_height_m must be > 0"),
            (self.bs_lateral_offset_m >= 0, "bs_lateral_offset_m must be >= 0"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        if self.first_vehicle_offset_m is not None:
            if self.first_vehicle_offset_m < 0:
                raise ConfigError("first_vehicle_offset_m must be >= 0")
            last = self.first_vehicle_offset_m + (self.vehicles_per_lane - 1) * self.ivd_m
            if last > self.length_m:
                raise ConfigError(
                    f"first_vehicle_offset_m={self.first_vehicle_offset_m} pushes the last "
                    f"vehicle to {last} m, beyond length_m={self.length_m}"
                )

    @property
    def vehicles_per_lane(self) -> int:
        return int(math.floor(self.length_m / self.ivd_m + _FLOOR_EPS))

    @property
    def first_offset_m(self) -> float:
        if self.first_vehicle_offset_m is None:
            return self.ivd_m / 2.0
        return self.first_vehicle_offset_m

    @property
    def n_base_stations(self) -> int:
        return int(math.floor(self.length_m / self.isd_m + _FLOOR_EPS)) + 1


class NodeKind(enum.Enum):
    VEHICLE = "vehicle"
    BASE_STATION = "base_station"


@dataclass(frozen=True)
class Node:
    id: int
    kind: NodeKind
    position: tuple[float, float, float]
    lane_index: int | None = None


@dataclass(frozen=True)
class Scenario:
    config: HighwayConfig
    vehicles: tuple[Node, ...]
    base_stations: tuple[Node, ...]

    @cached_property
    def positions(self) -> np.ndarray:
        """Vehicle positions, shape (n, 3)."""
        return np.array([v.position for v in self.vehicles], dtype=float).reshape(-1, 3)

    @cached_property
    def lane(self) -> np.ndarray:
        return np.array([v.lane_index for v in self.vehicles], dtype=np.int64)

    @cached_property
    def slot(self) -> np.ndarray:
        """Rank of each vehicle within its lane, ordered by longitudinal position."""
        slot = np.empty(len(self.vehicles), dtype=np.int64)
        for lane in np.unique(self.lane):
            members = np.flatnonzero(self.lane == lane)
            order = members[np.argsort(self.positions[members, 0], kind="stable")]
            slot[order] = np.arange(len(order))
        return slot

    @cached_property
    def bs_positions(self) -> np.ndarray:
        return np.array([b.position for b in self.base_stations], dtype=float).reshape(-1, 3)

    @cached_property
    def _x_order(self) -> np.ndarray:
        return np.argsort(self.positions[:, 0], kind="stable")

    def vehicle(self, node_id: int) -> Node:
        if 0 <= node_id < len(self.vehicles) and self.vehicles[node_id].id == node_id:
            return self.vehicles[node_id]
        raise UnknownNodeError(f"no vehicle with id {node_id} in scenario")

    def vehicle_index(self, node: Node) -> int:
        idx = node.id
        if node.kind is NodeKind.VEHICLE and 0 <= idx < len(self.vehicles) and self.vehicles[idx] == node:
            return idx
        raise UnknownNodeError(f"vehicle {node!r} is not part of this scenario")

    def candidate_links(self, range_m: float, tx_indices: np.ndarray | None = None):
        """All ordered (tx, rx) vehicle pairs with 3D distance <= range_m.

        Returns ``(tx, rx, distance)`` arrays, grouped by tx in the order of
        ``tx_indices`` and sorted by rx position within each group.
        """
        if tx_indices is None:
            tx_indices = np.arange(len(self.vehicles))
        tx_indices = np.asarray(tx_indices, dtype=np.int64)
        empty = (np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0, float))
        if len(tx_indices) == 0 or range_m < 0:
            return empty

        order = self._x_order
        xs = self.positions[order, 0]
        x_tx = self.positions[tx_indices, 0]
        lo = np.searchsorted(xs, x_tx - range_m, side="left")
        hi = np.searchsorted(xs, x_tx + range_m, side="right")
        counts = hi - lo
        total = int(counts.sum())
        if total == 0:
            return empty
        starts = np.repeat(lo, counts)
        offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        rx = order[starts + offsets]
        tx = np.repeat(tx_indices, counts)

        keep = rx != tx
        tx, rx = tx[keep], rx[keep]
        dist = np.linalg.norm(self.positions[rx] - self.positions[tx], axis=1)
        keep = dist <= range_m
        return tx[keep], rx[keep], dist[keep]


def build_scenario(config: HighwayConfig) -> Scenario:
    n_per_lane = config.vehicles_per_lane
    h = config.vehicle_antenna_height_m
    vehicles = []
    for lane in range(config.lanes):
        y = lane * config.lane_width_m
        for i in range(n_per_lane):
            x = config.first_offset_m + i * config.ivd_m
            vehicles.append(Node(len(vehicles), NodeKind.VEHICLE, (x, y, h), lane))

    bs_y = (config.lanes - 1) * config.lane_width_m + config.bs_lateral_offset_m
    base_stations = tuple(
        Node(len(vehicles) + k, NodeKind.BASE_STATION, (k * config.isd_m, bs_y, config.bs_height_m))
        for k in range(config.n_base_stations)
    )
    return Scenario(config, tuple(vehicles), base_stations)


@lru_cache(maxsize=8)
def cached_scenario(config: HighwayConfig) -> Scenario:
    """Memoised :func:`build_scenario`; scenarios are immutable so sharing is safe."""
    return build_scenario(config)


def distance_3d(a: Node, b: Node) -> float:
    return math.dist(a.position, b.position)


def neighbors_in_range(scenario: Scenario, tx: Node, range_m: float) -> list[Node]:
    idx = scenario.vehicle_index(tx)
    _, rx, _ = scenario.candidate_links(range_m, np.array([idx]))
    return [scenario.vehicles[i] for i in sorted(rx.tolist())]
