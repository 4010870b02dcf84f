"""Network-scheduled (mode 3) sidelink resource allocation.

The base station picks one MCS per configuration: the most robust entry
whose spectral efficiency still carries the offered periodic load.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .phy import McsEntry
from .scenario import Scenario


class CapacityInfeasibleError(ValueError):
    def __init__(self, required_se: float, max_se: float):
        self.required_se = required_se
        self.max_se = max_se
        self.shortfall = required_se - max_se
        super().__init__(
            f"required spectral efficiency {required_se:.6g} b/s/Hz exceeds the table "
            f"maximum {max_se:.6g} b/s/Hz (shortfall {self.shortfall:.6g})"
        )


class NScope(str, enum.Enum):
    PER_CELL = "per_cell"
    GLOBAL = "global"


@dataclass(frozen=True)
class TrafficConfig:
    packet_size_bytes: int = 212
    period_hz: float = 10.0

    def __post_init__(self):
        if not self.packet_size_bytes > 0:
            raise ValueError("packet_size_bytes must be > 0")
        if not self.period_hz > 0:
            raise ValueError("period_hz must be > 0")


@dataclass(frozen=True)
class AllocationContext:
    n_ues: int
    bandwidth_hz: float

    def __post_init__(self):
        if self.n_ues < 1:
            raise ValueError("n_ues must be >= 1")
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be > 0")


def required_spectral_efficiency(traffic: TrafficConfig, ctx: AllocationContext) -> float:
    """Offered load of ``n_ues`` periodic transmitters per Hz of allocated band."""
    bits = traffic.packet_size_bytes * 8
    return bits * traffic.period_hz * ctx.n_ues / ctx.bandwidth_hz


def select_mcs(required_se: float, table) -> McsEntry:
    if not table:
        raise ValueError("MCS table is empty")
    admissible = [e for e in table if e.spectral_efficiency_bps_per_hz >= required_se]
    if not admissible:
        raise CapacityInfeasibleError(
            required_se, max(e.spectral_efficiency_bps_per_hz for e in table)
        )
    return min(admissible, key=lambda e: e.spectral_efficiency_bps_per_hz)


def cell_membership(scenario: Scenario) -> np.ndarray:
    """Index of the nearest base station for every vehicle (ties -> lower index)."""
    if not scenario.base_stations:
        raise ValueError("scenario has no base stations")
    diff = scenario.positions[:, None, :] - scenario.bs_positions[None, :, :]
    return np.argmin(np.einsum("ijk,ijk->ij", diff, diff), axis=1)


def ues_per_allocation(scenario: Scenario, policy: NScope | str = NScope.PER_CELL) -> int:
    """Number of UEs sharing one allocation; per-cell uses the busiest cell."""
    policy = NScope(policy)
    if policy is NScope.GLOBAL:
        return len(scenario.vehicles)
    counts = np.bincount(cell_membership(scenario), minlength=len(scenario.base_stations))
    return int(counts.max())
