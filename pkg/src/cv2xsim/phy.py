"""Link budget and the sharp-threshold link abstraction.

A link succeeds when its SINR reaches the threshold of the selected MCS,
where the threshold is the SINR at which that MCS hits 1 % BLER. Absolute
PRR values therefore depend directly on the MCS table in use.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import LinkLoss
from .scenario import Node, distance_3d


class McsTableError(ValueError):
    pass


@dataclass(frozen=True)
class RadioConfig:
    tx_power_dbm: float = 24.0
    bandwidth_hz: float = 10e6
    noise_figure_db: float = 9.0
    thermal_noise_density_dbm_per_hz: float = -174.0
    rx_diversity_gain_db: float = 3.0

    def __post_init__(self):
        if not math.isfinite(self.tx_power_dbm):
            raise ValueError("tx_power_dbm must be finite")
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be > 0")


@dataclass(frozen=True)
class McsEntry:
    index: int
    spectral_efficiency_bps_per_hz: float
    sinr_threshold_db: float


# Spectral efficiencies are LTE 4-bit CQI operating points; thresholds are
# AWGN 1 % BLER SINR values for the same points. Configuration defaults only.
DEFAULT_MCS_TABLE: tuple[McsEntry, ...] = (
    McsEntry(1, 0.1523, -6.7),
    McsEntry(2, 0.2344, -4.7),
    McsEntry(3, 0.3770, -2.3),
    McsEntry(4, 2.4063, 8.6),
    McsEntry(5, 2.7305, 10.4),
    McsEntry(6, 3.3223, 12.3),
    McsEntry(7, 3.9023, 14.2),
    McsEntry(8, 5.5547, 19.8),
)


def validate_mcs_table(table) -> tuple[McsEntry, ...]:
    table = tuple(table)
    if not table:
        raise McsTableError("MCS table is empty")
    for prev, cur in zip(table, table[1:]):
        if not cur.spectral_efficiency_bps_per_hz > prev.spectral_efficiency_bps_per_hz:
            raise McsTableError(
                f"MCS table not sorted by spectral efficiency at index {cur.index}"
            )
        if not cur.sinr_threshold_db > prev.sinr_threshold_db:
            raise McsTableError(
                f"SINR thresholds must strictly increase with spectral efficiency "
                f"(index {prev.index} -> {cur.index})"
            )
    if len({e.index for e in table}) != len(table):
        raise McsTableError("duplicate MCS index")
    return table


_HEADER = ("index", "se_bps_hz", "sinr_db")


def parse_mcs_table(text: str, source: str = "<string>") -> tuple[McsEntry, ...]:
    """Parse ``index se_bps_hz sinr_db`` rows (comma or whitespace separated).

    The header line is mandatory; blank lines and ``#`` comments are skipped.
    """
    rows = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cells = [c for c in re.split(r"[,\s]+", line) if c]
        if not header_seen:
            if tuple(c.lower() for c in cells) != _HEADER:
                raise McsTableError(
                    f"{source}:{lineno}: expected header {','.join(_HEADER)}, got {line!r}"
                )
            header_seen = True
            continue
        if len(cells) != 3:
            raise McsTableError(f"{source}:{lineno}: expected 3 columns, got {len(cells)}")
        try:
            entry = McsEntry(int(cells[0]), float(cells[1]), float(cells[2]))
        except ValueError as exc:
            raise McsTableError(f"{source}:{lineno}: {exc}") from None
        if not (math.isfinite(entry.spectral_efficiency_bps_per_hz) and math.isfinite(entry.sinr_threshold_db)):
            raise McsTableError(f"{source}:{lineno}: non-finite value")
        rows.append(entry)
    if not header_seen:
        raise McsTableError(f"{source}: missing header line")
    try:
        return validate_mcs_table(rows)
    except McsTableError as exc:
        raise McsTableError(f"{source}: {exc}") from None


def load_mcs_table(path) -> tuple[McsEntry, ...]:
    path = Path(path)
    return parse_mcs_table(path.read_text(), source=str(path))


@dataclass(frozen=True)
class LinkResult:
    tx_id: int
    rx_id: int
    distance_m: float
    loss: LinkLoss
    rx_power_dbm: float
    sinr_db: float
    success: bool


def noise_power_dbm(config: RadioConfig) -> float:
    if not config.bandwidth_hz > 0:
        raise ValueError("bandwidth_hz must be > 0")
    return (
        config.thermal_noise_density_dbm_per_hz
        + 10.0 * math.log10(config.bandwidth_hz)
        + config.noise_figure_db
    )


def rx_power_dbm(total_loss_db, config: RadioConfig):
    return config.tx_power_dbm - total_loss_db + config.rx_diversity_gain_db


def sinr_db(rx_power, noise_dbm: float, interference_dbm=-np.inf):
    """SINR in dB; ``-inf`` interference reduces it exactly to the SNR."""
    # noise + interference in dBm, written relative to noise so that the
    # interference-free case carries no rounding
    excess = np.asarray(interference_dbm, dtype=float) - noise_dbm
    with np.errstate(over="ignore"):
        denom = noise_dbm + 10.0 * np.log10(1.0 + np.power(10.0, excess / 10.0))
    out = rx_power - denom
    return float(out) if np.ndim(out) == 0 else out


def evaluate_link(
    tx: Node,
    rx: Node,
    loss: LinkLoss,
    config: RadioConfig,
    mcs: McsEntry,
    interference_dbm: float = -math.inf,
) -> LinkResult:
    rx_power = rx_power_dbm(loss.total_db, config)
    sinr = sinr_db(rx_power, noise_power_dbm(config), interference_dbm)
    return LinkResult(
        tx_id=tx.id,
        rx_id=rx.id,
        distance_m=distance_3d(tx, rx),
        loss=loss,
        rx_power_dbm=rx_power,
        sinr_db=sinr,
        success=sinr >= mcs.sinr_threshold_db,
    )
