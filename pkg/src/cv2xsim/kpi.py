"""PRR aggregation and pathloss CDF datasets."""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelModelKind, PropagationParams, pathloss, shadowing_std_db
from .phy import LinkResult, McsEntry
from .rng import normals

NOT_APPLICABLE = math.nan

# Reserved "drop" word for CDF shadowing draws, disjoint from PRR drops.
_CDF_STREAM = 0xC0F
_MODEL_CODE = {m: i for i, m in enumerate(ChannelModelKind)}


class Spacing(str, enum.Enum):
    LINEAR = "linear"
    LOG = "log"


@dataclass
class PrrReport:
    model: ChannelModelKind
    bandwidth_hz: float
    ivd_m: float
    n_drops: int
    prr: float
    per_drop_prr: list[float]
    per_tx_prr: float
    mcs_used: McsEntry | None
    required_se: float
    n_ues: int
    feasible: bool = True
    seed: int = 0
    metadata: dict = field(default_factory=dict)


@dataclass
class CdfDataset:
    model: ChannelModelKind
    shadowing: bool
    distances_m: np.ndarray
    losses_db: np.ndarray
    cdf_loss_db: np.ndarray
    cdf_probability: np.ndarray
    los_state: str = ""

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.distances_m.tolist(), self.losses_db.tolist()))

    @property
    def cdf_points(self) -> list[tuple[float, float]]:
        return list(zip(self.cdf_loss_db.tolist(), self.cdf_probability.tolist()))


def prr_counts(distance_m, success, range_m: float) -> tuple[int, int]:
    """(successful, total) links within ``range_m``."""
    distance_m = np.asarray(distance_m, dtype=float)
    in_range = distance_m <= range_m
    return int(np.count_nonzero(np.asarray(success, dtype=bool) & in_range)), int(np.count_nonzero(in_range))


def ratio(successes: int, total: int) -> float:
    return successes / total if total else NOT_APPLICABLE


def compute_prr(link_results, range_m: float) -> float:
    """Pooled PRR over all in-range links; NaN when no link is in range."""
    results = list(link_results)
    if not results:
        return NOT_APPLICABLE
    dist = np.fromiter((r.distance_m for r in results), float, len(results))
    ok = np.fromiter((r.success for r in results), bool, len(results))
    return ratio(*prr_counts(dist, ok, range_m))


def per_tx_prr(link_results: list[LinkResult], range_m: float) -> float:
    """Mean over transmitters of each transmitter's own PRR."""
    tally: dict[int, list[int]] = {}
    for r in link_results:
        if r.distance_m <= range_m:
            t = tally.setdefault(r.tx_id, [0, 0])
            t[0] += int(r.success)
            t[1] += 1
    if not tally:
        return NOT_APPLICABLE
    return float(np.mean([s / n for s, n in tally.values()]))


def empirical_cdf(values) -> tuple[np.ndarray, np.ndarray]:
    x = np.sort(np.asarray(values, dtype=float))
    p = np.arange(1, len(x) + 1, dtype=float) / len(x)
    return x, p


def sample_distances(d_min: float, d_max: float, n_samples: int, spacing: Spacing | str = Spacing.LINEAR):
    if not d_min < d_max:
        raise ValueError("d_min must be < d_max")
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    if Spacing(spacing) is Spacing.LOG:
        if d_min <= 0:
            raise ValueError("log spacing needs d_min > 0")
        return np.geomspace(d_min, d_max, n_samples)
    return np.linspace(d_min, d_max, n_samples)


def pathloss_cdf(
    model: ChannelModelKind,
    params: PropagationParams,
    d_min: float = 1.0,
    d_max: float = 8000.0,
    n_samples: int = 100_000,
    shadowing: bool = False,
    seed: int = 0,
    spacing: Spacing | str = Spacing.LINEAR,
    counter: Counter | None = None,
) -> CdfDataset:
    """Loss samples over a distance sweep and their empirical CDF.

    The LOS state comes from ``params.los_state``. Shadowing draws are keyed by
    (seed, model, sample index) and so are identical across runs.
    """
    model = ChannelModelKind(model)
    params = replace(params, shadowing_enabled=shadowing)
    d = sample_distances(d_min, d_max, n_samples, spacing)
    loss = pathloss(model, d, params, counter=counter)
    std = shadowing_std_db(model, d, params)
    if shadowing:
        z = normals(seed, _CDF_STREAM, _MODEL_CODE[model], np.arange(n_samples), 0)
        loss = loss + std * z
    x, p = empirical_cdf(loss)
    return CdfDataset(model, shadowing, d, loss, x, p, los_state=params.los_state.value)
