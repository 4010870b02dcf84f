"""Sweep orchestration (IVD x bandwidth x model) and CSV export."""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import ChannelModelKind, PropagationParams, is_stochastic
from .config import SimConfig
from .engine import DropTally, LinkOptions, run_drop
from .kpi import CdfDataset, PrrReport, pathloss_cdf
from .mac import (
    AllocationContext,
    CapacityInfeasibleError,
    NScope,
    required_spectral_efficiency,
    select_mcs,
    ues_per_allocation,
)
from .phy import McsEntry, RadioConfig
from .scenario import HighwayConfig, cached_scenario

log = logging.getLogger(__name__)

PRR_HEADER = "model,bandwidth_hz,ivd_m,mcs_index,required_se,prr,per_tx_prr,n_drops,seed"


@dataclass(frozen=True)
class SweepPoint:
    model: ChannelModelKind
    bandwidth_hz: float
    ivd_m: float
    highway: HighwayConfig
    radio: RadioConfig
    params: PropagationParams
    options: LinkOptions
    n_ues: dict
    required_se: float
    mcs: McsEntry | None
    shortfall: float = 0.0


def sweep_points(config: SimConfig) -> list[SweepPoint]:
    """Resolve every (ivd, bandwidth, model) cell, IVD outermost."""
    points = []
    params = config.propagation()
    options = config.link_options()
    for ivd in config.ivds_m:
        highway = config.highway_for(ivd)
        scenario = cached_scenario(highway)
        n_ues = {scope.value: ues_per_allocation(scenario, scope) for scope in NScope}
        n = n_ues[config.mac.n_scope.value]
        for bw in config.bandwidths_hz:
            se = required_spectral_efficiency(config.traffic, AllocationContext(n, bw))
            try:
                mcs, shortfall = select_mcs(se, config.mcs_table), 0.0
            except CapacityInfeasibleError as exc:
                log.warning("ivd=%g bw=%g: %s", ivd, bw, exc)
                mcs, shortfall = None, exc.shortfall
            for model in config.models:
                points.append(SweepPoint(
                    model=model, bandwidth_hz=bw, ivd_m=ivd, highway=highway,
                    radio=config.radio_for(bw), params=params, options=options,
                    n_ues=n_ues, required_se=se, mcs=mcs, shortfall=shortfall,
                ))
    return points


def _drop_task(args) -> DropTally:
    point, seed, drop = args
    scenario = cached_scenario(point.highway)
    return run_drop(scenario, point.model, point.params, point.radio, point.mcs, point.options, seed, drop)


def _map(tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [_drop_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_drop_task, tasks))


def _metadata(config: SimConfig, point: SweepPoint, clamped: int) -> dict:
    return {
        "los_policy": config.channel.los_policy.value,
        "noise_limited": config.phy.noise_limited,
        "n_scope": config.mac.n_scope.value,
        "n_ues": point.n_ues,
        "shadowing": config.channel.shadowing,
        "blockage": config.channel.blockage,
        "interior_only": config.kpi.interior_only,
        "range_m": config.kpi.range_m,
        "capacity_shortfall": point.shortfall,
        "winner_clamped_links": clamped,
    }


def simulate_prr(config: SimConfig, jobs: int = 1) -> list[PrrReport]:
    points = sweep_points(config)
    seed, n_drops = config.seed, config.n_drops

    # A channel without random terms yields identical drops: evaluate once.
    tasks, owner = [], []
    for i, p in enumerate(points):
        if p.mcs is None:
            continue
        drops = range(n_drops) if is_stochastic(p.model, p.params) else range(1)
        for d in drops:
            tasks.append((p, seed, d))
            owner.append(i)
    tallies = _map(tasks, jobs)
    by_point: dict[int, list[DropTally]] = {}
    for i, tally in zip(owner, tallies):
        by_point.setdefault(i, []).append(tally)

    reports = []
    for i, p in enumerate(points):
        n_ues = p.n_ues[config.mac.n_scope.value]
        if p.mcs is None:
            reports.append(PrrReport(
                model=p.model, bandwidth_hz=p.bandwidth_hz, ivd_m=p.ivd_m, n_drops=n_drops,
                prr=0.0, per_drop_prr=[0.0] * n_drops, per_tx_prr=0.0, mcs_used=None,
                required_se=p.required_se, n_ues=n_ues, feasible=False, seed=seed,
                metadata=_metadata(config, p, 0),
            ))
            continue
        drops = by_point[i]
        replicate = n_drops // len(drops)
        per_drop = [t.prr for t in drops] * replicate
        successes = sum(t.successes for t in drops) * replicate
        totals = sum(t.totals for t in drops) * replicate
        has_links = totals > 0
        per_tx = float(np.mean(successes[has_links] / totals[has_links])) if has_links.any() else math.nan
        clamped = sum(t.winner_clamped for t in drops) * replicate
        reports.append(PrrReport(
            model=p.model, bandwidth_hz=p.bandwidth_hz, ivd_m=p.ivd_m, n_drops=n_drops,
            prr=float(np.mean(per_drop)), per_drop_prr=per_drop, per_tx_prr=per_tx,
            mcs_used=p.mcs, required_se=p.required_se, n_ues=n_ues, feasible=True,
            seed=seed, metadata=_metadata(config, p, clamped),
        ))
    return reports


def compute_cdfs(config: SimConfig) -> list[CdfDataset]:
    cdf = config.cdf
    datasets = []
    for model in config.models:
        for shadowing in (False, True):
            params = config.propagation(los_state=cdf.los_state(model), shadowing=shadowing)
            datasets.append(pathloss_cdf(
                model, params, cdf.d_min_m, cdf.d_max_m, cdf.n_samples,
                shadowing=shadowing, seed=config.seed, spacing=cdf.spacing,
            ))
    return datasets


def run_sweep(config: SimConfig, jobs: int = 1, write: bool = True):
    reports = simulate_prr(config, jobs=jobs)
    datasets = compute_cdfs(config) if config.cdf.enabled else []
    if write:
        export_csv(reports, datasets, config.output_dir, config=config)
    return reports, datasets


# --- export ---------------------------------------------------------------

def fmt(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "NA"
    out = f"{value:.6g}"
    return "0" if out == "-0" else out


def _write_rows(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from None


def cdf_basename(ds: CdfDataset) -> str:
    return f"{ds.model.value}_shadow_{'on' if ds.shadowing else 'off'}"


def _vec_fmt(values: np.ndarray) -> list[str]:
    return [fmt(v) for v in values.tolist()]


def export_csv(reports, datasets, output_dir, config: SimConfig | None = None) -> list[Path]:
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create {out}: {exc.strerror}") from None
    written = []

    if reports:
        path = out / "prr_results.csv"
        _write_rows(path, PRR_HEADER, (
            (
                r.model.value, r.bandwidth_hz, r.ivd_m,
                r.mcs_used.index if r.mcs_used else None,
                r.required_se, r.prr, r.per_tx_prr, r.n_drops, r.seed,
            )
            for r in reports
        ))
        written.append(path)

    for ds in datasets:
        base = cdf_basename(ds)
        path = out / f"cdf_{base}.csv"
        _write_rows(path, "distance_m,loss_db", zip(_vec_fmt(ds.distances_m), _vec_fmt(ds.losses_db)))
        written.append(path)
        path = out / f"cdf_points_{base}.csv"
        _write_rows(path, "loss_db,probability", zip(_vec_fmt(ds.cdf_loss_db), _vec_fmt(ds.cdf_probability)))
        written.append(path)

    if config is not None:
        path = out / "run_metadata.json"
        meta = {
            "config": config.to_dict(),
            "reports": [
                {
                    "model": r.model.value,
                    "bandwidth_hz": r.bandwidth_hz,
                    "ivd_m": r.ivd_m,
                    "feasible": r.feasible,
                    "mcs": None if r.mcs_used is None else {
                        "index": r.mcs_used.index,
                        "se_bps_hz": r.mcs_used.spectral_efficiency_bps_per_hz,
                        "sinr_db": r.mcs_used.sinr_threshold_db,
                    },
                    "n_ues": r.n_ues,
                    **r.metadata,
                }
                for r in reports
            ],
            "cdf": [
                {"file": f"cdf_{cdf_basename(d)}.csv", "model": d.model.value,
                 "shadowing": d.shadowing, "los_state": d.los_state}
                for d in datasets
            ],
        }
        try:
            path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from None
        written.append(path)
    return written
