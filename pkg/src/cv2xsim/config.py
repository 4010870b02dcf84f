"""TOML configuration: strict schema, reference defaults for every omitted key.

Layout (all sections and keys optional)::

    [highway]   length_m, lanes, lane_width_m, isd_m, bs_height_m,
                vehicle_antenna_height_m, first_vehicle_offset_m, bs_lateral_offset_m
    [radio]     tx_power_dbm, noise_figure_db, thermal_noise_density_dbm_per_hz,
                rx_diversity_gain_db
    [traffic]   packet_size_bytes, period_hz
    [channel]   carrier_freq_hz, shadowing, blockage, los_policy, ...
    [phy]       noise_limited, reuse_distance_m, mcs_table
    [mac]       n_scope
    [kpi]       range_m, interior_only
    [cdf]       enabled, d_min_m, d_max_m, n_samples, spacing, *_los_state
    [sweep]     models, bandwidths_hz, ivds_m, seed, n_drops, output_dir

The inter-vehicle distance and bandwidth are sweep axes, so they live in
``[sweep]`` rather than ``[highway]`` / ``[radio]``.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import typing
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .channel import ChannelModelKind, LosState, PropagationParams, RangePolicy
from .engine import LinkOptions, LosPolicy
from .kpi import Spacing
from .mac import NScope, TrafficConfig
from .phy import DEFAULT_MCS_TABLE, McsEntry, McsTableError, RadioConfig, load_mcs_table
from .scenario import HighwayConfig

MAX_SEED = 2**64 - 1


class ConfigParseError(ValueError):
    category = "config-parse"


class ConfigValidationError(ValueError):
    category = "config-validation"


@dataclass(frozen=True)
class ChannelSettings:
    carrier_freq_hz: float = 5.9e9
    shadowing: bool = False
    blockage: bool = True
    los_policy: LosPolicy = LosPolicy.GEOMETRIC
    los_cross_lane_distance_m: float = 200.0
    gpp3_nlos_corrected: bool = False
    winner_standard_intercept: bool = False
    winner_range_policy: RangePolicy = RangePolicy.CLAMP
    two_ray_shadowing_std_db: float = 0.0
    blockage_per_blocker_db: float = 5.0
    blockage_cap_db: float = 25.0


@dataclass(frozen=True)
class PhySettings:
    noise_limited: bool = True
    reuse_distance_m: float | None = None
    mcs_table: str | None = None


@dataclass(frozen=True)
class MacSettings:
    n_scope: NScope = NScope.PER_CELL


@dataclass(frozen=True)
class KpiSettings:
    range_m: float = 1000.0
    interior_only: bool = False


@dataclass(frozen=True)
class CdfSettings:
    enabled: bool = True
    d_min_m: float = 1.0
    d_max_m: float = 8000.0
    n_samples: int = 100_000
    spacing: Spacing = Spacing.LINEAR
    two_ray_los_state: LosState = LosState.LOS
    winner_los_state: LosState = LosState.NLOS
    gpp3_los_state: LosState = LosState.LOS

    def los_state(self, model: ChannelModelKind) -> LosState:
        return {
            ChannelModelKind.TWO_RAY: self.two_ray_los_state,
            ChannelModelKind.WINNER_II_D1: self.winner_los_state,
            ChannelModelKind.GPP3_REL15: self.gpp3_los_state,
        }[ChannelModelKind(model)]


@dataclass(frozen=True)
class SweepSettings:
    models: tuple[ChannelModelKind, ...] = tuple(ChannelModelKind)
    bandwidths_hz: tuple[float, ...] = (5e6, 6e6, 8e6, 10e6)
    ivds_m: tuple[float, ...] = (10.0, 15.0)
    seed: int = 0
    n_drops: int = 100
    output_dir: str = "results"


@dataclass(frozen=True)
class SimConfig:
    highway: HighwayConfig = field(default_factory=HighwayConfig)
    radio: RadioConfig = field(default_factory=RadioConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    channel: ChannelSettings = field(default_factory=ChannelSettings)
    phy: PhySettings = field(default_factory=PhySettings)
    mac: MacSettings = field(default_factory=MacSettings)
    kpi: KpiSettings = field(default_factory=KpiSettings)
    cdf: CdfSettings = field(default_factory=CdfSettings)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    mcs_table: tuple[McsEntry, ...] = DEFAULT_MCS_TABLE

    # convenience views used by the orchestrator
    @property
    def models(self):
        return self.sweep.models

    @property
    def bandwidths_hz(self):
        return self.sweep.bandwidths_hz

    @property
    def ivds_m(self):
        return self.sweep.ivds_m

    @property
    def seed(self):
        return self.sweep.seed

    @property
    def n_drops(self):
        return self.sweep.n_drops

    @property
    def output_dir(self) -> Path:
        return Path(self.sweep.output_dir)

    def highway_for(self, ivd_m: float) -> HighwayConfig:
        return replace(self.highway, ivd_m=float(ivd_m))

    def radio_for(self, bandwidth_hz: float) -> RadioConfig:
        return replace(self.radio, bandwidth_hz=float(bandwidth_hz))

    def propagation(self, los_state: LosState = LosState.LOS, shadowing: bool | None = None) -> PropagationParams:
        ch = self.channel
        h = self.highway.vehicle_antenna_height_m
        return PropagationParams(
            carrier_freq_hz=ch.carrier_freq_hz,
            tx_height_m=h,
            rx_height_m=h,
            los_state=los_state,
            shadowing_enabled=ch.shadowing if shadowing is None else shadowing,
            blockage_enabled=ch.blockage,
            gpp3_nlos_corrected=ch.gpp3_nlos_corrected,
            winner_standard_intercept=ch.winner_standard_intercept,
            winner_range_policy=ch.winner_range_policy,
            two_ray_shadowing_std_db=ch.two_ray_shadowing_std_db,
            blockage_per_blocker_db=ch.blockage_per_blocker_db,
            blockage_cap_db=ch.blockage_cap_db,
        )

    def link_options(self) -> LinkOptions:
        return LinkOptions(
            los_policy=self.channel.los_policy,
            los_cross_lane_distance_m=self.channel.los_cross_lane_distance_m,
            noise_limited=self.phy.noise_limited,
            reuse_distance_m=self.phy.reuse_distance_m,
            range_m=self.kpi.range_m,
            interior_only=self.kpi.interior_only,
        )

    def to_dict(self) -> dict:
        def plain(v):
            if isinstance(v, enum.Enum):
                return v.value
            if dataclasses.is_dataclass(v):
                return {f.name: plain(getattr(v, f.name)) for f in fields(v)}
            if isinstance(v, (list, tuple)):
                return [plain(x) for x in v]
            return v

        return plain(self)


# section name -> (dataclass, keys that are not accepted in the file)
_SECTIONS = {
    "highway": (HighwayConfig, {"ivd_m"}),
    "radio": (RadioConfig, {"bandwidth_hz"}),
    "traffic": (TrafficConfig, set()),
    "channel": (ChannelSettings, set()),
    "phy": (PhySettings, set()),
    "mac": (MacSettings, set()),
    "kpi": (KpiSettings, set()),
    "cdf": (CdfSettings, set()),
    "sweep": (SweepSettings, set()),
}


def _coerce(section: str, key: str, value, hint):
    where = f"[{section}] {key}"
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin is typing.Union or (origin is not None and type(None) in args):
        inner = [a for a in args if a is not type(None)]
        return _coerce(section, key, value, inner[0])
    if origin is tuple:
        if not isinstance(value, list):
            raise ConfigParseError(f"{where}: expected a list, got {type(value).__name__}")
        return tuple(_coerce(section, key, v, args[0]) for v in value)
    if isinstance(hint, type) and issubclass(hint, enum.Enum):
        try:
            return hint(value)
        except ValueError:
            choices = ", ".join(m.value for m in hint)
            raise ConfigParseError(f"{where}: {value!r} is not one of: {choices}") from None
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigParseError(f"{where}: expected true/false, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigParseError(f"{where}: expected an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigParseError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigParseError(f"{where}: expected a string, got {value!r}")
        return value
    raise TypeError(f"unsupported config type {hint!r} for {where}")


def _build_section(name: str, table) -> object:
    cls, forbidden = _SECTIONS[name]
    if not isinstance(table, dict):
        raise ConfigParseError(f"[{name}] must be a table")
    hints = typing.get_type_hints(cls)
    allowed = {f.name for f in fields(cls)} - forbidden
    kwargs = {}
    for key, value in table.items():
        if key not in allowed:
            hint = " (set it through [sweep])" if key in forbidden else ""
            raise ConfigParseError(f"unknown key '{key}' in [{name}]{hint}")
        kwargs[key] = _coerce(name, key, value, hints[key])
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigValidationError(f"[{name}] {exc}") from None


def _validate(cfg: SimConfig) -> None:
    sw = cfg.sweep
    for axis in ("models", "bandwidths_hz", "ivds_m"):
        values = getattr(sw, axis)
        if not values:
            raise ConfigValidationError(f"[sweep] {axis} must not be empty")
        if len(set(values)) != len(values):
            raise ConfigValidationError(f"[sweep] {axis} contains duplicates")
    if not 0 <= sw.seed <= MAX_SEED:
        raise ConfigValidationError("[sweep] seed must be an unsigned 64-bit integer")
    if sw.n_drops < 1:
        raise ConfigValidationError("[sweep] n_drops must be >= 1")
    for bw in sw.bandwidths_hz:
        try:
            cfg.radio_for(bw)
        except ValueError as exc:
            raise ConfigValidationError(f"[sweep] bandwidths_hz={bw}: {exc}") from None
    for ivd in sw.ivds_m:
        try:
            cfg.highway_for(ivd)
        except ValueError as exc:
            raise ConfigValidationError(f"[sweep] ivds_m={ivd}: {exc}") from None
    if not cfg.kpi.range_m > 0:
        raise ConfigValidationError("[kpi] range_m must be > 0")
    if cfg.phy.reuse_distance_m is not None and not cfg.phy.reuse_distance_m > 0:
        raise ConfigValidationError("[phy] reuse_distance_m must be > 0")
    if not cfg.channel.los_cross_lane_distance_m >= 0:
        raise ConfigValidationError("[channel] los_cross_lane_distance_m must be >= 0")
    cdf = cfg.cdf
    if not 0 < cdf.d_min_m < cdf.d_max_m:
        raise ConfigValidationError("[cdf] need 0 < d_min_m < d_max_m")
    if cdf.n_samples < 2:
        raise ConfigValidationError("[cdf] n_samples must be >= 2")
    try:
        cfg.propagation()
    except ValueError as exc:
        raise ConfigValidationError(f"[channel] {exc}") from None


def parse_config_text(text: str, base_dir: Path | None = None) -> SimConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(str(exc)) from None
    for name in data:
        if name not in _SECTIONS:
            raise ConfigParseError(f"unknown section or key '{name}'")
    sections = {name: _build_section(name, table) for name, table in data.items()}
    cfg = SimConfig(**sections)

    if cfg.phy.mcs_table:
        path = Path(cfg.phy.mcs_table)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        try:
            table = load_mcs_table(path)
        except OSError as exc:
            raise ConfigValidationError(f"[phy] mcs_table: cannot read {path}: {exc.strerror}") from None
        except McsTableError as exc:
            raise ConfigValidationError(f"[phy] mcs_table: {exc}") from None
        cfg = replace(cfg, mcs_table=table)
    _validate(cfg)
    return cfg


def parse_config(source) -> SimConfig:
    """Parse a config from a path, or from inline TOML text.

    A ``Path`` is always read as a file; a ``str`` is read as a file when it
    names one and is otherwise treated as TOML text.
    """
    if isinstance(source, Path) or (
        isinstance(source, str) and "\n" not in source and source.strip() and Path(source).is_file()
    ):
        path = Path(source)
        return parse_config_text(path.read_text(), base_dir=path.parent)
    return parse_config_text(source)


def dump_config(cfg: SimConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2)
