"""System-level Monte-Carlo simulator for C-V2X sidelink PRR on a highway."""

from .channel import ChannelModelKind, LinkLoss, LosState, PropagationParams
from .config import SimConfig, parse_config
from .kpi import CdfDataset, PrrReport, compute_prr, pathloss_cdf
from .mac import TrafficConfig, required_spectral_efficiency, select_mcs
from .phy import DEFAULT_MCS_TABLE, LinkResult, McsEntry, RadioConfig
from .scenario import HighwayConfig, Node, Scenario, build_scenario
from .sweep import run_sweep

__version__ = "0.1.0"

__all__ = [
    "CdfDataset",
    "ChannelModelKind",
    "DEFAULT_MCS_TABLE",
    "HighwayConfig",
    "LinkLoss",
    "LinkResult",
    "LosState",
    "McsEntry",
    "Node",
    "PrrReport",
    "PropagationParams",
    "RadioConfig",
    "Scenario",
    "SimConfig",
    "TrafficConfig",
    "build_scenario",
    "compute_prr",
    "parse_config",
    "pathloss_cdf",
    "required_spectral_efficiency",
    "run_sweep",
    "select_mcs",
]
