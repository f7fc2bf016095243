"""Simulation and analysis toolkit for all-to-all broadcast coded slotted
ALOHA over the packet erasure channel.

Submodules:
  dist        repetition degree distributions and their induced variants
  graph       bipartite frame graphs (users x slots) and channel effects
  decoder     iterative peeling over singleton slots
  montecarlo  frame-level packet loss rate estimation with CIs
  stopsets    minimal stopping-set enumeration and counting
  efapprox    analytical error-floor approximation from stopping sets
  de          density evolution recursion, asymptotic loss, thresholds
  optimizer   threshold vs error-floor distribution design
  csma        discrete-event carrier-sense baseline
  cli         command-line front end and figure recipes
"""

__version__ = "0.1.0"

from .dist import (DegreeDistribution, pec_induced, broadcast_induced,
                   reverse_transform_plr)
from .graph import FrameGraph, sample_original, apply_pec, receiver_view
from .decoder import DecodeResult, peel, unresolved_users
from .montecarlo import SimConfig, PlrReport, RateEstimate, run
from .stopsets import (Catalog, StoppingSetRecord, enumerate_minimal,
                       default_catalog, is_stopping_set)
from .efapprox import (EfInput, ef_plr, ef_plr_average, ef_plr_table,
                       ef_broadcast_plr, slotted_aloha_exact)
from .de import (DeResult, ThresholdResult, de_fixed_point, asymptotic_plr,
                 asymptotic_plr_average, threshold)
from .optimizer import (OptConfig, TradeoffPoint, objective, optimize,
                        tradeoff_sweep)
from .csma import CsmaConfig, CsmaResult, csma_simulate

__all__ = [
    "__version__",
    "DegreeDistribution", "pec_induced", "broadcast_induced",
    "reverse_transform_plr",
    "FrameGraph", "sample_original", "apply_pec", "receiver_view",
    "DecodeResult", "peel", "unresolved_users",
    "SimConfig", "PlrReport", "RateEstimate", "run",
    "Catalog", "StoppingSetRecord", "enumerate_minimal", "default_catalog",
    "is_stopping_set",
    "EfInput", "ef_plr", "ef_plr_average", "ef_plr_table",
    "ef_broadcast_plr", "slotted_aloha_exact",
    "DeResult", "ThresholdResult", "de_fixed_point", "asymptotic_plr",
    "asymptotic_plr_average", "threshold",
    "OptConfig", "TradeoffPoint", "objective", "optimize", "tradeoff_sweep",
    "CsmaConfig", "CsmaResult", "csma_simulate",
]
