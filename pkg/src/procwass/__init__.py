"""Joint recovery of a point matching and an orthogonal map between two clouds."""

from .assignment import match_clouds, round_to_permutation, solve_lap
from .errors import (
    ConfigError,
    DimensionError,
    NegativeSigmaError,
    NumericalError,
    ProcwassError,
    RankError,
    SizeCapError,
)
from .lowdim import ConicalParams, build_orthogonal_net, conical_loss, estimate_conical_pair, estimate_q_conical
from .metrics import MetricReport, evaluate, frobenius_err, overlap, overlap_matrix, transport_cost_sq
from .model import PlantedInstance, RngStream, load_instance, plant_instance, save_instance
from .pingpong import BaselineConfig, PingPongConfig, grave_baseline, ping, pong, run_ping_pong
from .procrustes import alignment_objective, optimal_rotation, polar_project
from .reduction import GramInstance, factor_gram, gga_to_pw, gram, pw_to_gga
from .relaxation import GramPair, frank_wolfe, qap_gradient, qap_objective, sorting_estimator

__all__ = [
    "BaselineConfig",
    "ConfigError",
    "ConicalParams",
    "DimensionError",
    "GramInstance",
    "GramPair",
    "MetricReport",
    "NegativeSigmaError",
    "NumericalError",
    "PingPongConfig",
    "PlantedInstance",
    "ProcwassError",
    "RankError",
    "RngStream",
    "SizeCapError",
    "alignment_objective",
    "build_orthogonal_net",
    "conical_loss",
    "estimate_conical_pair",
    "estimate_q_conical",
    "evaluate",
    "factor_gram",
    "frank_wolfe",
    "frobenius_err",
    "gga_to_pw",
    "gram",
    "grave_baseline",
    "load_instance",
    "match_clouds",
    "optimal_rotation",
    "overlap",
    "overlap_matrix",
    "ping",
    "plant_instance",
    "polar_project",
    "pong",
    "pw_to_gga",
    "qap_gradient",
    "qap_objective",
    "round_to_permutation",
    "run_ping_pong",
    "save_instance",
    "solve_lap",
    "sorting_estimator",
    "transport_cost_sq",
]
