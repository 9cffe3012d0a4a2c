"""Random-walk controversy scoring and controversy-reducing edge recommendation."""

__version__ = "0.1.0"

from .acceptance import (AcceptanceModel, PolarityTable, adamic_adar, auc_eval, fit_acceptance,
                         hitting_times, polarity, predict_edge, rov_ap)
from .estimators import EdgeRecommender, RandomWalkControversy
from .exceptions import (BridgewalkError, ConvergenceError, DataError, NumericalError, ParseError,
                         SingularUpdateError, StaleUpdateError)
from .graph import (EndorsementGraph, Partition, generate_planted_partition, generate_two_star,
                    load_graph, load_partition, save_graph, save_partition, spectral_bisect,
                    write_dot)
from .incremental import RankOneUpdate, commit_edge, delta_rwc, delta_rwc_matrix, make_update
from .recommend import EdgeCandidate, RecommendationSet, greedy, random_strategy, rov
from .rwc import RwcContext, build_context, personalized_pagerank, recompute_rwc, rwc
from .star import star_score, star_score_limit, verify_theorem1
from .topk import threshold_topk

__all__ = [
    "AcceptanceModel", "BridgewalkError", "ConvergenceError", "DataError", "EdgeCandidate",
    "EdgeRecommender", "EndorsementGraph", "NumericalError", "ParseError", "Partition",
    "PolarityTable", "RandomWalkControversy", "RankOneUpdate", "RecommendationSet", "RwcContext",
    "SingularUpdateError", "StaleUpdateError", "adamic_adar", "auc_eval", "build_context",
    "commit_edge", "delta_rwc", "delta_rwc_matrix", "fit_acceptance", "generate_planted_partition",
    "generate_two_star", "greedy", "hitting_times", "load_graph", "load_partition", "make_update",
    "personalized_pagerank", "polarity", "predict_edge", "random_strategy", "recompute_rwc", "rov",
    "rov_ap", "rwc", "save_graph", "save_partition", "spectral_bisect", "star_score",
    "star_score_limit", "threshold_topk", "verify_theorem1", "write_dot",
]
