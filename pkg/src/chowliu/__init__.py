"""Finite-sample Chow-Liu learning of tree-structured binary Bayesnets."""

__version__ = "0.1.0"

from .evaluate import TvEstimate, hellinger_exact, tv_exact, tv_mc
from .hierarchy import classify_general, classify_symmetric
from .instances import HardInstanceConfig, generate_hard, random_general, random_symmetric, random_tree
from .learner import LearnedModel, chow_liu, chow_liu_symmetric, count_pairs, kruskal_max_st
from .model import PairwiseMarginal, SymmetricTreeModel, TreeModel, from_symmetric

__all__ = [
    "__version__",
    "TreeModel",
    "SymmetricTreeModel",
    "PairwiseMarginal",
    "from_symmetric",
    "count_pairs",
    "kruskal_max_st",
    "chow_liu",
    "chow_liu_symmetric",
    "LearnedModel",
    "tv_exact",
    "tv_mc",
    "hellinger_exact",
    "TvEstimate",
    "classify_symmetric",
    "classify_general",
    "random_tree",
    "random_symmetric",
    "random_general",
    "generate_hard",
    "HardInstanceConfig",
]
