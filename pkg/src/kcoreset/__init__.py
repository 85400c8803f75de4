"""Coreset-based k-center clustering, with and without outliers, for MapReduce and streaming."""

from .errors import BudgetExceeded, InputError
from .gmm import Coreset, GmmTrace, WeightedPoint, build_weighted_coreset, gmm, gmm_adaptive
from .mapreduce import (
    PartitionPlan,
    RunReport,
    kcenter_mr,
    kcenter_outliers_mr_det,
    kcenter_outliers_mr_rand,
    partition,
)
from .metric import RadiusReport, as_dataset, distance, radius, radius_with_outliers
from .oracles import (
    OracleResult,
    brute_force_kcenter,
    brute_force_kcenter_outliers,
    charikar_baseline,
    sequential_coreset,
)
from .outliers import find_min_radius, outliers_cluster, solve_weighted
from .solution import ClusteringSolution
from .streaming import (
    DoublingCoreset,
    StreamConfig,
    choose_tau,
    stream_init,
    stream_kcenter_no_outliers,
    stream_solve_outliers,
    stream_update,
    two_pass_oblivious,
)

__version__ = "0.1.0"
