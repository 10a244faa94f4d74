"""Computational toolkit for invariant random subgroups and local graph limits."""
from ._accel import NUMBA_ENABLED, backend_name
from .bs_space import LocalStatistics, MonteCarlo, bs_distance, local_statistics, mtp_defect, tv_distance
from .chabauty_rn import ClosedSubgroupRn, Quadrature, chabauty_distance, enumerate_in_ball, hausdorff_distance
from .errors import CapacityError, DomainError, IrsLabError
from .free_group_subgroups import (
    CoreGraph,
    chabauty_distance_fk,
    contains,
    schreier_from_permutations,
    short_relation_probability,
    stallings_core,
)
from .gh_metric import FiniteMetricSpace, gh_distance, ghd_series, pointed_gh_distance
from .rooted_graphs import RootedGraph, cheeger_constant, extract_ball, tree_ball_fraction

__version__ = "0.1.0"
