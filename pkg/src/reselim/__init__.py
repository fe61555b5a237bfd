"""Influence maximization under the Independent Cascade model with seed reselection."""
from .cascade import (CascadeConfig, SeedMultiset, SpreadEstimate, estimate_spread,
                      simulate_once)
from .exact import OracleTooLarge, exact_spread, exact_spread_direct
from .graph import (RawGraph, WeightedGraph, assign_tr, assign_wc, copy_expand, gen_random,
                    gen_star, parse_edge_list, symmetrize)
from .maximize import GreedyCurve, greedy_select, single_node_spreads
from .metrics import (alpha_sweep, categorize, fit_saturation, hub_ratio,
                      influence_saturation, pearson, reselection_gain)

__version__ = "0.1.0"
