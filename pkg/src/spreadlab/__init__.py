"""Simulation and analysis toolkit for degree- and distance-penalized SI
spreading on spatial scale-free networks."""

__version__ = "0.1.0"

from .core_graph import (ComponentLabeling, DegreeStats, NodeRecord,
                         SpatialGraph, connected_components, degree_stats,
                         haversine_km, largest_component_subgraph,
                         load_sgraph, save_sgraph, torus_distance)
from .estimate import (ConcavityVerdict, HillResult, TailFit,
                       concavity_check, empirical_truncated_tail,
                       estimate_tau, fit_alpha, fit_growth_exponent,
                       hill_estimator, select_kappa)
from .girg import (GirgParams, connection_probability, sample_girg,
                   sample_girg_naive, sample_weights)
from .gowalla import (GowallaGraph, build_gowalla_graph, find_seed_node,
                      modal_home_location, parse_checkins)
from .rewire import MixingDiagnostic, mixing_diagnostic, switch_rewire
from .spread import (CostAssignment, EpidemicCurve, HeatmapGrid,
                     PenaltyParams, SpreadResult, assign_costs,
                     curve_quantiles, epidemic_curve, heatmap_grid,
                     infection_path, saturation_time, spread_from)
from .theory import (EdgeTailPrediction, LambdaSearchResult, ModelPoint,
                     PhaseReport, classify, compute_phi, compute_psi,
                     compute_s_star, edge_tail_theory, lambda_search,
                     lambda_value, phase_diagram_grid)
