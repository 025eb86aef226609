"""Spectra of bond percolation graphs and Galton-Watson trees.

Exact finite-graph spectral measures, population dynamics for the resolvent
recursion on random trees, and seeded desk-scale experiments.
"""
from .distributions import (OffspringDistribution, SkeletonLaws, extinction_probability,
                            sample_conditioned_pair, size_bias_shift, skeleton_laws,
                            tv_distance, wasserstein_to_dirac)
from .errors import (CapExceededError, ConfigError, ConvergenceError, HypothesisViolation,
                     QpercError)
from .graphs import Graph, ball, ball_report, girth, percolate, random_regular, tree_ball_test
from .rde import (DosSpec, PoolParams, ResolventEnsemble, density_of_states,
                  discrepancy_kappa, evolve_pool, evolve_skeleton_pool, kappa_bound_check,
                  lyapunov, sample_V, ugw_root_resolvent)
from .spectral import (EigenSystem, SpectralMeasure, coaire_check, count_delocalized,
                       delocalization_profile, eigendecompose, empirical_spectral_measure,
                       interval_mass, kesten_mckay_density, kesten_mckay_transform, psik_check,
                       semicircle_density, semicircle_transform, stieltjes,
                       vertex_spectral_measure, weakdeconv_check)
from .trees import (RootedTree, enumerate_trees, sample_extinct_tree, sample_gw, sample_ugw,
                    total_progeny_tail_bound)

__version__ = "0.1.0"
