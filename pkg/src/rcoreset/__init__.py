"""Randomized composable core-sets for submodular maximization: oracles,
selection algorithms, distributed/streaming simulators, hardness-instance
generators, and the certifying linear programs."""

from .oracle import (CapacityError, ContractError, CoverageInstance,
                     CutInstance, InputError, OracleStats,
                     SubmodularInstance, brute_force_best_k, load_instance,
                     marginal, save_instance, value)
from .algorithms import (ASCENDING_IDS, NiceReport, Selection, TieOrder,
                         check_beta_nice, greedy, lazy_greedy,
                         make_threshold_greedy, random_greedy,
                         selection_from_items, threshold_greedy)
from .clustering import (Clustering, SeedTree, clustering_from_csv,
                         clustering_to_csv, random_clustering, stream_blocks)
from .pipeline import (D_CONST, PipelineConfig, PseudoGreedyResult, RunReport,
                       compose_and_post, measure_fk, pipeline_k_prime,
                       pseudo_greedy, run_coreset_phase, run_distributed,
                       run_small_coreset_phase, run_streaming,
                       small_coreset_machine)
from .instances import (GENERATORS, GeneratedInstance, gen_half_barrier,
                        gen_info_theoretic, gen_nonrandomized_hard,
                        gen_random_coverage, gen_random_cut, gen_small_hard,
                        gen_tightness_585)
from .lp import (LpProblem, LpSolution, Sle3Result, SolverError, build_lp_kk2,
                 build_lp_r, minimize_sle2, minimize_sle3, scan_lp_r,
                 solve_lp, verify_constraints)

__version__ = "0.1.0"
