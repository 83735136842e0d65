"""Stochastic block models on Poisson multigraphs.

Standard, degree-corrected and prior-regularized objectives share one
sufficient-statistics core (:mod:`rsbm.blocks`) and one Metropolis-Hastings
sampler (:mod:`rsbm.mcmc`).
"""
from .blocks import BlockStats, Partition, apply_move, compute_block_stats, read_partition
from .generators import (PlantedParams, planted_instance, planted_omega, sample_dcsbm,
                         sample_powerlaw_degrees, sample_rsbm)
from .graph import (EdgeListError, Multigraph, from_adjacency, from_edges, load_dataset,
                    load_edge_list, read_edge_list, sparsify, twin_stars, write_edge_list)
from .mcmc import Chain, MCMCConfig, Trace, anneal_f, run_trial, run_trials
from .metrics import coverage, mds_project, modularity, partition_distance
from .models import (Model, NodeFactors, PriorSpec, ThetaFitError, dcsbm_objective,
                     delta_objective, fit_theta, general_objective,
                     information_form_objective, objective, rsbm_objective, ssbm_objective)

__version__ = "0.1.0"
