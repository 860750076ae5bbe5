"""Planted dense subgraph recovery: seeded G(n, p) generation, pattern
planting, detection thresholds, topological features, a GCN scorer trained
from scratch, spectral cleaning, and the experiment harness around them."""

from .graphs import Graph, derive_seed, gen_gnp
from .planting import (BICLIQUE, CLIQUE, DAC, TWO_PLEX, PlantedInstance,
                       SubgraphKind, dense_gnq, generate_dataset, plant,
                       planted_density, verify_pattern)
from .thresholds import (ThresholdQuery, closed_form_threshold,
                         log_expected_count, threshold_scan)
from .features import (FeatureMatrix, NormalizationStats, degree_features,
                       fit_normalization, identity_features, motif3_features,
                       normalize)
from .model import (Checkpoint, PygonModel, TrainConfig, adam_step, backward,
                    build_modified_adjacency, extended_loss, forward,
                    load_checkpoint, predict, save_checkpoint, train,
                    wbce_loss)
from .cleaning import (CandidateSet, CleanResult, clean, power_iteration,
                       top_candidates)
from .harness import (ExperimentConfig, ExperimentResult, SweepResult,
                      ablation_edge_correction, ablation_loss,
                      recovery_metric, run_cross_validation, sqrt_regression,
                      threshold_sweep)
from .storage import load_features, load_instance, save_features, save_instance

__version__ = "0.1.0"
