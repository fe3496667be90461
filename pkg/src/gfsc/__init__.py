"""Multi-view spectral clustering by joint graph learning and weighted graph fusion."""
from .errors import (DatasetError, DimensionError, GFSCError, InputError, MetricError,
                     NumericsError)
from .types import (ClusteringResult, ConsensusGraph, Hyperparams, MultiViewDataset,
                    SolverTrace, SpectralEmbedding, SpectralQuantities, ViewGraph,
                    ViewWeights, normalize_dataset)
from .graph import learn_single_view_graph, update_view_graph
from .fusion import average_graph, compute_weights, update_consensus
from .spectral import build_laplacian, count_components, spectral_clustering, update_embedding
from .metrics import accuracy, kmeans, nmi, purity
from .solver import gf, gfsc, initialize, objective
from .data import DatasetManifest, generate_synthetic, load_dataset

__version__ = "0.1.0"
