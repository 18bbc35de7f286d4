"""The three downstream tasks, each runnable on raw or compressed data."""
from .clustering import (ClusteringResult, cluster, clustering_error, spectral_cluster,
                         spectral_embedding, ssc_omp)
from .detection import (DetectionBound, SubspaceBank, compress_bank, detect, detect_compressed,
                        detect_compressed_many, detect_many, detection_bound,
                        detection_error_rate, detection_exponent, sample_observations)
from .visualization import (DissimilarityMatrix, EmbeddingCoords, classical_mds, dissimilarity,
                            procrustes_align, visualize)
