"""Subspace geometry under random compression: canonical angles, distances,
Johnson-Lindenstrauss projectors, distortion benchmarks and downstream tasks."""
__version__ = "0.1.0"

from .errors import CslError, InputError, InvariantViolation, NumericalError
from .numerics import orthonormalize, sym_eig, thin_svd
from .projection import Family, JlProjector, make_projector, project_rows, project_subspace
from .subspace import (DistanceKind, Subspace, affinity, canonical_angles, distance,
                       principal_vectors, vector_subspace_angle)
from .synth import AnglePrescription, UosSpec, generate_uos, subspace_pair_with_angles
