"""Tensor-train approximation in the maximum norm.

Dense tensors are numpy arrays; tensor trains are :class:`TTTensor` objects.
"""

from .altproj import (
    APConfig,
    ApproxReport,
    alternating_projections,
    binary_search_epsilon,
    project_ball,
    quasi_project_lowrank,
)
from .generators import (
    GeneratorSpec,
    generate,
    identity_tensor,
    identity_tt,
    random_tt_init,
    uniform_tensor,
)
from .norms import (
    CoherenceProfile,
    block_coherence,
    coherence_error_bound,
    core_left_coherence,
    core_norm_f_inf,
    core_right_coherence,
    cp_to_tt,
    gamma_bound_via_coherence,
    gamma_cp_upper,
    gamma_tt_upper,
    rank_bound_matrix,
    rank_bound_tt,
    subspace_coherence,
    tt_core_coherences,
)
from .sketch import SketchConfig, compress, draw_sketches, moment_scan, sketch_error_report
from .tensor import (
    TTTensor,
    interface_matrices,
    max_norm_error,
    orthogonalize_t,
    tt_add,
    tt_eval,
    tt_rank_of_dense,
    tt_round,
    tt_svd,
    tt_to_dense,
    unfold,
)
from .tnsr import read_tnsr, write_tnsr

__version__ = "0.1.0"
