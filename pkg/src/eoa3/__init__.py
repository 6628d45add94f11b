"""Entanglement of assistance for three-qubit pure states.

Computes cut entanglements and assisted entanglement for 2 x 2 x n pure
states, constructs the optimal helper measurement for the E2 measure,
classifies states admitting lossless helper decoupling under strictly concave
monotones, and provides ensemble decompositions (equal-concurrence and
all-entangled) for two-qubit density matrices.
"""

from .assistance import (
    AssistanceReport,
    CommutingBasisResult,
    EBasisResult,
    Measurement,
    SearchBudget,
    VerificationError,
    analyze,
    average_post_measurement,
    commuting_charlie_basis,
    corollary_check,
    eoa_density,
    eoa_numeric,
    eoc_lower_bound_search,
    lossless_classifier,
    theorem1_measurement,
    unital_fixed_point_check,
    verify_theorem1,
)
from .ensembles import (
    Ensemble,
    entangled_decomposition,
    equal_concurrence_decomposition,
    hjw_ensemble,
    s0_assistance,
)
from .monotones import (
    MonotoneSpec,
    concurrence_pure,
    cut_entanglement,
    e2,
    entropy_alpha,
    g_concurrence,
    ky_fan,
    three_tangle,
    wootters_concurrence,
)
from .qcore import (
    BlochVector,
    DensityMatrix,
    InputError,
    PureState,
    SchmidtForm,
    bloch_vector,
    density_from_json,
    density_to_json,
    fidelity,
    from_bloch,
    haar_random_pure,
    haar_random_unitary,
    partial_trace,
    random_density_matrix,
    reduced_density,
    schmidt_decompose,
    state_from_json,
    state_to_json,
    tensor,
)
from .states import FamilySpec, generate, verify_family_membership

__version__ = "0.1.0"
