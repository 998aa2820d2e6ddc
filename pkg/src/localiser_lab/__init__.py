"""localiser-lab: numerical index pairings via the spectral localiser.

Quasi-projection representatives of the odd index pairing, their spectral
truncations, the odd spectral localiser with dense and banded signature
paths, a semi-finite weighted-trace variant over C^m, and a brute-force
Fredholm oracle that certifies every half-signature the toolkit produces.
"""

__version__ = "0.1.0"

from . import errors
from .operators import (
    DENSE_LIMIT,
    EigenSystem,
    HermitianMatrix,
    apply_function,
    compress,
    eig,
    operator_norm,
    spectral_projection,
)
from .ktheory import (
    K0Class,
    QuasiIdempotent,
    QuasiProjection,
    idempotent_defect,
    k0_from_pair,
    kappa0,
    perturbation_defect_bound,
    projection_perturbation_check,
    projection_rank,
    straightline_homotopy_valid,
)
from .pairing import (
    EPS_STAR,
    R_CERTIFIED,
    AsymptoticFrame,
    LocaliserFunctions,
    PairRepresentative,
    C_s_constant,
    asymptotic_equivalence_report,
    build_frame,
    build_pair,
    commutator_bound_cs,
    commutator_bound_resolvent,
    default_functions,
    weighted_F_commutator_bound,
)
from .localiser import (
    Localiser,
    SpectralDecomposition,
    ThresholdReport,
    block_decompose,
    build_localiser,
    congruence_check,
    diagonal_reduction_check,
    half_signature_index,
    offdiagonal_certificate,
    signature,
    snap_half_integer,
    spectral_decompose,
    thresholds,
)
from .models import (
    BlockModel,
    CircleModel,
    FredholmWitness,
    block_model,
    circle_model,
    edge_guard,
    fredholm_index_oracle,
)
from .semifinite import (
    TauClass,
    WeightedTrace,
    semifinite_half_signature,
    tau_rank,
    tau_signature,
    trace_transfer_check,
)
