"""Random thin sets of integers: sampling, relations, harmonic functionals and bound checks."""

from .core import (
    BaseSequence,
    BlockSchedule,
    IntegerSet,
    MeanSchedule,
    block_boundary,
    block_trace,
    counting_nu,
    default_c,
    iter_blocks,
    load_set,
    mean_at,
    regularity_report,
    relation_bound,
    sample_coupled,
    sample_set,
    sample_two_stage,
    save_set,
    sigma,
)
from .errors import BlockOverflow, InvalidInput, ResourceExceeded, ThinSetsError, VerificationFailed
from .fourier import (
    NormReport,
    TrigPolynomial,
    l1_norm,
    lq_norm,
    orlicz_psi2_norm,
    pseudo_complement,
    psi_parameter,
    rademacher_norm,
    riesz_product,
    sup_norm,
)
from .relations import (
    Relation,
    count_relation_supports,
    extract_sqrt_block,
    find_relation,
    greedy_quasi_independent,
    is_quasi_independent,
    max_quasi_independent,
    prune_block_max_relation,
)

__version__ = "0.1.0"
