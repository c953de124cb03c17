"""adaptok: entropy-adaptive visual token subset selection.

Measures how concentrated a sample's feature energy is via the spectral
entropy of its token matrix, splits a fixed token budget between
saliency-driven and coverage-driven selection through a sigmoidal mapping,
and runs a two-stage selection: attention top-k, then diversity completion
(greedy DPP MAP by default, farthest point sampling and facility location
as alternates).
"""

from .budget import (
    DEFAULT_TAU,
    DIVERSITY_METHODS,
    MU_PRESETS,
    BudgetSplit,
    CompressConfig,
    allocate_budget,
    resolve_mu,
)
from .costmodel import (
    LLAVA_NEXT_7B,
    ModelCostSpec,
    estimate_kv_cache_bytes,
    estimate_prefill_flops,
    flops_reduction,
)
from .errors import (
    AdaptokError,
    BadMagicError,
    DegenerateInputError,
    FormatError,
    InstanceTooLargeError,
    InvalidBudgetError,
    InvalidInputError,
    NonFiniteValueError,
    TrailingDataError,
    TruncatedPayloadError,
    ValueRangeError,
)
from .io_formats import (
    read_saliency,
    read_selection_result,
    read_tokens,
    selection_result_from_json,
    selection_result_to_json,
    write_saliency,
    write_selection_result,
    write_tokens,
)
from .pipeline import SelectionResult, compress, compress_fixed, selection_results_equal
from .prominence import (
    EntropyReport,
    attention_entropy,
    feature_norm_entropy,
    spectral_entropy,
)
from .selection import (
    DiversityPick,
    brute_force_max_logdet,
    cosine_kernel,
    dpp_greedy_map,
    dpp_greedy_naive,
    facility_location_select,
    fps_select,
    reduce_head_attention,
    saliency_topk,
)
from .synth import subseed_rng, synth_tokens
from .tensor_core import (
    SymmetricSpectrum,
    as_token_matrix,
    gram_matrix,
    l2_normalize_rows,
    sym_eigenvalues,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptokError",
    "BadMagicError",
    "BudgetSplit",
    "CompressConfig",
    "DEFAULT_TAU",
    "DIVERSITY_METHODS",
    "DegenerateInputError",
    "DiversityPick",
    "EntropyReport",
    "FormatError",
    "InstanceTooLargeError",
    "InvalidBudgetError",
    "InvalidInputError",
    "LLAVA_NEXT_7B",
    "MU_PRESETS",
    "ModelCostSpec",
    "NonFiniteValueError",
    "SelectionResult",
    "SymmetricSpectrum",
    "TrailingDataError",
    "TruncatedPayloadError",
    "ValueRangeError",
    "allocate_budget",
    "as_token_matrix",
    "attention_entropy",
    "brute_force_max_logdet",
    "compress",
    "compress_fixed",
    "cosine_kernel",
    "dpp_greedy_map",
    "dpp_greedy_naive",
    "estimate_kv_cache_bytes",
    "estimate_prefill_flops",
    "facility_location_select",
    "feature_norm_entropy",
    "flops_reduction",
    "fps_select",
    "gram_matrix",
    "l2_normalize_rows",
    "read_saliency",
    "read_selection_result",
    "read_tokens",
    "reduce_head_attention",
    "resolve_mu",
    "saliency_topk",
    "selection_result_from_json",
    "selection_result_to_json",
    "selection_results_equal",
    "spectral_entropy",
    "subseed_rng",
    "sym_eigenvalues",
    "synth_tokens",
    "write_saliency",
    "write_selection_result",
    "write_tokens",
]
