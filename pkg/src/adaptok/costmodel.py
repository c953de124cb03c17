"""Dense-prefill cost arithmetic for a decoder LM consuming visual tokens.

The FLOPs estimate combines the linear parameter term with the quadratic
attention term over the full prefill length L = visual + text tokens:

    FLOPs ~= 2 * n_params * L  +  4 * n_layers * L^2 * hidden_dim

KV-cache size assumes K and V per layer at fp16.
"""

from dataclasses import dataclass

from .errors import InvalidInputError


@dataclass(frozen=True)
class ModelCostSpec:
    """Shape of the language model behind the cost estimates."""

    hidden_dim: int
    n_layers: int
    intermediate_dim: int
    n_params: int
    text_tokens: int = 60

    def __post_init__(self):
        for name in ("hidden_dim", "n_layers", "intermediate_dim", "n_params", "text_tokens"):
            if int(getattr(self, name)) < 1:
                raise InvalidInputError(f"{name} must be positive, got {getattr(self, name)}")


# 7B-class decoder (Llama-architecture) behind a high-resolution multi-crop
# vision frontend; text_tokens is a typical benchmark prompt length.
LLAVA_NEXT_7B = ModelCostSpec(
    hidden_dim=4096,
    n_layers=32,
    intermediate_dim=11008,
    n_params=6_738_415_616,
    text_tokens=60,
)

MODEL_SPECS = {"llava-next-7b": LLAVA_NEXT_7B}


def estimate_prefill_flops(seq_visual: int, spec: ModelCostSpec) -> float:
    """Estimated dense-prefill FLOPs for a given visual token count."""
    seq_visual = int(seq_visual)
    if seq_visual < 0:
        raise InvalidInputError(f"seq_visual must be >= 0, got {seq_visual}")
    length = seq_visual + spec.text_tokens
    return 2.0 * spec.n_params * length + 4.0 * spec.n_layers * length * length * spec.hidden_dim


def estimate_kv_cache_bytes(
    seq_visual: int, spec: ModelCostSpec, bytes_per_value: int = 2
) -> int:
    """KV-cache bytes for the visual part of the sequence (K and V per layer)."""
    seq_visual = int(seq_visual)
    if seq_visual < 0:
        raise InvalidInputError(f"seq_visual must be >= 0, got {seq_visual}")
    return 2 * spec.n_layers * spec.hidden_dim * seq_visual * int(bytes_per_value)


def flops_reduction(seq_before: int, seq_after: int, spec: ModelCostSpec) -> float:
    """Fractional FLOPs reduction when shrinking the visual sequence."""
    before = estimate_prefill_flops(seq_before, spec)
    after = estimate_prefill_flops(seq_after, spec)
    return 1.0 - after / before
