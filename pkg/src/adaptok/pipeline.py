"""End-to-end compression: entropy -> budget split -> two-stage selection.

``compress`` measures the sample's spectral entropy, splits the budget,
keeps the top-saliency tokens (stage 1), completes the set with a
diversity selector over the residual pool (stage 2), and returns the union
with per-index provenance.  ``compress_fixed`` forces the split instead,
for fixed-allocation baselines.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .budget import BudgetSplit, CompressConfig, allocate_budget
from .errors import InvalidBudgetError
from .prominence import EntropyReport, spectral_entropy
from .selection import (
    DEFAULT_JITTER,
    _pool_unit_kernel,
    as_saliency_vector,
    dpp_greedy_map,
    facility_location_select,
    fps_select,
    saliency_topk,
)
from .tensor_core import _normalize_rows_raw, as_token_matrix

STAGE_SALIENCY = "saliency"
STAGE_COVERAGE = "coverage"


@dataclass
class SelectionResult:
    """Selected token set with provenance and diagnostics.

    ``selected`` is ascending (original spatial order); the greedy order of
    the coverage stage is kept in ``coverage_pick_order``.  ``stage_of`` is
    aligned with ``selected``.  ``diagnostics`` holds deterministic scalars
    only; wall-clock phase timings live in ``timings_us`` and are excluded
    from serialization and equality so repeated runs stay bit-identical.
    """

    selected: np.ndarray
    stage_of: list[str]
    split: BudgetSplit
    entropy: EntropyReport
    coverage_pick_order: np.ndarray
    diagnostics: dict[str, float] = field(default_factory=dict)
    timings_us: dict[str, float] = field(default_factory=dict)

    @property
    def saliency_indices(self) -> np.ndarray:
        return self.selected[[s == STAGE_SALIENCY for s in self.stage_of]]

    @property
    def coverage_indices(self) -> np.ndarray:
        return self.selected[[s == STAGE_COVERAGE for s in self.stage_of]]


def selection_results_equal(a: SelectionResult, b: SelectionResult) -> bool:
    """Deterministic-field equality (timings are run-dependent and ignored)."""
    return (
        np.array_equal(a.selected, b.selected)
        and a.stage_of == b.stage_of
        and a.split == b.split
        and a.entropy == b.entropy
        and np.array_equal(a.coverage_pick_order, b.coverage_pick_order)
        and a.diagnostics == b.diagnostics
    )


def _now_us() -> float:
    return time.perf_counter_ns() / 1e3


def compress(tokens, saliency, config: CompressConfig) -> SelectionResult:
    """Run the full entropy-adaptive two-stage selection."""
    E = as_token_matrix(tokens)
    s = as_saliency_vector(saliency, n_tokens=E.shape[0])
    _check_budget(config.total_budget, E.shape[0])

    t0 = _now_us()
    entropy = spectral_entropy(E)
    t1 = _now_us()
    split = allocate_budget(entropy.normalized_entropy, config)
    t2 = _now_us()

    result = _run_stages(E, s, config, split, entropy)
    result.timings_us["entropy"] = t1 - t0
    result.timings_us["allocation"] = t2 - t1
    result.timings_us["total"] = _now_us() - t0
    return result


def compress_fixed(
    tokens, saliency, t_sal_fixed: int, config: CompressConfig
) -> SelectionResult:
    """Two-stage selection with the split forced to (t_sal_fixed, T - t_sal_fixed).

    Entropy is still computed and reported for diagnostics, but it does not
    influence the split.
    """
    E = as_token_matrix(tokens)
    s = as_saliency_vector(saliency, n_tokens=E.shape[0])
    _check_budget(config.total_budget, E.shape[0])
    t_sal = int(t_sal_fixed)
    if t_sal < 0 or t_sal > config.total_budget:
        raise InvalidBudgetError(
            f"t_sal_fixed={t_sal} outside [0, total_budget={config.total_budget}]"
        )

    t0 = _now_us()
    entropy = spectral_entropy(E)
    t1 = _now_us()
    t_cov = config.total_budget - t_sal
    split = BudgetSplit(
        t_sal=t_sal,
        t_cov=t_cov,
        normalized_entropy=entropy.normalized_entropy,
        coverage_ratio=t_cov / config.total_budget,
    )
    t2 = _now_us()

    result = _run_stages(E, s, config, split, entropy)
    result.timings_us["entropy"] = t1 - t0
    result.timings_us["allocation"] = t2 - t1
    result.timings_us["total"] = _now_us() - t0
    return result


def _check_budget(budget: int, n_tokens: int) -> None:
    if budget > n_tokens:
        raise InvalidBudgetError(f"budget {budget} exceeds n_tokens {n_tokens}")


def _run_stages(
    E: np.ndarray,
    s: np.ndarray,
    config: CompressConfig,
    split: BudgetSplit,
    entropy: EntropyReport,
) -> SelectionResult:
    n = E.shape[0]

    t2 = _now_us()
    sal_idx = saliency_topk(s, split.t_sal)
    t3 = _now_us()

    pool = np.setdiff1d(np.arange(n, dtype=np.int64), sal_idx, assume_unique=True)
    fallback_count = 0
    if split.t_cov > 0:
        if config.diversity_method == "dpp":
            pick = dpp_greedy_map(E, pool, split.t_cov, saliency=s, epsilon=config.epsilon)
            fallback_count = pick.fallback_count
        elif config.diversity_method == "fps":
            pick = fps_select(E, pool, split.t_cov, epsilon=config.epsilon)
        else:
            pick = facility_location_select(E, pool, split.t_cov, epsilon=config.epsilon)
        cov_idx = pick.indices
        cov_order = pick.pick_order
    else:
        cov_idx = np.empty(0, dtype=np.int64)
        cov_order = np.empty(0, dtype=np.int64)
    t4 = _now_us()

    selected = np.sort(np.concatenate([sal_idx, cov_idx]))
    sal_set = set(sal_idx.tolist())
    stage_of = [STAGE_SALIENCY if i in sal_set else STAGE_COVERAGE for i in selected.tolist()]

    diagnostics = _diagnostics(E, selected, cov_idx, config.epsilon)
    diagnostics["stage2_fallback_count"] = float(fallback_count)

    return SelectionResult(
        selected=selected,
        stage_of=stage_of,
        split=split,
        entropy=entropy,
        coverage_pick_order=cov_order,
        diagnostics=diagnostics,
        timings_us={"stage1": t3 - t2, "stage2": t4 - t3},
    )


def _diagnostics(
    E: np.ndarray, selected: np.ndarray, cov_idx: np.ndarray, epsilon: float
) -> dict[str, float]:
    diag: dict[str, float] = {}

    if cov_idx.size:
        L = _pool_unit_kernel(E, cov_idx, epsilon)
        L[np.diag_indices(cov_idx.size)] += DEFAULT_JITTER
        sign, logdet = np.linalg.slogdet(L)
        # jittered PSD kernel has det >= jitter^k; a nonpositive sign is LU
        # pathology, so clamp to that floor to keep the value finite
        floor = cov_idx.size * np.log(DEFAULT_JITTER)
        diag["coverage_logdet"] = float(logdet) if sign > 0 else float(floor)
    else:
        diag["coverage_logdet"] = 0.0

    if selected.size >= 2:
        unit = _normalize_rows_raw(E[selected], epsilon)
        sims = unit @ unit.T
        np.fill_diagonal(sims, -np.inf)
        diag["min_pairwise_cosine_distance"] = float(1.0 - sims.max())

    return diag
