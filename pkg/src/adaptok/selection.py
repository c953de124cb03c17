"""Token subset selectors: saliency top-k and diversity completion.

Stage 1 keeps the highest-saliency tokens.  Stage 2 picks a diverse subset
from the residual pool with one of three interchangeable selectors:

* ``dpp_greedy_map`` — greedy log-determinant maximization over the cosine
  kernel, using incremental Cholesky-style residual updates.
* ``fps_select`` — farthest point sampling under the cosine distance
  d(i,j) = 1 - e_i . e_j on normalized features.
* ``facility_location_select`` — greedy maximization of the coverage
  objective F(S) = sum_i max_{j in S} s(i,j) with s = (cos + 1) / 2.

Ties are always broken toward the lowest token index, so every selector is
deterministic.  ``dpp_greedy_naive`` and ``brute_force_max_logdet`` are
reference oracles for checking the fast path.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations, islice

import numpy as np

from .errors import InstanceTooLargeError, InvalidBudgetError, InvalidInputError
from .tensor_core import DEFAULT_EPSILON, _normalize_rows_raw, as_token_matrix

# Diagonal jitter keeps the incremental updates stable on collinear pools;
# marginal gains below RANK_FLOOR mean the kernel's numerical rank is
# exhausted and further determinant maximization is uninformative.
DEFAULT_JITTER = 1e-10
RANK_FLOOR = 1e-10

# Exhaustive enumeration guard: reject instances with more subsets than this.
MAX_ENUMERATION = 10**6

_DET_CHUNK = 65536

ATTENTION_MODES = ("cls_row", "global_average")


def as_saliency_vector(scores, n_tokens: int | None = None) -> np.ndarray:
    """Validate a per-token saliency vector: 1-D, finite, nonnegative."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1:
        raise InvalidInputError(f"saliency must be 1-D, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise InvalidInputError("saliency contains non-finite entries")
    if np.any(s < 0):
        raise InvalidInputError("saliency contains negative entries")
    if n_tokens is not None and s.shape[0] != n_tokens:
        raise InvalidInputError(
            f"saliency length {s.shape[0]} does not match n_tokens {n_tokens}"
        )
    return s


def as_index_pool(pool, n_tokens: int) -> np.ndarray:
    """Validate a candidate index set: strictly increasing ints in [0, n_tokens)."""
    idx = np.asarray(pool, dtype=np.int64)
    if idx.ndim != 1:
        raise InvalidInputError(f"index pool must be 1-D, got shape {idx.shape}")
    if idx.size:
        if idx.min() < 0 or idx.max() >= n_tokens:
            raise InvalidInputError(f"pool indices must lie in [0, {n_tokens})")
        if np.any(np.diff(idx) <= 0):
            raise InvalidInputError("pool indices must be strictly increasing")
    return idx


def _check_k(k: int, pool_size: int) -> int:
    k = int(k)
    if k < 0 or k > pool_size:
        raise InvalidBudgetError(f"k={k} outside feasible range [0, {pool_size}]")
    return k


@dataclass(frozen=True)
class DiversityPick:
    """Output of a diversity selector.

    ``indices`` is the selected set in ascending token order; ``pick_order``
    records the greedy selection sequence; ``gains`` holds the per-step
    objective gain (log-determinant gain for DPP, max-min distance for FPS,
    marginal coverage for facility location).  ``fallback_count`` is the
    number of slots filled past the kernel's numerical rank (DPP only).
    """

    indices: np.ndarray
    pick_order: np.ndarray
    gains: np.ndarray = field(default_factory=lambda: np.empty(0))
    fallback_count: int = 0


def _empty_pick() -> DiversityPick:
    return DiversityPick(
        indices=np.empty(0, dtype=np.int64),
        pick_order=np.empty(0, dtype=np.int64),
        gains=np.empty(0, dtype=np.float64),
    )


def reduce_head_attention(head_scores, mode: str = "cls_row") -> np.ndarray:
    """Average per-head per-token attention scores across heads.

    ``cls_row`` expects each row to be one head's CLS-to-token attention;
    ``global_average`` expects each row to be one head's column-mean
    attention received by each token (for encoders without a CLS token).
    The reduction is the same mean over heads in both modes; the mode names
    the provenance the caller is feeding in.
    """
    if mode not in ATTENTION_MODES:
        raise InvalidInputError(f"unknown attention mode {mode!r}, expected one of {ATTENTION_MODES}")
    A = np.asarray(head_scores, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise InvalidInputError(f"head scores must be H x N with H >= 1, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("head scores contain non-finite entries")
    if np.any(A < 0):
        raise InvalidInputError("head scores contain negative entries")
    return A.mean(axis=0)


def saliency_topk(saliency, k: int) -> np.ndarray:
    """Indices of the k largest saliency scores, ascending, ties to lower index."""
    s = as_saliency_vector(saliency)
    k = _check_k(k, s.shape[0])
    if k == 0:
        return np.empty(0, dtype=np.int64)
    # stable sort on negated scores keeps the lower index first among ties
    order = np.argsort(-s, kind="stable")
    return np.sort(order[:k]).astype(np.int64)


def _pool_unit_kernel(E: np.ndarray, idx: np.ndarray, epsilon: float) -> np.ndarray:
    # E and idx already validated; unit @ unit.T hits the BLAS symmetric
    # rank-k path and comes back bitwise symmetric, so no extra
    # symmetrization pass is needed (covered by a regression test)
    unit = _normalize_rows_raw(E[idx], epsilon)
    return unit @ unit.T


def cosine_kernel(tokens, pool, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Cosine-similarity kernel over the pooled, row-normalized tokens.

    The result is a symmetric PSD matrix with unit diagonal for nonzero
    rows; zero rows normalize to zero and contribute zero rows/columns.
    The pool must be nonempty.
    """
    E = as_token_matrix(tokens)
    idx = as_index_pool(pool, E.shape[0])
    if idx.size == 0:
        raise InvalidInputError("pool must be nonempty")
    return _pool_unit_kernel(E, idx, epsilon)


def _fallback_order(avail_pos: np.ndarray, pool: np.ndarray, saliency) -> np.ndarray:
    """Positions to fill once determinant gains are exhausted.

    Descending saliency within the pool when a saliency vector is supplied
    (ties to the lower index), ascending index otherwise.
    """
    if saliency is None:
        return avail_pos
    s = as_saliency_vector(saliency)
    order = np.argsort(-s[pool[avail_pos]], kind="stable")
    return avail_pos[order]


def dpp_greedy_map(
    tokens,
    pool,
    k: int,
    saliency=None,
    jitter: float = DEFAULT_JITTER,
    epsilon: float = DEFAULT_EPSILON,
) -> DiversityPick:
    """Greedy MAP selection of k tokens maximizing log det of the cosine kernel.

    Implements the fast greedy algorithm with incremental Cholesky-style
    updates: after each pick the residual squared diagonal d_i^2 equals the
    marginal determinant gain of candidate i, so each step costs O(k * m)
    instead of a fresh determinant per candidate.  Selection order matches a
    naive greedy that recomputes full determinants (ties to lowest index).

    When every remaining gain falls below RANK_FLOOR the pool is rank
    deficient; remaining slots are filled by descending ``saliency`` (or
    ascending index if none is given) so the budget contract still holds.
    """
    E = as_token_matrix(tokens)
    idx = as_index_pool(pool, E.shape[0])
    k = _check_k(k, idx.size)
    if k == 0:
        return _empty_pick()

    L = _pool_unit_kernel(E, idx, epsilon)
    m = idx.size
    L[np.diag_indices(m)] += jitter

    cis = np.zeros((k, m))
    di2 = np.diag(L).copy()
    avail = np.ones(m, dtype=bool)
    picked: list[int] = []
    gains: list[float] = []

    for step in range(k):
        # selected entries are masked in place with -inf, so the argmax
        # runs straight over di2 without a temporary per step
        j = int(np.argmax(di2))
        best = di2[j]
        if best < RANK_FLOOR:
            break
        gains.append(float(np.log(best)))
        picked.append(j)
        avail[j] = False
        di2[j] = -np.inf
        if step < k - 1:
            ci = cis[:step, j]
            eis = (L[j] - ci @ cis[:step]) / math.sqrt(best)
            cis[step] = eis
            di2 -= np.square(eis)

    fallback_count = k - len(picked)
    if fallback_count:
        fill = _fallback_order(np.flatnonzero(avail), idx, saliency)
        picked.extend(int(p) for p in fill[:fallback_count])

    order = idx[np.asarray(picked, dtype=np.int64)]
    return DiversityPick(
        indices=np.sort(order),
        pick_order=order,
        gains=np.asarray(gains, dtype=np.float64),
        fallback_count=fallback_count,
    )


def dpp_greedy_naive(
    tokens,
    pool,
    k: int,
    saliency=None,
    jitter: float = DEFAULT_JITTER,
    epsilon: float = DEFAULT_EPSILON,
) -> DiversityPick:
    """Reference greedy MAP that recomputes full determinants at every step.

    Oracle twin of :func:`dpp_greedy_map`: same kernel, same tie-break, same
    rank-deficiency fallback, but each step evaluates det(L_{S + {j}}) for
    every remaining candidate by direct (batched) determinant computation.
    """
    E = as_token_matrix(tokens)
    idx = as_index_pool(pool, E.shape[0])
    k = _check_k(k, idx.size)
    if k == 0:
        return _empty_pick()

    L = _pool_unit_kernel(E, idx, epsilon)
    m = idx.size
    L[np.diag_indices(m)] += jitter

    avail = np.ones(m, dtype=bool)
    picked: list[int] = []
    gains: list[float] = []
    det_s = 1.0  # det of the empty submatrix

    for _ in range(k):
        cand = np.flatnonzero(avail)
        s = len(picked)
        subs = np.empty((cand.size, s + 1, s + 1))
        if s:
            subs[:, :s, :s] = L[np.ix_(picked, picked)]
            cross = L[np.ix_(cand, picked)]
            subs[:, s, :s] = cross
            subs[:, :s, s] = cross
        subs[:, s, s] = L[cand, cand]
        dets = np.linalg.det(subs)
        best = int(np.argmax(dets))
        gain = dets[best] / det_s
        if gain < RANK_FLOOR:
            break
        gains.append(float(np.log(gain)))
        picked.append(int(cand[best]))
        avail[cand[best]] = False
        det_s = dets[best]

    fallback_count = k - len(picked)
    if fallback_count:
        fill = _fallback_order(np.flatnonzero(avail), idx, saliency)
        picked.extend(int(p) for p in fill[:fallback_count])

    order = idx[np.asarray(picked, dtype=np.int64)]
    return DiversityPick(
        indices=np.sort(order),
        pick_order=order,
        gains=np.asarray(gains, dtype=np.float64),
        fallback_count=fallback_count,
    )


def brute_force_max_logdet(
    tokens, pool, k: int, jitter: float = DEFAULT_JITTER, epsilon: float = DEFAULT_EPSILON
):
    """Exact argmax of log det(L_S) over all size-k subsets of the pool.

    Returns (indices ascending, log-determinant).  Ties resolve to the
    lexicographically smallest subset.  Guarded: raises
    InstanceTooLargeError when C(|pool|, k) exceeds MAX_ENUMERATION.
    """
    E = as_token_matrix(tokens)
    idx = as_index_pool(pool, E.shape[0])
    k = _check_k(k, idx.size)
    if k == 0:
        return np.empty(0, dtype=np.int64), 0.0
    n_subsets = math.comb(idx.size, k)
    if n_subsets > MAX_ENUMERATION:
        raise InstanceTooLargeError(
            f"C({idx.size}, {k}) = {n_subsets} subsets exceeds the {MAX_ENUMERATION} guard"
        )

    L = _pool_unit_kernel(E, idx, epsilon)
    L[np.diag_indices(idx.size)] += jitter

    best_det = -np.inf
    best_combo: tuple[int, ...] | None = None
    # chunked batched determinants keep memory bounded and LAPACK busy;
    # lexicographic enumeration + strict improvement gives the smallest tie
    combo_iter = combinations(range(idx.size), k)
    while True:
        rows = list(islice(combo_iter, _DET_CHUNK))
        if not rows:
            break
        chunk = np.asarray(rows, dtype=np.int64)
        subs = L[chunk[:, :, None], chunk[:, None, :]]
        dets = np.linalg.det(subs)
        j = int(np.argmax(dets))
        if dets[j] > best_det:
            best_det = float(dets[j])
            best_combo = tuple(chunk[j])
        if len(rows) < _DET_CHUNK:
            break

    assert best_combo is not None
    logdet = float(np.log(best_det)) if best_det > 0 else -np.inf
    return idx[np.asarray(best_combo, dtype=np.int64)], logdet


def fps_select(
    tokens,
    pool,
    k: int,
    start: str = "lowest_index",
    saliency=None,
    epsilon: float = DEFAULT_EPSILON,
) -> DiversityPick:
    """Farthest point sampling over the pool under d(i,j) = 1 - e_i . e_j.

    Starts from the pool's lowest index (or its highest-saliency token with
    ``start="max_saliency"``), then repeatedly picks the candidate whose
    minimum distance to the selected set is largest; ties to lowest index.
    ``gains`` records that max-min distance per pick (inf for the seed).
    """
    E = as_token_matrix(tokens)
    idx = as_index_pool(pool, E.shape[0])
    k = _check_k(k, idx.size)
    if k == 0:
        return _empty_pick()

    if start == "lowest_index":
        first = 0
    elif start == "max_saliency":
        if saliency is None:
            raise InvalidInputError('start="max_saliency" requires a saliency vector')
        s = as_saliency_vector(saliency)
        first = int(np.argmax(s[idx]))
    else:
        raise InvalidInputError(f"unknown start rule {start!r}")

    unit = _normalize_rows_raw(E[idx], epsilon)
    picked = [first]
    gains = [np.inf]
    min_dist = 1.0 - unit @ unit[first]
    min_dist[first] = -np.inf

    while len(picked) < k:
        j = int(np.argmax(min_dist))
        picked.append(j)
        gains.append(float(min_dist[j]))
        min_dist = np.minimum(min_dist, 1.0 - unit @ unit[j])
        min_dist[j] = -np.inf

    order = idx[np.asarray(picked, dtype=np.int64)]
    return DiversityPick(
        indices=np.sort(order),
        pick_order=order,
        gains=np.asarray(gains, dtype=np.float64),
    )


def facility_location_select(
    tokens,
    pool,
    k: int,
    epsilon: float = DEFAULT_EPSILON,
) -> DiversityPick:
    """Greedy facility location over s(i,j) = clip((e_i . e_j + 1) / 2, 0, 1).

    Maximizes F(S) = sum_{i in pool} max_{j in S} s(i,j) with unit weights:
    each step adds the candidate with the largest marginal coverage gain,
    ties to lowest index.  ``gains`` holds the marginal gains, so
    gains.sum() == F(S).
    """
    E = as_token_matrix(tokens)
    idx = as_index_pool(pool, E.shape[0])
    k = _check_k(k, idx.size)
    if k == 0:
        return _empty_pick()

    unit = _normalize_rows_raw(E[idx], epsilon)
    sim = np.clip((unit @ unit.T + 1.0) / 2.0, 0.0, 1.0)

    cover = np.zeros(idx.size)
    avail = np.ones(idx.size, dtype=bool)
    picked: list[int] = []
    gains: list[float] = []

    for _ in range(k):
        marginal = np.maximum(sim - cover[:, None], 0.0).sum(axis=0)
        marginal[~avail] = -np.inf
        j = int(np.argmax(marginal))
        picked.append(j)
        gains.append(float(marginal[j]))
        avail[j] = False
        cover = np.maximum(cover, sim[:, j])

    order = idx[np.asarray(picked, dtype=np.int64)]
    return DiversityPick(
        indices=np.sort(order),
        pick_order=order,
        gains=np.asarray(gains, dtype=np.float64),
    )
