import numpy as np
import pytest
from oracles import (
    facility_optimum,
    facility_value,
    pairwise_cosine_naive,
    topk_by_sort,
    verify_fps_order,
)

from adaptok import (
    InstanceTooLargeError,
    InvalidBudgetError,
    InvalidInputError,
    brute_force_max_logdet,
    cosine_kernel,
    dpp_greedy_map,
    dpp_greedy_naive,
    facility_location_select,
    fps_select,
    reduce_head_attention,
    saliency_topk,
)

E1_E1_E2 = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


class TestReduceHeadAttention:
    def test_single_head_identity(self):
        row = np.array([[0.2, 0.1, 0.7]])
        np.testing.assert_array_equal(reduce_head_attention(row), row[0])

    def test_two_heads(self):
        heads = np.array([[1.0, 0.0, 3.0], [3.0, 2.0, 1.0]])
        np.testing.assert_array_equal(reduce_head_attention(heads), [2.0, 1.0, 2.0])

    def test_equal_heads_idempotent(self):
        heads = np.tile([0.3, 0.5, 0.2], (4, 1))
        np.testing.assert_allclose(reduce_head_attention(heads, "global_average"), [0.3, 0.5, 0.2])

    def test_rejects_negative(self):
        with pytest.raises(InvalidInputError):
            reduce_head_attention(np.array([[0.1, -0.2]]))

    def test_rejects_unknown_mode(self):
        with pytest.raises(InvalidInputError):
            reduce_head_attention(np.array([[0.1, 0.2]]), mode="rowmax")


class TestSaliencyTopk:
    def test_basic(self):
        np.testing.assert_array_equal(saliency_topk([0.1, 0.9, 0.5], 2), [1, 2])

    def test_tie_goes_to_lower_index(self):
        np.testing.assert_array_equal(saliency_topk([0.5, 0.5, 0.1], 1), [0])

    def test_k_zero(self):
        assert saliency_topk([0.5, 0.1], 0).size == 0

    def test_matches_sort_oracle(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 30))
            scores = rng.choice([0.0, 0.25, 0.5, 1.0, 2.0], size=n)  # force ties
            k = int(rng.integers(0, n + 1))
            np.testing.assert_array_equal(saliency_topk(scores, k), topk_by_sort(scores, k))

    def test_budget_errors(self):
        with pytest.raises(InvalidBudgetError):
            saliency_topk([0.1, 0.2], 3)
        with pytest.raises(InvalidBudgetError):
            saliency_topk([0.1, 0.2], -1)


class TestCosineKernel:
    def test_orthogonal_rows_give_identity(self):
        L = cosine_kernel(np.eye(3), np.arange(3))
        np.testing.assert_allclose(L, np.eye(3), atol=1e-9)

    def test_duplicate_rows_give_unit_similarity(self):
        L = cosine_kernel(E1_E1_E2, np.arange(3))
        np.testing.assert_allclose(L[0, 1], 1.0, atol=1e-9)

    def test_unit_diagonal(self, rng):
        E = rng.standard_normal((10, 6))
        L = cosine_kernel(E, np.arange(10))
        np.testing.assert_allclose(np.diag(L), 1.0, atol=1e-6)

    def test_matches_naive_pair_loop(self, rng):
        E = rng.standard_normal((8, 5))
        pool = np.array([0, 2, 3, 7])
        np.testing.assert_allclose(
            cosine_kernel(E, pool), pairwise_cosine_naive(E, pool), atol=1e-10
        )

    def test_exactly_symmetric(self, rng):
        # the kernel relies on the BLAS rank-k path being bitwise symmetric;
        # if a numpy upgrade breaks that, this must fail loudly
        for shape in [(6, 4), (50, 16), (300, 64)]:
            E = rng.standard_normal(shape)
            L = cosine_kernel(E, np.arange(shape[0]))
            assert np.array_equal(L, L.T)

    def test_psd(self, rng):
        for _ in range(20):
            E = rng.standard_normal((int(rng.integers(2, 12)), int(rng.integers(1, 8))))
            L = cosine_kernel(E, np.arange(E.shape[0]))
            assert np.linalg.eigvalsh(L).min() >= -1e-8

    def test_zero_rows_allowed(self):
        E = np.zeros((3, 2))
        E[0] = [1.0, 0.0]
        L = cosine_kernel(E, np.arange(3))
        assert L[1, 1] == 0.0 and L[0, 0] > 0.999

    def test_empty_pool_rejected(self, rng):
        with pytest.raises(InvalidInputError):
            cosine_kernel(rng.standard_normal((4, 3)), np.empty(0, dtype=int))

    def test_pool_validation(self, rng):
        E = rng.standard_normal((4, 3))
        with pytest.raises(InvalidInputError):
            cosine_kernel(E, [0, 0, 1])
        with pytest.raises(InvalidInputError):
            cosine_kernel(E, [2, 1])
        with pytest.raises(InvalidInputError):
            cosine_kernel(E, [0, 4])


class TestDppGreedyMap:
    def test_all_ties_pick_pool_head(self):
        # equal-norm rows make every kernel diagonal bitwise identical, so
        # the first step is an exact tie and must go to the pool's head
        E = 2.0 * np.eye(4)[np.arange(8) % 4]
        pool = np.array([2, 5, 7])
        pick = dpp_greedy_map(E, pool, 1)
        np.testing.assert_array_equal(pick.indices, [2])

    def test_duplicate_degeneracy(self):
        pick = dpp_greedy_map(E1_E1_E2, np.arange(3), 2)
        np.testing.assert_array_equal(pick.indices, [0, 2])
        np.testing.assert_array_equal(pick.pick_order, [0, 2])

    def test_matches_naive_greedy(self, rng):
        for _ in range(60):
            n = int(rng.integers(4, 17))
            k = int(rng.integers(1, min(6, n) + 1))
            d = int(rng.integers(max(k, 4), 13))
            E = rng.standard_normal((n, d))
            fast = dpp_greedy_map(E, np.arange(n), k)
            naive = dpp_greedy_naive(E, np.arange(n), k)
            np.testing.assert_array_equal(fast.pick_order, naive.pick_order)
            np.testing.assert_array_equal(fast.indices, naive.indices)

    def test_gains_non_increasing(self, rng):
        for _ in range(20):
            E = rng.standard_normal((12, 8))
            pick = dpp_greedy_map(E, np.arange(12), 6)
            assert np.all(np.diff(pick.gains) <= 1e-12)

    def test_indices_sorted_within_pool(self, rng):
        E = rng.standard_normal((10, 6))
        pool = np.array([1, 3, 4, 6, 9])
        pick = dpp_greedy_map(E, pool, 3)
        assert np.all(np.diff(pick.indices) > 0)
        assert set(pick.indices).issubset(set(pool.tolist()))
        assert sorted(pick.pick_order.tolist()) == pick.indices.tolist()

    def test_rank_deficient_pool_still_fills_budget(self, rng):
        # with the default jitter the kernel stays PD, so degenerate pools
        # fill through near-zero gains rather than the fallback; either way
        # the exact-budget contract must hold
        E = rng.standard_normal((6, 2))  # kernel rank <= 2
        pick = dpp_greedy_map(E, np.arange(6), 5)
        assert pick.indices.size == 5
        assert len(set(pick.indices.tolist())) == 5

    def test_collapsed_gains_fall_back_by_index(self):
        # jitter=0 lets duplicate residuals collapse to exactly 0
        E = np.array([[1.0, 0.0]] * 6)
        pick = dpp_greedy_map(E, np.arange(6), 5, jitter=0.0)
        assert pick.fallback_count == 4
        np.testing.assert_array_equal(pick.pick_order, [0, 1, 2, 3, 4])
        assert pick.gains.size == 1

    def test_collapsed_gains_fall_back_by_saliency(self):
        E = np.array([[1.0, 0.0]] * 5)  # all duplicates: rank 1
        sal = np.array([0.1, 0.9, 0.3, 0.9, 0.5])
        pick = dpp_greedy_map(E, np.arange(5), 3, saliency=sal, jitter=0.0)
        # first pick is index 0 (all gains tie), the rest fill by
        # descending saliency (ties to the lower index): 1 then 3
        np.testing.assert_array_equal(pick.pick_order, [0, 1, 3])
        assert pick.fallback_count == 2

    def test_k_zero_and_errors(self, rng):
        E = rng.standard_normal((5, 3))
        assert dpp_greedy_map(E, np.arange(5), 0).indices.size == 0
        with pytest.raises(InvalidBudgetError):
            dpp_greedy_map(E, np.arange(5), 6)

    def test_deterministic(self, rng):
        E = rng.standard_normal((14, 7))
        a = dpp_greedy_map(E, np.arange(14), 5)
        b = dpp_greedy_map(E, np.arange(14), 5)
        np.testing.assert_array_equal(a.pick_order, b.pick_order)
        np.testing.assert_array_equal(a.gains, b.gains)


class TestBruteForceMaxLogdet:
    def test_full_pool_forced(self, rng):
        E = rng.standard_normal((5, 4))
        idx, _ = brute_force_max_logdet(E, np.arange(5), 5)
        np.testing.assert_array_equal(idx, np.arange(5))

    def test_orthogonal_ties_lexicographic(self):
        idx, logdet = brute_force_max_logdet(np.eye(4), np.arange(4), 2)
        np.testing.assert_array_equal(idx, [0, 1])
        assert abs(logdet) < 1e-8

    def test_optimum_dominates_greedy(self, rng):
        from adaptok.selection import DEFAULT_JITTER

        for _ in range(20):
            n = int(rng.integers(5, 9))
            k = int(rng.integers(2, 4))
            E = rng.standard_normal((n, 8))
            pool = np.arange(n)
            greedy = dpp_greedy_map(E, pool, k)
            _, opt = brute_force_max_logdet(E, pool, k)
            L = cosine_kernel(E, greedy.indices)
            L[np.diag_indices(k)] += DEFAULT_JITTER
            _, greedy_logdet = np.linalg.slogdet(L)
            assert opt >= greedy_logdet - 1e-9

    def test_enumeration_guard(self, rng):
        E = rng.standard_normal((40, 4))
        with pytest.raises(InstanceTooLargeError):
            brute_force_max_logdet(E, np.arange(40), 8)

    def test_k_zero(self, rng):
        idx, logdet = brute_force_max_logdet(rng.standard_normal((4, 3)), np.arange(4), 0)
        assert idx.size == 0 and logdet == 0.0


class TestFpsSelect:
    def test_full_pool(self, rng):
        E = rng.standard_normal((6, 4))
        pick = fps_select(E, np.arange(6), 6)
        np.testing.assert_array_equal(pick.indices, np.arange(6))

    def test_planar_angles(self):
        # unit vectors at 0, 90, 180 degrees; start at index 0
        E = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
        pick = fps_select(E, np.arange(3), 3)
        np.testing.assert_array_equal(pick.pick_order, [0, 2, 1])
        np.testing.assert_allclose(pick.gains[1:], [2.0, 1.0], atol=1e-9)

    def test_duplicate_of_start_picked_last(self):
        pick = fps_select(E1_E1_E2, np.arange(3), 2)
        np.testing.assert_array_equal(pick.indices, [0, 2])

    def test_naive_maxmin_verification(self, rng):
        for _ in range(30):
            n = int(rng.integers(3, 12))
            d = int(rng.integers(2, 6))
            E = rng.standard_normal((n, d))
            k = int(rng.integers(1, n + 1))
            pick = fps_select(E, np.arange(n), k)
            assert verify_fps_order(E, np.arange(n), pick.pick_order)

    def test_max_saliency_start(self):
        E = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
        sal = np.array([0.1, 0.9, 0.2])
        pick = fps_select(E, np.arange(3), 2, start="max_saliency", saliency=sal)
        assert pick.pick_order[0] == 1

    def test_max_saliency_needs_vector(self, rng):
        with pytest.raises(InvalidInputError):
            fps_select(rng.standard_normal((3, 2)), np.arange(3), 1, start="max_saliency")

    def test_errors(self, rng):
        E = rng.standard_normal((4, 2))
        with pytest.raises(InvalidBudgetError):
            fps_select(E, np.arange(4), 5)
        with pytest.raises(InvalidInputError):
            fps_select(E, np.arange(4), 1, start="random")


class TestFacilityLocationSelect:
    def test_hand_example_k1(self):
        pick = facility_location_select(E1_E1_E2, np.arange(3), 1)
        np.testing.assert_array_equal(pick.indices, [0])
        np.testing.assert_allclose(pick.gains, [2.5], atol=1e-9)
        np.testing.assert_allclose(
            facility_value(E1_E1_E2, np.arange(3), [0]), 2.5, atol=1e-9
        )

    def test_full_pool_covers_everything(self, rng):
        E = rng.standard_normal((5, 3))
        pick = facility_location_select(E, np.arange(5), 5)
        np.testing.assert_array_equal(pick.indices, np.arange(5))
        np.testing.assert_allclose(pick.gains.sum(), 5.0, atol=1e-6)

    def test_greedy_matches_naive_objective(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 9))
            E = rng.standard_normal((n, 4))
            k = int(rng.integers(1, n + 1))
            pick = facility_location_select(E, np.arange(n), k)
            np.testing.assert_allclose(
                pick.gains.sum(),
                facility_value(E, np.arange(n), pick.indices),
                atol=1e-8,
            )

    def test_submodular_guarantee(self, rng):
        bound = 1.0 - 1.0 / np.e
        for _ in range(20):
            n = int(rng.integers(3, 9))
            k = int(rng.integers(1, 4))
            if k > n:
                continue
            E = rng.standard_normal((n, 4))
            pick = facility_location_select(E, np.arange(n), k)
            opt = facility_optimum(E, np.arange(n), k)
            assert pick.gains.sum() >= bound * opt - 1e-9

    def test_errors(self, rng):
        with pytest.raises(InvalidBudgetError):
            facility_location_select(rng.standard_normal((3, 2)), np.arange(3), 4)
