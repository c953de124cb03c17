"""Timing harness: runs the pipeline over (N, d, T) grids and reports
per-phase latency percentiles."""

import time

import numpy as np

from .budget import CompressConfig
from .pipeline import compress
from .synth import subseed_rng, synth_tokens

PHASES = ("entropy", "allocation", "stage1", "stage2")


def _percentiles(values: list[float]) -> dict[str, float]:
    arr = np.asarray(values)
    return {
        "p50_us": float(np.percentile(arr, 50)),
        "p90_us": float(np.percentile(arr, 90)),
        "max_us": float(arr.max()),
    }


def run_bench(
    grid: list[tuple[int, int, int]],
    repeats: int = 5,
    seed: int = 0,
    mu: float = 0.42,
    tau: float = 0.02,
    diversity_method: str = "dpp",
) -> dict:
    """Time ``compress`` over each (n_tokens, dim, budget) configuration.

    Each configuration gets one untimed warmup, then ``repeats`` timed runs
    on per-repeat sub-seeded data.  K-directions is varied per repeat so the
    timings cover both saliency- and coverage-heavy splits.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    report = {"seed": int(seed), "repeats": int(repeats), "configs": []}
    for cfg_idx, (n, d, t) in enumerate(grid):
        config = CompressConfig(
            total_budget=t, mu=mu, tau=tau, diversity_method=diversity_method
        )
        phase_samples: dict[str, list[float]] = {p: [] for p in PHASES}
        totals: list[float] = []
        sum_vs_total: list[float] = []

        for rep in range(-1, repeats):
            rng = subseed_rng(seed, cfg_idx * 10_000 + rep + 1)
            k = int(rng.integers(1, min(n, d) + 1))
            tokens, saliency = synth_tokens(n, d, k, 1e-3, rng.integers(2**31))
            t0 = time.perf_counter_ns()
            result = compress(tokens, saliency, config)
            elapsed_us = (time.perf_counter_ns() - t0) / 1e3
            if rep < 0:
                continue  # warmup
            totals.append(elapsed_us)
            for p in PHASES:
                phase_samples[p].append(result.timings_us[p])
            sum_vs_total.append(sum(result.timings_us[p] for p in PHASES) / elapsed_us)

        entry = {
            "n_tokens": n,
            "dim": d,
            "budget": t,
            "total": _percentiles(totals),
            "phases": {p: _percentiles(phase_samples[p]) for p in PHASES},
            "phase_sum_over_total_max": float(max(sum_vs_total)),
        }
        report["configs"].append(entry)
    return report
