"""Command-line interface.

Subcommands: entropy, allocate, compress, compress-fixed, oracle, synth,
bench, flops.  Primary outputs are canonical JSON (byte-identical for
fixed seeds and inputs); errors land on stderr as one JSON line with a
machine-readable category, and the process exits nonzero.
"""

import argparse
import json
import sys

import numpy as np

from .bench import run_bench
from .budget import DEFAULT_TAU, MU_PRESETS, CompressConfig, allocate_budget, resolve_mu
from .costmodel import (
    MODEL_SPECS,
    ModelCostSpec,
    estimate_kv_cache_bytes,
    estimate_prefill_flops,
    flops_reduction,
)
from .errors import AdaptokError
from .io_formats import (
    read_saliency,
    read_tokens,
    selection_result_to_json,
    write_saliency,
    write_selection_result,
    write_tokens,
)
from .pipeline import compress, compress_fixed
from .prominence import attention_entropy, feature_norm_entropy, spectral_entropy
from .selection import (
    DEFAULT_JITTER,
    brute_force_max_logdet,
    cosine_kernel,
    dpp_greedy_map,
    dpp_greedy_naive,
    reduce_head_attention,
)
from .synth import subseed_rng, synth_tokens

_DIVERSITY_FLAGS = {"dpp": "dpp", "fps": "fps", "fl": "facility_location"}
_METRIC_FLAGS = ("spectral", "norm", "attn")


def _emit(doc, out_path: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _entropy_doc(report) -> dict:
    return {
        "metric": report.metric,
        "raw_entropy": report.raw_entropy,
        "normalized_entropy": report.normalized_entropy,
        "normalizer": report.normalizer,
    }


def _add_sigmoid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mu", type=float, default=None, help="sigmoid midpoint (overrides --preset)")
    p.add_argument("--tau", type=float, default=DEFAULT_TAU, help="sigmoid smoothness")
    p.add_argument("--preset", choices=sorted(MU_PRESETS), default=None,
                   help="named mu preset (default clip)")


def _add_compress_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tokens", required=True, help="input PTM1 token file")
    p.add_argument("--saliency", required=True, help="input PSV1 saliency file")
    p.add_argument("--budget", type=int, required=True, help="total token budget T")
    _add_sigmoid_flags(p)
    p.add_argument("--diversity", choices=sorted(_DIVERSITY_FLAGS), default="dpp",
                   help="stage-2 diversity selector")
    p.add_argument("--out", default=None, help="output path (stdout if omitted)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptok",
        description="Entropy-adaptive visual token subset selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="compute an entropy metric on a token file")
    p.add_argument("--tokens", default=None, help="input PTM1 token file")
    p.add_argument("--saliency", default=None, help="input PSV1 saliency file (attn metric)")
    p.add_argument("--metric", choices=_METRIC_FLAGS, default="spectral")
    p.add_argument("--out", default=None)

    p = sub.add_parser("allocate", help="entropy plus budget split, no selection")
    p.add_argument("--tokens", required=True)
    p.add_argument("--budget", type=int, required=True)
    _add_sigmoid_flags(p)
    p.add_argument("--out", default=None)

    p = sub.add_parser("compress", help="full two-stage compression")
    _add_compress_flags(p)

    p = sub.add_parser("compress-fixed", help="compression with a forced t_sal")
    _add_compress_flags(p)
    p.add_argument("--t-sal-fixed", type=int, required=True, help="forced saliency budget")

    p = sub.add_parser("oracle", help="greedy-vs-naive and greedy-vs-exhaustive checks")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--max-n", type=int, default=16)
    p.add_argument("--max-k", type=int, default=6)
    p.add_argument("--seed", type=int, default=7)

    p = sub.add_parser("synth", help="emit synthetic token and saliency files")
    p.add_argument("--tokens", required=True, help="output PTM1 path")
    p.add_argument("--saliency", required=True, help="output PSV1 path")
    p.add_argument("--n", type=int, required=True, help="number of tokens")
    p.add_argument("--d", type=int, required=True, help="feature dimension")
    p.add_argument("--k-directions", type=int, default=1)
    p.add_argument("--noise", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("bench", help="latency percentiles over (N,d,T) grids")
    p.add_argument("--grid", action="append", default=None, metavar="NxDxT",
                   help="configuration like 576x1024x64 (repeatable)")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    _add_sigmoid_flags(p)
    p.add_argument("--diversity", choices=sorted(_DIVERSITY_FLAGS), default="dpp")
    p.add_argument("--out", default=None)

    p = sub.add_parser("flops", help="prefill FLOPs / KV-cache cost model")
    p.add_argument("--seq-visual", type=int, required=True, help="visual tokens in the prefill")
    p.add_argument("--model", choices=sorted(MODEL_SPECS), default="llava-next-7b")
    p.add_argument("--text-tokens", type=int, default=None, help="override prompt length")
    p.add_argument("--baseline-seq", type=int, default=None,
                   help="uncompressed visual length to report the reduction against")
    p.add_argument("--out", default=None)

    return parser


def _cmd_entropy(args) -> int:
    if args.metric == "attn":
        if not args.saliency:
            raise AdaptokError("--saliency is required for --metric attn")
        scores = reduce_head_attention(read_saliency(args.saliency))
        report = attention_entropy(scores)
    else:
        if not args.tokens:
            raise AdaptokError(f"--tokens is required for --metric {args.metric}")
        tokens = read_tokens(args.tokens)
        report = spectral_entropy(tokens) if args.metric == "spectral" else feature_norm_entropy(tokens)
    _emit(_entropy_doc(report), args.out)
    return 0


def _cmd_allocate(args) -> int:
    tokens = read_tokens(args.tokens)
    report = spectral_entropy(tokens)
    config = CompressConfig(
        total_budget=args.budget, mu=resolve_mu(args.preset, args.mu), tau=args.tau
    )
    split = allocate_budget(report.normalized_entropy, config)
    _emit(
        {
            "entropy": _entropy_doc(report),
            "t_sal": split.t_sal,
            "t_cov": split.t_cov,
            "coverage_ratio": split.coverage_ratio,
            "total_budget": config.total_budget,
        },
        args.out,
    )
    return 0


def _run_compress(args, t_sal_fixed: int | None) -> int:
    tokens = read_tokens(args.tokens)
    saliency = reduce_head_attention(read_saliency(args.saliency))
    config = CompressConfig(
        total_budget=args.budget,
        mu=resolve_mu(args.preset, args.mu),
        tau=args.tau,
        diversity_method=_DIVERSITY_FLAGS[args.diversity],
    )
    if t_sal_fixed is None:
        result = compress(tokens, saliency, config)
    else:
        result = compress_fixed(tokens, saliency, t_sal_fixed, config)
    if args.out:
        write_selection_result(result, args.out)
    else:
        sys.stdout.write(selection_result_to_json(result))
    for phase, us in sorted(result.timings_us.items()):
        print(f"timing {phase}={us:.1f}us", file=sys.stderr)
    return 0


def _cmd_oracle(args) -> int:
    trials = int(args.trials)
    mismatches = 0
    optimum_violations = 0
    ratios = []
    for trial in range(trials):
        rng = subseed_rng(args.seed, trial)
        n = int(rng.integers(4, args.max_n + 1))
        k_max = min(args.max_k, n)
        k = int(rng.integers(1, k_max + 1))
        # d >= k keeps the pool full-rank so greedy twins stay comparable
        d = int(rng.integers(max(k, 4), 13))
        tokens = rng.standard_normal((n, d))
        pool = np.arange(n)

        fast = dpp_greedy_map(tokens, pool, k)
        naive = dpp_greedy_naive(tokens, pool, k)
        if not np.array_equal(fast.pick_order, naive.pick_order):
            mismatches += 1
            continue

        _, opt_logdet = brute_force_max_logdet(tokens, pool, k)
        greedy_logdet = _subset_logdet(tokens, fast.indices)
        if greedy_logdet > opt_logdet + 1e-9:
            optimum_violations += 1
        ratios.append(float(np.exp(greedy_logdet - opt_logdet)))

    ratio_min = min(ratios) if ratios else float("nan")
    ratio_median = float(np.median(ratios)) if ratios else float("nan")
    ok = mismatches == 0 and optimum_violations == 0
    print(
        f"oracle trials={trials} index_mismatches={mismatches} "
        f"optimum_violations={optimum_violations} "
        f"ratio_min={ratio_min:.6f} ratio_median={ratio_median:.6f} "
        f"status={'ok' if ok else 'violation'}"
    )
    return 0 if ok else 1


def _subset_logdet(tokens, indices) -> float:
    L = cosine_kernel(tokens, indices)
    L[np.diag_indices(indices.size)] += DEFAULT_JITTER
    sign, logdet = np.linalg.slogdet(L)
    return float(logdet) if sign > 0 else float("-inf")


def _cmd_synth(args) -> int:
    tokens, saliency = synth_tokens(args.n, args.d, args.k_directions, args.noise, args.seed)
    write_tokens(tokens, args.tokens)
    write_saliency(saliency, args.saliency)
    _emit(
        {
            "tokens": args.tokens,
            "saliency": args.saliency,
            "n_tokens": args.n,
            "dim": args.d,
            "k_directions": args.k_directions,
            "noise": args.noise,
            "seed": args.seed,
        },
        None,
    )
    return 0


def _parse_grid(specs: list[str] | None) -> list[tuple[int, int, int]]:
    if not specs:
        return [(576, 1024, 64), (576, 1024, 128)]
    grid = []
    for spec in specs:
        parts = spec.lower().split("x")
        if len(parts) != 3:
            raise AdaptokError(f"--grid expects NxDxT, got {spec!r}")
        n, d, t = (int(p) for p in parts)
        grid.append((n, d, t))
    return grid


def _cmd_bench(args) -> int:
    report = run_bench(
        _parse_grid(args.grid),
        repeats=args.repeats,
        seed=args.seed,
        mu=resolve_mu(args.preset, args.mu),
        tau=args.tau,
        diversity_method=_DIVERSITY_FLAGS[args.diversity],
    )
    _emit(report, args.out)
    return 0


def _cmd_flops(args) -> int:
    spec = MODEL_SPECS[args.model]
    if args.text_tokens is not None:
        spec = ModelCostSpec(
            hidden_dim=spec.hidden_dim,
            n_layers=spec.n_layers,
            intermediate_dim=spec.intermediate_dim,
            n_params=spec.n_params,
            text_tokens=args.text_tokens,
        )
    flops = estimate_prefill_flops(args.seq_visual, spec)
    doc = {
        "model": args.model,
        "seq_visual": args.seq_visual,
        "text_tokens": spec.text_tokens,
        "flops": flops,
        "tflops": flops / 1e12,
        "kv_cache_bytes": estimate_kv_cache_bytes(args.seq_visual, spec),
        "kv_cache_mb": estimate_kv_cache_bytes(args.seq_visual, spec) / 2**20,
    }
    if args.baseline_seq is not None:
        doc["baseline_seq"] = args.baseline_seq
        doc["flops_reduction"] = flops_reduction(args.baseline_seq, args.seq_visual, spec)
    _emit(doc, args.out)
    return 0


_COMMANDS = {
    "entropy": _cmd_entropy,
    "allocate": _cmd_allocate,
    "compress": lambda args: _run_compress(args, None),
    "compress-fixed": lambda args: _run_compress(args, args.t_sal_fixed),
    "oracle": _cmd_oracle,
    "synth": _cmd_synth,
    "bench": _cmd_bench,
    "flops": _cmd_flops,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except AdaptokError as err:
        print(
            json.dumps({"error": {"category": err.category, "message": str(err)}}),
            file=sys.stderr,
        )
        return 1
    except OSError as err:
        print(
            json.dumps({"error": {"category": "io-error", "message": str(err)}}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
