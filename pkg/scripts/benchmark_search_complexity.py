#!/usr/bin/env python3
"""
Benchmark the RF selection search: Algorithm 1 for several I against exhaustive search.

The complexity model counts baseband solves (I per realization for Algorithm 1,
C choose N for exhaustive search); wall-clock time is reported next to it.

Usage:
    source venv/bin/activate
    python scripts/benchmark_search_complexity.py --preset fig1b --trials 20
"""

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from datetime import datetime
from pathlib import Path
from typing import List

import numpy as np

# Add the app to the path
sys.path.insert(0, str(Path(__file__).parent.parent))

# Load environment variables from .env file
from dotenv import load_dotenv
load_dotenv()

from app.core.config import get_settings  # noqa: E402
from app.core.logging_config import setup_logging  # noqa: E402
from app.domain.exceptions import PrecodingError  # noqa: E402
from app.services.experiment_service import (  # noqa: E402
    STREAM_HYBRID,
    ExperimentService,
    build_codebook,
    snr_to_power,
    trial_rng,
)
from app.services.hybrid_search import HybridPrecodingService  # noqa: E402
from app.services.maxmin_solver import MaxMinSolver  # noqa: E402
from app.services.preset_service import available_presets, resolve_config  # noqa: E402

settings = get_settings()


@dataclass
class SearchResult:
    """Aggregates of one search variant over all trials"""
    label: str
    top_i: int
    solves_per_trial: float
    seconds_per_trial: float
    mean_rate: float
    failures: int


def benchmark(preset: str, trials: int, top_is: List[int], snr_db: float) -> List[SearchResult]:
    config = resolve_config(preset=preset, overrides={"trials": trials})
    experiments = ExperimentService(settings=settings, workers=1)
    service = HybridPrecodingService(MaxMinSolver(settings=settings, n_candidates=config.n_candidates))
    power = snr_to_power(snr_db)
    total = config.exhaustive_size

    variants = [(f"algorithm1 I={i}", i) for i in top_is if i < total] + [("exhaustive", total)]
    results = []
    for label, top_i in variants:
        solves, seconds, rates, failures = [], [], [], 0
        for trial in range(config.trials):
            channels, steering = experiments.draw_channels(config, trial)
            rng = trial_rng(config.seed, trial, STREAM_HYBRID)
            start = time.time()
            try:
                codebook = build_codebook(config, steering)
                if top_i == total:
                    precoder = service.exhaustive_search(codebook, config.N, channels, power, rng, config.n_candidates)
                else:
                    precoder = service.algorithm1(codebook, config.N, top_i, channels, power, rng, config.n_candidates)
            except PrecodingError as e:
                print(f"  trial {trial}: {e.message}")
                failures += 1
                continue
            seconds.append(time.time() - start)
            solves.append(precoder.solve_count)
            rates.append(np.log2(1.0 + precoder.t_achieved))

        results.append(SearchResult(
            label=label,
            top_i=top_i,
            solves_per_trial=float(np.mean(solves)) if solves else 0.0,
            seconds_per_trial=float(np.mean(seconds)) if seconds else 0.0,
            mean_rate=float(np.mean(rates)) if rates else 0.0,
            failures=failures,
        ))
        print(f"  {label:<20} done")
    return results


def print_summary(results: List[SearchResult]):
    print("\n" + "=" * 80)
    print("SEARCH COMPLEXITY SUMMARY")
    print("=" * 80)
    print(f"\n{'Variant':<20} {'I':>5} {'Solves':>10} {'Time/trial':>12} {'Mean rate':>12} {'Failed':>8}")
    print("-" * 80)
    for r in results:
        print(f"{r.label:<20} {r.top_i:>5} {r.solves_per_trial:>10.1f} {r.seconds_per_trial:>11.3f}s "
              f"{r.mean_rate:>12.4f} {r.failures:>8}")


def main():
    parser = argparse.ArgumentParser(description="RF selection search complexity benchmark")
    parser.add_argument("--preset", choices=available_presets(), default="fig1b")
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--snr", type=float, default=10.0, help="SNR in dB")
    parser.add_argument("--top-i", type=int, nargs="+", default=[1, 2, 4, 8])
    args = parser.parse_args()

    setup_logging()
    print("=" * 80)
    print(f"RF Selection Search Benchmark ({args.preset}, {args.trials} trials, {args.snr:g} dB)")
    print("=" * 80)
    print(f"Started at: {datetime.now().isoformat()}")
    print(f"Solver: {' -> '.join(settings.solver_chain)}")
    print()

    results = benchmark(args.preset, args.trials, args.top_i, args.snr)
    print_summary(results)

    output_dir = Path(__file__).parent.parent / "benchmark_results" / "search_complexity"
    output_dir.mkdir(parents=True, exist_ok=True)
    timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
    json_file = output_dir / f"results_{args.preset}_{timestamp}.json"
    with open(json_file, "w") as f:
        json.dump({"generated_at": timestamp, "results": [asdict(r) for r in results]}, f, indent=2)

    print(f"\nJSON results saved to: {json_file}")


if __name__ == "__main__":
    main()
