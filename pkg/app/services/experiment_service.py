"""
Monte Carlo experiment orchestration.

Every trial draws one channel realization from a seed derived from
(config.seed, trial index) and runs each requested method on it. A method is
solved once per trial at unit power; its max-min SNR scales linearly with the
transmit power, so the records for every SNR point follow from that solve.

Random streams inside a trial (spawn key (trial, stream)):
    0  channel realization
    1  digital solves (digital_full, and the solve step of digital_subset)
    2  antenna subset draw of digital_subset
    3  hybrid searches (exhaustive and Algorithm 1 share it and a solve cache)
    4  AoD-aware baseband solve
"""
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.core.config import Settings, get_settings
from app.core.logging_config import setup_logging
from app.domain.enums import ChannelKind, CodebookKind, Method
from app.domain.exceptions import EmptyInputError, PrecodingError
from app.domain.models import HYBRID_METHODS, CdfPoint, ExperimentConfig, ExperimentSummary, SummaryRow, TrialRecord
from app.domain.precoding import ChannelSet, RfCodebook, SteeringInfo
from app.services.channel_service import gen_geometric, gen_rayleigh, steering_covariance
from app.services.hybrid_search import BasebandCache, HybridPrecodingService
from app.services.maxmin_solver import MaxMinSolver
from app.services.rf_codebook import (
    dft_codebook,
    eigen_codebook,
    uniform_steering_codebook,
    user_steering_codebook,
)

logger = logging.getLogger(__name__)

STREAM_CHANNEL = 0
STREAM_DIGITAL = 1
STREAM_SUBSET = 2
STREAM_HYBRID = 3
STREAM_AOD = 4

DECILES = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


def trial_rng(seed: int, trial: int, stream: int) -> np.random.Generator:
    """Counter-based stream: distinct (trial, stream) pairs never share a seed sequence"""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial, stream)))


def snr_to_power(snr_db: float) -> float:
    """P = 10^(SNR/10) with unit noise variance"""
    return 10.0 ** (snr_db / 10.0)


@dataclass
class MethodOutcome:
    """Unit-power result of one method on one realization"""
    t_achieved: float
    t_bound: Optional[float]
    solve_count: int


def build_codebook(
    config: ExperimentConfig,
    steering: Optional[SteeringInfo]
) -> RfCodebook:
    """RF codebook for the configured kind on this realization"""
    if config.codebook_kind == CodebookKind.DFT:
        return dft_codebook(config.M)
    if config.codebook_kind == CodebookKind.STEERING:
        if steering is not None:
            return user_steering_codebook(steering, config.M)
        return uniform_steering_codebook(config.M, config.M, config.spacing_ratio)
    return eigen_codebook([steering_covariance(user) for user in steering.users])


class ExperimentService:
    """Runs Monte Carlo precoding experiments"""

    def __init__(self, settings: Optional[Settings] = None, workers: Optional[int] = None):
        """
        Args:
            settings: Application settings (solver configuration, worker count)
            workers: Number of worker processes; overrides settings.WORKERS
        """
        self.settings = settings or get_settings()
        self.workers = workers if workers is not None else self.settings.worker_count

    def _hybrid_service(self, config: ExperimentConfig) -> HybridPrecodingService:
        solver = MaxMinSolver(settings=self.settings, n_candidates=config.n_candidates)
        return HybridPrecodingService(solver)

    # ============= Trials =============

    def draw_channels(self, config: ExperimentConfig, trial: int) -> Tuple[ChannelSet, Optional[SteeringInfo]]:
        rng = trial_rng(config.seed, trial, STREAM_CHANNEL)
        if config.channel_kind == ChannelKind.GEOMETRIC:
            return gen_geometric(config.M, config.K, config.path_counts, rng, config.spacing_ratio)
        return gen_rayleigh(config.M, config.K, rng), None

    def _run_method(
        self,
        method: Method,
        config: ExperimentConfig,
        trial: int,
        service: HybridPrecodingService,
        channels: ChannelSet,
        steering: Optional[SteeringInfo],
        codebook: Optional[RfCodebook],
        cache: BasebandCache
    ) -> MethodOutcome:
        if method == Method.DIGITAL_FULL:
            solution = service.digital_precoder(
                channels, 1.0, trial_rng(config.seed, trial, STREAM_DIGITAL), config.n_candidates
            )
            return MethodOutcome(solution.t_achieved, solution.t_sdp, 1)

        if method == Method.DIGITAL_SUBSET:
            solution = service.random_subset_digital(
                channels,
                config.N,
                1.0,
                trial_rng(config.seed, trial, STREAM_SUBSET),
                config.n_candidates,
                solve_rng=trial_rng(config.seed, trial, STREAM_DIGITAL),
            )
            return MethodOutcome(solution.t_achieved, solution.t_sdp, 1)

        if method == Method.HYBRID_EXHAUSTIVE:
            precoder = service.exhaustive_search(
                codebook, config.N, channels, 1.0,
                trial_rng(config.seed, trial, STREAM_HYBRID), config.n_candidates, cache,
            )
            return MethodOutcome(precoder.t_achieved, precoder.t_sdp, precoder.solve_count)

        if method == Method.HYBRID_ALGORITHM1:
            precoder = service.algorithm1(
                codebook, config.N, config.top_i, channels, 1.0,
                trial_rng(config.seed, trial, STREAM_HYBRID), config.n_candidates, cache,
            )
            return MethodOutcome(precoder.t_achieved, precoder.t_sdp, precoder.solve_count)

        precoder = service.aod_aware_precoder(
            steering, channels, 1.0, trial_rng(config.seed, trial, STREAM_AOD), config.n_candidates
        )
        return MethodOutcome(precoder.t_achieved, precoder.t_sdp, precoder.solve_count)

    def run_trial(self, config: ExperimentConfig, trial: int) -> List[TrialRecord]:
        """All methods on one channel realization, every SNR point"""
        channels, steering = self.draw_channels(config, trial)
        service = self._hybrid_service(config)
        cache: BasebandCache = {}

        codebook = None
        codebook_error = None
        if any(m in config.methods for m in HYBRID_METHODS):
            try:
                codebook = build_codebook(config, steering)
            except PrecodingError as e:
                codebook_error = e

        records = []
        for method in config.methods:
            start = time.perf_counter()
            error = None
            try:
                if codebook_error is not None and method in HYBRID_METHODS:
                    raise codebook_error
                outcome = self._run_method(method, config, trial, service, channels, steering, codebook, cache)
            except PrecodingError as e:
                logger.warning(f"Trial {trial}: {method.value} failed: {e.message}")
                outcome = MethodOutcome(0.0, None, 0)
                error = e.message
            elapsed = time.perf_counter() - start

            for snr_db in config.snr_grid_db:
                power = snr_to_power(snr_db)
                records.append(TrialRecord.from_outcome(
                    trial=trial,
                    method=method,
                    snr_db=snr_db,
                    t_achieved=power * outcome.t_achieved,
                    wall_time_s=elapsed,
                    solve_count=outcome.solve_count,
                    t_bound=power * outcome.t_bound if outcome.t_bound is not None else None,
                    error=error,
                ))
        return records

    def run_experiment(self, config: ExperimentConfig) -> List[TrialRecord]:
        """
        Run every trial of the experiment.

        Results are identical for any worker count: each trial owns its seeds and
        records are re-sorted by (trial, method order, SNR order).
        """
        logger.info(
            f"Running '{config.name}': M={config.M} N={config.N} K={config.K} "
            f"{config.channel_kind.value}/{config.codebook_kind.value}, {config.trials} trials, "
            f"methods={[m.value for m in config.methods]}, workers={self.workers}"
        )
        started = time.perf_counter()
        report_every = max(1, config.trials // 10)

        records: List[TrialRecord] = []
        if self.workers <= 1 or config.trials == 1:
            for trial in range(config.trials):
                records.extend(self.run_trial(config, trial))
                if (trial + 1) % report_every == 0:
                    logger.info(f"Progress: {trial + 1}/{config.trials} trials")
        else:
            payload = config.model_dump(mode="json", by_alias=True)
            settings_payload = self.settings.model_dump()
            with ProcessPoolExecutor(max_workers=self.workers, initializer=setup_logging) as pool:
                futures = [
                    pool.submit(_run_trial_worker, payload, settings_payload, trial)
                    for trial in range(config.trials)
                ]
                for done, future in enumerate(futures, start=1):
                    records.extend(TrialRecord(**r) for r in future.result())
                    if done % report_every == 0:
                        logger.info(f"Progress: {done}/{config.trials} trials")

        method_order = {m: i for i, m in enumerate(config.methods)}
        snr_order = {s: i for i, s in enumerate(config.snr_grid_db)}
        records.sort(key=lambda r: (r.trial, method_order[r.method], snr_order[r.snr_db]))

        failures = sum(1 for r in records if r.failed)
        logger.info(
            f"Finished '{config.name}' in {time.perf_counter() - started:.1f}s: "
            f"{len(records)} records, {failures} failed"
        )
        return records


def _run_trial_worker(config_payload: Dict[str, Any], settings_payload: Dict[str, Any], trial: int) -> List[Dict[str, Any]]:
    """Process-pool entry point; arguments and results are plain data"""
    config = ExperimentConfig(**config_payload)
    service = ExperimentService(settings=Settings(**settings_payload), workers=1)
    return [r.model_dump(mode="json") for r in service.run_trial(config, trial)]


# ============= Summary =============

def summarize(records: Sequence[TrialRecord], cdf_grid_points: int = 101) -> ExperimentSummary:
    """
    Per method x SNR: mean rate, rate deciles and empirical CDF on a uniform rate grid.

    The grid spans [0, largest successful rate]; failed records are counted
    separately and excluded from the statistics.
    """
    if not records:
        raise EmptyInputError()

    df = pd.DataFrame([r.model_dump(mode="json") for r in records])
    ok = df[df["error"].isna()]
    rate_max = float(ok["rate_bps_hz"].max()) if len(ok) else 0.0
    grid = np.linspace(0.0, rate_max, cdf_grid_points)

    method_order = list(dict.fromkeys(df["method"]))
    rows = []
    for method in method_order:
        for snr_db in sorted(df.loc[df["method"] == method, "snr_db"].unique()):
            group = df[(df["method"] == method) & (df["snr_db"] == snr_db)]
            good = group[group["error"].isna()]
            rates = good["rate_bps_hz"].to_numpy(dtype=float)

            if len(rates):
                sorted_rates = np.sort(rates)
                cdf = np.searchsorted(sorted_rates, grid, side="right") / len(rates)
                deciles = np.quantile(rates, DECILES).tolist()
            else:
                cdf = np.array([])
                deciles = []

            rows.append(SummaryRow(
                method=Method(method),
                snr_db=float(snr_db),
                trials=int(len(good)),
                failures=int(len(group) - len(good)),
                mean_rate=float(rates.mean()) if len(rates) else 0.0,
                mean_t=float(good["t_achieved"].mean()) if len(rates) else 0.0,
                mean_solve_count=float(good["solve_count"].mean()) if len(rates) else 0.0,
                mean_wall_time_s=float(good["wall_time_s"].mean()) if len(rates) else 0.0,
                deciles=deciles,
                cdf=[CdfPoint(rate=float(x), probability=float(p)) for x, p in zip(grid[:len(cdf)], cdf)],
            ))

    return ExperimentSummary(rate_grid=grid.tolist(), rows=rows)


def decile_displacement(summary: ExperimentSummary, first: Method, second: Method, snr_db: float) -> float:
    """Largest horizontal gap between two methods' rate CDFs, measured at the deciles"""
    a = summary.row(first, snr_db)
    b = summary.row(second, snr_db)
    if a is None or b is None or not a.deciles or not b.deciles:
        return math.inf
    return float(np.max(np.abs(np.asarray(a.deciles) - np.asarray(b.deciles))))
