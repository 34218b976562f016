"""
Tests for the Monte Carlo harness
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.domain.enums import ChannelKind, CodebookKind, Method
from app.domain.exceptions import ConfigFileError, EmptyInputError
from app.domain.models import ExperimentConfig, TrialRecord
from app.services.experiment_service import (
    ExperimentService,
    decile_displacement,
    snr_to_power,
    summarize,
    trial_rng,
)
from app.services.preset_service import load_preset, resolve_config


def small_config(**overrides):
    values = dict(
        name="unit",
        M=4,
        N=2,
        K=2,
        methods=["digital_full", "digital_subset", "hybrid_exhaustive", "hybrid_algorithm1"],
        I=1,
        snr_grid_db=[0, 10],
        trials=2,
        n_candidates=50,
        seed=7,
    )
    values.update(overrides)
    return ExperimentConfig(**values)


@pytest.fixture
def experiments(settings):
    return ExperimentService(settings=settings, workers=1)


class TestConfig:
    def test_alias_and_defaults(self):
        config = small_config()
        assert config.top_i == 1
        assert config.channel_kind == ChannelKind.RAYLEIGH
        assert config.codebook_kind == CodebookKind.DFT
        assert config.exhaustive_size == 6

    @pytest.mark.parametrize("overrides", [
        {"N": 5},
        {"K": 5},
        {"I": 7},
        {"trials": 0},
        {"methods": []},
        {"methods": ["aod_aware"]},
        {"codebook_kind": "eigen"},
        {"path_counts": [1, 1]},
        {"channel_kind": "geometric", "path_counts": [1]},
    ])
    def test_invalid(self, overrides):
        with pytest.raises(ValidationError):
            small_config(**overrides)

    def test_geometric_defaults_to_single_path(self):
        config = small_config(channel_kind="geometric", methods=["aod_aware"])
        assert config.path_counts == [1, 1]

    def test_aod_aware_needs_enough_antennas(self):
        with pytest.raises(ValidationError):
            small_config(channel_kind="geometric", path_counts=[3, 2], methods=["aod_aware"])

    def test_steering_codebook_size_on_geometric(self):
        config = small_config(M=6, channel_kind="geometric", path_counts=[2, 2], codebook_kind="steering")
        assert config.codebook_size == 4
        assert config.exhaustive_size == 6

    def test_duplicate_methods_collapse(self):
        config = small_config(methods=["digital_full", "digital_full"])
        assert config.methods == [Method.DIGITAL_FULL]


class TestPresets:
    def test_fig1a(self):
        config = resolve_config(preset="fig1a")
        assert (config.M, config.K, config.N, config.top_i) == (6, 2, 2, 1)
        assert config.exhaustive_size == 15
        assert config.trials == 1000

    def test_fig1b(self):
        config = resolve_config(preset="fig1b")
        assert (config.M, config.K, config.N, config.top_i) == (8, 3, 3, 4)
        assert config.exhaustive_size == 56
        assert config.snr_grid_db == [10.0]

    def test_fig1c(self):
        config = resolve_config(preset="fig1c")
        assert config.channel_kind == ChannelKind.GEOMETRIC
        assert config.path_counts == [1, 1, 1]
        assert Method.AOD_AWARE in config.methods

    def test_smoke_is_small(self):
        assert load_preset("smoke")["trials"] == 100

    def test_overrides_win(self):
        config = resolve_config(preset="fig1a", overrides={"trials": 3, "seed": None})
        assert config.trials == 3
        assert config.seed == load_preset("fig1a")["seed"]

    def test_unknown_preset(self):
        with pytest.raises(ConfigFileError):
            load_preset("no-such-preset")

    @pytest.mark.parametrize("content", ["{not json", "[1, 2]"])
    def test_unreadable_config_file(self, tmp_path, content):
        path = tmp_path / "experiment.json"
        path.write_text(content)
        with pytest.raises(ConfigFileError) as exc:
            resolve_config(config_path=path)
        assert exc.value.path == str(path)


class TestRunExperiment:
    def test_record_layout(self, experiments):
        config = small_config()
        records = experiments.run_experiment(config)
        assert len(records) == config.trials * len(config.methods) * len(config.snr_grid_db)
        keys = [(r.trial, config.methods.index(r.method), r.snr_db) for r in records]
        assert keys == sorted(keys)
        for r in records:
            assert r.rate_bps_hz == pytest.approx(math.log2(1 + r.t_achieved), abs=1e-9)
            assert not r.failed

    def test_deterministic(self, experiments):
        config = small_config(trials=1)
        first = experiments.run_experiment(config)
        second = experiments.run_experiment(config)
        assert [(r.method, r.snr_db, r.t_achieved) for r in first] == [
            (r.method, r.snr_db, r.t_achieved) for r in second
        ]

    def test_single_user_digital_rate(self, experiments):
        config = small_config(K=1, methods=["digital_full"], snr_grid_db=[0, 10, 20])
        records = experiments.run_experiment(config)
        for r in records:
            channels, _ = experiments.draw_channels(config, r.trial)
            expected = math.log2(1 + snr_to_power(r.snr_db) * channels.user_gains[0])
            assert r.rate_bps_hz == pytest.approx(expected, rel=1e-6)

    def test_power_scaling_across_snr(self, experiments):
        records = experiments.run_experiment(small_config(trials=1, methods=["hybrid_algorithm1"]))
        low, high = records
        assert high.t_achieved == pytest.approx(10.0 * low.t_achieved, rel=1e-12)

    def test_relaxation_dominates_every_record(self, experiments):
        records = experiments.run_experiment(small_config(K=3, M=5, N=3))
        for r in records:
            assert r.t_bound is not None
            assert r.t_achieved <= r.t_bound * (1 + 1e-6)

    def test_ordering_on_each_realization(self, experiments):
        config = small_config(trials=3, snr_grid_db=[10])
        records = experiments.run_experiment(config)
        for trial in range(config.trials):
            by_method = {r.method: r for r in records if r.trial == trial}
            digital_bound = by_method[Method.DIGITAL_FULL].t_bound
            exhaustive = by_method[Method.HYBRID_EXHAUSTIVE].rate_bps_hz
            single = by_method[Method.HYBRID_ALGORITHM1].rate_bps_hz
            assert math.log2(1 + digital_bound) >= exhaustive - 1e-9
            assert exhaustive >= single - 0.02

    def test_full_subset_reproduces_digital(self, experiments):
        config = small_config(N=4, methods=["digital_full", "digital_subset"])
        records = experiments.run_experiment(config)
        full = [r.t_achieved for r in records if r.method == Method.DIGITAL_FULL]
        subset = [r.t_achieved for r in records if r.method == Method.DIGITAL_SUBSET]
        assert full == subset

    def test_solve_counts(self, experiments):
        records = experiments.run_experiment(small_config(trials=1, I=3))
        counts = {r.method: r.solve_count for r in records}
        assert counts[Method.HYBRID_EXHAUSTIVE] == 6
        assert counts[Method.HYBRID_ALGORITHM1] == 3
        assert counts[Method.DIGITAL_FULL] == 1

    def test_geometric_methods(self, experiments):
        config = small_config(
            M=8, N=2, channel_kind="geometric", path_counts=[1, 1],
            methods=["digital_full", "aod_aware", "hybrid_algorithm1"], codebook_kind="eigen",
        )
        records = experiments.run_experiment(config)
        assert not any(r.failed for r in records)
        for trial in range(config.trials):
            digital = next(r for r in records if r.trial == trial and r.method == Method.DIGITAL_FULL)
            aod = next(r for r in records if r.trial == trial and r.method == Method.AOD_AWARE)
            assert abs(aod.t_achieved - digital.t_achieved) <= 0.02 * digital.t_achieved

    def test_aod_aware_on_ill_conditioned_paths(self, experiments):
        # trial 42 draws path steering vectors with singular values down to ~1e-6 of the largest
        config = small_config(
            M=10, K=2, N=4, channel_kind="geometric", path_counts=[2, 2],
            methods=["digital_full", "aod_aware"], trials=50, n_candidates=1000, snr_grid_db=[0, 10, 20],
        )
        records = experiments.run_trial(config, 42)
        assert not any(r.failed for r in records)
        for snr in config.snr_grid_db:
            digital = next(r for r in records if r.snr_db == snr and r.method == Method.DIGITAL_FULL)
            aod = next(r for r in records if r.snr_db == snr and r.method == Method.AOD_AWARE)
            assert abs(aod.t_achieved - digital.t_achieved) <= 0.02 * digital.t_achieved

    def test_worker_count_does_not_change_results(self, settings):
        config = small_config(trials=3)
        serial = ExperimentService(settings=settings, workers=1).run_experiment(config)
        pooled = ExperimentService(settings=settings, workers=2).run_experiment(config)
        assert [r.model_dump(exclude={"wall_time_s"}) for r in serial] == [
            r.model_dump(exclude={"wall_time_s"}) for r in pooled
        ]

    def test_trial_streams_differ(self):
        a = trial_rng(1, 0, 0).standard_normal(4)
        b = trial_rng(1, 1, 0).standard_normal(4)
        c = trial_rng(1, 0, 1).standard_normal(4)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_failures_are_recorded(self, experiments, monkeypatch):
        from app.domain.exceptions import SolverFailureError
        from app.services.hybrid_search import HybridPrecodingService

        def fail(*args, **kwargs):
            raise SolverFailureError(solver="CLARABEL", status="infeasible")

        monkeypatch.setattr(HybridPrecodingService, "digital_precoder", fail)
        records = experiments.run_experiment(small_config(trials=1, methods=["digital_full", "hybrid_algorithm1"]))
        failed = [r for r in records if r.failed]
        assert {r.method for r in failed} == {Method.DIGITAL_FULL}
        assert all(r.t_achieved == 0.0 and r.rate_bps_hz == 0.0 for r in failed)
        assert "infeasible" in failed[0].error


class TestSummarize:
    def record(self, method, t, trial=0, snr=10.0, error=None):
        return TrialRecord.from_outcome(
            trial=trial, method=method, snr_db=snr, t_achieved=t, wall_time_s=0.1, solve_count=1, error=error
        )

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            summarize([])

    def test_single_record_is_unit_step(self):
        summary = summarize([self.record(Method.DIGITAL_FULL, 3.0)], cdf_grid_points=11)
        row = summary.rows[0]
        assert row.mean_rate == pytest.approx(2.0)
        probabilities = [p.probability for p in row.cdf]
        assert probabilities[-1] == 1.0
        assert all(p == 0.0 for p in probabilities[:-1])

    def test_identical_records_identical_rows(self):
        records = []
        for trial, t in enumerate([1.0, 3.0, 7.0]):
            records.append(self.record(Method.HYBRID_EXHAUSTIVE, t, trial))
            records.append(self.record(Method.HYBRID_ALGORITHM1, t, trial))
        summary = summarize(records)
        a = summary.row(Method.HYBRID_EXHAUSTIVE, 10.0).model_dump(exclude={"method"})
        b = summary.row(Method.HYBRID_ALGORITHM1, 10.0).model_dump(exclude={"method"})
        assert a == b
        assert decile_displacement(summary, Method.HYBRID_EXHAUSTIVE, Method.HYBRID_ALGORITHM1, 10.0) == 0.0

    def test_stable_ordering(self):
        records = [
            self.record(Method.HYBRID_ALGORITHM1, 1.0, snr=10.0),
            self.record(Method.HYBRID_ALGORITHM1, 1.0, snr=0.0),
            self.record(Method.DIGITAL_FULL, 1.0, snr=0.0),
        ]
        summary = summarize(records)
        assert [(r.method, r.snr_db) for r in summary.rows] == [
            (Method.HYBRID_ALGORITHM1, 0.0),
            (Method.HYBRID_ALGORITHM1, 10.0),
            (Method.DIGITAL_FULL, 0.0),
        ]

    def test_failures_excluded(self):
        records = [
            self.record(Method.DIGITAL_FULL, 3.0, trial=0),
            self.record(Method.DIGITAL_FULL, 0.0, trial=1, error="solver failed"),
        ]
        row = summarize(records).rows[0]
        assert row.trials == 1
        assert row.failures == 1
        assert row.mean_rate == pytest.approx(2.0)

    def test_cdf_is_monotone(self, experiments):
        summary = summarize(experiments.run_experiment(small_config(trials=4)))
        for row in summary.rows:
            probabilities = [p.probability for p in row.cdf]
            assert probabilities == sorted(probabilities)
            assert probabilities[-1] == 1.0


@pytest.mark.slow
class TestPublishedClaims:
    """Reduced-size reproductions of the evaluation claims (minutes each)"""

    def test_algorithm1_near_exhaustive_and_beats_subset(self, experiments):
        config = small_config(
            M=6, N=2, K=2, I=1, trials=500, n_candidates=1000, snr_grid_db=[0, 5, 10, 15], seed=1
        )
        summary = summarize(experiments.run_experiment(config))
        for snr in config.snr_grid_db:
            single = summary.row(Method.HYBRID_ALGORITHM1, snr).mean_rate
            exhaustive = summary.row(Method.HYBRID_EXHAUSTIVE, snr).mean_rate
            subset = summary.row(Method.DIGITAL_SUBSET, snr).mean_rate
            assert abs(exhaustive - single) <= 0.05
            if snr >= 5:
                assert 0.6 <= single - subset <= 1.4

    def test_top_four_cdf_matches_exhaustive(self, experiments):
        config = small_config(
            M=8, N=3, K=3, I=4, trials=300, n_candidates=1000, snr_grid_db=[10], seed=2,
            methods=["hybrid_exhaustive", "hybrid_algorithm1"],
        )
        summary = summarize(experiments.run_experiment(config))
        assert decile_displacement(summary, Method.HYBRID_EXHAUSTIVE, Method.HYBRID_ALGORITHM1, 10.0) <= 0.05

    @pytest.mark.parametrize("path_counts,trials", [([1, 1, 1], 100), ([2, 2], 50)])
    def test_aod_aware_matches_digital(self, experiments, path_counts, trials):
        config = small_config(
            M=10, K=len(path_counts), N=sum(path_counts), channel_kind="geometric", path_counts=path_counts,
            methods=["digital_full", "aod_aware"], trials=trials, n_candidates=1000, snr_grid_db=[0, 10, 20],
        )
        records = experiments.run_experiment(config)
        for trial in range(trials):
            digital = next(r for r in records if r.trial == trial and r.method == Method.DIGITAL_FULL)
            aod = next(r for r in records if r.trial == trial and r.method == Method.AOD_AWARE)
            assert abs(aod.t_achieved - digital.t_achieved) <= 0.02 * digital.t_achieved
        summary = summarize(records)
        for snr in config.snr_grid_db:
            gap = summary.row(Method.DIGITAL_FULL, snr).mean_rate - summary.row(Method.AOD_AWARE, snr).mean_rate
            assert abs(gap) <= 0.05
