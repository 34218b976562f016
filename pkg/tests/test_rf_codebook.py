"""
Tests for RF codebooks and selection enumeration
"""
from math import comb

import numpy as np
import pytest

from app.domain.enums import CodebookKind
from app.domain.exceptions import DegenerateCodebookError, DimensionError, PreconditionError
from app.domain.precoding import RfCodebook
from app.services.channel_service import gen_geometric, steering_covariance, ula_steering
from app.services.rf_codebook import (
    dft_codebook,
    eigen_codebook,
    enumerate_selections,
    make_selection,
    selection_count,
    steering_codebook,
    uniform_steering_codebook,
    user_steering_codebook,
)
from tests.helpers import random_channels


def assert_constant_modulus(codebook):
    assert np.allclose(np.abs(codebook.columns), 1 / np.sqrt(codebook.num_antennas), atol=1e-12)


class TestDft:
    def test_unitary(self):
        codebook = dft_codebook(6)
        assert codebook.kind == CodebookKind.DFT
        assert np.allclose(codebook.columns.conj().T @ codebook.columns, np.eye(6))
        assert_constant_modulus(codebook)

    def test_first_column_is_flat(self):
        assert np.allclose(dft_codebook(4).columns[:, 0], 0.5)

    def test_invalid_size(self):
        with pytest.raises(DimensionError):
            dft_codebook(0)


class TestSteering:
    def test_columns_are_steering_vectors(self):
        aods = [0.2, 1.0, 2.5]
        codebook = steering_codebook(8, aods)
        for j, phi in enumerate(aods):
            assert np.allclose(codebook.columns[:, j], ula_steering(8, phi))
        assert codebook.is_full_rank

    def test_duplicate_angles_are_degenerate(self):
        with pytest.raises(DegenerateCodebookError):
            steering_codebook(8, [0.3, 0.3])

    def test_mirrored_angles_are_degenerate(self):
        # cos(phi) = cos(2 pi - phi) gives the same array response
        with pytest.raises(DegenerateCodebookError):
            steering_codebook(8, [0.4, 2 * np.pi - 0.4])

    def test_uniform_grid_at_half_wavelength_is_dft(self):
        codebook = uniform_steering_codebook(6, 6)
        dft = dft_codebook(6).columns
        # same set of columns up to permutation and a common phase per column
        correlation = np.abs(codebook.columns.conj().T @ dft)
        assert np.allclose(np.sort(correlation.max(axis=1)), 1.0)
        assert codebook.is_full_rank

    def test_user_steering_codebook_collects_all_paths(self, rng):
        _, steering = gen_geometric(8, 3, [1, 2, 2], rng)
        codebook = user_steering_codebook(steering, 8)
        assert codebook.num_columns == 5
        assert np.allclose(codebook.columns, steering.stacked_steering)


class TestEigen:
    def test_single_path_user_recovers_steering_vector(self, rng):
        _, steering = gen_geometric(10, 2, [1, 1], rng)
        codebook = eigen_codebook([steering_covariance(u) for u in steering.users])
        assert codebook.kind == CodebookKind.EIGEN
        assert codebook.num_columns == 2
        assert_constant_modulus(codebook)
        for k, user in enumerate(steering.users):
            a = user.steering_matrix[:, 0]
            assert abs(np.vdot(a, codebook.columns[:, k])) == pytest.approx(1.0)

    def test_first_entry_is_real_positive(self, rng):
        _, steering = gen_geometric(6, 1, [3], rng)
        column = eigen_codebook([steering_covariance(steering.users[0])]).columns[:, 0]
        assert column[0].real > 0
        assert column[0].imag == pytest.approx(0.0, abs=1e-12)

    def test_mismatched_sizes(self):
        with pytest.raises(DimensionError):
            eigen_codebook([np.eye(4), np.eye(5)])

    def test_identity_covariance_is_deterministic(self):
        first = eigen_codebook([np.eye(5)])
        second = eigen_codebook([np.eye(5)])
        assert np.allclose(first.columns[:, 0], np.ones(5) / np.sqrt(5))
        assert np.array_equal(first.columns, second.columns)

    def test_random_covariance_is_constant_modulus(self, rng):
        a = random_channels(rng, 7, 7)
        codebook = eigen_codebook([a @ a.conj().T])
        assert np.allclose(np.abs(codebook.columns), 1 / np.sqrt(7), atol=1e-12)

    def test_coincident_users_are_degenerate(self):
        covariance = np.outer(ula_steering(6, 0.7), ula_steering(6, 0.7).conj())
        with pytest.raises(DegenerateCodebookError):
            eigen_codebook([covariance, covariance])


class TestSelections:
    @pytest.mark.parametrize("c,n,expected", [(6, 2, 15), (8, 3, 56), (4, 4, 1), (5, 1, 5)])
    def test_counts(self, c, n, expected):
        assert selection_count(c, n) == expected
        assert len(list(enumerate_selections(dft_codebook(c), n))) == expected

    def test_counts_match_binomial_up_to_twelve_columns(self):
        for c in range(1, 13):
            codebook = dft_codebook(c)
            for n in range(1, c + 1):
                assert selection_count(c, n) == comb(c, n)
                assert sum(1 for _ in enumerate_selections(codebook, n)) == comb(c, n)

    def test_lexicographic_order(self):
        indices = [s.indices for s in enumerate_selections(dft_codebook(4), 2)]
        assert indices == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

    def test_selection_columns(self):
        codebook = dft_codebook(5)
        selection = make_selection(codebook, [1, 3])
        assert selection.num_rf_chains == 2
        assert np.array_equal(selection.f_rf, codebook.columns[:, [1, 3]])

    @pytest.mark.parametrize("indices", [[2, 1], [1, 1], [0, 9]])
    def test_invalid_selection(self, indices):
        with pytest.raises(DimensionError):
            make_selection(dft_codebook(5), indices)

    @pytest.mark.parametrize("n", [0, 7])
    def test_invalid_chain_count_raises_eagerly(self, n):
        with pytest.raises(DimensionError):
            enumerate_selections(dft_codebook(6), n)

    def test_codebook_rejects_non_constant_modulus(self):
        with pytest.raises(PreconditionError):
            RfCodebook(columns=np.eye(3, dtype=complex), kind=CodebookKind.DFT)
