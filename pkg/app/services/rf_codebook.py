"""
Constant-modulus RF codebooks and the enumeration of N-column selections.
"""
import itertools
import logging
from math import comb
from typing import Iterator, Sequence

import numpy as np

from app.domain.enums import CodebookKind
from app.domain.exceptions import DegenerateCodebookError, DimensionError
from app.domain.precoding import RfCodebook, RfSelection, SteeringInfo
from app.services.channel_service import HALF_WAVELENGTH, ula_steering_matrix

logger = logging.getLogger(__name__)


def dft_codebook(num_antennas: int) -> RfCodebook:
    """M-point DFT codebook, entry (m, n) = exp(-j 2 pi m n / M) / sqrt(M)"""
    if num_antennas < 1:
        raise DimensionError(f"DFT codebook needs M >= 1, got {num_antennas}")
    m = np.arange(num_antennas)
    columns = np.exp(-2j * np.pi * np.outer(m, m) / num_antennas) / np.sqrt(num_antennas)
    return RfCodebook(columns=columns, kind=CodebookKind.DFT)


def _checked(columns: np.ndarray, kind: CodebookKind) -> RfCodebook:
    """Codebooks built from angles or covariances must keep full column rank"""
    codebook = RfCodebook(columns=columns, kind=kind)
    expected = min(codebook.num_antennas, codebook.num_columns)
    rank = codebook.rank
    if rank < expected:
        raise DegenerateCodebookError(rank=rank, expected=expected)
    return codebook


def steering_codebook(
    num_antennas: int,
    aods: Sequence[float],
    spacing_ratio: float = HALF_WAVELENGTH
) -> RfCodebook:
    """Column j is the ULA steering vector for aods[j]"""
    if num_antennas < 1 or len(aods) < 1:
        raise DimensionError(f"Steering codebook needs M >= 1 and at least one angle, got M={num_antennas}")
    return _checked(ula_steering_matrix(num_antennas, aods, spacing_ratio), CodebookKind.STEERING)


def uniform_steering_codebook(
    num_antennas: int,
    num_columns: int,
    spacing_ratio: float = HALF_WAVELENGTH
) -> RfCodebook:
    """Steering vectors whose direction cosines are evenly spaced on [-1, 1)"""
    if num_columns < 1:
        raise DimensionError(f"Codebook size must be >= 1, got {num_columns}")
    cosines = -1.0 + 2.0 * np.arange(num_columns) / num_columns
    return steering_codebook(num_antennas, np.arccos(cosines), spacing_ratio)


def user_steering_codebook(steering: SteeringInfo, num_antennas: int) -> RfCodebook:
    """Steering vectors of every path of every user, C = sum(L_k)"""
    return steering_codebook(num_antennas, steering.all_aods, steering.spacing_ratio)


def eigen_codebook(covariances: Sequence[np.ndarray]) -> RfCodebook:
    """
    Dominant eigenvector of each covariance with every entry projected to modulus 1/sqrt(M).

    Eigenvalue ties go to the lowest eigenvector index returned by eigh; the phase is
    fixed so the first significant entry is real positive; zero entries get phase 0.
    Users with coincident dominant directions raise DegenerateCodebookError.
    """
    if len(covariances) < 1:
        raise DimensionError("Eigen codebook needs at least one covariance")

    num_antennas = covariances[0].shape[0]
    columns = []
    for covariance in covariances:
        if covariance.shape != (num_antennas, num_antennas):
            raise DimensionError(f"Covariances must all be {num_antennas}x{num_antennas}")
        eigenvalues, eigenvectors = np.linalg.eigh(0.5 * (covariance + covariance.conj().T))
        order = np.argsort(-eigenvalues, kind="stable")
        dominant = eigenvectors[:, order[0]]

        magnitudes = np.abs(dominant)
        significant = magnitudes > 1e-12 * magnitudes.max()
        pivot = int(np.argmax(significant))
        dominant = dominant * np.exp(-1j * np.angle(dominant[pivot]))

        phases = np.where(significant, np.angle(dominant), 0.0)
        columns.append(np.exp(1j * phases) / np.sqrt(num_antennas))

    return _checked(np.stack(columns, axis=1), CodebookKind.EIGEN)


def selection_count(num_columns: int, num_rf_chains: int) -> int:
    """|C_set| = C choose N"""
    return comb(num_columns, num_rf_chains)


def make_selection(codebook: RfCodebook, indices: Sequence[int]) -> RfSelection:
    indices = tuple(int(i) for i in indices)
    if len(set(indices)) != len(indices) or list(indices) != sorted(indices):
        raise DimensionError(f"Selection indices must be strictly increasing, got {indices}")
    if indices[0] < 0 or indices[-1] >= codebook.num_columns:
        raise DimensionError(f"Selection {indices} outside codebook of {codebook.num_columns} columns")
    return RfSelection(indices=indices, f_rf=codebook.columns[:, list(indices)])


def enumerate_selections(codebook: RfCodebook, num_rf_chains: int) -> Iterator[RfSelection]:
    """All N-column selections in lexicographic index order"""
    if num_rf_chains < 1 or num_rf_chains > codebook.num_columns:
        raise DimensionError(
            f"Need 1 <= N <= C, got N={num_rf_chains} for C={codebook.num_columns}"
        )
    return (
        RfSelection(indices=indices, f_rf=codebook.columns[:, list(indices)])
        for indices in itertools.combinations(range(codebook.num_columns), num_rf_chains)
    )
