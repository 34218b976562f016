"""
Channel generation: i.i.d. Rayleigh and finite-scattering ULA channels.

All generators take an explicit numpy Generator so a trial's realization is
fully determined by its seed. Noise standard deviations are fixed at 1, so the
returned h_bar equals h and the SNR is set by the transmit power alone.
"""
import logging
from typing import Sequence, Tuple

import numpy as np

from app.domain.exceptions import DimensionError
from app.domain.precoding import ChannelSet, SteeringInfo, UserPaths

logger = logging.getLogger(__name__)

HALF_WAVELENGTH = 0.5


def complex_gaussian(rng: np.random.Generator, size) -> np.ndarray:
    """CN(0, 1) samples: independent N(0, 1/2) real and imaginary parts"""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def ula_steering(num_antennas: int, phi: float, spacing_ratio: float = HALF_WAVELENGTH) -> np.ndarray:
    """
    ULA array response a(phi), m-th entry exp(-j 2 pi (D/lambda) m cos(phi)) / sqrt(M).

    Args:
        num_antennas: M
        phi: azimuth angle of departure in radians
        spacing_ratio: antenna spacing over wavelength, D / lambda

    Returns:
        Unit-norm complex vector of length M
    """
    m = np.arange(num_antennas)
    return np.exp(-1j * 2.0 * np.pi * spacing_ratio * m * np.cos(phi)) / np.sqrt(num_antennas)


def ula_steering_matrix(
    num_antennas: int,
    phis: Sequence[float],
    spacing_ratio: float = HALF_WAVELENGTH
) -> np.ndarray:
    """Steering vectors for several angles, one per column"""
    m = np.arange(num_antennas)[:, None]
    cosines = np.cos(np.asarray(phis, dtype=float))[None, :]
    return np.exp(-1j * 2.0 * np.pi * spacing_ratio * m * cosines) / np.sqrt(num_antennas)


def gen_rayleigh(num_antennas: int, num_users: int, rng: np.random.Generator) -> ChannelSet:
    """i.i.d. Rayleigh channels with CN(0, 1) entries, M >= K >= 1"""
    if num_users < 1 or num_antennas < num_users:
        raise DimensionError(f"Rayleigh channels need M >= K >= 1, got M={num_antennas}, K={num_users}")

    h = complex_gaussian(rng, (num_antennas, num_users))
    sigma = np.ones(num_users)
    return ChannelSet(h_bar=h / sigma[None, :], sigma=sigma, metadata={"kind": "rayleigh"})


def gen_geometric(
    num_antennas: int,
    num_users: int,
    path_counts: Sequence[int],
    rng: np.random.Generator,
    spacing_ratio: float = HALF_WAVELENGTH
) -> Tuple[ChannelSet, SteeringInfo]:
    """
    Finite-scattering channels h_k = sqrt(M / L_k) A_k g_k.

    AoDs are uniform on [0, 2 pi) and path gains CN(0, 1), so E||h_k||^2 = M.
    Users are drawn in order; for each user the angles are drawn before the gains.
    """
    if num_antennas < 1 or num_users < 1:
        raise DimensionError(f"Geometric channels need M >= 1 and K >= 1, got M={num_antennas}, K={num_users}")
    if len(path_counts) != num_users:
        raise DimensionError(f"Expected {num_users} path counts, got {len(path_counts)}")
    if any(int(L) < 1 for L in path_counts):
        raise DimensionError(f"Every user needs at least one path, got {list(path_counts)}")

    users = []
    columns = []
    for L in path_counts:
        L = int(L)
        aods = rng.uniform(0.0, 2.0 * np.pi, size=L)
        gains = complex_gaussian(rng, L)
        steering_matrix = ula_steering_matrix(num_antennas, aods, spacing_ratio)
        users.append(UserPaths(aods=aods, gains=gains, steering_matrix=steering_matrix))
        columns.append(np.sqrt(num_antennas / L) * (steering_matrix @ gains))

    h = np.stack(columns, axis=1)
    sigma = np.ones(num_users)
    channels = ChannelSet(
        h_bar=h / sigma[None, :],
        sigma=sigma,
        metadata={
            "kind": "geometric",
            "path_counts": [int(L) for L in path_counts],
            "spacing_ratio": spacing_ratio,
        },
    )
    return channels, SteeringInfo(users=tuple(users), spacing_ratio=spacing_ratio)


def steering_covariance(user: UserPaths) -> np.ndarray:
    """
    Covariance of a geometric user averaged over its path gains:
    E[h h^H] = (M / L) A A^H for CN(0, 1) gains.
    """
    a = user.steering_matrix
    m = a.shape[0]
    return (m / user.path_count) * (a @ a.conj().T)
