"""
Numerical domain types: channels, codebooks, problems and precoders.

These hold numpy arrays, so they are plain dataclasses rather than pydantic models.
Invariants are checked at construction.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from app.domain.enums import CodebookKind, SolutionStatus
from app.domain.exceptions import DimensionError, PreconditionError

HERMITIAN_TOL = 1e-10
CONSTANT_MODULUS_TOL = 1e-10


# ============= Channels =============

@dataclass(frozen=True, eq=False)
class ChannelSet:
    """Noise-normalized user channels h_bar_k = h_k / sigma_k stored column-wise"""
    h_bar: np.ndarray  # M x K
    sigma: np.ndarray  # K
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.h_bar.ndim != 2:
            raise DimensionError(f"h_bar must be a matrix, got shape {self.h_bar.shape}")
        if self.sigma.shape != (self.h_bar.shape[1],):
            raise DimensionError(
                f"sigma must have one entry per user, got {self.sigma.shape} for K={self.h_bar.shape[1]}"
            )
        if not np.all(np.isfinite(self.h_bar)):
            raise PreconditionError("Channel matrix contains non-finite entries")
        if np.any(self.sigma <= 0):
            raise PreconditionError("Noise standard deviations must be positive")

    @property
    def num_antennas(self) -> int:
        return self.h_bar.shape[0]

    @property
    def num_users(self) -> int:
        return self.h_bar.shape[1]

    @property
    def user_gains(self) -> np.ndarray:
        """||h_bar_k||^2 per user"""
        return np.sum(np.abs(self.h_bar) ** 2, axis=0)

    def channel(self, k: int) -> np.ndarray:
        return self.h_bar[:, k]

    def restrict(self, rows: np.ndarray) -> "ChannelSet":
        """Channels seen by a subset of antennas"""
        return ChannelSet(
            h_bar=self.h_bar[rows, :],
            sigma=self.sigma,
            metadata={**self.metadata, "antenna_subset": [int(r) for r in rows]},
        )


@dataclass(frozen=True, eq=False)
class UserPaths:
    """Propagation paths of one geometric user"""
    aods: np.ndarray  # L_k azimuth angles (rad)
    gains: np.ndarray  # L_k complex path gains
    steering_matrix: np.ndarray  # M x L_k, unit-norm ULA steering columns

    def __post_init__(self):
        if self.aods.shape != self.gains.shape or self.steering_matrix.shape[1] != self.aods.shape[0]:
            raise DimensionError("Path angles, gains and steering matrix disagree on L_k")

    @property
    def path_count(self) -> int:
        return self.aods.shape[0]


@dataclass(frozen=True, eq=False)
class SteeringInfo:
    """Per-user AoDs, gains and steering matrices of a geometric channel realization"""
    users: Tuple[UserPaths, ...]
    spacing_ratio: float = 0.5

    @property
    def num_users(self) -> int:
        return len(self.users)

    @property
    def path_counts(self) -> Tuple[int, ...]:
        return tuple(u.path_count for u in self.users)

    @property
    def total_paths(self) -> int:
        return sum(self.path_counts)

    @property
    def all_aods(self) -> np.ndarray:
        return np.concatenate([u.aods for u in self.users])

    @property
    def stacked_steering(self) -> np.ndarray:
        """M x sum(L_k) matrix V collecting the steering vectors of all users"""
        return np.hstack([u.steering_matrix for u in self.users])

    def reconstruct(self, k: int) -> np.ndarray:
        """h_k = sqrt(M / L_k) A_k g_k"""
        user = self.users[k]
        m = user.steering_matrix.shape[0]
        return np.sqrt(m / user.path_count) * (user.steering_matrix @ user.gains)


# ============= RF codebook =============

@dataclass(frozen=True, eq=False)
class RfCodebook:
    """M x C matrix of constant-modulus candidate RF columns"""
    columns: np.ndarray
    kind: CodebookKind

    def __post_init__(self):
        if self.columns.ndim != 2 or self.columns.shape[1] < 1:
            raise DimensionError(f"Codebook must be an M x C matrix, got shape {self.columns.shape}")
        m = self.columns.shape[0]
        if not np.allclose(np.abs(self.columns), 1.0 / np.sqrt(m), rtol=0.0, atol=CONSTANT_MODULUS_TOL):
            raise PreconditionError("Codebook entries must all have modulus 1/sqrt(M)")

    @property
    def num_antennas(self) -> int:
        return self.columns.shape[0]

    @property
    def num_columns(self) -> int:
        return self.columns.shape[1]

    @property
    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.columns))

    @property
    def is_full_rank(self) -> bool:
        return self.rank == min(self.num_antennas, self.num_columns)


@dataclass(frozen=True, eq=False)
class RfSelection:
    """N distinct codebook columns, in increasing index order, forming F_RF"""
    indices: Tuple[int, ...]
    f_rf: np.ndarray  # M x N

    @property
    def num_rf_chains(self) -> int:
        return len(self.indices)


# ============= Max-min problem =============

@dataclass(frozen=True, eq=False)
class MaxMinProblem:
    """
    maximize min_k |h_k^H w|^2  subject to  w^H G w = P

    G = I gives the fully digital problem; G = F_RF^H F_RF with effective
    channels F_RF^H h_bar_k gives the baseband subproblem of hybrid precoding.
    """
    channels: np.ndarray  # d x K, column k is the k-th effective channel
    power_gram: np.ndarray  # d x d Hermitian positive definite
    power: float = 1.0

    def __post_init__(self):
        if self.channels.ndim != 2:
            raise DimensionError(f"Channels must be a d x K matrix, got shape {self.channels.shape}")
        d = self.channels.shape[0]
        if self.power_gram.shape != (d, d):
            raise DimensionError(f"Gram must be {d}x{d}, got {self.power_gram.shape}")
        if self.power <= 0:
            raise PreconditionError(f"Power must be positive, got {self.power}")
        if not np.allclose(self.power_gram, self.power_gram.conj().T, rtol=0.0, atol=HERMITIAN_TOL):
            raise PreconditionError("Power gram matrix is not Hermitian")
        eigenvalues = np.linalg.eigvalsh(self.power_gram)
        if eigenvalues[0] <= 1e-12 * max(eigenvalues[-1], 1.0):
            raise PreconditionError(f"Power gram matrix is not positive definite (min eigenvalue {eigenvalues[0]:.3e})")

    @classmethod
    def standard(cls, channels: np.ndarray, power: float = 1.0) -> "MaxMinProblem":
        """Identity gram, i.e. ||w||^2 = P"""
        return cls(channels=channels, power_gram=np.eye(channels.shape[0], dtype=complex), power=power)

    @property
    def dimension(self) -> int:
        return self.channels.shape[0]

    @property
    def num_users(self) -> int:
        return self.channels.shape[1]

    def snrs(self, w: np.ndarray) -> np.ndarray:
        """|h_k^H w|^2 for every user (w may hold candidates column-wise)"""
        return np.abs(self.channels.conj().T @ w) ** 2

    def min_snr(self, w: np.ndarray) -> float:
        return float(np.min(self.snrs(w)))

    def transmit_power(self, w: np.ndarray) -> float:
        return float(np.real(np.vdot(w, self.power_gram @ w)))

    def scale_to_power(self, w: np.ndarray) -> np.ndarray:
        return w * np.sqrt(self.power / self.transmit_power(w))


@dataclass(frozen=True, eq=False)
class MaxMinSolution:
    """Beamformer recovered from the relaxation"""
    w: np.ndarray
    t_achieved: float
    t_sdp: float
    status: SolutionStatus
    diagnostics: Dict[str, Any] = field(default_factory=dict)


# ============= Hybrid precoder =============

@dataclass(frozen=True, eq=False)
class RankedCandidate:
    """An RF selection with its projection upper bound"""
    selection: RfSelection
    score: float


@dataclass(frozen=True, eq=False)
class HybridPrecoder:
    """w = F_RF w_BB"""
    f_rf: np.ndarray  # M x N
    w_bb: np.ndarray  # N
    t_achieved: float
    score: float  # projection upper bound of f_rf at unit power
    t_sdp: float
    power: float
    solve_count: int
    selection: Optional[RfSelection] = None
    status: Optional[SolutionStatus] = None

    @property
    def w(self) -> np.ndarray:
        return self.f_rf @ self.w_bb

    @property
    def num_rf_chains(self) -> int:
        return self.f_rf.shape[1]
