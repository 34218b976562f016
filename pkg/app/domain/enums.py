"""
Enumerations for domain models
"""
from enum import Enum


class ChannelKind(str, Enum):
    """Channel models"""
    RAYLEIGH = "rayleigh"  # i.i.d. CN(0, 1) entries
    GEOMETRIC = "geometric"  # finite-scattering ULA model


class CodebookKind(str, Enum):
    """RF codebook constructions"""
    DFT = "dft"
    STEERING = "steering"
    EIGEN = "eigen"  # dominant covariance eigenvectors, constant-modulus projected


class Method(str, Enum):
    """Precoding methods compared in an experiment"""
    DIGITAL_FULL = "digital_full"  # one RF chain per antenna
    DIGITAL_SUBSET = "digital_subset"  # digital over N random antennas
    HYBRID_EXHAUSTIVE = "hybrid_exhaustive"  # every N-column selection solved
    HYBRID_ALGORITHM1 = "hybrid_algorithm1"  # ranked search, top-I
    AOD_AWARE = "aod_aware"  # F_RF = stacked steering vectors


class SolutionStatus(str, Enum):
    """How the beamformer was recovered from the relaxation"""
    RANK_ONE_EXACT = "rank_one_exact"
    RANDOMIZED = "randomized"
