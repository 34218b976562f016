"""
Custom exceptions for domain-specific errors
"""
from typing import Any, Dict, Optional


class PrecodingError(Exception):
    """Base class for every error raised by the precoding domain"""

    def __init__(self, message: str):
        self.message = message
        super().__init__(self.message)


class DimensionError(PrecodingError):
    """Raised when array sizes (M, K, N, L_k, C) are inconsistent"""

    def __init__(self, message: str = "Invalid dimensions"):
        super().__init__(message)


class PreconditionError(PrecodingError):
    """Raised when a problem violates its preconditions (singular gram, non-positive power)"""

    def __init__(self, message: str = "Problem preconditions not satisfied"):
        super().__init__(message)


class ParameterError(PrecodingError):
    """Raised when a tuning parameter (I, n_candidates) is out of range"""

    def __init__(self, message: str = "Parameter out of range"):
        super().__init__(message)


class SolverFailureError(PrecodingError):
    """
    Raised when the SDP solver does not reach an optimal solution.
    Carries the solver status and the residuals measured on the returned point.
    """

    def __init__(
        self,
        solver: str,
        status: Optional[str],
        residuals: Optional[Dict[str, Any]] = None,
        message: str = "SDP relaxation did not converge"
    ):
        self.solver = solver
        self.status = status
        self.residuals = residuals or {}
        super().__init__(f"{message} (solver={solver}, status={status}, residuals={self.residuals})")


class DegenerateCodebookError(PrecodingError):
    """Raised when a codebook's columns are linearly dependent"""

    def __init__(self, rank: int, expected: int, message: str = "Codebook is rank deficient"):
        self.rank = rank
        self.expected = expected
        super().__init__(f"{message} (rank {rank}, expected {expected})")


class DegenerateRfPrecoderError(PrecodingError):
    """Raised when an RF precoder does not have full column rank"""

    def __init__(self, shape: tuple, message: str = "RF precoder is rank deficient"):
        self.shape = shape
        super().__init__(f"{message} (shape {shape})")


class NotApplicableError(PrecodingError):
    """
    Raised when the AoD-aware construction is requested outside its hypothesis,
    i.e. the total number of paths exceeds the number of antennas.
    """

    def __init__(self, total_paths: int, num_antennas: int):
        self.total_paths = total_paths
        self.num_antennas = num_antennas
        super().__init__(
            f"AoD-aware RF precoder needs sum(L_k) <= M, got {total_paths} paths for {num_antennas} antennas"
        )


class EmptyInputError(PrecodingError):
    """Raised when a summary is requested for no records"""

    def __init__(self, message: str = "No trial records to summarize"):
        super().__init__(message)


class ResultsIOError(PrecodingError):
    """Raised when result files cannot be written or read"""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{message}: {path}")


class ConfigFileError(PrecodingError):
    """Raised when an experiment config file or preset cannot be read or parsed"""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{message}: {path}")
