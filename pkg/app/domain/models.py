"""
Core domain models
"""
import math
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.domain.enums import ChannelKind, CodebookKind, Method


HYBRID_METHODS = (Method.HYBRID_EXHAUSTIVE, Method.HYBRID_ALGORITHM1)


# ============= Experiment Models =============

class ExperimentConfig(BaseModel):
    """Declarative description of one Monte Carlo experiment"""
    model_config = ConfigDict(populate_by_name=True, use_enum_values=False)

    name: str = "experiment"
    M: int = Field(..., ge=1)  # antennas
    N: int = Field(..., ge=1)  # RF chains
    K: int = Field(..., ge=1)  # users

    channel_kind: ChannelKind = ChannelKind.RAYLEIGH
    path_counts: Optional[List[int]] = None  # geometric only, defaults to one path per user
    spacing_ratio: float = Field(0.5, gt=0)  # D / lambda

    codebook_kind: CodebookKind = CodebookKind.DFT
    methods: List[Method] = Field(default_factory=lambda: list(Method))
    top_i: int = Field(1, ge=1, alias="I")

    snr_grid_db: List[float] = Field(default_factory=lambda: [0.0, 5.0, 10.0, 15.0, 20.0])
    trials: int = Field(1000, ge=1)
    n_candidates: int = Field(1000, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    cdf_grid_points: int = Field(101, ge=2)

    @field_validator("methods")
    @classmethod
    def validate_methods(cls, v):
        """Keep the first occurrence of each method"""
        if not v:
            raise ValueError("At least one method is required")
        return list(dict.fromkeys(v))

    @field_validator("snr_grid_db")
    @classmethod
    def validate_snr_grid(cls, v):
        if not v:
            raise ValueError("SNR grid must not be empty")
        return list(dict.fromkeys(float(x) for x in v))

    @field_validator("path_counts")
    @classmethod
    def validate_path_counts(cls, v):
        if v is not None and any(L < 1 for L in v):
            raise ValueError("Every user needs at least one path")
        return v

    @model_validator(mode="after")
    def validate_dimensions(self):
        """Cross-field checks: N <= M, K <= M, I <= |C_set|, method/channel compatibility"""
        if self.N > self.M:
            raise ValueError(f"N ({self.N}) must not exceed M ({self.M})")
        if self.K > self.M:
            raise ValueError(f"K ({self.K}) must not exceed M ({self.M})")

        if self.channel_kind == ChannelKind.GEOMETRIC:
            if self.path_counts is None:
                self.path_counts = [1] * self.K
            if len(self.path_counts) != self.K:
                raise ValueError(f"path_counts needs {self.K} entries, got {len(self.path_counts)}")
        elif self.path_counts is not None:
            raise ValueError("path_counts only applies to geometric channels")

        if Method.AOD_AWARE in self.methods:
            if self.channel_kind != ChannelKind.GEOMETRIC:
                raise ValueError("aod_aware needs geometric channels")
            if sum(self.path_counts) > self.M:
                raise ValueError(f"aod_aware needs sum(L_k) <= M, got {sum(self.path_counts)} > {self.M}")

        if any(m in self.methods for m in HYBRID_METHODS):
            if self.codebook_kind == CodebookKind.EIGEN and self.channel_kind != ChannelKind.GEOMETRIC:
                raise ValueError("eigen codebook needs geometric channels")
            columns = self.codebook_size
            if self.N > columns:
                raise ValueError(f"N ({self.N}) exceeds codebook size ({columns})")
            total = math.comb(columns, self.N)
            if Method.HYBRID_ALGORITHM1 in self.methods and self.top_i > total:
                raise ValueError(f"I ({self.top_i}) exceeds the {total} possible RF selections")
        return self

    @property
    def codebook_size(self) -> int:
        """C for the configured codebook kind"""
        if self.codebook_kind == CodebookKind.EIGEN:
            return self.K
        if self.codebook_kind == CodebookKind.STEERING and self.channel_kind == ChannelKind.GEOMETRIC:
            return sum(self.path_counts)
        return self.M

    @property
    def exhaustive_size(self) -> int:
        """I_exs = C choose N"""
        return math.comb(self.codebook_size, self.N)


class TrialRecord(BaseModel):
    """One method's result on one channel realization at one SNR point"""
    trial: int = Field(..., ge=0)
    method: Method
    snr_db: float
    t_achieved: float = Field(..., ge=0)
    rate_bps_hz: float = Field(..., ge=0)
    wall_time_s: float = Field(..., ge=0)
    solve_count: int = Field(..., ge=0)
    t_bound: Optional[float] = None  # the method's own relaxation value
    error: Optional[str] = None

    @model_validator(mode="after")
    def validate_rate(self):
        """rate must be log2(1 + t)"""
        expected = math.log2(1.0 + self.t_achieved)
        if not math.isclose(self.rate_bps_hz, expected, rel_tol=1e-9, abs_tol=1e-9):
            raise ValueError(f"rate {self.rate_bps_hz} does not match log2(1 + {self.t_achieved})")
        return self

    @classmethod
    def from_outcome(
        cls,
        trial: int,
        method: Method,
        snr_db: float,
        t_achieved: float,
        wall_time_s: float,
        solve_count: int,
        t_bound: Optional[float] = None,
        error: Optional[str] = None
    ) -> "TrialRecord":
        return cls(
            trial=trial,
            method=method,
            snr_db=snr_db,
            t_achieved=t_achieved,
            rate_bps_hz=math.log2(1.0 + t_achieved),
            wall_time_s=wall_time_s,
            solve_count=solve_count,
            t_bound=t_bound,
            error=error,
        )

    @property
    def failed(self) -> bool:
        return self.error is not None


# ============= Summary Models =============

class CdfPoint(BaseModel):
    rate: float
    probability: float


class SummaryRow(BaseModel):
    """Aggregates of one method at one SNR point"""
    method: Method
    snr_db: float
    trials: int
    failures: int = 0
    mean_rate: float
    mean_t: float
    mean_solve_count: float
    mean_wall_time_s: float
    deciles: List[float] = Field(default_factory=list)  # rate at 10%, 20%, ..., 90%
    cdf: List[CdfPoint] = Field(default_factory=list)


class ExperimentSummary(BaseModel):
    """Per method x SNR summary table"""
    rate_grid: List[float]
    rows: List[SummaryRow]

    def row(self, method: Method, snr_db: float) -> Optional[SummaryRow]:
        for r in self.rows:
            if r.method == method and r.snr_db == snr_db:
                return r
        return None

    @property
    def methods(self) -> List[Method]:
        return list(dict.fromkeys(r.method for r in self.rows))

    @property
    def snr_points(self) -> List[float]:
        return sorted(set(r.snr_db for r in self.rows))
