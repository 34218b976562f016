"""
Application configuration management
"""
import os
from functools import lru_cache
from typing import Any, Dict, Optional
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings"""

    # Application
    APP_ENV: str = "development"
    APP_NAME: str = "Hybrid Multicast Precoding"
    APP_VERSION: str = "1.0.0"

    # Logging
    LOG_LEVEL: str = "INFO"

    # SDP relaxation
    SDP_SOLVER: str = "CLARABEL"  # interior-point
    SDP_FALLBACK_SOLVER: Optional[str] = "SCS"  # empty string disables the fallback
    SDP_TOLERANCE: float = 1e-8
    SDP_MAX_ITERS: int = 500

    # Randomization / extraction
    N_CANDIDATES: int = 1000
    RANK_ONE_TOL: float = 1e-6
    RANK_REDUCTION: bool = True

    # Monte Carlo runs (0 = one worker per CPU core)
    WORKERS: int = 0
    RESULTS_DIR: str = "results"
    CDF_GRID_POINTS: int = 101

    # Sentry
    SENTRY_DSN: Optional[str] = None

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore"  # Ignore extra env vars not defined in Settings
    )

    @property
    def worker_count(self) -> int:
        """Resolve WORKERS=0 to the number of CPU cores"""
        if self.WORKERS > 0:
            return self.WORKERS
        return os.cpu_count() or 1

    @property
    def solver_chain(self) -> list:
        """Solvers to try, in order"""
        chain = [self.SDP_SOLVER.upper()]
        if self.SDP_FALLBACK_SOLVER and self.SDP_FALLBACK_SOLVER.upper() not in chain:
            chain.append(self.SDP_FALLBACK_SOLVER.upper())
        return chain

    def solver_options(self, solver: str) -> Dict[str, Any]:
        """Map the generic tolerance/iteration settings onto solver-specific keywords"""
        solver = solver.upper()
        tol = self.SDP_TOLERANCE
        if solver == "CLARABEL":
            return {
                "tol_gap_abs": tol,
                "tol_gap_rel": tol,
                "tol_feas": tol,
                "max_iter": self.SDP_MAX_ITERS,
            }
        if solver == "SCS":
            # first-order method, cannot reach interior-point accuracy
            return {"eps_abs": max(tol, 1e-7), "eps_rel": max(tol, 1e-7), "max_iters": 100 * self.SDP_MAX_ITERS}
        return {}

    @property
    def is_production(self) -> bool:
        """Check if running in production"""
        return self.APP_ENV == "production"


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
