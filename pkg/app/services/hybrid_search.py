"""
Hybrid precoder design: RF selection by projection upper bound (Algorithm 1),
the exhaustive-search baseline, the AoD-aware construction and the digital baselines.
"""
import logging
from dataclasses import replace
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from app.domain.exceptions import (
    DegenerateRfPrecoderError,
    DimensionError,
    NotApplicableError,
    ParameterError,
)
from app.domain.precoding import (
    ChannelSet,
    HybridPrecoder,
    MaxMinProblem,
    MaxMinSolution,
    RankedCandidate,
    RfCodebook,
    SteeringInfo,
)
from app.services.maxmin_solver import MaxMinSolver
from app.services.rf_codebook import enumerate_selections, selection_count

logger = logging.getLogger(__name__)

# |R_ii| below this fraction of max |R_jj| counts as a dependent column
RANK_TOL = 1e-9

BasebandCache = Dict[Hashable, MaxMinSolution]


def _thin_qr(f_rf: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """F_RF = QR with Q an orthonormal basis of span(F_RF); raises if F_RF is not full column rank"""
    m, n = f_rf.shape
    if n > m:
        raise DegenerateRfPrecoderError(shape=f_rf.shape)
    q, r = np.linalg.qr(f_rf)
    diag = np.abs(np.diag(r))
    if diag.min() <= RANK_TOL * max(diag.max(), 1e-300):
        raise DegenerateRfPrecoderError(shape=f_rf.shape)
    return q, r


def rf_upper_bound(f_rf: np.ndarray, channels: ChannelSet) -> float:
    """
    min_k h_k^H F (F^H F)^{-1} F^H h_k, the largest max-min SNR any baseband
    vector can reach through F at unit power.

    Evaluated as min_k ||Q^H h_k||^2 with Q an orthonormal basis of span(F).
    """
    q, _ = _thin_qr(f_rf)
    projected = q.conj().T @ channels.h_bar
    return float(np.min(np.sum(np.abs(projected) ** 2, axis=0)))


def _selection_rng(entropy: int, indices: Sequence[int]) -> np.random.Generator:
    """Stream owned by one RF selection, independent of the search order"""
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=tuple(int(i) for i in indices)))


class HybridPrecodingService:
    """Designs hybrid and digital multicast precoders on a channel realization"""

    def __init__(self, solver: Optional[MaxMinSolver] = None):
        self.solver = solver or MaxMinSolver()

    # ============= Baseband =============

    def _solve_baseband_solution(
        self,
        f_rf: np.ndarray,
        channels: ChannelSet,
        power: float,
        rng: np.random.Generator,
        n_candidates: Optional[int] = None
    ) -> MaxMinSolution:
        # solved on Q^H h_k with ||u||^2 = P, then w_BB = R^{-1} u, so F_RF w_BB = Q u
        q, r = _thin_qr(f_rf)
        problem = MaxMinProblem.standard(q.conj().T @ channels.h_bar, power)
        solution = self.solver.solve_maxmin(problem, rng, n_candidates)
        return replace(solution, w=solve_triangular(r, solution.w))

    def solve_baseband(
        self,
        f_rf: np.ndarray,
        channels: ChannelSet,
        power: float,
        rng: np.random.Generator,
        n_candidates: Optional[int] = None
    ) -> Tuple[np.ndarray, float]:
        """
        Optimize w_BB for a fixed RF precoder.

        Subject to ||F_RF w_BB||^2 = P. Solved in the orthonormal basis of span(F_RF),
        so ill-conditioned but full-rank RF precoders need no whitening.

        Returns:
            (w_bb, t_achieved)
        """
        solution = self._solve_baseband_solution(f_rf, channels, power, rng, n_candidates)
        return solution.w, solution.t_achieved

    # ============= Codebook search =============

    def rank_selections(
        self,
        codebook: RfCodebook,
        num_rf_chains: int,
        channels: ChannelSet,
        top_i: int
    ) -> List[RankedCandidate]:
        """The top_i selections by upper bound, descending; ties keep lexicographic order"""
        selections = enumerate_selections(codebook, num_rf_chains)
        total = selection_count(codebook.num_columns, num_rf_chains)
        if not 1 <= top_i <= total:
            raise ParameterError(f"I must be in [1, {total}], got {top_i}")

        scored = [RankedCandidate(selection=s, score=rf_upper_bound(s.f_rf, channels)) for s in selections]
        scored.sort(key=lambda c: -c.score)
        return scored[:top_i]

    def _best_of(
        self,
        candidates: List[RankedCandidate],
        channels: ChannelSet,
        power: float,
        rng: np.random.Generator,
        n_candidates: Optional[int],
        cache: Optional[BasebandCache]
    ) -> HybridPrecoder:
        """Solve the baseband problem for each candidate and keep the first best"""
        entropy = int(rng.integers(0, 2**63 - 1))
        best: Optional[Tuple[RankedCandidate, MaxMinSolution]] = None

        for candidate in candidates:
            key = (entropy, candidate.selection.indices, float(power), n_candidates)
            solution = cache.get(key) if cache is not None else None
            if solution is None:
                solution = self._solve_baseband_solution(
                    candidate.selection.f_rf,
                    channels,
                    power,
                    _selection_rng(entropy, candidate.selection.indices),
                    n_candidates,
                )
                if cache is not None:
                    cache[key] = solution
            if best is None or solution.t_achieved > best[1].t_achieved:
                best = (candidate, solution)

        candidate, solution = best
        return HybridPrecoder(
            f_rf=candidate.selection.f_rf,
            w_bb=solution.w,
            t_achieved=solution.t_achieved,
            score=candidate.score,
            t_sdp=solution.t_sdp,
            power=power,
            solve_count=len(candidates),
            selection=candidate.selection,
            status=solution.status,
        )

    def algorithm1(
        self,
        codebook: RfCodebook,
        num_rf_chains: int,
        top_i: int,
        channels: ChannelSet,
        power: float,
        rng: np.random.Generator,
        n_candidates: Optional[int] = None,
        cache: Optional[BasebandCache] = None
    ) -> HybridPrecoder:
        """
        Low-complexity search: rank C_set by the projection bound, solve the baseband
        problem for the top I selections only and keep the best.

        Args:
            cache: Optional per-realization store shared with exhaustive_search; the
                same rng state yields the same per-selection solutions in both.
        """
        ranked = self.rank_selections(codebook, num_rf_chains, channels, top_i)
        precoder = self._best_of(ranked, channels, power, rng, n_candidates, cache)
        logger.debug(
            f"Algorithm 1 (I={top_i}): selection={precoder.selection.indices} "
            f"t={precoder.t_achieved:.6g} bound={precoder.score * power:.6g}"
        )
        return precoder

    def exhaustive_search(
        self,
        codebook: RfCodebook,
        num_rf_chains: int,
        channels: ChannelSet,
        power: float,
        rng: np.random.Generator,
        n_candidates: Optional[int] = None,
        cache: Optional[BasebandCache] = None
    ) -> HybridPrecoder:
        """Solve every selection in lexicographic order"""
        candidates = [
            RankedCandidate(selection=s, score=rf_upper_bound(s.f_rf, channels))
            for s in enumerate_selections(codebook, num_rf_chains)
        ]
        return self._best_of(candidates, channels, power, rng, n_candidates, cache)

    # ============= AoD-aware construction =============

    def aod_aware_precoder(
        self,
        steering: SteeringInfo,
        channels: ChannelSet,
        power: float,
        rng: np.random.Generator,
        n_candidates: Optional[int] = None
    ) -> HybridPrecoder:
        """
        F_RF = V, the steering vectors of every path of every user.

        The optimal digital beamformer lies in span(h_1..h_K), which is contained in
        span(V), so this hybrid precoder with sum(L_k) RF chains loses nothing.
        """
        total_paths = steering.total_paths
        if total_paths > channels.num_antennas:
            raise NotApplicableError(total_paths=total_paths, num_antennas=channels.num_antennas)

        v = steering.stacked_steering
        solution = self._solve_baseband_solution(v, channels, power, rng, n_candidates)
        return HybridPrecoder(
            f_rf=v,
            w_bb=solution.w,
            t_achieved=solution.t_achieved,
            score=rf_upper_bound(v, channels),
            t_sdp=solution.t_sdp,
            power=power,
            solve_count=1,
            status=solution.status,
        )

    # ============= Digital baselines =============

    def digital_precoder(
        self,
        channels: ChannelSet,
        power: float,
        rng: np.random.Generator,
        n_candidates: Optional[int] = None
    ) -> MaxMinSolution:
        """Fully digital precoding, one RF chain per antenna"""
        problem = MaxMinProblem.standard(channels.h_bar, power)
        return self.solver.solve_maxmin(problem, rng, n_candidates)

    def random_subset_digital(
        self,
        channels: ChannelSet,
        num_rf_chains: int,
        power: float,
        rng: np.random.Generator,
        n_candidates: Optional[int] = None,
        solve_rng: Optional[np.random.Generator] = None
    ) -> MaxMinSolution:
        """
        Digital precoding over a uniformly random subset of N antennas.

        Args:
            rng: Stream the subset is drawn from
            solve_rng: Stream for the randomization step (defaults to rng)
        """
        m = channels.num_antennas
        if not 1 <= num_rf_chains <= m:
            raise DimensionError(f"Antenna subset needs 1 <= N <= M, got N={num_rf_chains}, M={m}")

        subset = np.sort(rng.choice(m, size=num_rf_chains, replace=False))
        solution = self.digital_precoder(
            channels.restrict(subset),
            power,
            solve_rng if solve_rng is not None else rng,
            n_candidates,
        )
        solution.diagnostics["antenna_subset"] = subset.tolist()
        return solution
