"""
Max-min SNR beamforming via semidefinite relaxation.

The relaxation of

    maximize min_k |h_k^H w|^2   s.t.  w^H G w = P

is solved in whitened coordinates (u = G^{1/2} w) at unit power with cvxpy,
then mapped back and scaled by P. A rank-one beamformer is recovered by
rank reduction and principal-eigenvector extraction when possible, otherwise
by Gaussian randomization.
"""
import logging
from typing import Any, Dict, Optional, Tuple

import cvxpy as cp
import numpy as np
import scipy.linalg

from app.core.config import Settings, get_settings
from app.domain.enums import SolutionStatus
from app.domain.exceptions import ParameterError, SolverFailureError
from app.domain.precoding import MaxMinProblem, MaxMinSolution
from app.services.channel_service import complex_gaussian

logger = logging.getLogger(__name__)

# Acceptance thresholds on the raw solver output, before PSD projection
MAX_POWER_RESIDUAL = 1e-6
MAX_NEGATIVE_EIGENVALUE = 1e-6


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def gram_roots(gram: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """G^{1/2} and G^{-1/2} of a Hermitian positive definite matrix"""
    eigenvalues, eigenvectors = scipy.linalg.eigh(hermitize(gram))
    root = np.sqrt(eigenvalues)
    g_sqrt = (eigenvectors * root) @ eigenvectors.conj().T
    g_inv_sqrt = (eigenvectors / root) @ eigenvectors.conj().T
    return g_sqrt, g_inv_sqrt


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rotate so the first significant entry is real and positive"""
    magnitudes = np.abs(v)
    pivot = int(np.argmax(magnitudes > 1e-12 * magnitudes.max()))
    return v * np.exp(-1j * np.angle(v[pivot]))


def _hermitian_basis(r: int) -> np.ndarray:
    """Real basis of the r x r Hermitian matrices, shape (r^2, r, r)"""
    basis = []
    for i in range(r):
        e = np.zeros((r, r), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    for i in range(r):
        for j in range(i + 1, r):
            sym = np.zeros((r, r), dtype=complex)
            sym[i, j] = sym[j, i] = 1.0
            anti = np.zeros((r, r), dtype=complex)
            anti[i, j] = 1j
            anti[j, i] = -1j
            basis.extend([sym, anti])
    return np.array(basis)


class MaxMinSolver:
    """SDR + Gaussian randomization solver for the max-min multicast problem"""

    def __init__(
        self,
        settings: Optional[Settings] = None,
        n_candidates: Optional[int] = None,
        rank_one_tol: Optional[float] = None,
        rank_reduction: Optional[bool] = None
    ):
        """
        Initialize solver

        Args:
            settings: Settings providing solver name, tolerances and defaults
            n_candidates: Default randomization count (overrides settings)
            rank_one_tol: Threshold on 1 - lambda_1 / tr(W) (overrides settings)
            rank_reduction: Whether to purify the relaxation before extraction
        """
        self.settings = settings or get_settings()
        self.n_candidates = n_candidates if n_candidates is not None else self.settings.N_CANDIDATES
        if self.n_candidates < 1:
            raise ParameterError(f"n_candidates must be >= 1, got {self.n_candidates}")
        self.rank_one_tol = rank_one_tol if rank_one_tol is not None else self.settings.RANK_ONE_TOL
        self.rank_reduction = self.settings.RANK_REDUCTION if rank_reduction is None else rank_reduction

    # ------------------------------------------------------------------
    # Relaxation
    # ------------------------------------------------------------------

    def solve_sdp_relaxation(self, problem: MaxMinProblem) -> Tuple[np.ndarray, float]:
        """
        Solve the SDP relaxation of the problem.

        Returns:
            (W, t_sdp) with W Hermitian PSD in the problem's coordinates,
            tr(G W) = P and t_sdp = min_k h_k^H W h_k.
        """
        W, t_sdp, _ = self._relax(problem)
        return W, t_sdp

    def _relax(self, problem: MaxMinProblem) -> Tuple[np.ndarray, float, Dict[str, Any]]:
        _, g_inv_sqrt = gram_roots(problem.power_gram)
        whitened = g_inv_sqrt @ problem.channels

        u, t_unit, stats = self._solve_unit_trace(whitened)

        W = problem.power * hermitize(g_inv_sqrt @ u @ g_inv_sqrt)
        return W, problem.power * t_unit, stats

    def _solve_unit_trace(self, channels: np.ndarray) -> Tuple[np.ndarray, float, Dict[str, Any]]:
        """max t  s.t.  c_k^H U c_k >= t,  tr(U) = 1,  U >= 0"""
        d, num_users = channels.shape

        # Normalize so the optimum is O(1) whatever the channel strength
        scale = float(np.max(np.sum(np.abs(channels) ** 2, axis=0)))
        if scale <= 0.0:
            return np.eye(d, dtype=complex) / d, 0.0, {"solver": None, "iterations": 0}
        normalized = channels / np.sqrt(scale)

        U = cp.Variable((d, d), hermitian=True)
        t = cp.Variable()
        constraints = [U >> 0, cp.real(cp.trace(U)) == 1]
        for k in range(num_users):
            c = normalized[:, k]
            R_k = np.outer(c, c.conj())
            constraints.append(cp.real(cp.trace(R_k @ U)) >= t)
        prob = cp.Problem(cp.Maximize(t), constraints)

        last_status = None
        residuals: Dict[str, Any] = {}
        for solver in self.settings.solver_chain:
            try:
                prob.solve(solver=solver, **self.settings.solver_options(solver))
            except cp.error.SolverError as e:
                logger.warning(f"SDP solver {solver} failed: {e}")
                last_status = "solver_error"
                continue

            if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or U.value is None:
                logger.warning(f"SDP solver {solver} returned status {prob.status}")
                last_status = prob.status
                continue

            raw = hermitize(np.asarray(U.value))
            eigenvalues, eigenvectors = np.linalg.eigh(raw)
            residuals = {
                "power_residual": float(abs(np.real(np.trace(raw)) - 1.0)),
                "min_eigenvalue": float(eigenvalues[0]),
            }
            if residuals["power_residual"] > MAX_POWER_RESIDUAL or eigenvalues[0] < -MAX_NEGATIVE_EIGENVALUE:
                logger.warning(f"SDP solver {solver} solution rejected, residuals {residuals}")
                last_status = prob.status
                continue

            if prob.status == cp.OPTIMAL_INACCURATE:
                logger.warning(f"SDP solver {solver} reported an inaccurate optimum, residuals {residuals}")

            # Project onto the PSD cone and restore tr(U) = 1
            clipped = np.clip(eigenvalues, 0.0, None)
            u = (eigenvectors * clipped) @ eigenvectors.conj().T
            u = hermitize(u / np.real(np.trace(u)))

            values = np.real(np.einsum("ik,ij,jk->k", normalized.conj(), u, normalized))
            t_unit = max(float(np.min(values)), float(t.value)) * scale

            stats = {
                "solver": solver,
                "iterations": getattr(prob.solver_stats, "num_iters", None),
                "solve_time": getattr(prob.solver_stats, "solve_time", None),
                **residuals,
            }
            logger.debug(f"SDP relaxation solved by {solver}: t={t_unit:.6g}, stats={stats}")
            return u, t_unit, stats

        raise SolverFailureError(
            solver=",".join(self.settings.solver_chain),
            status=last_status,
            residuals=residuals,
        )

    # ------------------------------------------------------------------
    # Rank-one recovery
    # ------------------------------------------------------------------

    def _psd_factor(self, W: np.ndarray) -> np.ndarray:
        """V with W ~= V V^H, dropping eigenvalues below rank_one_tol * lambda_max"""
        eigenvalues, eigenvectors = np.linalg.eigh(hermitize(W))
        top = max(float(eigenvalues[-1]), 0.0)
        keep = eigenvalues > self.rank_one_tol * top
        if not np.any(keep):
            keep[-1] = True
        return eigenvectors[:, keep] * np.sqrt(np.clip(eigenvalues[keep], 0.0, None))

    def reduce_rank(self, W: np.ndarray, problem: MaxMinProblem) -> np.ndarray:
        """
        Lower the rank of a relaxation solution while keeping every user's received power.

        With W = V V^H (rank r), any Hermitian D with b_k^H D b_k = 0 for b_k = V^H h_k
        leaves the user powers of V (I - D / lambda) V^H unchanged, and choosing lambda
        as the largest-magnitude eigenvalue of D removes at least one rank. Such D exists
        while r^2 > K, so for K <= 3 the result is rank one. The power is restored to P
        at the end.
        """
        num_users = problem.num_users
        W = hermitize(W)
        for _ in range(problem.dimension):
            V = self._psd_factor(W)
            r = V.shape[1]
            if r <= 1 or r * r <= num_users:
                break

            b = V.conj().T @ problem.channels  # r x K
            basis = _hermitian_basis(r)
            constraint_map = np.real(np.einsum("ak,nab,bk->kn", b.conj(), basis, b))
            null = scipy.linalg.null_space(constraint_map)
            if null.shape[1] == 0:
                break

            direction = np.tensordot(null[:, 0], basis, axes=1)
            mu = np.linalg.eigvalsh(direction)
            lam = mu[np.argmax(np.abs(mu))]
            W = hermitize(V @ (np.eye(r) - direction / lam) @ V.conj().T)

        V = self._psd_factor(W)
        W = V @ V.conj().T
        return hermitize(W * problem.power / np.real(np.trace(problem.power_gram @ W)))

    def extract_rank_one(
        self,
        W: np.ndarray,
        problem: MaxMinProblem,
        rel_tol: Optional[float] = None
    ) -> Optional[np.ndarray]:
        """
        Principal eigenvector of W scaled to w^H G w = P when lambda_1 / tr(W) >= 1 - rel_tol.

        Returns None when W is not numerically rank one.
        """
        rel_tol = self.rank_one_tol if rel_tol is None else rel_tol
        eigenvalues, eigenvectors = np.linalg.eigh(hermitize(W))
        trace = float(np.sum(eigenvalues))
        if trace <= 0.0:
            return None
        if eigenvalues[-1] / trace < 1.0 - rel_tol:
            return None
        return problem.scale_to_power(_canonical_phase(eigenvectors[:, -1]))

    def randomize(
        self,
        W: np.ndarray,
        problem: MaxMinProblem,
        n_candidates: int,
        rng: np.random.Generator
    ) -> Tuple[np.ndarray, float]:
        """
        Gaussian randomization: w = U Sigma^{1/2} v with v ~ CN(0, I), scaled to power P.

        Returns:
            (best candidate, its minimum SNR); ties go to the first candidate drawn.
        """
        if n_candidates < 1:
            raise ParameterError(f"n_candidates must be >= 1, got {n_candidates}")

        eigenvalues, eigenvectors = np.linalg.eigh(hermitize(W))
        factor = eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))

        v = complex_gaussian(rng, (problem.dimension, n_candidates))
        candidates = factor @ v
        powers = np.real(np.sum(candidates.conj() * (problem.power_gram @ candidates), axis=0))
        valid = powers > 1e-300
        if not np.any(valid):
            raise SolverFailureError(solver="randomization", status="zero_candidates",
                                     message="Relaxation solution has no energy to randomize")
        candidates[:, valid] *= np.sqrt(problem.power / powers[valid])

        min_snrs = np.min(problem.snrs(candidates), axis=0)
        min_snrs[~valid] = -np.inf
        best = int(np.argmax(min_snrs))
        return candidates[:, best], float(min_snrs[best])

    # ------------------------------------------------------------------
    # Composition
    # ------------------------------------------------------------------

    def solve_maxmin(
        self,
        problem: MaxMinProblem,
        rng: np.random.Generator,
        n_candidates: Optional[int] = None
    ) -> MaxMinSolution:
        """
        Relaxation, then rank reduction and rank-one extraction, else randomization.
        """
        if n_candidates is None:
            n_candidates = self.n_candidates
        if n_candidates < 1:
            raise ParameterError(f"n_candidates must be >= 1, got {n_candidates}")
        W, t_sdp, stats = self._relax(problem)

        eigenvalues = np.linalg.eigvalsh(W)
        diagnostics: Dict[str, Any] = {
            **stats,
            "eigen_ratio": float(eigenvalues[-1] / max(np.sum(eigenvalues), 1e-300)),
            "n_candidates": n_candidates,
        }

        if self.rank_reduction:
            W = self.reduce_rank(W, problem)
            reduced = np.linalg.eigvalsh(W)
            diagnostics["reduced_eigen_ratio"] = float(reduced[-1] / max(np.sum(reduced), 1e-300))

        w = self.extract_rank_one(W, problem)
        if w is not None:
            status = SolutionStatus.RANK_ONE_EXACT
            t_achieved = problem.min_snr(w)
        else:
            status = SolutionStatus.RANDOMIZED
            w, t_achieved = self.randomize(W, problem, n_candidates, rng)

        logger.debug(
            f"Max-min solve d={problem.dimension} K={problem.num_users}: "
            f"status={status.value} t={t_achieved:.6g} t_sdp={t_sdp:.6g}"
        )
        return MaxMinSolution(
            w=w,
            t_achieved=t_achieved,
            t_sdp=t_sdp,
            status=status,
            diagnostics=diagnostics,
        )
