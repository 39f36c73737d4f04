"""Empirical identifiability: recover (s, x_data) from noiseless outputs.

Given the pilot entries of x, the useful outputs are a square polynomial
system of degree 2 in the remaining unknowns. The system is holomorphic in
the unknowns (conjugates never appear), so a complex Gauss-Newton step is
well defined and the linearization is exactly the recovery Jacobian.
Recovery here is noiseless only: the identifiability argument lives at
infinite SNR. Independent trials are deterministic under their seeds and
may run in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    ColoringMatrix,
    Dims,
    InvalidConfigurationError,
    build_B,
    constant_model,
    random_coloring,
    standard_complex_gaussian,
)
from .jacobian import assemble_jacobian
from .pilots import PilotAssignment

__all__ = [
    "RecoveryResult",
    "GaussNewtonOptions",
    "forward_map",
    "recover",
    "scaling_ambiguity_check",
    "rank_gap_demo",
    "cluster_solutions",
]

RANK_TOL = 1e-8


@dataclass(frozen=True)
class RecoveryResult:
    """Outcome of one recovery attempt.

    residual is relative: ||phi(s_hat, x_hat) - y_target|| / ||y_target||.
    param_error is the relative distance to the supplied ground truth (NaN if
    none was given). success implies residual <= 1e-9.
    """

    success: bool
    residual: float
    param_error: float
    iterations: int
    s: np.ndarray
    x_data: np.ndarray


@dataclass(frozen=True)
class GaussNewtonOptions:
    tol: float = 1e-12
    max_iterations: int = 200
    max_halvings: int = 30


def _assemble_x(x_data: np.ndarray, x_pilot: np.ndarray, pilots: PilotAssignment) -> np.ndarray:
    dims = pilots.dims
    x = np.zeros(dims.T_eff * dims.N, dtype=complex)
    x[np.asarray(pilots.pilots, dtype=int) - 1] = x_pilot
    x[np.asarray(pilots.data, dtype=int) - 1] = x_data
    return x


def forward_map(
    s: np.ndarray,
    x_data: np.ndarray,
    x_pilot: np.ndarray,
    pilots: PilotAssignment,
    Z: ColoringMatrix,
) -> np.ndarray:
    """Noiseless useful outputs as a function of the unknowns (s, x_data).

    Each component is a degree-2 polynomial in the unknowns.
    """
    dims = pilots.dims
    x = _assemble_x(np.asarray(x_data, dtype=complex), np.asarray(x_pilot, dtype=complex), pilots)
    y_bar = build_B(Z, x, dims) @ np.asarray(s, dtype=complex)
    return y_bar[: pilots.n_useful]


def recover(
    y_target: np.ndarray,
    x_pilot: np.ndarray,
    pilots: PilotAssignment,
    Z: ColoringMatrix,
    init,
    opts: GaussNewtonOptions = GaussNewtonOptions(),
    truth=None,
) -> RecoveryResult:
    """Gauss-Newton iteration on the square system phi(s, x_data) = y_target.

    init is the starting point (s0, x_data0). Steps solve the complex
    linearization directly; a singular linearization falls back to a
    least-squares step, and each step is damped by halving until the residual
    decreases (at most max_halvings times). Convergence is declared at
    relative residual < tol; exceeding the iteration cap returns
    success=False. truth, when given as (s, x_data), is only used to report
    param_error.
    """
    dims = pilots.dims
    n_s = dims.R * dims.T_eff * dims.Q
    s = np.asarray(init[0], dtype=complex).copy()
    x_data = np.asarray(init[1], dtype=complex).copy()
    y_target = np.asarray(y_target, dtype=complex)
    scale = np.linalg.norm(y_target)
    if scale == 0.0:
        scale = 1.0

    def residual_vec(s_cur, x_cur):
        return forward_map(s_cur, x_cur, x_pilot, pilots, Z) - y_target

    res = residual_vec(s, x_data)
    res_norm = np.linalg.norm(res)
    iterations = 0
    while res_norm / scale >= opts.tol and iterations < opts.max_iterations:
        J = assemble_jacobian(Z, s, _assemble_x(x_data, x_pilot, pilots), pilots).matrix
        try:
            step = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -res, rcond=None)[0]
        factor = 1.0
        for _ in range(opts.max_halvings + 1):
            s_new = s + factor * step[:n_s]
            x_new = x_data + factor * step[n_s:]
            res_new = residual_vec(s_new, x_new)
            new_norm = np.linalg.norm(res_new)
            if new_norm < res_norm:
                break
            factor /= 2.0
        else:
            break  # no descent direction left; stop at the current iterate
        s, x_data, res, res_norm = s_new, x_new, res_new, new_norm
        iterations += 1

    rel_res = float(res_norm / scale)
    if truth is not None:
        truth_vec = np.concatenate([np.ravel(truth[0]), np.ravel(truth[1])])
        got = np.concatenate([s, x_data])
        param_error = float(np.linalg.norm(got - truth_vec) / np.linalg.norm(truth_vec))
    else:
        param_error = float("nan")
    return RecoveryResult(
        success=rel_res < opts.tol,
        residual=rel_res,
        param_error=param_error,
        iterations=iterations,
        s=s,
        x_data=x_data,
    )


def scaling_ambiguity_check(
    s: np.ndarray, x: np.ndarray, Z: ColoringMatrix, dims: Dims, seed: int = 0
) -> bool:
    """Confirm the per-antenna scaling invariance of the noiseless outputs.

    Rescaling (x_t, s_{r,t}) to (c_t x_t, s_{r,t} / c_t) for random nonzero
    c_t must leave y_bar unchanged to 1e-12 relative; this is the ambiguity
    the pilots exist to pin down.
    """
    rng = np.random.default_rng(seed)
    c = standard_complex_gaussian(rng, dims.T_eff)
    c += (np.abs(c) < 0.1) * 1.0  # keep every factor safely away from zero
    s_mat = np.asarray(s, dtype=complex).reshape(dims.R, dims.T_eff, dims.Q)
    x_mat = np.asarray(x, dtype=complex).reshape(dims.T_eff, dims.N)
    y_ref = build_B(Z, x_mat.reshape(-1), dims) @ s_mat.reshape(-1)
    x_scaled = (c[:, None] * x_mat).reshape(-1)
    s_scaled = (s_mat / c[None, :, None]).reshape(-1)
    y_scaled = build_B(Z, x_scaled, dims) @ s_scaled
    denom = np.linalg.norm(y_ref)
    if denom == 0.0:
        return True
    return bool(np.linalg.norm(y_scaled - y_ref) / denom <= 1e-12)


def _numerical_rank(M: np.ndarray) -> int:
    svals = np.linalg.svd(M, compute_uv=False)
    if svals.size == 0 or svals[0] == 0.0:
        return 0
    return int(np.sum(svals > RANK_TOL * svals[0]))


def rank_gap_demo(dims: Dims, seed: int) -> tuple[int, int]:
    """Rank of the stacked noiseless receive vectors: constant vs generic coloring.

    Draws one (s, x) pair and evaluates both colorings on it; returns the
    numerical ranks of the N x R matrices of per-antenna outputs. The generic
    coloring lifts the outputs out of the low-dimensional subspace the
    constant model confines them to.
    """
    if dims.Q != 1:
        raise InvalidConfigurationError("rank gap demo uses the constant model, so Q must be 1")
    rng = np.random.default_rng(seed)
    s = standard_complex_gaussian(rng, dims.R * dims.T_eff * dims.Q)
    x = standard_complex_gaussian(rng, dims.T_eff * dims.N)
    ranks = []
    for Z in (constant_model(dims), random_coloring(dims, seed + 1)):
        y_bar = build_B(Z, x, dims) @ s
        ranks.append(_numerical_rank(y_bar.reshape(dims.R, dims.N).T))
    return ranks[0], ranks[1]


def cluster_solutions(points, rel_tol: float = 1e-6):
    """Greedy clustering of converged parameter vectors by relative distance.

    Returns one representative per cluster; used to count distinct solutions
    across random restarts.
    """
    reps: list[np.ndarray] = []
    for p in points:
        p = np.asarray(p)
        scale = max(np.linalg.norm(p), 1.0)
        if not any(np.linalg.norm(p - r) <= rel_tol * scale for r in reps):
            reps.append(p)
    return reps
