"""Sparse-plus-structured regression for the initiator perturbation.

Given the denoised signal estimate S_hat, recover the m x m perturbation x
and a sparse outlier matrix d (absorbing the relabeled rows/columns) from

    minimize_{x, d}  || S_hat - Theta x - d ||_F^2  (+ gamma * ||d||_1)

by alternating an exact least squares step in x with either a hard
thresholding step (cardinality constrained) or a soft thresholding step
(l1 penalized) in d. All residuals can be restricted to a subset of
column blocks, which is what the accelerated path samples.
"""
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .denoise import denoise, estimate_p
from .linear_map import theta_apply, theta_adjoint_apply, theta_gram
from .validation import (
    ValidationError,
    check_adjacency,
    check_positive_int,
    infer_order,
)

__all__ = [
    "SolverConfig",
    "InferenceResult",
    "SolveOutput",
    "hard_threshold",
    "soft_threshold",
    "solve_ls",
    "solve_iht",
    "solve_relax",
    "infer",
]

_PINV_RCOND = 1e-12


@dataclass
class SolverConfig:
    """Knobs for the alternating solver.

    method : "iht" (hard thresholding, keeps at most 2 * s entries per
        column block) or "relax" (soft thresholding with weight gamma).
    eta : step size in (0, 1] mixing the previous outlier iterate into
        the hard thresholding update.
    s : per-block sparsity level, so the outlier budget is 2 * s * blocks.
    gamma : l1 weight for "relax"; None selects the data-driven default
        2 * sqrt(pbar * (1 - pbar)) / sqrt(N).
    block_count : number of sampled column blocks; None means all N.
    """

    method: str = "iht"
    eta: float = 1.0
    s: int = 5
    gamma: float | None = None
    max_iter: int = 500
    tol: float = 1e-6
    block_count: int | None = None
    seed: int = 0

    def validate(self):
        method = str(self.method).lower()
        if method not in ("iht", "relax"):
            raise ValidationError(f"method must be 'iht' or 'relax', got {self.method!r}")
        self.method = method
        if not (0.0 < float(self.eta) <= 1.0):
            raise ValidationError(f"eta must lie in (0, 1], got {self.eta}")
        if int(self.s) != self.s or self.s < 0:
            raise ValidationError(f"s must be a non-negative integer, got {self.s}")
        if self.gamma is not None and float(self.gamma) < 0:
            raise ValidationError(f"gamma must be non-negative, got {self.gamma}")
        if method == "relax" and self.gamma is not None and float(self.gamma) == 0.0:
            raise ValidationError("relax requires gamma > 0 (or None for the default)")
        check_positive_int(self.max_iter, "max_iter")
        if float(self.tol) <= 0:
            raise ValidationError(f"tol must be positive, got {self.tol}")
        if self.block_count is not None:
            check_positive_int(self.block_count, "block_count")
        return self


@dataclass
class InferenceResult:
    """Outcome of a full denoise-and-solve run."""

    p_hat: float
    X_hat: np.ndarray
    d_nnz: int
    iterations: int
    final_residual: float
    wall_time: float
    converged: bool = True


@dataclass
class SolveOutput:
    """Raw solver trace, before timing and base-rate estimation."""

    x_hat: np.ndarray
    d_nnz: int
    iterations: int
    final_residual: float
    converged: bool
    objective: np.ndarray = field(repr=False, default=None)


def hard_threshold(v, k):
    """Keep the k entries of largest magnitude, zeroing the rest.

    Ties at the cutoff magnitude are resolved in favor of lower flat
    indices. k = 0 zeroes everything; k >= v.size copies v.
    """
    v = np.asarray(v, dtype=float)
    if int(k) != k or k < 0:
        raise ValidationError(f"k must be a non-negative integer, got {k}")
    k = int(k)
    if k == 0:
        return np.zeros_like(v)
    if k >= v.size:
        return v.copy()
    mag = np.abs(v).ravel()
    cut = np.partition(mag, mag.size - k)[mag.size - k]
    keep = mag > cut
    short = k - int(keep.sum())
    if short > 0:
        # fill remaining slots with the lowest-index ties at the cutoff
        keep[np.flatnonzero(mag == cut)[:short]] = True
    out = np.zeros_like(v)
    mask = keep.reshape(v.shape)
    out[mask] = v[mask]
    return out


def soft_threshold(v, gamma):
    """Exact minimizer of ||r - d||^2 + gamma * ||d||_1 at r = v.

    Shrinks each entry toward zero by gamma / 2; magnitudes at or below
    gamma / 2 vanish. gamma = 0 is the identity.
    """
    v = np.asarray(v, dtype=float)
    if gamma < 0:
        raise ValidationError(f"gamma must be non-negative, got {gamma}")
    return np.sign(v) * np.maximum(np.abs(v) - gamma / 2.0, 0.0)


def solve_ls(T, p, m, K, cols=None):
    """Least squares initiator fit to a target matrix of column blocks.

    Solves min_x || T - Theta x ||_F^2 over the selected blocks through
    the pseudoinverse of the block-restricted Gram matrix (cutoff 1e-12
    relative).
    """
    G = theta_gram(p, m, K, cols=cols)
    Ginv = np.linalg.pinv(G, rcond=_PINV_RCOND)
    rhs = theta_adjoint_apply(T, p, m, K, cols=cols)
    return (Ginv @ rhs.flatten(order="F")).reshape(m, m, order="F")


def _alternate(S_cols, p, m, K, config, cols):
    cfg = config.validate()
    N = m ** K
    b = S_cols.shape[1]
    gamma = cfg.gamma
    if gamma is None:
        pbar = p ** K
        gamma = 2.0 * np.sqrt(pbar * (1.0 - pbar)) / np.sqrt(N)
    G = theta_gram(p, m, K, cols=cols)
    Ginv = np.linalg.pinv(G, rcond=_PINV_RCOND)
    D = np.zeros_like(S_cols)
    x = np.zeros((m, m))
    budget = 2 * cfg.s * b
    objective = []
    converged = False
    it = 0

    def record(R, D):
        fid = np.linalg.norm(R - D) ** 2
        if cfg.method == "relax":
            fid += gamma * np.abs(D).sum()
        objective.append(fid)

    for it in range(1, cfg.max_iter + 1):
        R = S_cols - theta_apply(x, p, K, cols=cols)
        record(R, D)  # objective of the previous iterate
        if cfg.method == "iht":
            D = hard_threshold((1.0 - cfg.eta) * D + cfg.eta * R, budget)
        else:
            D = soft_threshold(R, gamma)
        rhs = theta_adjoint_apply(S_cols - D, p, m, K, cols=cols)
        x_new = (Ginv @ rhs.flatten(order="F")).reshape(m, m, order="F")
        step = np.linalg.norm(x_new - x) / max(np.linalg.norm(x_new), 1e-300)
        x = x_new
        if step < cfg.tol:
            converged = True
            break
    R = S_cols - theta_apply(x, p, K, cols=cols)
    record(R, D)
    return SolveOutput(
        x_hat=x,
        d_nnz=int(np.count_nonzero(D)),
        iterations=it,
        final_residual=float(np.linalg.norm(R - D)),
        converged=converged,
        objective=np.asarray(objective),
    )


def _check_target(S_cols, m, K, cols):
    S_cols = np.asarray(S_cols, dtype=float)
    N = m ** K
    if cols is not None:
        cols = np.asarray(cols, dtype=np.int64)
    want = N if cols is None else cols.size
    if S_cols.shape != (N, want):
        raise ValidationError(f"target must have shape ({N}, {want}), got {S_cols.shape}")
    return S_cols, cols


def solve_iht(S_cols, p, m, K, config=None, cols=None):
    """Alternating hard-thresholding solve against a signal estimate."""
    config = replace(config or SolverConfig(), method="iht")
    S_cols, cols = _check_target(S_cols, m, K, cols)
    return _alternate(S_cols, p, m, K, config, cols)


def solve_relax(S_cols, p, m, K, config=None, cols=None):
    """Alternating soft-thresholding (l1 relaxation) solve."""
    config = replace(config or SolverConfig(), method="relax")
    S_cols, cols = _check_target(S_cols, m, K, cols)
    return _alternate(S_cols, p, m, K, config, cols)


def infer(A, m, config=None, accelerate=False):
    """Full pipeline: estimate p, denoise, then solve for the perturbation.

    Parameters
    ----------
    A : (N, N) array_like
        Observed 0/1 adjacency matrix with N = m**K.
    m : int
        Initiator side length.
    config : SolverConfig, optional
    accelerate : bool
        Use the randomized factorization and restrict the solve to
        config.block_count sampled column blocks (default 100).

    Returns
    -------
    InferenceResult
    """
    cfg = (config or SolverConfig()).validate()
    A = check_adjacency(A)
    N = A.shape[0]
    K = infer_order(N, m)
    t0 = time.perf_counter()
    p_hat, pbar_hat = estimate_p(A, K)
    dn = denoise(A, m, K, method="randomized" if accelerate else "exact", seed=cfg.seed)
    block_count = cfg.block_count
    if block_count is None:
        block_count = 100 if accelerate else N
    block_count = min(block_count, N)
    if block_count < N:
        rng = np.random.default_rng(cfg.seed + 12345)
        cols = np.sort(rng.choice(N, size=block_count, replace=False))
        S_cols = dn.restrict(cols)
    else:
        cols = None
        S_cols = dn.matrix()
    run_cfg = replace(cfg)
    if run_cfg.gamma is None:
        run_cfg.gamma = 2.0 * np.sqrt(pbar_hat * (1.0 - pbar_hat)) / np.sqrt(N)
    out = _alternate(S_cols, p_hat, m, K, run_cfg, cols)
    wall = time.perf_counter() - t0
    return InferenceResult(
        p_hat=p_hat,
        X_hat=out.x_hat,
        d_nnz=out.d_nnz,
        iterations=out.iterations,
        final_residual=out.final_residual,
        wall_time=wall,
        converged=out.converged,
    )
