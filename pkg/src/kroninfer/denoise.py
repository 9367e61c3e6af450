"""Spectral denoising of centered adjacency matrices.

The centered, scaled adjacency (A - mean) / sqrt(N) decomposes into a low
rank signal plus a noise matrix whose singular values follow a quarter
circle law on [0, 2 * sqrt(pbar * (1 - pbar))]. Signal components whose
empirical singular values emerge above that bulk edge are kept, after
shrinking each value to undo the noise inflation; everything else is set
to zero.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, svds

from .linear_map import rank_bound
from .validation import (
    NumericalError,
    ValidationError,
    as_rng,
    check_adjacency,
    check_positive_int,
    infer_order,
)

__all__ = [
    "estimate_p",
    "center_adjacency",
    "truncated_svd",
    "randomized_svd",
    "shrink_singular",
    "denoise",
    "DenoiseResult",
    "quarter_circle_density",
    "quarter_circle_cdf",
    "spike_prediction",
    "shrinkage_risk",
    "invert_spike",
    "ks_statistic",
    "SpectralModel",
]


def estimate_p(A, K):
    """Estimate the base rate from the empirical edge density.

    The grand mean of A estimates pbar = p**K, so p is the K-th root.

    Returns
    -------
    (p_hat, pbar_hat) : pair of floats

    Raises
    ------
    ValidationError
        If the matrix is all zeros or all ones, where the root is not
        informative.
    """
    A = check_adjacency(A)
    K = check_positive_int(K, "K")
    pbar = float(A.mean())
    if pbar <= 0.0 or pbar >= 1.0:
        raise ValidationError(
            f"edge density {pbar} admits no base-rate estimate (degenerate graph)"
        )
    return pbar ** (1.0 / K), pbar


def center_adjacency(A):
    """Subtract the grand mean and scale by 1 / sqrt(N).

    Returns
    -------
    (Abar, pbar_hat) : (N, N) float ndarray and the subtracted mean.
    """
    A = check_adjacency(A)
    N = A.shape[0]
    pbar = float(A.mean())
    return (A - pbar) / np.sqrt(N), pbar


def truncated_svd(M, r, seed=None, maxiter=1000, tol=1e-10):
    """Leading r singular triplets, descending, with a residual check.

    Uses Lanczos iteration with a seeded start vector so results are
    reproducible. Falls back to the dense decomposition when r is not
    strictly below min(M.shape) or when the Lanczos iteration stalls
    before converging. Each returned triplet must satisfy
    ||M v_i - s_i u_i|| <= 1e-8 * s_1, otherwise a NumericalError is
    raised.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValidationError("M must be a matrix")
    r = check_positive_int(r, "r")
    small = min(M.shape)
    if r > small:
        raise ValidationError(f"rank {r} exceeds min(M.shape) = {small}")
    if r == small:
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
        U, s, Vt = U[:, :r], s[:r], Vt[:r]
    else:
        rng = as_rng(seed)
        v0 = rng.standard_normal(small)
        try:
            U, s, Vt = svds(M, k=r, v0=v0, maxiter=maxiter, tol=tol)
        except ArpackNoConvergence:
            # clustered values can stall Lanczos; the dense path is exact
            U, s, Vt = np.linalg.svd(M, full_matrices=False)
        order = np.argsort(s)[::-1][:r]
        U, s, Vt = U[:, order], s[order], Vt[order]
    if s[0] > 0:
        resid = np.linalg.norm(M @ Vt.T - U * s, axis=0)
        if resid.max() > 1e-8 * s[0]:
            raise NumericalError(
                f"singular triplet residual {resid.max():.3e} exceeds 1e-8 * s_1"
            )
    return U, s, Vt


def randomized_svd(M, r, oversample=10, power_q=2, seed=None):
    """Randomized range-finder SVD with power iterations.

    Projects M onto the range of M @ Omega for a Gaussian test matrix
    Omega with r + oversample columns, refines the basis with power_q
    alternating passes (re-orthonormalized each time), then solves the
    small projected problem.
    """
    M = np.asarray(M, dtype=float)
    r = check_positive_int(r, "r")
    rng = as_rng(seed)
    width = min(r + int(oversample), min(M.shape))
    if width < r:
        raise ValidationError(f"rank {r} exceeds min(M.shape) = {min(M.shape)}")
    omega = rng.standard_normal((M.shape[1], width))
    Q, _ = np.linalg.qr(M @ omega)
    for _ in range(int(power_q)):
        Z, _ = np.linalg.qr(M.T @ Q)
        Q, _ = np.linalg.qr(M @ Z)
    B = Q.T @ M
    Ub, s, Vt = np.linalg.svd(B, full_matrices=False)
    return (Q @ Ub)[:, :r], s[:r], Vt[:r]


def shrink_singular(values, pbar):
    """Shrinkage map f(t) = sqrt(t**2 - 4*pbar*(1-pbar)) above the bulk edge.

    Values at or below the edge 2*sqrt(pbar*(1-pbar)) map to zero
    (strictly: only t > edge survives).
    """
    values = np.asarray(values, dtype=float)
    edge2 = 4.0 * pbar * (1.0 - pbar)
    return np.where(values ** 2 > edge2,
                    np.sqrt(np.maximum(values ** 2 - edge2, 0.0)), 0.0)


@dataclass
class DenoiseResult:
    """Rank-truncated, shrunk reconstruction of the signal matrix."""

    u: np.ndarray           # (N, r) left singular vectors
    values: np.ndarray      # raw singular values, descending
    shrunk: np.ndarray      # shrunk values, zero at or below the bulk edge
    vt: np.ndarray          # (r, N) right singular vectors
    p_hat: float
    pbar_hat: float
    method: str = field(default="exact")

    @property
    def retained(self):
        """Number of components surviving the shrinkage."""
        return int(np.count_nonzero(self.shrunk))

    def matrix(self):
        """Dense N x N reconstruction."""
        return (self.u * self.shrunk) @ self.vt

    def restrict(self, cols):
        """Columns `cols` of the reconstruction, shape (N, len(cols))."""
        return (self.u * self.shrunk) @ self.vt[:, cols]


def denoise(A, m, K=None, method="exact", seed=None, centered=False, pbar=None):
    """Denoise an adjacency matrix down to its rank-bounded signal part.

    Parameters
    ----------
    A : (N, N) array_like
        Adjacency matrix, or an already centered matrix if centered=True.
    m : int
        Initiator side; the truncation rank is (m - 1) * K + 1.
    K : int, optional
        Kronecker order; derived from N when omitted.
    method : {"exact", "randomized"}
        Exact Lanczos factorization or the randomized range finder.
    seed : int, optional
        Drives the Lanczos start vector / Gaussian test matrix.
    centered : bool
        When True, A is used as the centered matrix directly and `pbar`
        must be supplied. Intended for controlled noiseless runs.
    pbar : float, optional
        Mean edge density, only used with centered=True.

    Returns
    -------
    DenoiseResult
    """
    if method not in ("exact", "randomized"):
        raise ValidationError(f"unknown denoise method {method!r}")
    if centered:
        if pbar is None:
            raise ValidationError("centered input requires an explicit pbar")
        Abar = np.asarray(A, dtype=float)
        N = Abar.shape[0]
        K = infer_order(N, m) if K is None else check_positive_int(K, "K")
        pbar_hat = float(pbar)
        p_hat = pbar_hat ** (1.0 / K)
    else:
        A = check_adjacency(A)
        N = A.shape[0]
        K = infer_order(N, m) if K is None else check_positive_int(K, "K")
        p_hat, pbar_hat = estimate_p(A, K)
        Abar, _ = center_adjacency(A)
    r = min(rank_bound(m, K), N)
    if method == "exact":
        U, s, Vt = truncated_svd(Abar, r, seed=seed)
    else:
        U, s, Vt = randomized_svd(Abar, r, seed=seed)
    f = shrink_singular(s, pbar_hat)
    return DenoiseResult(u=U, values=s, shrunk=f, vt=Vt,
                         p_hat=p_hat, pbar_hat=pbar_hat, method=method)


def quarter_circle_density(t, pbar):
    """Density of the noise singular value law at t.

    Supported on [0, 2a] with a = sqrt(pbar * (1 - pbar)); the density is
    sqrt(4a^2 - t^2) / (pi a^2).
    """
    t = np.asarray(t, dtype=float)
    s2 = pbar * (1.0 - pbar)
    inside = (t >= 0) & (t <= 2.0 * np.sqrt(s2))
    dens = np.where(inside, np.sqrt(np.maximum(4.0 * s2 - t ** 2, 0.0)) / (s2 * np.pi), 0.0)
    return dens if dens.ndim else float(dens)


def quarter_circle_cdf(t, pbar):
    """Distribution function of the quarter circle law, clamped to [0, 1]."""
    t = np.asarray(t, dtype=float)
    s2 = pbar * (1.0 - pbar)
    a = np.sqrt(s2)
    tc = np.clip(t, 0.0, 2.0 * a)
    cdf = (tc * np.sqrt(np.maximum(4.0 * s2 - tc ** 2, 0.0)) / 2.0
           + 2.0 * s2 * np.arcsin(tc / (2.0 * a))) / (s2 * np.pi)
    return cdf if cdf.ndim else float(cdf)


def spike_prediction(ell, pbar):
    """Predicted singular value location and squared alignment for a spike.

    A signal component of strength ell (its noiseless singular value in
    units of a = sqrt(pbar * (1 - pbar))) emerges from the bulk only for
    ell > 1, at location a * (ell + 1/ell), with squared alignment
    1 - ell**-2 between the empirical and true singular vectors on each
    side. At or below ell = 1 it sticks to the bulk edge with vanishing
    alignment.
    """
    ell = np.asarray(ell, dtype=float)
    a = np.sqrt(pbar * (1.0 - pbar))
    above = ell > 1.0
    safe = np.where(above, ell, 1.0)
    loc = np.where(above, a * (safe + 1.0 / safe), 2.0 * a)
    align = np.where(above, 1.0 - 1.0 / safe ** 2, 0.0)
    if loc.ndim:
        return loc, align
    return float(loc), float(align)


def shrinkage_risk(t, pbar):
    """Asymptotic per-component squared error of the shrinkage rule.

    For a component of noiseless strength t the limit risk is
    a^2 * (2 - a^2 / t^2) when t > a, and t^2 when the component is too
    weak to recover (t <= a), with a^2 = pbar * (1 - pbar).
    """
    t = np.asarray(t, dtype=float)
    s2 = pbar * (1.0 - pbar)
    with np.errstate(divide="ignore"):
        strong = s2 * (2.0 - s2 / np.where(t > 0, t ** 2, np.inf))
    risk = np.where(t > np.sqrt(s2), strong, t ** 2)
    return risk if risk.ndim else float(risk)


def invert_spike(sigma, pbar):
    """Recover the signal strength ell from an observed spike location.

    Inverts location = a * (ell + 1/ell) for ell >= 1. Observations at or
    below the bulk edge (sigma <= 2a) return 1.0, the boundary value.
    """
    sigma = np.asarray(sigma, dtype=float)
    a = np.sqrt(pbar * (1.0 - pbar))
    y = sigma / a
    t = y ** 2 - 2.0  # equals ell^2 + ell^-2
    disc = np.maximum(t ** 2 - 4.0, 0.0)
    ell2 = (t + np.sqrt(disc)) / 2.0
    ell = np.where(y > 2.0, np.sqrt(np.maximum(ell2, 1.0)), 1.0)
    return ell if ell.ndim else float(ell)


def ks_statistic(values, pbar):
    """Kolmogorov-Smirnov distance of a sample to the quarter circle law."""
    values = np.sort(np.asarray(values, dtype=float))
    n = values.size
    if n == 0:
        raise ValidationError("need at least one value")
    cdf = quarter_circle_cdf(values, pbar)
    hi = np.abs(np.arange(1, n + 1) / n - cdf).max()
    lo = np.abs(np.arange(0, n) / n - cdf).max()
    return float(max(hi, lo))


@dataclass
class SpectralModel:
    """Quarter circle bulk plus spike predictions at a given edge density."""

    pbar: float

    def __post_init__(self):
        if not (0.0 < self.pbar < 1.0):
            raise ValidationError(f"pbar must lie in (0, 1), got {self.pbar}")

    @property
    def edge(self):
        return 2.0 * np.sqrt(self.pbar * (1.0 - self.pbar))

    def density(self, t):
        return quarter_circle_density(t, self.pbar)

    def cdf(self, t):
        return quarter_circle_cdf(t, self.pbar)

    def spike(self, ell):
        return spike_prediction(ell, self.pbar)

    def risk(self, t):
        return shrinkage_risk(t, self.pbar)

    def invert(self, sigma):
        return invert_spike(sigma, self.pbar)

    def ks(self, values):
        return ks_statistic(values, self.pbar)
