"""Digit-indexed linear operator connecting the initiator to the signal matrix.

With N = m**K and d_l(i) the l-th base-m digit of i (l = 0 least
significant), the expected centered adjacency carries the rank-deficient
signal

    S[i, j] = (p**(K-1) / N) * sum_l X[d_l(i), d_l(j)].

The map vec(X) -> vec(S) (both column-major) is linear; call its matrix
Theta (N^2 x m^2). Theta is never materialized here: applications,
adjoints and Gram matrices are computed from digit tables in O(N*K) or
O(N*b*K) work, optionally restricted to a subset of columns of S (each
column of S is one contiguous block of vec(S)).
"""
import numpy as np

from .validation import (
    ValidationError,
    check_dense_size,
    check_positive_int,
    check_probability,
    check_square_matrix,
)

__all__ = [
    "digit_table",
    "rank_bound",
    "build_signal",
    "build_signal_recursive",
    "theta_row",
    "theta_apply",
    "theta_adjoint_apply",
    "theta_gram",
    "linearized_probability",
    "signal_spectrum",
]

# largest side allowed for the factored spectrum routine (tall-skinny QR only)
_MAX_FACTORED_SIZE = 131072


def digit_table(m, K):
    """Table of base-m digits: out[i, l] = d_l(i) for i in range(m**K)."""
    m = check_positive_int(m, "m")
    K = check_positive_int(K, "K")
    idx = np.arange(m ** K)
    out = np.empty((m ** K, K), dtype=np.int64)
    for l in range(K):
        out[:, l] = idx % m
        idx = idx // m
    return out


def rank_bound(m, K):
    """Upper bound (m - 1) * K + 1 on the rank of the signal matrix."""
    m = check_positive_int(m, "m")
    K = check_positive_int(K, "K")
    return (m - 1) * K + 1


def _scale(p, m, K):
    return p ** (K - 1) / m ** K


def _check_cols(cols, N):
    cols = np.asarray(cols, dtype=np.int64)
    if cols.ndim != 1 or cols.size == 0:
        raise ValidationError("cols must be a non-empty 1-d index array")
    if cols.min() < 0 or cols.max() >= N:
        raise ValidationError(f"cols must index into range({N})")
    return cols


def build_signal(p, X, K):
    """Signal matrix S in closed form via tensor broadcasting.

    Equivalent to summing, over digit positions l, the Kronecker product
    with X placed at position l and all-ones factors elsewhere, scaled by
    p**(K-1) / N.
    """
    p = check_probability(p)
    X = check_square_matrix(X)
    K = check_positive_int(K, "K")
    m = X.shape[0]
    N = check_dense_size(m ** K, "signal matrix")
    t = np.zeros((m,) * (2 * K))
    for l in range(K):
        # digit l of the row index lives on tensor axis K-1-l, column on 2K-1-l
        shape = [1] * (2 * K)
        shape[K - 1 - l] = m
        shape[2 * K - 1 - l] = m
        t = t + X.reshape(shape)
    return t.reshape(N, N) * _scale(p, m, K)


def build_signal_recursive(p, X, K):
    """Signal matrix built by the order-k recursion.

    S_1 = X / N and, for k >= 2,

        S_k = (p**(k-1) / N) * ones (x) X + p * S_{k-1} (x) ones_m

    where the first ones block has side m**(k-1). The final S_K matches
    :func:`build_signal`.
    """
    p = check_probability(p)
    X = check_square_matrix(X)
    K = check_positive_int(K, "K")
    m = X.shape[0]
    N = check_dense_size(m ** K, "signal matrix")
    S = X / N
    for k in range(2, K + 1):
        ones_big = np.ones((m ** (k - 1), m ** (k - 1)))
        S = (p ** (k - 1) / N) * np.kron(ones_big, X) + p * np.kron(S, np.ones((m, m)))
    return S


def theta_row(p, m, K, i, j):
    """Row of Theta for matrix entry (i, j), with i and j 1-based.

    Returns a length m**2 vector laid out column-major over the initiator
    entry (u, v): component u + m*v holds (p**(K-1)/N) times the number of
    digit positions l with d_l(i-1) = u and d_l(j-1) = v.
    """
    p = check_probability(p)
    m = check_positive_int(m, "m")
    K = check_positive_int(K, "K")
    N = m ** K
    i = check_positive_int(i, "i")
    j = check_positive_int(j, "j")
    if i > N or j > N:
        raise ValidationError(f"indices must be <= {N}")
    counts = np.zeros((m, m))
    ii, jj = i - 1, j - 1
    for _ in range(K):
        counts[ii % m, jj % m] += 1
        ii //= m
        jj //= m
    return counts.flatten(order="F") * _scale(p, m, K)


def theta_apply(x, p, K, cols=None):
    """Apply Theta to vec(x), returned in matrix form.

    Parameters
    ----------
    x : (m, m) array_like
    p : float
    K : int
    cols : 1-d index array, optional
        Column blocks of the output to compute. None means all of them,
        which materializes the full N x N signal.

    Returns
    -------
    (N, b) ndarray
        Column j of the result is column cols[j] of the signal matrix for
        initiator perturbation x.
    """
    x = check_square_matrix(x, "x")
    p = check_probability(p)
    K = check_positive_int(K, "K")
    m = x.shape[0]
    N = m ** K
    dig = digit_table(m, K)
    if cols is None:
        check_dense_size(N, "signal matrix")
        cols = np.arange(N)
    else:
        cols = _check_cols(cols, N)
    acc = np.zeros((N, cols.size))
    for l in range(K):
        acc += x[dig[:, l]][:, dig[cols, l]]
    return acc * _scale(p, m, K)


def theta_adjoint_apply(R, p, m, K, cols=None):
    """Apply Theta^T to vec(R), returned as an m x m matrix.

    R holds column blocks of an N x N matrix: column t of R is column
    cols[t] of that matrix (all columns when cols is None).
    """
    R = np.asarray(R, dtype=float)
    p = check_probability(p)
    m = check_positive_int(m, "m")
    K = check_positive_int(K, "K")
    N = m ** K
    if cols is None:
        cols = np.arange(N)
    else:
        cols = _check_cols(cols, N)
    if R.shape != (N, cols.size):
        raise ValidationError(f"R must have shape ({N}, {cols.size}), got {R.shape}")
    dig = digit_table(m, K)
    out = np.zeros((m, m))
    for l in range(K):
        # aggregate rows by their l-th digit: (m, b)
        T = R.reshape(-1, m, m ** l, R.shape[1]).sum(axis=(0, 2))
        acc = np.zeros((m, m))
        np.add.at(acc, dig[cols, l], T.T)  # acc[v, u] += sum over cols with d_l = v
        out += acc.T
    return out * _scale(p, m, K)


def theta_gram(p, m, K, cols=None):
    """Gram matrix Theta^T Theta, optionally restricted to column blocks.

    Entries are indexed column-major, G[u + m*v, u' + m*v']. Computed from
    joint digit statistics of the selected columns: positions l with equal
    digits contribute through the diagonal (u = u') term, distinct pairs
    (l, l') through a dense term. Cost is O(b * K^2 * m^2), independent
    of N.
    """
    p = check_probability(p)
    m = check_positive_int(m, "m")
    K = check_positive_int(K, "K")
    N = m ** K
    if cols is None:
        cols = np.arange(N)
    else:
        cols = _check_cols(cols, N)
    db = digit_table(m, K)[cols]
    b = cols.size
    onehot = np.zeros((b, K, m))
    onehot[np.arange(b)[:, None], np.arange(K)[None, :], db] = 1.0
    # J[l, l', v, v'] = #{selected j : d_l(j) = v and d_l'(j) = v'}
    J = np.einsum("jlv,jkw->lkvw", onehot, onehot)
    same = np.einsum("llvw->vw", J)
    off = J.sum(axis=(0, 1)) - same
    theta2 = _scale(p, m, K) ** 2
    G = np.zeros((m * m, m * m))
    for u in range(m):
        for up in range(m):
            for v in range(m):
                for vp in range(m):
                    val = (N / m ** 2) * off[v, vp]
                    if u == up:
                        val += (N / m) * same[v, vp]
                    G[u + m * v, up + m * vp] = theta2 * val
    return G


def linearized_probability(p, X, K):
    """First-order expansion p**K + sqrt(N) * S of the Kronecker power.

    The entrywise gap to the exact power is O(log(N) / N) for fixed p
    and X.
    """
    p = check_probability(p)
    X = check_square_matrix(X)
    K = check_positive_int(K, "K")
    N = X.shape[0] ** K
    return p ** K + np.sqrt(N) * build_signal(p, X, K)


def signal_spectrum(p, X, K):
    """All candidate singular values of the signal matrix, descending.

    Uses the rank-m*K factorization S = A @ B.T whose columns are
    Kronecker products of singular vectors of X with all-ones blocks, so
    only two tall-skinny QR factorizations and one small SVD are needed.
    Works far past the dense materialization cap. Values beyond the
    returned length are exactly zero.
    """
    p = check_probability(p)
    X = check_square_matrix(X)
    K = check_positive_int(K, "K")
    m = X.shape[0]
    N = m ** K
    if N > _MAX_FACTORED_SIZE:
        raise ValidationError(f"side {N} exceeds factored-spectrum cap")
    u, s, vt = np.linalg.svd(X)
    scale = _scale(p, m, K)
    cols_a, cols_b = [], []
    for l in range(K):
        left = np.ones(m ** l)
        right = np.ones(m ** (K - l - 1))
        for i in range(m):
            if s[i] == 0.0:
                continue
            cols_a.append(scale * s[i] * np.kron(np.kron(left, u[:, i]), right))
            cols_b.append(np.kron(np.kron(left, vt[i]), right))
    if not cols_a:
        return np.zeros(1)
    A = np.array(cols_a).T
    B = np.array(cols_b).T
    Ra = np.linalg.qr(A, mode="r")
    Rb = np.linalg.qr(B, mode="r")
    return np.linalg.svd(Ra @ Rb.T, compute_uv=False)
