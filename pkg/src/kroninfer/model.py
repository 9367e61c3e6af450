"""Kronecker random graph model: initiator construction, sampling, relabeling.

The generative chain is

    P1 = p + X / sqrt(N)          (m x m initiator, N = m**K)
    P  = P1 (x) P1 (x) ... (x) P1 (K Kronecker factors)
    A[i, j] ~ Bernoulli(P[i, j])  independently
    A       -> relabeled by a sparse random permutation

Entry (i, j) of the K-fold power equals the product of initiator entries
indexed by the base-m digits of i and j, which is what the digit-based
operators in :mod:`kroninfer.linear_map` exploit.
"""
import numpy as np

from .validation import (
    ValidationError,
    as_rng,
    check_adjacency,
    check_dense_size,
    check_positive_int,
    check_probability,
    check_square_matrix,
)

__all__ = [
    "build_initiator",
    "kronecker_power",
    "sample_adjacency",
    "random_sparse_permutation",
    "apply_permutation",
    "save_adjacency",
    "load_adjacency",
    "save_edge_list",
    "load_edge_list",
]


def build_initiator(p, X, N):
    """Return the initiator matrix P1 = p + X / sqrt(N).

    Parameters
    ----------
    p : float
        Base edge rate, strictly inside (0, 1).
    X : (m, m) array_like
        Perturbation around the flat initiator.
    N : int
        Side length of the final graph; only its square root enters here.

    Returns
    -------
    (m, m) ndarray
        Entrywise probabilities; every entry must land strictly in (0, 1).
    """
    p = check_probability(p)
    X = check_square_matrix(X)
    N = check_positive_int(N, "N")
    P1 = p + X / np.sqrt(N)
    if P1.min() <= 0.0 or P1.max() >= 1.0:
        raise ValidationError(
            f"initiator entries must lie in (0, 1); got range "
            f"[{P1.min():.4g}, {P1.max():.4g}]"
        )
    return P1


def kronecker_power(P1, K):
    """K-fold Kronecker power of the initiator.

    The result has side m**K and entry (i, j) equal to the product
    prod_l P1[d_l(i), d_l(j)] over the base-m digits d_l.
    """
    P1 = check_square_matrix(P1, "P1")
    K = check_positive_int(K, "K")
    m = P1.shape[0]
    check_dense_size(m ** K, "Kronecker power")
    P = P1.copy()
    for _ in range(K - 1):
        P = np.kron(P, P1)
    return P


def sample_adjacency(P, seed=None, directed=True):
    """Draw an adjacency matrix with independent Bernoulli entries.

    Parameters
    ----------
    P : (N, N) array_like
        Entrywise edge probabilities in [0, 1].
    seed : int or numpy Generator, optional
        Same seed gives an identical sample.
    directed : bool
        If False only entries with i <= j are drawn (diagonal once) and the
        strict upper triangle is mirrored below.

    Returns
    -------
    (N, N) uint8 ndarray
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValidationError(f"P must be square, got shape {P.shape}")
    if P.min() < 0.0 or P.max() > 1.0:
        raise ValidationError("entries of P must be probabilities in [0, 1]")
    rng = as_rng(seed)
    A = (rng.random(P.shape) < P).astype(np.uint8)
    if not directed:
        A = np.triu(A) + np.triu(A, 1).T
    return A


def random_sparse_permutation(N, rho, seed=None):
    """Permutation of range(N) that moves at most floor(rho * N) points.

    The displaced points are a uniform subset of size k = floor(rho * N),
    deranged among themselves, so none of the k selected points stays fixed
    once k >= 2. For k < 2 the identity is returned (a single point cannot
    move on its own).
    """
    N = check_positive_int(N, "N")
    rho = float(rho)
    if not (0.0 <= rho <= 1.0):
        raise ValidationError(f"rho must lie in [0, 1], got {rho}")
    rng = as_rng(seed)
    perm = np.arange(N)
    k = int(np.floor(rho * N))
    if k < 2:
        return perm
    chosen = rng.choice(N, size=k, replace=False)
    # rejection sample a derangement of the chosen subset
    while True:
        shuffled = rng.permutation(chosen)
        if not np.any(shuffled == chosen):
            break
    perm[chosen] = shuffled
    return perm


def apply_permutation(A, perm):
    """Relabel nodes so row/column i of the output is row/column perm^-1(i).

    Output[perm[i], perm[j]] equals input[i, j].
    """
    A = np.asarray(A)
    perm = np.asarray(perm)
    N = A.shape[0]
    if perm.shape != (N,) or not np.array_equal(np.sort(perm), np.arange(N)):
        raise ValidationError("perm must be a permutation of range(N)")
    inv = np.argsort(perm)
    return A[np.ix_(inv, inv)]


def save_adjacency(A, path):
    """Write an adjacency matrix in the binary container format.

    Layout: 8-byte little-endian unsigned side length N, then N*N bytes of
    0/1 values in row-major order.
    """
    A = check_adjacency(A)
    N = A.shape[0]
    with open(path, "wb") as fh:
        fh.write(np.uint64(N).tobytes())
        fh.write(np.ascontiguousarray(A, dtype=np.uint8).tobytes())


def load_adjacency(path):
    """Read a matrix written by :func:`save_adjacency`."""
    with open(path, "rb") as fh:
        head = fh.read(8)
        if len(head) != 8:
            raise ValidationError(f"{path}: truncated header")
        N = int(np.frombuffer(head, dtype="<u8")[0])
        body = fh.read()
    if len(body) != N * N:
        raise ValidationError(
            f"{path}: expected {N * N} payload bytes, found {len(body)}"
        )
    A = np.frombuffer(body, dtype=np.uint8).reshape(N, N)
    return check_adjacency(A, name=path)


def save_edge_list(A, path, header=None):
    """Write edges as 1-based "i j" lines, one directed edge per line."""
    A = check_adjacency(A)
    rows, cols = np.nonzero(A)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(header.rstrip("\n") + "\n")
        for i, j in zip(rows, cols):
            fh.write(f"{i + 1} {j + 1}\n")


def load_edge_list(path, N):
    """Rebuild an N x N adjacency matrix from a 1-based edge list file."""
    N = check_positive_int(N, "N")
    A = np.zeros((N, N), dtype=np.uint8)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValidationError(f"{path}:{lineno}: expected 'i j', got {line!r}")
            i, j = int(parts[0]), int(parts[1])
            if not (1 <= i <= N and 1 <= j <= N):
                raise ValidationError(f"{path}:{lineno}: node id out of range")
            A[i - 1, j - 1] = 1
    return A
