"""Input checking helpers shared by the model, solver and CLI layers."""
import numpy as np

# materializing anything bigger than this is refused everywhere
MAX_DENSE_SIZE = 8192


class ValidationError(ValueError):
    """Raised when user-supplied arguments are out of contract."""


class NumericalError(RuntimeError):
    """Raised when an iterative numerical routine fails to converge."""


class ParseError(ValueError):
    """Raised when an input file cannot be parsed."""


def check_probability(p, name="p"):
    p = float(p)
    if not (0.0 < p < 1.0):
        raise ValidationError(f"{name} must lie strictly inside (0, 1), got {p}")
    return p


def check_positive_int(k, name):
    if not (np.isscalar(k) and int(k) == k and int(k) >= 1):
        raise ValidationError(f"{name} must be a positive integer, got {k!r}")
    return int(k)


def check_square_matrix(X, name="X"):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] < 1:
        raise ValidationError(f"{name} must be a square matrix, got shape {X.shape}")
    return X


def check_adjacency(A, name="A"):
    """Require a square 0/1 matrix and return it as uint8."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {A.shape}")
    vals = np.unique(A)
    if not np.isin(vals, (0, 1)).all():
        raise ValidationError(f"{name} must contain only 0/1 entries")
    return A.astype(np.uint8, copy=False)


def check_dense_size(N, what="matrix"):
    if N > MAX_DENSE_SIZE:
        raise ValidationError(
            f"refusing to materialize a {what} of side {N} (cap {MAX_DENSE_SIZE})"
        )
    return int(N)


def infer_order(N, m):
    """Return K with m**K == N, or raise if N is not an exact power of m."""
    m = check_positive_int(m, "m")
    if m < 2:
        K = 1 if N == 1 else None
    else:
        K = int(round(np.log(N) / np.log(m)))
    if K is None or m ** K != N:
        raise ValidationError(f"matrix side {N} is not a power of m={m}")
    return K


def as_rng(seed):
    """Accept an int seed or a ready Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
