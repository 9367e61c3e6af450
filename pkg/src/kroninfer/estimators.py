"""Estimator-style front ends around the inference pipeline."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .datasets import TUGraph, graph_to_adjacency
from .solver import SolverConfig, infer
from .validation import ValidationError, check_adjacency

__all__ = ["InitiatorEstimator", "KroneckerFeaturizer"]


def _solver_config(est):
    return SolverConfig(
        method=est.method,
        eta=est.eta,
        s=est.s,
        gamma=est.gamma,
        max_iter=est.max_iter,
        tol=est.tol,
        block_count=est.block_count,
        seed=est.seed,
    )


def _to_adjacency(item, m):
    if isinstance(item, TUGraph):
        return graph_to_adjacency(item, m)
    return check_adjacency(np.asarray(item))


class InitiatorEstimator(BaseEstimator):
    """Recover (p, X) of a Kronecker graph from a single adjacency matrix.

    Parameters mirror :class:`kroninfer.solver.SolverConfig`; `accelerate`
    switches to the randomized factorization with sampled column blocks.

    Attributes (after fit)
    ----------------------
    p_ : float
        Estimated base rate.
    X_ : (m, m) ndarray
        Estimated initiator perturbation.
    d_nnz_ : int
        Nonzeros in the fitted outlier matrix.
    n_iter_ : int
        Alternating iterations used.
    residual_ : float
        Final Frobenius residual of the fit.
    converged_ : bool
    """

    def __init__(self, m=2, method="iht", eta=1.0, s=5, gamma=None,
                 max_iter=500, tol=1e-6, block_count=None, seed=0,
                 accelerate=False):
        self.m = m
        self.method = method
        self.eta = eta
        self.s = s
        self.gamma = gamma
        self.max_iter = max_iter
        self.tol = tol
        self.block_count = block_count
        self.seed = seed
        self.accelerate = accelerate

    def fit(self, X, y=None):
        """Fit to one adjacency matrix (the sklearn X slot holds the graph)."""
        A = _to_adjacency(X, self.m)
        result = infer(A, self.m, _solver_config(self), accelerate=self.accelerate)
        self.p_ = result.p_hat
        self.X_ = result.X_hat
        self.d_nnz_ = result.d_nnz
        self.n_iter_ = result.iterations
        self.residual_ = result.final_residual
        self.converged_ = result.converged
        return self

    def _check_fitted(self):
        if not hasattr(self, "p_"):
            raise NotFittedError("call fit before using this estimator")

    def feature_vector(self):
        """p_ followed by the column-major entries of X_."""
        self._check_fitted()
        return np.concatenate([[self.p_], self.X_.flatten(order="F")])


class KroneckerFeaturizer(TransformerMixin, BaseEstimator):
    """Turn a collection of graphs into initiator-based feature rows.

    fit() learns per-column standardization statistics on the training
    collection; transform() maps any collection to rows
    [p_hat, x_1, ..., x_{m**2}], standardized unless standardize=False.
    Accepts TUGraph records or raw 0/1 adjacency matrices.
    """

    def __init__(self, m=2, standardize=True, method="iht", eta=1.0, s=5,
                 gamma=None, max_iter=500, tol=1e-6, block_count=None,
                 seed=0, accelerate=False):
        self.m = m
        self.standardize = standardize
        self.method = method
        self.eta = eta
        self.s = s
        self.gamma = gamma
        self.max_iter = max_iter
        self.tol = tol
        self.block_count = block_count
        self.seed = seed
        self.accelerate = accelerate

    def _extract(self, graphs):
        rows = []
        for item in graphs:
            A = _to_adjacency(item, self.m)
            try:
                res = infer(A, self.m, _solver_config(self),
                            accelerate=self.accelerate)
                rows.append(np.concatenate([[res.p_hat],
                                            res.X_hat.flatten(order="F")]))
            except ValidationError:
                rows.append(np.zeros(self.m ** 2 + 1))
        if not rows:
            raise ValidationError("need at least one graph")
        return np.asarray(rows)

    def fit(self, X, y=None):
        """Learn standardization statistics from a collection of graphs."""
        feats = self._extract(X)
        self.features_ = feats
        self.mean_ = feats.mean(axis=0)
        sd = feats.std(axis=0)
        self.scale_ = np.where(sd > 0, sd, 1.0)
        return self

    def transform(self, X):
        if not hasattr(self, "mean_"):
            raise NotFittedError("call fit before transform")
        feats = self._extract(X)
        if self.standardize:
            feats = (feats - self.mean_) / self.scale_
        return feats

    def fit_transform(self, X, y=None):
        self.fit(X, y)
        feats = self.features_
        if self.standardize:
            feats = (feats - self.mean_) / self.scale_
        return feats
