"""Local RBF and rational RBF interpolants on a single patch."""
from dataclasses import dataclass

import numpy as np

from .eigensolve import (EigenResult, build_pencil, smallest_eigpair_dacg,
                         smallest_eigpair_dense)
from .errors import DenominatorNearZero, ZeroFunctionValue
from .kernels import KernelSpec, cholesky, kernel_matrix, solve

DENOMINATOR_GUARD = 1e-12


def _as_nodes(nodes):
    X = np.asarray(nodes, dtype=float).reshape(-1, 3)
    if X.shape[0] == 0:
        raise ValueError("a local fit needs at least one node")
    return X


@dataclass
class LocalRBF:
    nodes: np.ndarray
    coef: np.ndarray
    kernel: KernelSpec

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = kernel_matrix(self.kernel, x.reshape(-1, 3), self.nodes) @ self.coef
        return out if x.ndim > 1 else float(out[0])


@dataclass
class LocalRRBF:
    """Ratio of two kernel expansions on the same nodes."""

    nodes: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    kernel: KernelSpec
    eig: EigenResult = None

    @property
    def lam(self):
        return None if self.eig is None else self.eig.value

    def parts(self, x):
        """Numerator and denominator expansions at the rows of x."""
        K = kernel_matrix(self.kernel, np.asarray(x, dtype=float).reshape(-1, 3),
                          self.nodes)
        return K @ self.alpha, K @ self.beta

    def evaluate(self, x):
        """Values and a mask of points where the denominator guard holds.

        Guarded-out entries are NaN.
        """
        num, den = self.parts(x)
        ok = np.abs(den) >= DENOMINATOR_GUARD * np.linalg.norm(self.beta)
        val = np.full(num.shape, np.nan)
        val[ok] = num[ok] / den[ok]
        return val, ok

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        val, ok = self.evaluate(x)
        if not ok.all():
            bad = np.reshape(x, (-1, 3))[np.argmin(ok)]
            raise DenominatorNearZero(f"denominator expansion vanishes near {bad}",
                                      location=bad)
        return val if x.ndim > 1 else float(val[0])


def fit_rbf_local(nodes, values, kernel, factor=None, patch=None):
    """Solve A alpha = f by Cholesky."""
    X = _as_nodes(nodes)
    f = np.asarray(values, dtype=float).ravel()
    if factor is None:
        factor = cholesky(kernel_matrix(kernel, X), patch=patch)
    return LocalRBF(X, solve(factor, f), kernel)


def fit_rrbf_local(nodes, values, kernel, eig_method="dacg", tol=1e-8,
                   max_iter=500, factor=None, patch=None):
    """Rational fit: q is the smallest eigenvector of the pencil, p = f * q.

    One Cholesky factor of the kernel matrix serves the pencil and both
    coefficient systems.
    """
    X = _as_nodes(nodes)
    f = np.asarray(values, dtype=float).ravel()
    if np.any(f == 0):
        raise ZeroFunctionValue("rational fit needs nonzero data values", patch=patch)
    if factor is None:
        factor = cholesky(kernel_matrix(kernel, X), patch=patch)
    pencil = build_pencil(None, f, factor=factor, patch=patch)
    if eig_method == "dense":
        eig = smallest_eigpair_dense(pencil)
    elif eig_method == "dacg":
        eig = smallest_eigpair_dacg(pencil, tol=tol, max_iter=max_iter)
    else:
        raise ValueError(f"unknown eigensolver {eig_method!r}")
    q = eig.vector
    coef = solve(factor, np.stack([f * q, q], axis=1))
    return LocalRRBF(X, coef[:, 0], coef[:, 1], kernel, eig)


def eval_rbf(fit, x):
    return fit(x)


def eval_rrbf(fit, x):
    return fit(x)
