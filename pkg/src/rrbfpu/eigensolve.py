"""Smallest eigenpair of the rational-fit pencil (Lam, Theta).

With D = diag(f) and s = ||f||^2 the pencil is

    Lam   = D A^{-1} D / s + A^{-1}
    Theta = D D / s + I

Lam is applied through a cached Cholesky factor of A; Theta is diagonal.
The iterative solver minimizes the Rayleigh quotient q'Lam q / q'Theta q by
nonlinear conjugate gradients (Polak-Ribiere) with an exact line search over
span{q, p}, which is the first step of a deflation-accelerated CG scheme.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import EigenSolverError, ZeroFunctionValue
from .kernels import cholesky, solve

DENSE_THRESHOLD = 2000


class Pencil:
    """Operators of the pencil for kernel matrix A and data values f."""

    def __init__(self, A, f, factor=None, patch=None):
        f = np.asarray(f, dtype=float).ravel()
        if np.any(f == 0):
            raise ZeroFunctionValue("rational fit needs nonzero data values",
                                    patch=patch)
        self.size = f.size
        self.factor = cholesky(A, patch=patch) if factor is None else factor
        self.f = f
        self.scaled = f / np.linalg.norm(f)
        self.theta_diag = 1.0 + self.scaled ** 2

    def apply_lambda(self, q):
        q = np.asarray(q, dtype=float)
        d = self.scaled if q.ndim == 1 else self.scaled[:, None]
        both = solve(self.factor, np.stack([d * q, q], axis=-1))
        return d * both[..., 0] + both[..., 1]

    def apply_theta(self, q):
        q = np.asarray(q, dtype=float)
        return (self.theta_diag if q.ndim == 1 else self.theta_diag[:, None]) * q

    def dense(self):
        """Explicit (Lam, Theta) matrices."""
        Ainv = solve(self.factor, np.eye(self.size))
        Ainv = 0.5 * (Ainv + Ainv.T)
        d = self.scaled
        lam = d[:, None] * Ainv * d[None, :] + Ainv
        return lam, np.diag(self.theta_diag)


def build_pencil(A, f, factor=None, patch=None):
    return Pencil(A, f, factor=factor, patch=patch)


@dataclass
class EigenResult:
    value: float
    vector: np.ndarray
    iterations: int
    residual: float
    method: str
    converged: bool = True
    history: list = field(default_factory=list, repr=False)


def _normalize(pencil, q):
    q = q / np.sqrt(q @ pencil.apply_theta(q))
    # deterministic sign
    return -q if q.sum() < 0 else q


def _residual(pencil, q, value, lq=None):
    lq = pencil.apply_lambda(q) if lq is None else lq
    return float(np.linalg.norm(lq - value * pencil.apply_theta(q)) / np.linalg.norm(lq))


def smallest_eigpair_dense(pencil):
    """Exact smallest eigenpair via the symmetric reduction by Theta^{1/2}."""
    lam, _ = pencil.dense()
    root = np.sqrt(pencil.theta_diag)
    reduced = lam / root[:, None] / root[None, :]
    w, v = np.linalg.eigh(0.5 * (reduced + reduced.T))
    q = _normalize(pencil, v[:, 0] / root)
    value = float(w[0])
    return EigenResult(value, q, 0, _residual(pencil, q, value), "dense")


def smallest_eigpair_dacg(pencil, tol=1e-8, max_iter=500, x0=None,
                          dense_threshold=DENSE_THRESHOLD):
    """Rayleigh-quotient CG for the smallest eigenpair.

    Falls back to the dense solver when `max_iter` is exhausted and the
    pencil order is at most `dense_threshold`; raises EigenSolverError
    otherwise.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = pencil.size
    x = np.ones(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    x = x / np.sqrt(x @ pencil.apply_theta(x))
    lx = pencil.apply_lambda(x)
    rho = float(x @ lx)
    history = [rho]
    g_old = p = None
    it = 0
    res = np.inf
    while True:
        tx = pencil.apply_theta(x)
        r = lx - rho * tx
        res = float(np.linalg.norm(r) / np.linalg.norm(lx))
        if res <= tol or it >= max_iter or n == 1:
            break
        g = 2.0 * r
        if p is None:
            p = -g
        else:
            beta = max(0.0, float(g @ (g - g_old)) / float(g_old @ g_old))
            p = -g + beta * p
        g_old = g
        # Theta-orthogonalize the search direction against x
        p = p - (tx @ p) * x
        pnorm = np.sqrt(p @ pencil.apply_theta(p))
        if not pnorm > 0:
            break
        u = p / pnorm
        lu = pencil.apply_lambda(u)
        off = float(x @ lu)
        small = np.array([[rho, off], [off, float(u @ lu)]])
        _, vecs = np.linalg.eigh(small)
        a, b = vecs[:, 0]
        if a < 0:
            a, b = -a, -b
        x = a * x + b * u
        lx = a * lx + b * lu
        scale = np.sqrt(x @ pencil.apply_theta(x))
        x /= scale
        lx /= scale
        it += 1
        if it % 50 == 0:
            lx = pencil.apply_lambda(x)
        rho = float(x @ lx)
        history.append(rho)
    if res <= tol or n == 1:
        q = _normalize(pencil, x)
        lq = pencil.apply_lambda(q)
        value = float(q @ lq)
        return EigenResult(value, q, it, _residual(pencil, q, value, lq), "dacg",
                           history=history)
    if n <= dense_threshold:
        out = smallest_eigpair_dense(pencil)
        out.iterations = it
        out.method = "dense-fallback"
        out.history = history
        return out
    raise EigenSolverError(f"DACG did not reach tol {tol:g} in {max_iter} "
                           f"iterations (residual {res:.3g})")
