"""Radial kernels (Gaussian and Wendland C2) and kernel-matrix assembly."""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.spatial.distance import cdist

from .errors import ConditioningError

log = logging.getLogger(__name__)

FAMILIES = ("gaussian", "wendland")


@dataclass(frozen=True)
class KernelSpec:
    """Isotropic radial kernel phi(eps * r)."""

    family: str = "wendland"
    epsilon: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not self.epsilon > 0:
            raise ValueError("shape parameter must be positive")

    def __call__(self, r):
        return eval_kernel(self, r)


def gaussian(r, eps):
    return np.exp(-(eps * r) ** 2)


def wendland_c2(r, eps):
    t = eps * np.asarray(r, dtype=float)
    s = np.clip(1.0 - t, 0.0, None)
    return s ** 4 * (4.0 * t + 1.0)


def eval_kernel(spec, r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    if spec.family == "gaussian":
        out = gaussian(r, spec.epsilon)
    else:
        out = wendland_c2(r, spec.epsilon)
    return out if out.ndim else float(out)


def kernel_matrix(spec, X, Y=None):
    """Matrix of phi(||x_i - y_k||); Y defaults to X (exactly symmetric)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[0] == 0 or Y.shape[0] == 0:
        raise ValueError("kernel_matrix needs nonempty point sets")
    return eval_kernel(spec, cdist(X, Y))


def cholesky(A, jitter=0.0, patch=None):
    """Cholesky factor of an SPD kernel matrix, usable with `cho_solve`.

    No regularization is applied unless `jitter` > 0, in which case
    jitter * I is added and the event is logged.
    """
    A = np.asarray(A, dtype=float)
    if jitter > 0:
        log.warning("adding diagonal jitter %.3g%s", jitter,
                    "" if patch is None else f" on patch {patch}")
        A = A + jitter * np.eye(A.shape[0])
    try:
        return cho_factor(A, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"kernel matrix of order {A.shape[0]} is not "
                                f"numerically positive definite ({exc})",
                                patch=patch) from None


def solve(factor, rhs):
    return cho_solve(factor, rhs, check_finite=False)
