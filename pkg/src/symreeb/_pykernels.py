"""Pure numpy implementations of the hot kernels.

Selected by :mod:`symreeb.kernels` when the compiled extension is missing or
``SYMREEB_PURE_PYTHON=1`` is set. Signatures match ``_ckernels.pyx``.
"""

import numpy as np

from . import _hamiltonians as ham

# rows of J4^T = [[0, -I], [I, 0]] applied to a gradient
_PERM = np.array([2, 3, 0, 1])
_SIGN = np.array([-1.0, -1.0, 1.0, 1.0])


class VectorField:
    """Right-hand side ``y' = X_H(y)`` (optionally with the variational block).

    With ``variational=True`` the state is ``(x, vec(M))`` of length 20 with
    ``M`` stored row-major, and ``M' = DX_H(x) M``.
    """

    def __init__(self, kind, params, variational=False):
        self.kind = int(kind)
        self.params = np.asarray(params, dtype=float)
        self.variational = bool(variational)

    def __call__(self, t, y):
        x = y[:4]
        g = ham.gradient(self.kind, self.params, x)
        xdot = _SIGN * g[_PERM]
        if not self.variational:
            return xdot
        hess = ham.hessian(self.kind, self.params, x)
        a = _SIGN[:, None] * hess[_PERM, :]
        m = y[4:20].reshape(4, 4)
        return np.concatenate([xdot, (a @ m).ravel()])


def gauss_linking_sum(p, dp, q, dq, chunk=2048):
    """Discrete Gauss integral ``sum_ij (p_i - q_j) . (dp_i x dq_j) / |p_i - q_j|^3 / 4pi``.

    ``dp``/``dq`` are the tangent vectors multiplied by the parameter step, so
    the double sum is the midpoint (trapezoid) rule for the closed curves.
    """
    p = np.ascontiguousarray(p, dtype=float)
    q = np.ascontiguousarray(q, dtype=float)
    dp = np.ascontiguousarray(dp, dtype=float)
    dq = np.ascontiguousarray(dq, dtype=float)
    total = 0.0
    for start in range(0, len(p), chunk):
        sl = slice(start, start + chunk)
        diff = p[sl, None, :] - q[None, :, :]
        cross = np.cross(dp[sl, None, :], dq[None, :, :])
        dist3 = np.einsum("ijk,ijk->ij", diff, diff) ** 1.5
        total += np.sum(np.einsum("ijk,ijk->ij", diff, cross) / dist3)
    return total / (4.0 * np.pi)


def min_pair_distance(p, q, chunk=2048):
    """Smallest Euclidean distance between two point sets."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    best = np.inf
    for start in range(0, len(p), chunk):
        diff = p[start:start + chunk, None, :] - q[None, :, :]
        best = min(best, float(np.sqrt(np.min(np.einsum("ijk,ijk->ij", diff, diff)))))
    return best
