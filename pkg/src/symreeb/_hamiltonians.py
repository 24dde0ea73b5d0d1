"""Closed-form Hamiltonians, gradients and Hessians of the catalog systems.

States are canonical ``(q1, q2, p1, p2)``. Every function accepts an array of
shape ``(..., 4)`` and broadcasts over leading axes. The compiled kernels in
``_ckernels.pyx`` mirror these formulas one for one; the test-suite checks the
two against each other and against finite differences.

Kinds are small integers so the compiled code can dispatch without strings.
"""

import numpy as np

QUADRATIC = 0
HENON_HEILES = 1
HILL = 2
PCR3BP = 3

KIND_NAMES = {QUADRATIC: "quadratic", HENON_HEILES: "henon_heiles", HILL: "hill", PCR3BP: "pcr3bp"}


def _split(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0], x[..., 1], x[..., 2], x[..., 3]


def energy(kind, params, x):
    q1, q2, p1, p2 = _split(x)
    if kind == QUADRATIC:
        a1, a2 = params[0], params[1]
        return a1 * (q1 * q1 + p1 * p1) + a2 * (q2 * q2 + p2 * p2)
    if kind == HENON_HEILES:
        return 0.5 * (p1 * p1 + p2 * p2) + 0.5 * (q1 * q1 + q2 * q2) + q1 * q1 * q2 - q2 ** 3 / 3.0
    if kind == HILL:
        r = np.hypot(q1, q2)
        return 0.5 * (p1 * p1 + p2 * p2) - 1.0 / r + q1 * p2 - q2 * p1 - q1 * q1 + 0.5 * q2 * q2
    if kind == PCR3BP:
        mu = params[0]
        r1 = np.hypot(q1, q2)
        r2 = np.hypot(q1 - 1.0, q2)
        return (0.5 * (p1 * p1 + p2 * p2) - (1.0 - mu) / r1 - mu / r2
                + q1 * p2 - q2 * p1 - mu * p2)
    raise ValueError(f"unknown Hamiltonian kind {kind}")


def gradient(kind, params, x):
    q1, q2, p1, p2 = _split(x)
    if kind == QUADRATIC:
        a1, a2 = params[0], params[1]
        return np.stack([2 * a1 * q1, 2 * a2 * q2, 2 * a1 * p1, 2 * a2 * p2], axis=-1)
    if kind == HENON_HEILES:
        return np.stack([q1 + 2 * q1 * q2, q2 + q1 * q1 - q2 * q2, p1, p2], axis=-1)
    if kind == HILL:
        r3 = np.hypot(q1, q2) ** 3
        return np.stack([q1 / r3 + p2 - 2 * q1, q2 / r3 - p1 + q2, p1 - q2, p2 + q1], axis=-1)
    if kind == PCR3BP:
        mu = params[0]
        r1c = np.hypot(q1, q2) ** 3
        r2c = np.hypot(q1 - 1.0, q2) ** 3
        return np.stack([
            (1 - mu) * q1 / r1c + mu * (q1 - 1.0) / r2c + p2,
            (1 - mu) * q2 / r1c + mu * q2 / r2c - p1,
            p1 - q2,
            p2 + q1 - mu,
        ], axis=-1)
    raise ValueError(f"unknown Hamiltonian kind {kind}")


def _kepler_block(dx, dy, weight):
    """Hessian of ``-weight/|d|`` with respect to d, as three entries."""
    r2 = dx * dx + dy * dy
    r3 = r2 * np.sqrt(r2)
    r5 = r3 * r2
    return (weight * (1.0 / r3 - 3 * dx * dx / r5),
            weight * (-3 * dx * dy / r5),
            weight * (1.0 / r3 - 3 * dy * dy / r5))


def hessian(kind, params, x):
    q1, q2, p1, p2 = _split(x)
    shape = np.shape(q1)
    out = np.zeros(shape + (4, 4))
    if kind == QUADRATIC:
        a1, a2 = params[0], params[1]
        out[..., 0, 0] = out[..., 2, 2] = 2 * a1
        out[..., 1, 1] = out[..., 3, 3] = 2 * a2
        return out
    out[..., 2, 2] = 1.0
    out[..., 3, 3] = 1.0
    if kind == HENON_HEILES:
        out[..., 0, 0] = 1 + 2 * q2
        out[..., 0, 1] = out[..., 1, 0] = 2 * q1
        out[..., 1, 1] = 1 - 2 * q2
        return out
    if kind == HILL:
        hxx, hxy, hyy = _kepler_block(q1, q2, 1.0)
        out[..., 0, 0] = hxx - 2.0
        out[..., 0, 1] = out[..., 1, 0] = hxy
        out[..., 1, 1] = hyy + 1.0
    elif kind == PCR3BP:
        mu = params[0]
        axx, axy, ayy = _kepler_block(q1, q2, 1.0 - mu)
        bxx, bxy, byy = _kepler_block(q1 - 1.0, q2, mu)
        out[..., 0, 0] = axx + bxx
        out[..., 0, 1] = out[..., 1, 0] = axy + bxy
        out[..., 1, 1] = ayy + byy
    else:
        raise ValueError(f"unknown Hamiltonian kind {kind}")
    # rotating-frame terms q1 p2 - q2 p1
    out[..., 0, 3] = out[..., 3, 0] = 1.0
    out[..., 1, 2] = out[..., 2, 1] = -1.0
    return out
