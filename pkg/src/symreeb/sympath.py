"""Index engines for 2x2 symplectic paths.

Two independent routes are provided for each index:

* Conley-Zehnder: spectral (winding numbers of eigenfunctions of the
  self-adjoint operator ``v -> -J0 v' - S v`` on periodic functions,
  ``mu = 2*alpha + p``) and rotation (transverse rotation number of the
  sampled path, ``2*floor(rho) + 1`` for elliptic and ``2*rho`` for
  hyperbolic endpoints).
* Robbin-Salamon of the half path: spectral (same operator on ``[0, 1/2]``
  with real boundary values, ``mu = 2*alpha + 1/2``) and crossing (signed
  crossings of the line path ``Phi(t) R`` with ``R``, half weight at t = 0).

Conventions: ``J0 = [[0, -1], [1, 0]]``, ``Phi' = J0 S Phi``, ``Phi(0) = Id``,
``I = diag(1, -1)``. A loop is symmetric when ``S(-t) = I S(t) I``.
"""

from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (ConsistencyError, DegeneracyError, IllConditionedError,
                     RefineError, ValidationError)

J0 = np.array([[0.0, -1.0], [1.0, 0.0]])
CONJ = np.diag([1.0, -1.0])

DEFAULT_MODES = 256
DEGENERACY_TOL = 1e-8
SPECTRAL_DELTA = 1e-9
CLUSTER_TOL = 1e-9
CLASSIFY_MARGIN = 1e-8
CROSSING_FORM_TOL = 1e-10
MIN_LOOP_SAMPLES = 64


# ---------------------------------------------------------------------------
# loops and paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SymmetricLoop:
    """A 1-periodic loop of symmetric 2x2 matrices sampled on ``[0, 1)``.

    Parameters
    ----------
    times : array_like, shape (n,)
        Sample times in ``[0, 1)``, strictly increasing.
    matrices : array_like, shape (n, 2, 2)
        Symmetric matrices ``S(t_i)``.
    symmetric_flag : bool
        Declares ``S(-t) = I S(t) I``; checked on construction.
    """

    times: np.ndarray
    matrices: np.ndarray
    symmetric_flag: bool = False
    _spectral: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.matrices, dtype=float)
        if t.ndim != 1 or s.shape != (len(t), 2, 2):
            raise ValidationError("loop needs times (n,) and matrices (n, 2, 2)")
        if len(t) and abs(t[-1] - 1.0) < 1e-14:
            t, s = t[:-1], s[:-1]
        if np.any(np.diff(t) <= 0) or (len(t) and (t[0] < 0 or t[-1] >= 1)):
            raise ValidationError("loop times must increase strictly inside [0, 1)")
        asym = np.max(np.abs(s - np.swapaxes(s, 1, 2))) if len(s) else 0.0
        if asym > 1e-12:
            raise ValidationError(f"loop matrices are not symmetric (max asymmetry {asym:.2e})")
        s = 0.5 * (s + np.swapaxes(s, 1, 2))
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "matrices", s)
        object.__setattr__(self, "_spectral", _spectral_form(t, s))
        if self.symmetric_flag:
            err = self.symmetry_defect()
            if err > 1e-9:
                raise ValidationError(f"loop flagged symmetric but S(-t) != I S(t) I (defect {err:.2e})")

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_function(cls, func, n=256, symmetric=False):
        """Sample ``func(t) -> 2x2`` on the uniform grid ``i/n``."""
        t = np.arange(n) / n
        mats = np.array([func(ti) for ti in t], dtype=float)
        return cls(t, mats, symmetric)

    @classmethod
    def constant(cls, matrix, n=MIN_LOOP_SAMPLES, symmetric=None):
        matrix = np.asarray(matrix, dtype=float)
        if symmetric is None:
            symmetric = bool(abs(matrix[0, 1]) < 1e-15)
        t = np.arange(n) / n
        return cls(t, np.repeat(matrix[None], n, axis=0), symmetric)

    # -- evaluation ---------------------------------------------------------
    @property
    def frequencies(self):
        return self._spectral[0]

    @property
    def coefficients(self):
        return self._spectral[1]

    def evaluate(self, t):
        """Trigonometric interpolant ``S(t)``; ``t`` scalar or array."""
        freqs, coeffs = self._spectral
        t = np.asarray(t, dtype=float)
        phase = np.exp(2j * np.pi * np.multiply.outer(t, freqs))
        return np.real(np.tensordot(phase, coeffs, axes=([-1], [0])))

    def sup_norm(self):
        return float(np.max(np.linalg.norm(self.matrices, ord=2, axis=(1, 2))))

    def symmetry_defect(self):
        """``max |S(-t) - I S(t) I|`` on the sample grid."""
        mirrored = self.evaluate(-self.times)
        return float(np.max(np.abs(mirrored - CONJ @ self.matrices @ CONJ)))

    def iterate(self, k):
        """The loop ``t -> k S(k t)``, whose problem on [0, 1] is the k-fold problem."""
        k = _check_k(k)
        if k == 1:
            return self
        n = len(self.times)
        t = np.arange(n * k) / (n * k)
        mats = k * self.evaluate((k * t) % 1.0)
        return SymmetricLoop(t, mats, self.symmetric_flag)

    def to_json(self):
        return json.dumps([[float(t), *map(float, m.ravel())] for t, m in zip(self.times, self.matrices)])

    @classmethod
    def from_json(cls, text, symmetric=False):
        rows = np.asarray(json.loads(text), dtype=float)
        return cls(rows[:, 0], rows[:, 1:].reshape(-1, 2, 2), symmetric)


def _spectral_form(t, s):
    """Fourier coefficients of the loop as (integer frequencies, complex 2x2 coefficients)."""
    n = len(t)
    if n < MIN_LOOP_SAMPLES:
        raise ValidationError(f"loop needs at least {MIN_LOOP_SAMPLES} samples, got {n}")
    uniform = np.allclose(t, np.arange(n) / n, atol=1e-13, rtol=0)
    if not uniform:
        m = max(256, n)
        tt = np.append(t, t[0] + 1.0)
        ss = np.concatenate([s, s[:1]])
        spline = CubicSpline(tt, ss, axis=0, bc_type="periodic")
        grid = np.arange(m) / m
        s = spline(grid)
        n = m
    coeffs = np.fft.fft(s, axis=0) / n
    freqs = np.fft.fftfreq(n, 1.0 / n).round().astype(int)
    if n % 2 == 0:
        # split the Nyquist term evenly so the interpolant is real and symmetric
        idx = n // 2
        nyq = coeffs[idx] / 2
        coeffs = np.concatenate([coeffs, nyq[None]])
        coeffs[idx] = nyq
        freqs = np.append(freqs, n // 2)
        freqs[idx] = -n // 2
    return freqs, coeffs


def det_drift(mats):
    """``max |det M - 1|`` relative to the cancellation scale ``max(1, |M|_F^2 / 2)``.

    For large hyperbolic matrices ``ad - bc`` loses digits in floating point,
    so the raw determinant error is measured against the size of the products.
    """
    mats = np.asarray(mats, dtype=float)
    scale = np.maximum(1.0, 0.5 * np.sum(mats ** 2, axis=(-2, -1)))
    return float(np.max(np.abs(np.linalg.det(mats) - 1.0) / scale))


def _check_k(k):
    if int(k) != k or k < 1:
        raise ValidationError(f"iterate count must be a positive integer, got {k}")
    return int(k)


@dataclass(frozen=True, eq=False)
class SymplecticPath:
    """Sampled path of 2x2 symplectic matrices on ``[0, k]`` with ``M(0) = Id``."""

    times: np.ndarray
    matrices: np.ndarray
    iterate_count: int = 1
    generator: SymmetricLoop = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        m = np.array(self.matrices, dtype=float)
        if t.ndim != 1 or m.shape != (len(t), 2, 2) or len(t) < 2:
            raise ValidationError("path needs times (n,) and matrices (n, 2, 2), n >= 2")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValidationError("path times must start at 0 and increase")
        k = _check_k(self.iterate_count)
        if abs(t[-1] - k) > 1e-12:
            raise ValidationError(f"path must end at t = k = {k}, ends at {t[-1]}")
        m[0] = np.eye(2)
        drift = det_drift(m)
        if drift > 1e-9:
            raise ValidationError(f"path leaves Sp(2): max |det - 1| = {drift:.2e}")
        t.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "matrices", m)
        object.__setattr__(self, "iterate_count", k)

    @property
    def endpoint(self):
        return self.matrices[-1]

    def at(self, t):
        """Matrix at a sampled time (exact match within 1e-12)."""
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > 1e-12:
            raise ValidationError(f"time {t} is not a sample of the path")
        return self.matrices[idx]

    def iterate(self, k):
        """Concatenate k copies using ``Phi(t + 1) = Phi(t) Phi(1)``."""
        k = _check_k(k)
        if self.iterate_count != 1:
            raise ValidationError("only single-period paths can be iterated")
        base_t, base_m = self.times, self.matrices
        one = base_m[-1]
        ts, ms = [base_t], [base_m]
        power = np.eye(2)
        for j in range(1, k):
            power = power @ one
            ts.append(base_t[1:] + j)
            ms.append(base_m[1:] @ power)
        return SymplecticPath(np.concatenate(ts), np.concatenate(ms), k, self.generator)

    def to_json(self):
        return json.dumps([[float(t), *map(float, m.ravel())] for t, m in zip(self.times, self.matrices)])

    @classmethod
    def from_json(cls, text, iterate_count=None):
        rows = np.asarray(json.loads(text), dtype=float)
        k = int(round(rows[-1, 0])) if iterate_count is None else iterate_count
        return cls(rows[:, 0], rows[:, 1:].reshape(-1, 2, 2), k)


def _sl2_exp(x):
    """Matrix exponential of traceless 2x2 matrices (stacked), exact in closed form."""
    delta = -(x[:, 0, 0] * x[:, 1, 1] - x[:, 0, 1] * x[:, 1, 0])
    r = np.sqrt(np.abs(delta))
    small = r < 1e-8
    rs = np.where(small, 1.0, r)
    c = np.where(delta >= 0, np.cosh(r), np.cos(r))
    s = np.where(small, 1.0 + delta / 6.0, np.where(delta >= 0, np.sinh(r), np.sin(r)) / rs)
    return c[:, None, None] * np.eye(2) + s[:, None, None] * x


def _magnus_steps(loop, n):
    """Fourth-order Magnus propagators over the n uniform steps of [0, 1]."""
    h = 1.0 / n
    nodes = np.arange(n) * h
    g1 = nodes + h * (0.5 - math.sqrt(3) / 6)
    g2 = nodes + h * (0.5 + math.sqrt(3) / 6)
    a1 = J0 @ loop.evaluate(g1)
    a2 = J0 @ loop.evaluate(g2)
    omega = 0.5 * h * (a1 + a2) + (math.sqrt(3) / 12) * h * h * (a2 @ a1 - a1 @ a2)
    return _sl2_exp(omega)


def _accumulate(steps, stride):
    out = [np.eye(2)]
    cur = np.eye(2)
    for i, step in enumerate(steps, 1):
        cur = step @ cur
        if i % stride == 0:
            out.append(cur)
    return np.array(out)


def path_from_loop(loop, k=1, samples_per_period=None, tol=1e-10):
    """Solve ``Phi' = J0 S Phi``, ``Phi(0) = Id`` and extend to ``[0, k]``.

    The propagator over each substep is the exponential of a fourth-order
    Magnus term, so every factor lies exactly in Sp(2). The substep count is
    doubled until the endpoint changes by less than ``tol`` (relative).

    Parameters
    ----------
    loop : SymmetricLoop
    k : int
        Number of periods.
    samples_per_period : int, optional
        Uniform output samples per period (made even). Chosen from ``|S|`` so
        that the path rotates by well under ``pi/2`` between samples.

    Returns
    -------
    SymplecticPath
    """
    k = _check_k(k)
    if samples_per_period is None:
        samples_per_period = max(256, 2 * math.ceil(5 * loop.sup_norm()))
    n_out = int(samples_per_period) + int(samples_per_period) % 2
    sub = 4
    prev = None
    for _ in range(8):
        mats = _accumulate(_magnus_steps(loop, n_out * sub), sub)
        if prev is not None:
            scale = max(1.0, float(np.max(np.abs(mats))))
            if np.max(np.abs(mats[-1] - prev[-1])) < tol * scale:
                break
        prev = mats
        sub *= 2
    else:
        raise RefineError("path integration did not converge under refinement", stage="path_from_loop")
    drift = det_drift(mats)
    if drift > 1e-6:
        raise RefineError(f"determinant drift {drift:.2e} during integration", stage="path_from_loop")
    grid = np.linspace(0.0, 1.0, n_out + 1)
    path = SymplecticPath(grid, mats, 1, loop)
    return path.iterate(k) if k > 1 else path


# ---------------------------------------------------------------------------
# reports and eigenmodes
# ---------------------------------------------------------------------------

@dataclass
class IndexReport:
    """Result of an index computation.

    ``mu_rs`` and half-integer ``alpha`` values are stored as floats with
    fractional part 0.5.
    """

    method: str
    mu_cz: int = None
    mu_rs: float = None
    alpha: float = None
    p: int = None
    rotation_number: float = None
    residuals: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("spectral", "rotation", "crossing"):
            raise ValidationError(f"unknown method {self.method}")
        if self.mu_cz is not None and self.p is not None:
            if self.p not in (0, 1) or self.mu_cz != 2 * self.alpha + self.p:
                raise ConsistencyError("mu_cz != 2 alpha + p")
        if self.mu_rs is not None:
            if not _is_half_odd(self.mu_rs):
                raise ConsistencyError(f"mu_rs {self.mu_rs} is not in Z + 1/2")
            if self.alpha is not None and self.mu_rs != 2 * self.alpha + 0.5:
                raise ConsistencyError("mu_rs != 2 alpha + 1/2")

    def to_dict(self):
        return {"mu_cz": self.mu_cz, "mu_rs": self.mu_rs, "alpha": self.alpha, "p": self.p,
                "method": self.method, "rotation_number": self.rotation_number,
                "residuals": {k: float(v) for k, v in self.residuals.items()}}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _is_half_odd(x):
    return abs(2 * x - round(2 * x)) < 1e-12 and int(round(2 * x)) % 2 != 0


@dataclass(frozen=True, eq=False)
class EigenModeRecord:
    """One eigenpair of the periodic or boundary problem.

    ``eigenfunction`` holds ``v1 + i v2`` on the uniform grid of ``[0, 1)``
    (periodic problem) or of ``[0, 1/2]`` (boundary problem).
    """

    eigenvalue: float
    winding: float
    eigenfunction: np.ndarray
    residual: float


def retrivialized_rs(mu_rs, wind_change):
    """Robbin-Salamon index after a change of symmetric trivialization.

    ``mu_rs`` computed in frame T2 becomes ``mu_rs + wind(T1, T2)`` in T1.
    """
    if not _is_half_odd(mu_rs):
        raise ValidationError(f"mu_rs must lie in Z + 1/2, got {mu_rs}")
    if int(wind_change) != wind_change:
        raise ValidationError(f"winding change must be an integer, got {wind_change}")
    return float(mu_rs + int(wind_change))


# ---------------------------------------------------------------------------
# spectral engine
# ---------------------------------------------------------------------------

class _Spectrum:
    """Fourier-Galerkin discretization of ``A_S v = -J0 v' - S v`` on 1-periodic functions.

    Coefficient vector layout: ``c[m, :]`` for ``m = -L..L`` (``L = modes // 2``),
    flattened as ``(2L + 1) x 2``. ``boundary=True`` restricts to the
    ``+1`` eigenspace of ``K: c_m -> I c_{-m}`` (functions with
    ``v(-t) = I v(t)``), which on ``[0, 1/2]`` is the real boundary problem.
    """

    def __init__(self, loop, modes=DEFAULT_MODES, boundary=False):
        if modes < 128:
            raise ValidationError("the spectral discretization needs at least 128 modes")
        self.loop = loop
        self.L = L = modes // 2
        self.boundary = boundary
        m = np.arange(-L, L + 1)
        self.m = m
        freqs, coeffs = loop._spectral
        table = np.zeros((4 * L + 1, 2, 2), dtype=complex)
        keep = np.abs(freqs) <= 2 * L
        np.add.at(table, freqs[keep] + 2 * L, coeffs[keep])
        blocks = -table[m[:, None] - m[None, :] + 2 * L]        # (n, n, 2, 2)
        n = len(m)
        diag = -2j * np.pi * m[:, None, None] * J0[None]
        blocks[np.arange(n), np.arange(n)] += diag
        a = blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)
        a = 0.5 * (a + a.conj().T)
        if boundary:
            q = self._even_basis()
            a = q.conj().T @ a @ q
            self.basis = q
        else:
            self.basis = None
        self.values, vecs = np.linalg.eigh(a)
        self.vectors = vecs if not boundary else self.basis @ vecs

    def _even_basis(self):
        L, n = self.L, len(self.m)
        cols = []
        s2 = 1.0 / math.sqrt(2.0)
        zero = L
        e = np.zeros(2 * n, dtype=complex)
        e[2 * zero] = 1.0
        cols.append(e)
        for mm in range(1, L + 1):
            a, b = zero + mm, zero - mm
            for comp, sign in ((0, 1.0), (1, -1.0)):
                e = np.zeros(2 * n, dtype=complex)
                e[2 * a + comp] = s2
                e[2 * b + comp] = sign * s2
                cols.append(e)
        return np.array(cols).T

    def reliable_window(self):
        """Eigenvalue indices safely away from the truncation edge."""
        cutoff = 2 * np.pi * (self.L / 2) - 2 * self.loop.sup_norm()
        return np.nonzero(np.abs(self.values) < cutoff)[0]

    def eigenfunction(self, index, grid=None):
        """Real eigenfunction as complex samples ``v1 + i v2`` on ``grid`` points of [0, 1)."""
        grid = grid or 8 * (2 * self.L)
        c = self.vectors[:, index].reshape(-1, 2)
        full = np.zeros((grid, 2), dtype=complex)
        full[self.m % grid] = c
        v = np.fft.ifft(full, axis=0) * grid                        # complex R^2-valued
        re, im = v.real, v.imag
        vr = re if np.linalg.norm(re) >= np.linalg.norm(im) else im
        return vr[:, 0] + 1j * vr[:, 1], c

    def residual(self, index, grid):
        """``|A v - eta v| / |v|`` on a uniform grid of ``grid`` points."""
        c = self.vectors[:, index].reshape(-1, 2)
        t = np.arange(grid) / grid
        full = np.zeros((grid, 2), dtype=complex)
        full[self.m % grid] = c
        dfull = np.zeros((grid, 2), dtype=complex)
        dfull[self.m % grid] = 2j * np.pi * self.m[:, None] * c
        v = np.fft.ifft(full, axis=0) * grid
        dv = np.fft.ifft(dfull, axis=0) * grid
        s = self.loop.evaluate(t)
        eta = self.values[index]
        r = -(dv @ J0.T) - np.einsum("tij,tj->ti", s, v) - eta * v
        return float(np.linalg.norm(r) / np.linalg.norm(v))


def _arg_increments(u):
    return np.angle(u[1:] / u[:-1])


def _winding_of(u, periodic=True):
    """Winding of ``u`` (complex samples); periodic over [0,1) or over [0,1/2]."""
    mod = np.abs(u)
    if mod.min() <= 1e-10 * mod.max():
        raise RefineError("eigenfunction vanishes on the grid", stage="winding")
    if periodic:
        steps = _arg_increments(np.append(u, u[:1]))
    else:
        steps = _arg_increments(u[: len(u) // 2 + 1])
    if np.max(np.abs(steps)) >= np.pi / 2:
        raise RefineError("argument increment exceeds pi/2; refine the grid", stage="winding")
    total = float(np.sum(steps)) / (2 * np.pi)
    if periodic:
        w = round(total)
        tol = abs(total - w)
    else:
        w = round(2 * total) / 2
        tol = abs(total - w)
    if tol > 1e-6:
        raise RefineError(f"winding {total} not quantized", stage="winding")
    return w


def _windings(spec, indices, periodic=True):
    out = {}
    grid = 8 * (2 * spec.L)
    vals = spec.values
    order = sorted(indices)
    i = 0
    while i < len(order):
        j = i
        # multiplicity clusters share one winding
        while j + 1 < len(order) and vals[order[j + 1]] - vals[order[j]] < CLUSTER_TOL:
            j += 1
        u, _ = spec.eigenfunction(order[i], grid)
        try:
            w = _winding_of(u, periodic)
        except RefineError:
            u, _ = spec.eigenfunction(order[i], 4 * grid)
            w = _winding_of(u, periodic)
        for idx in order[i:j + 1]:
            out[idx] = w
        i = j + 1
    return out


def _check_nondegenerate_periodic(loop, k):
    path = path_from_loop(loop, 1)
    end = np.linalg.matrix_power(path.endpoint, k)
    det = float(np.linalg.det(end - np.eye(2)))
    if abs(det) < DEGENERACY_TOL:
        raise DegeneracyError(f"degenerate path: det(Phi(k) - Id) = {det:.2e}", stage="cz_index")
    return det, path


def cz_index_spectral(loop, k=1, modes=DEFAULT_MODES, window=6):
    """Conley-Zehnder index of the k-fold path generated by ``loop``, by the spectral route.

    ``alpha`` is the largest winding among negative eigenvalues of the k-fold
    periodic problem and ``p`` is 0 when a non-negative eigenvalue shares that
    winding, 1 otherwise.

    Raises
    ------
    DegeneracyError
        If ``|det(Phi(k) - Id)| < 1e-8``.
    IllConditionedError
        If the smallest ``|eigenvalue|`` is below 1e-8.
    """
    k = _check_k(k)
    det, _ = _check_nondegenerate_periodic(loop, k)
    spec = _Spectrum(loop.iterate(k), modes)
    vals = spec.values
    gap = float(np.min(np.abs(vals)))
    if gap < DEGENERACY_TOL:
        raise IllConditionedError(f"spectral gap {gap:.2e} around 0; refine the discretization",
                                  stage="cz_index_spectral")
    neg = np.nonzero(vals < -SPECTRAL_DELTA)[0]
    pos = np.nonzero(vals >= -SPECTRAL_DELTA)[0]
    picks = list(neg[-window:]) + list(pos[:window])
    wind = _windings(spec, picks)
    ws = [wind[i] for i in sorted(picks)]
    if any(b < a for a, b in zip(ws, ws[1:])):
        raise ConsistencyError("winding not monotone in eigenvalue near 0")
    alpha = max(wind[i] for i in neg[-window:])
    lowest_nonneg = min(wind[i] for i in pos[:window])
    p = 0 if lowest_nonneg == alpha else 1
    resid = max(spec.residual(i, 8 * spec.L) for i in picks)
    return IndexReport("spectral", mu_cz=int(2 * alpha + p), alpha=int(alpha), p=p,
                       residuals={"det_endpoint_minus_id": det, "spectral_gap": gap,
                                  "eigen_residual": resid})


def rs_index_spectral(loop, k=1, modes=DEFAULT_MODES, window=6):
    """Robbin-Salamon index of the half path ``Phi|[0, k/2]`` by the spectral route.

    Uses the boundary problem with ``v(0), v(1/2)`` real, discretized by
    restricting the periodic Fourier problem to functions with
    ``v(-t) = I v(t)`` (doubling and symmetrizing).
    """
    k = _check_k(k)
    if not loop.symmetric_flag:
        raise ValidationError("the boundary problem needs a loop flagged symmetric")
    angle = _chord_angle(path_from_loop(loop, k), k)
    spec = _Spectrum(loop.iterate(k), modes, boundary=True)
    vals = spec.values
    gap = float(np.min(np.abs(vals)))
    if gap < DEGENERACY_TOL:
        raise IllConditionedError(f"spectral gap {gap:.2e} around 0", stage="rs_index_spectral")
    neg = np.nonzero(vals < -SPECTRAL_DELTA)[0]
    pos = np.nonzero(vals >= -SPECTRAL_DELTA)[0]
    picks = list(neg[-window:]) + list(pos[:window])
    wind = _windings(spec, picks, periodic=False)
    ws = [wind[i] for i in sorted(picks)]
    if any(b <= a for a, b in zip(ws, ws[1:])):
        raise ConsistencyError("boundary windings not strictly monotone near 0")
    alpha = max(wind[i] for i in neg[-window:])
    resid = max(spec.residual(i, 8 * spec.L) for i in picks)
    return IndexReport("spectral", mu_rs=float(2 * alpha + 0.5), alpha=float(alpha),
                       residuals={"chord_angle": angle, "spectral_gap": gap, "eigen_residual": resid})


def _chord_angle(path, k):
    """Angle between ``Phi(k/2) R`` and ``R``; raises if below tolerance."""
    m = path.at(k / 2)
    v = m[:, 0]
    ang = math.atan2(v[1], v[0]) % math.pi
    ang = min(ang, math.pi - ang)
    if ang < DEGENERACY_TOL:
        raise DegeneracyError(f"degenerate chord: angle {ang:.2e} between Phi(k/2)R and R",
                              stage="rs_index")
    return ang


def winding_spectrum(loop, k=1, winding_range=(-3, 3), modes=DEFAULT_MODES):
    """Eigenpairs of the k-fold periodic problem with winding in ``winding_range``.

    Returns records sorted by eigenvalue; raises :class:`ConsistencyError`
    unless there are exactly two (with multiplicity) per winding and the
    windings are monotone.
    """
    return _spectrum_records(loop, k, winding_range, modes, boundary=False)


def boundary_winding_spectrum(loop, k=1, winding_range=(-3, 3), modes=DEFAULT_MODES):
    """Eigenpairs of the boundary problem with half-integer relative windings in range.

    Exactly one eigenvalue per half-integer is required.
    """
    if not loop.symmetric_flag:
        raise ValidationError("the boundary problem needs a loop flagged symmetric")
    return _spectrum_records(loop, k, winding_range, modes, boundary=True)


def _spectrum_records(loop, k, winding_range, modes, boundary):
    k = _check_k(k)
    lo, hi = winding_range
    if max(abs(lo), abs(hi)) > modes / 8:
        raise ValidationError(f"winding range must lie within +-{modes // 8}")
    spec = _Spectrum(loop.iterate(k), modes, boundary=boundary)
    window = spec.reliable_window()
    wind = _windings(spec, window, periodic=not boundary)
    grid = 8 * (2 * spec.L)
    records = []
    for idx in sorted(window):
        w = wind[idx]
        if lo <= w <= hi:
            u, _ = spec.eigenfunction(idx, grid)
            if boundary:
                u = u[: grid // 2 + 1]
            records.append(EigenModeRecord(float(spec.values[idx]), w, u,
                                           spec.residual(idx, grid // 2)))
    ws = [r.winding for r in records]
    if any(b < a for a, b in zip(ws, ws[1:])):
        raise ConsistencyError("winding not monotone in eigenvalue")
    if boundary:
        expected = np.arange(2 * lo, 2 * hi + 1) / 2
        counts = {w: ws.count(w) for w in expected}
        if sorted(ws) != list(expected) or any(c != 1 for c in counts.values()):
            raise ConsistencyError(f"boundary problem: expected one eigenvalue per half-integer, got {ws}")
    else:
        for w in range(int(lo), int(hi) + 1):
            if ws.count(w) != 2:
                raise ConsistencyError(f"winding {w} carries {ws.count(w)} eigenvalues, expected 2")
    return records


# ---------------------------------------------------------------------------
# rotation and crossing routes
# ---------------------------------------------------------------------------

def _continuous_angle(vectors):
    """Unwrapped polar angle of a sequence of plane vectors, starting at its first angle."""
    ang = np.arctan2(vectors[:, 1], vectors[:, 0])
    steps = np.angle(np.exp(1j * np.diff(ang)))
    if len(steps) and np.max(np.abs(steps)) >= np.pi / 2:
        raise RefineError("path rotates more than pi/2 between samples; resample", stage="rotation")
    return ang[0] + np.concatenate([[0.0], np.cumsum(steps)])


def cz_index_rotation(path):
    """Conley-Zehnder index from the transverse rotation number of a sampled path.

    The rotation number is read from the continuous argument of
    ``Phi(t) u`` along the whole path (u = e1 for elliptic endpoints, an
    eigenvector for hyperbolic ones) together with the conjugacy class of the
    endpoint; endpoint eigenvalues alone are never used.
    """
    end = path.endpoint
    k = path.iterate_count
    tr = float(np.trace(end))
    det = float(np.linalg.det(end - np.eye(2)))
    if abs(abs(tr) - 2.0) < CLASSIFY_MARGIN:
        raise DegeneracyError(f"parabolic endpoint (trace {tr:.12f})", stage="cz_index_rotation")
    if abs(det) < DEGENERACY_TOL:
        raise DegeneracyError(f"degenerate path: det(Phi(k) - Id) = {det:.2e}", stage="cz_index_rotation")
    mats = path.matrices
    if abs(tr) < 2.0:
        theta = _continuous_angle(mats[:, :, 0])
        total = (theta[-1] - theta[0]) / (2 * np.pi)
        n = math.floor(total)
        c = tr / 2.0
        s = math.copysign(math.sqrt(max(0.0, 1.0 - c * c)), end[1, 0])
        frac = (math.atan2(s, c) / (2 * np.pi)) % 1.0
        if not 0.0 < frac < 1.0:
            raise DegeneracyError("elliptic endpoint with trivial rotation", stage="cz_index_rotation")
        rho = n + frac
        mu = 2 * n + 1
        kind = "elliptic"
        resid = {"trace": tr, "angle_turns_e1": total}
    else:
        evals, evecs = np.linalg.eig(end)
        j = int(np.argmax(np.abs(evals.real)))
        e = evecs[:, j].real
        theta = _continuous_angle(mats @ e)
        half_turns = (theta[-1] - theta[0]) / np.pi
        jj = round(half_turns)
        if abs(half_turns - jj) > 1e-6:
            raise RefineError(f"eigenvector line did not close ({half_turns})", stage="cz_index_rotation")
        if (jj % 2 == 0) != (evals[j].real > 0):
            raise ConsistencyError("parity of eigenvector rotation disagrees with eigenvalue sign")
        rho = jj / 2.0
        mu = int(jj)
        kind = "hyperbolic"
        resid = {"trace": tr, "eigenvector_half_turns": half_turns}
    resid["det_endpoint_minus_id"] = det
    report = IndexReport("rotation", mu_cz=int(mu), rotation_number=float(rho), residuals=resid)
    report.residuals["elliptic"] = 1.0 if kind == "elliptic" else 0.0
    report.residuals["iterate_count"] = float(k)
    return report


def _path_generator(path, i):
    """``S = -J0 Phi' Phi^{-1}`` at sample i (generator if known, else finite differences)."""
    if path.generator is not None:
        return path.generator.evaluate(path.times[i] % 1.0)
    t, m = path.times, path.matrices
    if i == 0:
        h1, h2 = t[1] - t[0], t[2] - t[0]
        d = ((m[1] - m[0]) * h2 ** 2 - (m[2] - m[0]) * h1 ** 2) / (h1 * h2 * (h2 - h1))
    else:
        hm, hp = t[i] - t[i - 1], t[i + 1] - t[i]
        d = (m[i + 1] - m[i - 1]) / (hm + hp)
    s = -J0 @ d @ np.linalg.inv(m[i])
    return 0.5 * (s + s.T)


def rs_index_crossing(path):
    """Robbin-Salamon index of the line path ``Phi(t) R`` on ``[0, k/2]`` relative to ``R``.

    Counts signed crossings (sign of the crossing form ``<S v, v>``), half
    weight at ``t = 0``. Crossing directions are cross-checked against the
    continuous line angle.
    """
    k = path.iterate_count
    half = k / 2.0
    _chord_angle(path, k)
    sel = path.times <= half + 1e-12
    t = path.times[sel]
    a = _continuous_angle(path.matrices[sel][:, :, 0])
    s0 = _path_generator(path, 0)
    form0 = float(s0[0, 0])
    if abs(form0) < CROSSING_FORM_TOL:
        raise RefineError("degenerate crossing form at t = 0", stage="rs_index_crossing")
    total = 0.5 * math.copysign(1.0, form0)
    level = np.floor(a / np.pi)
    if len(a) > 1 and abs(a[1]) < np.pi / 2:
        level[0] = np.floor(a[1] / np.pi)
    crossings = 0
    for i in range(len(t) - 1):
        if level[i] == level[i + 1]:
            continue
        direction = 1 if a[i + 1] > a[i] else -1
        if abs(level[i + 1] - level[i]) != 1:
            raise RefineError("several crossings between consecutive samples", stage="rs_index_crossing")
        tc = _crossing_time(t[i], t[i + 1], a[i], a[i + 1])
        if path.generator is not None:
            form = float(path.generator.evaluate(tc % 1.0)[0, 0])
        else:
            j = min(max(i if tc - t[i] < t[i + 1] - tc else i + 1, 1), len(path.times) - 2)
            form = float(_path_generator(path, j)[0, 0])
        if abs(form) < CROSSING_FORM_TOL:
            raise RefineError("degenerate interior crossing; refine the grid", stage="rs_index_crossing")
        if math.copysign(1, form) != direction:
            raise RefineError("crossing form sign disagrees with sampled crossing direction",
                              stage="rs_index_crossing")
        total += direction
        crossings += 1
    mu = float(total)
    return IndexReport("crossing", mu_rs=mu, alpha=(mu - 0.5) / 2,
                       rotation_number=float((a[-1] - a[0]) / (2 * np.pi)),
                       residuals={"crossing_form_t0": form0, "interior_crossings": float(crossings)})


def _crossing_time(t0, t1, a0, a1):
    target = np.pi * round((a0 + a1) / (2 * np.pi))
    if a1 == a0:
        return t0
    return t0 + (target - a0) / (a1 - a0) * (t1 - t0)


def random_loop(rng, degree=3, scale=6.0, symmetric=False, n=128, offset=None):
    """Random smooth loop, a trigonometric polynomial of given degree.

    With ``symmetric=True`` the diagonal entries are even (cosines) and the
    off-diagonal entry is odd (sines), so ``S(-t) = I S(t) I``.
    """
    t = np.arange(n) / n
    s = np.zeros((n, 2, 2))
    for j in range(degree + 1):
        c = np.cos(2 * np.pi * j * t)[:, None, None]
        sn = np.sin(2 * np.pi * j * t)[:, None, None]
        amp = scale / (1.0 + j) ** 2
        a = rng.normal(size=(2, 2)) * amp
        b = rng.normal(size=(2, 2)) * amp
        a = 0.5 * (a + a.T)
        b = 0.5 * (b + b.T)
        if symmetric:
            a[0, 1] = a[1, 0] = 0.0
            b[0, 0] = b[1, 1] = 0.0
        s += c * a + (sn * b if j > 0 else 0.0)
    if offset is not None:
        s += np.asarray(offset)[None]
    return SymmetricLoop(t, s, symmetric)
