"""Trajectories, variational flow and transverse symplectic paths along orbits.

Two independent routes produce the transverse linearized flow of an orbit in
a unitary frame of the contact planes ``xi = ker lambda0 | T Sigma``:

* :func:`transverse_path` projects the 4x4 monodromy of the variational
  equation onto ``xi`` (consumed by the rotation and crossing index methods);
* :func:`transverse_loop` evaluates the generator ``S(t)`` directly from the
  Hessian along the orbit and the frame derivative (consumed by the spectral
  methods).
"""

from dataclasses import dataclass, field
import csv
import io
import json
import math

import numpy as np
from scipy.integrate import solve_ivp

from . import kernels
from .errors import (CollisionError, ConsistencyError, GeometryError, IllConditionedError,
                     RefineError, ValidationError)
from .sympath import J0, SymmetricLoop, SymplecticPath, det_drift
from .systems import COLLISION_RADIUS, J4, hamiltonian_vector_field, liouville_form

DEFAULT_RTOL = 1e-11
ENERGY_DRIFT_TOL = 1e-9
SYMPLECTIC_DRIFT_TOL = 1e-6
FRAME_COND_LIMIT = 1e6
_FD_STEP = 1e-6


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution of ``x' = X_H(x)``.

    ``solution`` is the dense-output interpolant (``None`` for ``T = 0`` or
    deserialized trajectories).
    """

    times: np.ndarray
    states: np.ndarray
    energy_drift: float
    model: object
    solution: object = field(default=None, repr=False)

    @property
    def duration(self):
        return float(self.times[-1] - self.times[0])

    @property
    def start(self):
        return self.states[0]

    @property
    def end(self):
        return self.states[-1]

    def state_at(self, t):
        """State at time(s) t via dense output (exact at samples otherwise)."""
        if self.solution is None:
            idx = np.searchsorted(self.times, t)
            if np.all(np.isclose(self.times[np.minimum(idx, len(self.times) - 1)], t, atol=1e-14)):
                return self.states[np.minimum(idx, len(self.times) - 1)]
            raise ValidationError("trajectory has no dense output; request sampled times only")
        out = self.solution(t)
        return out.T if np.ndim(t) else out

    def energies(self):
        return self.model.hamiltonian(self.states)

    def to_csv(self, path=None):
        """Rows ``t, q1, q2, p1, p2, H``; returns the text when ``path`` is None."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "q1", "q2", "p1", "p2", "H"])
        for t, x, h in zip(self.times, self.states, self.energies()):
            w.writerow([repr(float(t)), *(repr(float(v)) for v in x), repr(float(h))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_dict(self):
        return {"times": self.times.tolist(), "states": self.states.tolist(),
                "energy_drift": float(self.energy_drift), "system": self.model.config()}

    def to_json(self):
        return json.dumps(self.to_dict())


def _collision_events(model):
    events = []
    for a, b in model.singular_points:
        def ev(t, y, a=a, b=b):
            return math.hypot(y[0] - a, y[1] - b) - COLLISION_RADIUS
        ev.terminal = True
        ev.direction = -1
        events.append(ev)
    return events


def _solve(model, y0, T, rtol, variational, t_eval, events=()):
    rhs = kernels.VectorField(model.kind, model.kind_params, variational)
    evs = list(events) + _collision_events(model)
    sol = solve_ivp(rhs, (0.0, T), y0, method="DOP853", rtol=rtol, atol=rtol * 1e-2,
                    t_eval=t_eval, dense_output=True, events=evs or None)
    if sol.status == -1:
        raise RefineError(f"integrator failed: {sol.message}", stage="integrate")
    n_user = len(events)
    for i, hits in enumerate(sol.t_events or []):
        if i >= n_user and len(hits):
            raise CollisionError(f"trajectory entered the collision ball at t = {hits[0]:.6g}",
                                 stage="integrate")
    return sol


def integrate(model, z0, T, tol=DEFAULT_RTOL, n_samples=None, t_eval=None, drift_tol=ENERGY_DRIFT_TOL):
    """Integrate the Hamiltonian flow from ``z0`` for time ``T``.

    Parameters
    ----------
    model : SystemModel
    z0 : array_like, shape (4,)
    T : float
        Flight time (may be negative; 0 returns the single state).
    tol : float
        Relative tolerance of the DOP853 integrator (absolute is ``tol/100``).
    n_samples : int, optional
        Return ``n_samples + 1`` equally spaced samples on ``[0, T]``.
    t_eval : array_like, optional
        Explicit sample times (overrides ``n_samples``).
    drift_tol : float
        Maximum accepted ``|H(x(t)) - H(x(0))|``; one retry at a 100x
        tighter tolerance is made before a :class:`RefineError`.

    Returns
    -------
    Trajectory
    """
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (4,) or not np.all(np.isfinite(z0)):
        raise ValidationError("initial state must be a finite 4-vector")
    if not math.isfinite(T):
        raise ValidationError("flight time must be finite")
    model.check_regular(z0)
    if T == 0:
        return Trajectory(np.zeros(1), z0[None].copy(), 0.0, model)
    if t_eval is None and n_samples is not None:
        t_eval = np.linspace(0.0, T, int(n_samples) + 1)
    rtol = tol
    for attempt in range(2):
        sol = _solve(model, z0, T, rtol, False, t_eval)
        states = sol.y.T
        h = model.hamiltonian(states)
        drift = float(np.max(np.abs(h - h[0]))) if len(h) else 0.0
        if drift <= drift_tol:
            break
        rtol = max(rtol * 1e-2, 1e-14)
    else:
        raise RefineError(f"energy drift {drift:.2e} exceeds {drift_tol:.1e}", stage="integrate")
    return Trajectory(sol.t.copy(), states.copy(), drift, model, sol.sol)


def event_times(model, z0, event, horizon, tol=DEFAULT_RTOL, direction=0, min_time=0.0, count=1):
    """First ``count`` zeros ``(t, state)`` of ``event(t, y)`` after ``min_time`` within ``horizon``.

    Roots come from the integrator's event locator (Brent's method on the
    dense output, time accuracy near machine precision).
    """
    def ev(t, y):
        return event(t, y)
    ev.direction = direction
    sol = _solve(model, np.asarray(z0, dtype=float), horizon, tol, False, None, [ev])
    out = [(float(t), np.asarray(y)) for t, y in zip(sol.t_events[0], sol.y_events[0]) if t > min_time]
    return out[:count]


def first_event(model, z0, event, horizon, tol=DEFAULT_RTOL, direction=0, min_time=0.0):
    """First zero after ``min_time`` as ``(t, state)``, or ``None``."""
    hits = event_times(model, z0, event, horizon, tol, direction, min_time, 1)
    return hits[0] if hits else None


# ---------------------------------------------------------------------------
# variational flow
# ---------------------------------------------------------------------------

def symplectic_drift(mats):
    """``max |M^T J4 M - J4| / max(1, |M|^2)`` over a stack of 4x4 matrices."""
    mats = np.asarray(mats)
    d = np.einsum("nji,jk,nkl->nil", mats, J4, mats) - J4
    scale = np.maximum(1.0, np.einsum("nij,nij->n", mats, mats))
    return float(np.max(np.abs(d).max(axis=(1, 2)) / scale))


@dataclass(frozen=True, eq=False)
class MonodromyPath:
    """Solutions ``M(t)`` of ``M' = DX_H(x(t)) M``, ``M(0) = Id``, along a trajectory."""

    times: np.ndarray
    matrices: np.ndarray
    states: np.ndarray
    base: Trajectory
    symplectic_drift: float

    @property
    def endpoint(self):
        return self.matrices[-1]

    def flow_direction_defect(self):
        """``max |M(t) X_H(x0) - X_H(x(t))|`` (the flow direction is carried to itself)."""
        model = self.base.model
        x0 = hamiltonian_vector_field(model, self.states[0])
        xs = np.array([hamiltonian_vector_field(model, s) for s in self.states])
        return float(np.max(np.linalg.norm(self.matrices @ x0 - xs, axis=1)))


def integrate_variational(model, traj, tol=DEFAULT_RTOL):
    """Variational equation along ``traj`` sampled at the trajectory's times."""
    if traj.duration == 0:
        m = np.eye(4)[None]
        return MonodromyPath(traj.times.copy(), m, traj.states.copy(), traj, 0.0)
    y0 = np.concatenate([traj.states[0], np.eye(4).ravel()])
    sol = _solve(model, y0, traj.times[-1], tol, True, traj.times)
    states = sol.y[:4].T
    mats = sol.y[4:].T.reshape(-1, 4, 4)
    drift = symplectic_drift(mats)
    if drift > SYMPLECTIC_DRIFT_TOL:
        raise RefineError(f"symplecticity drift {drift:.2e} in the variational flow",
                          stage="integrate_variational")
    return MonodromyPath(sol.t.copy(), mats, states, traj, drift)


# ---------------------------------------------------------------------------
# frames of the contact planes
# ---------------------------------------------------------------------------

def _quaternionic(x):
    """``(j z, i j z)`` in canonical coordinates for ``z = (q1 + i p1, q2 + i p2)``."""
    q1, q2, p1, p2 = np.moveaxis(np.asarray(x, dtype=float), -1, 0)
    v1 = np.stack([-q2, q1, p2, -p1], axis=-1)
    v2 = np.stack([-p2, p1, -q2, q1], axis=-1)
    return v1, v2


def _project(model, x, v):
    """Project v into ``T_x Sigma`` along the radial direction x."""
    g = model.gradient(x)
    a = np.sum(g * v, axis=-1) / np.sum(g * x, axis=-1)
    return v - a[..., None] * x


def _rotate(e1, e2, angle):
    c, s = np.cos(angle), np.sin(angle)
    c = np.asarray(c)[..., None] if np.ndim(c) else c
    s = np.asarray(s)[..., None] if np.ndim(s) else s
    return c * e1 + s * e2, -s * e1 + c * e2


@dataclass(frozen=True)
class FrameField:
    """A unitary frame of ``xi`` defined at every point of a star-shaped level.

    ``kind`` is ``global`` (the projected quaternionic pair ``(j z, k z)``,
    rotated by the constant ``angle``) or ``normal`` (a constant complex
    direction ``axis``, projected; only meaningful where it is transverse to
    the span of ``z`` and ``i z``).
    """

    model: object
    kind: str = "global"
    angle: float = 0.0
    axis: tuple = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "global":
            v1, v2 = _quaternionic(x)
        elif self.kind == "normal":
            a = np.asarray(self.axis, dtype=float)
            ia = np.array([-a[2], -a[3], a[0], a[1]])
            v1 = np.broadcast_to(a, x.shape).copy()
            v2 = np.broadcast_to(ia, x.shape).copy()
            # remove the components along x and i x so that v lies in ker lambda0
            ix = np.stack([-x[..., 2], -x[..., 3], x[..., 0], x[..., 1]], axis=-1)
            nx = np.sum(x * x, axis=-1)[..., None]
            for v in (v1, v2):
                v -= np.sum(v * x, axis=-1)[..., None] * x / nx
                v -= np.sum(v * ix, axis=-1)[..., None] * ix / nx
            w = np.sqrt(np.sum(v1 * v1, axis=-1))[..., None]
            if np.any(w < 1e-8):
                raise GeometryError("normal axis is tangent to the Hopf direction; frame degenerates")
            v1, v2 = v1 / w * np.sqrt(nx), v2 / w * np.sqrt(nx)
        else:
            raise ValidationError(f"unknown frame kind {self.kind!r}")
        if self.angle:
            v1, v2 = _rotate(v1, v2, self.angle)
        e1 = _project(self.model, x, v1)
        e2 = _project(self.model, x, v2)
        r = np.sqrt(np.sum(x * x, axis=-1))[..., None]
        return e1 / r, e2 / r

    def matrix(self, x):
        """Columns ``[X_H, x, e1, e2]`` at a single point."""
        x = np.asarray(x, dtype=float)
        e1, e2 = self(x)
        return np.column_stack([hamiltonian_vector_field(self.model, x), x, e1, e2])

    def derivative(self, x):
        """Derivative of :meth:`matrix` along the flow, by centered differences."""
        v = hamiltonian_vector_field(self.model, x)
        h = _FD_STEP / max(1.0, float(np.linalg.norm(v)))
        return (self.matrix(x + h * v) - self.matrix(x - h * v)) / (2 * h)


def symmetric_angle(model, involution, probe=None):
    """Constant rotation making the global frame symmetric under an anti-unitary involution.

    For ``R`` anti-unitary, ``R (j z)`` and ``j (R z)`` differ by a constant
    unit factor ``e^{2 i a}``; rotating the frame by ``a`` gives
    ``DR e1(x) = e1(R x)`` and ``DR e2(x) = -e2(R x)``.
    """
    m = involution.matrix
    if not np.allclose(m.T @ m, np.eye(4), atol=1e-12) or involution.kind != "anti_symplectic":
        raise GeometryError(f"{involution.label} is not anti-unitary; no constant symmetric rotation")
    probes = [np.array([0.31, 0.52, -0.47, 0.21]), np.array([-0.2, 0.7, 0.1, 0.45])]
    if probe is not None:
        probes = [np.asarray(probe, dtype=float)] + probes
    phases = []
    for x in probes:
        v1, v2 = _quaternionic(x)
        w1, _ = _quaternionic(m @ x)
        rv = m @ v1
        # complex coordinate of R v1 in the basis (w1, i w1)
        n = float(w1 @ w1)
        iw1 = np.array([-w1[2], -w1[3], w1[0], w1[1]])
        phases.append(complex(rv @ w1 / n, rv @ iw1 / n))
    if max(abs(abs(p) - 1) for p in phases) > 1e-10 or max(abs(p - phases[0]) for p in phases) > 1e-10:
        raise GeometryError("involution does not act on the quaternionic frame by a constant phase")
    # R(e^{ia} v1) = e^{-ia} R v1 = e^{-ia} c w1 must equal e^{ia} w1
    return 0.5 * math.atan2(phases[0].imag, phases[0].real)


@dataclass(frozen=True, eq=False)
class TrivializationFrame:
    """Frame values along a trajectory with its winding against the global frame."""

    times: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    symmetric_flag: bool
    winding_offset: int
    field: FrameField
    involution: object = None

    def pairing_defects(self, states):
        """``(max |lambda0(e_i)|, max |omega0(e1, e2) - 1|)`` along the states."""
        lam = max(float(np.max(np.abs(liouville_form(states, self.e1)))),
                  float(np.max(np.abs(liouville_form(states, self.e2)))))
        om = np.einsum("ni,ij,nj->n", self.e1, J4, self.e2)
        return lam, float(np.max(np.abs(om - 1.0)))

    def to_json(self):
        return json.dumps({"times": self.times.tolist(), "e1": self.e1.tolist(), "e2": self.e2.tolist(),
                           "symmetric": self.symmetric_flag, "winding_offset": self.winding_offset,
                           "kind": self.field.kind, "angle": self.field.angle})


def frame_winding(field_a, field_b, states, closed=True):
    """Winding of ``field_b``'s first vector in the coordinates of ``field_a`` along ``states``.

    For a closed orbit (``states[-1] == states[0]``) the result is an integer.
    """
    a1, a2 = field_a(states)
    b1, _ = field_b(states)
    # coordinates of b1 in (a1, a2) via omega0: c1 = omega0(b1, a2), c2 = omega0(a1, b1)
    c1 = np.einsum("ni,ij,nj->n", b1, J4, a2)
    c2 = np.einsum("ni,ij,nj->n", a1, J4, b1)
    ang = np.unwrap(np.arctan2(c2, c1))
    if np.max(np.abs(np.diff(ang))) > np.pi / 2:
        raise RefineError("frame rotates too fast between samples", stage="frame_winding")
    w = (ang[-1] - ang[0]) / (2 * np.pi)
    if closed:
        if abs(w - round(w)) > 1e-6:
            raise ConsistencyError(f"frame winding {w} not an integer on a closed orbit")
        return int(round(w))
    return float(w)


def build_frame(model, traj, symmetric=False, involution=None, kind="global", axis=None):
    """Frame of ``xi`` along ``traj``.

    Parameters
    ----------
    kind : {"global", "normal"}
        ``global`` is the disk-extendable reference frame; ``normal`` uses a
        constant complex direction ``axis`` (e.g. the z2-axis along an orbit
        in ``C x {0}``).
    symmetric : bool
        Rotate the global frame so that it satisfies the conjugation relation
        for ``involution``.
    """
    states = traj.states
    angle = 0.0
    if symmetric:
        if involution is None:
            raise ValidationError("symmetric frame needs an involution")
        if kind != "global":
            raise ValidationError("symmetric frames are built from the global frame")
        angle = symmetric_angle(model, involution)
    fld = FrameField(model, kind, angle, None if axis is None else tuple(axis))
    e1, e2 = fld(states)
    closed = bool(np.linalg.norm(states[-1] - states[0]) < 1e-6)
    offset = frame_winding(FrameField(model), fld, states, closed) if len(states) > 1 and closed else 0
    return TrivializationFrame(traj.times.copy(), e1, e2, bool(symmetric), int(offset), fld, involution)


def symmetry_defect(frame, states, involution):
    """``max |DR e1(x) - e1(Rx)|, |DR e2(x) + e2(Rx)|`` over the states."""
    m = involution.matrix
    rs = states @ m.T
    f1, f2 = frame.field(rs)
    d1 = frame.e1 @ m.T - f1
    d2 = frame.e2 @ m.T + f2
    return float(max(np.max(np.abs(d1)), np.max(np.abs(d2))))


# ---------------------------------------------------------------------------
# transverse paths
# ---------------------------------------------------------------------------

def _frame_inverse(f):
    cond = np.linalg.cond(f)
    if not np.isfinite(cond) or cond > FRAME_COND_LIMIT:
        raise IllConditionedError(f"frame matrix condition number {cond:.2e}; flow direction nearly "
                                  "in the frame span", stage="transverse_path")
    return np.linalg.inv(f)


def transverse_path(mono, frame, period=None):
    """Transverse linearized flow ``Phi(t)`` in the frame, on the normalized time ``[0, 1]``.

    ``Phi(t)`` is the ``xi``-block of ``F(x(t))^{-1} M(t T) F(x(0))`` with
    ``F = [X_H, x, e1, e2]``; it is projected along the flow direction.
    """
    if len(mono.times) != len(frame.times) or np.max(np.abs(mono.times - frame.times)) > 1e-12:
        raise ValidationError("monodromy and frame must be sampled at the same times")
    T = float(mono.times[-1]) if period is None else float(period)
    f0 = frame.field.matrix(mono.states[0])
    phis = []
    for x, m in zip(mono.states, mono.matrices):
        fi = _frame_inverse(frame.field.matrix(x))
        phis.append((fi @ m @ f0)[2:, 2:])
    phis = np.array(phis)
    drift = det_drift(phis)
    if drift > 1e-8:
        raise RefineError(f"transverse path determinant drift {drift:.2e}", stage="transverse_path")
    phis /= np.sqrt(np.linalg.det(phis))[:, None, None]
    return SymplecticPath(mono.times / T, phis, 1)


def generator_samples(model, states, field, T):
    """``S = -J0 T G_xi`` with ``G = F^{-1} (DX_H F - F')`` at each state."""
    out = []
    for x in states:
        f = field.matrix(x)
        a = J4.T @ model.hessian(x)
        g = _frame_inverse(f) @ (a @ f - field.derivative(x))
        s = -J0 @ (T * g[2:, 2:])
        out.append(0.5 * (s + s.T))
    return np.array(out)


def transverse_loop(model, x0, T, field, n=256, symmetric=False, tol=DEFAULT_RTOL):
    """Loop of generators ``S(t)``, ``t in [0, 1)``, of the transverse flow along a closed orbit.

    Evaluated from the Hessian and the frame along ``n`` equally spaced
    states; the variational equation is not used.
    """
    if n < 64:
        raise ValidationError("at least 64 loop samples are needed")
    traj = integrate(model, x0, T, tol=tol, n_samples=n)
    s = generator_samples(model, traj.states[:-1], field, T)
    if symmetric:
        s = symmetrize_samples(s)
    return SymmetricLoop(np.arange(n) / n, s, symmetric)


SYMMETRY_SAMPLE_TOL = 1e-6


def symmetrize_samples(s, tol=SYMMETRY_SAMPLE_TOL):
    """Project uniform samples onto loops with ``S(-t) = I S(t) I``.

    Raises :class:`ConsistencyError` if the defect exceeds ``tol`` relative to
    the sup norm (the frame is then not symmetric for the orbit).
    """
    conj = np.diag([1.0, -1.0])
    mirrored = conj @ s[(-np.arange(len(s))) % len(s)] @ conj
    defect = float(np.max(np.abs(s - mirrored)))
    scale = max(1.0, float(np.max(np.abs(s))))
    if defect > tol * scale:
        raise ConsistencyError(f"generator samples are not symmetric (defect {defect:.2e})",
                               stage="transverse_loop")
    return 0.5 * (s + mirrored)
