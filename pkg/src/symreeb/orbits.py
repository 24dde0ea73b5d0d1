"""Symmetric periodic orbits: chord shooting, closing by symmetry, classification, linking.

A chord of flight ``tau`` runs from ``Fix(R)`` to ``Fix(R')`` on an energy
level. Closing it with the reflections gives ``x(-t) = R x(t)`` and
``x(2 tau - t) = R' x(t)``, hence ``x(t + 2 tau) = R' R x(t)``; the orbit has
period ``2 tau * ord(R' R)``. ``R' = R`` is the half chord, a commuting pair
gives the quarter chord.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .errors import (CollisionError, ConsistencyError, DomainError, GeometryError, NumericalError,
                     RefineError, SearchFailure, ValidationError)
from .flow import (DEFAULT_RTOL, FrameField, build_frame, event_times, integrate, integrate_variational,
                   transverse_loop, transverse_path)
from .sympath import cz_index_rotation, cz_index_spectral, rs_index_crossing, rs_index_spectral
from .systems import hamiltonian_vector_field

SCHEMA_VERSION = 1
CLOSURE_TOL = 1e-8
ENDPOINT_TOL = 1e-9
SYMMETRY_TOL = 1e-6
MAX_NEWTON = 50
MAX_COVER = 12
DEFAULT_SEEDS = 64


# ---------------------------------------------------------------------------
# fixed-point charts
# ---------------------------------------------------------------------------

def _null(a, tol=1e-10):
    _, s, vt = np.linalg.svd(np.atleast_2d(a))
    rank = int(np.sum(s > tol))
    return vt[rank:].T


class FixChart:
    """One-parameter chart of ``Fix(R)`` intersected with the level ``H = c``.

    If ``Fix(R)`` is spanned by a position direction ``e`` and a momentum
    direction ``f`` (the mechanical case), the parameter ``s`` is the position
    coordinate and the momentum solves a quadratic; ``branch`` picks the root.
    Otherwise ``Fix(R)`` is parameterized by the angle ``s`` in the plane and
    the radius along the ray solves ``H = c``.
    """

    def __init__(self, model, involution, c):
        self.model = model
        self.involution = involution
        self.c = float(c)
        fb = involution.fixed_basis
        if fb.shape[1] != 2:
            raise GeometryError(f"Fix({involution.label}) is not two-dimensional")
        pos = fb @ _null(fb[2:])
        mom = fb @ _null(fb[:2])
        if pos.shape[1] == 1 and mom.shape[1] == 1:
            self.mode = "mechanical"
            e, f = pos[:, 0], mom[:, 0]
            self.e = e * np.sign(e[np.argmax(np.abs(e))])
            self.f = f * np.sign(f[np.argmax(np.abs(f))])
        else:
            self.mode = "angular"
            self.e, self.f = fb[:, 0], fb[:, 1]

    def _coefficients(self, s):
        base = s * self.e
        h = [float(self.model.hamiltonian(base + b * self.f)) for b in (-1.0, 0.0, 1.0, 2.0)]
        a = 0.5 * (h[2] + h[0]) - h[1]
        b = 0.5 * (h[2] - h[0])
        g = h[1] - self.c
        if abs(a * 4 + b * 2 + g + self.c - h[3]) > 1e-9 * max(1.0, abs(h[3])):
            raise GeometryError("Hamiltonian is not quadratic along the momentum direction of Fix")
        return a, b, g

    def discriminant(self, s):
        if self.mode != "mechanical":
            return 1.0
        if self.model.collision_distance(s * self.e) < 1e-6:
            return -1.0
        a, b, g = self._coefficients(s)
        return b * b - 4 * a * g

    def point(self, s, branch=1):
        if self.mode == "mechanical":
            a, b, g = self._coefficients(s)
            disc = b * b - 4 * a * g
            if disc < 0:
                raise DomainError(f"Fix chart: no point on the level at s = {s}")
            root = (-b + branch * math.sqrt(disc)) / (2 * a)
            return s * self.e + root * self.f
        from .systems import radial_scale
        d = math.cos(s) * self.e + math.sin(s) * self.f
        return radial_scale(self.model, d, self.c) * d

    def derivative(self, s, branch=1, h=1e-7):
        return (self.point(s + h, branch) - self.point(s - h, branch)) / (2 * h)

    def intervals(self, span=4.0, n=4001):
        """Parameter intervals where the level meets Fix (the whole circle in angular mode)."""
        if self.mode == "angular":
            return [(0.0, 2 * math.pi)]
        grid = np.linspace(-span, span, n)
        ok = np.array([self.discriminant(s) >= 0 for s in grid])
        out = []
        i = 0
        while i < n:
            if ok[i]:
                j = i
                while j + 1 < n and ok[j + 1]:
                    j += 1
                out.append((float(grid[i]), float(grid[j])))
                i = j + 1
            else:
                i += 1
        return out

    def primary_intervals(self, span=4.0):
        """Intervals of the bounded component: adjacent to the first primary, or containing the origin."""
        ivs = self.intervals(span)
        if not self.model.singular_points:
            inner = [(lo, hi) for lo, hi in ivs if lo <= 0.0 <= hi]
            return inner or ivs
        a, b = self.model.singular_points[0]
        keep = []
        for lo, hi in ivs:
            for s in (lo, hi):
                q = s * self.e
                if math.hypot(q[0] - a, q[1] - b) < 0.01:
                    keep.append((lo, hi))
                    break
        return keep


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChordSpec:
    """Boundary-value problem for a chord from ``Fix(start)`` to ``Fix(end)``."""

    start: str
    end: str
    c: float
    s: float
    time_guess: float
    branch: int = 1
    fraction: str = None

    def __post_init__(self):
        if self.time_guess <= 0:
            raise ValidationError("time guess must be positive")
        if self.branch not in (1, -1):
            raise ValidationError("branch must be +1 or -1")
        frac = self.fraction or ("half" if self.start == self.end else "quarter")
        object.__setattr__(self, "fraction", frac)

    def seed(self, model):
        chart = FixChart(model, model.involution(self.start), self.c)
        return chart.point(self.s, self.branch)


@dataclass(eq=False)
class OrbitRecord:
    """A closed orbit assembled from a chord."""

    model: object
    x0: np.ndarray
    period: float
    chord: ChordSpec
    chord_time: float
    chord_end: np.ndarray
    symmetry: list
    sym_type: str
    closure_residual: float
    energy_drift: float
    reflection_residual: float
    covering_number: int
    trajectory: object = field(default=None, repr=False)
    monodromy: object = field(default=None, repr=False)
    indices: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @property
    def energy(self):
        return float(self.model.hamiltonian(self.x0))

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "system": self.model.config(),
            "x0": [float(v) for v in self.x0],
            "period": float(self.period),
            "chord": {"start": self.chord.start, "end": self.chord.end, "fraction": self.chord.fraction,
                      "s": float(self.chord.s), "branch": self.chord.branch,
                      "time": float(self.chord_time), "end_point": [float(v) for v in self.chord_end]},
            "symmetry": list(self.symmetry),
            "sym_type": self.sym_type,
            "closure_residual": float(self.closure_residual),
            "energy_drift": float(self.energy_drift),
            "reflection_residual": float(self.reflection_residual),
            "covering_number": int(self.covering_number),
            "indices": {k: v if isinstance(v, dict) else v.to_dict() for k, v in self.indices.items()},
            "notes": self.notes,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def write_catalog(records, path):
    """JSON-lines orbit catalog, one record per line."""
    with open(path, "w") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_catalog(path):
    """Parsed dicts of a JSON-lines catalog (schema version checked)."""
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                d = json.loads(line)
                if d.get("schema_version") != SCHEMA_VERSION:
                    raise ValidationError(f"unsupported catalog schema {d.get('schema_version')}")
                out.append(d)
    return out


# ---------------------------------------------------------------------------
# shooting
# ---------------------------------------------------------------------------

def _order(m, limit=24):
    p = np.eye(4)
    for k in range(1, limit + 1):
        p = m @ p
        if np.allclose(p, np.eye(4), atol=1e-10):
            return k
    raise ValidationError("composition of the involutions has no finite order")


def _residual(model, x0, tau, basis, variational=False, tol=DEFAULT_RTOL):
    if variational:
        from .flow import _solve
        y0 = np.concatenate([x0, np.eye(4).ravel()])
        sol = _solve(model, y0, tau, tol, True, None)
        y = sol.y[:, -1]
        return basis.T @ y[:4], y[:4], y[4:].reshape(4, 4)
    traj = integrate(model, x0, tau, tol=tol, n_samples=1)
    return basis.T @ traj.end, traj.end, None


def _newton(model, chart, branch, s, tau, basis, tol=ENDPOINT_TOL, max_iter=MAX_NEWTON):
    """Damped Newton on ``(s, tau)`` for ``B^T phi^tau(x0(s)) = 0``."""
    x0 = chart.point(s, branch)
    r, x1, m = _residual(model, x0, tau, basis, True)
    norm = float(np.linalg.norm(r))
    for it in range(max_iter):
        if norm < tol * 0.1:
            return s, tau, x0, x1, norm, it
        jac = np.column_stack([basis.T @ (m @ chart.derivative(s, branch)),
                               basis.T @ hamiltonian_vector_field(model, x1)])
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            raise RefineError("singular shooting Jacobian", stage="shoot_chord")
        lam = 1.0
        while True:
            s_new, tau_new = s + lam * step[0], tau + lam * step[1]
            try:
                if tau_new <= 0:
                    raise DomainError("non-positive flight time")
                x0n = chart.point(s_new, branch)
                rn, x1n, mn = _residual(model, x0n, tau_new, basis, True)
                normn = float(np.linalg.norm(rn))
                if normn <= (1 - 1e-4 * lam) * norm or normn < tol * 0.1:
                    break
            except (DomainError, CollisionError, RefineError):
                pass
            lam *= 0.5
            if lam < 1e-6:
                raise RefineError(f"Newton stagnated at residual {norm:.2e}", stage="shoot_chord")
        s, tau, x0, x1, r, m, norm = s_new, tau_new, x0n, x1n, rn, mn, normn
    if norm < tol:
        return s, tau, x0, x1, norm, max_iter
    raise RefineError(f"Newton did not converge in {max_iter} iterations (residual {norm:.2e})",
                      stage="shoot_chord")


def _assemble(model, chord_traj_fn, start_m, end_m, tau, n_order, times):
    """States of the closed orbit from the chord via the reflection formulas."""
    g = end_m @ start_m
    out = []
    for t in times:
        j, r = divmod(t, 2 * tau)
        j = int(j) % n_order
        if r <= tau:
            y = chord_traj_fn(r)
        else:
            y = end_m @ chord_traj_fn(2 * tau - r)
        out.append(np.linalg.matrix_power(g, j) @ y)
    return np.array(out)


def _trace_shift(traj, target, period, n=2001):
    """Time ``a`` with ``x(a)`` closest to ``target`` and that distance (refined on dense output)."""
    coarse = np.linspace(0.0, period, n)
    idx = int(np.argmin(np.linalg.norm(traj.state_at(coarse) - target, axis=1)))
    h = period / (n - 1)

    def dist(t):
        return float(np.linalg.norm(traj.state_at(t % period) - target))

    res = minimize_scalar(dist, bounds=(coarse[idx] - h, coarse[idx] + h), method="bounded",
                          options={"xatol": 1e-13})
    return float(res.x % period), float(res.fun)


def symmetry_labels(model, traj, period, n_check=200):
    """Labels of the model's symmetries leaving the trace invariant within :data:`SYMMETRY_TOL`.

    Anti-symplectic ``R`` must satisfy ``R x(t) = x(a - t)``; symplectic
    ``g`` must satisfy ``g x(t) = x(t + a)``, with ``a`` located by
    minimizing the distance to ``R x(0)`` along the dense trace.
    """
    out = {}
    x0 = traj.state_at(0.0)
    for label, inv in sorted(model.involutions.items()):
        a, d0 = _trace_shift(traj, inv.matrix @ x0, period)
        if d0 > 1e-4:
            out[label] = d0
            continue
        ts = np.linspace(0.0, period, n_check, endpoint=False)
        xs = traj.state_at(ts)
        if inv.kind == "anti_symplectic":
            partner = traj.state_at((a - ts) % period)
        else:
            partner = traj.state_at((ts + a) % period)
        out[label] = float(np.max(np.linalg.norm(xs @ inv.matrix.T - partner, axis=1)))
    return out


def covering_number(traj, period, tol=CLOSURE_TOL, max_cover=MAX_COVER):
    """Largest ``k <= max_cover`` with ``x(period / k) = x(0)``."""
    x0 = traj.state_at(0.0)
    for k in range(max_cover, 1, -1):
        if np.linalg.norm(traj.state_at(period / k) - x0) < tol:
            return k
    return 1


def shoot_chord(model, spec, samples=1024, tol=DEFAULT_RTOL):
    """Refine a chord with Newton and close it to a periodic orbit.

    Returns
    -------
    OrbitRecord
        With the trajectory over one full period (direct integration) and
        residuals of the closing and reflection checks.
    """
    start = model.involution(spec.start)
    end = model.involution(spec.end)
    if start.kind != "anti_symplectic" or end.kind != "anti_symplectic":
        raise ValidationError("chords run between fixed sets of anti-symplectic involutions")
    chart = FixChart(model, start, spec.c)
    basis = end.moving_basis
    s, tau, x0, x1, res, its = _newton(model, chart, spec.branch, spec.s, spec.time_guess, basis)
    n_order = _order(end.matrix @ start.matrix)
    period = 2 * tau * n_order
    if abs(float(model.hamiltonian(x0)) - spec.c) > 1e-10:
        raise ConsistencyError("seed left the energy level", stage="shoot_chord")
    if start.fix_distance(x0) > 1e-12:
        raise ConsistencyError("seed left Fix(start)", stage="shoot_chord")
    traj = integrate(model, x0, period, tol=tol, n_samples=samples)
    closure = float(np.linalg.norm(traj.end - traj.start))
    chord = integrate(model, x0, tau, tol=tol)
    assembled = _assemble(model, chord.state_at, start.matrix, end.matrix, tau, n_order, traj.times)
    reflection = float(np.max(np.linalg.norm(assembled - traj.states, axis=1)))
    cover = covering_number(traj, period)
    labels = symmetry_labels(model, traj, period)
    sym = sorted(k for k, v in labels.items() if v < SYMMETRY_TOL)
    anti = {k for k in sym if model.involutions[k].kind == "anti_symplectic"}
    distinct = {model.involutions[k].matrix.tobytes() for k in anti}
    has_cyclic = model.cyclic_label is not None and model.cyclic_label in sym
    if len(distinct) >= 2 or (distinct and has_cyclic):
        sym_type = "doubly_symmetric"
    elif distinct:
        sym_type = "symmetric"
    else:
        sym_type = "nonsymmetric"
    chord_spec = ChordSpec(spec.start, spec.end, spec.c, float(s), float(tau), spec.branch, spec.fraction)
    rec = OrbitRecord(model, x0, float(period), chord_spec, float(tau), x1, sym, sym_type, closure,
                      traj.energy_drift, reflection, cover, traj,
                      notes={"newton_iterations": its, "endpoint_residual": res,
                             "symmetry_defects": labels})
    if closure > CLOSURE_TOL:
        raise RefineError(f"orbit does not close: |x(T) - x(0)| = {closure:.2e}", stage="shoot_chord")
    if reflection > 1e-7:
        raise ConsistencyError(f"reflection assembly differs from direct integration by {reflection:.2e}",
                               stage="shoot_chord")
    return rec


def q_winding(states, center=(0.0, 0.0)):
    """Winding number of the q-projection about ``center`` (in library time)."""
    a = np.unwrap(np.arctan2(states[:, 1] - center[1], states[:, 0] - center[0]))
    return float((a[-1] - a[0]) / (2 * np.pi))


def classify_symmetry(orbit, model=None):
    """Assign ``type_I``/``type_II`` for planar models from the chord endpoints on the axis.

    The fixed set of ``rho`` is split into ``q1 <= 0`` and ``q1 >= 0``;
    type I chords join the two halves. Also records the q-plane winding about
    the first primary and the physical sense of motion (the library flow
    follows ``iota_X omega0 = -dH``, which runs opposite to physical time).
    """
    model = orbit.model if model is None else model
    if model.name not in ("pcr3bp", "hill"):
        raise ValidationError("type I/II classification applies to the planar three-body models")
    a, b = orbit.x0[0], orbit.chord_end[0]
    if min(abs(a), abs(b)) < 1e-9:
        raise GeometryError("chord endpoint at the junction of the two half-axes; unclassifiable")
    start = model.involution(orbit.chord.start)
    end = model.involution(orbit.chord.end)
    if np.allclose(start.matrix, end.matrix) and model.involution("rho").fix_distance(orbit.x0) < 1e-12:
        kind = "type_I" if a * b < 0 else "type_II"
        orbit.notes["symmetry_class"] = kind
        if orbit.sym_type == "symmetric":
            orbit.sym_type = kind
    w = q_winding(orbit.trajectory.states, model.singular_points[0] if model.singular_points else (0, 0))
    orbit.notes["q_winding"] = w
    orbit.notes["physical_motion"] = "retrograde" if -w < 0 else "direct"
    orbit.notes["chart"] = "planar"
    return orbit


# ---------------------------------------------------------------------------
# multistart search
# ---------------------------------------------------------------------------

def _crossing_times(model, x0, end, horizon, count):
    """First ``count`` times the flow from x0 crosses ``Fix(end)`` in its position component."""
    basis = end.moving_basis
    pos = basis[:, np.argmax(np.linalg.norm(basis[:2], axis=0))]
    hits = event_times(model, x0, lambda t, y: float(pos @ y), horizon, min_time=1e-9, count=count)
    return [t for t, _ in hits]


def same_orbit(a, b, tol=1e-6):
    """Equal periods and the start of ``b`` on the trace of ``a`` (orbits through a common point coincide)."""
    if abs(a.period - b.period) > tol * max(1.0, a.period):
        return False
    return _trace_shift(a.trajectory, b.x0, a.period)[1] < tol


def _run_seed(args):
    model, start, end, c, s, branch, tau = args
    try:
        rec = shoot_chord(model, ChordSpec(start, end, c, s, tau, branch))
    except (NumericalError, DomainError, ValidationError) as exc:
        return None, f"{type(exc).__name__}: {exc}"
    return rec, None


def search_orbits(model, start, end, c, n_seeds=DEFAULT_SEEDS, crossings=2, horizon=None, jobs=1,
                  intervals=None, stop_after=None, predicate=None):
    """Multistart chord search along ``Fix(start)``.

    Seeds are spaced evenly (interval midpoints of an ``n_seeds`` split over
    the admissible chart intervals, both momentum branches); time guesses
    are the first ``crossings`` passages through the position component of
    ``Fix(end)``. Results are de-duplicated with :func:`same_orbit` in input
    order; multiply covered orbits are dropped.

    Returns
    -------
    (records, failures) : list of OrbitRecord, list of str
    """
    model = model.with_energy(c)
    start_inv, end_inv = model.involution(start), model.involution(end)
    chart = FixChart(model, start_inv, c)
    ivs = intervals or chart.primary_intervals()
    if not ivs:
        raise SearchFailure(f"Fix({start}) does not meet the level c = {c}", stage="search")
    total = sum(hi - lo for lo, hi in ivs)
    branches = (1, -1) if chart.mode == "mechanical" else (1,)
    per_branch = max(1, n_seeds // len(branches))
    seeds = []
    for branch in branches:
        for i in range(per_branch):
            u = (i + 0.5) / per_branch * total
            for lo, hi in ivs:
                if u <= hi - lo:
                    seeds.append((lo + u, branch))
                    break
                u -= hi - lo
    if horizon is None:
        horizon = 50.0
    tasks = []
    failures = []
    for s, branch in seeds:
        try:
            x0 = chart.point(s, branch)
            if model.collision_distance(x0) < 1e-3:
                continue
            for tau in _crossing_times(model, x0, end_inv, horizon, crossings):
                tasks.append((model, start, end, c, s, branch, tau))
        except (NumericalError, DomainError) as exc:
            failures.append(f"seed {s:.6f}/{branch}: {exc}")
    results = []
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_seed, tasks))
    else:
        for task in tasks:
            results.append(_run_seed(task))
            if stop_after and predicate is not None:
                found = [r for r, _ in results
                         if r is not None and r.covering_number == 1 and predicate(r)]
                if len(found) >= stop_after:
                    break
    records = []
    for (rec, err), task in zip(results, tasks):
        if rec is None:
            failures.append(f"seed {task[4]:.6f}/{task[5]} tau {task[6]:.4f}: {err}")
            continue
        if rec.covering_number != 1:
            continue
        dup = any(same_orbit(other, rec) for other in records)
        if not dup:
            records.append(rec)
    return records, failures


# ---------------------------------------------------------------------------
# indices along orbits
# ---------------------------------------------------------------------------

def orbit_indices(model, orbit, involution=None, loop_samples=256, path_samples=512, iterate=1,
                  kinds=("spectral", "rotation")):
    """Indices of an orbit in the global (disk-extendable) frame, symmetric if ``involution`` given.

    Returns a dict ``{"cz_spectral", "cz_rotation", "rs_spectral", "rs_crossing"}``
    of :class:`IndexReport` (or error strings for failed methods).
    """
    inv = model.involution(involution) if isinstance(involution, str) else involution
    traj = integrate(model, orbit.x0, orbit.period, n_samples=path_samples)
    frame = build_frame(model, traj, symmetric=inv is not None, involution=inv)
    out = {}

    def attempt(key, fn):
        try:
            out[key] = fn()
        except NumericalError as exc:
            out[key] = f"{type(exc).__name__}: {exc}"

    if "rotation" in kinds:
        mono = integrate_variational(model, traj)
        path = transverse_path(mono, frame)
        path_k = path.iterate(iterate) if iterate > 1 else path
        attempt("cz_rotation", lambda: cz_index_rotation(path_k))
        if inv is not None:
            attempt("rs_crossing", lambda: rs_index_crossing(path_k))
        orbit.monodromy = mono
    if "spectral" in kinds:
        loop = transverse_loop(model, orbit.x0, orbit.period, frame.field, n=loop_samples,
                               symmetric=inv is not None)
        attempt("cz_spectral", lambda: cz_index_spectral(loop, iterate))
        if inv is not None:
            attempt("rs_spectral", lambda: rs_index_spectral(loop, iterate))
    key = "symmetric" if inv is not None else "global"
    orbit.indices.update({f"{key}:{k}": v for k, v in out.items()})
    return out


# ---------------------------------------------------------------------------
# linking
# ---------------------------------------------------------------------------

_CPLX = [0, 2, 1, 3]  # canonical (q1, q2, p1, p2) -> complex pair order (x1, y1, x2, y2)


def _to_sphere(points):
    p = np.asarray(points, dtype=float)
    return p / np.linalg.norm(p, axis=1, keepdims=True)


def _pole_candidates(n=256, seed=12345):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=(n, 4))
    return c / np.linalg.norm(c, axis=1, keepdims=True)


def _oriented_basis(pole):
    """Orthonormal ``b1, b2, b3`` with ``det(-pole, b1, b2, b3) > 0`` in the complex orientation.

    The projection from ``pole`` sends ``T_{-pole} S^3`` to R^3 by
    ``v -> (v . b_i) / 2``; with the outward normal ``-pole`` first this is
    orientation-preserving.
    """
    m = np.linalg.qr(np.column_stack([pole, np.eye(4)]))[0]
    if m[:, 0] @ pole < 0:
        m[:, 0] *= -1
    basis = m[:, 1:4]
    if np.linalg.det(np.column_stack([-pole, basis])[_CPLX]) < 0:
        basis[:, 0] *= -1
    return basis


def stereographic(points, pole):
    """Stereographic projection of S^3 from ``pole`` to R^3 (orientation-preserving)."""
    basis = _oriented_basis(pole)
    p = np.asarray(points, dtype=float)
    return (p @ basis) / (1.0 - p @ pole)[:, None]


def _choose_pole(c1, c2):
    cands = _pole_candidates()
    d1 = np.min(np.linalg.norm(cands[:, None] - c1[None, ::max(1, len(c1) // 256)], axis=2), axis=1)
    d2 = np.min(np.linalg.norm(cands[:, None] - c2[None, ::max(1, len(c2) // 256)], axis=2), axis=1)
    return cands[int(np.argmax(np.minimum(d1, d2)))]


def _spectral_tangent(curve):
    """Tangent times parameter step of a closed curve sampled uniformly (FFT derivative)."""
    n = len(curve)
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    coeffs = np.fft.fft(curve, axis=0)
    deriv = np.fft.ifft(1j * k[:, None] * coeffs, axis=0).real
    return deriv * (2 * np.pi / n)


def gauss_linking(curve1, curve2, pole=None):
    """Gauss linking integral of two disjoint closed curves on S^3 (uniform closed samples)."""
    c1, c2 = _to_sphere(curve1), _to_sphere(curve2)
    if pole is None:
        pole = _choose_pole(c1, c2)
    p, q = stereographic(c1, pole), stereographic(c2, pole)
    return float(kernels.gauss_linking_sum(p, _spectral_tangent(p), q, _spectral_tangent(q)))


def _curve_of(obj, n):
    if isinstance(obj, OrbitRecord):
        traj = integrate(obj.model, obj.x0, obj.period, n_samples=n)
        return traj.states[:-1]
    return np.asarray(obj, dtype=float)


def linking_number(orbit1, orbit2, n=4096, min_distance=1e-4):
    """Integer linking number of two disjoint closed orbits (or sampled closed curves).

    Returns
    -------
    (int, float)
        The rounded value and the raw Gauss integral.
    """
    c1, c2 = _curve_of(orbit1, n), _curve_of(orbit2, n)
    d = kernels.min_pair_distance(_to_sphere(c1), _to_sphere(c2))
    if d < min_distance:
        raise GeometryError(f"curves too close ({d:.2e}) for a linking computation")
    raw = gauss_linking(c1, c2)
    if abs(raw - round(raw)) > 0.05:
        raise RefineError(f"Gauss integral {raw:.4f} not within 0.05 of an integer", stage="linking")
    return int(round(raw)), raw


def _curvature_radius(curve):
    d1 = _spectral_tangent(curve)
    d2 = _spectral_tangent(d1)
    speed = np.linalg.norm(d1, axis=1)
    cross2 = speed ** 2 * np.sum(d2 * d2, axis=1) - np.sum(d1 * d2, axis=1) ** 2
    kappa = np.sqrt(np.maximum(cross2, 0.0)) / speed ** 3
    return float(1.0 / np.max(kappa))


def self_linking(orbit, frame_field=None, rational=False, min_scale=1e-5, max_points=200000):
    """Self-linking number from the push-off along a disk-extendable section of ``xi``.

    The push-off uses the first frame vector (default: the global frame,
    which extends over every spanning disk). The scale starts at 1e-3 of the
    minimal curvature radius and is halved until two consecutive values
    agree.

    Returns
    -------
    (value, raw, scale)
    """
    model = orbit.model
    fld = frame_field or FrameField(model)
    base = _curve_of(orbit, 1024)
    sphere = _to_sphere(base)
    radius = _curvature_radius(sphere)
    length = float(np.sum(np.linalg.norm(np.roll(sphere, -1, axis=0) - sphere, axis=1)))
    eps = 1e-3 * radius
    previous = None
    history = []
    while eps >= min_scale:
        n = int(min(max_points, max(1024, 2 * length / eps)))
        n += n % 2
        curve = _curve_of(orbit, n)
        e1, _ = fld(curve)
        e1 = e1 / np.linalg.norm(e1, axis=1, keepdims=True)
        push = curve + eps * np.linalg.norm(curve, axis=1, keepdims=True) * e1
        raw = gauss_linking(curve, push)
        if rational:
            raw /= orbit.covering_number ** 2
        history.append((eps, raw))
        if abs(raw - round(raw)) <= 0.05 and previous is not None and round(previous) == round(raw):
            return int(round(raw)), raw, eps
        previous = raw
        eps /= 2
    raise RefineError(f"self-linking did not stabilize: {history}", stage="self_linking")


# ---------------------------------------------------------------------------
# predicate report
# ---------------------------------------------------------------------------

def predicate_report(orbit, sl=None):
    """Which of the disk-bounding hypotheses hold for an orbit.

    Missing inputs are reported as ``"not computed"``; failed index methods
    as their error strings.
    """
    def idx(name):
        for key, val in orbit.indices.items():
            if key.endswith(name) and not isinstance(val, str):
                return val
        errs = [v for k, v in orbit.indices.items() if k.endswith(name)]
        return errs[0] if errs else None

    cz = idx("cz_spectral") or idx("cz_rotation")
    rs = idx("rs_spectral") or idx("rs_crossing")
    rep = {
        "simply_covered": orbit.covering_number == 1,
        "self_linking_minus_one": "not computed" if sl is None else sl == -1,
        "mu_cz_at_least_3": "not computed" if cz is None else (cz if isinstance(cz, str) else cz.mu_cz >= 3),
        "mu_rs_at_least_3_2": "not computed" if rs is None else (rs if isinstance(rs, str) else rs.mu_rs >= 1.5),
        "symmetric": orbit.sym_type in ("symmetric", "doubly_symmetric", "type_I", "type_II"),
        "doubly_symmetric": orbit.sym_type == "doubly_symmetric",
        "mu_cz": None if cz is None or isinstance(cz, str) else cz.mu_cz,
        "mu_rs": None if rs is None or isinstance(rs, str) else rs.mu_rs,
        "self_linking": sl,
        "caveat": "unknottedness and the linking hypothesis on index-2 orbits are sampled, not certified",
    }
    return rep


def named_orbit(model, name):
    """The coordinate-axis orbits of the ellipsoid and Hopf models.

    ``P1`` is ``C x {0}`` through ``(r1, 0)``, ``P2`` is ``{0} x C`` through
    ``(0, r2)``; both are shot as half chords of ``rho`` so that the returned
    record carries the chord data.
    """
    if model.name not in ("ellipsoid", "hopf"):
        raise ValidationError("named orbits exist for the ellipsoid and Hopf models")
    a1, a2 = model.kind_params
    label = "rho"
    inv = model.involution(label)
    r1, r2 = 1.0 / math.sqrt(a1), 1.0 / math.sqrt(a2)
    if name == "P1":
        x0, half = np.array([r1, 0.0, 0.0, 0.0]), 0.5 * math.pi * r1 ** 2
    elif name == "P2":
        x0, half = np.array([0.0, r2, 0.0, 0.0]), 0.5 * math.pi * r2 ** 2
    else:
        raise ValidationError(f"unknown orbit {name!r}; use P1 or P2")
    if inv.fix_distance(x0) > 1e-12:
        x0 = np.array([x0[0], 0.0, 0.0, x0[1]])
    chart = FixChart(model, inv, 1.0)
    if chart.mode == "angular":
        s = math.atan2(float(chart.f @ x0), float(chart.e @ x0))
        branch = 1
    else:
        s = float(chart.e @ x0)
        branch = 1 if float(chart.f @ x0) >= 0 else -1
    rec = shoot_chord(model, ChordSpec(label, label, 1.0, s, half, branch))
    rec.notes["name"] = name
    return rec
