"""Model Hamiltonian systems with their symmetries.

Every state is canonical ``(q1, q2, p1, p2)``; the complex pair used for the
contact geometry is ``z_j = q_j + i p_j``, with ``lambda0 = (q dp - p dq)/2``,
``omega0 = dq ^ dp`` and ``omega0(u, v) = u^T J4 v``. The Hamiltonian vector
field follows ``iota_{X_H} omega0 = -dH``, i.e. ``X_H = J4^T grad H``, which is
a positive multiple of the Reeb field of ``lambda0`` on star-shaped levels.

Catalog: ``hopf``, ``ellipsoid``, ``henon_heiles``, ``hill``, ``pcr3bp``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import brentq

from . import _hamiltonians as ham
from .errors import DomainError, GeometryError, SearchFailure, ValidationError

J4 = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
COLLISION_RADIUS = 1e-6


def from_complex(z1, z2):
    """Canonical state from the complex pair ``(z1, z2)``; array inputs give shape ``(..., 4)``."""
    z1, z2 = np.broadcast_arrays(np.asarray(z1, dtype=complex), np.asarray(z2, dtype=complex))
    return np.stack([z1.real, z2.real, z1.imag, z2.imag], axis=-1)


def to_complex(x):
    """Complex pair ``(z1, z2)`` of a canonical state (broadcasts over leading axes)."""
    x = np.asarray(x, dtype=float)
    return x[..., 0] + 1j * x[..., 2], x[..., 1] + 1j * x[..., 3]


def liouville_form(x, v):
    """``lambda0_x(v) = (q . v_p - p . v_q) / 2``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return 0.5 * (x[..., 0] * v[..., 2] + x[..., 1] * v[..., 3] - x[..., 2] * v[..., 0] - x[..., 3] * v[..., 1])


_EXACT = (0.0, 0.5, 1.0, math.sqrt(2.0) / 2, math.sqrt(3.0) / 2)


def _clean(m):
    """Snap entries within 4e-15 of 0, +-1/2, +-sqrt(2)/2, +-sqrt(3)/2, +-1 to the float nearest the exact value."""
    m = np.array(m, dtype=float)
    for target in _EXACT:
        for t in {target, -target}:
            m[np.abs(m - t) < 4e-15] = t
    return m


def _rotation_block(angles):
    """Unitary map ``z_j -> e^{i a_j} z_j`` as a 4x4 canonical matrix."""
    m = np.zeros((4, 4))
    for j, a in enumerate(angles):
        c, s = math.cos(a), math.sin(a)
        m[j, j], m[j, j + 2], m[j + 2, j], m[j + 2, j + 2] = c, -s, s, c
    return _clean(m)


def antis_matrix(theta1, theta2):
    """Matrix of ``(z1, z2) -> (e^{i theta1} conj z1, e^{i theta2} conj z2)``."""
    conj = np.diag([1.0, 1.0, -1.0, -1.0])
    return _clean(_rotation_block((theta1, theta2)) @ conj)


def g_pq_matrix(p, q):
    """Matrix of ``g_{p,q}(z1, z2) = (e^{2 pi i/p} z1, e^{2 pi i q/p} z2)``."""
    return _rotation_block((2 * math.pi / p, 2 * math.pi * q / p))


def planar_rotation_matrix(angle):
    """``(q, p) -> (e^{i a} q, e^{i a} p)`` with ``q = q1 + i q2``, ``p = p1 + i p2``."""
    c, s = math.cos(angle), math.sin(angle)
    r = np.array([[c, -s], [s, c]])
    m = np.zeros((4, 4))
    m[:2, :2] = r
    m[2:, 2:] = r
    return _clean(m)


@dataclass(frozen=True, eq=False)
class Involution:
    """Linear symmetry of a model.

    ``kind`` is ``anti_symplectic`` (``M^T J4 M = -J4``) or ``symplectic``;
    symplectic maps may have finite order ``order`` > 2 (the cyclic symmetry).
    """

    label: str
    matrix: np.ndarray
    kind: str = None
    order: int = 2

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        tj = m.T @ J4 @ m
        if np.allclose(tj, -J4, atol=1e-12):
            kind = "anti_symplectic"
        elif np.allclose(tj, J4, atol=1e-12):
            kind = "symplectic"
        else:
            raise ValidationError(f"{self.label}: matrix is neither symplectic nor anti-symplectic")
        if self.kind is not None and self.kind != kind:
            raise ValidationError(f"{self.label}: declared {self.kind} but the J4 test says {kind}")
        object.__setattr__(self, "kind", kind)
        power = np.linalg.matrix_power(m, self.order)
        if not np.allclose(power, np.eye(4), atol=1e-12):
            raise ValidationError(f"{self.label}: M^{self.order} != Id")

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.matrix.T

    @property
    def fixed_basis(self):
        """Orthonormal basis (4 x d) of ``ker(M - Id)``."""
        return _kernel(self.matrix - np.eye(4))

    @property
    def moving_basis(self):
        """Orthonormal basis of ``ker(M + Id)``; ``B^T x = 0`` iff ``x`` in Fix for involutions."""
        return _kernel(self.matrix + np.eye(4))

    def fixed_point(self, coords):
        """Point of Fix with coordinates ``coords`` in :attr:`fixed_basis`."""
        return self.fixed_basis @ np.asarray(coords, dtype=float)

    def fix_distance(self, x):
        """Distance of ``x`` to Fix (exact for orthogonal M)."""
        return float(np.linalg.norm(self.moving_basis.T @ np.asarray(x, dtype=float)))

    def compose(self, other, label=None):
        """``self o other``."""
        m = _clean(self.matrix @ other.matrix)
        order = 2 if np.allclose(m @ m, np.eye(4), atol=1e-12) else _order_of(m)
        return Involution(label or f"{self.label}*{other.label}", m, order=order)


def _order_of(m, limit=64):
    power = np.eye(4)
    for k in range(1, limit + 1):
        power = power @ m
        if np.allclose(power, np.eye(4), atol=1e-12):
            return k
    raise ValidationError("map has no finite order <= 64")


def _kernel(a):
    u, s, vt = np.linalg.svd(a)
    null = vt[s < 1e-10] if len(s) else vt
    basis = null.T
    return _clean(basis)


@dataclass(frozen=True, eq=False)
class SystemModel:
    """A Hamiltonian on R^4 with symmetries and level data.

    Parameters
    ----------
    name : str
    kind : int
        Hamiltonian kind from :mod:`symreeb._hamiltonians`.
    kind_params : tuple
        Numeric parameters used by the formulas.
    params : dict
        User-facing parameters (``r1sq``, ``mu``, ``c``, ...).
    involutions : dict
        Symmetries keyed by label.
    cyclic_label : str or None
        Label of the finite-order symplectic symmetry, if any.
    singular_points : list
        Collision positions in the q-plane.
    """

    name: str
    kind: int
    kind_params: tuple
    params: dict = field(default_factory=dict)
    involutions: dict = field(default_factory=dict)
    cyclic_label: str = None
    singular_points: tuple = ()

    # -- evaluators ---------------------------------------------------------
    def hamiltonian(self, x):
        return ham.energy(self.kind, self.kind_params, x)

    def gradient(self, x):
        return ham.gradient(self.kind, self.kind_params, x)

    def hessian(self, x):
        return ham.hessian(self.kind, self.kind_params, x)

    def vector_field(self, x):
        return hamiltonian_vector_field(self, x)

    @property
    def energy(self):
        return self.params.get("c")

    def with_energy(self, c):
        params = dict(self.params)
        params["c"] = float(c)
        return SystemModel(self.name, self.kind, self.kind_params, params, self.involutions,
                           self.cyclic_label, self.singular_points)

    def involution(self, label):
        """Look up a symmetry by label (``rho``, ``rho1``, ``sigma``, ``rho_sigma``, ``g_p_q``...)."""
        if label in self.involutions:
            return self.involutions[label]
        if label.startswith("g_"):
            p, q = (int(v) for v in label.split("_")[1:3])
            return Involution(label, g_pq_matrix(p, q), order=p)
        raise ValidationError(f"unknown involution label {label!r} for {self.name}; "
                              f"known: {sorted(self.involutions)}")

    @property
    def cyclic(self):
        return None if self.cyclic_label is None else self.involutions[self.cyclic_label]

    def collision_distance(self, x):
        """Distance of the q-projection to the nearest collision point (inf if none)."""
        if not self.singular_points:
            return math.inf
        x = np.asarray(x, dtype=float)
        return min(float(np.hypot(x[..., 0] - a, x[..., 1] - b)) for a, b in self.singular_points)

    def check_regular(self, x):
        if self.collision_distance(x) < COLLISION_RADIUS:
            raise DomainError(f"{self.name}: point {np.asarray(x).tolist()} is in the collision set")

    def config(self):
        out = {"system": self.name}
        out.update(self.params)
        return out


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def _inv(label, matrix, order=2):
    return label, Involution(label, _clean(matrix), order=order)


def ellipsoid(r1sq=1.0, r2sq=(1 + 5 ** 0.5) / 2, theta=(0.0, 0.0)):
    """``H = |z1|^2/r1^2 + |z2|^2/r2^2`` with level ``E = H^{-1}(1)``.

    ``rho`` is ``(e^{i t1} conj z1, e^{i t2} conj z2)`` for ``theta = (t1, t2)``;
    the default is complex conjugation.
    """
    if not (r1sq > 0 and r2sq > 0):
        raise ValidationError("ellipsoid radii must be positive")
    invs = dict([_inv("rho", antis_matrix(*theta))])
    return SystemModel("ellipsoid", ham.QUADRATIC, (1.0 / r1sq, 1.0 / r2sq),
                       {"r1sq": float(r1sq), "r2sq": float(r2sq), "c": 1.0,
                        "theta1": float(theta[0]), "theta2": float(theta[1])}, invs)


def hopf(p=None):
    """Round sphere ``H = |z|^2`` (Hopf flow ``e^{2it} z``) with ``rho = (conj z1, -conj z2)``.

    With an integer ``p`` the cyclic symmetry ``sigma = (e^{2 pi i/p} z1, z2)``
    and the involutions ``rho_j = sigma^j o rho`` are attached.
    """
    invs = dict([_inv("rho", antis_matrix(0.0, math.pi))])
    cyc = None
    params = {"c": 1.0}
    if p is not None:
        sigma = _rotation_block((2 * math.pi / p, 0.0))
        invs["sigma"] = Involution("sigma", sigma, order=int(p))
        power = np.eye(4)
        for j in range(int(p)):
            invs[f"rho_{j}"] = Involution(f"rho_{j}", _clean(power @ invs["rho"].matrix))
            power = power @ sigma
        cyc = "sigma"
        params["p"] = int(p)
    return SystemModel("hopf", ham.QUADRATIC, (1.0, 1.0), params, invs, cyc)


def henon_heiles(c=None):
    """``H = |p|^2/2 + |q|^2/2 + q1^2 q2 - q2^3/3`` with ``rho`` and the order-3 map ``sigma``."""
    rho = np.diag([-1.0, 1.0, 1.0, -1.0])
    sigma = planar_rotation_matrix(2 * math.pi / 3)
    invs = dict([_inv("rho", rho), _inv("sigma", sigma, order=3)])
    invs["rho_sigma"] = Involution("rho_sigma", _clean(sigma @ rho))
    invs["rho_1"] = invs["rho_sigma"]
    invs["rho_2"] = Involution("rho_2", _clean(sigma @ sigma @ rho))
    params = {} if c is None else {"c": float(c)}
    return SystemModel("henon_heiles", ham.HENON_HEILES, (), params, invs, "sigma")


def hill(c=None):
    """Hill's lunar Hamiltonian with the commuting involutions ``rho1``, ``rho2``."""
    rho1 = np.diag([1.0, -1.0, -1.0, 1.0])
    rho2 = np.diag([-1.0, 1.0, 1.0, -1.0])
    invs = dict([_inv("rho1", rho1), _inv("rho2", rho2)])
    invs["rho"] = invs["rho1"]
    params = {} if c is None else {"c": float(c)}
    return SystemModel("hill", ham.HILL, (), params, invs, None, ((0.0, 0.0),))


def pcr3bp(mu=0.5, c=None):
    """Planar circular restricted three-body problem, earth at the origin, sun at (1, 0)."""
    if not 0.0 < mu < 1.0:
        raise ValidationError("mass ratio mu must lie in (0, 1)")
    rho = np.diag([1.0, -1.0, -1.0, 1.0])
    invs = dict([_inv("rho", rho)])
    params = {"mu": float(mu)}
    if c is not None:
        params["c"] = float(c)
    return SystemModel("pcr3bp", ham.PCR3BP, (float(mu),), params, invs, None, ((0.0, 0.0), (1.0, 0.0)))


CATALOG = {"hopf": hopf, "ellipsoid": ellipsoid, "henon_heiles": henon_heiles, "hill": hill,
           "pcr3bp": pcr3bp}


def from_config(cfg):
    """Build a model from a JSON-style dict such as ``{"system": "pcr3bp", "mu": 0.5, "c": -1.8}``."""
    cfg = dict(cfg)
    name = cfg.pop("system", None)
    if name not in CATALOG:
        raise ValidationError(f"unknown system {name!r}; known: {sorted(CATALOG)}")
    c = cfg.pop("c", None)
    allowed = {"hopf": {"p"}, "ellipsoid": {"r1sq", "r2sq", "theta1", "theta2"},
               "henon_heiles": set(), "hill": set(), "pcr3bp": {"mu"}}[name]
    unknown = set(cfg) - allowed
    if unknown:
        raise ValidationError(f"unknown parameters for {name}: {sorted(unknown)}")
    if name == "ellipsoid":
        theta = (cfg.pop("theta1", 0.0), cfg.pop("theta2", 0.0))
        model = ellipsoid(theta=theta, **cfg)
    elif name in ("henon_heiles", "hill", "pcr3bp"):
        model = CATALOG[name](c=c, **cfg)
        c = None
    else:
        model = CATALOG[name](**cfg)
    return model if c is None else model.with_energy(c)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def hamiltonian_vector_field(model, z):
    """``X_H(z) = J4^T grad H(z)``, i.e. ``q' = -H_p``, ``p' = H_q``."""
    model.check_regular(z)
    g = model.gradient(z)
    return np.concatenate([-g[..., 2:], g[..., :2]], axis=-1)


def reeb_rescaling(model, z):
    """``lambda0(X_H)(z) = <z, grad H(z)>/2``; the Reeb field is ``X_H`` divided by it."""
    model.check_regular(z)
    val = float(liouville_form(z, hamiltonian_vector_field(model, z)))
    if val <= 0.0:
        raise GeometryError(f"lambda0(X_H) = {val:.3e} <= 0 at {np.asarray(z).tolist()}: "
                            "level not star-shaped here")
    return val


def radial_scale(model, direction, c=None, r_max=10.0):
    """Positive ``s`` with ``H(s * direction) = c`` (smallest root along the ray)."""
    c = model.energy if c is None else c
    if c is None:
        raise ValidationError("energy level c is required")
    d = np.asarray(direction, dtype=float)
    if model.kind == ham.QUADRATIC:
        h = float(model.hamiltonian(d))
        return math.sqrt(c / h)
    h0 = float(model.hamiltonian(np.zeros(4))) if model.collision_distance(np.zeros(4)) > 0 else -math.inf
    if not h0 < c:
        raise GeometryError("origin is not inside the level")
    grid = np.linspace(0.0, r_max, 2001)[1:]
    vals = model.hamiltonian(grid[:, None] * d[None]) - c
    idx = np.nonzero(vals > 0)[0]
    if len(idx) == 0:
        raise GeometryError(f"ray in direction {d.tolist()} does not reach the level")
    i = idx[0]
    lo = grid[i - 1] if i > 0 else 0.0
    return brentq(lambda s: float(model.hamiltonian(s * d)) - c, lo, grid[i], xtol=1e-15, rtol=1e-15)


@dataclass(frozen=True, eq=False)
class SphereModel:
    """A star-shaped level transported to the unit sphere.

    ``from_sphere`` is ``psi o Phi^{-1}`` and ``to_sphere`` its inverse,
    where ``psi(z) = s(z) z`` is the radial map onto the level and ``Phi`` an
    optional linear contactomorphism of ``(S^3, lambda0)``. The pulled-back
    contact form is ``f * lambda0`` with ``f(z) = s(Phi^{-1} z)^2``.
    """

    base: SystemModel
    energy: float
    linear_map: np.ndarray
    involutions: dict

    def from_sphere(self, z):
        z = np.asarray(z, dtype=float)
        w = np.linalg.solve(self.linear_map, z.T).T if z.ndim > 1 else np.linalg.solve(self.linear_map, z)
        if w.ndim == 1:
            return radial_scale(self.base, w, self.energy) * w
        return np.array([radial_scale(self.base, wi, self.energy) * wi for wi in w])

    def to_sphere(self, x):
        x = np.asarray(x, dtype=float)
        y = x / np.linalg.norm(x, axis=-1, keepdims=True)
        return y @ self.linear_map.T

    def conformal_factor(self, z):
        """``f(z)`` with ``Psi^* lambda0 = f lambda0`` on S^3."""
        z = np.asarray(z, dtype=float)
        w = np.linalg.solve(self.linear_map, z)
        return radial_scale(self.base, w / np.linalg.norm(w), self.energy) ** 2

    def vector_field(self, z):
        """Push-forward of ``X_H`` to the sphere (a positive multiple of the Reeb field of f lambda0)."""
        x = self.from_sphere(z)
        v = hamiltonian_vector_field(self.base, x)
        r = np.linalg.norm(x)
        dv = (v - x * (x @ v) / r ** 2) / r
        return self.linear_map @ dv


def pullback_to_sphere(model, c=None, linear_map=None, samples=2000, seed=0):
    """Transport a star-shaped level of ``model`` to ``(S^3, f lambda0)``.

    For Henon-Heiles the default linear map is the contactomorphism
    ``Phi(q1, q2, p1, p2) = (q1 - p2, -q1 - p2, q2 + p1, q2 - p1)/sqrt(2)``.
    Star-shapedness (``<x, grad H(x)> > 0`` on the level) is checked on
    ``samples`` random directions.
    """
    c = model.energy if c is None else c
    if c is None:
        raise ValidationError("pullback needs an energy level c")
    if model.name in ("hill", "pcr3bp"):
        raise GeometryError(f"{model.name} levels are not star-shaped about a regular origin")
    integer_map = None
    if linear_map is None:
        if model.name == "henon_heiles":
            integer_map = np.array([[1, 0, 0, -1], [-1, 0, 0, -1], [0, 1, 1, 0], [0, 1, -1, 0]], dtype=float)
            linear_map = integer_map / math.sqrt(2.0)
        else:
            linear_map = np.eye(4)
    linear_map = np.asarray(linear_map, dtype=float)
    if not np.allclose(linear_map.T @ J4 @ linear_map, J4, atol=1e-12) or \
            not np.allclose(linear_map.T @ linear_map, np.eye(4), atol=1e-12):
        raise ValidationError("linear map must be symplectic and orthogonal (preserve lambda0 on S^3)")
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(samples, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    for d in dirs:
        x = radial_scale(model, d, c) * d
        if float(x @ model.gradient(x)) <= 0.0:
            raise GeometryError(f"level c={c} not star-shaped at {x.tolist()}")
    invs = {}
    for label, inv in model.involutions.items():
        if integer_map is not None:
            # exact transport: (A M A^T) / 2 with A = sqrt(2) Phi integer
            m = integer_map @ inv.matrix @ integer_map.T / 2.0
        else:
            m = linear_map @ inv.matrix @ linear_map.T
        invs[label] = Involution(label, _clean(m), order=inv.order)
    return SphereModel(model, float(c), linear_map, invs)


# -- Levi-Civita chart ------------------------------------------------------

def levi_civita_project(v, u):
    """``(v, u) -> (q, p)`` with ``q = 2 v^2``, ``p = u / conj(v)`` (complex notation).

    Accepts complex ``v, u`` or a real state ``(v1, v2, u1, u2)`` as ``v``.
    """
    if u is None:
        s = np.asarray(v, dtype=float)
        v, u = s[0] + 1j * s[1], s[2] + 1j * s[3]
    if abs(v) == 0:
        raise DomainError("Levi-Civita map undefined at v = 0")
    q = 2 * v * v
    p = u / np.conj(v)
    return q, p


def levi_civita_lift(q, p, branch=1):
    """Inverse chart ``(q, p) -> (v, u)``; ``branch=-1`` selects the antipodal preimage."""
    if abs(q) == 0:
        raise DomainError("Levi-Civita lift undefined at the collision q = 0")
    v = branch * np.sqrt(q / 2)
    u = p * np.conj(v)
    return v, u


def lc_state(v, u):
    """Real state ``(v1, v2, u1, u2)``."""
    return np.array([v.real, v.imag, u.real, u.imag])


def pq_state(q, p):
    """Real state ``(q1, q2, p1, p2)``."""
    return np.array([q.real, q.imag, p.real, p.imag])


LC_RHO1 = np.diag([1.0, -1.0, -1.0, 1.0])
LC_RHO2 = np.diag([-1.0, 1.0, 1.0, -1.0])


# -- critical values --------------------------------------------------------

def _momentum_for(model, q):
    """Momentum making ``dH/dp = 0`` at position q (all catalog Hamiltonians are |p|^2/2 + linear)."""
    x = np.array([q[0], q[1], 0.0, 0.0])
    g = model.gradient(x)
    return -g[2:]


def _seeds(model):
    if model.name == "henon_heiles":
        qs = [(0.0, 0.0), (0.0, 1.0), (0.9, -0.5), (-0.9, -0.5), (0.05, 0.05)]
    elif model.name == "hill":
        qs = []
        for a in np.linspace(-2, 2, 17):
            if abs(a) > 1e-9:
                qs.append((a, 0.0))
    elif model.name == "pcr3bp":
        mu = model.params["mu"]
        qs = [(mu - 0.5, math.sqrt(3) / 2), (mu - 0.5, -math.sqrt(3) / 2)]
        qs = [(0.5, math.sqrt(3) / 2), (0.5, -math.sqrt(3) / 2)]
        xs = np.concatenate([np.linspace(-2.5, -0.05, 60), np.linspace(0.05, 0.95, 60),
                             np.linspace(1.05, 3.0, 60)])
        g = [model.gradient(np.array([x, 0.0, *_momentum_for(model, (x, 0.0))]))[0] for x in xs]
        for i in range(len(xs) - 1):
            same_gap = (xs[i] < 0) == (xs[i + 1] < 0) and (xs[i] < 1) == (xs[i + 1] < 1)
            if same_gap and np.sign(g[i]) != np.sign(g[i + 1]):
                qs.append((0.5 * (xs[i] + xs[i + 1]), 0.0))
    else:
        raise ValidationError(f"critical values are defined for henon_heiles, hill, pcr3bp, not {model.name}")
    return qs


def critical_points(model, tol=1e-10, max_iter=100):
    """Newton-refined critical points of H with their energies.

    Returns
    -------
    list of (point, value) sorted by value then position.
    """
    seeds = _seeds(model)
    found = []
    for q in seeds:
        x = np.array([q[0], q[1], *_momentum_for(model, q)])
        ok = False
        for _ in range(max_iter):
            g = model.gradient(x)
            if np.linalg.norm(g) < 1e-14:
                ok = True
                break
            step = np.linalg.solve(model.hessian(x), g)
            lam = 1.0
            while lam > 1e-6:
                trial = x - lam * step
                if model.collision_distance(trial) > COLLISION_RADIUS and \
                        np.linalg.norm(model.gradient(trial)) < np.linalg.norm(g):
                    break
                lam *= 0.5
            x = trial
        gn = float(np.linalg.norm(model.gradient(x)))
        if ok or gn < tol:
            if gn < tol and not any(np.linalg.norm(x - y) < 1e-8 for y, _ in found):
                found.append((x, float(model.hamiltonian(x))))
    if not found:
        raise SearchFailure(f"Newton diverged from all seeds {seeds}", stage="critical_values")
    return sorted(found, key=lambda item: (item[1], tuple(item[0])))


def critical_values(model, tol=1e-10):
    """Distinct critical values of H (values closer than 1e-9 merged)."""
    values = []
    for _, v in critical_points(model, tol):
        if not values or abs(v - values[-1]) > 1e-9:
            values.append(v)
    return values
