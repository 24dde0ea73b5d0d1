"""Disk-like surfaces of section for the round sphere and the ellipsoid.

A page with angle ``theta`` is the image of the unit disk under
``w -> (w, e^{i theta} sqrt(1 - |w|^2))`` on S^3, pushed radially to the
level (for the ellipsoid this is the map ``z -> sqrt(f_E(z)) z``). Its
boundary is the orbit ``C x {0}``. Disk coordinates of a point ``x`` on the
page are ``w = z1 / |z|``.
"""

from dataclasses import dataclass
import csv
import io
import math

import numpy as np
from scipy.optimize import brentq

from .errors import GeometryError, SearchFailure, ValidationError
from .flow import DEFAULT_RTOL, event_times, integrate
from .systems import hamiltonian_vector_field, radial_scale

TRANSVERSALITY_TOL = 1e-4
INVARIANCE_TOL = 1e-6
HORIZON_PERIODS = 1000.0


@dataclass(frozen=True, eq=False)
class SectionDisk:
    """A page of the open book bounded by ``C x {0}`` on a Hopf or ellipsoid level."""

    model: object
    theta: float
    invariant_under: tuple
    transversality: float

    @property
    def boundary_period(self):
        """Period of the binding orbit ``C x {0}``."""
        return math.pi / self.model.kind_params[0]

    @property
    def return_time_scale(self):
        """Period of the orbit ``{0} x C`` (rotation period of the page angle)."""
        return math.pi / self.model.kind_params[1]

    def embed(self, w):
        """Level point(s) of disk coordinate(s) ``w`` (complex, ``|w| <= 1``)."""
        w = np.asarray(w, dtype=complex)
        if np.any(np.abs(w) > 1 + 1e-15):
            raise ValidationError("disk coordinates must satisfy |w| <= 1")
        z2 = np.exp(1j * self.theta) * np.sqrt(np.maximum(0.0, 1.0 - np.abs(w) ** 2))
        pts = np.stack([w.real, z2.real, w.imag, z2.imag], axis=-1)
        return _to_level(self.model, pts)

    def coordinates(self, x):
        """Disk coordinate ``w = z1 / |z|`` of level point(s)."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        return (x[..., 0] + 1j * x[..., 2]) / r

    def section_function(self, x):
        """``Im(e^{-i theta} z2)``: zero on the page and on the opposite page."""
        z2 = x[..., 1] + 1j * x[..., 3]
        return (np.exp(-1j * self.theta) * z2).imag

    def on_page(self, x):
        z2 = x[..., 1] + 1j * x[..., 3]
        return (np.exp(-1j * self.theta) * z2).real > 0

    def distance(self, x):
        """Euclidean distance from S^3-normalized ``x`` to the page on S^3.

        The page on S^3 is the hemisphere of the unit sphere in
        ``V = C x e^{i theta} R`` with nonnegative second coordinate; the
        nearest point is the normalized projection to V, or the boundary
        circle when that projection has negative second coordinate.
        """
        y = np.asarray(x, dtype=float)
        y = y / np.linalg.norm(y, axis=-1, keepdims=True)
        z1 = y[..., 0] + 1j * y[..., 2]
        z2 = y[..., 1] + 1j * y[..., 3]
        t = (np.exp(-1j * self.theta) * z2).real
        tt = np.maximum(t, 0.0)
        norm = np.sqrt(np.abs(z1) ** 2 + tt ** 2)
        safe = np.where(norm > 0, norm, 1.0)
        proj1 = np.where(norm > 0, z1 / safe, 1.0)
        proj2 = np.exp(1j * self.theta) * tt / safe
        return np.sqrt(np.abs(z1 - proj1) ** 2 + np.abs(z2 - proj2) ** 2)


def _to_level(model, pts):
    pts = np.asarray(pts, dtype=float)
    flat = pts.reshape(-1, 4)
    out = np.array([radial_scale(model, p, 1.0) * p for p in flat])
    return out.reshape(pts.shape)


def _disk_grid(n, radius=0.95):
    """``n x n`` Cartesian grid of interior disk points (outside points dropped)."""
    u = np.linspace(-radius, radius, n)
    w = (u[:, None] + 1j * u[None, :]).ravel()
    return w[np.abs(w) <= radius]


def _check_model(model):
    if model.name not in ("hopf", "ellipsoid"):
        raise ValidationError(f"closed-form pages exist for hopf and ellipsoid, not {model.name}")


def page(model, theta, samples=32):
    """The page ``D_theta`` with its transversality margin and invariance labels.

    Transversality is the minimum over a grid of the derivative of the page
    angle along ``X_H`` (normalized by ``|X_H|``); pages with a margin below
    :data:`TRANSVERSALITY_TOL` are rejected.
    """
    _check_model(model)
    probe = SectionDisk(model, float(theta), (), 0.0)
    grid = _disk_grid(samples, radius=0.999)
    pts = probe.embed(grid)
    v = hamiltonian_vector_field(model, pts)
    z2 = pts[:, 1] + 1j * pts[:, 3]
    dz2 = v[:, 1] + 1j * v[:, 3]
    rate = (dz2 / z2).imag / np.linalg.norm(v, axis=1)
    margin = float(np.min(rate))
    if margin <= TRANSVERSALITY_TOL:
        bad = grid[int(np.argmin(rate))]
        raise GeometryError(f"page theta={theta} not transverse at w={bad:.6f} (margin {margin:.2e})")
    labels = tuple(sorted(label for label, inv in model.involutions.items()
                          if inv.kind == "anti_symplectic" and invariance_check(probe, inv)[0]))
    return SectionDisk(model, float(theta), labels, margin)


def invariance_check(disk, involution, target=None, samples=24):
    """``(R(D) == target, sampled Hausdorff distance)`` on the sphere (``target`` defaults to D).

    Both directed distances are sampled: images of disk points to the
    target page, and target points to the image disk (via ``R^{-1}``).
    """
    target = disk if target is None else target
    grid = np.concatenate([_disk_grid(samples, 0.999),
                           np.exp(2j * np.pi * np.arange(64) / 64)])
    img = disk.embed(grid) @ involution.matrix.T
    inv = np.linalg.inv(involution.matrix)
    d1 = float(np.max(target.distance(img)))
    d2 = float(np.max(disk.distance(target.embed(grid) @ inv.T)))
    dist = max(d1, d2)
    return dist < INVARIANCE_TOL, dist


@dataclass(frozen=True)
class ReturnSample:
    """First return of an interior disk point."""

    point: complex
    return_time: float
    image: complex
    half_image: complex
    half_state: np.ndarray
    landing_error: float


def return_map(disk, w, horizon=None, tol=DEFAULT_RTOL):
    """First return ``psi(w)`` and time ``tau(w)`` to the interior of the page.

    Crossings are zeros of :meth:`SectionDisk.section_function` with
    increasing sign (the opposite page is crossed with decreasing sign), so
    the first such zero after ``t = 0`` is the first return. The point
    ``phi^{tau/2}`` is recorded in disk coordinates of the opposite page.
    """
    w = complex(w)
    if abs(w) >= 1.0:
        raise ValidationError(f"disk point {w} is not interior")
    x0 = disk.embed(w)
    if horizon is None:
        horizon = HORIZON_PERIODS * max(disk.boundary_period, disk.return_time_scale)
    step = 2.0 * disk.return_time_scale
    t_offset = 0.0
    x = x0
    hit = None
    while t_offset < horizon:
        hits = event_times(disk.model, x, lambda t, y: float(disk.section_function(y)),
                           min(step, horizon - t_offset), tol, direction=1,
                           min_time=1e-9 if t_offset == 0 else 0.0, count=8)
        hits = [(t, y) for t, y in hits if disk.on_page(y)]
        if hits:
            hit = (hits[0][0] + t_offset, hits[0][1])
            break
        x = integrate(disk.model, x, min(step, horizon - t_offset), tol=tol).end
        t_offset += step
    if hit is None:
        raise SearchFailure(f"no return to the page within {horizon:.3g}", stage="return_map")
    tau, y = hit
    half = integrate(disk.model, x0, tau / 2, tol=tol).end
    opposite = SectionDisk(disk.model, disk.theta + math.pi, (), 0.0)
    return ReturnSample(w, float(tau), complex(disk.coordinates(y)), complex(opposite.coordinates(half)),
                        half, float(disk.distance(y)))


def return_grid(disk, n=20, radius=0.9):
    """Return samples on the ``n x n`` grid of the square ``[-r, r]^2`` inside the disk."""
    u = np.linspace(-radius / math.sqrt(2), radius / math.sqrt(2), n)
    pts = [complex(a, b) for a in u for b in u]
    return [return_map(disk, w) for w in pts]


def induced_reflection(disk, involution):
    """Angle ``alpha`` with ``R|D (w) = e^{i alpha} conj(w)`` (checked on samples)."""
    ok, dist = invariance_check(disk, involution)
    if not ok:
        raise ValidationError(f"disk theta={disk.theta} is not invariant under {involution.label} "
                              f"(distance {dist:.2e})")
    probes = np.array([0.3 + 0.1j, -0.2 + 0.5j, 0.6 - 0.4j])
    imgs = disk.coordinates(disk.embed(probes) @ involution.matrix.T)
    phases = imgs * probes / np.abs(probes) ** 2
    if np.max(np.abs(phases - phases[0])) > 1e-10:
        raise GeometryError("involution does not act on the page as a linear reflection")
    return float(np.angle(phases[0]))


def symmetric_fixed_point(disk, involution, samples=41):
    """Fixed point of the return map on the fixed arc of ``R|D``.

    The arc is ``w = s e^{i alpha/2}``, ``s in (-1, 1)``. The displacement of
    ``psi`` transverse to the arc is bisected (Brent) where it changes sign.

    Returns
    -------
    dict
        ``point`` (disk coordinate), ``state`` (level point), ``residual``
        ``|psi(w) - w|``, ``fix_residual`` ``|R x - x|``, and
        ``multiplicity`` (``"isolated"`` or ``"continuum"`` when the whole
        arc is fixed).
    """
    alpha = induced_reflection(disk, involution)
    direction = np.exp(0.5j * alpha)

    def disp(s):
        w = s * direction
        img = return_map(disk, w).image
        return float((np.conj(direction) * (img - w)).imag)

    def full_disp(s):
        w = s * direction
        return abs(return_map(disk, w).image - w)

    grid = np.linspace(-0.95, 0.95, samples)
    vals = np.array([disp(s) for s in grid])
    fulls = np.array([full_disp(s) for s in grid[::10]])
    if np.max(fulls) < 1e-8:
        s = 0.0
        mult = "continuum"
    else:
        mult = "isolated"
        roots = []
        for i in range(len(grid) - 1):
            if vals[i] == 0.0:
                roots.append(grid[i])
            elif vals[i] * vals[i + 1] < 0:
                roots.append(brentq(disp, grid[i], grid[i + 1], xtol=1e-13))
        roots = [r for r in roots if full_disp(r) < 1e-8]
        if not roots:
            raise SearchFailure("no symmetric fixed point on the fixed arc at this resolution",
                                stage="symmetric_fixed_point")
        s = roots[0]
    w = s * direction
    x = disk.embed(w)
    return {"point": complex(w), "state": x, "residual": full_disp(s),
            "fix_residual": float(np.linalg.norm(involution.matrix @ x - x)), "multiplicity": mult}


def reversibility_defect(disk, involution, n=20, radius=0.9):
    """``max |psi(R(psi(w))) - R(w)|`` over an ``n x n`` grid (disk coordinates)."""
    alpha = induced_reflection(disk, involution)

    def refl(w):
        return np.exp(1j * alpha) * np.conj(w)

    u = np.linspace(-radius / math.sqrt(2), radius / math.sqrt(2), n)
    worst = 0.0
    for a in u:
        for b in u:
            w = complex(a, b)
            once = return_map(disk, w).image
            back = return_map(disk, refl(once)).image
            worst = max(worst, abs(back - refl(w)))
    return worst


def half_page_defect(disk, points):
    """``max`` distance of ``phi^{tau/2}(x)`` to the opposite page over the points."""
    opposite = SectionDisk(disk.model, disk.theta + math.pi, (), 0.0)
    return max(float(opposite.distance(return_map(disk, w).half_state)) for w in points)


def page_area(disk, polygon, per_edge=64):
    """``d lambda``-area of a polygon in disk coordinates (Stokes: boundary integral of ``f lambda_std``).

    ``f = 1/H`` on the unit sphere is the conformal factor of the level.
    """
    poly = np.asarray(polygon, dtype=complex)
    pts = []
    for a, b in zip(poly, np.roll(poly, -1)):
        s = np.linspace(0.0, 1.0, per_edge, endpoint=False)
        pts.append(a + s * (b - a))
    pts = np.concatenate(pts)
    return _closed_area(disk, pts)


def _closed_area(disk, pts):
    x = disk.embed(pts)
    f = np.linalg.norm(x, axis=1) ** 2
    u, v = pts.real, pts.imag
    du = np.roll(u, -1) - u
    dv = np.roll(v, -1) - v
    fm = 0.5 * (f + np.roll(f, -1))
    um, vm = 0.5 * (u + np.roll(u, -1)), 0.5 * (v + np.roll(v, -1))
    return float(np.sum(fm * 0.5 * (um * dv - vm * du)))


def area_defect(disk, polygon, per_edge=32):
    """Relative change of the ``d lambda``-area of a polygon under the return map."""
    poly = np.asarray(polygon, dtype=complex)
    pts = []
    for a, b in zip(poly, np.roll(poly, -1)):
        s = np.linspace(0.0, 1.0, per_edge, endpoint=False)
        pts.extend(a + s * (b - a))
    before = _closed_area(disk, np.array(pts))
    after = _closed_area(disk, np.array([return_map(disk, w).image for w in pts]))
    return abs(after - before) / abs(before)


def grid_to_csv(samples, path=None, tolerance=1e-8):
    """CSV rows ``u, v, tau, u', v', landing_error, tolerance``."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["u", "v", "tau", "u_image", "v_image", "landing_error", "tolerance"])
    for s in samples:
        wr.writerow([repr(s.point.real), repr(s.point.imag), repr(s.return_time), repr(s.image.real),
                     repr(s.image.imag), repr(s.landing_error), repr(tolerance)])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def grid_to_svg(samples, path=None, size=400):
    """Phase portrait: image points in the unit disk, colored by return time."""
    taus = np.array([s.return_time for s in samples])
    lo, hi = float(taus.min()), float(taus.max())
    span = hi - lo if hi > lo else 1.0
    half = size / 2
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<circle cx="{half}" cy="{half}" r="{half - 2}" fill="none" stroke="black"/>']
    for s, tau in zip(samples, taus):
        frac = (tau - lo) / span
        color = f"rgb({int(255 * frac)},0,{int(255 * (1 - frac))})"
        for w, r in ((s.point, 2), (s.image, 3)):
            cx = half + (half - 2) * w.real
            cy = half - (half - 2) * w.imag
            fill = color if r == 3 else "none"
            parts.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="{r}" fill="{fill}" stroke="{color}"/>')
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
