import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from symreeb import flow, systems
from symreeb.errors import CollisionError, ConsistencyError, ValidationError
from symreeb.sympath import cz_index_rotation, path_from_loop
from symreeb.systems import J4

R2SQ = (1 + math.sqrt(5)) / 2
directions = arrays(float, 4, elements=st.floats(-1, 1)).filter(lambda d: np.linalg.norm(d) > 0.1)


def on_level(model, d, c=1.0):
    d = d / np.linalg.norm(d)
    return systems.radial_scale(model, d, c) * d


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

def test_ellipsoid_flow_is_exact_rotation():
    model = systems.ellipsoid(1.0, R2SQ)
    x0 = systems.from_complex(0.6, 0.8 * math.sqrt(R2SQ) * np.exp(0.3j))
    traj = flow.integrate(model, x0, 2.0, n_samples=20)
    z1, z2 = systems.to_complex(x0)
    exact = systems.from_complex(z1 * np.exp(2j * traj.times), z2 * np.exp(2j * traj.times / R2SQ))
    np.testing.assert_allclose(traj.states, exact, atol=1e-10)
    assert traj.energy_drift < 1e-10


def test_energy_is_conserved_for_henon_heiles():
    hh = systems.henon_heiles(0.1)
    x0 = on_level(hh, np.array([0.3, -0.2, 0.5, 0.1]), 0.1)
    traj = flow.integrate(hh, x0, 50.0, n_samples=500)
    assert traj.energy_drift < 1e-9
    np.testing.assert_allclose(traj.energies(), 0.1, atol=1e-9)


def test_collision_is_detected():
    hill = systems.hill()
    # at rest in the rotating frame next to the primary: falls into it
    x0 = np.array([0.01, 0.0, 0.0, -0.01])
    with pytest.raises(CollisionError):
        flow.integrate(hill, x0, 1.0)


def test_integrate_validates_input():
    model = systems.hopf()
    with pytest.raises(ValidationError):
        flow.integrate(model, np.zeros(3), 1.0)
    with pytest.raises(ValidationError):
        flow.integrate(model, np.array([1.0, 0, 0, np.nan]), 1.0)
    with pytest.raises(ValidationError):
        flow.integrate(model, np.array([1.0, 0, 0, 0]), math.inf)
    traj = flow.integrate(model, np.array([1.0, 0, 0, 0]), 0.0)
    assert traj.states.shape == (1, 4)


def test_event_times_on_hopf_flow():
    model = systems.hopf()
    hits = flow.event_times(model, np.array([1.0, 0, 0, 0]), lambda t, y: y[0], 3.0, count=2)
    np.testing.assert_allclose([t for t, _ in hits], [math.pi / 4, 3 * math.pi / 4], atol=1e-10)
    first = flow.first_event(model, np.array([1.0, 0, 0, 0]), lambda t, y: y[0], 3.0, direction=1)
    assert first[0] == pytest.approx(3 * math.pi / 4, abs=1e-10)


def test_trajectory_serialization(tmp_path):
    traj = flow.integrate(systems.hopf(), np.array([1.0, 0, 0, 0]), 1.0, n_samples=4)
    text = traj.to_csv(tmp_path / "traj.csv")
    assert text.splitlines()[0] == "t,q1,q2,p1,p2,H"
    assert len(text.splitlines()) == 6
    data = json.loads(traj.to_json())
    assert data["system"]["system"] == "hopf"
    np.testing.assert_allclose(traj.state_at(0.5), [math.cos(1.0), 0, math.sin(1.0), 0], atol=1e-10)


# ---------------------------------------------------------------------------
# variational flow
# ---------------------------------------------------------------------------

def test_hopf_monodromy_is_identity():
    model = systems.hopf()
    traj = flow.integrate(model, np.array([0.6, 0.0, 0.0, 0.8]), math.pi, n_samples=64)
    mono = flow.integrate_variational(model, traj)
    np.testing.assert_allclose(mono.endpoint, np.eye(4), atol=1e-9)
    assert mono.symplectic_drift < 1e-9
    assert mono.flow_direction_defect() < 1e-9


def test_variational_matches_finite_differences():
    hh = systems.henon_heiles(0.1)
    x0 = on_level(hh, np.array([0.2, 0.1, -0.4, 0.3]), 0.1)
    mono = flow.integrate_variational(hh, flow.integrate(hh, x0, 3.0, n_samples=10))
    h = 1e-6
    cols = []
    for e in np.eye(4):
        a = flow.integrate(hh, x0 + h * e, 3.0, drift_tol=1.0).end
        b = flow.integrate(hh, x0 - h * e, 3.0, drift_tol=1.0).end
        cols.append((a - b) / (2 * h))
    np.testing.assert_allclose(mono.endpoint, np.array(cols).T, atol=1e-5)


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("model", [systems.ellipsoid(1.0, R2SQ), systems.henon_heiles(0.1)],
                         ids=["ellipsoid", "henon_heiles"])
@settings(max_examples=40, deadline=None)
@given(d=directions)
def test_global_frame_is_unitary_frame_of_xi(model, d):
    x = on_level(model, d, model.energy)
    e1, e2 = flow.FrameField(model)(x)
    g = model.gradient(x)
    for e in (e1, e2):
        assert abs(g @ e) < 1e-12 * np.linalg.norm(g) * (1 + np.linalg.norm(e))
        assert abs(systems.liouville_form(x, e)) < 1e-12
    assert e1 @ J4 @ e2 == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("model", [systems.ellipsoid(1.0, R2SQ, (0.7, -1.1)), systems.hopf(4),
                                   systems.henon_heiles(0.1)],
                         ids=["ellipsoid", "hopf", "henon_heiles"])
@settings(max_examples=20, deadline=None)
@given(d=directions)
def test_symmetric_frame_relation(model, d):
    x = on_level(model, d, model.energy)
    for inv in model.involutions.values():
        if inv.kind != "anti_symplectic":
            continue
        fld = flow.FrameField(model, angle=flow.symmetric_angle(model, inv))
        e1, e2 = fld(x)
        f1, f2 = fld(inv(x))
        np.testing.assert_allclose(inv.matrix @ e1, f1, atol=1e-12)
        np.testing.assert_allclose(inv.matrix @ e2, -f2, atol=1e-12)


def test_normal_frame_winds_once_along_p1():
    model = systems.ellipsoid(1.0, R2SQ)
    traj = flow.integrate(model, np.array([1.0, 0, 0, 0]), math.pi, n_samples=256)
    normal = flow.build_frame(model, traj, kind="normal", axis=(0, 1, 0, 0))
    assert normal.winding_offset == 1
    glob = flow.build_frame(model, traj)
    assert glob.winding_offset == 0
    lam, om = glob.pairing_defects(traj.states)
    assert lam < 1e-12 and om < 1e-12
    assert json.loads(glob.to_json())["kind"] == "global"


def test_symmetric_frame_requires_involution():
    model = systems.hopf()
    traj = flow.integrate(model, np.array([1.0, 0, 0, 0]), math.pi, n_samples=16)
    with pytest.raises(ValidationError):
        flow.build_frame(model, traj, symmetric=True)
    frame = flow.build_frame(model, traj, symmetric=True, involution=model.involution("rho"))
    assert flow.symmetry_defect(frame, traj.states, model.involution("rho")) < 1e-12


# ---------------------------------------------------------------------------
# the two transverse routes
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name,x0,T", [("P1", [1.0, 0, 0, 0], math.pi),
                                       ("P2", [0, math.sqrt(R2SQ), 0, 0], math.pi * R2SQ)])
def test_transverse_routes_agree_on_ellipsoid(name, x0, T):
    model = systems.ellipsoid(1.0, R2SQ)
    traj = flow.integrate(model, np.array(x0), T, n_samples=512)
    frame = flow.build_frame(model, traj, symmetric=True, involution=model.involution("rho"))
    path = flow.transverse_path(flow.integrate_variational(model, traj), frame)
    loop = flow.transverse_loop(model, np.array(x0), T, frame.field, symmetric=True)
    np.testing.assert_allclose(path_from_loop(loop).endpoint, path.endpoint, atol=1e-7)
    # the other axis turns by 2 pi r_self^2 / r_other^2 during one period
    ratio = 1 / R2SQ if name == "P1" else R2SQ
    assert cz_index_rotation(path).rotation_number == pytest.approx(1 + ratio, abs=1e-7)


def test_transverse_routes_agree_on_henon_heiles_chord_data():
    hh = systems.henon_heiles(0.1)
    x0 = on_level(hh, np.array([0.1, 0.3, 0.2, -0.1]), 0.1)
    traj = flow.integrate(hh, x0, 2.0, n_samples=400)
    fld = flow.FrameField(hh)
    s = flow.generator_samples(hh, traj.states, fld, 1.0)
    assert np.allclose(s, np.swapaxes(s, 1, 2))
    frame = flow.build_frame(hh, traj)
    path = flow.transverse_path(flow.integrate_variational(hh, traj), frame, period=2.0)
    # integrate Phi' = J0 S Phi with the generator samples and compare endpoints
    from scipy.integrate import solve_ivp
    from scipy.interpolate import CubicSpline
    spline = CubicSpline(traj.times / 2.0, flow.generator_samples(hh, traj.states, fld, 2.0), axis=0)
    j0 = np.array([[0.0, -1.0], [1.0, 0.0]])
    sol = solve_ivp(lambda t, y: (j0 @ spline(t) @ y.reshape(2, 2)).ravel(), (0, 1), np.eye(2).ravel(),
                    rtol=1e-11, atol=1e-13)
    np.testing.assert_allclose(sol.y[:, -1].reshape(2, 2), path.endpoint, atol=1e-5)


def test_symmetrize_samples_rejects_asymmetric_loops():
    s = np.zeros((64, 2, 2))
    s[:, 0, 0] = np.sin(2 * np.pi * np.arange(64) / 64)
    with pytest.raises(ConsistencyError):
        flow.symmetrize_samples(s)
    s[:, 0, 0] = np.cos(2 * np.pi * np.arange(64) / 64) + 1e-9 * np.arange(64)
    out = flow.symmetrize_samples(s)
    np.testing.assert_allclose(out[1], np.diag([1.0, -1.0]) @ out[-1] @ np.diag([1.0, -1.0]), atol=1e-15)
