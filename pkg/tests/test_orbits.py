import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symreeb import flow, orbits, systems
from symreeb.errors import ValidationError
from symreeb.orbits import ChordSpec, FixChart

R2SQ = (1 + math.sqrt(5)) / 2


@pytest.fixture(scope="module")
def ellipsoid():
    return systems.ellipsoid(1.0, R2SQ)


@pytest.fixture(scope="module")
def axis_orbits(ellipsoid):
    return orbits.named_orbit(ellipsoid, "P1"), orbits.named_orbit(ellipsoid, "P2")


def hopf_fiber(z1, z2, n=1024):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    phase = np.exp(1j * t)
    return systems.from_complex(z1 * phase, z2 * phase)


# ---------------------------------------------------------------------------
# charts of fixed sets
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("model,label,c", [(systems.ellipsoid(), "rho", 1.0),
                                           (systems.hill(), "rho1", -3.0),
                                           (systems.hill(), "rho2", -3.0),
                                           (systems.pcr3bp(0.5), "rho", -2.2),
                                           (systems.henon_heiles(), "rho", 0.1)],
                         ids=["ellipsoid", "hill-rho1", "hill-rho2", "pcr3bp", "henon_heiles"])
def test_fix_chart_points_lie_on_level_and_fixed_set(model, label, c):
    inv = model.involution(label)
    chart = FixChart(model, inv, c)
    intervals = chart.primary_intervals()
    assert intervals
    for lo, hi in intervals:
        for s in np.linspace(lo, hi, 7)[1:-1]:
            for branch in (1, -1):
                x = chart.point(s, branch)
                assert model.hamiltonian(x) == pytest.approx(c, abs=1e-12)
                assert inv.fix_distance(x) < 1e-14


def test_chord_spec_validation():
    with pytest.raises(ValidationError):
        ChordSpec("rho", "rho", 1.0, 0.0, -1.0)
    with pytest.raises(ValidationError):
        ChordSpec("rho", "rho", 1.0, 0.0, 1.0, branch=2)
    assert ChordSpec("rho1", "rho2", -3.0, 0.1, 1.0).fraction == "quarter"


# ---------------------------------------------------------------------------
# shooting and records
# ---------------------------------------------------------------------------

def test_axis_orbits(axis_orbits):
    p1, p2 = axis_orbits
    assert p1.period == pytest.approx(math.pi, abs=1e-9)
    assert p2.period == pytest.approx(math.pi * R2SQ, abs=1e-9)
    for rec in (p1, p2):
        assert rec.covering_number == 1
        assert rec.closure_residual < 1e-8
        assert rec.reflection_residual < 1e-7
        assert "rho" in rec.symmetry


def test_symmetric_orbit_is_reversed_by_rho(axis_orbits, ellipsoid):
    rho = ellipsoid.involution("rho")
    for rec in axis_orbits:
        t = np.linspace(0, rec.period, 50)
        forward = rec.trajectory.state_at(t)
        backward = rec.trajectory.state_at((rec.period - t) % rec.period)
        np.testing.assert_allclose(forward @ rho.matrix.T, backward, atol=1e-8)


def test_generic_chord_on_ellipsoid_is_symmetric():
    # with an irrational radius ratio every chord from Fix(rho) lies on an axis orbit
    model = systems.ellipsoid(1.0, R2SQ)
    rec = orbits.shoot_chord(model, ChordSpec("rho", "rho", 1.0, 0.0, 1.5))
    assert rec.period == pytest.approx(math.pi, abs=1e-8)
    assert rec.sym_type == "symmetric"


def test_same_orbit(axis_orbits, ellipsoid):
    p1, p2 = axis_orbits
    again = orbits.named_orbit(ellipsoid, "P1")
    assert orbits.same_orbit(p1, again)
    assert not orbits.same_orbit(p1, p2)


def test_catalog_round_trip(tmp_path, axis_orbits):
    path = tmp_path / "catalog.jsonl"
    orbits.write_catalog(axis_orbits, path)
    back = orbits.read_catalog(path)
    assert [d["period"] for d in back] == [r.period for r in axis_orbits]
    assert back[0]["system"]["system"] == "ellipsoid"
    bad = tmp_path / "bad.jsonl"
    bad.write_text(json.dumps({"schema_version": 99}) + "\n")
    with pytest.raises(ValidationError):
        orbits.read_catalog(bad)


def test_q_winding_of_circle():
    t = np.linspace(0, 2 * np.pi, 200)
    states = np.column_stack([np.cos(t), np.sin(t), 0 * t, 0 * t])
    assert orbits.q_winding(states) == pytest.approx(1.0)
    assert orbits.q_winding(states[::-1]) == pytest.approx(-1.0)


def test_classification_only_for_planar_models(axis_orbits):
    with pytest.raises(ValidationError):
        orbits.classify_symmetry(axis_orbits[0])


def test_named_orbit_validation():
    with pytest.raises(ValidationError):
        orbits.named_orbit(systems.hill(-3.0), "P1")
    with pytest.raises(ValidationError):
        orbits.named_orbit(systems.ellipsoid(), "P3")


@pytest.mark.slow
def test_hill_search_finds_doubly_symmetric_orbits():
    recs, _ = orbits.search_orbits(systems.hill(), "rho1", "rho2", -3.0, n_seeds=4, crossings=1)
    assert recs
    for rec in recs:
        assert rec.sym_type == "doubly_symmetric"
        assert rec.covering_number == 1
        # rho1 o rho2 = -Id, so the orbit is invariant under the half-period shift x -> -x
        t = np.linspace(0, rec.period, 40)
        np.testing.assert_allclose(rec.trajectory.state_at((t + rec.period / 2) % rec.period),
                                   -rec.trajectory.state_at(t), atol=1e-7)
    periods = [r.period for r in recs]
    assert len(set(np.round(periods, 6))) == len(periods)


@pytest.mark.slow
def test_pcr3bp_search_classifies_types():
    recs, _ = orbits.search_orbits(systems.pcr3bp(0.5), "rho", "rho", -2.2, n_seeds=4, crossings=1)
    assert recs
    for rec in recs:
        orbits.classify_symmetry(rec)
        assert rec.notes["symmetry_class"] in ("type_I", "type_II")
        assert rec.notes["physical_motion"] in ("direct", "retrograde")
        assert abs(rec.notes["q_winding"]) == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------------------
# indices along orbits
# ---------------------------------------------------------------------------

def test_index_independent_of_symmetric_rotation(axis_orbits, ellipsoid):
    p1, _ = axis_orbits
    sym = orbits.orbit_indices(ellipsoid, p1, involution="rho")
    plain = orbits.orbit_indices(ellipsoid, p1)
    assert sym["cz_spectral"].mu_cz == plain["cz_spectral"].mu_cz == plain["cz_rotation"].mu_cz == 3
    assert "rs_spectral" not in plain
    assert "symmetric:cz_spectral" in p1.indices and "global:cz_spectral" in p1.indices


def test_indices_with_rotated_involution():
    # a rotated conjugation still reverses the axis orbits; both routes must agree
    model = systems.ellipsoid(1.0, R2SQ, (0.4, -0.3))
    rec = orbits.named_orbit(model, "P1")
    res = orbits.orbit_indices(model, rec, involution="rho")
    assert res["cz_spectral"].mu_cz == res["cz_rotation"].mu_cz == 3
    assert res["rs_spectral"].mu_rs == res["rs_crossing"].mu_rs
    assert abs(res["cz_spectral"].mu_cz - 2 * res["rs_spectral"].mu_rs) <= 1


def test_predicate_report(axis_orbits, ellipsoid):
    p1, _ = axis_orbits
    orbits.orbit_indices(ellipsoid, p1, involution="rho")
    rep = orbits.predicate_report(p1, sl=-1)
    assert rep["simply_covered"] and rep["symmetric"]
    assert rep["mu_cz_at_least_3"] is True and rep["mu_rs_at_least_3_2"] is True
    assert rep["self_linking_minus_one"] is True
    assert orbits.predicate_report(p1)["self_linking_minus_one"] == "not computed"


# ---------------------------------------------------------------------------
# linking
# ---------------------------------------------------------------------------

unit_pairs = st.tuples(st.floats(0.1, 1.4), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))


def _point(angle, a, b):
    return math.cos(angle) * np.exp(1j * a), math.sin(angle) * np.exp(1j * b)


@settings(max_examples=10, deadline=None)
@given(unit_pairs, unit_pairs)
def test_hopf_fibers_link_once(u, v):
    z, w = _point(*u), _point(*v)
    # distinct fibers: the complex lines through z and w differ
    if abs(z[0] * w[1] - z[1] * w[0]) < 0.1:
        return
    lk, raw = orbits.linking_number(hopf_fiber(*z, 512), hopf_fiber(*w, 512))
    assert lk == 1 and abs(raw - 1) < 0.05


def test_unlinked_circles():
    t = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    far = np.column_stack([np.cos(t), np.sin(t), 0 * t, 0 * t]) * 0.1 + np.array([0.9, 0.0, 0.1, 0.0])
    near = np.column_stack([np.cos(t), 0 * t, np.sin(t), 0 * t]) * 0.1 + np.array([0.0, 0.9, 0.0, 0.1])
    lk, _ = orbits.linking_number(far, near)
    assert lk == 0


def test_axis_orbits_link(axis_orbits):
    lk, raw = orbits.linking_number(*axis_orbits)
    assert lk == 1 and abs(raw - 1) < 0.05


def test_stereographic_is_finite_off_the_pole():
    pole = np.array([0.0, 0.0, 0.0, 1.0])
    pts = np.random.default_rng(0).normal(size=(5, 4))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    out = orbits.stereographic(pts, pole)
    assert out.shape == (5, 3) and np.all(np.isfinite(out))


@pytest.mark.slow
def test_hopf_fiber_self_linking():
    model = systems.hopf()
    sl, raw, _ = orbits.self_linking(orbits.named_orbit(model, "P1"))
    assert sl == -1 and abs(raw + 1) < 0.05


def test_frame_used_for_push_off_is_global(axis_orbits, ellipsoid):
    # the global frame does not wind against itself along the orbit, the normal frame winds once
    p1, _ = axis_orbits
    traj = flow.integrate(ellipsoid, p1.x0, p1.period, n_samples=256)
    assert flow.build_frame(ellipsoid, traj).winding_offset == 0
    assert flow.build_frame(ellipsoid, traj, kind="normal", axis=(0, 1, 0, 0)).winding_offset == 1
