"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The per-criterion verdicts are printed in the ``acceptance criteria`` section
of the pytest terminal summary (see ``conftest.py``).
"""

import json
import math
import time

import numpy as np
import pytest

from symreeb import cli, sections, systems
from symreeb.errors import DegeneracyError, IllConditionedError
from symreeb.orbits import (classify_symmetry, linking_number, named_orbit, orbit_indices,
                            search_orbits, self_linking)
from symreeb.sympath import (boundary_winding_spectrum, cz_index_spectral, path_from_loop,
                             random_loop, rs_index_crossing, rs_index_spectral, winding_spectrum,
                             cz_index_rotation)

R1SQ = 1.0
R2SQ = (1 + math.sqrt(5)) / 2


def _ok_reports(res):
    bad = {k: v for k, v in res.items() if isinstance(v, str)}
    assert not bad, bad
    return res


@pytest.mark.criterion(1)
def test_ellipsoid_indices(golden_ellipsoid, record_property):
    t0 = time.perf_counter()
    expected = {"P1": (3, 1.5), "P2": (5, 2.5)}
    for name, (cz, rs) in expected.items():
        orbit = named_orbit(golden_ellipsoid, name)
        res = _ok_reports(orbit_indices(golden_ellipsoid, orbit, involution="rho"))
        record_property(name, f"cz={res['cz_spectral'].mu_cz}/{res['cz_rotation'].mu_cz} "
                              f"rs={res['rs_spectral'].mu_rs}/{res['rs_crossing'].mu_rs}")
        assert res["cz_spectral"].mu_cz == res["cz_rotation"].mu_cz == cz
        assert res["rs_spectral"].mu_rs == res["rs_crossing"].mu_rs == rs
    elapsed = time.perf_counter() - t0
    record_property("seconds", f"{elapsed:.1f}")
    assert elapsed < 10.0


@pytest.mark.criterion(2)
def test_index_iteration(golden_ellipsoid, record_property):
    t0 = time.perf_counter()
    orbit = named_orbit(golden_ellipsoid, "P1")
    got = []
    for k in range(1, 6):
        res = _ok_reports(orbit_indices(golden_ellipsoid, orbit, iterate=k))
        oracle = 2 * math.floor(k * (1 + R1SQ / R2SQ)) + 1
        got.append(res["cz_spectral"].mu_cz)
        assert res["cz_spectral"].mu_cz == res["cz_rotation"].mu_cz == oracle
        assert oracle >= 2 * k + 1
    elapsed = time.perf_counter() - t0
    record_property("mu_cz(P1^k)", got)
    record_property("seconds", f"{elapsed:.1f}")
    assert got == [3, 7, 9, 13, 17]
    assert elapsed < 30.0


@pytest.mark.criterion(3)
def test_index_relation_random_loops(record_property):
    rng = np.random.default_rng(3)
    checked, skipped, violations = 0, 0, []
    while checked < 100:
        loop = random_loop(rng, symmetric=True, scale=8.0)
        try:
            path = path_from_loop(loop)
            cz = cz_index_spectral(loop).mu_cz
            rs = rs_index_spectral(loop).mu_rs
            cz_rot = cz_index_rotation(path).mu_cz
            rs_cross = rs_index_crossing(path).mu_rs
        except (DegeneracyError, IllConditionedError):
            skipped += 1
            continue
        checked += 1
        if abs(cz - 2 * rs) > 1 or abs(cz_rot - 2 * rs_cross) > 1:
            violations.append((cz, rs, cz_rot, rs_cross))
    record_property("loops", checked)
    record_property("degenerate_skipped", skipped)
    record_property("violations", len(violations))
    assert not violations


@pytest.mark.criterion(4)
def test_spectral_structure_random_loops(record_property):
    rng = np.random.default_rng(4)
    violations = []
    for i in range(50):
        loop = random_loop(rng, symmetric=True, scale=8.0)
        try:
            periodic = winding_spectrum(loop, 1, (-4, 4), modes=256)
            boundary = boundary_winding_spectrum(loop, 1, (-4, 4), modes=256)
        except Exception as exc:  # any structural failure counts as a violation
            violations.append((i, repr(exc)))
            continue
        ws = [r.winding for r in periodic]
        assert all(ws.count(w) == 2 for w in range(-4, 5))
        assert [r.winding for r in boundary] == list(np.arange(-8, 9) / 2)
    record_property("loops", 50)
    record_property("violations", len(violations))
    assert not violations, violations[:3]


@pytest.mark.criterion(5)
def test_hopf_section(record_property):
    t0 = time.perf_counter()
    model = systems.hopf()
    rho = model.involution("rho")
    disk = sections.page(model, math.pi / 2)
    grid = sections.return_grid(disk, 20)
    time_err = max(abs(s.return_time - math.pi) for s in grid)
    map_err = max(abs(s.image - s.point) for s in grid)
    inv_half, _ = sections.invariance_check(disk, rho)
    inv_zero, dist_zero = sections.invariance_check(sections.page(model, 0.0), rho)
    elapsed = time.perf_counter() - t0
    record_property("return_time_error", f"{time_err:.1e}")
    record_property("identity_error", f"{map_err:.1e}")
    record_property("invariant(pi/2,0)", (inv_half, inv_zero))
    record_property("seconds", f"{elapsed:.1f}")
    assert len(grid) == 400
    assert time_err < 1e-8 and map_err < 1e-8
    assert inv_half and not inv_zero and dist_zero > 0.1
    assert elapsed < 10.0


@pytest.mark.criterion(6)
@pytest.mark.slow
def test_self_linking_and_hopf_linking(golden_ellipsoid, record_property):
    values = {}
    for name in ("P1", "P2"):
        sl, raw, _ = self_linking(named_orbit(golden_ellipsoid, name))
        values[name] = (sl, raw)
        assert sl == -1 and abs(raw - sl) < 0.05
    t = np.linspace(0, 2 * np.pi, 2000, endpoint=False)

    def fiber(z1, z2):
        phase = np.exp(1j * t)
        return systems.from_complex(z1 * phase, z2 * phase)

    lk, lk_raw = linking_number(fiber(1.0, 0.0), fiber(0.0, 1.0))
    lk2, _ = linking_number(fiber(0.6, 0.8), fiber(0.8j, -0.6))
    record_property("sl", {k: f"{v[0]} (raw {v[1]:.5f})" for k, v in values.items()})
    record_property("hopf_linking", (lk, lk2))
    assert lk == 1 and lk2 == 1 and abs(lk_raw - 1) < 0.05


@pytest.mark.criterion(7)
def test_symmetric_fixed_point_and_half_page(golden_ellipsoid, record_property):
    rho = golden_ellipsoid.involution("rho")
    disk = sections.page(golden_ellipsoid, 0.0)
    assert "rho" in disk.invariant_under
    fp = sections.symmetric_fixed_point(disk, rho)
    z1, _ = systems.to_complex(fp["state"])
    on_gamma2 = abs(z1)
    rng = np.random.default_rng(7)
    radius = 0.9 * np.sqrt(rng.uniform(size=20))
    points = radius * np.exp(2j * np.pi * rng.uniform(size=20))
    half = sections.half_page_defect(disk, points)
    record_property("distance_to_gamma2", f"{on_gamma2:.1e}")
    record_property("half_page_defect", f"{half:.1e}")
    assert on_gamma2 < 1e-6
    assert fp["residual"] < 1e-6 and fp["fix_residual"] < 1e-6
    assert half < 1e-6


@pytest.mark.criterion(8)
def test_critical_values(record_property):
    hh = systems.critical_values(systems.henon_heiles())
    hill = systems.critical_values(systems.hill())
    pc = systems.critical_values(systems.pcr3bp(0.5))
    record_property("henon_heiles", hh)
    record_property("hill", hill)
    record_property("pcr3bp", [round(v, 8) for v in pc])
    assert len(hh) == 2 and abs(hh[0]) < 1e-10 and abs(hh[1] - 1 / 6) < 1e-10
    assert len(hill) == 1 and abs(hill[0] + 3 ** (4 / 3) / 2) < 1e-10
    assert len(pc) == 3


@pytest.mark.criterion(9)
@pytest.mark.slow
def test_orbit_searches(record_property):
    t0 = time.perf_counter()
    # (a) PCR3BP below the first critical value, chords from Fix(rho) back to Fix(rho)
    pc = systems.pcr3bp(0.5)
    c = -2.2
    assert c < min(systems.critical_values(pc))
    recs, _ = search_orbits(pc, "rho", "rho", c, n_seeds=8, crossings=1)
    type_one = [classify_symmetry(r) for r in recs]
    type_one = [r for r in type_one if r.notes.get("symmetry_class") == "type_I"
                and r.closure_residual < 1e-8 and r.energy_drift < 1e-9]
    record_property("pcr3bp_type_I", len(type_one))
    assert type_one

    # (b) Hill c = -3, quarter chords from Fix(rho1) to Fix(rho2)
    recs, _ = search_orbits(systems.hill(), "rho1", "rho2", -3.0, n_seeds=8, crossings=1)
    doubly = [r for r in recs if r.sym_type == "doubly_symmetric"
              and r.notes["symmetry_defects"]["rho1"] < 1e-6
              and r.notes["symmetry_defects"]["rho2"] < 1e-6]
    record_property("hill_doubly_symmetric", len(doubly))
    assert doubly

    # (c) Henon-Heiles c = 0.1, (rho, sigma)-symmetric orbit with mu_cz >= 3
    hh = systems.henon_heiles()
    recs, _ = search_orbits(hh, "rho", "rho_sigma", 0.1, n_seeds=8, crossings=2,
                            stop_after=1, predicate=lambda r: r.sym_type == "doubly_symmetric")
    assert recs
    orbit = recs[0]
    res = orbit_indices(orbit.model, orbit, involution="rho")
    cz = [v.mu_cz for k, v in res.items() if k.startswith("cz") and not isinstance(v, str)]
    record_property("henon_heiles_mu_cz", cz)
    assert cz and min(cz) >= 3
    elapsed = time.perf_counter() - t0
    record_property("seconds", f"{elapsed:.1f}")
    assert elapsed < 600.0


@pytest.mark.criterion(10)
def test_manifest_rerun_is_byte_identical(tmp_path, record_property):
    runs = [
        ["index", "--system", "ellipsoid", "--r1sq", "1", "--r2sq", repr(R2SQ), "--orbit", "all"],
        ["critical-values", "--system", "pcr3bp", "--mu", "0.5"],
        ["section", "--system", "hopf", "--theta", repr(math.pi / 2), "--grid", "6"],
    ]
    checked = []
    for i, argv in enumerate(runs):
        first, second = tmp_path / f"a{i}", tmp_path / f"b{i}"
        assert cli.main(argv + ["--out", str(first)]) == 0
        manifest = json.loads((first / "manifest.json").read_text())
        assert cli.main([argv[0], "--config", str(first / "manifest.json"), "--out", str(second)]) == 0
        again = json.loads((second / "manifest.json").read_text())
        assert again["results"] == manifest["results"]
        for name in manifest["results"]:
            assert (first / name).read_bytes() == (second / name).read_bytes()
        checked.append(argv[0])
    record_property("tasks", checked)
