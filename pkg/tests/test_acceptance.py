"""End-to-end acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import json
import math
import time

import numpy as np
import pytest
from conftest import CRITERIA

from henon import asymptotics as asy
from henon import spectral_geometry as sg
from henon.cli import load_artifact, main
from henon.continuation import sweep, verify_identity_suite
from henon.linearization import MeshParams, Weight, assemble, degeneracy, eigen, eigvec_error, numeric_morse_index
from henon.nonlinearity import NonlinearitySpec, is_admissible
from henon.radial_ode import ProblemSpec, decay_fit, radial_bound, shoot_ground_state

A_STAR_3_0_3 = 4.337387679977041


def record(n, ok, detail):
    CRITERIA[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def catalogue_cases():
    out = []
    for N in (3, 4, 5):
        for p in (2, 3):
            F = NonlinearitySpec.parse(f"pow:p={p}")
            for a in (0.5, 1.0, 1.5, 2.5, 3.3):
                if is_admissible(F, a, N):
                    out.append(ProblemSpec(N, a, F))
    return out


@pytest.fixture(scope="module")
def catalogue():
    """Solve every admissible case once and time it with its spectrum."""
    t0 = time.perf_counter()
    rows = []
    for spec in catalogue_cases():
        prof = shoot_ground_state(spec)
        op = assemble(prof)
        res = eigen(op, Weight.KM2_WEIGHT, 1)
        rows.append((spec, prof, op, res))
    return rows, time.perf_counter() - t0


def test_criterion_01_spectral_identity(catalogue):
    rows, elapsed = catalogue
    worst_lam = worst_vec = 0.0
    for spec, prof, op, res in rows:
        worst_lam = max(worst_lam, abs(res.extrapolated[0] + spec.k) / spec.k)
        worst_vec = max(worst_vec, eigvec_error(op, res.eigenvectors[:, 0]))
    ok = len(rows) == 28 and worst_lam < 1e-4 and worst_vec < 1e-3 and elapsed < 60
    detail = f"{len(rows)} cases, max rel |lambda1 + k| = {worst_lam:.1e}, max eigvec L2 err = {worst_vec:.1e}, {elapsed:.1f} s"
    assert record(1, ok, detail), detail


def test_criterion_02_morse_sweep():
    t0 = time.perf_counter()
    res = sweep(ProblemSpec(3, 0.2, NonlinearitySpec.parse("pow:p=3")), (0.2, 5.8), 29)
    elapsed = time.perf_counter() - t0
    report = verify_identity_suite(res)
    samples_ok = len(res.samples) == 29 and all(s.ok and s.m_numeric == s.m_closed for s in res.samples)
    jumps = sorted((j.alpha_lo, j.alpha_hi, j.size) for j in res.detected_jumps)
    expect = [(2, 5), (4, sg.multiplicity(3, 3))]
    jumps_ok = len(jumps) == 2 and all(
        c - 0.2 <= lo and hi <= c + 0.2 and size == want for (lo, hi, size), (c, want) in zip(jumps, expect)
    )
    ok = samples_ok and jumps_ok and report.passed and elapsed < 120
    detail = f"29 samples m_numeric == m_closed: {samples_ok}; jumps {jumps}; {elapsed:.1f} s"
    assert record(2, ok, detail), detail


def test_criterion_03_multiplicity_oracle():
    t0 = time.perf_counter()
    bad = [(i, N) for N in range(3, 8) for i in range(0, 7) if sg.multiplicity(i, N) != sg.harmonic_dim_oracle(i, N)]
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 5
    detail = f"35 pairs, mismatches {bad}, {elapsed:.2f} s"
    assert record(3, ok, detail), detail


def test_criterion_04_degeneracy_values():
    problems = []
    for N in (3, 4, 5):
        roots, false_pos = sg.degeneracy_scan(N, i_max=12, alpha_max=20.0)
        found = sorted(a for _, a in roots)
        if any(abs(a - 2 * round(a / 2)) > 1e-9 or round(a) == 0 for a in found):
            problems.append((N, "root off even integer"))
        if sorted(round(a) for a in found) != sg.degeneracy_alphas(9):
            problems.append((N, found))
        if false_pos:
            problems.append((N, false_pos))
    ok = not problems
    detail = f"roots exactly at 2,4,...,18 for N=3,4,5; problems {problems}"
    assert record(4, ok, detail), detail


def test_criterion_05_symmetric_jump():
    jumps = []
    for N in (3, 4, 5):
        for a in range(2, 12, 2):
            jumps.append(sg.symmetric_morse_index(a + 0.5, N) - sg.symmetric_morse_index(a - 0.5, N))
            jumps.append(sg.symmetric_morse_index_one_sided(a, N, 1) - sg.symmetric_morse_index_one_sided(a, N, -1))
    ok = set(jumps) == {1}
    detail = f"{len(jumps)} jumps across alpha = 2..10, values {sorted(set(jumps))}"
    assert record(5, ok, detail), detail


def test_criterion_06_shooting_consistency():
    spec = ProblemSpec(3, 0.0, NonlinearitySpec.parse("pow:p=3"))
    a10 = shoot_ground_state(spec, 1e-10).a_star
    a12 = shoot_ground_state(spec, 1e-12).a_star
    rel = abs(a10 - a12) / a12
    pin = abs(a12 - A_STAR_3_0_3) / A_STAR_3_0_3
    ok = rel < 1e-8 and pin < 1e-8
    detail = f"a* = {a12!r}, tol 1e-10 vs 1e-12 rel diff {rel:.1e}, vs pinned {pin:.1e}"
    assert record(6, ok, detail), detail


def test_criterion_07_decay(catalogue):
    rows, _ = catalogue
    deltas, bound_max = [], 0.0
    for spec, prof, _, _ in rows:
        deltas.append(decay_fit(prof, spec.m))
        bound_max = max(bound_max, float(radial_bound(prof)[1].max()))
    sm = 1.0
    ok = all(sm - 0.05 <= d <= sm + 0.01 for d in deltas) and bound_max <= 1.0
    detail = f"delta in [{min(deltas):.4f}, {max(deltas):.4f}], radial bound ratio max {bound_max:.3f}"
    assert record(7, ok, detail), detail


def _half_integer(nu, s):
    c = math.sqrt(2 / (math.pi * s))
    if nu == 0.5:
        return c * math.sinh(s), math.sqrt(math.pi / (2 * s)) * math.exp(-s)
    return c * (math.cosh(s) - math.sinh(s) / s), math.sqrt(math.pi / (2 * s)) * math.exp(-s) * (1 + 1 / s)


def test_criterion_08_bessel():
    s_grid = np.geomspace(0.1, 20, 60)
    wr = max(abs(asy.bessel_ik(nu, s).wronskian * s + 1) for nu in (0.5, 1, 1.5, 2.3, 4) for s in s_grid)
    closed = 0.0
    for nu in (0.5, 1.5):
        for s in s_grid:
            p = asy.bessel_ik(nu, s)
            I, K = _half_integer(nu, s)
            closed = max(closed, abs(p.I - I) / I, abs(p.K - K) / K)
    rep = asy.verify_superexp_decay("square", 2.0, 1.0, np.linspace(0.5, 30, 60))
    ok = wr < 1e-10 and closed < 1e-9 and rep.decade_ratio >= 10 and rep.monotone_tail
    detail = f"max |s W + 1| = {wr:.1e}, half-integer rel err {closed:.1e}, decay drop over last decade {rep.decade_ratio:.0f}x"
    assert record(8, ok, detail), detail


def test_criterion_09_nondegeneracy(catalogue):
    rows, _ = catalogue
    flags = [degeneracy(prof) for _, prof, _, _ in rows]
    ok = set(flags) == {0}
    detail = f"{len(flags)} cases, n_alpha values {sorted(set(flags))}"
    assert record(9, ok, detail), detail


def _cli(argv, capsys):
    assert main(argv) == 0
    return capsys.readouterr().out


def test_criterion_10_determinism_and_schema(tmp_path, capsys):
    runs = [
        ["solve", "--N", "3", "--alpha", "2", "--F", "pow:p=3"],
        ["spectrum", "--N", "3", "--alpha", "1", "--nodes", "400"],
        ["census", "--alpha", "6", "--N", "4"],
        ["morse-table", "--N", "3", "--alpha", "0.5:9.5:0.5"],
        ["bessel", "--nu", "1.3", "--s", "0.1:20:10"],
        ["verify-decay", "--alpha", "2", "--h", "square"],
        ["check-F", "--F", "rational:p=2,q=3"],
        ["sweep", "--alpha-range", "0.5:2.5", "--n-samples", "3", "--nodes", "400"],
    ]
    problems = []
    for argv in runs:
        cache = ["--cache-dir", str(tmp_path / "c")]
        fresh = _cli(argv + ["--no-cache"], capsys)
        again = _cli(argv + ["--no-cache"], capsys)
        stored = _cli(argv + cache, capsys)
        cached = _cli(argv + cache, capsys)
        if not fresh == again == stored == cached:
            problems.append(f"{argv[0]}: not byte-identical")
        doc = json.loads(fresh)
        obj = load_artifact(fresh)
        if doc["schema"] != 1 or obj is None:
            problems.append(f"{argv[0]}: bad envelope")
        csv_a = _cli(argv + ["--no-cache", "--format", "csv"], capsys)
        csv_b = _cli(argv + ["--no-cache", "--format", "csv"], capsys)
        if csv_a != csv_b:
            problems.append(f"{argv[0]}: csv differs")
    ok = not problems
    detail = f"{len(runs)} commands byte-identical fresh/repeat/cached and JSON round-trips; problems {problems}"
    assert record(10, ok, detail), detail
