"""Acceptance criteria 1-12 on the CI profile (digits 300, prime bound 200).

The coefficient count is 1.5 times the unmargined series length at D = 300, so
the winding integrals can be recomputed with B -> 1.5 B inside the available
coefficients.  One PASS/FAIL line per criterion is printed in the terminal
summary (see conftest.py).
"""

import json
import math
from pathlib import Path

import pytest

from conftest import record
from prym61 import abvar as av
from prym61 import lattice as lt
from prym61 import periods as per
from prym61 import pipeline as pl
from prym61 import qexp as qx
from prym61 import quartic as qt

pytestmark = pytest.mark.slow

DIGITS = 300
COEFFS = math.ceil(1.5 * pl.default_coeff_bound(DIGITS, margin=1.0))
PRIME_BOUND = 200


def _run(work: Path) -> Path:
    cfg = pl.Config(digits=DIGITS, coeffs=COEFFS, prime_bound=PRIME_BOUND, seed=0, threads=1, work_dir=str(work))
    pl.run_all(cfg, force=True)
    return work


@pytest.fixture(scope="session")
def run_a(tmp_path_factory):
    return _run(tmp_path_factory.mktemp("accept_a"))


@pytest.fixture(scope="session")
def run_b(tmp_path_factory, run_a):
    return _run(tmp_path_factory.mktemp("accept_b"))


def payload(work: Path, stage: str) -> dict:
    return pl.load_artifact(work, stage).payload


def _log10(x) -> float:
    import mpmath
    return float(mpmath.log10(x)) if x else -math.inf


def test_criterion_01_modsym(run_a):
    p = payload(run_a, "modsym")
    ok = p["cuspidal_rank"] == 16 and p["kernel_rank"] == 8
    record(1, ok, f"cuspidal rank {p['cuspidal_rank']}, ker(T2^4+8T2^2+13) rank {p['kernel_rank']}")
    assert ok


def _mismatches(qe, eig: dict) -> list:
    width = qe.coeffs.shape[1]
    out = []
    for l, c in eig.items():
        want = [int(x) for x in c] + [0] * (width - len(c))
        if [int(x) for x in qe.coeffs[int(l)]] != want:
            out.append(int(l))
    return out


def test_criterion_02_qexp(run_a):
    q = payload(run_a, "qexp")
    m = payload(run_a, "modsym")
    f = qx.QExpansion.from_json(q["f"])
    f0 = qx.QExpansion.from_json(q["f0"])
    first = (f.coeffs[2].tolist() == [0, 1, 0, 0] and f.coeffs[3].tolist() == [3, 0, 1, 0]
             and int(f0.coeffs[2][0]) == -1 and int(f0.coeffs[3][0]) == -2)
    bad = _mismatches(f, m["eigenvalues_f"])
    bad0 = _mismatches(f0, m["eigenvalues_f0"])
    ok = first and not bad and not bad0 and len(m["eigenvalues_f"]) == 95
    record(2, ok, f"a2, a3 of f and f0 as expected: {first}; mismatches with modular symbols for l <= 500: {bad + bad0}")
    assert ok


@pytest.fixture(scope="module")
def series_times():
    s0, s1 = qx.SeedSource(qx.F0), qx.SeedSource(qx.F_NEB)
    return {B: qx.qexp_full(B, seeds_f0=s0, seeds_f=s1).timings["series"] for B in (8000, 16000)}


def test_criterion_03_qexp_scaling(series_times):
    t8, t16 = series_times[8000], series_times[16000]
    ok = t16 <= 3 * t8
    record(3, ok, f"series phase {t8:.1f} s at B=8000, {t16:.1f} s at B=16000, ratio {t16 / t8:.2f} (limit 3)")
    assert ok


def _period_matrix(work):
    return per.PeriodMatrix.from_json(payload(work, "periods")["period_matrix"]).matrix


def test_criterion_04_periods(run_a):
    Pi = _period_matrix(run_a)
    J, res = av.complex_structure(Pi)
    jres = _log10(av.j_squared_residual(J, Pi.ctx))
    r = _log10(res)
    stab = payload(run_a, "periods")["stability"]
    ok = r < -DIGITS + 60 and jres < -DIGITS + 60 and stab["log10_diff"] < -DIGITS + 20 and stab["ratio"] >= 1.5
    record(4, ok, f"log10 residual iPi = PiJ {r:.1f}, J^2 + 1 {jres:.1f} (< {-DIGITS + 60}); "
                  f"B -> {stab['ratio']}B changes integrals by 10^{stab['log10_diff']:.1f} (< 10^{-DIGITS + 20})")
    assert ok


def test_criterion_05_polarization(run_a):
    Pi = _period_matrix(run_a)
    E = payload(run_a, "polarize")["E"]
    J, _ = av.complex_structure(Pi)
    res = _log10(av.riemann_residual(E, J, Pi.ctx))
    typ = lt.polarization_type(E)
    pd = av.is_polarization(Pi, E)
    ok = typ == (1,) * Pi.rows and res < -DIGITS + 60 and pd
    record(5, ok, f"type {typ}, log10 |J^t E J - E| {res:.1f}, Cholesky positive definite {pd}")
    assert ok


def test_criterion_06_endomorphisms(run_a):
    s = payload(run_a, "split")
    fixture = av.ring_invariant(av.eichler_order_basis())
    idx = av.sublattice_index(av.eichler_order_basis(), av.m2_zsqrt3_basis())
    ends = s["endomorphisms"]
    inv = av.ring_invariant(ends)
    ok = len(ends) == 8 and tuple(inv) == tuple(fixture) and idx == 13
    record(6, ok, f"rank {len(ends)}, trace-form invariants {list(inv)} vs index-{idx} order {list(fixture)}")
    assert ok


def test_criterion_07_split_type(run_a):
    E2 = payload(run_a, "split")["E2"]
    typ = lt.polarization_type(E2)
    ok = typ == (1, 2)
    record(7, ok, f"quotient polarization type {typ}")
    assert ok


def test_criterion_08_glue(run_a):
    g = payload(run_a, "glue")
    E2s = payload(run_a, "split")["E2_symplectic"]
    E3p = [[0] * 6 for _ in range(6)]
    for i in range(4):
        for j in range(4):
            E3p[i][j] = E2s[i][j]
    E3p[4][5], E3p[5][4] = -2, 2
    cands = g["candidates"]
    types_ok = all(lt.polarization_type(c["E3"]) == (1, 1, 1) for c in cands)
    exact = all(lt.matmul(lt.matmul(lt.transpose(c["R3"]), c["E3"]), c["R3"]) == E3p for c in cands)
    nq = sum(1 for c in cands if c["classification"] == "plane-quartic")
    ok = len(cands) == 15 and types_ok and exact and nq >= 1
    record(8, ok, f"{len(cands)} isotropic subgroups, all type (1,1,1): {types_ok}, R3^t E3 R3 = E3' exactly: {exact}, "
                  f"plane-quartic candidates: {nq} (uniqueness not asserted)")
    assert ok


def test_criterion_09_identities():
    rec = qt.cover_check(qt.RECONSTRUCTED_COVER)
    tw = qt.proportional_by_unit(qt.twist(qt.SIMPLIFIED_F0, qt.PUBLISHED_DELTA), qt.PUBLISHED_F)
    tan = qt.endo_tangent_selfcheck()
    nob = qt.norm_obstruction()
    ok = rec.ok and tw is not None and tan["ok"] and nob["ok"]
    record(9, ok, f"reconstructed cover -> F0 {rec.ok}; twist by 22-5nu = unit * F ({tw}); "
                  f"tangent block^2 = 3: {tan['ok']}; norm obstruction {nob['ok']}")
    assert ok


@pytest.mark.xfail(strict=True, reason="the printed cover system does not eliminate to F0 (see the reconstructed system)")
def test_criterion_09_printed_cover():
    chk = qt.cover_check(qt.PRINTED_COVER)
    record(9, chk.ok, f"printed cover system -> F0 up to scalar: {chk.ok}")
    assert chk.ok


def test_criterion_10_arithmetic(run_a):
    v = payload(run_a, "verify")
    disc = v["discriminant"]["primes"]
    reps = v["prime_reports"]
    expected = sorted((P.p, P.norm) for P in qt.good_primes(PRIME_BOUND))
    got = sorted((r["p"], r["norm"]) for r in reps)
    bad = [(r["p"], r["root"]) for r in reps if not (r["decomposes"] and r["fe_ok"] and r["roots_ok"] and r["signs"])]
    ambiguous = [(r["p"], r["root"]) for r in reps if len(r["signs"]) == 2]
    f = qx.QExpansion.from_json(payload(run_a, "qexp")["f"])
    odd = qt.frobenius_order_mod_two(f, 5) == 3
    ok = set(disc) <= {2} and got == expected and not bad and odd
    record(10, ok, f"disc support {disc}; {len(reps)} good primes of norm <= {PRIME_BOUND}, failures {bad}, "
                   f"sign not determined (L(f,T) even) at {ambiguous}; a5 odd: {odd}")
    assert ok


def test_criterion_11_twist_search(run_a):
    t = payload(run_a, "verify")["twist_search"]["result"]
    ok = t["delta"] == "22 - 5*nu" and t["exponents"] == [1, 1, 0]
    record(11, ok, f"twist search class {t['exponents']}, representative {t['delta']} (norm {t['norm']})")
    assert ok


def test_criterion_12_determinism(run_a, run_b):
    diff = [s for s in pl.STAGES if (run_a / f"{s}.json").read_bytes() != (run_b / f"{s}.json").read_bytes()]
    ok = not diff
    record(12, ok, f"two runs with seed 0: artifacts differing: {diff or 'none'}")
    assert ok
