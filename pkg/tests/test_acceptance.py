"""Acceptance criteria 1-8.

Each test prints one ``criterion N ... PASS|FAIL`` line straight to the
terminal (visible under ``pytest -v`` without ``-s``) and then asserts.
"""

import math
import time

import numpy as np
import pytest

from qfdiv import linalg
from qfdiv import preserver as pv
from qfdiv.divergence import (
    affine_rule,
    divergence_limit,
    divergence_spectral,
    divergence_superoperator,
    hellinger_sq,
    homogeneity,
    trace_rule,
    tsallis_closed,
    umegaki,
)
from qfdiv.errors import NotAConjugationError
from qfdiv.extreal import ExtendedReal, deviation
from qfdiv.generator import (
    certify_strict_convexity,
    make_affine,
    make_entropy,
    make_exp_decay,
    make_sqrt_deviation,
    make_tsallis,
)

SEED = pv.DEFAULT_SEED
ENT, SQ, DEC = make_entropy(), make_sqrt_deviation(), make_exp_decay()
T_HALF, T_TWO = make_tsallis(0.5), make_tsallis(2.0)
CORE = [ENT, T_HALF, T_TWO, SQ]

_suite_start = time.perf_counter()


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n} {title}: {'PASS' if ok else 'FAIL'} ({detail})")
    return emit


def _rel(x, y):
    return deviation(x, y) / max(1.0, abs(float(y)) if y.is_finite else 1.0)


def test_criterion_1_route_equivalence(report):
    t0 = time.perf_counter()
    worst, pairs = 0.0, 0
    for gi, f in enumerate(CORE):
        for k in range(200):
            rng = linalg.trial_rng(SEED, 10_000 * gi + k)
            n = 2 + k % 5
            A, B = linalg.random_psd(n, None, None, rng), linalg.random_psd(n, None, None, rng)
            s = divergence_spectral(A, B, f).value
            o = divergence_superoperator(A, B, f).value
            worst = max(worst, _rel(o, s))
            pairs += 1
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 30
    report(1, "route equivalence", ok, f"{pairs} pairs, max rel dev {worst:.2e}, {dt:.1f} s")
    assert ok


def _limit_pair(rng, n):
    """Well-conditioned pair; B rank-deficient in about half the cases and A
    inside supp B in about half of those."""
    rank_b = n if rng.random() < 0.5 else int(rng.integers(1, n))
    B = linalg.random_psd_spectrum(n, rank_b, seed=rng)
    if rank_b < n and rng.random() < 0.5:
        V = linalg.eig_hermitian(B).eigenvectors[:, :rank_b]
        w = rng.uniform(0.1, 1.0, rank_b)
        G = linalg.random_unitary(rank_b, rng)
        A = V @ G @ np.diag(w) @ G.conj().T @ V.conj().T
    else:
        A = linalg.random_psd_spectrum(n, int(rng.integers(1, n + 1)), seed=rng)
    return A, B


def test_criterion_2_limit_definition(report):
    t0 = time.perf_counter()
    worst, flag_mismatch, infinite, deficient, pairs = 0.0, 0, 0, 0, 0
    for k in range(100):
        rng = linalg.trial_rng(SEED, 20_000 + k)
        n = 2 + k % 3
        A, B = _limit_pair(rng, n)
        deficient += int(np.linalg.matrix_rank(B, tol=1e-9) < n)
        for f in CORE:
            s = divergence_spectral(A, B, f).value
            lim, _ = divergence_limit(A, B, f)
            pairs += 1
            if s.is_inf or lim.value.is_inf:
                infinite += int(s.is_inf)
                flag_mismatch += int(s.is_inf != lim.value.is_inf)
                continue
            worst = max(worst, abs(float(lim.value) - float(s)))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-6 and flag_mismatch == 0 and dt < 30
    report(2, "limit definition", ok,
           f"{pairs} (pair, f) cases, {deficient} rank-deficient B, {infinite} infinite, "
           f"flag mismatches {flag_mismatch}, max finite dev {worst:.2e}, {dt:.1f} s")
    assert ok


def _closed_form_pair(rng, k):
    n = 2 + k % 4
    if k % 4 == 0:
        # commuting, possibly rank-deficient
        U = linalg.random_unitary(n, rng)
        a = rng.uniform(0, 2, n) * (rng.random(n) < 0.8)
        b = rng.uniform(0, 2, n) * (rng.random(n) < 0.8)
        return U @ np.diag(a) @ U.conj().T, U @ np.diag(b) @ U.conj().T
    ra = n if k % 4 == 1 else int(rng.integers(1, n + 1))
    rb = n if k % 4 != 3 else int(rng.integers(1, n + 1))
    return linalg.random_psd(n, ra, None, rng), linalg.random_psd(n, rb, None, rng)


def test_criterion_3_closed_forms(report):
    checks = {
        "umegaki": (ENT, umegaki),
        "tsallis q=0.5": (T_HALF, lambda A, B: tsallis_closed(A, B, 0.5)),
        "tsallis q=2": (T_TWO, lambda A, B: tsallis_closed(A, B, 2.0)),
        "hellinger": (SQ, hellinger_sq),
    }
    worst = {}
    for ci, (name, (f, closed)) in enumerate(checks.items()):
        w = 0.0
        for k in range(200):
            A, B = _closed_form_pair(linalg.trial_rng(SEED, 30_000 + 1000 * ci + k), k)
            w = max(w, _rel(divergence_spectral(A, B, f).value, ExtendedReal(closed(A, B))))
        worst[name] = w
    ok = all(w <= 1e-9 for w in worst.values())
    report(3, "closed forms", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + ", 200 pairs each")
    assert ok


def test_criterion_4_identity_suite(report):
    gens = [ENT, T_HALF, T_TWO, SQ, DEC]
    worst = {"trace rule": 0.0, "homogeneity": 0.0, "affine": 0.0}
    inf_kept = True
    for k in range(200):
        rng = linalg.trial_rng(SEED, 40_000 + k)
        n = 1 + k % 6
        f = gens[k % len(gens)]
        A = linalg.random_psd(n, int(rng.integers(1, n + 1)), None, rng)
        B = linalg.random_psd(n, int(rng.integers(1, n + 1)), None, rng)
        lam = float(rng.choice([0.0, rng.uniform(0, 5)])) if k % 10 else 1.0
        worst["trace rule"] = max(worst["trace rule"], _rel(*trace_rule(A, lam, f)))
        lhs, rhs = homogeneity(A, B, float(rng.uniform(0.1, 10)), f)
        if lhs.is_inf or rhs.is_inf:
            inf_kept &= lhs.is_inf and rhs.is_inf
        else:
            worst["homogeneity"] = max(worst["homogeneity"], _rel(lhs, rhs))
        alpha, beta = rng.uniform(-3, 3, 2)
        worst["affine"] = max(worst["affine"], _rel(*affine_rule(A, B, float(alpha), float(beta))))
    ok = all(w <= 1e-10 for w in worst.values()) and inf_kept
    report(4, "identity suite", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + ", 200 cases each")
    assert ok


def test_criterion_5_conjugations_preserve(report):
    worst, worst_tr, mismatches, triples = 0.0, 0.0, 0, 0
    for gi, f in enumerate([ENT, T_HALF, T_TWO, SQ, DEC]):
        for n in range(2, 7):
            for kind in ("unitary", "antiunitary"):
                T = pv.transform_from_label(f"{kind}:{linalg.mix_seed(SEED, 100 * gi + n)}", n)
                r = pv.check_preservation(T, f, n, trials=10, seed=linalg.mix_seed(SEED, 50_000 + 100 * gi + n))
                worst = max(worst, r.max_scaled_deviation)
                worst_tr = max(worst_tr, r.max_trace_deviation)
                mismatches += r.infinite_mismatches
                triples += r.trials
    ok = worst <= 1e-9 and worst_tr <= 1e-12 and mismatches == 0
    report(5, "conjugations preserve S_f", ok,
           f"{triples} triples, max dev {worst:.1e}, trace dev {worst_tr:.1e}, infinite mismatches {mismatches}")
    assert ok


def test_criterion_6_non_conjugations_falsified(report):
    missing, latest = [], 0
    for name in ("pinching", "averaging"):
        for f in (ENT, T_TWO, SQ):
            for n in (2, 3, 4):
                w = pv.falsify(pv.transform_from_label(name, n), f, n, budget=1000, threshold=1e-3)
                if w is None:
                    missing.append(f"{name}/{f.name}/{n}")
                else:
                    latest = max(latest, w.trial)
    ok = not missing
    report(6, "non-conjugations falsified", ok,
           f"18 cases, witnesses by trial {latest}" if ok else f"no witness: {missing}")
    assert ok


def test_criterion_7_recovery(report):
    wrong, worst = 0, 0.0
    for n in range(2, 6):
        for kind in ("unitary", "antiunitary"):
            for s in range(50):
                T = pv.transform_from_label(f"{kind}:{linalg.mix_seed(SEED, 70_000 + 1000 * n + s)}", n)
                r = pv.recover_operator(lambda X: pv.apply(T, X), n)
                wrong += int(r.kind_hat != kind)
                worst = max(worst, r.action_residual)
    try:
        pv.recover_operator(pv.pinching, 3)
        pinching_rejected = False
    except NotAConjugationError:
        pinching_rejected = True
    ok = wrong == 0 and worst <= 1e-8 and pinching_rejected
    report(7, "recovery", ok, f"400 maps, wrong kinds {wrong}, max action residual {worst:.1e}, "
                              f"pinching rejected {pinching_rejected}")
    assert ok


def test_criterion_8_proof_ingredients(report):
    parts = {}
    a = pv.extremal_checks(DEC, np.eye(2), trials=200, mode="max")
    a_rand = pv.extremal_checks(DEC, linalg.random_psd(3, 2, 1.5, 8), trials=200, mode="max")
    parts["a"] = a.passed and a_rand.passed and abs(a.max_at_zero - 2 * (math.e - 1)) <= 1e-12

    b_ent = pv.extremal_checks(ENT, np.eye(3), mode="inf")
    b_ts = pv.extremal_checks(T_TWO, np.eye(2), mode="inf")
    parts["b"] = (b_ent.passed and b_ts.passed
                  and abs(b_ent.K + 1 / math.e) <= 1e-12 and abs(b_ts.K + 0.25) <= 1e-12)

    parts["c"] = pv.ratio_bound_check(SQ, samples=500) < 0

    z = pv.zero_characterization(SQ, np.zeros((3, 3)), trials=500)
    margins = list(pv.superadditivity_margins(SQ, 3, cases=100))
    parts["d"] = z.passed and all(m > 0 and abs(g - m) <= 1e-9 * max(1.0, m) for m, g in margins)

    strict = [ENT, T_HALF, T_TWO, make_tsallis(3.0), SQ, DEC]
    parts["e"] = (all(certify_strict_convexity(f).passed for f in strict)
                  and not certify_strict_convexity(make_affine(2, 3)).passed
                  and not certify_strict_convexity(make_affine(0, 1)).passed)

    elapsed = time.perf_counter() - _suite_start
    ok = all(parts.values()) and elapsed < 120
    report(8, "proof ingredients", ok,
           " ".join(f"({k}) {'ok' if v else 'FAILED'}" for k, v in parts.items()) + f", suite {elapsed:.1f} s")
    assert ok
