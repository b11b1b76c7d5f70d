"""Preserver laboratory: (anti)unitary conjugations versus other maps.

Conjugations ``A -> U A U^*`` and ``A -> U conj(A) U^*`` leave every
f-divergence unchanged.  This module checks that numerically, hunts for
witnesses against maps that are not conjugations, reconstructs ``U`` from a
black-box conjugation, and exercises the inequalities used to show that a
divergence-preserving bijection must be trace preserving and a conjugation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import linalg
from .divergence import (
    divergence_spectral,
    superadditivity,
    triangle_at_zero,
)
from .errors import NotAConjugationError, NotPsdError, ParameterError
from .extreal import ExtendedReal, deviation
from .generator import (
    GeneratorFunction,
    certify_strict_convexity,
    estimate_infimum,
    is_strictly_decreasing,
)

UNITARY_TOL = 1e-10
DEFAULT_SEED = 1234567891011


# -- transforms ----------------------------------------------------------------


@dataclass(frozen=True)
class TransformSpec:
    kind: str  # "unitary", "antiunitary" or "custom"
    U: np.ndarray | None = None
    custom_apply: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    name: str = ""

    def __post_init__(self):
        if self.kind in ("unitary", "antiunitary"):
            U = np.asarray(self.U, dtype=complex)
            n = U.shape[0]
            res = linalg.hs_norm(U.conj().T @ U - np.eye(n))
            if res > UNITARY_TOL:
                raise ParameterError(f"U is not unitary: ||U*U - I||_HS = {res:.3e}")
            object.__setattr__(self, "U", U)
        elif self.kind == "custom":
            if self.custom_apply is None:
                raise ParameterError("custom transform needs custom_apply")
        else:
            raise ParameterError(f"unknown transform kind {self.kind!r}")

    @classmethod
    def unitary(cls, U, name="unitary"):
        return cls("unitary", U, name=name)

    @classmethod
    def antiunitary(cls, U, name="antiunitary"):
        return cls("antiunitary", U, name=name)

    @classmethod
    def custom(cls, fn, name="custom"):
        return cls("custom", custom_apply=fn, name=name)

    @property
    def is_conjugation(self) -> bool:
        return self.kind != "custom"


def apply(T: TransformSpec, A) -> np.ndarray:
    """Apply ``T`` to a PSD operator.

    Conjugations are PSD-preserving by construction and only symmetrized;
    outputs of custom maps are re-validated and a :class:`NotPsdError` names
    the offending eigenvalue.
    """
    A = np.asarray(A, dtype=complex)
    if T.kind == "unitary":
        out = T.U @ A @ T.U.conj().T
    elif T.kind == "antiunitary":
        out = T.U @ A.conj() @ T.U.conj().T
    else:
        out = np.asarray(T.custom_apply(A), dtype=complex)
        try:
            linalg.psd_eigh(out)
        except NotPsdError as exc:
            raise NotPsdError(f"map {T.name!r} returned a non-PSD operator: eigenvalue {exc.eigenvalue:.6e}",
                              eigenvalue=exc.eigenvalue) from exc
    return 0.5 * (out + out.conj().T)


def pinching(A):
    return np.diag(np.diag(A))


def averaging(A):
    A = np.asarray(A)
    n = A.shape[0]
    return np.trace(A).real / n * np.eye(n, dtype=complex)


def transpose(A):
    return np.asarray(A).T.copy()


NAMED_MAPS = {"pinching": pinching, "averaging": averaging, "transpose": transpose}
TRANSFORM_LABELS = ("unitary:<seed>", "antiunitary:<seed>", "pinching", "averaging", "transpose")


def transform_from_label(label: str, dim: int) -> TransformSpec:
    head, _, arg = label.partition(":")
    if head in ("unitary", "antiunitary"):
        try:
            seed = int(arg)
        except ValueError:
            raise ParameterError(f"{head} transform needs an integer seed, e.g. {head}:7") from None
        U = linalg.random_unitary(dim, seed)
        return TransformSpec(head, U, name=label)
    if head in NAMED_MAPS and not arg:
        return TransformSpec.custom(NAMED_MAPS[head], name=head)
    raise ParameterError(f"unknown transform {label!r}; known: {', '.join(TRANSFORM_LABELS)}")


# -- sampling ------------------------------------------------------------------

CATEGORIES = ("full-rank", "rank-deficient", "scalar-multiple", "rank-one")


def sample_pair(rng: np.random.Generator, dim: int):
    """Draw ``(A, B, category)``: 40% full rank, 30% rank deficient, 20%
    ``(A, lam A)``, 10% scaled rank-one projections."""
    u = rng.random()
    trace = lambda: float(rng.uniform(0.5, 2.0))  # noqa: E731
    if u < 0.4 or (dim == 1 and u < 0.7):
        A = linalg.random_psd(dim, None, trace(), rng)
        B = linalg.random_psd(dim, None, trace(), rng)
        return A, B, "full-rank"
    if u < 0.7:
        A = linalg.random_psd(dim, int(rng.integers(1, dim + 1)), trace(), rng)
        B = linalg.random_psd(dim, int(rng.integers(1, dim)), trace(), rng)
        return A, B, "rank-deficient"
    if u < 0.9:
        A = linalg.random_psd(dim, int(rng.integers(1, dim + 1)), trace(), rng)
        return A, float(rng.uniform(0.1, 5.0)) * A, "scalar-multiple"
    A = trace() * linalg.random_rank_one_projection(dim, rng)
    B = trace() * linalg.random_rank_one_projection(dim, rng)
    return A, B, "rank-one"


# -- preservation and falsification ----------------------------------------------


@dataclass
class PreservationReport:
    trials: int
    max_abs_deviation: float
    max_scaled_deviation: float
    worst_pair: tuple | None
    infinite_mismatches: int
    max_trace_deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.infinite_mismatches == 0 and self.max_scaled_deviation <= self.tol


def _compare(T, f, dim, seed, k):
    rng = linalg.trial_rng(seed, k)
    A, B, cat = sample_pair(rng, dim)
    TA, TB = apply(T, A), apply(T, B)
    before = divergence_spectral(A, B, f).value
    after = divergence_spectral(TA, TB, f).value
    dtr = max(abs(np.trace(TA).real - np.trace(A).real), abs(np.trace(TB).real - np.trace(B).real))
    return k, cat, A, B, before, after, dtr


def _run_trials(fn, indices, workers):
    if workers <= 1:
        return [fn(k) for k in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, indices))


def check_preservation(
    T: TransformSpec,
    f: GeneratorFunction,
    dim: int,
    trials: int = 100,
    seed: int = DEFAULT_SEED,
    tol: float = 1e-9,
    workers: int = 1,
) -> PreservationReport:
    """Compare ``S_f(T A || T B)`` with ``S_f(A || B)`` on sampled pairs.

    Trial ``k`` draws from ``trial_rng(seed, k)``, so the report does not
    depend on ``workers``.  Deviations are compared against ``tol`` scaled by
    ``max(1, |S_f(A || B)|)``; an infinite value on exactly one side counts as
    an infinite mismatch.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    results = _run_trials(lambda k: _compare(T, f, dim, seed, k), range(trials), workers)
    max_abs = max_scaled = max_tr = 0.0
    worst = None
    mismatches = 0
    for k, cat, _, _, before, after, dtr in results:
        max_tr = max(max_tr, dtr)
        d = deviation(before, after)
        if math.isinf(d):
            mismatches += 1
            worst = worst or (k, cat)
            continue
        scaled = d / max(1.0, abs(float(before)) if before.is_finite else 1.0)
        if scaled > max_scaled or worst is None:
            worst = (k, cat)
        max_abs = max(max_abs, d)
        max_scaled = max(max_scaled, scaled)
    return PreservationReport(trials, max_abs, max_scaled, worst, mismatches, max_tr, tol)


@dataclass
class Witness:
    trial: int
    category: str
    A: np.ndarray
    B: np.ndarray
    before: ExtendedReal
    after: ExtendedReal
    deviation: float


def falsify(
    T: TransformSpec,
    f: GeneratorFunction,
    dim: int,
    budget: int = 1000,
    threshold: float = 1e-3,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> Witness | None:
    """First sampled pair with ``|S_f(T A || T B) - S_f(A || B)| > threshold``,
    or ``None`` if the budget runs out."""
    if budget < 1:
        raise ParameterError("budget must be >= 1")
    chunk = max(1, workers) * 8
    for start in range(0, budget, chunk):
        idx = range(start, min(budget, start + chunk))
        for k, cat, A, B, before, after, _ in _run_trials(lambda k: _compare(T, f, dim, seed, k), idx, workers):
            d = deviation(before, after)
            if d > threshold:
                return Witness(k, cat, A, B, before, after, d)
    return None


# -- recovery ------------------------------------------------------------------


@dataclass
class RecoveryResult:
    U_hat: np.ndarray
    kind_hat: str
    unitarity_residual: float
    action_residual: float


RANK_ONE_TOL = 1e-8
KIND_GAP = 1e3


def _rank_one_vector(M, what: str) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    d = linalg.eig_hermitian(0.5 * (M + M.conj().T))
    top = float(d.eigenvalues[0])
    rest = float(np.max(np.abs(d.eigenvalues[1:]))) if d.dim > 1 else 0.0
    if top <= 0 or rest > RANK_ONE_TOL * max(1.0, top):
        raise NotAConjugationError(f"image of {what} is not rank-one (eigenvalues {d.eigenvalues.round(10)})")
    return d.eigenvectors[:, 0]


def _projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def recover_operator(phi: Callable[[np.ndarray], np.ndarray], dim: int, seed: int = DEFAULT_SEED,
                     extra_probes: int = 4) -> RecoveryResult:
    """Reconstruct ``U`` from a black-box map assumed to be ``U . U^*`` or
    ``U conj(.) U^*``.

    Columns come from the images of the basis projections ``E_ii``, their
    relative phases from ``(e_1 + e_j)(e_1 + e_j)^* / 2``, and the kind from
    ``(e_1 + i e_2)(e_1 + i e_2)^* / 2``.  The global phase is fixed by making
    the first nonzero entry of the first column real and positive.
    """
    if dim < 1:
        raise ParameterError("dim must be >= 1")
    eye = np.eye(dim, dtype=complex)
    probes = []

    cols = []
    for i in range(dim):
        E = np.outer(eye[i], eye[i])
        image = phi(E)
        probes.append((E, image))
        cols.append(_rank_one_vector(image, f"E_{i + 1}{i + 1}"))

    u1 = cols[0]
    lead = u1[np.flatnonzero(np.abs(u1) > 1e-12)[0]]
    cols[0] = u1 * (abs(lead) / lead)

    for j in range(1, dim):
        P = _projector(eye[0] + eye[j])
        image = phi(P)
        probes.append((P, image))
        _rank_one_vector(image, f"(e_1 + e_{j + 1}) projection")
        c = cols[0].conj() @ np.asarray(image) @ cols[j]
        if abs(c) < 0.25:
            raise NotAConjugationError(f"phase probe for column {j + 1} has overlap {abs(c):.3g}, expected 1/2")
        cols[j] = cols[j] * (c.conjugate() / abs(c))

    U_hat = np.column_stack(cols)
    kind = "unitary"
    if dim >= 2:
        Pc = _projector(eye[0] + 1j * eye[1])
        image = np.asarray(phi(Pc))
        probes.append((Pc, image))
        _rank_one_vector(image, "(e_1 + i e_2) projection")
        r_u = linalg.hs_norm(U_hat @ Pc @ U_hat.conj().T - image)
        r_a = linalg.hs_norm(U_hat @ Pc.conj() @ U_hat.conj().T - image)
        lo, hi = sorted((r_u, r_a))
        if hi < KIND_GAP * lo:
            raise NotAConjugationError(
                f"cannot tell unitary from antiunitary (residuals {r_u:.3g} vs {r_a:.3g})"
            )
        kind = "unitary" if r_u < r_a else "antiunitary"

    T = TransformSpec(kind, U_hat) if linalg.hs_norm(U_hat.conj().T @ U_hat - eye) <= UNITARY_TOL else None
    rng = np.random.default_rng(seed)
    for _ in range(extra_probes):
        A = linalg.random_psd(dim, int(rng.integers(1, dim + 1)), 1.0, rng)
        probes.append((A, phi(A)))

    def conj_apply(A):
        if T is not None:
            return apply(T, A)
        Ai = A.conj() if kind == "antiunitary" else A
        return U_hat @ Ai @ U_hat.conj().T

    action = max(linalg.hs_norm(conj_apply(A) - np.asarray(img)) for A, img in probes)
    unitarity = linalg.hs_norm(U_hat.conj().T @ U_hat - eye)
    return RecoveryResult(U_hat, kind, unitarity, action)


def phase_aligned_distance(U, V) -> float:
    """``min_theta ||U - e^(i theta) V||_HS``."""
    U, V = np.asarray(U), np.asarray(V)
    z = np.vdot(V, U)
    phase = z / abs(z) if abs(z) > 0 else 1.0
    return linalg.hs_norm(U - phase * V)


# -- proof ingredients -----------------------------------------------------------


def _require_strictly_convex(f: GeneratorFunction):
    cert = certify_strict_convexity(f)
    if not cert.passed:
        raise ParameterError(f"generator {f.name!r} is not certified strictly convex: {cert.message}")
    return cert


def _sample_operator(rng: np.random.Generator, dim: int) -> np.ndarray:
    rank = int(rng.integers(1, dim + 1))
    scale = float(10.0 ** rng.uniform(-2, 2))
    return linalg.random_psd(dim, rank, scale, rng)


@dataclass
class ExtremalReport:
    trace: float
    max_checked: bool = False
    max_bound: float | None = None
    max_sampled: float | None = None
    max_at_zero: float | None = None
    inf_checked: bool = False
    K: float | None = None
    argmin: float | None = None
    inf_bound: float | None = None
    min_sampled: float | None = None
    attainment_gap: float | None = None
    trace_rule_residual: float = 0.0
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations and (self.max_checked or self.inf_checked)


def extremal_checks(
    f: GeneratorFunction,
    A,
    trials: int = 200,
    seed: int = DEFAULT_SEED,
    mode: str = "auto",
    K: float | None = None,
    tol: float = 1e-9,
) -> ExtremalReport:
    """Extremal values of ``X -> S_f(X || A)``.

    ``mode="max"``: for strictly decreasing ``f`` the maximum is
    ``f(0) tr A``, attained at ``X = 0``.  ``mode="inf"``: with
    ``K = inf f`` finite the infimum is ``K tr A``, approached along
    ``X = lam A`` as ``lam`` tends to the minimizer of ``f``.  ``"auto"`` runs
    whichever applies.
    """
    if mode not in ("auto", "max", "inf"):
        raise ParameterError(f"unknown mode {mode!r}")
    _require_strictly_convex(f)
    A = linalg.as_psd(A)
    dim = A.shape[0]
    trA = float(np.trace(A).real)
    report = ExtremalReport(trace=trA)

    decreasing = is_strictly_decreasing(f) and float(f.omega) <= 0.0
    if mode == "max" and not decreasing:
        raise ParameterError("max check needs a strictly decreasing generator")

    inf_info = None
    if mode in ("auto", "inf"):
        if K is not None:
            inf_info = (float(K), None)
        else:
            est = estimate_infimum(f)
            if est.attained:
                inf_info = (est.value, est.argmin)
            elif mode == "inf":
                raise ParameterError("infimum of f not attained on the search interval; pass K explicitly")
            else:
                report.notes.append("infimum not attained; inf check skipped")

    rng = np.random.default_rng(seed)
    samples = [_sample_operator(rng, dim) for _ in range(trials)]
    values = [divergence_spectral(X, A, f).value for X in samples]

    if decreasing and mode in ("auto", "max"):
        bound = f.value_at_zero * trA
        finite = [float(v) for v in values if v.is_finite]
        report.max_checked = True
        report.max_bound = bound
        report.max_sampled = max(finite) if finite else None
        if len(finite) != len(values) or (finite and max(finite) > bound + tol * max(1.0, abs(bound))):
            report.violations.append("sampled S_f(X||A) exceeds f(0) tr A")
        at_zero = float(divergence_spectral(np.zeros_like(A), A, f).value)
        report.max_at_zero = at_zero
        if abs(at_zero - bound) > tol * max(1.0, abs(bound)):
            report.violations.append("S_f(0||A) differs from f(0) tr A")

    if inf_info is not None:
        k_val, x_star = inf_info
        bound = k_val * trA
        report.inf_checked = True
        report.K, report.argmin, report.inf_bound = k_val, x_star, bound
        finite = [float(v) for v in values if v.is_finite]
        report.min_sampled = min(finite) if finite else None
        if finite and min(finite) < bound - tol * max(1.0, abs(bound)):
            report.violations.append("sampled S_f(X||A) falls below K tr A")
        if x_star is not None:
            grid = [x_star * (1 + d) for d in np.linspace(-1e-3, 1e-3, 11)] if x_star > 0 else [0.0, 1e-6, 1e-3]
            best = math.inf
            for lam in grid:
                s = float(divergence_spectral(lam * A, A, f).value)
                report.trace_rule_residual = max(report.trace_rule_residual, abs(s - f(lam) * trA))
                best = min(best, s)
            report.attainment_gap = best - bound
            if report.attainment_gap > tol * max(1.0, abs(bound)) or report.attainment_gap < -tol * max(1.0, abs(bound)):
                report.violations.append(f"S_f(lam A||A) does not reach K tr A (gap {report.attainment_gap:.3g})")
            if report.trace_rule_residual > 1e-10 * max(1.0, abs(bound)):
                report.violations.append("trace rule S_f(lam A||A) = f(lam) tr A failed")
    return report


@dataclass
class ZeroReport:
    is_zero: bool
    trials: int = 0
    min_slack: float | None = None
    lhs: float | None = None
    rhs: float | None = None
    margin: float | None = None
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def _check_f1_zero(f: GeneratorFunction):
    if abs(f(1.0)) > 1e-12:
        raise ParameterError(f"needs f(1) = 0, got {f(1.0)}")


def zero_characterization(
    f: GeneratorFunction,
    X,
    trials: int = 500,
    seed: int = DEFAULT_SEED,
    lam: float = 2.0,
    mu: float = 2.0,
    tol: float = 1e-9,
) -> ZeroReport:
    """``X = 0`` iff ``S_f(A||B) <= S_f(A||X) + S_f(X||B)`` for all ``A, B``.

    For ``X = 0`` (which needs ``f(1) = 0`` and ``f > 0`` away from 1) the
    bound is sampled on random pairs.  For ``X != 0`` the explicit pair
    ``A = lam mu X``, ``B = X`` must violate it with margin
    ``tr X (f(lam mu) - lam f(mu) - f(lam))``.
    """
    _check_f1_zero(f)
    X = linalg.as_psd(X)
    dim = X.shape[0]
    if linalg.hs_norm(X) == 0.0:
        inf = estimate_infimum(f)
        if inf.value < -1e-12:
            raise ParameterError(f"triangle bound at 0 needs inf f = 0, got {inf.value}")
        rng = np.random.default_rng(seed)
        report = ZeroReport(True, trials)
        slack = math.inf
        for k in range(trials):
            A, B = _sample_operator(rng, dim), _sample_operator(rng, dim)
            if k % 50 == 0:
                A = np.zeros_like(A)
            elif k % 50 == 1:
                B = np.zeros_like(B)
            lhs, rhs = triangle_at_zero(A, B, f)
            if lhs.is_inf and not rhs.is_inf:
                report.violations.append(f"trial {k}: S_f(A||B) infinite but bound finite")
                continue
            if rhs.is_inf:
                continue
            s = float(rhs) - float(lhs)
            slack = min(slack, s)
            if s < -tol * max(1.0, abs(float(rhs))):
                report.violations.append(f"trial {k}: bound violated by {-s:.3g}")
        report.min_slack = slack
        return report

    if not (lam > 1 and mu > 1):
        raise ParameterError("lam and mu must exceed 1")
    lhs, rhs, margin = superadditivity(X, lam, mu, f)
    report = ZeroReport(False, 1, lhs=float(lhs), rhs=float(rhs), margin=margin)
    if not float(lhs) < float(rhs):
        report.violations.append("expected strict violation of the triangle bound")
    if abs((float(rhs) - float(lhs)) - margin) > 1e-9 * max(1.0, abs(margin)):
        report.violations.append("violation size differs from tr X (f(lam mu) - lam f(mu) - f(lam))")
    return report


@dataclass
class RankOneReport:
    divergence: float
    expected: float
    bracket: float | None
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        ok = abs(self.divergence - self.expected) <= 1e-10 * max(1.0, abs(self.expected))
        return ok and (self.bracket is None or self.bracket > 0)


def rank_one_overlap_check(f: GeneratorFunction, P, lam: float, mu: float) -> RankOneReport:
    """``S_f(lam P || mu P) = mu f(lam / mu)`` for a rank-one projection ``P``,
    and positivity of ``lam omega_f + mu f(0) - mu f(lam / mu)``."""
    if not (lam > 0 and mu > 0):
        raise ParameterError("lam and mu must be positive")
    P = np.asarray(P, dtype=complex)
    if not linalg.is_projection(P) or abs(np.trace(P).real - 1.0) > 1e-9:
        raise ParameterError("P must be a rank-one projection")
    s = float(divergence_spectral(lam * P, mu * P, f).value)
    expected = mu * f(lam / mu)
    if f.omega.is_inf:
        return RankOneReport(s, expected, None, ["omega_f = inf: bracket is +inf"])
    bracket = lam * float(f.omega) + mu * f.value_at_zero - mu * f(lam / mu)
    return RankOneReport(s, expected, bracket)


def rank_one_pair_formula(f: GeneratorFunction, lam: float, mu: float, overlap: float) -> ExtendedReal:
    """``S_f(lam P || mu Q)`` for rank-one projections with ``tr PQ = overlap``:
    ``mu f(lam/mu) t + (lam omega_f + mu f(0)) (1 - t)``."""
    t = float(overlap)
    rest = f.omega * (lam * (1.0 - t)) + mu * f.value_at_zero * (1.0 - t)
    return rest + mu * f(lam / mu) * t


def ratio_bound_check(f: GeneratorFunction, samples: int = 500, seed: int = DEFAULT_SEED):
    """Sample ``0 < b < a`` and return the largest ``(b/a) f(a/b) - omega_f``;
    negative means ``(b/a) f(a/b) < omega_f`` held everywhere.

    Needs ``f(1) = 0`` and ``inf f = 0``.  Returns ``-inf`` when
    ``omega_f = inf``.
    """
    _check_f1_zero(f)
    if estimate_infimum(f).value < -1e-12:
        raise ParameterError("needs inf f = 0")
    if f.omega.is_inf:
        return -math.inf
    rng = np.random.default_rng(seed)
    b = rng.uniform(1e-3, 10.0, samples)
    a = b * 10.0 ** rng.uniform(1e-6, 4.0, samples)
    return max((bi / ai) * f(ai / bi) - float(f.omega) for ai, bi in zip(a, b))


def superadditivity_margins(f: GeneratorFunction, dim: int, cases: int = 100, seed: int = DEFAULT_SEED):
    """For random nonzero ``X`` and ``lam, mu`` in ``(1, 10)``, yield
    ``(margin, rhs - lhs)`` from :func:`~qfdiv.divergence.superadditivity`."""
    _check_f1_zero(f)
    rng = np.random.default_rng(seed)
    for _ in range(cases):
        X = _sample_operator(rng, dim)
        lam, mu = rng.uniform(1.0, 10.0, 2)
        lhs, rhs, margin = superadditivity(X, float(lam), float(mu), f)
        yield margin, float(rhs) - float(lhs)
