"""Quantum f-divergences ``S_f(A || B)`` of PSD operators.

Three independent routes are provided:

* :func:`divergence_spectral` -- double sum over eigenpairs of ``A`` and ``B``
  weighted by ``|<u_i, v_j>|^2``, with the ``omega_f * a`` term on the kernel
  of ``B``;
* :func:`divergence_superoperator` -- ``<B^(1/2), f(L_A R_B^-1) B^(1/2)>_HS``
  evaluated in the eigenbasis ``u_i v_j^*`` of the relative modular operator
  (:func:`divergence_superoperator_explicit` builds the ``n^2 x n^2`` matrix);
* :func:`divergence_limit` -- ``S_f(A || B + eps I)`` along a shrinking
  ``eps`` schedule.

Closed forms for the Umegaki, Tsallis and squared Hellinger-type divergences
serve as oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionError, ParameterError, SupportViolationError
from .extreal import INF, ExtendedReal, ext_sum
from .generator import GeneratorFunction, make_affine

SUPPORT_TOL = 1e-8
RATIO_FLOOR = 1e-14
DEFAULT_SCHEDULE = tuple(10.0**-k for k in range(1, 9))


@dataclass(frozen=True)
class Term:
    a: float
    b: float
    weight: float
    contribution: ExtendedReal


@dataclass(frozen=True)
class DivergenceResult:
    value: ExtendedReal
    route: str
    support_violated: bool
    terms: list[Term] | None = None

    def __float__(self) -> float:
        return float(self.value)


def _clamped_eigh(A) -> linalg.SpectralDecomposition:
    d = linalg.psd_eigh(A)
    w = d.eigenvalues
    w = np.where(w <= linalg.zero_threshold(w), 0.0, w)
    return linalg.SpectralDecomposition(w, d.eigenvectors)


def _pair(A, B):
    a = np.asarray(A, dtype=complex)
    b = np.asarray(B, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def _f_at(f: GeneratorFunction, ratio: float) -> float:
    return f.value_at_zero if ratio < RATIO_FLOOR else f(ratio)


def divergence_spectral(A, B, f: GeneratorFunction, breakdown: bool = False) -> DivergenceResult:
    """``sum_ij`` of ``b_j f(a_i / b_j) w_ij`` over ``b_j > 0`` plus
    ``omega_f a_i w_ij`` over ``b_j = 0``, with ``0 * inf = 0``."""
    A, B = _pair(A, B)
    dA, dB = _clamped_eigh(A), _clamped_eigh(B)
    table = linalg.overlap_table(dA, dB)
    a, b, W = table.a, table.b, table.weights.copy()

    leak = W[np.ix_(a > 0, b == 0)].sum()
    violated = bool(math.sqrt(max(leak, 0.0)) > SUPPORT_TOL)
    if not violated:
        # kernel overlaps are rounding noise once containment holds
        W[np.ix_(a > 0, b == 0)] = 0.0

    terms = []
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            w = float(W[i, j])
            if bj == 0.0:
                c = f.omega * (float(ai) * w)
            else:
                c = ExtendedReal(bj * _f_at(f, ai / bj) * w)
            terms.append(Term(float(ai), float(bj), w, c))
    value = ext_sum(t.contribution for t in terms)
    return DivergenceResult(value, "spectral", violated, terms if breakdown else None)


def divergence_superoperator(A, B, f: GeneratorFunction) -> DivergenceResult:
    """``<B^(1/2), f(L_A R_B^-1) B^(1/2)>_HS`` for ``supp A <= supp B``.

    ``L_A R_B^-1 : X -> A X B^-1`` acts on operators supported on ``supp B``
    with eigenvectors ``u_i v_j^*`` and eigenvalues ``a_i / b_j``.  The
    components of ``B^(1/2)`` along that basis are ``u_i^* B^(1/2) v_j``.
    """
    A, B = _pair(A, B)
    if not linalg.support_contained(A, B, SUPPORT_TOL):
        raise SupportViolationError("superoperator route requires supp A to lie in supp B")
    dA, dB = _clamped_eigh(A), _clamped_eigh(B)
    supp = dB.eigenvalues > 0
    root_B = linalg.matrix_function(B, math.sqrt, on_support=True)
    coeff = dA.eigenvectors.conj().T @ root_B @ dB.eigenvectors[:, supp]
    mod_eigs = dA.eigenvalues[:, None] / dB.eigenvalues[supp][None, :]
    fvals = np.vectorize(f, otypes=[float])(mod_eigs)
    value = math.fsum((fvals * np.abs(coeff) ** 2).ravel())
    return DivergenceResult(ExtendedReal(value), "superoperator", False)


def relative_modular_matrix(A, B) -> np.ndarray:
    """Matrix of ``X -> A X B^-1`` (``B^-1`` inverted on its support) acting on
    column-stacked ``vec X``, i.e. ``(B^-1)^T kron A``."""
    A, B = _pair(A, B)
    B_inv = linalg.matrix_function(B, lambda x: 1.0 / x, on_support=True)
    return np.kron(B_inv.T, linalg.as_hermitian(A))


def divergence_superoperator_explicit(A, B, f: GeneratorFunction) -> DivergenceResult:
    """Same quantity as :func:`divergence_superoperator` from an explicit
    ``n^2 x n^2`` matrix.  Quadratic memory; meant for small ``n``."""
    A, B = _pair(A, B)
    if not linalg.support_contained(A, B, SUPPORT_TOL):
        raise SupportViolationError("superoperator route requires supp A to lie in supp B")
    M = relative_modular_matrix(A, B)
    d = linalg.psd_eigh(M)
    lam = np.where(d.eigenvalues <= linalg.zero_threshold(d.eigenvalues), 0.0, d.eigenvalues)
    fM = (d.eigenvectors * np.array([f(x) for x in lam])) @ d.eigenvectors.conj().T
    vec = linalg.matrix_function(B, math.sqrt, on_support=True).reshape(-1, order="F")
    value = np.vdot(vec, fM @ vec).real
    return DivergenceResult(ExtendedReal(value), "superoperator", False)


def divergence_epsilon(A, B, f: GeneratorFunction, eps: float) -> DivergenceResult:
    """``S_f(A || B + eps I)``; finite whenever ``f`` is finite on ``(0, inf)``."""
    if not eps > 0:
        raise ParameterError("eps must be positive")
    A, B = _pair(A, B)
    r = divergence_spectral(A, B + eps * np.eye(B.shape[0]), f)
    return DivergenceResult(r.value, "epsilon_limit", False)


@dataclass
class LimitReport:
    schedule: tuple
    values: list[float]
    verdict: str  # "finite" or "inf"
    extrapolated: float | None = None
    method: str = ""
    notes: list[str] = field(default_factory=list)


LIMIT_INF_LEVEL = 1e12
LIMIT_GROWTH = 0.01
DIVERGENT_RATIO = 0.9
GROWTH_FLOOR = 1e-9
MAX_SHANKS_ORDER = 2


def check_schedule(schedule) -> tuple:
    s = tuple(float(e) for e in schedule)
    if len(s) < 3:
        raise ParameterError("epsilon schedule needs at least 3 entries")
    if any(e <= 0 for e in s) or any(y >= x for x, y in zip(s, s[1:])):
        raise ParameterError("epsilon schedule must be positive and strictly decreasing")
    return s


def shanks(values, order: int) -> float:
    """Order-``order`` Shanks transform of the last ``2 * order + 1`` values,
    computed with Wynn's epsilon recursion."""
    cur = list(values[len(values) - (2 * order + 1):])
    prev = [0.0] * (len(cur) + 1)
    for _ in range(2 * order):
        nxt = [prev[i + 1] + 1.0 / (cur[i + 1] - cur[i]) for i in range(len(cur) - 1)]
        prev, cur = cur, nxt
    return cur[0]


def _extrapolate(values):
    """Pick the Shanks order whose estimate moves least when the window is
    shifted back by one; order 0 is the last value itself."""
    best = (abs(values[-1] - values[-2]), values[-1], 0)
    for order in range(1, MAX_SHANKS_ORDER + 1):
        if len(values) < 2 * order + 2:
            break
        try:
            est = shanks(values, order)
            est_prev = shanks(values[:-1], order)
        except ZeroDivisionError:
            continue
        if not (math.isfinite(est) and math.isfinite(est_prev)):
            continue
        err = abs(est - est_prev)
        if err < best[0]:
            best = (err, est, order)
    return best


def divergence_limit(A, B, f: GeneratorFunction, schedule=DEFAULT_SCHEDULE):
    """Evaluate ``S_f(A || B + eps I)`` along ``schedule`` and extrapolate.

    The sequence is declared divergent when it exceeds ``1e12`` while still
    growing by more than 1% per step, or when its last increment is
    non-negligible and did not contract (ratio >= 0.9 to the previous one):
    logarithmic and power-law blow-ups both look like that.

    Otherwise the limit is extrapolated.  Tails such as ``sqrt(eps)`` from the
    kernel of ``B`` mixed with ``O(eps)`` from its support converge too slowly
    for the last value to be used directly, so Shanks transforms of order
    1 (Aitken) and 2 are tried and the most self-consistent one is kept.
    """
    schedule = check_schedule(schedule)
    A, B = _pair(A, B)
    values = [float(divergence_epsilon(A, B, f, eps).value) for eps in schedule]
    s0, s1, s2 = values[-3:]
    d1, d2 = s1 - s0, s2 - s1
    scale = max(1.0, abs(s2))
    report = LimitReport(schedule, values, "finite")

    blown_up = s2 > LIMIT_INF_LEVEL and d2 > LIMIT_GROWTH * abs(s1)
    not_contracting = d2 > GROWTH_FLOOR * scale and d1 > 0 and d2 >= DIVERGENT_RATIO * d1
    if blown_up or not_contracting:
        report.verdict = "inf"
        report.method = "blow-up" if blown_up else "non-contracting growth"
        return DivergenceResult(INF, "epsilon_limit", True), report

    err, limit, order = _extrapolate(values)
    report.extrapolated = limit
    report.method = "last value" if order == 0 else f"shanks order {order}"
    report.notes.append(f"shift error estimate {err:.3g}")
    violated = not linalg.support_contained(A, B, SUPPORT_TOL)
    return DivergenceResult(ExtendedReal(limit), "epsilon_limit", violated), report


# -- closed forms ------------------------------------------------------------


def _tr(M) -> float:
    return float(np.trace(M).real)


def umegaki(A, B) -> ExtendedReal:
    """``tr A (log A - log B)`` on ``supp A``; ``+inf`` if ``supp A`` is not
    contained in ``supp B``."""
    A, B = _pair(A, B)
    if not linalg.support_contained(A, B, SUPPORT_TOL):
        return INF
    log_A = linalg.matrix_function(A, math.log, on_support=True)
    log_B = linalg.matrix_function(B, math.log, on_support=True)
    return ExtendedReal(_tr(A @ log_A) - _tr(A @ log_B))


def tsallis_closed(A, B, q: float) -> ExtendedReal:
    """``tr(A^q B^(1-q) - A) / (q - 1)`` with ``B^(1-q)`` taken on ``supp B``.

    ``+inf`` when ``q > 1`` and the support condition fails; for ``q < 1`` the
    value stays finite.
    """
    q = float(q)
    if q <= 0.0 or q == 1.0:
        raise ParameterError(f"Tsallis parameter must satisfy q > 0 and q != 1, got {q}")
    A, B = _pair(A, B)
    if q > 1.0 and not linalg.support_contained(A, B, SUPPORT_TOL):
        return INF
    A_q = linalg.matrix_function(A, lambda x: x**q, on_support=True)
    B_1q = linalg.matrix_function(B, lambda x: x ** (1.0 - q), on_support=True)
    return ExtendedReal((_tr(A_q @ B_1q) - _tr(A)) / (q - 1.0))


def hellinger_sq(A, B) -> float:
    """``||sqrt(A) - sqrt(B)||_HS^2``; eigenvalues under the zero threshold
    count as 0."""
    A, B = _pair(A, B)
    D = linalg.matrix_function(A, math.sqrt, on_support=True) - linalg.matrix_function(B, math.sqrt, on_support=True)
    return linalg.hs_norm(D) ** 2


# -- identities ----------------------------------------------------------------


def trace_rule(A, lam: float, f: GeneratorFunction):
    """``(S_f(lam A || A), f(lam) tr A)``; the two agree for every ``lam >= 0``."""
    if lam < 0:
        raise ParameterError("lambda must be nonnegative")
    A = np.asarray(A, dtype=complex)
    lhs = divergence_spectral(lam * A, A, f).value
    rhs = ExtendedReal(f(lam) * _tr(A))
    return lhs, rhs


def boundary_values(A, B, f: GeneratorFunction):
    """``(S_f(A || 0), S_f(0 || B)) = (omega_f tr A, f(0) tr B)``."""
    return f.omega * max(_tr(A), 0.0), ExtendedReal(f.value_at_zero * _tr(B))


def homogeneity(A, B, lam: float, f: GeneratorFunction):
    """``(S_f(lam A || lam B), lam S_f(A || B))``."""
    A, B = _pair(A, B)
    return divergence_spectral(lam * A, lam * B, f).value, divergence_spectral(A, B, f).value * lam


def affine_rule(A, B, alpha: float, beta: float):
    """For ``f(x) = alpha x + beta``: ``(S_f(A || B), alpha tr A + beta tr B)``."""
    A, B = _pair(A, B)
    return divergence_spectral(A, B, make_affine(alpha, beta)).value, ExtendedReal(alpha * _tr(A) + beta * _tr(B))


def triangle_at_zero(A, B, f: GeneratorFunction):
    """``(S_f(A || B), S_f(A || 0) + S_f(0 || B))``; the first never exceeds
    the second when ``f(1) = 0`` and ``inf f = 0``."""
    s_a0, s_0b = boundary_values(A, B, f)
    return divergence_spectral(A, B, f).value, s_a0 + s_0b


def superadditivity(X, lam: float, mu: float, f: GeneratorFunction):
    """Return ``(lhs, rhs, margin)`` with

    ``lhs = S_f(lam mu X || lam X) + S_f(lam X || X)``,
    ``rhs = S_f(lam mu X || X)`` and
    ``margin = tr X (f(lam mu) - lam f(mu) - f(lam))``.
    """
    X = np.asarray(X, dtype=complex)
    lhs = divergence_spectral(lam * mu * X, lam * X, f).value + divergence_spectral(lam * X, X, f).value
    rhs = divergence_spectral(lam * mu * X, X, f).value
    margin = _tr(X) * (f(lam * mu) - lam * f(mu) - f(lam))
    return lhs, rhs, margin
