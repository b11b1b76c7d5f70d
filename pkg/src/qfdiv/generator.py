"""Generator functions ``f: [0, inf) -> R`` for quantum f-divergences.

A :class:`GeneratorFunction` bundles the scalar function with its value at
zero and its asymptotic slope ``omega = lim f(x)/x`` (possibly ``+inf``).
Built-ins carry analytic slopes; custom generators get an estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ParameterError
from .extreal import INF, ExtendedReal

_EPS = np.finfo(float).eps

#: {0} together with 61 log-spaced points from 1e-3 to 1e3.
DEFAULT_GRID = tuple([0.0] + list(np.logspace(-3, 3, 61)))

OMEGA_EXPONENTS = range(10, 41)
OMEGA_INF_LEVEL = 1e12
OMEGA_GROWTH_TOL = 1e-6
OMEGA_MONOTONE_TOL = 1e-9


@dataclass(frozen=True)
class GeneratorFunction:
    name: str
    func: Callable[[float], float] = field(repr=False)
    value_at_zero: float
    omega: ExtendedReal
    analytic_omega: bool = True
    strictly_convex: bool | None = None
    params: dict = field(default_factory=dict)

    def __call__(self, x: float) -> float:
        x = float(x)
        if x == 0.0:
            return self.value_at_zero
        return float(self.func(x))

    eval = __call__

    @property
    def label(self) -> str:
        return self.name

    def describe(self) -> dict:
        return {"name": self.name, **self.params}


def make_entropy() -> GeneratorFunction:
    return GeneratorFunction(
        name="entropy",
        func=lambda x: x * math.log(x),
        value_at_zero=0.0,
        omega=INF,
        strictly_convex=True,
    )


def make_tsallis(q: float) -> GeneratorFunction:
    """``f_q(x) = (x^q - x) / (q - 1)`` for ``q > 0, q != 1``."""
    q = float(q)
    if not math.isfinite(q) or q <= 0.0 or q == 1.0:
        raise ParameterError(f"Tsallis parameter must satisfy q > 0 and q != 1, got {q}")
    omega = INF if q > 1.0 else ExtendedReal(1.0 / (1.0 - q))
    return GeneratorFunction(
        name=f"tsallis:{q:g}",
        func=lambda x: (x**q - x) / (q - 1.0),
        value_at_zero=0.0,
        omega=omega,
        strictly_convex=True,
        params={"q": q},
    )


def make_sqrt_deviation() -> GeneratorFunction:
    """``f(x) = (sqrt(x) - 1)^2``; its divergence is ``||sqrt A - sqrt B||_HS^2``."""
    return GeneratorFunction(
        name="sqrt-dev",
        func=lambda x: (math.sqrt(x) - 1.0) ** 2,
        value_at_zero=1.0,
        omega=ExtendedReal(1.0),
        strictly_convex=True,
    )


def make_affine(alpha: float, beta: float) -> GeneratorFunction:
    alpha, beta = float(alpha), float(beta)
    return GeneratorFunction(
        name=f"affine:{alpha:g}:{beta:g}",
        func=lambda x: alpha * x + beta,
        value_at_zero=beta,
        omega=ExtendedReal(alpha),
        strictly_convex=False,
        params={"alpha": alpha, "beta": beta},
    )


def make_exp_decay() -> GeneratorFunction:
    """``f(x) = e^(1-x) - 1``: strictly decreasing, strictly convex, ``f(1) = 0``."""
    return GeneratorFunction(
        name="exp-dec",
        func=lambda x: math.exp(1.0 - x) - 1.0,
        value_at_zero=math.e - 1.0,
        omega=ExtendedReal(0.0),
        strictly_convex=True,
    )


def make_custom(
    eval: Callable[[float], float],
    value_at_zero: float,
    omega: ExtendedReal | float | None = None,
    name: str = "custom",
) -> GeneratorFunction:
    """Wrap an arbitrary scalar function.

    ``eval`` is only consulted for ``x > 0``; ``value_at_zero`` is used at 0,
    which allows generators that jump at the origin.  When ``omega`` is not
    given it is estimated with :func:`estimate_omega`.
    """
    value_at_zero = float(value_at_zero)
    if not math.isfinite(value_at_zero):
        raise ParameterError("value_at_zero must be finite")
    for x in DEFAULT_GRID[1:]:
        try:
            v = float(eval(x))
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise ParameterError(f"generator failed at probe x={x:g}: {exc}") from exc
        if not math.isfinite(v):
            raise ParameterError(f"generator returned non-finite value {v} at probe x={x:g}")
    g = GeneratorFunction(
        name=name,
        func=eval,
        value_at_zero=value_at_zero,
        omega=ExtendedReal(0.0),
        analytic_omega=omega is not None,
    )
    est = ExtendedReal(omega) if omega is not None else estimate_omega(g)
    return GeneratorFunction(
        name=name,
        func=eval,
        value_at_zero=value_at_zero,
        omega=est,
        analytic_omega=omega is not None,
    )


def estimate_omega(f: Callable[[float], float]) -> ExtendedReal:
    """Estimate ``lim f(x)/x`` from the chords ``(f(x) - f(0)) / x`` at
    ``x = 2^10 ... 2^40``.

    The chord slope is nondecreasing for convex ``f``; a decrease beyond
    ``1e-9`` (relative) raises :class:`ParameterError`.  The limit is declared
    infinite if the slope passes ``1e12`` or still grows by more than
    ``1e-6`` (relative to ``max(1, |slope|)``) over the last doubling.
    """
    f0 = float(f(0.0))
    slopes = []
    for k in OMEGA_EXPONENTS:
        x = 2.0**k
        try:
            fx = float(f(x))
        except OverflowError:
            return INF
        if fx == math.inf:
            return INF
        if not math.isfinite(fx):
            raise ParameterError(f"generator returned {fx} at x=2^{k}")
        slopes.append((fx - f0) / x)

    for k, (prev, cur) in enumerate(zip(slopes, slopes[1:]), start=OMEGA_EXPONENTS.start):
        if cur < prev - OMEGA_MONOTONE_TOL * max(1.0, abs(prev)):
            raise ParameterError(
                f"not convex-like: chord slope decreases between x=2^{k} and 2^{k + 1} "
                f"({prev:.6g} -> {cur:.6g})"
            )
        if cur > OMEGA_INF_LEVEL:
            return INF
    last, prev = slopes[-1], slopes[-2]
    if last - prev > OMEGA_GROWTH_TOL * max(1.0, abs(prev)):
        return INF
    return ExtendedReal(last)


@dataclass
class ConvexityCertificate:
    passed: bool
    grid: tuple
    witness: tuple | None = None
    variable: int | None = None
    comparisons: int = 0
    unresolved_pairs: int = 0
    message: str = ""


RESOLUTION = 1e-12


def certify_strict_convexity(f: Callable[[float], float], grid=DEFAULT_GRID) -> ConvexityCertificate:
    """Grid check that ``h(a, b) = (f(a) - f(b)) / (a - b)`` strictly increases
    in each variable.

    Comparisons must clear a rounding bound.  Pairs whose function values
    agree to 1e-12 relative carry no slope information in double precision
    and are skipped; if more than half of all pairs are skipped the
    certificate fails.
    """
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise ParameterError("grid needs at least 3 points")
    if np.any(x < 0) or np.any(np.diff(x) <= 0):
        raise ParameterError("grid must be strictly increasing and inside [0, inf)")
    F = np.array([f(float(t)) for t in x], dtype=float)
    if not np.all(np.isfinite(F)):
        raise ParameterError("generator is not finite on the grid")

    n = x.size
    dx = x[:, None] - x[None, :]
    dF = F[:, None] - F[None, :]
    off = ~np.eye(n, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        H = np.where(off, dF / np.where(off, dx, 1.0), np.nan)
    mag = np.maximum(np.abs(F)[:, None], np.abs(F)[None, :])
    resolved = off & (np.abs(dF) > RESOLUTION * np.maximum(mag, 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        err = 4 * _EPS * (np.abs(F)[:, None] + np.abs(F)[None, :]) / np.abs(np.where(off, dx, 1.0))
        err = err + 4 * _EPS * np.abs(np.nan_to_num(H))

    unresolved = int((off & ~resolved).sum() // 2)
    total_pairs = n * (n - 1) // 2
    comparisons = 0
    for variable, (HH, EE, RR) in enumerate(((H.T, err.T, resolved.T), (H, err, resolved)), start=1):
        # row i of HH holds h(., x_i) (variable 1) or h(x_i, .) (variable 2)
        for i in range(n):
            idx = np.flatnonzero(RR[i])
            if idx.size < 2:
                continue
            h = HH[i, idx]
            e = EE[i, idx]
            gaps = np.diff(h) - (e[1:] + e[:-1])
            comparisons += gaps.size
            bad = np.flatnonzero(gaps <= 0)
            if bad.size:
                k = bad[0]
                witness = (float(x[i]), float(x[idx[k]]), float(x[idx[k + 1]]))
                return ConvexityCertificate(
                    False,
                    tuple(x.tolist()),
                    witness,
                    variable,
                    comparisons,
                    unresolved,
                    f"difference quotient not strictly increasing in variable {variable} "
                    f"at fixed {witness[0]:g} between {witness[1]:g} and {witness[2]:g}",
                )
    if unresolved * 2 > total_pairs:
        return ConvexityCertificate(
            False, tuple(x.tolist()), None, None, comparisons, unresolved,
            "function values indistinguishable on most of the grid",
        )
    return ConvexityCertificate(True, tuple(x.tolist()), None, None, comparisons, unresolved, "ok")


def is_strictly_decreasing(f: Callable[[float], float], grid=DEFAULT_GRID) -> bool:
    """Grid check for strict decrease, counting saturated float ties as ties
    only past the point where values stop resolving."""
    F = np.array([f(float(t)) for t in grid], dtype=float)
    d = np.diff(F)
    if np.any(d > 0):
        return False
    mag = np.maximum(np.abs(F[1:]), 1.0)
    strict = d < -RESOLUTION * mag
    # ties are only acceptable as a saturated tail
    if not strict[0]:
        return False
    first_tie = np.flatnonzero(~strict)
    return first_tie.size == 0 or bool(np.all(~strict[first_tie[0]:]))


@dataclass(frozen=True)
class Infimum:
    value: float
    argmin: float
    attained: bool


def estimate_infimum(f: Callable[[float], float], upper: float = 1e3) -> Infimum:
    """Infimum of a convex ``f`` over ``[0, upper]`` by bounded Brent search.

    ``attained`` is false when the minimizer sits at ``upper``, i.e. the
    infimum over ``[0, inf)`` is not located.
    """
    res = minimize_scalar(f, bounds=(0.0, upper), method="bounded", options={"xatol": 1e-12})
    x_star, k = float(res.x), float(res.fun)
    f0 = float(f(0.0))
    if f0 <= k:
        x_star, k = 0.0, f0
    grid = np.asarray(DEFAULT_GRID)
    values = np.array([f(float(t)) for t in grid])
    j = int(np.argmin(values))
    if values[j] < k:
        x_star, k = float(grid[j]), float(values[j])
    attained = x_star < upper * (1 - 1e-6)
    if 0.0 < x_star < 1e-8 and f0 > k:
        # approached only as x -> 0+, where f jumps up to f(0)
        attained = False
    return Infimum(k, x_star, attained)


BUILTIN_LABELS = ("entropy", "tsallis:<q>", "sqrt-dev", "affine:<alpha>:<beta>", "exp-dec")


def parse_generator(label: str) -> GeneratorFunction:
    """Build a generator from its CLI label (see ``BUILTIN_LABELS``)."""
    parts = label.strip().split(":")
    head, args = parts[0], parts[1:]
    try:
        if head == "entropy" and not args:
            return make_entropy()
        if head == "sqrt-dev" and not args:
            return make_sqrt_deviation()
        if head == "exp-dec" and not args:
            return make_exp_decay()
        if head == "tsallis" and len(args) == 1:
            return make_tsallis(float(args[0]))
        if head == "affine" and len(args) == 2:
            return make_affine(float(args[0]), float(args[1]))
    except ValueError as exc:
        raise ParameterError(f"bad generator label {label!r}: {exc}") from exc
    raise ParameterError(f"unknown generator {label!r}; known: {', '.join(BUILTIN_LABELS)}")
