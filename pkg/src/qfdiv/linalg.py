"""Hermitian and PSD matrix algebra on C^n.

Operators are plain ``numpy`` arrays of dtype ``complex128``.  The helpers
here validate and normalize them (``as_hermitian``, ``as_psd``) and provide
the eigensolver every other module builds on.

Eigendecomposition uses cyclic complex Jacobi rotations.  Each rotation
first removes the phase of the pivot ``a_pq`` with a diagonal unitary and
then applies a real symmetric Jacobi rotation, so the accumulated
transformation stays exactly unitary up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
    HermiticityError,
    NotPsdError,
)

HERMITIAN_ATOL = 1e-12
PSD_EPS = 1e-10
ZERO_TOL = 1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


def _as_square(M) -> np.ndarray:
    a = np.asarray(M, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_hermitian(M, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Validate ``M = M^*`` entrywise within ``atol`` and return the exact
    symmetrization ``(M + M^*) / 2``."""
    a = _as_square(M)
    dev = np.max(np.abs(a - a.conj().T))
    if dev > atol:
        raise HermiticityError(f"matrix is not Hermitian: max |M - M^*| = {dev:.3e} > {atol:g}")
    return 0.5 * (a + a.conj().T)


def _check_same_dim(X: np.ndarray, Y: np.ndarray) -> None:
    if X.shape != Y.shape:
        raise DimensionError(f"dimension mismatch: {X.shape} vs {Y.shape}")


def zero_threshold(eigenvalues) -> float:
    """Eigenvalues at or below this value are treated as exactly zero."""
    lam = np.asarray(eigenvalues, dtype=float)
    lam_max = float(np.max(np.abs(lam))) if lam.size else 0.0
    return ZERO_TOL * max(lam_max, 1.0)


@dataclass(frozen=True)
class SpectralDecomposition:
    """``A = sum_i eigenvalues[i] * v_i v_i^*`` with ``v_i = eigenvectors[:, i]``.

    Eigenvalues are sorted in descending order.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    unit_tol: float = 1e-10

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T

    def orthonormality_residual(self) -> float:
        V = self.eigenvectors
        return float(np.max(np.abs(V.conj().T @ V - np.eye(self.dim))))


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def eig_hermitian(A) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Sweeps continue until the off-diagonal Frobenius mass drops below
    ``1e-13 * ||A||_HS``; after 100 sweeps a :class:`ConvergenceError`
    carrying the residual is raised.
    """
    a = as_hermitian(A).copy()
    n = a.shape[0]
    V = np.eye(n, dtype=complex)
    target = JACOBI_TOL * float(np.linalg.norm(a))

    off = _offdiag_norm(a)
    sweeps = 0
    while off > target:
        if sweeps == JACOBI_MAX_SWEEPS:
            raise ConvergenceError(
                f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps "
                f"(off-diagonal norm {off:.3e})",
                residual=off,
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                G = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ G
                a[idx, :] = G.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                V[:, idx] = V[:, idx] @ G
        sweeps += 1
        off = _offdiag_norm(a)

    w = np.diag(a).real.copy()
    order = np.argsort(-w, kind="stable")
    return SpectralDecomposition(w[order], V[:, order].copy())


def psd_eigh(A, eps: float = PSD_EPS) -> SpectralDecomposition:
    """Eigendecomposition of a PSD operator with small negative eigenvalues
    clamped to zero.

    Eigenvalues below ``-eps * max(|lambda|_max, 1)`` raise :class:`NotPsdError`.
    """
    d = eig_hermitian(A)
    w = d.eigenvalues
    lam_max = max(float(np.max(np.abs(w))), 1.0)
    lowest = float(w[-1])
    if lowest < -eps * lam_max:
        raise NotPsdError(f"operator is not PSD: eigenvalue {lowest:.6e}", eigenvalue=lowest)
    if lowest < 0.0:
        w = np.where(w < 0.0, 0.0, w)
        d = SpectralDecomposition(w, d.eigenvectors, d.unit_tol)
    return d


def as_psd(A, eps: float = PSD_EPS) -> np.ndarray:
    """Validate that ``A`` is PSD, returning the Hermitian-symmetrized matrix.

    If clamping was needed the matrix is rebuilt from the clamped spectrum.
    """
    a = as_hermitian(A)
    d = eig_hermitian(a)
    if d.eigenvalues[-1] < 0.0:
        return psd_eigh(a, eps).reconstruct()
    return a


def hs_inner(X, Y) -> complex:
    """Hilbert-Schmidt inner product ``tr X Y^*``."""
    x, y = _as_square(X), _as_square(Y)
    _check_same_dim(x, y)
    return complex(np.vdot(y, x))


def hs_norm(X) -> float:
    return float(np.linalg.norm(np.asarray(X)))


def support_projection(A, tol: float = ZERO_TOL) -> np.ndarray:
    """Range projection of a PSD operator.

    Keeps eigenvectors whose eigenvalue exceeds ``tol * max(lambda_max, 1)``.
    """
    d = psd_eigh(A)
    lam_max = float(np.max(np.abs(d.eigenvalues)))
    keep = d.eigenvalues > tol * max(lam_max, 1.0)
    V = d.eigenvectors[:, keep]
    return V @ V.conj().T


def support_contained(A, B, tol: float = 1e-8) -> bool:
    """True iff ``||(I - supp B) supp A||_HS <= tol``."""
    a, b = _as_square(A), _as_square(B)
    _check_same_dim(a, b)
    PA = support_projection(a)
    PB = support_projection(b)
    n = a.shape[0]
    return hs_norm((np.eye(n) - PB) @ PA) <= tol


def is_projection(P, tol: float = 1e-9) -> bool:
    p = np.asarray(P, dtype=complex)
    return hs_norm(p @ p - p) <= tol and hs_norm(p - p.conj().T) <= tol


@dataclass(frozen=True)
class OverlapTable:
    """All rank-one overlaps ``w[i, j] = |<u_i, v_j>|^2`` between two
    eigenbases, alongside the matching eigenvalues."""

    a: np.ndarray
    b: np.ndarray
    weights: np.ndarray

    def triples(self):
        for i, ai in enumerate(self.a):
            for j, bj in enumerate(self.b):
                yield float(ai), float(bj), float(self.weights[i, j])

    def row_sums(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def projection_overlap(self, a_value: float, b_value: float, atol: float = 1e-12) -> float:
        """``tr P_a Q_b`` by summing the weights of the matching index groups."""
        rows = np.abs(self.a - a_value) <= atol
        cols = np.abs(self.b - b_value) <= atol
        return float(self.weights[np.ix_(rows, cols)].sum())


def overlap_table(dA: SpectralDecomposition, dB: SpectralDecomposition) -> OverlapTable:
    if dA.dim != dB.dim:
        raise DimensionError(f"dimension mismatch: {dA.dim} vs {dB.dim}")
    G = dA.eigenvectors.conj().T @ dB.eigenvectors
    return OverlapTable(dA.eigenvalues.copy(), dB.eigenvalues.copy(), np.abs(G) ** 2)


def matrix_function(A, g: Callable[[float], float], on_support: bool = False) -> np.ndarray:
    """Standard operator function ``sum_i g(lambda_i) v_i v_i^*`` of a PSD ``A``.

    With ``on_support=True`` eigenvalues below the zero threshold are mapped
    to 0 instead of ``g(0)`` (the support-restricted function, used for
    ``log B`` and negative powers).
    """
    d = psd_eigh(A)
    thr = zero_threshold(d.eigenvalues)
    values = np.empty(d.dim)
    with np.errstate(all="ignore"):
        for i, lam in enumerate(d.eigenvalues):
            lam = float(lam)
            if on_support and lam <= thr:
                values[i] = 0.0
                continue
            try:
                v = float(g(lam))
            except (ValueError, ZeroDivisionError, OverflowError) as exc:
                raise DomainError(f"function undefined at eigenvalue {lam!r}: {exc}", eigenvalue=lam) from exc
            if not math.isfinite(v):
                raise DomainError(f"function undefined at eigenvalue {lam!r} (got {v})", eigenvalue=lam)
            values[i] = v
    V = d.eigenvectors
    return (V * values) @ V.conj().T


# -- seeded sampling -------------------------------------------------------
#
# Every random object is drawn from a numpy Generator.  Sweeps derive the
# generator for trial k from (seed, k) with numpy's SeedSequence spawn keys,
# so trial outcomes do not depend on the order trials are run in.


def mix_seed(seed: int, k: int) -> int:
    """64-bit child seed for trial ``k`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(k),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def trial_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(k),)))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with the
    phases of ``diag(R)`` moved into ``Q``."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    Z = _complex_gaussian(_rng(seed), (dim, dim))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_psd(dim: int, rank: int | None = None, trace_target: float | None = None, seed=None) -> np.ndarray:
    """Random PSD operator ``G G^*`` with ``G`` a complex Gaussian
    ``dim x rank`` matrix, optionally rescaled to a given trace."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must satisfy 1 <= rank <= dim, got rank={rank}, dim={dim}")
    if trace_target is not None and trace_target <= 0:
        raise ValueError("trace_target must be positive")
    G = _complex_gaussian(_rng(seed), (dim, rank))
    A = G @ G.conj().T
    A = 0.5 * (A + A.conj().T)
    if trace_target is not None:
        A *= trace_target / np.trace(A).real
    return A


def random_psd_spectrum(dim: int, rank: int | None = None, low: float = 0.1, high: float = 1.0, seed=None) -> np.ndarray:
    """Random PSD operator ``V diag(lambda) V^*`` with Haar ``V`` and the
    ``rank`` nonzero eigenvalues drawn uniformly from ``[low, high]``.

    Keeps the nonzero spectrum bounded away from zero, which the
    epsilon-limit route needs to resolve ``B + eps I``.
    """
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must satisfy 1 <= rank <= dim, got rank={rank}, dim={dim}")
    if not 0 < low <= high:
        raise ValueError("need 0 < low <= high")
    rng = _rng(seed)
    lam = np.zeros(dim)
    lam[:rank] = rng.uniform(low, high, rank)
    V = random_unitary(dim, rng)
    A = (V * lam) @ V.conj().T
    return 0.5 * (A + A.conj().T)


def random_rank_one_projection(dim: int, seed=None) -> np.ndarray:
    v = _complex_gaussian(_rng(seed), dim)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())
