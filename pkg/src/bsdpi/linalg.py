"""Dense complex linear algebra.

Hermitian eigendecomposition, spectral matrix functions, Moore-Penrose
pseudo-inverses, Schatten norms, the Hilbert-Schmidt inner product, and an
adaptive quadrature helper.  Everything operates on plain numpy arrays and is
pure: no input is mutated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimMismatch, DomainViolation, NoConvergence, NotHermitian

# Numerical-rank threshold, relative to the largest eigenvalue.
RANK_TOL = 1e-10
# Negative eigenvalues inside (-CLIP_TOL * lambda_max, 0) are rounding noise
# on PSD matrices and are clipped to zero before PSD-only functions.
CLIP_TOL = 1e-12
HERMITICITY_TOL = 1e-10

# Self-test hook: a nonzero value perturbs every eigenvalue returned by
# herm_eig so downstream invariants must fail.  Never set in library code.
_EIG_CORRUPTION = 0.0


def set_eig_corruption(scale: float) -> None:
    """Install (or clear, with 0.0) the eigensolver corruption used by selftest."""
    global _EIG_CORRUPTION
    _EIG_CORRUPTION = float(scale)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def herm_eig(a: np.ndarray) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix.

    Raises NotHermitian when ``a`` deviates from its adjoint by more than
    ``HERMITICITY_TOL * max(1, ||a||_2)`` in Frobenius norm, and NoConvergence
    if the underlying solver fails.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.linalg.norm(a)))
    if float(np.linalg.norm(a - a.conj().T)) > HERMITICITY_TOL * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    try:
        values, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(str(exc)) from exc
    if _EIG_CORRUPTION:
        values = values + _EIG_CORRUPTION * max(1.0, float(np.abs(values).max()))
    return EigenSystem(values=values, vectors=vectors)


@dataclass(frozen=True)
class ScalarFunction:
    """A real scalar function together with its admissible open domain.

    ``at_zero`` declares a finite limit at 0+, making (clipped) zero
    eigenvalues admissible.  ``support_tol`` additionally maps every
    eigenvalue below ``support_tol * lambda_max`` to ``at_zero``, which is the
    Moore-Penrose-style restriction of the function to the support.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    lo: float = -np.inf
    hi: float = np.inf
    at_zero: float | None = None
    support_tol: float | None = None

    def __call__(self, x):
        return self.fn(x)


IDENTITY = ScalarFunction(lambda x: x)
SQUARE = ScalarFunction(np.square)
EXP = ScalarFunction(np.exp)
SQRT = ScalarFunction(np.sqrt, lo=0.0, at_zero=0.0)
LOG = ScalarFunction(np.log, lo=0.0)
LOG_ON_SUPPORT = ScalarFunction(np.log, lo=0.0, at_zero=0.0, support_tol=RANK_TOL)
RECIP_ON_SUPPORT = ScalarFunction(
    lambda x: 1.0 / x, lo=0.0, at_zero=0.0, support_tol=RANK_TOL
)
RSQRT_ON_SUPPORT = ScalarFunction(
    lambda x: 1.0 / np.sqrt(x), lo=0.0, at_zero=0.0, support_tol=RANK_TOL
)
STEP_ON_SUPPORT = ScalarFunction(
    lambda x: np.ones_like(x), lo=0.0, at_zero=0.0, support_tol=RANK_TOL
)


def matrix_fn(a: np.ndarray, f: ScalarFunction | Callable) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum.

    Returns ``U diag(f(lambda_i)) U*``; the output is hermitized.  Eigenvalues
    outside the (clipped) domain of ``f`` raise DomainViolation.
    """
    if not isinstance(f, ScalarFunction):
        f = ScalarFunction(f)
    eig = herm_eig(a)
    lam = eig.values.copy()
    lam_max = max(float(lam[-1]), 0.0)
    if f.lo >= 0.0:
        clip = CLIP_TOL * max(lam_max, 1.0)
        lam[(lam < 0.0) & (lam > -clip)] = 0.0
    if f.support_tol is not None:
        zero = lam <= f.support_tol * lam_max
    else:
        zero = lam == 0.0
    if f.at_zero is None:
        zero = np.zeros_like(zero)
    live = ~zero
    if np.any(lam[live] <= f.lo) or np.any(lam[live] >= f.hi):
        raise DomainViolation(
            f"eigenvalues escape the domain ({f.lo}, {f.hi}) of the scalar function"
        )
    vals = np.empty(lam.shape, dtype=float)
    if zero.any():
        vals[zero] = f.at_zero
    if live.any():
        vals[live] = np.asarray(f.fn(lam[live]), dtype=float)
    out = (eig.vectors * vals) @ eig.vectors.conj().T
    return 0.5 * (out + out.conj().T)


def pinv(a: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Moore-Penrose inverse of a Hermitian PSD matrix.

    Eigenvalues below ``rank_tol * lambda_max`` map to 0, the rest to their
    reciprocal.  The zero matrix maps to itself.
    """
    f = ScalarFunction(lambda x: 1.0 / x, lo=0.0, at_zero=0.0, support_tol=rank_tol)
    return matrix_fn(a, f)


def schatten_norm(a: np.ndarray, p) -> float:
    """Schatten p-norm for p in {1, 2, inf}, via the spectrum of A*A."""
    a = np.asarray(a, dtype=complex)
    w = herm_eig(a.conj().T @ a).values
    w = np.clip(w, 0.0, None)
    if p == 1:
        return float(np.sqrt(w).sum())
    if p == 2:
        return float(np.sqrt(w.sum()))
    if p == np.inf:
        return float(np.sqrt(w[-1])) if w.size else 0.0
    raise ValueError("p must be 1, 2 or inf")


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product tr[A* B]."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def integrate_adaptive(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    max_panels: int = 200_000,
) -> float:
    """Adaptive Simpson quadrature with absolute-error target ``tol``.

    Raises NoConvergence when the panel budget is exhausted or the integrand
    is not finite at the initial nodes.
    """
    lo, hi = float(lo), float(hi)
    if hi == lo:
        return 0.0
    if hi < lo:
        return -integrate_adaptive(g, hi, lo, tol, max_panels)

    def simp(fa, fm, fb, width):
        return width * (fa + 4.0 * fm + fb) / 6.0

    mid = 0.5 * (lo + hi)
    fa, fm, fb = g(lo), g(mid), g(hi)
    if not np.all(np.isfinite([fa, fm, fb])):
        raise NoConvergence("integrand is not finite on the interval")
    stack = [(lo, hi, fa, fm, fb, simp(fa, fm, fb, hi - lo), tol)]
    total = 0.0
    panels = 0
    min_width = 1e-14 * max(1.0, abs(hi - lo))
    while stack:
        a, b, fa, fm, fb, whole, eps = stack.pop()
        panels += 1
        if panels > max_panels:
            raise NoConvergence("panel budget exceeded")
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = g(lm), g(rm)
        left = simp(fa, flm, fm, m - a)
        right = simp(fm, frm, fb, b - m)
        delta = left + right - whole
        if abs(delta) <= 15.0 * eps or (b - a) <= min_width:
            total += left + right + delta / 15.0
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * eps))
            stack.append((m, b, fm, frm, fb, right, 0.5 * eps))
    return total
