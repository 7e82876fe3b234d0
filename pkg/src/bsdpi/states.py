"""Density matrices, random ensembles, support handling and serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import BadRank, DimMismatch, ParseError, SupportMismatch
from .linalg import (
    CLIP_TOL,
    RANK_TOL,
    RSQRT_ON_SUPPORT,
    STEP_ON_SUPPORT,
    herm_eig,
    matrix_fn,
    schatten_norm,
)

# Weight of rho outside the support of sigma tolerated by gamma().
SUPPORT_LEAK_TOL = 1e-8
TRACE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian PSD unit-trace matrix with its numerical rank."""

    mat: np.ndarray
    dim: int
    rank: int

    @classmethod
    def from_matrix(cls, mat, *, trace_tol: float = TRACE_TOL) -> "DensityMatrix":
        mat = np.asarray(mat, dtype=complex)
        eig = herm_eig(mat)  # raises NotHermitian / DimMismatch
        tr = float(np.trace(mat).real)
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace {tr!r} is not 1 within {trace_tol}")
        w = eig.values
        lam_max = max(float(w[-1]), 0.0)
        if float(w[0]) < -CLIP_TOL * max(lam_max, 1.0):
            raise ValueError(f"matrix is not PSD: smallest eigenvalue {w[0]!r}")
        rank = int(np.count_nonzero(w > RANK_TOL * lam_max))
        return cls(mat=mat, dim=mat.shape[0], rank=rank)

    @property
    def is_full_rank(self) -> bool:
        return self.rank == self.dim


@dataclass(frozen=True, eq=False)
class GammaOperator:
    """The PSD ratio operator sigma^{-1/2} rho sigma^{-1/2} and its sup norm."""

    mat: np.ndarray
    sup_norm: float


def as_matrix(x) -> np.ndarray:
    """Accept a DensityMatrix or a plain (possibly unnormalized) PSD array."""
    if isinstance(x, DensityMatrix):
        return x.mat
    return np.asarray(x, dtype=complex)


def random_density(dim: int, rank: int, seed: int) -> DensityMatrix:
    """Ginibre-induced random state G G* / tr[G G*] with G of shape (dim, rank).

    The stream is the counter-based Philox generator keyed by ``seed``; the
    real part of G is drawn first, then the imaginary part, each as a single
    standard-normal block.  Fixed seeds give bit-identical states.
    """
    if not 1 <= rank <= dim:
        raise BadRank(f"rank {rank} outside [1, {dim}]")
    rng = np.random.Generator(np.random.Philox(seed))
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    m = m / float(np.trace(m).real)
    m = 0.5 * (m + m.conj().T)
    w = herm_eig(m).values
    num_rank = int(np.count_nonzero(w > RANK_TOL * max(float(w[-1]), 0.0)))
    return DensityMatrix(mat=m, dim=dim, rank=num_rank)


def regularize(rho, eps: float) -> DensityMatrix:
    """Full-rank surrogate (rho + eps I) / (1 + eps d); trace is preserved."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    m = as_matrix(rho)
    d = m.shape[0]
    out = (m + eps * np.eye(d)) / (1.0 + eps * d)
    return DensityMatrix(mat=out, dim=d, rank=d)


def support_projector(rho) -> np.ndarray:
    """Orthogonal projector onto eigenspaces with lambda >= RANK_TOL * lambda_max."""
    return matrix_fn(as_matrix(rho), STEP_ON_SUPPORT)


def numerical_rank(m) -> int:
    """Number of eigenvalues above RANK_TOL * lambda_max."""
    w = herm_eig(as_matrix(m)).values
    return int(np.count_nonzero(w > RANK_TOL * max(float(w[-1]), 0.0)))


def gamma(sigma, rho) -> GammaOperator:
    """sigma^{-1/2} rho sigma^{-1/2} with Moore-Penrose inverses on singular sigma.

    Requires the support of rho to lie inside the support of sigma: the leaked
    weight ||(I - P) rho (I - P)||_inf must not exceed SUPPORT_LEAK_TOL.
    """
    s = as_matrix(sigma)
    r = as_matrix(rho)
    if s.shape != r.shape:
        raise DimMismatch(f"shape mismatch {s.shape} vs {r.shape}")
    p = support_projector(s)
    comp = np.eye(s.shape[0]) - p
    leak = schatten_norm(comp @ r @ comp, np.inf)
    if leak > SUPPORT_LEAK_TOL:
        raise SupportMismatch(
            f"rho has weight {leak:.3e} outside the support of sigma"
        )
    rs = matrix_fn(s, RSQRT_ON_SUPPORT)
    g = rs @ r @ rs
    g = 0.5 * (g + g.conj().T)
    w = herm_eig(g).values
    return GammaOperator(mat=g, sup_norm=float(max(w[-1], 0.0)))


def matrix_to_entries(m: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(m).ravel()]


def entries_to_matrix(entries, rows: int, cols: int) -> np.ndarray:
    if len(entries) != rows * cols:
        raise ParseError(f"expected {rows * cols} entries, got {len(entries)}")
    flat = np.empty(rows * cols, dtype=complex)
    for i, pair in enumerate(entries):
        if len(pair) != 2:
            raise ParseError(f"entry {i} is not an [re, im] pair")
        flat[i] = float(pair[0]) + 1j * float(pair[1])
    return flat.reshape(rows, cols)


def state_to_json(m) -> str:
    m = as_matrix(m)
    return json.dumps({"dim": m.shape[0], "entries": matrix_to_entries(m)})


def state_from_json(text: str) -> np.ndarray:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(obj, dict) or "dim" not in obj or "entries" not in obj:
        raise ParseError("state JSON must be an object with 'dim' and 'entries'")
    dim = int(obj["dim"])
    return entries_to_matrix(obj["entries"], dim, dim)


def save_state(path: str, m) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(state_to_json(m))


def load_state(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return state_from_json(fh.read())
