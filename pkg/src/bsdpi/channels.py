"""Quantum channels as Kraus families, conditional expectations, Stinespring
isometries, and the contraction map used by the strengthened bounds."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimMismatch, InvalidChannel, ParseError, SingularState
from .linalg import RSQRT_ON_SUPPORT, SQRT, herm_eig, matrix_fn
from .states import as_matrix, entries_to_matrix, matrix_to_entries

TRACE_PRESERVATION_TOL = 1e-10
CHOI_PSD_TOL = 1e-10
PROJECTOR_TOL = 1e-10
ISOMETRY_TOL = 1e-10


def partial_trace_env(x: np.ndarray, d_keep: int, s: int) -> np.ndarray:
    """Trace out the trailing tensor factor of dimension s."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (d_keep * s, d_keep * s):
        raise DimMismatch(f"expected shape {(d_keep * s,) * 2}, got {x.shape}")
    return np.trace(x.reshape(d_keep, s, d_keep, s), axis1=1, axis2=3)


@dataclass(frozen=True, eq=False)
class StinespringIsometry:
    """Isometry V with T(w) = tr_env[V w V*]; environment dimension s."""

    v: np.ndarray
    d_in: int
    d_out: int
    s: int

    def __post_init__(self):
        vv = self.v.conj().T @ self.v
        if float(np.linalg.norm(vv - np.eye(self.d_in))) > ISOMETRY_TOL * max(
            1.0, self.d_in**0.5
        ):
            raise InvalidChannel("V*V deviates from the identity")

    def apply(self, omega: np.ndarray) -> np.ndarray:
        omega = np.asarray(omega, dtype=complex)
        if omega.shape != (self.d_in, self.d_in):
            raise DimMismatch(f"expected shape {(self.d_in,) * 2}, got {omega.shape}")
        return partial_trace_env(self.v @ omega @ self.v.conj().T, self.d_out, self.s)


class KrausChannel:
    """Completely positive trace-preserving map given by Kraus operators."""

    def __init__(self, kraus: Sequence[np.ndarray], *, validate: bool = True):
        ops = [np.asarray(k, dtype=complex) for k in kraus]
        if not ops:
            raise InvalidChannel("empty Kraus family")
        shape = ops[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ops):
            raise InvalidChannel("Kraus operators must share one 2-d shape")
        self.kraus = ops
        self.d_out, self.d_in = shape
        if validate:
            self.validate()

    def validate(self) -> None:
        acc = sum(k.conj().T @ k for k in self.kraus)
        scale = max(1.0, self.d_in**0.5)
        if float(np.linalg.norm(acc - np.eye(self.d_in))) > TRACE_PRESERVATION_TOL * scale:
            raise InvalidChannel("sum K*K deviates from the identity")
        w = herm_eig(self.choi()).values
        if float(w[0]) < -CHOI_PSD_TOL * max(1.0, float(w[-1])):
            raise InvalidChannel("Choi matrix is not PSD within tolerance")

    def choi(self) -> np.ndarray:
        """(Id otimes T) applied to the unnormalized maximally entangled state."""
        n = self.d_in * self.d_out
        c = np.zeros((n, n), dtype=complex)
        for k in self.kraus:
            v = k.T.reshape(-1)  # v[i*d_out + r] = K[r, i]
            c += np.outer(v, v.conj())
        return c

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(as_matrix(x), dtype=complex)
        if x.shape != (self.d_in, self.d_in):
            raise DimMismatch(f"expected shape {(self.d_in,) * 2}, got {x.shape}")
        return sum(k @ x @ k.conj().T for k in self.kraus)

    def adjoint_apply(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(as_matrix(y), dtype=complex)
        if y.shape != (self.d_out, self.d_out):
            raise DimMismatch(f"expected shape {(self.d_out,) * 2}, got {y.shape}")
        return sum(k.conj().T @ y @ k for k in self.kraus)

    def stinespring(self) -> StinespringIsometry:
        """V = sum_a K_a ⊗ e_a; the environment basis follows the Kraus order."""
        s = len(self.kraus)
        v = np.zeros((self.d_out * s, self.d_in), dtype=complex)
        for a, k in enumerate(self.kraus):
            e = np.zeros((s, 1), dtype=complex)
            e[a, 0] = 1.0
            v += np.kron(k, e)
        return StinespringIsometry(v=v, d_in=self.d_in, d_out=self.d_out, s=s)

    def to_json(self) -> str:
        return json.dumps(
            {
                "d_in": self.d_in,
                "d_out": self.d_out,
                "kraus": [matrix_to_entries(k) for k in self.kraus],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "KrausChannel":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(
                f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
        for key in ("d_in", "d_out", "kraus"):
            if not isinstance(obj, dict) or key not in obj:
                raise ParseError(f"channel JSON must carry '{key}'")
        d_in, d_out = int(obj["d_in"]), int(obj["d_out"])
        kraus = [entries_to_matrix(e, d_out, d_in) for e in obj["kraus"]]
        return cls(kraus)


def save_channel(path: str, channel: KrausChannel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(channel.to_json())


def load_channel(path: str) -> KrausChannel:
    with open(path, "r", encoding="utf-8") as fh:
        return KrausChannel.from_json(fh.read())


class ConditionalExpectation:
    """Trace-preserving idempotent projection onto a unital subalgebra."""

    dim: int

    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def as_kraus(self) -> KrausChannel:
        raise NotImplementedError


class Pinching(ConditionalExpectation):
    """X -> sum_k P_k X P_k for orthogonal projectors summing to the identity."""

    def __init__(self, projectors: Sequence[np.ndarray], *, validate: bool = True):
        self.projectors = [np.asarray(p, dtype=complex) for p in projectors]
        if not self.projectors:
            raise InvalidChannel("empty projector family")
        self.dim = self.projectors[0].shape[0]
        if validate:
            self.validate()

    def validate(self) -> None:
        for j, pj in enumerate(self.projectors):
            if pj.shape != (self.dim, self.dim):
                raise InvalidChannel("projectors must be square and equal sized")
            for k, pk in enumerate(self.projectors):
                target = pj if j == k else 0.0
                if float(np.linalg.norm(pj @ pk - target)) > PROJECTOR_TOL:
                    raise InvalidChannel("projectors are not mutually orthogonal")
        total = sum(self.projectors)
        if float(np.linalg.norm(total - np.eye(self.dim))) > PROJECTOR_TOL:
            raise InvalidChannel("projectors do not sum to the identity")

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(as_matrix(x), dtype=complex)
        if x.shape != (self.dim, self.dim):
            raise DimMismatch(f"expected shape {(self.dim,) * 2}, got {x.shape}")
        return sum(p @ x @ p for p in self.projectors)

    def as_kraus(self) -> KrausChannel:
        return KrausChannel(self.projectors)


class PartialTraceFactor(ConditionalExpectation):
    """X -> tr_env[X] ⊗ I/s on a d_keep * s dimensional space."""

    def __init__(self, d_keep: int, s: int):
        if d_keep < 1 or s < 1:
            raise InvalidChannel("factor dimensions must be positive")
        self.d_keep = d_keep
        self.s = s
        self.dim = d_keep * s

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(as_matrix(x), dtype=complex)
        reduced = partial_trace_env(x, self.d_keep, self.s)
        return np.kron(reduced, np.eye(self.s) / self.s)

    def as_kraus(self) -> KrausChannel:
        # K_{ij} = (I ⊗ |i><j|)/sqrt(s); their action equals apply() exactly.
        eye = np.eye(self.d_keep)
        ops = []
        for i in range(self.s):
            for j in range(self.s):
                e = np.zeros((self.s, self.s), dtype=complex)
                e[i, j] = 1.0
                ops.append(np.kron(eye, e) / np.sqrt(self.s))
        return KrausChannel(ops)


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel([np.eye(dim, dtype=complex)])


def depolarizing_channel(dim: int) -> KrausChannel:
    """X -> tr[X] I/dim."""
    ops = []
    for i in range(dim):
        for j in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = 1.0
            ops.append(e / np.sqrt(dim))
    return KrausChannel(ops)


def diagonal_pinching(dim: int) -> Pinching:
    projectors = []
    for k in range(dim):
        p = np.zeros((dim, dim), dtype=complex)
        p[k, k] = 1.0
        projectors.append(p)
    return Pinching(projectors)


def _haar_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r).copy()
    d[np.abs(d) < 1e-300] = 1.0
    return q * (d / np.abs(d)).conj()


def random_cptp(d_in: int, d_out: int, num_kraus: int, seed: int) -> KrausChannel:
    """Haar-induced CPTP map: QR-orthonormalized Gaussian isometry, Kraus
    operators read off the environment slices in index order."""
    if d_out * num_kraus < d_in:
        raise InvalidChannel("d_out * num_kraus must be at least d_in")
    rng = np.random.Generator(np.random.Philox(seed))
    v = _haar_isometry(d_out * num_kraus, d_in, rng)
    blocks = v.reshape(d_out, num_kraus, d_in)
    return KrausChannel([blocks[:, a, :] for a in range(num_kraus)])


def random_pinching(dim: int, seed: int, num_blocks: int | None = None) -> Pinching:
    """Pinching onto a Haar-random block decomposition with >= 2 blocks."""
    rng = np.random.Generator(np.random.Philox(seed))
    u = _haar_isometry(dim, dim, rng)
    if num_blocks is None:
        num_blocks = int(rng.integers(2, dim + 1))
    if not 2 <= num_blocks <= dim:
        raise ValueError(f"num_blocks {num_blocks} outside [2, {dim}]")
    cuts = np.sort(rng.choice(np.arange(1, dim), size=num_blocks - 1, replace=False))
    bounds = [0, *cuts.tolist(), dim]
    projectors = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        w = u[:, lo:hi]
        projectors.append(w @ w.conj().T)
    return Pinching(projectors)


@dataclass(frozen=True, eq=False)
class ContractionMap:
    """The pair (U, U*) with U(X) = sigma^{1/2} T*(sigma_T^{-1/2} X).

    U maps the output algebra of the channel into the input algebra and is a
    contraction; for conditional expectations U*U is the expectation itself.
    """

    channel: KrausChannel
    sigma_half: np.ndarray
    sigma_t_rsqrt: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.sigma_half @ self.channel.adjoint_apply(self.sigma_t_rsqrt @ x)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return self.sigma_t_rsqrt @ self.channel.apply(self.sigma_half @ y)


def build_contraction(sigma, channel: KrausChannel) -> ContractionMap:
    s = as_matrix(sigma)
    sigma_t = channel.apply(s)
    w = herm_eig(sigma_t).values
    if float(w[-1]) <= 0.0:
        raise SingularState("channel output state vanishes")
    return ContractionMap(
        channel=channel,
        sigma_half=matrix_fn(s, SQRT),
        sigma_t_rsqrt=matrix_fn(sigma_t, RSQRT_ON_SUPPORT),
    )


def superop_matrix(fn: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    """Matrix of a linear map on d x d matrices in the unit-matrix basis.

    Intended for property tests at dim <= 8; columns are vec(fn(E_ij)) with
    row-major vec and basis order E_00, E_01, ...
    """
    m = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = 1.0
            m[:, i * dim + j] = fn(e).ravel()
    return m
