"""Recovery maps for the BS-entropy and residual evaluators for every
equality condition of the data processing inequality."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .channels import ConditionalExpectation, KrausChannel, Pinching, _haar_isometry
from .divergences import bs_entropy, renyi2_trace
from .errors import SingularState
from .linalg import RSQRT_ON_SUPPORT, SQRT, herm_eig, matrix_fn, pinv, schatten_norm
from .states import DensityMatrix, as_matrix, gamma, numerical_rank, state_to_json


@dataclass(frozen=True)
class RecoveryReport:
    """Gap and equality-condition residuals for one (sigma, rho, channel)."""

    gap_bs: float
    residual_eq2: float
    residual_eq3: float
    residual_bs_recovery: float
    residual_petz: float
    renyi2_gap: float
    input_hashes: dict | None = None

    def to_json(self) -> str:
        payload = {
            "gap_bs": self.gap_bs,
            "residual_eq2": self.residual_eq2,
            "residual_eq3": self.residual_eq3,
            "residual_bs_recovery": self.residual_bs_recovery,
            "residual_petz": self.residual_petz,
            "renyi2_gap": self.renyi2_gap,
            "input_hashes": self.input_hashes or {},
        }
        return json.dumps(payload)


def _hash_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _output_state_or_raise(channel: KrausChannel, m: np.ndarray) -> np.ndarray:
    out = channel.apply(m)
    w = herm_eig(out).values
    if float(w[-1]) <= 0.0:
        raise SingularState("channel output state vanishes")
    return out


def petz_recovery(channel: KrausChannel, sigma, x: np.ndarray) -> np.ndarray:
    """sigma^{1/2} T*(sigma_T^{-1/2} X sigma_T^{-1/2}) sigma^{1/2}."""
    s = as_matrix(sigma)
    sigma_t = _output_state_or_raise(channel, s)
    st_rsqrt = matrix_fn(sigma_t, RSQRT_ON_SUPPORT)
    s_half = matrix_fn(s, SQRT)
    return s_half @ channel.adjoint_apply(st_rsqrt @ np.asarray(x) @ st_rsqrt) @ s_half


def bs_recovery(channel: KrausChannel, sigma, x: np.ndarray) -> np.ndarray:
    """sigma T*(sigma_T^{-1} X): trace preserving but not completely positive."""
    s = as_matrix(sigma)
    sigma_t = _output_state_or_raise(channel, s)
    return s @ channel.adjoint_apply(pinv(sigma_t) @ np.asarray(x))


def stinespring_residual(sigma, rho, channel: KrausChannel) -> float:
    """Residual of the isometry-form equality condition.

    || V s^(1/2) V* (s_T^(-1/2) G_T^(1/2) s_T^(1/2) ⊗ I) - V G^(1/2) s^(1/2) V* ||_2
    with G the ratio operator of (sigma, rho), G_T of the channel outputs, and
    V the Stinespring isometry constructed from the Kraus family.
    """
    s = as_matrix(sigma)
    r = as_matrix(rho)
    dilation = channel.stinespring()
    v = dilation.v
    sigma_t = channel.apply(s)
    rho_t = channel.apply(r)
    g = gamma(s, r).mat
    g_t = gamma(sigma_t, rho_t).mat
    s_half = matrix_fn(s, SQRT)
    g_half = matrix_fn(g, SQRT)
    gt_half = matrix_fn(g_t, SQRT)
    st_half = matrix_fn(sigma_t, SQRT)
    st_rsqrt = matrix_fn(sigma_t, RSQRT_ON_SUPPORT)
    theta = np.kron(st_rsqrt @ gt_half @ st_half, np.eye(dilation.s))
    lhs = v @ s_half @ v.conj().T @ theta
    rhs = v @ g_half @ s_half @ v.conj().T
    return schatten_norm(lhs - rhs, 2)


def equality_residuals(sigma, rho, channel: KrausChannel) -> RecoveryReport:
    """Every equality-condition residual plus the BS gap for one instance."""
    s = as_matrix(sigma)
    r = as_matrix(rho)
    sigma_t = _output_state_or_raise(channel, s)
    rho_t = _output_state_or_raise(channel, r)

    gap = bs_entropy(s, r) - bs_entropy(sigma_t, rho_t)
    pulled_back = channel.adjoint_apply(pinv(sigma_t) @ rho_t)
    residual_eq2 = schatten_norm(pulled_back - pinv(s) @ r, 2)
    residual_bs = schatten_norm(r - s @ pulled_back, 2)
    residual_eq3 = stinespring_residual(s, r, channel)
    residual_petz = schatten_norm(s - petz_recovery(channel, r, channel.apply(s)), 1)
    renyi_gap = renyi2_trace(s, r) - renyi2_trace(sigma_t, rho_t)

    hashes = {
        "sigma": _hash_text(state_to_json(s)),
        "rho": _hash_text(state_to_json(r)),
        "channel": _hash_text(channel.to_json()),
    }
    return RecoveryReport(
        gap_bs=gap,
        residual_eq2=residual_eq2,
        residual_eq3=residual_eq3,
        residual_bs_recovery=residual_bs,
        residual_petz=residual_petz,
        renyi2_gap=renyi_gap,
        input_hashes=hashes,
    )


def condexp_equality_residuals(sigma, rho, expectation: ConditionalExpectation):
    """Residuals of the two conditional-expectation equality conditions.

    Returns (r_recovery, r_strange): the recovery-form residual
    ||rho - sigma sigma_N^{-1} rho_N||_2 and the square-root-form residual
    ||s^(1/2) s_N^(-1/2) G_N^(1/2) s_N^(1/2) - G^(1/2) s^(1/2)||_2.
    """
    s = as_matrix(sigma)
    r = as_matrix(rho)
    if numerical_rank(s) < s.shape[0] or numerical_rank(r) < r.shape[0]:
        raise SingularState("conditional-expectation residuals need full rank")
    sigma_n = expectation.apply(s)
    rho_n = expectation.apply(r)
    g = gamma(s, r).mat
    g_n = gamma(sigma_n, rho_n).mat
    r_recovery = schatten_norm(r - s @ pinv(sigma_n) @ rho_n, 2)
    s_half = matrix_fn(s, SQRT)
    sn_half = matrix_fn(sigma_n, SQRT)
    sn_rsqrt = matrix_fn(sigma_n, RSQRT_ON_SUPPORT)
    g_half = matrix_fn(g, SQRT)
    gn_half = matrix_fn(g_n, SQRT)
    r_strange = schatten_norm(
        s_half @ sn_rsqrt @ gn_half @ sn_half - g_half @ s_half, 2
    )
    return r_recovery, r_strange


def pinching_fixed_pair(dim: int, seed: int, num_blocks: int | None = None):
    """A nontrivial equality instance: a random pinching together with two
    commuting states diagonal in its block eigenbasis, so both are fixed
    points of the expectation and the DPI gap vanishes without rho = sigma.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    u = _haar_isometry(dim, dim, rng)
    if num_blocks is None:
        num_blocks = int(rng.integers(2, dim + 1))
    cuts = np.sort(rng.choice(np.arange(1, dim), size=num_blocks - 1, replace=False))
    bounds = [0, *cuts.tolist(), dim]
    projectors = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        w = u[:, lo:hi]
        projectors.append(w @ w.conj().T)
    pinching = Pinching(projectors)

    def _state() -> DensityMatrix:
        diag = rng.uniform(0.1, 1.0, size=dim)
        diag = diag / diag.sum()
        m = (u * diag) @ u.conj().T
        m = 0.5 * (m + m.conj().T)
        return DensityMatrix(mat=m, dim=dim, rank=dim)

    return _state(), _state(), pinching
