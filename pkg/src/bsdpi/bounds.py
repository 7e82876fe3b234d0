"""Evaluators for the strengthened data-processing lower bounds.

Each evaluator returns a BoundReport carrying the divergence gap, the two
right-hand-side variants (the square-root-condition form with the K-type
prefactor and the recovery form with the L-type prefactor), the precondition
flag, and the constants that entered the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import ConditionalExpectation, KrausChannel, build_contraction
from .divergences import (
    FDivFamily,
    bs_entropy,
    maximal_f,
    regularized_divergence,
    xlogx,
)
from .errors import BadBeta, MissingMeasureParams, SingularState, SupportMismatch
from .linalg import RANK_TOL, SQRT, herm_eig, hs_inner, matrix_fn, pinv, schatten_norm
from .recovery import condexp_equality_residuals, stinespring_residual
from .states import as_matrix, gamma, numerical_rank, support_projector


@dataclass(frozen=True)
class BoundReport:
    """Gap, both bound values, precondition flag, and the entering constants."""

    gap: float
    rhs_k: float
    rhs_l: float
    precondition_ok: bool
    constants: dict = field(default_factory=dict)

    @property
    def rhs(self) -> float:
        return max(self.rhs_k, self.rhs_l)

    @property
    def slack(self) -> float:
        return self.gap - self.rhs

    @property
    def slack_k(self) -> float:
        return self.gap - self.rhs_k

    @property
    def slack_l(self) -> float:
        return self.gap - self.rhs_l


def k_alpha(alpha: float) -> float:
    """Prefactor of the square-root-condition bound; (pi/4)^4 at alpha = 0."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    a = float(alpha)
    return (
        ((2 * a + 1) / (2 * a + 2)) ** (4 * (a + 1))
        * (2 * a + 1) ** (-2.0)
        * 4.0 ** (-(4 * a + 2))
        * math.pi ** (4 * (a + 1))
    )


def l_alpha(beta: float) -> float:
    """Prefactor of the recovery-form bound for the power family, beta in (0, 1)."""
    if not 0.0 < beta < 1.0:
        raise BadBeta(f"beta {beta} outside (0, 1)")
    b = float(beta)
    return (
        0.25
        * ((b + 1) / (b + 2)) ** (2 * b + 4)
        * (b + 1) ** (-2.0)
        * 8.0 ** (-2 * (b + 1))
        * math.pi ** (2 * b + 4)
    )


def _l_from_alpha(alpha: float) -> float:
    # recovery form = square-root form with an extra (1/2)^{4(alpha+1)} factor
    return k_alpha(alpha) * 0.5 ** (4 * (alpha + 1))


def _min_positive_eigenvalue(m: np.ndarray) -> float:
    w = herm_eig(m).values
    lam_max = max(float(w[-1]), 0.0)
    positive = w[w > RANK_TOL * lam_max]
    if positive.size == 0:
        raise SingularState("state has no positive spectrum")
    return float(positive[0])


def _supports_equal(s: np.ndarray, r: np.ndarray) -> bool:
    return schatten_norm(support_projector(s) - support_projector(r), np.inf) <= 1e-8


def bs_bound_condexp(sigma, rho, expectation: ConditionalExpectation) -> BoundReport:
    """Strengthened BS-entropy DPI bound under a conditional expectation.

    rhs_k = (pi/4)^4 ||G||_inf^-2 r_strange^4 and
    rhs_l = (pi/8)^4 ||G||_inf^-4 ||sigma^-1||_inf^-2 r_recovery^4.
    Both hold unconditionally, so precondition_ok is always True.
    """
    s = as_matrix(sigma)
    r = as_matrix(rho)
    sigma_n = expectation.apply(s)
    rho_n = expectation.apply(r)
    gap = bs_entropy(s, r) - bs_entropy(sigma_n, rho_n)
    r_recovery, r_strange = condexp_equality_residuals(s, r, expectation)
    gamma_sup = gamma(s, r).sup_norm
    sigma_inv_sup = 1.0 / _min_positive_eigenvalue(s)
    pref_k = (math.pi / 4.0) ** 4
    pref_l = (math.pi / 8.0) ** 4
    rhs_k = pref_k * gamma_sup ** (-2.0) * r_strange**4
    rhs_l = pref_l * gamma_sup ** (-4.0) * sigma_inv_sup ** (-2.0) * r_recovery**4
    return BoundReport(
        gap=gap,
        rhs_k=rhs_k,
        rhs_l=rhs_l,
        precondition_ok=True,
        constants={
            "gamma_sup": gamma_sup,
            "sigma_inv_sup": sigma_inv_sup,
            "prefactor_k": pref_k,
            "prefactor_l": pref_l,
            "residual_k": r_strange,
            "residual_l": r_recovery,
        },
    )


def bs_bound_channel(sigma, rho, channel: KrausChannel) -> BoundReport:
    """Strengthened BS-entropy DPI bound for a general channel.

    The K form uses the Stinespring-isometry residual; the L form uses the
    recovery residual with ||sigma_T^-1||_inf.  Rank-deficient inputs with
    equal supports are handled with Moore-Penrose inverses on the residual
    side and the epsilon-regularized route for the gap.
    """
    s = as_matrix(sigma)
    r = as_matrix(rho)
    if not _supports_equal(s, r):
        raise SupportMismatch("sigma and rho must have equal supports")
    sigma_t = channel.apply(s)
    rho_t = channel.apply(r)

    constants: dict = {}
    if numerical_rank(s) < s.shape[0]:
        top = regularized_divergence(s, r, xlogx(), kind="maximal")
        bottom = regularized_divergence(sigma_t, rho_t, xlogx(), kind="maximal")
        gap = top.value - bottom.value
        constants["increment_top"] = top.increment
        constants["increment_bottom"] = bottom.increment
    else:
        gap = bs_entropy(s, r) - bs_entropy(sigma_t, rho_t)

    residual_v = stinespring_residual(s, r, channel)
    pulled_back = channel.adjoint_apply(pinv(sigma_t) @ rho_t)
    residual_rec = schatten_norm(s @ pulled_back - r, 2)
    gamma_sup = gamma(s, r).sup_norm
    sigma_t_inv_sup = 1.0 / _min_positive_eigenvalue(sigma_t)
    pref_k = (math.pi / 4.0) ** 4
    pref_l = (math.pi / 8.0) ** 4
    rhs_k = pref_k * gamma_sup ** (-2.0) * residual_v**4
    rhs_l = pref_l * gamma_sup ** (-4.0) * sigma_t_inv_sup ** (-2.0) * residual_rec**4
    constants.update(
        {
            "gamma_sup": gamma_sup,
            "sigma_inv_sup": sigma_t_inv_sup,
            "prefactor_k": pref_k,
            "prefactor_l": pref_l,
            "residual_k": residual_v,
            "residual_l": residual_rec,
        }
    )
    return BoundReport(
        gap=gap, rhs_k=rhs_k, rhs_l=rhs_l, precondition_ok=True, constants=constants
    )


def maxf_bound(sigma, rho, target, fam: FDivFamily) -> BoundReport:
    """Strengthened DPI bound for a maximal f-divergence with measure constants.

    ``target`` is either a ConditionalExpectation or a KrausChannel.  The
    precondition flag reflects the states-not-too-far condition; when it is
    False the right-hand sides are still reported but carry no guarantee.
    """
    if fam.measure_c is None or fam.measure_alpha is None:
        raise MissingMeasureParams(f"family {fam.tag!r} has no (C, alpha)")
    alpha = fam.measure_alpha
    c = fam.measure_c
    s = as_matrix(sigma)
    r = as_matrix(rho)

    if isinstance(target, ConditionalExpectation):
        sigma_out = target.apply(s)
        rho_out = target.apply(r)
        residual_l, residual_k = condexp_equality_residuals(s, r, target)
        sigma_inv_sup = 1.0 / _min_positive_eigenvalue(s)
    elif isinstance(target, KrausChannel):
        sigma_out = target.apply(s)
        rho_out = target.apply(r)
        residual_k = stinespring_residual(s, r, target)
        residual_l = schatten_norm(
            s @ target.adjoint_apply(pinv(sigma_out) @ rho_out) - r, 2
        )
        sigma_inv_sup = 1.0 / _min_positive_eigenvalue(sigma_out)
    else:
        raise TypeError("target must be a ConditionalExpectation or a KrausChannel")

    gap = maximal_f(s, r, fam) - maximal_f(sigma_out, rho_out, fam)
    gamma_sup = gamma(s, r).sup_norm

    check = (
        (2 * alpha + 1) * math.sqrt(c) / 4.0 * math.sqrt(max(gap, 0.0)) / (1.0 + gamma_sup)
    ) ** (1.0 / (1.0 + alpha))
    precondition_ok = check <= 1.0

    k = k_alpha(alpha)
    l = _l_from_alpha(alpha)
    envelope = (1.0 + gamma_sup) ** (-(4 * alpha + 2))
    rhs_k = (k / c) * envelope * residual_k ** (4 * (alpha + 1))
    rhs_l = (
        (l / c)
        * envelope
        * gamma_sup ** (-(2 * alpha + 2))
        * sigma_inv_sup ** (-(2 * alpha + 2))
        * residual_l ** (4 * (alpha + 1))
    )
    return BoundReport(
        gap=gap,
        rhs_k=rhs_k,
        rhs_l=rhs_l,
        precondition_ok=precondition_ok,
        constants={
            "gamma_sup": gamma_sup,
            "sigma_inv_sup": sigma_inv_sup,
            "C": c,
            "alpha": alpha,
            "k_alpha": k,
            "l_alpha": l,
            "precondition_value": check,
            "residual_k": residual_k,
            "residual_l": residual_l,
        },
    )


def lemma_integrand_check(sigma, rho, expectation: ConditionalExpectation, t: float):
    """Both sides of the resolvent integrand inequality at one t > 0.

    Returns (lhs, rhs) with lhs the pulled-back resolvent difference paired
    against sigma_N^{1/2} and rhs = t ||w_t||_2^2; lhs - rhs >= 0 up to
    rounding for every t > 0.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    s = as_matrix(sigma)
    r = as_matrix(rho)
    if numerical_rank(s) < s.shape[0] or numerical_rank(r) < r.shape[0]:
        raise SingularState("the integrand check needs full-rank states")
    sigma_n = expectation.apply(s)
    rho_n = expectation.apply(r)
    g = gamma(s, r).mat
    g_n = gamma(sigma_n, rho_n).mat
    contraction = build_contraction(s, expectation.as_kraus())
    sn_half = matrix_fn(sigma_n, SQRT)
    dim = s.shape[0]
    eye = np.eye(dim)

    u_sn = contraction.apply(sn_half)
    resolvent_u = np.linalg.solve(g + t * eye, u_sn)
    lhs = float(
        (
            hs_inner(sn_half, contraction.adjoint(resolvent_u))
            - hs_inner(sn_half, np.linalg.solve(g_n + t * eye, sn_half))
        ).real
    )
    w_t = contraction.apply(np.linalg.solve(g_n + t * eye, sn_half)) - resolvent_u
    rhs = t * float(np.vdot(w_t, w_t).real)
    return lhs, rhs
