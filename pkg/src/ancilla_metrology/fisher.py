"""
Quantum and classical Fisher information.

Four independent routes are provided:

* ``qfi_pure_branches`` -- Fubini-Study metric of unnormalized branch vectors,
  weighted by branch probability;
* ``qfi_sld`` -- symmetric-logarithmic-derivative formula on a density-matrix
  family, differentiated numerically (the reference oracle);
* ``qfi_spectral`` -- closed expression in terms of the initial spectrum and a
  fixed phase generator;
* ``cfi`` -- classical Fisher information of an outcome distribution.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple, Optional, Sequence, Union

import numpy as np

from . import spin
from .errors import (
    ContractViolation,
    InvalidStateError,
    NonDifferentiableError,
    SingularPointError,
)

logger = logging.getLogger(__name__)

PAIR_CUTOFF = 1e-12
OUTCOME_CUTOFF = 1e-14
SLOPE_CUTOFF = 1e-9
FD_STEP = 1e-5
FD_RTOL = 1e-6
NEGATIVE_EIGENVALUE_TOL = 1e-10
DERIVATIVE_RTOL = 1e-6
CURVATURE_STEP = 1e-4
CURVATURE_CUTOFF = 1e-4


@dataclass(frozen=True)
class FisherReport:
    """Fisher information at one parameter point.

    ``fq_total`` is always the sum of the two effective branch values, never
    the QFI of the branch-averaged state.  ``alternates`` holds totals from
    other methods keyed by method name.
    """

    theta: float
    prob_plus: float
    prob_minus: float
    fq_plus_eff: float
    fq_minus_eff: float
    fq_total: float
    method: str
    fc: Optional[float] = None
    alternates: Mapping[str, float] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# numerical differentiation


def central_difference(f: Callable, x: float, h: float = FD_STEP, rtol: float = FD_RTOL):
    """Central difference with one Richardson step.

    The estimates at ``h`` and ``h/2`` are compared; a mismatch above
    ``rtol`` is logged, a gross one (above 1e-2) means the function is not
    differentiable at ``x`` and raises.
    """
    f_p, f_m = np.asarray(f(x + h)), np.asarray(f(x - h))
    f_p2, f_m2 = np.asarray(f(x + h / 2)), np.asarray(f(x - h / 2))
    d1 = (f_p - f_m) / (2 * h)
    d2 = (f_p2 - f_m2) / h
    mismatch = float(np.max(np.abs(d1 - d2), initial=0.0))
    scale = float(np.max(np.abs(d2), initial=0.0))
    noise = 1e-8 * max(1.0, float(np.max(np.abs(f_p), initial=0.0)))
    if mismatch > 1e-2 * scale + noise:
        raise NonDifferentiableError(
            f"finite differences at h and h/2 differ by {mismatch:.3g} (scale {scale:.3g})"
        )
    if mismatch > rtol * scale + noise:
        logger.warning("h/2 consistency check: mismatch %.3g at scale %.3g", mismatch, scale)
    return (4 * d2 - d1) / 3


# ---------------------------------------------------------------------------
# pure branches


def pure_branch_qfi(vec: np.ndarray, dvec: np.ndarray, floor: float = OUTCOME_CUTOFF) -> float:
    """Effective QFI ``4 p [<d psi'|d psi'> - |<psi'|d psi'>|^2]`` of one branch.

    ``vec`` is unnormalized with ``p = <vec|vec>``; the expression reduces to
    ``4 (<dv|dv> - |<v|dv>|^2 / p)``.
    """
    p = float(np.real(np.vdot(vec, vec)))
    if p <= floor:
        return 0.0
    overlap = np.vdot(vec, dvec)
    return 4 * (float(np.real(np.vdot(dvec, dvec))) - float(abs(overlap)) ** 2 / p)


def qfi_pure_branches(
    family: Callable[[float], Sequence[np.ndarray]],
    theta: float,
    derivative: Optional[Callable[[float], Sequence[np.ndarray]]] = None,
    h: float = FD_STEP,
) -> FisherReport:
    """Sum of effective QFIs of the unnormalized branch vectors ``family(theta)``.

    ``derivative`` returns the exact branch derivatives; without it a
    Richardson central difference of ``family`` is used.
    """
    vecs = [np.asarray(v) for v in family(theta)]
    if derivative is not None:
        dvecs = [np.asarray(v) for v in derivative(theta)]
        method = "pure-insertion"
    else:
        stacked = central_difference(lambda t: np.stack([np.asarray(v) for v in family(t)]), theta, h)
        dvecs = list(stacked)
        method = "pure-fd"
    values = [pure_branch_qfi(v, dv) for v, dv in zip(vecs, dvecs)]
    probs = [float(np.real(np.vdot(v, v))) for v in vecs]
    return FisherReport(
        theta=theta,
        prob_plus=probs[0],
        prob_minus=probs[1],
        fq_plus_eff=values[0],
        fq_minus_eff=values[1],
        fq_total=values[0] + values[1],
        method=method,
    )


# ---------------------------------------------------------------------------
# SLD route


def sld_qfi(rho: np.ndarray, drho: np.ndarray, eps: float = PAIR_CUTOFF) -> float:
    """``sum_{ij} 2 |<i|d rho|j>|^2 / (p_i + p_j)`` over pairs with ``p_i + p_j > eps``.

    ``eps`` is relative to ``tr rho``.
    """
    rho = np.asarray(rho)
    p, v = np.linalg.eigh(rho)
    if p[0] < -NEGATIVE_EIGENVALUE_TOL:
        raise InvalidStateError(f"density matrix has eigenvalue {p[0]:.3g}")
    trace = float(np.sum(p))
    d = v.conj().T @ np.asarray(drho) @ v
    pair = p[:, None] + p[None, :]
    keep = pair > eps * trace
    excluded = int(keep.size - np.count_nonzero(keep))
    if excluded:
        logger.debug("sld_qfi: %d eigenvalue pairs below cutoff", excluded)
    return float(np.sum(2 * np.abs(d[keep]) ** 2 / pair[keep]))


def qfi_sld(
    family: Callable[[float], np.ndarray],
    theta: float,
    h: float = FD_STEP,
    eps: float = PAIR_CUTOFF,
) -> float:
    """QFI of the normalized density-matrix family at ``theta``.

    The derivative comes from finite differences only, which keeps this
    route independent of every analytic derivative in the package.
    """
    rho = np.asarray(family(theta))
    drho = central_difference(family, theta, h)
    return sld_qfi(rho, drho, eps)


# ---------------------------------------------------------------------------
# spectral route


@dataclass(frozen=True)
class GeneratorSpec:
    """Effective phase generator acting on the probe space."""

    matrix: np.ndarray
    label: str = ""

    @classmethod
    def measured(cls, dim, omega_p: float, g: float, t1: float) -> "GeneratorSpec":
        """``exp(-i pi Jz) J_opt``: the generator created by the ancilla measurement."""
        dim = spin.as_dimension(dim)
        flip = spin.frame_phases(dim, -np.pi)
        return cls(flip[:, None] * spin.opt_operator(dim, omega_p, g, t1), "exp(-i pi Jz) J_opt")

    @classmethod
    def free(cls, dim, omega_p: float, t1: float) -> "GeneratorSpec":
        """``J_phi = cos(phi) Jx - sin(phi) Jy`` with ``phi = omega_P t1`` (no ancilla)."""
        return cls(spin.opt_operator(dim, omega_p, 0.0, t1), "J_phi")


def qfi_spectral(
    weights: Sequence[float],
    vectors: np.ndarray,
    generator: Union[GeneratorSpec, np.ndarray],
    eps: float = PAIR_CUTOFF,
) -> float:
    """QFI from the initial spectrum ``{p_i, psi_i}`` and a generator ``G``.

    ``F = sum_i 4 p_i <psi_i|G^dag G|psi_i>
        - sum_ij 8 p_i p_j / (p_i + p_j) |<psi_i|G|psi_j>|^2``

    ``vectors`` holds the eigenvectors as columns.
    """
    G = generator.matrix if isinstance(generator, GeneratorSpec) else np.asarray(generator)
    p = np.asarray(weights, dtype=float)
    V = np.asarray(vectors)
    if V.ndim == 1:
        V = V[:, None]
    if G.shape[0] != V.shape[0]:
        raise ContractViolation(f"generator size {G.shape[0]} does not match states {V.shape[0]}")
    if abs(p.sum() - 1) > 1e-10:
        raise ContractViolation(f"spectral weights sum to {p.sum()}")
    GV = G @ V
    first = 4 * float(np.sum(p * np.sum(np.abs(GV) ** 2, axis=0)))
    M = V.conj().T @ GV
    pair = p[:, None] + p[None, :]
    keep = pair > eps
    coef = np.zeros_like(pair)
    coef[keep] = 8 * np.outer(p, p)[keep] / pair[keep]
    return first - float(np.sum(coef * np.abs(M) ** 2))


class GeneratorExtremes(NamedTuple):
    lam_max: float
    lam_min: float
    fq_max: float
    state: np.ndarray
    degenerate: bool


def generator_extremes(H: np.ndarray, degeneracy_tol: float = 1e-9) -> GeneratorExtremes:
    """Largest QFI ``(l_max - l_min)^2`` a pure state can reach under ``H``.

    The optimal state ``(|l_max> + |l_min>)/sqrt2`` is returned with zero
    relative phase.  ``degenerate`` flags a repeated extremal eigenvalue.
    """
    if not spin.is_hermitian(H):
        raise ContractViolation("generator_extremes needs a Hermitian matrix")
    w, v = np.linalg.eigh(np.asarray(H))
    lo, hi = w[0], w[-1]
    degenerate = bool(
        len(w) > 1 and (w[1] - lo < degeneracy_tol or hi - w[-2] < degeneracy_tol)
    )
    if hi - lo < degeneracy_tol:
        state = v[:, -1]
    else:
        state = (v[:, -1] + v[:, 0]) / np.sqrt(2)
    return GeneratorExtremes(float(hi), float(lo), float((hi - lo) ** 2), state, degenerate)


# ---------------------------------------------------------------------------
# classical Fisher information


@dataclass(frozen=True)
class DistributionFamily:
    """``theta -> probability vector``, optionally with an exact derivative."""

    evaluator: Callable[[float], np.ndarray]
    derivative: Optional[Callable[[float], np.ndarray]] = None


def cfi_from_distribution(p: np.ndarray, dp: np.ndarray, eps: float = OUTCOME_CUTOFF,
                          strict: bool = True, curvature: Optional[np.ndarray] = None) -> float:
    """``sum (dp)^2 / p`` over outcomes with ``p > eps``.

    A vanishing outcome with a non-vanishing slope is a singular point:
    ``SingularPointError`` when ``strict``, otherwise dropped with a warning.
    ``curvature`` (second derivatives) switches on the continuous extension
    ``(dp)^2/p -> 2 p''`` for vanishing outcomes with a double zero.
    """
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    live = p > eps
    singular = ~live & (np.abs(dp) > SLOPE_CUTOFF)
    if np.any(singular):
        msg = f"{int(singular.sum())} vanishing outcomes with non-zero slope"
        if strict:
            raise SingularPointError(msg)
        logger.warning("cfi: %s; they are dropped", msg)
    value = float(np.sum(dp[live] ** 2 / p[live]))
    if curvature is not None:
        double_zero = ~live & ~singular
        value += float(np.sum(2 * np.clip(np.asarray(curvature)[double_zero], 0.0, None)))
    return value


def cfi(family: Union[DistributionFamily, Callable[[float], np.ndarray]], theta: float,
        h: float = FD_STEP, strict: bool = True, check_derivative: bool = True,
        limit: bool = False) -> float:
    """``sum_x (d_theta p_x)^2 / p_x`` over outcomes with ``p_x > 1e-14``.

    With an exact derivative, ``check_derivative`` compares it against a
    central difference and raises ``ContractViolation`` on a relative
    mismatch above 1e-6.  Outcomes that vanish at ``theta`` with zero slope
    contribute nothing; when such an outcome has positive curvature the value
    drops discontinuously there, which is logged, and ``limit=True`` replaces
    the dropped term by its limit ``2 p''``.
    """
    if not isinstance(family, DistributionFamily):
        family = DistributionFamily(family)
    p = np.asarray(family.evaluator(theta), dtype=float)
    fd = None
    if family.derivative is not None:
        dp = np.asarray(family.derivative(theta), dtype=float)
        if check_derivative:
            fd = central_difference(family.evaluator, theta, h)
            mismatch = float(np.max(np.abs(dp - fd), initial=0.0))
            if mismatch > DERIVATIVE_RTOL * float(np.max(np.abs(dp), initial=0.0)) + SLOPE_CUTOFF:
                raise ContractViolation(
                    f"analytic and finite-difference outcome derivatives differ by {mismatch:.3g}"
                )
    else:
        dp = central_difference(family.evaluator, theta, h)
    curvature = None
    vanishing = (p <= OUTCOME_CUTOFF) & (np.abs(dp) <= SLOPE_CUTOFF)
    if np.any(vanishing):
        k = CURVATURE_STEP
        curv = (np.asarray(family.evaluator(theta + k)) + np.asarray(family.evaluator(theta - k))
                - 2 * p) / k ** 2
        bumps = vanishing & (curv > CURVATURE_CUTOFF)
        if np.any(bumps):
            log = logger.info if limit else logger.warning
            log("cfi: %d outcomes have a double zero at theta=%.6g; %s", int(bumps.sum()), theta,
                "using the limit 2 p''" if limit else "their contribution is dropped")
        if limit:
            curvature = np.where(bumps, curv, 0.0)
    return cfi_from_distribution(p, dp, strict=strict, curvature=curvature)
