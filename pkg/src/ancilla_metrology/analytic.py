"""
Closed-form Fisher information and probabilities for the circuit.

These are fast paths and the targets the simulator is checked against.
Thermal sums are evaluated with the largest exponent factored out so that
``beta * N`` in the thousands does not overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from . import fisher
from .errors import DomainError
from .fisher import GeneratorSpec

DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class ClosedFormResult:
    value: float
    formula: str
    notes: str = ""
    degenerate: bool = False


def _m_values(N: int) -> np.ndarray:
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    return N / 2 - np.arange(N + 1)


def hl_qfi(N: int) -> float:
    """Heisenberg-limit QFI ``N^2``."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    return float(N) ** 2


def cfi_optimal(N: int) -> float:
    """CFI of a Jz readout for an optimal probe; equals ``N^2`` for any ``t2``."""
    return hl_qfi(N)


def superposition_qfi(components: Sequence[Tuple[complex, float, float, float, float]]) -> float:
    """``4 sum_m m^2 |c_m|^2 (1 - 4 a_m^2 b_m^2 sin^2 phi_m)``.

    Each component is ``(c_m, a_m, b_m, phi_m, m)`` describing
    ``c_m (a_m |j,m>_opt + b_m exp(-i phi_m) |j,-m>_opt)``.
    """
    total_weight = sum(abs(c) ** 2 for c, *_ in components)
    if abs(total_weight - 1) > 1e-10:
        raise DomainError(f"sum |c_m|^2 = {total_weight}, expected 1")
    value = 0.0
    for c, a, b, phi, m in components:
        if abs(a * a + b * b - 1) > 1e-10:
            raise DomainError("each component needs a^2 + b^2 = 1")
        value += 4 * m * m * abs(c) ** 2 * (1 - 4 * a * a * b * b * math.sin(phi) ** 2)
    return value


def _thermal_terms(N: int, beta: float):
    m = _m_values(N)
    if not math.isfinite(beta):
        raise DomainError("beta must be finite")
    logw = -m * beta
    shift = logw.max()
    w = np.exp(logw - shift)
    return m, w, shift, w.sum()


def thermal_mean_square(N: int, beta: float) -> float:
    """``4 <m^2>`` in the thermal state: the first sum of the exact QFI."""
    m, w, _, s = _thermal_terms(N, beta)
    return float(4 * np.sum(m * m * w) / s)


def thermal_qfi_exact(N: int, beta: float) -> float:
    """Exact QFI of a thermal probe in the optimized basis.

    ``(4/Z) sum m^2 e^{-m beta} - (8/Z) sum m^2 / (e^{-m beta} + e^{m beta})``
    """
    m, w, shift, s = _thermal_terms(N, beta)
    first = 4 * np.sum(m * m * w) / s
    x = np.abs(m * beta)
    # 1/(Z (e^{-m b} + e^{m b})) = e^{-shift - |m b|} / (s (1 + e^{-2|m b|}))
    second = 8 * np.sum(m * m * np.exp(-shift - x) / (1 + np.exp(-2 * x))) / s
    return float(first - second)


def thermal_qfi_lower_bound(N: int, beta: float) -> float:
    """Large-N lower bound on the thermal QFI; only meant for ``N >> 1``.

    ``N^2 - 4N/(e^b - 1) + 4(e^b + 1)/(e^b - 1)^2 - (pi^3/b^3) e^{-N b/2} (1 - e^{-b})``
    """
    if not beta > 0:
        raise DomainError(f"bound needs beta > 0, got {beta}")
    em1 = math.expm1(beta)
    q = math.exp(-beta)
    middle = 4 * (1 + q) * q / (-math.expm1(-beta)) ** 2
    tail = (math.pi / beta) ** 3 * math.exp(-N * beta / 2) * (-math.expm1(-beta))
    return N * N - 4 * N / em1 + middle - tail


def _measurement_delay_parts(N, dt, omega_a, t1opt, theta, g):
    s = math.sin(g * dt) ** (2 * N)
    c = math.cos(2 * omega_a * (dt + t1opt) + N * theta) ** 2
    return N * N * (1 - s), 1 - s * c


def measurement_delay_is_degenerate(N, dt, omega_a, t1opt, theta, g) -> bool:
    num, den = _measurement_delay_parts(N, dt, omega_a, t1opt, theta, g)
    return abs(den) <= DEGENERATE_TOL and abs(num) <= DEGENERATE_TOL * N * N


def measurement_delay_qfi(N: int, dt: float, omega_a: float, t1opt: float,
                          theta: float, g: float) -> float:
    """QFI when the measurement lags the encoding by ``dt``.

    ``N^2 (1 - sin^{2N}(g dt)) / (1 - sin^{2N}(g dt) cos^2[2 omega_A (dt + t1) + N theta])``

    At the 0/0 point returns ``N^2``; see :func:`measurement_delay_is_degenerate`.
    """
    num, den = _measurement_delay_parts(N, dt, omega_a, t1opt, theta, g)
    if measurement_delay_is_degenerate(N, dt, omega_a, t1opt, theta, g):
        return float(N * N)
    return num / den


def encoding_delay_qfi(N: int, dt: float, g: float, omega_p: float) -> float:
    """QFI when the encoding lags the measurement by ``dt``.

    ``(N/4) {2(N+1) + (N-1)[cos(2 dt (g - w_P)) + cos(2 dt (g + w_P))]}``
    """
    return N / 4 * (2 * (N + 1) + (N - 1) * (math.cos(2 * dt * (g - omega_p))
                                             + math.cos(2 * dt * (g + omega_p))))


def encoding_delay_qfi_quadratic(N: int, dt: float, g: float, omega_p: float) -> float:
    """Second-order expansion ``N^2 - N(N-1)(g^2 + w_P^2) dt^2``."""
    return N * N - N * (N - 1) * (g * g + omega_p * omega_p) * dt * dt


def general_t1_probability(N: int, omega_a: float, g: float, t1: float) -> Tuple[float, float]:
    """Branch probabilities ``[1 +- cos(2 w_A t1) cos^N(g t1)] / 2`` for a polarized probe."""
    x = math.cos(2 * omega_a * t1) * math.cos(g * t1) ** N
    return (1 + x) / 2, (1 - x) / 2


def no_ancilla_qfi(weights, vectors, omega_p: float, t1: float) -> float:
    """QFI with the ancilla decoupled: generator ``J_phi`` with ``phi = omega_P t1``."""
    V = np.asarray(vectors)
    N = V.shape[0] - 1
    return fisher.qfi_spectral(weights, V, GeneratorSpec.free(N, omega_p, t1))


FORMULAS = {
    "hl_qfi": (hl_qfi, "optimal probe, ancilla |+> or |->, t1 = t1opt"),
    "cfi_optimal": (cfi_optimal, "optimal probe, Jz readout, any t2"),
    "superposition_qfi": (superposition_qfi, "requires the unitary-branch omega_A"),
    "thermal_qfi_exact": (thermal_qfi_exact, "requires the unitary-branch omega_A"),
    "thermal_qfi_lower_bound": (thermal_qfi_lower_bound, "derived for N >> 1; a bound, not an equality"),
    "measurement_delay_qfi": (measurement_delay_qfi, "polarized optimal probe, t1 = t1opt"),
    "encoding_delay_qfi": (encoding_delay_qfi, "polarized optimal probe, t1 = t1opt"),
    "encoding_delay_qfi_quadratic": (encoding_delay_qfi_quadratic, "valid for small dt"),
    "general_t1_probability": (general_t1_probability, "polarized optimal probe"),
    "no_ancilla_qfi": (no_ancilla_qfi, "g = 0"),
}


def closed_form(name: str, *args, **kwargs) -> ClosedFormResult:
    """Evaluate a named formula and attach its validity note."""
    try:
        fn, notes = FORMULAS[name]
    except KeyError:
        raise DomainError(f"unknown formula {name!r}") from None
    value = fn(*args, **kwargs)
    degenerate = name == "measurement_delay_qfi" and measurement_delay_is_degenerate(*args, **kwargs)
    return ClosedFormResult(value, name, notes, degenerate)
