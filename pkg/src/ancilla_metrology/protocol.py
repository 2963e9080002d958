"""
Executable model of the ancilla-assisted metrology circuit.

A probe prepared in ``rho_P`` and an ancilla in ``|phi>`` evolve jointly under

    H = omega_P Jz (x) 1 + omega_A 1 (x) sigma_z + g Jz (x) sigma_z,

the ancilla is measured in the sigma_x basis (both outcomes kept), the phase
``theta`` is written by ``exp(-i theta Jx)`` on the probe and the pair evolves
freely again.  Each outcome is tracked as an unnormalized branch together with
its exact theta-derivative, obtained by inserting ``-i Jx`` at the encoding slot.

Units: ``g`` sets the scale; frequencies are in units of ``g`` and times in
units of ``1/g``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import spin
from .errors import ConfigError, DomainError, InvalidDimensionError
from .spin import SpinDimension

NULL_BRANCH_FLOOR = 1e-14
SIGNS = (+1, -1)


def _finite(name, value):
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value}")


@dataclass(frozen=True)
class ProtocolParams:
    """Physical parameters of one circuit run."""

    N: int
    omega_p: float
    omega_a: float
    g: float
    t1: float
    t2: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        SpinDimension(self.N)
        object.__setattr__(self, "N", int(self.N))
        for name in ("omega_p", "omega_a", "g", "t1", "t2", "theta"):
            value = float(getattr(self, name))
            _finite(name, value)
            object.__setattr__(self, name, value)
        # g = 0 is allowed: it is the decoupled-ancilla baseline
        if self.g < 0:
            raise ConfigError(f"coupling g must be >= 0, got {self.g}")
        if self.t1 < 0 or self.t2 < 0:
            raise ConfigError("evolution times must be non-negative")

    @property
    def dim(self) -> SpinDimension:
        return SpinDimension(self.N)

    def replace(self, **changes) -> "ProtocolParams":
        return dataclasses.replace(self, **changes)

    @classmethod
    def optimized(
        cls,
        N: int,
        *,
        g: float = 1.0,
        omega_p: float = 10.0,
        n1: int = 0,
        n2: Optional[int] = None,
        t2: float = 0.0,
        theta: float = 0.0,
    ) -> "ProtocolParams":
        """Parameters at the optimal working point (default n2 by parity rule)."""
        if n1 < 0:
            raise ConfigError("n1 must be >= 0 (negative evolution time)")
        t1 = optimal_t1(g, n1)
        if n2 is None:
            n2 = default_n2(N)
        return cls(N, omega_p, optimal_omega_a(N, t1, n2), g, t1, t2, theta)


def optimal_t1(g: float, n1: int = 0) -> float:
    """Joint-evolution time ``(n1 + 1/2) pi / g``."""
    if not g > 0:
        raise DomainError(f"optimal t1 needs g > 0, got {g}")
    return (n1 + 0.5) * math.pi / g


def optimal_omega_a(N: int, t1opt: float, n2: int = 0) -> float:
    """Ancilla splitting that makes both effective branch maps unitary."""
    if not t1opt > 0:
        raise DomainError(f"t1opt must be positive, got {t1opt}")
    return (N + 1 + 2 * n2) * math.pi / (4 * t1opt)


def default_n2(N: int) -> int:
    """Parity rule keeping ``omega_A`` close to ``5 g`` at ``t1 = pi/(2g)``."""
    return (9 - N) // 2 if N % 2 else (10 - N) // 2


# ---------------------------------------------------------------------------
# preparations


PROBE_KINDS = ("polarized_opt", "superposed_opt", "ghz_x", "dicke_mixture", "thermal")


@dataclass(frozen=True)
class ProbePrep:
    """Initial probe state.

    Use the classmethod constructors.  ``frame_t1`` fixes the time entering
    the optimized frame ``exp(i (omega_P + g) t1 Jz)``; when ``None`` the
    circuit's own ``t1`` is used.
    """

    kind: str
    sign: int = 1
    a: float = 1.0
    b: float = 0.0
    phi: float = 0.0
    phi0: float = 0.0
    weights: Optional[Tuple[float, ...]] = None
    beta: Optional[float] = None
    frame_t1: Optional[float] = None

    def __post_init__(self):
        if self.kind not in PROBE_KINDS:
            raise ConfigError(f"unknown probe kind {self.kind!r}")
        if self.kind == "polarized_opt" and self.sign not in (1, -1):
            raise ConfigError("polarized sign must be +1 or -1")
        if self.kind == "superposed_opt":
            if abs(self.a ** 2 + self.b ** 2 - 1) > 1e-10:
                raise ConfigError("superposition needs a^2 + b^2 = 1")
        if self.kind == "dicke_mixture":
            w = np.asarray(self.weights, dtype=float)
            if w.ndim != 1 or np.any(w < 0) or not np.isfinite(w).all() or w.sum() <= 0:
                raise ConfigError("mixture weights must be non-negative and not all zero")
            if abs(w.sum() - 1) > 1e-10:
                raise ConfigError(f"mixture weights sum to {w.sum()}, expected 1")
        if self.kind == "thermal":
            if self.beta is None or not math.isfinite(self.beta):
                raise ConfigError("thermal preparation needs a finite beta")

    @classmethod
    def polarized(cls, sign: int = 1, frame_t1: Optional[float] = None) -> "ProbePrep":
        return cls("polarized_opt", sign=sign, frame_t1=frame_t1)

    @classmethod
    def superposed(cls, a: float, b: float, phi: float = 0.0,
                   frame_t1: Optional[float] = None) -> "ProbePrep":
        return cls("superposed_opt", a=a, b=b, phi=phi, frame_t1=frame_t1)

    @classmethod
    def ghz_x(cls, phi0: float = 0.0) -> "ProbePrep":
        return cls("ghz_x", phi0=phi0)

    @classmethod
    def dicke_mixture(cls, weights: Sequence[float],
                      frame_t1: Optional[float] = None) -> "ProbePrep":
        return cls("dicke_mixture", weights=tuple(float(w) for w in weights), frame_t1=frame_t1)

    @classmethod
    def thermal(cls, beta: float, frame_t1: Optional[float] = None) -> "ProbePrep":
        return cls("thermal", beta=float(beta), frame_t1=frame_t1)

    @property
    def is_pure(self) -> bool:
        return self.kind in ("polarized_opt", "superposed_opt", "ghz_x")


def _frame_basis(prep: ProbePrep, params: ProtocolParams) -> np.ndarray:
    t_frame = params.t1 if prep.frame_t1 is None else prep.frame_t1
    return spin.opt_basis(params.dim, params.omega_p, params.g, t_frame)


def thermal_weights(N: int, beta: float) -> np.ndarray:
    """Boltzmann weights ``exp(-m beta)/Z`` for ``m = +j ... -j``."""
    m = SpinDimension(N).m_values
    logw = -m * beta
    w = np.exp(logw - logw.max())
    return w / w.sum()


def probe_spectrum(prep: ProbePrep, params: ProtocolParams):
    """Eigen-decomposition ``(weights, columns)`` of the initial probe state."""
    dim = params.dim
    if prep.is_pure:
        psi = prepare_probe(prep, params)
        return np.ones(1), psi[:, None]
    basis = _frame_basis(prep, params)
    if prep.kind == "thermal":
        w = thermal_weights(dim.N, prep.beta)
    else:
        w = np.asarray(prep.weights, dtype=float)
        if w.shape != (dim.d,):
            raise ConfigError(f"need {dim.d} mixture weights for N={dim.N}, got {w.shape[0]}")
        w = w / w.sum()
    return w, basis


def prepare_probe(prep: ProbePrep, params: ProtocolParams) -> np.ndarray:
    """Initial probe state: a vector for pure kinds, a density matrix otherwise."""
    dim = params.dim
    if prep.kind == "ghz_x":
        top = spin.x_basis_eigenvector(dim, dim.j)
        flipped = spin.frame_phases(dim, math.pi) * top
        return (top + np.exp(-1j * prep.phi0) * flipped) / math.sqrt(2)
    if prep.kind == "polarized_opt":
        basis = _frame_basis(prep, params)
        return np.array(basis[:, 0] if prep.sign > 0 else basis[:, -1])
    if prep.kind == "superposed_opt":
        basis = _frame_basis(prep, params)
        return prep.a * basis[:, 0] + prep.b * np.exp(-1j * prep.phi) * basis[:, -1]
    w, v = probe_spectrum(prep, params)
    return (v * w) @ v.conj().T


ANCILLA_KINDS = ("plus", "minus", "ground", "excited", "bloch")


@dataclass(frozen=True)
class AncillaPrep:
    """Initial ancilla state; ``bloch`` is ``cos(t/2)|e> + exp(i p) sin(t/2)|g>``."""

    kind: str = "plus"
    polar: float = 0.0
    azimuth: float = 0.0

    def __post_init__(self):
        if self.kind not in ANCILLA_KINDS:
            raise ConfigError(f"unknown ancilla kind {self.kind!r}")

    def vector(self) -> np.ndarray:
        if self.kind == "plus":
            return np.array(spin.KET_PLUS)
        if self.kind == "minus":
            return np.array(spin.KET_MINUS)
        if self.kind == "ground":
            return np.array(spin.KET_G)
        if self.kind == "excited":
            return np.array(spin.KET_E)
        return (math.cos(self.polar / 2) * spin.KET_E
                + np.exp(1j * self.azimuth) * math.sin(self.polar / 2) * spin.KET_G)


SCHEDULE_VARIANTS = ("synchronous", "measurement_delay", "encoding_delay")


@dataclass(frozen=True)
class Schedule:
    """Ordering of measurement and encoding; ``dt`` is the delay between them."""

    variant: str = "synchronous"
    dt: float = 0.0

    def __post_init__(self):
        if self.variant not in SCHEDULE_VARIANTS:
            raise ConfigError(f"unknown schedule {self.variant!r}")
        _finite("dt", self.dt)
        if self.dt < 0:
            raise ConfigError("delay must be non-negative")
        if self.variant == "synchronous" and self.dt != 0:
            raise ConfigError("synchronous schedule has no delay")

    def stages(self, params: ProtocolParams):
        t1, t2, dt = params.t1, params.t2, self.dt
        if self.variant == "synchronous":
            return (("U", t1), ("M", None), ("R", None), ("U", t2))
        if self.variant == "measurement_delay":
            return (("U", t1), ("R", None), ("U", dt), ("M", None), ("U", t2))
        return (("U", t1), ("M", None), ("U", dt), ("R", None), ("U", t2))


# ---------------------------------------------------------------------------
# outcomes


@dataclass(frozen=True)
class BranchOutcome:
    """One sigma_x outcome of the unconditional measurement.

    ``raw`` is the unnormalized composite state (vector or density matrix),
    ``raw_derivative`` its derivative with respect to theta (``None`` when no
    encoding has happened yet).  ``state`` is the normalized state, or
    ``None`` for a branch of vanishing probability.
    """

    sign: int
    probability: float
    state: Optional[np.ndarray]
    raw: np.ndarray
    raw_derivative: Optional[np.ndarray] = None

    @property
    def is_pure(self) -> bool:
        return self.raw.ndim == 1

    @property
    def is_null(self) -> bool:
        return self.state is None

    def density(self) -> Optional[np.ndarray]:
        if self.state is None:
            return None
        if self.is_pure:
            return np.outer(self.state, self.state.conj())
        return self.state

    def probability_derivative(self) -> float:
        if self.raw_derivative is None:
            return 0.0
        if self.is_pure:
            return 2 * float(np.real(np.vdot(self.raw, self.raw_derivative)))
        return float(np.real(np.trace(self.raw_derivative)))


@dataclass(frozen=True)
class CircuitResult:
    branches: Tuple[BranchOutcome, BranchOutcome]
    params: ProtocolParams
    schedule: Schedule

    @property
    def probabilities(self) -> Tuple[float, float]:
        return tuple(b.probability for b in self.branches)

    def branch(self, sign: int) -> BranchOutcome:
        return self.branches[0 if sign > 0 else 1]


def _make_branch(sign, raw, draw=None) -> BranchOutcome:
    if raw.ndim == 1:
        p = float(np.real(np.vdot(raw, raw)))
        state = raw / math.sqrt(p) if p > NULL_BRANCH_FLOOR else None
    else:
        p = float(np.real(np.trace(raw)))
        state = raw / p if p > NULL_BRANCH_FLOOR else None
    return BranchOutcome(sign, p, state, raw, draw)


def _project(x, sign):
    # (1 (x) |s><s|) with |s> = (|e> + s|g>)/sqrt2 acting on composite index (m, a)
    if x is None:
        return None
    ket = spin.KET_PLUS if sign > 0 else spin.KET_MINUS
    if x.ndim == 1:
        amp = x.reshape(-1, 2) @ ket.conj()
        return np.outer(amp, ket).reshape(-1)
    d = x.shape[0] // 2
    core = np.einsum("a,iajb,b->ij", ket.conj(), x.reshape(d, 2, d, 2), ket)
    return np.kron(core, np.outer(ket, ket.conj()))


def measure_sigma_x(state: np.ndarray, derivative: Optional[np.ndarray] = None):
    """Split a composite state into its two sigma_x branches ``(+, -)``."""
    state = np.asarray(state)
    if state.shape[0] % 2 or (state.ndim == 2 and state.shape[0] != state.shape[1]):
        raise InvalidDimensionError(f"not a composite state: shape {state.shape}")
    return tuple(
        _make_branch(s, _project(state, s), _project(derivative, s)) for s in SIGNS
    )


def hamiltonian_diagonal(params: ProtocolParams) -> np.ndarray:
    m = params.dim.m_values
    sz = np.array([1.0, -1.0])
    return (params.omega_p * m[:, None] + params.omega_a * sz[None, :]
            + params.g * m[:, None] * sz[None, :]).reshape(-1)


def full_hamiltonian(params: ProtocolParams) -> np.ndarray:
    """Composite Hamiltonian; diagonal in the ``|j,m> (x) |e/g>`` basis."""
    return np.diag(hamiltonian_diagonal(params)).astype(complex)


def _evolve(x, phases):
    if x is None:
        return None
    if x.ndim == 1:
        return phases * x
    return phases[:, None] * x * phases.conj()[None, :]


def _probe_left(op, x):
    # (op (x) 1) x
    d = op.shape[0]
    if x.ndim == 1:
        return (op @ x.reshape(d, 2)).reshape(-1)
    return (op @ x.reshape(d, 4 * d)).reshape(2 * d, 2 * d)


def _probe_right(x, op):
    # x (op (x) 1)
    return _probe_left(op.T, x.T).T


def _encode(x, rot, jx):
    if x.ndim == 1:
        y = _probe_left(rot, x)
        return y, None if jx is None else -1j * _probe_left(jx, y)
    y = _probe_right(_probe_left(rot, x), rot.conj().T)
    if jx is None:
        return y, None
    return y, -1j * (_probe_left(jx, y) - _probe_right(y, jx))


def initial_state(params: ProtocolParams, prep: ProbePrep, ancilla: AncillaPrep) -> np.ndarray:
    probe = prepare_probe(prep, params)
    phi = ancilla.vector()
    if probe.ndim == 1:
        return np.kron(probe, phi)
    return np.kron(probe, np.outer(phi, phi.conj()))


def run(
    params: ProtocolParams,
    prep: ProbePrep,
    ancilla: Optional[AncillaPrep] = None,
    schedule: Optional[Schedule] = None,
    derivative: bool = True,
) -> CircuitResult:
    """Execute the circuit and return both measurement branches.

    Pure inputs stay pure in each branch; mixed inputs propagate as composite
    density matrices.  ``derivative=False`` skips the theta-derivative.
    """
    ancilla = ancilla or AncillaPrep()
    schedule = schedule or Schedule()
    energies = hamiltonian_diagonal(params)
    rot = spin.rotate_x(params.dim, params.theta)
    jx = spin.collective_operator(params.dim, "x") if derivative else None

    # each path: (sign or None, state, derivative)
    paths = [(None, initial_state(params, prep, ancilla), None)]
    for kind, t in schedule.stages(params):
        if kind == "U":
            if t == 0:
                continue
            phases = np.exp(-1j * t * energies)
            paths = [(s, _evolve(x, phases), _evolve(dx, phases)) for s, x, dx in paths]
        elif kind == "R":
            paths = [(s, *_encode(x, rot, jx)) for s, x, _ in paths]
        else:
            (_, x, dx), = paths
            paths = [(s, _project(x, s), _project(dx, s)) for s in SIGNS]
    branches = tuple(_make_branch(s, x, dx) for s, x, dx in paths)
    return CircuitResult(branches, params, schedule)


def branch_distribution(branch: BranchOutcome) -> np.ndarray:
    """``P(m, sign | theta)`` for a Jz readout, ``m = +j ... -j``.

    Includes the branch probability, so summing over ``m`` returns it.
    """
    return spin.probe_populations(branch.raw)


def branch_distribution_derivative(branch: BranchOutcome) -> np.ndarray:
    """Exact theta-derivative of :func:`branch_distribution`."""
    x, dx = branch.raw, branch.raw_derivative
    if dx is None:
        return np.zeros(x.shape[0] // 2)
    if x.ndim == 1:
        return 2 * np.sum(np.real(x.conj() * dx).reshape(-1, 2), axis=1)
    return np.real(np.diagonal(spin.partial_trace_ancilla(dx)))


def outcome_distribution(result: CircuitResult) -> np.ndarray:
    """Joint Jz-and-sign distribution, ``+`` block first."""
    return np.concatenate([branch_distribution(b) for b in result.branches])


def outcome_distribution_derivative(result: CircuitResult) -> np.ndarray:
    return np.concatenate([branch_distribution_derivative(b) for b in result.branches])


def branch_kraus(params: ProtocolParams, ancilla: AncillaPrep, sign: int) -> np.ndarray:
    """Diagonal of the effective probe map ``<sign| U(t1) |phi>``."""
    phi = ancilla.vector()
    ket = spin.KET_PLUS if sign > 0 else spin.KET_MINUS
    phases = np.exp(-1j * params.t1 * hamiltonian_diagonal(params)).reshape(-1, 2)
    return phases @ (ket.conj() * phi)
