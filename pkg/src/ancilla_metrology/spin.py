"""
Collective spin algebra for an ensemble of N spin-1/2 particles.

All probe matrices live in the symmetric (Dicke) subspace of dimension
``d = N + 1`` and are written in the Jz eigenbasis ordered
``m = +j, j-1, ..., -j``.  Composite probe-ancilla matrices use the ordering
``probe (x) ancilla`` with the ancilla index running fastest, and the ancilla
basis is ``(|e>, |g>)`` with ``sigma_z |e> = +|e>``.

Operators and states are plain ``numpy`` arrays.  Cached arrays are returned
read-only so they can be shared freely.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import ContractViolation, DomainError, InvalidDimensionError

HERMITIAN_ATOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

KET_E = np.array([1, 0], dtype=complex)
KET_G = np.array([0, 1], dtype=complex)
KET_PLUS = (KET_E + KET_G) / np.sqrt(2)
KET_MINUS = (KET_E - KET_G) / np.sqrt(2)

for _arr in (SIGMA_X, SIGMA_Y, SIGMA_Z, IDENTITY_2, KET_E, KET_G, KET_PLUS, KET_MINUS):
    _arr.setflags(write=False)


@dataclass(frozen=True)
class SpinDimension:
    """Size bookkeeping for a probe of ``N`` spins.

    ``two_j`` equals ``N`` and is kept as an integer so that half-integer
    total spin is represented exactly.
    """

    N: int

    def __post_init__(self):
        n = self.N
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            if not (isinstance(n, float) and n.is_integer()):
                raise InvalidDimensionError(f"spin count must be an integer, got {n!r}")
        if n < 1:
            raise InvalidDimensionError(f"spin count must be >= 1, got {n}")
        object.__setattr__(self, "N", int(n))

    @property
    def two_j(self) -> int:
        return self.N

    @property
    def j(self) -> float:
        return self.N / 2

    @property
    def d(self) -> int:
        return self.N + 1

    @property
    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers in basis order ``+j ... -j``."""
        return self.j - np.arange(self.d)

    def index(self, m: float) -> int:
        """Basis index of ``|j, m>``; validates ``m``."""
        two_m = 2 * m
        k = round(two_m)
        if abs(two_m - k) > 1e-9 or (self.N - k) % 2 or abs(k) > self.N:
            raise DomainError(f"m={m} is not an allowed projection for j={self.j}")
        return (self.N - k) // 2


DimLike = Union[int, SpinDimension]


def as_dimension(dim: DimLike) -> SpinDimension:
    return dim if isinstance(dim, SpinDimension) else SpinDimension(dim)


@lru_cache(maxsize=256)
def _collective_ops(N: int):
    dim = SpinDimension(N)
    j, m = dim.j, dim.m_values
    jp = np.zeros((dim.d, dim.d), dtype=complex)
    # <m+1|J+|m> sits one row above the diagonal in descending-m order
    k = np.arange(1, dim.d)
    jp[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jm = jp.conj().T
    ops = {
        "x": (jp + jm) / 2,
        "y": (jp - jm) / 2j,
        "z": np.diag(m).astype(complex),
    }
    for a in ops.values():
        a.setflags(write=False)
    return ops


def collective_operator(dim: DimLike, axis: str) -> np.ndarray:
    """Collective spin component ``J_axis`` as a ``(N+1) x (N+1)`` matrix.

    Parameters
    ----------
    dim : int or SpinDimension
        Number of spins.
    axis : {'x', 'y', 'z'}

    Returns
    -------
    ndarray
        Read-only Hermitian matrix in the descending Jz basis.
    """
    dim = as_dimension(dim)
    if axis not in ("x", "y", "z"):
        raise DomainError(f"axis must be one of x, y, z; got {axis!r}")
    return _collective_ops(dim.N)[axis]


def is_hermitian(H: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(H))) if H.size else 1.0)
    return bool(np.max(np.abs(H - H.conj().T), initial=0.0) <= atol * scale)


def hermitian_propagator(H: np.ndarray, t: float) -> np.ndarray:
    """Unitary ``exp(-i H t)`` from the spectral decomposition of ``H``.

    Diagonal ``H`` (the composite Hamiltonian always is) takes a fast path that
    exponentiates the diagonal directly.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidDimensionError(f"expected a square matrix, got shape {H.shape}")
    if not is_hermitian(H):
        raise ContractViolation("hermitian_propagator needs a Hermitian generator")
    diag = np.diagonal(H)
    if np.count_nonzero(H - np.diag(diag)) == 0:
        return np.diag(np.exp(-1j * t * diag.real))
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


@lru_cache(maxsize=256)
def _jx_eigensystem(N: int):
    w, v = np.linalg.eigh(_collective_ops(N)["x"])
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def rotate_x(dim: DimLike, theta: float) -> np.ndarray:
    """Encoding rotation ``R_x(theta) = exp(-i theta Jx)``."""
    dim = as_dimension(dim)
    w, v = _jx_eigensystem(dim.N)
    return (v * np.exp(-1j * theta * w)) @ v.conj().T


@lru_cache(maxsize=256)
def _x_basis(N: int) -> np.ndarray:
    # columns are |j,m>_x in the order m = +j ... -j
    dim = SpinDimension(N)
    rot = hermitian_propagator(_collective_ops(N)["y"], np.pi / 2)
    # exp(-i pi/2 Jy) maps Jz onto Jx; its columns carry sign (-1)^(j-m) on |j,j>.
    # Flip those so the |j,j> amplitude is positive, except for m = -j, whose
    # extra (-1)^N keeps <j,m|j,-j>_x = (-1)^(j+m) <j,m|j,j>_x for every N.
    k = np.arange(dim.d)
    signs = np.where(k % 2 == 0, 1.0, -1.0)
    signs[-1] = 1.0
    basis = np.real_if_close(rot * signs, tol=1e6).astype(complex)
    basis.setflags(write=False)
    return basis


def x_basis(dim: DimLike) -> np.ndarray:
    """Matrix whose columns are the Jx eigenvectors, ordered ``m = +j ... -j``."""
    return _x_basis(as_dimension(dim).N)


def x_basis_eigenvector(dim: DimLike, m: float) -> np.ndarray:
    """Normalized eigenvector ``|j, m>_x`` of Jx with eigenvalue ``m``.

    Phase convention: the amplitude on ``|j, j>`` is real and positive for
    every ``m`` except ``m = -j``, which carries an extra ``(-1)^N`` so that
    ``<j,m|j,-j>_x = (-i)^(2(j+m)) <j,m|j,j>_x`` holds for all N.
    """
    dim = as_dimension(dim)
    return np.array(x_basis(dim)[:, dim.index(m)])


def opt_angle(omega_p: float, g: float, t1: float) -> float:
    """Rotation angle ``(omega_P + g) t1`` of the optimized frame."""
    return (omega_p + g) * t1


def opt_operator(dim: DimLike, omega_p: float, g: float, t1: float) -> np.ndarray:
    """``J_opt = cos(a) Jx - sin(a) Jy`` with ``a = (omega_P + g) t1``."""
    dim = as_dimension(dim)
    a = opt_angle(omega_p, g, t1)
    return np.cos(a) * collective_operator(dim, "x") - np.sin(a) * collective_operator(dim, "y")


def frame_phases(dim: DimLike, angle: float) -> np.ndarray:
    """Diagonal of ``exp(i angle Jz)``."""
    return np.exp(1j * angle * as_dimension(dim).m_values)


def opt_basis(dim: DimLike, omega_p: float, g: float, t1: float) -> np.ndarray:
    """Columns ``|j,m>_opt = exp(i a Jz)|j,m>_x`` for ``m = +j ... -j``."""
    dim = as_dimension(dim)
    phases = frame_phases(dim, opt_angle(omega_p, g, t1))
    return phases[:, None] * x_basis(dim)


def opt_eigenvector(dim: DimLike, m: float, omega_p: float, g: float, t1: float) -> np.ndarray:
    """Eigenvector of ``J_opt`` with eigenvalue ``m``."""
    dim = as_dimension(dim)
    return opt_basis(dim, omega_p, g, t1)[:, dim.index(m)]


def tensor(probe_op: np.ndarray, ancilla_op: np.ndarray) -> np.ndarray:
    """``probe_op (x) ancilla_op`` with the ancilla index fastest."""
    probe_op = np.asarray(probe_op)
    ancilla_op = np.asarray(ancilla_op)
    if ancilla_op.shape != (2, 2):
        raise InvalidDimensionError(f"ancilla operator must be 2x2, got {ancilla_op.shape}")
    if probe_op.ndim != 2 or probe_op.shape[0] != probe_op.shape[1]:
        raise InvalidDimensionError(f"probe operator must be square, got {probe_op.shape}")
    return np.kron(probe_op, ancilla_op)


def partial_trace_ancilla(rho: np.ndarray) -> np.ndarray:
    """Trace out the ancilla qubit from a composite density matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] % 2:
        raise InvalidDimensionError(
            f"composite density matrix must be square with even size, got {rho.shape}"
        )
    d = rho.shape[0] // 2
    return np.einsum("iaja->ij", rho.reshape(d, 2, d, 2))


def probe_populations(state: np.ndarray) -> np.ndarray:
    """Diagonal of the reduced probe state (Jz populations) of a composite state.

    Works for vectors and density matrices and does not normalize.
    """
    state = np.asarray(state)
    if state.ndim == 1:
        return np.sum(np.abs(state.reshape(-1, 2)) ** 2, axis=1)
    return np.real(np.diagonal(partial_trace_ancilla(state)))
