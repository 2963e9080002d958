import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ancilla_metrology import spin
from ancilla_metrology.errors import ContractViolation, DomainError, InvalidDimensionError

Ns = st.integers(min_value=1, max_value=24)


def comm(a, b):
    return a @ b - b @ a


class TestSpinDimension:
    def test_fields(self):
        d = spin.SpinDimension(3)
        assert (d.two_j, d.j, d.d) == (3, 1.5, 4)
        np.testing.assert_array_equal(d.m_values, [1.5, 0.5, -0.5, -1.5])

    @pytest.mark.parametrize("bad", [0, -2, 1.5, "3", True])
    def test_rejects(self, bad):
        with pytest.raises(InvalidDimensionError):
            spin.SpinDimension(bad)

    def test_index(self):
        d = spin.SpinDimension(4)
        assert [d.index(m) for m in (2, 1, 0, -1, -2)] == [0, 1, 2, 3, 4]
        for bad in (3, 0.5, 2.5):
            with pytest.raises(DomainError):
                d.index(bad)


class TestCollectiveOperators:
    def test_single_spin_z(self):
        np.testing.assert_array_equal(spin.collective_operator(1, "z"), np.diag([0.5, -0.5]))

    def test_spin_one_x(self):
        jx = spin.collective_operator(2, "x")
        assert np.allclose(np.diag(jx, 1), 1 / math.sqrt(2))
        assert np.allclose(np.diag(jx, -1), 1 / math.sqrt(2))
        assert np.count_nonzero(np.abs(jx) > 1e-15) == 4

    def test_n4_y_commutator(self):
        jx, jy, jz = (spin.collective_operator(4, a) for a in "xyz")
        assert np.max(np.abs(jy - jy.conj().T)) == 0
        assert np.max(np.abs(comm(jx, jy) - 1j * jz)) < 1e-12

    @given(Ns)
    def test_algebra(self, N):
        jx, jy, jz = (spin.collective_operator(N, a) for a in "xyz")
        for a, b, c in ((jx, jy, jz), (jy, jz, jx), (jz, jx, jy)):
            assert np.max(np.abs(comm(a, b) - 1j * c)) < 1e-11
        j = N / 2
        casimir = jx @ jx + jy @ jy + jz @ jz
        assert np.max(np.abs(casimir - j * (j + 1) * np.eye(N + 1))) < 1e-10

    def test_algebra_n64(self):
        jx, jy, jz = (spin.collective_operator(64, a) for a in "xyz")
        assert np.max(np.abs(comm(jx, jy) - 1j * jz)) < 1e-11

    def test_read_only(self):
        with pytest.raises(ValueError):
            spin.collective_operator(3, "x")[0, 0] = 1

    def test_bad_axis(self):
        with pytest.raises(DomainError):
            spin.collective_operator(2, "w")


class TestXBasis:
    def test_qubit(self):
        np.testing.assert_allclose(spin.x_basis_eigenvector(1, 0.5), [1 / math.sqrt(2)] * 2, atol=1e-15)

    def test_spin_one_middle(self):
        v = spin.x_basis_eigenvector(2, 0)
        np.testing.assert_allclose(v, [1 / math.sqrt(2), 0, -1 / math.sqrt(2)], atol=1e-14)

    def test_n3_bottom(self):
        v = spin.x_basis_eigenvector(3, -1.5)
        jx = spin.collective_operator(3, "x")
        assert np.linalg.norm(jx @ v + 1.5 * v) < 1e-10

    @given(Ns)
    def test_eigen_and_orthonormal(self, N):
        V = spin.x_basis(N)
        jx = spin.collective_operator(N, "x")
        m = spin.SpinDimension(N).m_values
        assert np.max(np.abs(jx @ V - V * m)) < 1e-10
        assert np.max(np.abs(V.conj().T @ V - np.eye(N + 1))) < 1e-10

    @pytest.mark.parametrize("N", range(1, 13))
    def test_phase_convention(self, N):
        V = spin.x_basis(N)
        # |j,j> amplitude real positive except for m = -j, which carries (-1)^N
        top = V[0]
        assert np.all(np.abs(top.imag) < 1e-12)
        assert np.all(top[:-1].real > 0)
        assert np.sign(top[-1].real) == (-1) ** N

    @pytest.mark.parametrize("N", range(1, 13))
    def test_extremal_overlap_identity(self, N):
        # <j,m|j,-j>_x = (-i)^(2(j+m)) <j,m|j,j>_x
        j = N / 2
        lo, hi = spin.x_basis_eigenvector(N, -j), spin.x_basis_eigenvector(N, j)
        m = spin.SpinDimension(N).m_values
        phase = (-1j) ** np.rint(2 * (j + m)).astype(int)
        assert np.max(np.abs(lo - phase * hi)) < 1e-10

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            spin.x_basis_eigenvector(2, 2)


class TestOptFrame:
    def test_zero_angle_is_jx(self):
        np.testing.assert_array_equal(spin.opt_operator(3, 0, 0, 1.0), spin.collective_operator(3, "x"))

    def test_quarter_rotation(self):
        op = spin.opt_operator(3, 1.0, 0.0, math.pi / 2)
        assert np.max(np.abs(op + spin.collective_operator(3, "y"))) < 1e-15

    @pytest.mark.parametrize("N", [1, 2, 5])
    def test_conjugation_route(self, N):
        a = (10 + 1) * math.pi / 2
        jz = spin.collective_operator(N, "z")
        u = spin.hermitian_propagator(jz, -a)
        conj = u @ spin.collective_operator(N, "x") @ u.conj().T
        assert np.max(np.abs(conj - spin.opt_operator(N, 10, 1, math.pi / 2))) < 1e-10

    def test_eigenvector(self):
        v = spin.opt_eigenvector(2, 1, 10, 1, math.pi / 2)
        op = spin.opt_operator(2, 10, 1, math.pi / 2)
        assert np.linalg.norm(op @ v - v) < 1e-10
        np.testing.assert_allclose(np.vdot(v, v), 1)

    def test_zero_angle_matches_x_basis(self):
        np.testing.assert_allclose(spin.opt_eigenvector(4, 2, 0, 0, 3.0), spin.x_basis_eigenvector(4, 2))

    @given(Ns, st.floats(0, 10), st.floats(0, 3))
    def test_basis_diagonalizes(self, N, wp, t):
        B = spin.opt_basis(N, wp, 1.0, t)
        D = B.conj().T @ spin.opt_operator(N, wp, 1.0, t) @ B
        assert np.max(np.abs(D - np.diag(spin.SpinDimension(N).m_values))) < 1e-9


class TestPropagators:
    def test_identity_at_zero(self):
        h = np.array([[1, 2j], [-2j, 3]])
        np.testing.assert_allclose(spin.hermitian_propagator(h, 0), np.eye(2), atol=1e-15)

    def test_jz_pi(self):
        u = spin.hermitian_propagator(spin.collective_operator(2, "z"), math.pi)
        np.testing.assert_allclose(u, np.diag([np.exp(-1j * math.pi), 1, np.exp(1j * math.pi)]))

    def test_non_hermitian(self):
        with pytest.raises(ContractViolation):
            spin.hermitian_propagator(np.array([[0, 1], [0, 0]]), 1.0)

    def test_unitary_full_hamiltonian(self):
        from ancilla_metrology.protocol import ProtocolParams, full_hamiltonian
        h = full_hamiltonian(ProtocolParams(3, 10, 5, 1, 1.0))
        u = spin.hermitian_propagator(h, 0.7)
        assert np.max(np.abs(u.conj().T @ u - np.eye(8))) < 1e-11

    @given(st.integers(1, 8), st.floats(-3, 3), st.floats(-3, 3))
    @settings(max_examples=30)
    def test_group_property(self, N, t1, t2):
        h = spin.opt_operator(N, 2.0, 1.0, 0.3) + 0.5 * spin.collective_operator(N, "z")
        lhs = spin.hermitian_propagator(h, t1) @ spin.hermitian_propagator(h, t2)
        assert np.max(np.abs(lhs - spin.hermitian_propagator(h, t1 + t2))) < 1e-10

    def test_rotation_identities(self):
        np.testing.assert_allclose(spin.rotate_x(4, 0), np.eye(5), atol=1e-14)
        np.testing.assert_allclose(spin.rotate_x(4, 2 * math.pi), np.eye(5), atol=1e-12)
        np.testing.assert_allclose(spin.rotate_x(3, 2 * math.pi), -np.eye(4), atol=1e-12)
        np.testing.assert_allclose(spin.rotate_x(1, math.pi), -1j * spin.SIGMA_X, atol=1e-14)


class TestComposite:
    def test_tensor_identity(self):
        np.testing.assert_array_equal(spin.tensor(np.eye(3), np.eye(2)), np.eye(6))

    def test_tensor_diag(self):
        t = spin.tensor(spin.collective_operator(1, "z"), spin.SIGMA_Z)
        # sigma_z has eigenvalues +-1, so the products are +-1/2
        np.testing.assert_allclose(np.diag(t), [0.5, -0.5, -0.5, 0.5])

    def test_tensor_shape_error(self):
        with pytest.raises(InvalidDimensionError):
            spin.tensor(np.eye(2), np.eye(3))

    @given(st.integers(0, 2 ** 31))
    @settings(max_examples=20)
    def test_tensor_trace(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        a, b = a + a.conj().T, b + b.conj().T
        assert abs(np.trace(spin.tensor(a, b)) - np.trace(a) * np.trace(b)) < 1e-10

    def test_partial_trace_product(self):
        rho = np.diag([0.2, 0.3, 0.5]).astype(complex)
        plus = np.outer(spin.KET_PLUS, spin.KET_PLUS)
        np.testing.assert_allclose(spin.partial_trace_ancilla(np.kron(rho, plus)), rho, atol=1e-15)

    def test_partial_trace_bell(self):
        bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
        np.testing.assert_allclose(spin.partial_trace_ancilla(np.outer(bell, bell)), np.eye(2) / 2)

    def test_partial_trace_preserves_trace(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        rho = a @ a.conj().T
        assert abs(np.trace(spin.partial_trace_ancilla(rho)) - np.trace(rho)) < 1e-12

    def test_partial_trace_bad_shape(self):
        with pytest.raises(InvalidDimensionError):
            spin.partial_trace_ancilla(np.eye(3))

    def test_populations_vector_and_density(self):
        v = np.arange(6, dtype=complex)
        np.testing.assert_allclose(spin.probe_populations(v), spin.probe_populations(np.outer(v, v.conj())))
