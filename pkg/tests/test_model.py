import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fourwell.fock import enumerate_basis, number_operator
from fourwell.model import (
    NU,
    ExtendedParams,
    ModelParams,
    all_pairs_hopping,
    apex_hopping,
    charge,
    collective_bilinear,
    commutator_norm,
    current,
    extended_hamiltonian,
    mode_transform,
    nu_power,
    operator_norm,
    reduced_hamiltonian,
)

params = st.builds(
    ModelParams,
    u=st.floats(0.1, 20.0),
    j=st.floats(0.1, 20.0),
    zeta=st.floats(-5.0, 5.0),
    total_n=st.integers(1, 7),
)


def _permutation(basis, order):
    """Matrix P with P|n> = |n permuted by ``order``> (0-based mode map)."""
    perm = np.zeros((basis.dim, basis.dim))
    for i, occ in enumerate(basis):
        new = [0] * 4
        for src, dst in enumerate(order):
            new[dst] = occ[src]
        perm[basis.position(new), i] = 1.0
    return perm


def test_cube_root_of_unity():
    assert abs(NU**3 - 1) < 1e-15
    assert abs(1 + NU + NU.conjugate()) < 1e-15
    assert nu_power(-1) == nu_power(2) == NU.conjugate()


def test_mode_transform_unitary():
    t = mode_transform()
    assert np.allclose(t @ t.conj().T, np.eye(3), atol=1e-15)
    assert np.allclose(t[0], np.ones(3) / np.sqrt(3))


def test_collective_modes_resolve_outer_number():
    basis = enumerate_basis(5)
    total = collective_bilinear(1, 1, basis) + charge(2, basis) + charge(3, basis)
    outer = number_operator(basis, 1) + number_operator(basis, 2) + number_operator(basis, 3)
    assert np.allclose(total.matrix, outer.matrix, atol=1e-13)


@given(st.integers(1, 8))
def test_current_is_charge_difference(n):
    basis = enumerate_basis(n)
    assert operator_norm(current(basis) - (charge(3, basis) - charge(2, basis))) < 1e-12
    assert current(basis).hermitian


@given(params)
def test_hamiltonian_hermitian_and_real_at_rest(p):
    h = reduced_hamiltonian(p, enumerate_basis(p.total_n))
    assert h.hermitian and h.hermiticity_defect() < 1e-12
    h0 = reduced_hamiltonian(p.with_zeta(0.0), enumerate_basis(p.total_n))
    assert h0.is_real()


@given(params)
def test_charges_conserved_for_any_couplings(p):
    basis = enumerate_basis(p.total_n)
    h = reduced_hamiltonian(p, basis)
    scale = max(1.0, operator_norm(h))
    for k in (2, 3):
        assert commutator_norm(h, charge(k, basis)) < 1e-12 * scale


@given(params)
def test_cyclic_relabelling_symmetry(p):
    basis = enumerate_basis(p.total_n)
    h = reduced_hamiltonian(p, basis).matrix
    perm = _permutation(basis, (1, 2, 0, 3))
    assert np.allclose(perm @ h @ perm.T, h, atol=1e-12)


@given(params)
def test_reflection_reverses_rotation(p):
    """Swapping outer wells 2 and 3 maps zeta to -zeta."""
    basis = enumerate_basis(p.total_n)
    perm = _permutation(basis, (0, 2, 1, 3))
    h = reduced_hamiltonian(p, basis).matrix
    h_rev = reduced_hamiltonian(p.with_zeta(-p.zeta), basis).matrix
    assert np.allclose(perm @ h @ perm.T, h_rev, atol=1e-12)


def test_diagonal_is_apex_imbalance():
    basis = enumerate_basis(6)
    h = reduced_hamiltonian(ModelParams(u=2.0, j=1.0, zeta=0.3, total_n=6), basis)
    n4 = basis.occupation(4)
    assert np.allclose(np.diag(h.matrix).real, 2.0 * (6 - 2 * n4) ** 2)


def test_charge_spectrum_is_integer():
    basis = enumerate_basis(5)
    w = np.linalg.eigvalsh(charge(2, basis).matrix)
    assert np.allclose(w, np.round(w), atol=1e-12)
    assert set(np.round(w).astype(int)) == set(range(6))


def test_rotation_breaks_extra_charges():
    basis = enumerate_basis(6)
    h = reduced_hamiltonian(ModelParams(6.01, 8.16, 0.816, 6), basis)
    assert commutator_norm(h, collective_bilinear(2, 3, basis)) > 1e-3 * operator_norm(h)


def test_argument_validation():
    basis = enumerate_basis(3)
    with pytest.raises(ValueError):
        ModelParams(1.0, 1.0, 0.0, 0)
    with pytest.raises(ValueError):
        reduced_hamiltonian(ModelParams(1.0, 1.0, 0.0, 4), basis)
    with pytest.raises(ValueError):
        charge(1, basis)
    with pytest.raises(ValueError):
        collective_bilinear(0, 2, basis)
    with pytest.raises(ValueError):
        ExtendedParams(1.0, 1.0, 0.0, np.eye(4))
    asym = apex_hopping(1.0)
    asym[0, 1] = 0.5
    with pytest.raises(ValueError):
        ExtendedParams(1.0, 1.0, 0.0, asym)
    with pytest.raises(ValueError):
        commutator_norm(charge(2, basis), charge(2, enumerate_basis(4)))


def test_hopping_matrices():
    assert np.count_nonzero(apex_hopping(2.0)) == 6
    assert np.count_nonzero(all_pairs_hopping(2.0)) == 12


@given(st.integers(1, 6), st.floats(0.5, 30.0), st.floats(0.1, 10.0), st.floats(-2.0, 2.0))
def test_integrable_point_reduces(n, u0, j, offset):
    basis = enumerate_basis(n)
    ext = ExtendedParams(u0=u0, u12=u0, u14=0.0, hop=apex_hopping(j), offsets=(offset,) * 4)
    diff = (extended_hamiltonian(ext, basis) - reduced_hamiltonian(ModelParams(u0 / 4, j, 0.0, n), basis)).matrix
    const = diff[0, 0]
    assert np.allclose(diff, const * np.eye(basis.dim), atol=1e-10 * max(1.0, abs(const)))


def test_generic_extended_model_breaks_integrability():
    basis = enumerate_basis(5)
    ext = ExtendedParams(u0=24.0, u12=3.0, u14=1.0, hop=all_pairs_hopping(2.0))
    h = extended_hamiltonian(ext, basis)
    assert commutator_norm(h, charge(2, basis)) > 1e-3
