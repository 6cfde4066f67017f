import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from aaqip.core import (I2, SX, SY, SZ, DimensionError, PulseSpec, SpinSystem,
                        build_hamiltonian, compose_pulse_program, embed, evolve,
                        free_evolution, is_unitary, operator_on, partial_trace,
                        permute_spins, state_fidelity, thermal_deviation)

from conftest import random_deviation, random_unitary

THREE = SpinSystem([-3012.5, 1210.0, 4420.0],
                   [[0, 69.8, 47.5], [69.8, 0, -128.3], [47.5, -128.3, 0]])


def dense_hamiltonian(offsets, J):
    # operator-sum oracle built term by term
    n = len(offsets)
    H = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for i, nu in enumerate(offsets):
        H -= np.pi * nu * operator_on(SZ, i, n)
    for i in range(n):
        for j in range(i + 1, n):
            H += np.pi / 2 * J[i][j] * operator_on(SZ, i, n) @ operator_on(SZ, j, n)
    return H


def test_single_spin_no_offset_is_zero():
    assert np.all(build_hamiltonian(SpinSystem([0.0], [[0.0]])) == 0)


def test_two_spin_coupling_only():
    J = 209.2
    H = build_hamiltonian(SpinSystem([0.0, 0.0], [[0, J], [J, 0]]))
    assert np.allclose(H, np.pi * J / 2 * np.diag([1, -1, -1, 1]), atol=1e-12)


def test_eigenvalues_against_dense_diagonalization():
    sysm = SpinSystem([100.0, 0.0], [[0, 209.2], [209.2, 0]])
    H = build_hamiltonian(sysm)
    oracle = np.linalg.eigvalsh(dense_hamiltonian([100.0, 0.0], [[0, 209.2], [209.2, 0]]))
    assert np.allclose(np.sort(np.diag(H).real), oracle, atol=1e-9)


def test_hamiltonian_matches_operator_sum_three_spins():
    assert np.allclose(build_hamiltonian(THREE), dense_hamiltonian(THREE.offsets, THREE.couplings), atol=1e-9)


def test_spin_cap():
    with pytest.raises(ValueError, match="cap"):
        build_hamiltonian(SpinSystem(np.zeros(13), np.zeros((13, 13))))


def test_spin_system_validation():
    with pytest.raises(ValueError):
        SpinSystem([0, 0], [[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        SpinSystem([0, 0], [[1, 0], [0, 0]])
    with pytest.raises(ValueError):
        SpinSystem([0, 0], np.zeros((2, 2)), labels=("system", "bogus"))
    s = SpinSystem([0, 0], np.zeros((2, 2)))
    with pytest.raises(ValueError):
        s.offsets[0] = 1.0


def test_evolve_identity_and_bloch_rotation():
    rng = np.random.default_rng(0)
    rho = random_deviation(rng, 4)
    assert np.allclose(evolve(rho, np.eye(4)), rho)
    u = PulseSpec(np.pi / 2, "x").unitary(1)
    assert np.allclose(evolve(SZ / 2, u), -SY / 2, atol=1e-12)


def test_evolve_dimension_mismatch():
    with pytest.raises(DimensionError):
        evolve(np.zeros((4, 4)), np.eye(2))


def test_thermal_state_against_expm_oracle():
    tau1 = 3.1e-3
    rho = thermal_deviation(3)
    H = dense_hamiltonian(THREE.offsets, THREE.couplings)
    u_int = expm(-1j * H * tau1)
    x90 = expm(-1j * np.pi / 4 * sum(operator_on(SX, k, 3) for k in range(3)))
    expect = x90 @ u_int @ rho @ u_int.conj().T @ x90.conj().T
    got = evolve(rho, compose_pulse_program(THREE, [tau1, PulseSpec(np.pi / 2, "x")]))
    assert np.allclose(got, expect, atol=1e-10)


def test_empty_program_is_identity():
    assert np.array_equal(compose_pulse_program(THREE, []), np.eye(8))


def test_pi_pulse_twice_is_identity_up_to_phase():
    u = compose_pulse_program(THREE, [PulseSpec(np.pi, "x", (1,))] * 2)
    assert abs(np.trace(u.conj().T)) / 8 == pytest.approx(1.0, abs=1e-12)


def test_two_delay_program_against_product_oracle():
    t1, t2 = 6.7783e-3, 8.0182e-3
    H = dense_hamiltonian(THREE.offsets, THREE.couplings)
    x90 = expm(-1j * np.pi / 4 * sum(operator_on(SX, k, 3) for k in range(3)))
    y90 = expm(-1j * np.pi / 4 * sum(operator_on(SY, k, 3) for k in range(3)))
    oracle = y90 @ expm(-1j * H * t2) @ x90 @ expm(-1j * H * t1)
    u = compose_pulse_program(THREE, [t1, PulseSpec(np.pi / 2, "x"), t2, PulseSpec(np.pi / 2, "y")])
    assert np.max(np.abs(u @ u.conj().T - np.eye(8))) < 1e-9
    assert np.allclose(u, oracle, atol=1e-9)


def test_negative_delay_rejected():
    with pytest.raises(ValueError):
        compose_pulse_program(THREE, [-1e-6])


def test_pulse_validation():
    with pytest.raises(ValueError):
        PulseSpec(np.inf)
    with pytest.raises(ValueError):
        PulseSpec(1.0, "w")
    with pytest.raises(ValueError):
        PulseSpec(1.0, "x", ())


def test_z_pulse_and_phase_axis():
    assert np.allclose(PulseSpec(np.pi / 3, "z").single_spin(), expm(-1j * np.pi / 6 * SZ))
    assert np.allclose(PulseSpec(0.7, np.pi / 2).single_spin(), PulseSpec(0.7, "y").single_spin())
    assert np.allclose(PulseSpec(0.7, "-x").single_spin(), PulseSpec(-0.7, "x").single_spin())


def test_state_fidelity_examples():
    assert state_fidelity(SZ, SZ) == pytest.approx(1.0)
    assert state_fidelity(SZ, SX) == pytest.approx(0.0, abs=1e-15)
    assert state_fidelity(SZ, (SZ + SX) / np.sqrt(2)) == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    with pytest.raises(ValueError):
        state_fidelity(SZ, np.zeros((2, 2)))


def test_embed_and_partial_trace_round_trip():
    rng = np.random.default_rng(5)
    a = random_deviation(rng, 4)
    full = embed(a, [2, 0], 3)
    assert np.allclose(partial_trace(full, [2, 0]), 2 * a)
    assert np.allclose(embed(SX, [1], 3), operator_on(SX, 1, 3))
    assert np.allclose(permute_spins(np.kron(SX, SZ), [1, 0]), np.kron(SZ, SX))


# ------------------------------------------------------------ properties

delays = st.floats(min_value=0.0, max_value=0.05, allow_nan=False)
angles = st.floats(min_value=-2 * np.pi, max_value=2 * np.pi, allow_nan=False)
axes = st.sampled_from(["x", "y", "-x", "-y", "z"])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.one_of(delays, st.builds(PulseSpec, angles, axes)), max_size=6))
def test_programs_are_unitary(steps):
    u = compose_pulse_program(THREE, steps)
    assert np.max(np.abs(u @ u.conj().T - np.eye(8))) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_evolve_preserves_spectrum(seed):
    rng = np.random.default_rng(seed)
    rho = random_deviation(rng, 8)
    out = evolve(rho, random_unitary(rng, 8))
    assert np.allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-9)
    assert abs(np.trace(out)) < 1e-10
    assert np.max(np.abs(out - out.conj().T)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5e3, 5e3), min_size=1, max_size=4), st.data())
def test_hamiltonian_commutes_with_every_z(offsets, data):
    n = len(offsets)
    J = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            J[i, j] = J[j, i] = data.draw(st.floats(-300, 300))
    H = build_hamiltonian(SpinSystem(offsets, J))
    for k in range(n):
        z = operator_on(SZ, k, n)
        assert np.max(np.abs(H @ z - z @ H)) == 0


@settings(max_examples=30, deadline=None)
@given(st.builds(PulseSpec, angles, axes), st.builds(PulseSpec, angles, axes), delays)
def test_composition_order(a, b, tau):
    got = compose_pulse_program(THREE, [a, tau, b])
    oracle = b.unitary(3) @ free_evolution(THREE, tau) @ a.unitary(3)
    assert np.allclose(got, oracle, atol=1e-12)
    assert is_unitary(got)
