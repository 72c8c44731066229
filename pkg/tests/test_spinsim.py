import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coiltrap.constants import H_PLANCK, HBAR
from coiltrap.coupling import LATERAL, CouplingConfig, coupling_matrix
from coiltrap.lattice import apply_defects, make_line, make_ring, make_square
from coiltrap.spinsim import (
    EXACT, MAX_QUBITS, HamiltonianSpec, ResourceError, SpinState, Trotter,
    correlation_falloff_check, evolve, gamma_sweep, ground_state, ideal_cluster_state,
    make_cluster_state, nearest_neighbor_mask, observables, two_spin_phase,
)

import oracles

KHZ = H_PLANCK * 1e3


def random_ham(rng, n, with_local=False, with_xx=False):
    J = rng.normal(size=(n, n)) * KHZ
    J = J + J.T
    lf = [((rng.normal(), rng.normal(), rng.normal()), rng.normal() * KHZ) if with_local and k % 2 else None
          for k in range(n)]
    Jxx = None
    if with_xx:
        Jxx = rng.normal(size=(n, n)) * KHZ
        Jxx = Jxx + Jxx.T
    return HamiltonianSpec(J, 0.7 * KHZ, lf if with_local else [], Jxx)


def random_state(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return SpinState(v / np.linalg.norm(v), n)


def test_basis_ordering():
    s = SpinState.basis([1, 0, 0])  # site 0 down
    assert s.amplitudes[1] == 1.0
    ob = observables(s)
    np.testing.assert_array_equal(ob.sz, [-1.0, 1.0, 1.0])
    assert ob.magnetization == 1.0


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_sparse_matches_kron_oracle(rng, n):
    ham = random_ham(rng, n, with_local=True, with_xx=n > 1)
    fields = ham.field_vectors() - np.array([ham.B_f, 0, 0])
    ref = oracles.kron_hamiltonian(ham.J, ham.B_f, fields, ham.J_xx)
    np.testing.assert_allclose(ham.dense(), ref, rtol=0, atol=1e-12 * np.abs(ref).max())


def test_rabi_oscillation():
    B = 2.0 * KHZ
    ham = HamiltonianSpec(np.zeros((1, 1)), B)
    for t in np.linspace(0, 3e-3, 13):
        sz = observables(evolve(SpinState.all_up(1), ham, t)).sz[0]
        assert sz == pytest.approx(math.cos(2 * B * t / HBAR), abs=1e-12)


def test_two_spin_phase_oracle():
    Jhz = 1.3e3
    ham = HamiltonianSpec.from_hertz([[0, Jhz], [Jhz, 0]])
    J = Jhz * H_PLANCK
    for jt in np.linspace(0, 4 * math.pi, 41):
        t = jt * HBAR / J
        psi = evolve(SpinState.plus(2), ham, t).amplitudes
        rel = psi[0] / psi[1]  # |up up> over |down up>
        assert abs(rel - np.exp(-2j * jt)) < 1e-10
        assert abs(rel - two_spin_phase(J, t)) < 1e-10


def test_trotter_second_order_slope(rng):
    n = 8
    ham = random_ham(rng, n, with_local=True)
    psi0 = random_state(rng, n)
    t = 0.2 / (np.abs(ham.J).max() / HBAR)
    exact = evolve(psi0, ham, t).amplitudes
    dts = t / np.array([8, 16, 32, 64, 128])
    err = [np.linalg.norm(evolve(psi0, ham, t, Trotter(dt)).amplitudes - exact) for dt in dts]
    slope = np.polyfit(np.log(dts), np.log(err), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.1)


def test_trotter_handles_xx_terms(rng):
    ham = random_ham(rng, 4, with_xx=True)
    psi0 = random_state(rng, 4)
    t = 0.1 / (np.abs(ham.J).max() / HBAR)
    exact = evolve(psi0, ham, t).amplitudes
    e1 = np.linalg.norm(evolve(psi0, ham, t, Trotter(t / 20)).amplitudes - exact)
    e2 = np.linalg.norm(evolve(psi0, ham, t, Trotter(t / 40)).amplitudes - exact)
    assert e1 / e2 == pytest.approx(4.0, rel=0.1)


@pytest.mark.parametrize("n", [4, 8, 11])
def test_norm_and_energy_conservation(rng, n):
    ham = random_ham(rng, n, with_local=True)
    psi0 = random_state(rng, n)
    E0 = ham.expectation(psi0)
    psi = psi0
    for _ in range(5):
        psi = evolve(psi, ham, 1e-4)
        assert abs(psi.norm - 1.0) < 1e-10
        assert abs(ham.expectation(psi) - E0) < 1e-9 * abs(E0)
    trot = evolve(psi0, ham, 1e-4, Trotter(1e-6))
    assert abs(trot.norm - 1.0) < 1e-10


@given(st.floats(0, 2 * math.pi))
@settings(max_examples=20)
def test_observables_invariant_under_global_phase(phi):
    rng = np.random.default_rng(7)
    s = random_state(rng, 4)
    a, b = observables(s), observables(SpinState(np.exp(1j * phi) * s.amplitudes, 4))
    for f in ("sx", "sy", "sz", "zz"):
        np.testing.assert_allclose(getattr(a, f), getattr(b, f), atol=1e-14)


def test_plus_state_observables():
    ob = observables(SpinState.plus(3))
    np.testing.assert_allclose(ob.sx, 1.0)
    np.testing.assert_allclose(ob.sz, 0.0, atol=1e-15)


def test_local_field_from_pinned_site():
    lay = apply_defects(make_line(3, 10e-6), pins=[(0, (1, 0, 0), 10 * KHZ)])
    cm = coupling_matrix(lay, 1e-21, CouplingConfig(mode_orientation=LATERAL))
    ham = HamiltonianSpec.from_coupling_matrix(cm, B_f_hz=1e3, layout=lay)
    h = ham.field_vectors()
    assert h[0, 0] == pytest.approx(11 * KHZ) and h[1, 0] == pytest.approx(KHZ)


def test_ground_state_limits():
    K = coupling_matrix(make_ring(6, 10e-6), 1e-21, CouplingConfig()).J
    rows = gamma_sweep(K, [0.0, -50.0])
    assert rows[0]["mean_sx"] == pytest.approx(1.0, abs=1e-12)
    # strong antiferromagnetic coupling: Neel order, <Z_i Z_j> -> -1 on bonds
    assert rows[1]["nn_zz"] == pytest.approx(-1.0, abs=1e-3)
    assert abs(rows[1]["mean_sz"]) < 1e-10  # symmetric combination of the two Neel states


def test_degenerate_ground_state_is_flip_symmetric():
    ham = HamiltonianSpec(np.array([[0, 1.0], [1.0, 0]]) * KHZ, 0.0)
    st, e0 = ground_state(ham)
    assert e0 == pytest.approx(-KHZ)
    np.testing.assert_allclose(np.abs(st.amplitudes), [0, 2**-0.5, 2**-0.5, 0], atol=1e-12)


def test_gamma_sweep_crossover_ring8():
    K = coupling_matrix(make_ring(8, 10e-6), 1e-21, CouplingConfig(mode_orientation="Vertical")).J
    g = np.linspace(-4, 4, 81)
    rows = gamma_sweep(K, g)
    sx = np.array([r["mean_sx"] for r in rows])
    for side in (g >= 0, g <= 0):
        order = np.argsort(np.abs(g[side]))
        ag, s = np.abs(g[side])[order], sx[side][order]
        assert np.all(np.diff(s) < 0)
        slope = np.diff(s) / np.diff(ag)
        mid = 0.5 * (ag[1:] + ag[:-1])
        assert 0.5 <= mid[np.argmin(slope)] <= 2.0


def test_gamma_sweep_threads_preserve_rows():
    K = coupling_matrix(make_ring(5, 10e-6), 1e-21, CouplingConfig()).J
    g = np.linspace(-2, 2, 9)
    assert gamma_sweep(K, g, threads=3) == gamma_sweep(K, g)
    ev = gamma_sweep(K, g[:3], mode="evolve", t=1e-4)
    assert len(ev) == 3
    with pytest.raises(ValueError):
        gamma_sweep(K, g, mode="evolve")
    with pytest.raises(ValueError):
        gamma_sweep(K, g, mode="anneal")


@pytest.mark.parametrize("n", [2, 3])
def test_ideal_cluster_matches_cz_circuit(n):
    edges = [(k, k + 1) for k in range(n - 1)]
    A = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        A[i, j] = A[j, i] = True
    ref = oracles.cz_circuit_state(n, edges)
    np.testing.assert_allclose(ideal_cluster_state(A).amplitudes, ref, atol=1e-15)
    J = coupling_matrix(make_line(n, 10e-6), 1e-21, CouplingConfig())
    res = make_cluster_state(make_line(n, 10e-6), J)
    assert abs(abs(np.vdot(res.state.amplitudes, ref)) - 1.0) < 1e-12


@pytest.mark.parametrize("maker,n", [(make_line, 2), (make_line, 4), (make_line, 6),
                                     (make_ring, 3), (make_ring, 4), (make_ring, 6)])
@pytest.mark.parametrize("mode", ["Lateral", "Vertical"])
def test_nn_cluster_fidelity(maker, n, mode):
    lay = maker(n, 10e-6)
    cm = coupling_matrix(lay, 1e-21, CouplingConfig(mode_orientation=mode))
    assert make_cluster_state(lay, cm).fidelity > 1 - 1e-10


def test_long_range_cluster_regression():
    lay = make_line(6, 10e-6)
    cm = coupling_matrix(lay, 1e-21, CouplingConfig())
    res = make_cluster_state(lay, cm, include_long_range=True)
    assert res.fidelity == pytest.approx(0.8002370804688569, rel=1e-12)


def test_nearest_neighbor_mask():
    cm = coupling_matrix(make_square(3, 3, 10e-6), 1e-21, CouplingConfig())
    mask = nearest_neighbor_mask(cm)
    assert mask.sum() == 2 * 12
    np.testing.assert_array_equal(mask, nearest_neighbor_mask(cm.J))


def test_falloff_check():
    lay = make_line(8, 10e-6)
    cm = coupling_matrix(lay, 1e-21, CouplingConfig())
    for D, expect in [(1, True), (2, True), (3, False)]:
        fit = correlation_falloff_check(cm, D)
        assert fit.passes is expect
        assert fit.exponent == pytest.approx(3.0, abs=1e-9)
    inv = np.where(np.eye(8, dtype=bool), 0.0, 1.0 / np.where(np.eye(8) > 0, 1.0, cm.distances()))
    assert not correlation_falloff_check(inv, 2, distances=cm.distances()).passes


def test_falloff_needs_four_distances():
    cm = coupling_matrix(make_line(4, 10e-6), 1e-21, CouplingConfig())
    with pytest.raises(ValueError):
        correlation_falloff_check(cm, 1)
    with pytest.raises(ValueError):
        correlation_falloff_check(cm.J, 1)


def test_resource_guard():
    with pytest.raises(ResourceError):
        SpinState.plus(MAX_QUBITS + 1)
    with pytest.raises(ResourceError):
        HamiltonianSpec(np.zeros((15, 15)))


def test_validation_errors():
    with pytest.raises(ValueError):
        HamiltonianSpec(np.array([[0, 1.0], [2.0, 0]]))
    with pytest.raises(ValueError):
        evolve(SpinState.plus(2), HamiltonianSpec(np.zeros((3, 3))), 1.0)
    with pytest.raises(ValueError):
        evolve(SpinState.plus(2), HamiltonianSpec(np.zeros((2, 2))), 1.0, method="rk4")
    with pytest.raises(ValueError):
        Trotter(0.0)


def test_state_round_trip(rng):
    s = random_state(rng, 3)
    again = SpinState.from_dict(s.to_dict())
    np.testing.assert_array_equal(again.amplitudes, s.amplitudes)


def test_exact_sparse_path_above_dense_limit(rng):
    ham = random_ham(rng, 11)
    psi0 = random_state(rng, 11)
    t = 2e-5
    a = evolve(psi0, ham, t, EXACT).amplitudes
    b = evolve(psi0, ham, t, Trotter(t / 400)).amplitudes
    assert np.linalg.norm(a - b) < 1e-3
