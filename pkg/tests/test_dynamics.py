import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hamiltonian
from oracles import propagator_expm
from quadtomo.core import QuadraticHamiltonian
from quadtomo.diag import diagonalize
from quadtomo.dynamics import (
    InitialExpectations,
    MeasurementRecord,
    default_times,
    difference_signal,
    energy_scale,
    evolve_expectations,
    propagator,
    sign_function,
    simulate_record,
    site_series,
)
from quadtomo.errors import MismatchedRecords, ParseError


def test_sign_function_quadrants():
    s = sign_function(2, -1)
    assert np.array_equal(s, [[1, 1, -1, -1], [1, 1, -1, -1], [-1, -1, 1, 1], [-1, -1, 1, 1]])
    assert np.all(sign_function(3, 1) == 1)


def test_initial_expectations_conjugate_consistency():
    x = InitialExpectations.from_annihilators([1 + 2j, 0.5])
    assert np.allclose(x.alpha0, [1 + 2j, 0.5, 1 - 2j, 0.5])
    with pytest.raises(ValueError):
        InitialExpectations(np.array([1j, 1j]))
    y = x.with_site(2, 0.3j)
    assert y.alpha0[1] == 0.3j and y.alpha0[3] == -0.3j


def test_single_mode_rotates():
    w = 1.3
    d = diagonalize(QuadraticHamiltonian([[w]], [[0]]))
    x0 = InitialExpectations.from_annihilators([0.4 - 0.2j])
    for t in (0.0, 0.7, 5.0):
        assert evolve_expectations(d, x0, t)[0] == pytest.approx(np.exp(-1j * w * t) * (0.4 - 0.2j))


def test_two_site_hopping_closed_form():
    J = 0.9
    # a small uniform field keeps both energies away from zero
    d = diagonalize(QuadraticHamiltonian([[0.5, J], [J, 0.5]], np.zeros((2, 2))))
    x0 = InitialExpectations(np.array([1, 0, 1, 0], dtype=complex))
    t = np.linspace(0, 4, 9)
    # e^{-iAt} = e^{-i t/2} (cos Jt - i sin Jt sigma_x)
    expected = np.exp(-0.5j * t) * np.cos(J * t)
    assert np.allclose(site_series(d, x0, 1, t), expected, atol=1e-12)


@pytest.mark.parametrize("stats", ["fermion", "boson"])
def test_identity_at_time_zero(stats, rng):
    h = random_hamiltonian(5, stats, rng)
    d = diagonalize(h)
    x0 = InitialExpectations.random(5, rng)
    assert np.allclose(evolve_expectations(d, x0, 0.0), x0.alpha0, atol=1e-10)


@given(st.integers(1, 16), st.integers(0, 2**31 - 1), st.sampled_from(["fermion", "boson"]), st.floats(0.0, 3.0))
def test_propagator_matches_matrix_exponential(n, seed, stats, t):
    rng = np.random.default_rng(seed)
    h = random_hamiltonian(n, stats, rng)
    try:
        d = diagonalize(h)
    except Exception:
        return
    assert np.abs(propagator(d, t) - propagator_expm(h.A, h.B, h.eps, t)).max() <= 1e-9 * max(1, np.abs(h.A).max())


@given(st.integers(1, 8), st.integers(0, 2**31 - 1), st.floats(0.0, 20.0))
def test_fermion_propagator_bounded(n, seed, t):
    h = random_hamiltonian(n, "fermion", np.random.default_rng(seed))
    p = propagator(diagonalize(h), t)
    assert np.abs(p).max() <= 1 + 1e-10
    assert np.allclose(p @ p.conj().T, np.eye(2 * n), atol=1e-9)


def test_evolution_preserves_conjugate_pairs(rng):
    h = random_hamiltonian(4, "boson", rng)
    x = evolve_expectations(diagonalize(h), InitialExpectations.random(4, rng), 1.7)
    assert np.allclose(x[4:], x[:4].conj(), atol=1e-12)


def test_simulate_single_mode_no_noise():
    w = 0.8
    h = QuadraticHamiltonian([[w]], [[0]])
    t = np.linspace(0, 3, 11)
    rec = simulate_record(h, InitialExpectations.from_annihilators([0]), 1, 1.0, 1, t)
    assert np.allclose(rec.values, np.exp(-1j * w * t))


def test_simulate_is_deterministic(rng):
    h = random_hamiltonian(3, "fermion", rng)
    bg = InitialExpectations.random(3, rng)
    t = np.linspace(0, 5, 50)
    a = simulate_record(h, bg, 1, 0.5, 1, t, noise_sigma=1e-3, seed=42)
    b = simulate_record(h, bg, 1, 0.5, 1, t, noise_sigma=1e-3, seed=42)
    assert np.array_equal(a.values, b.values)


def test_noise_level(rng):
    h = random_hamiltonian(3, "fermion", rng)
    bg = InitialExpectations.random(3, rng)
    t = np.linspace(0, 50, 1000)
    clean = simulate_record(h, bg, 1, 1.0, 1, t)
    noisy = simulate_record(h, bg, 1, 1.0, 1, t, noise_sigma=1e-3, seed=7)
    rms = np.sqrt(np.mean(np.abs(noisy.values - clean.values) ** 2))
    assert abs(rms - 1e-3 * np.sqrt(2)) <= 0.2 * 1e-3 * np.sqrt(2)


def test_difference_of_single_mode():
    w = 2.1
    h = QuadraticHamiltonian([[w]], [[0]])
    t = np.linspace(0, 2, 7)
    bg = InitialExpectations.from_annihilators([0.3j])
    dc, series = difference_signal(simulate_record(h, bg, 1, 1, 1, t), simulate_record(h, bg, 1, 0, 1, t))
    assert dc == 1
    assert np.allclose(series, np.exp(-1j * w * t))


@pytest.mark.parametrize("stats", ["fermion", "boson"])
def test_difference_is_background_free(stats, rng):
    h = random_hamiltonian(4, stats, rng)
    d = diagonalize(h)
    t = np.linspace(0, 10, 80)
    out = []
    for _ in range(2):
        bg = InitialExpectations.random(4, rng)
        out.append(difference_signal(
            simulate_record(h, bg, 1, 0.7 + 0.1j, 1, t, decomposition=d),
            simulate_record(h, bg, 1, -0.2j, 1, t, decomposition=d),
        )[1])
    assert np.abs(out[0] - out[1]).max() <= 1e-12


@pytest.mark.parametrize("stats", ["fermion", "boson"])
def test_difference_matches_two_term_expansion(stats, rng):
    h = random_hamiltonian(3, stats, rng)
    d = diagonalize(h)
    n, eps = 3, h.eps
    V, E = d.eigvecs, d.energies
    t = np.linspace(0, 6, 40)
    dc = 0.4 - 0.3j
    bg = InitialExpectations.random(n, rng)
    _, series = difference_signal(
        simulate_record(h, bg, 1, dc, 1, t, decomposition=d), simulate_record(h, bg, 1, 0, 1, t, decomposition=d)
    )
    s = sign_function(n, eps)
    phase = np.exp(-1j * np.outer(t, E))
    expected = phase @ (dc * s[0] * np.abs(V[0]) ** 2 + np.conj(dc) * s[n] * V[0] * V[n].conj())
    assert np.allclose(series, expected, atol=1e-12)


def test_mismatched_records():
    h = QuadraticHamiltonian([[1.0]], [[0]])
    bg = InitialExpectations.from_annihilators([0])
    a = simulate_record(h, bg, 1, 1, 1, np.linspace(0, 1, 5))
    b = simulate_record(h, bg, 1, 0, 1, np.linspace(0, 2, 5))
    with pytest.raises(MismatchedRecords):
        difference_signal(a, b)


def test_record_validation_and_json():
    with pytest.raises(ValueError):
        MeasurementRecord(1, 1, 0, [0, 0], [0, 0])
    with pytest.raises(ValueError):
        MeasurementRecord(1, 1, 0, [0, 1], [0, 0], noise_sigma=-1)
    rec = MeasurementRecord(1, 1, 1j, [0.0, 0.5], [1, 1j], 0.0, 3)
    back = MeasurementRecord.from_dict(rec.to_dict())
    assert np.array_equal(back.values, rec.values) and back.c == 1j and back.seed == 3
    assert set(rec.to_dict()) == {"site", "init_site", "c", "noise_sigma", "times", "values", "seed"}
    with pytest.raises(ParseError):
        MeasurementRecord.from_dict({"site": 1})


def test_default_times_budget(rng):
    h = random_hamiltonian(4, "fermion", rng)
    e = energy_scale(h)
    # Gershgorin bound is never below the spectral radius
    assert e >= np.abs(diagonalize(h).energies).max() - 1e-12
    t = default_times(4, e)
    assert t[0] == 0 and t[-1] == pytest.approx(4 * 16 / e)
    assert t.size >= 8 * 8
    assert np.diff(t).max() * e <= np.pi / 2 + 1e-12
    with pytest.raises(ValueError):
        default_times(4, e, kappa=0)
    with pytest.raises(ValueError):
        default_times(4, e, samples_per_mode=1)
