import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import lanczos_jacobi
from quadtomo.core import QuadraticHamiltonian, path_graph, validate
from quadtomo.diag import diagonalize
from quadtomo.errors import (
    BosonicMNotPositiveDefinite,
    ZeroMode,
    BrokenChain,
    DistinctCouplingBond,
    EqualCouplingBond,
    EqualCouplingEdge,
    InconsistentSurface,
    NoTransverseField,
    NotInfecting,
    UnidentifiableRegimeSwitch,
    ZeroAnchorEntry,
)
from quadtomo.generate import chain_distinct as gen_distinct
from quadtomo.generate import chain_equal as gen_equal
from quadtomo.generate import y_graph, y_graph_instance
from quadtomo.pipeline import RunConfig, estimate_surface, simulate_records
from quadtomo.reconstruct import (
    chain_auto,
    chain_distinct,
    chain_equal,
    diagonal_at_anchor,
    graph_surface,
    phases_from,
    reconstruct_graph,
)
from quadtomo.spectral import SurfaceData, build_surface, surface_from_decomposition


def exact_surface(h, sites=(1,)):
    return surface_from_decomposition(diagonalize(h), sites)


def max_err(h, r):
    return max(np.abs(h.A - r.A).max(), np.abs(h.B - r.B).max())


def mixed_chain(pattern, stats="fermion", seed=0):
    """Real chain whose bond i is equal ('e') or distinct ('d') per ``pattern``."""
    rng = np.random.default_rng(seed)
    eps = 1 if stats == "fermion" else -1
    n = len(pattern) + 1
    A = np.diag(rng.uniform(0.5, 2.0, n)).astype(complex)
    B = np.zeros((n, n), dtype=complex)
    for i, kind in enumerate(pattern):
        a = rng.uniform(0.5, 1.5)
        b = a if kind == "e" else rng.uniform(0.1, 0.4)
        A[i, i + 1] = A[i + 1, i] = a
        B[i, i + 1], B[i + 1, i] = b, -eps * b
    if eps == -1:
        B[0, 0] = 0.2
        A = A + 4 * np.eye(n)
    return QuadraticHamiltonian(A, B, stats)


# ------------------------------------------------------------ anchor diagonal

def test_anchor_diagonal_single_mode():
    s = SurfaceData(np.array([2.0, -2.0]), {1: (np.array([1.0, 0.0]), np.array([0.0, 1.0]))})
    assert diagonal_at_anchor(s) == (pytest.approx(2.0), 0)


@pytest.mark.parametrize("stats,n", [("fermion", 6), ("boson", 4)])
def test_anchor_diagonal_matches(stats, n):
    h = gen_distinct(n, stats, 9)
    a11, b11 = diagonal_at_anchor(exact_surface(h))
    assert a11 == pytest.approx(h.A[0, 0].real, abs=1e-9)
    assert b11 == pytest.approx(h.B[0, 0], abs=1e-9)


# ------------------------------------------------------------ distinct chain

def test_distinct_single_site():
    s = SurfaceData(np.array([1.3, -1.3]), {1: (np.array([1.0, 0.0]), np.array([0.0, 1.0]))})
    r = chain_distinct(s)
    assert np.allclose(r.A, [[1.3]]) and np.allclose(r.B, [[0]])


@pytest.mark.parametrize("stats,n", [("fermion", 8), ("boson", 6)])
def test_distinct_round_trip(stats, n):
    for seed in range(5):
        h = gen_distinct(n, stats, seed)
        r = chain_distinct(exact_surface(h), phases_from(h))
        assert max_err(h, r) <= 1e-8
        validate(r)


@given(st.integers(2, 12), st.integers(0, 2**31 - 1), st.sampled_from(["fermion", "boson"]))
def test_distinct_round_trip_property(n, seed, stats):
    # boson error grows roughly geometrically with length, so cap their size
    if stats == "boson":
        n = min(n, 8)
    h = gen_distinct(n, stats, seed)
    r = chain_distinct(exact_surface(h), phases_from(h))
    tol = 1e-8 if stats == "fermion" or n <= 6 else 1e-7
    assert max_err(h, r) <= tol
    validate(r)


@pytest.mark.parametrize("stats", ["fermion", "boson"])
def test_distinct_complex_phases(stats):
    rng = np.random.default_rng(4)
    eps = 1 if stats == "fermion" else -1
    n = 5
    A = np.diag(rng.uniform(0, 2, n)).astype(complex)
    B = np.zeros((n, n), dtype=complex)
    for i in range(n - 1):
        a = rng.uniform(0.5, 1.5) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        b = rng.uniform(0.1, 0.4) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        A[i, i + 1], A[i + 1, i] = a, np.conj(a)
        B[i, i + 1], B[i + 1, i] = b, -eps * b
    if eps == -1:
        B[0, 0] = 0.2j
        A += 3 * np.eye(n)
    h = QuadraticHamiltonian(A, B, stats)
    assert max_err(h, chain_distinct(exact_surface(h), phases_from(h))) <= 1e-8


def test_distinct_dominance_convention():
    # a partial particle-hole map swaps |A| and |B| on the bonds past site 1
    n = 4
    h = gen_distinct(n, "fermion", 3)
    r = chain_distinct(exact_surface(h), dominant="B")
    assert np.all(np.abs(np.diag(r.B, 1)) >= np.abs(np.diag(r.A, 1)))
    assert np.allclose(diagonalize(r).energies, diagonalize(h).energies, atol=1e-9)


def test_distinct_rejects_equal_bond():
    h = gen_equal(5, "fermion", 1)
    with pytest.raises(EqualCouplingBond) as info:
        chain_distinct(exact_surface(h), phases_from(h))
    assert info.value.bond == 1


def test_broken_chain():
    n = 4
    A = np.diag([0.3, 0.9, 1.7, 2.6]).astype(complex)
    A[0, 1] = A[1, 0] = 0.8
    A[2, 3] = A[3, 2] = 0.6
    B = np.zeros((n, n), dtype=complex)
    B[0, 1], B[1, 0] = 0.2, -0.2
    h = QuadraticHamiltonian(A, B)
    with pytest.raises(BrokenChain) as info:
        chain_distinct(exact_surface(h))
    assert info.value.bond == 2


def test_boson_contradicting_phase():
    h = gen_distinct(4, "boson", 2)
    phases = phases_from(h)
    phases[("B", 1, 2)] = -1.0
    with pytest.raises(InconsistentSurface):
        chain_distinct(exact_surface(h), phases)


def test_lanczos_oracle_on_number_conserving_chain():
    n = 10
    rng = np.random.default_rng(21)
    A = np.diag(rng.uniform(0, 2, n)) + np.diag(rng.uniform(0.5, 1.5, n - 1), 1)
    A = A + np.triu(A, 1).T
    h = QuadraticHamiltonian(A, np.zeros((n, n)))
    s = exact_surface(h)
    r = chain_distinct(s)
    # with B = 0 the site-1 spectral measure of A is spread over both halves
    w = np.abs(s.rows[1][0]) ** 2
    keep = w > 1e-14
    order = np.argsort(s.energies[keep])
    alpha, beta = lanczos_jacobi(s.energies[keep][order], w[keep][order])
    assert np.abs(np.diag(r.A).real - alpha).max() <= 1e-9
    assert np.abs(np.diag(r.A, 1).real - np.abs(beta)).max() <= 1e-9


# ------------------------------------------------------------ equal chain

def test_equal_fermion_transverse_ising():
    rng = np.random.default_rng(8)
    n = 6
    c = rng.uniform(0.3, 1.0, n - 1)
    A = np.diag(rng.uniform(0.5, 2.0, n)) + np.diag(c, 1) + np.diag(c, -1)
    B = np.diag(c, 1) - np.diag(c, -1)
    h = QuadraticHamiltonian(A, B)
    r = chain_equal(exact_surface(h))
    assert max_err(h, r) <= 1e-8
    validate(r)


@pytest.mark.parametrize("stats,n", [("fermion", 8), ("boson", 4)])
def test_equal_round_trip(stats, n):
    for seed in range(5):
        h = gen_equal(n, stats, seed)
        r = chain_equal(exact_surface(h), phases_from(h))
        assert max_err(h, r) <= 1e-8
        validate(r)


def test_equal_field_sign_comes_from_phases():
    h = gen_equal(4, "fermion", 0)
    A = h.A.copy()
    A[2, 2] *= -1
    flipped = QuadraticHamiltonian(A, h.B)
    s = exact_surface(flipped)
    assert max_err(flipped, chain_equal(s, phases_from(flipped))) <= 1e-8
    # without the sign the other member of the pair is returned, with the same surface
    other = chain_equal(s)
    assert other.A[2, 2].real > 0
    assert np.allclose(diagonalize(other).energies, s.energies, atol=1e-9)


def test_vanishing_field_is_rejected_before_reconstruction():
    # a boson site with A_nn = B_nn makes M singular on that site
    h = gen_equal(4, "boson", 3)
    A, B = h.A.copy(), h.B.copy()
    B[1, 1] = A[1, 1]
    with pytest.raises(BosonicMNotPositiveDefinite):
        validate(QuadraticHamiltonian(A, B, "boson"))
    # a fermion site without field leaves a Majorana that commutes with H
    h = gen_equal(4, "fermion", 3)
    A = h.A.copy()
    A[1, 1] = 0
    with pytest.raises(ZeroMode):
        diagonalize(QuadraticHamiltonian(A, h.B))


def test_no_transverse_field_payload():
    err = NoTransverseField(2)
    assert err.site == 2 and err.code


def test_equal_rejects_distinct_bond():
    h = gen_distinct(4, "fermion", 3)
    with pytest.raises(DistinctCouplingBond):
        chain_equal(exact_surface(h), phases_from(h))


# ------------------------------------------------------------ mixed regimes

@pytest.mark.parametrize("pattern", ["ddeee", "deeee", "dddde"])
@pytest.mark.parametrize("stats", ["fermion", "boson"])
def test_auto_mixed_chain(pattern, stats):
    h = mixed_chain(pattern, stats, seed=len(pattern))
    r, diag = chain_auto(exact_surface(h), phases_from(h), diagnostics=True)
    assert max_err(h, r) <= 1e-7
    assert diag["regime_per_bond"] == ["equal" if c == "e" else "distinct" for c in pattern]


@pytest.mark.parametrize("stats", ["fermion", "boson"])
@pytest.mark.parametrize("pattern", ["ded", "dedede"])
def test_equal_then_distinct_has_a_surface_twin(pattern, stats):
    # a distinct bond after an equal one is invisible at the anchor: the
    # reconstruction returns a different chain with the same surface
    h = mixed_chain(pattern, stats, seed=2)
    s = exact_surface(h)
    r = chain_auto(s, phases_from(h))
    assert max_err(h, r) > 1e-2
    twin = exact_surface(r)
    assert np.abs(twin.energies - s.energies).max() <= 1e-9
    for a, b in zip(twin.rows[1], s.rows[1]):
        assert np.abs(a - b).max() <= 1e-9


def test_regime_switch_error_payload():
    assert issubclass(UnidentifiableRegimeSwitch, Exception)
    assert UnidentifiableRegimeSwitch("x").code


def test_auto_dispatch_consistency():
    h = gen_distinct(6, "fermion", 4)
    s = exact_surface(h)
    ph = phases_from(h)
    assert np.array_equal(chain_auto(s, ph).A, chain_distinct(s, ph).A)
    h = gen_equal(6, "fermion", 4)
    s = exact_surface(h)
    ph = phases_from(h)
    assert np.array_equal(chain_auto(s, ph).A, chain_equal(s, ph).A)


def test_diagnostics_shape():
    h = gen_distinct(5, "fermion", 0)
    _, diag = chain_distinct(exact_surface(h), phases_from(h), diagnostics=True)
    assert set(diag) == {"max_residual", "per_site_errors", "regime_per_bond"}
    assert diag["max_residual"] <= 1e-9
    assert len(diag["per_site_errors"]) == 5 and max(diag["per_site_errors"]) <= 1e-9
    assert diag["regime_per_bond"] == ["distinct"] * 4


# ------------------------------------------------------------ graphs

def test_graph_path_equals_chain():
    h = gen_distinct(6, "fermion", 2)
    s = exact_surface(h)
    a = reconstruct_graph(s, path_graph(6), phases_from(h))
    b = chain_distinct(s, phases_from(h))
    assert np.array_equal(a.A, b.A) and np.array_equal(a.B, b.B)


@pytest.mark.parametrize("anomalous", [False, True])
def test_y_graph_round_trip(anomalous):
    g = y_graph()
    for seed in range(4):
        h = y_graph_instance(seed, anomalous)
        r = reconstruct_graph(exact_surface(h, (1, 2, 3)), g, phases_from(h))
        assert max_err(h, r) <= 1e-7
        validate(r)


def test_y_graph_single_leaf_not_infecting():
    h = y_graph_instance(0)
    with pytest.raises(NotInfecting):
        reconstruct_graph(exact_surface(h, (1,)), y_graph(), phases_from(h))


def test_graph_equal_edge_rejected():
    h = gen_equal(4, "fermion", 0)
    with pytest.raises(EqualCouplingEdge):
        reconstruct_graph(exact_surface(h), path_graph(4), phases_from(h))


def test_graph_surface_anchor_only_matches_build_surface():
    h = gen_distinct(4, "fermion", 6)
    cfg = RunConfig(seed=1)
    recs = simulate_records(h, cfg, (1,))
    via_pipeline, _, _ = estimate_surface(recs, 4, "fermion", cfg, real=False)
    s = exact_surface(h)
    p = np.abs(s.rows[1][0]) ** 2
    q = s.rows[1][0] * s.rows[1][1].conj()
    direct = build_surface(p, s.energies, "fermion", q)
    for a, b in zip(via_pipeline.rows[1], direct.rows[1]):
        assert np.abs(a - b).max() <= 1e-8


def test_graph_surface_from_cross_records():
    h = y_graph_instance(5)
    cfg = RunConfig(seed=3)
    recs = simulate_records(h, cfg, (1, 2, 3))
    est, _, _ = estimate_surface(recs, 7, "fermion", cfg)
    ref = exact_surface(h, (1, 2, 3))
    for site in (1, 2, 3):
        for a, b in zip(est.rows[site], ref.rows[site]):
            assert np.abs(a - b).max() <= 1e-6
    assert np.all(est.rows[1][0].real >= 0)


def test_graph_surface_zero_anchor_entry():
    e = np.array([1.0, 2.0, -1.0, -2.0])
    zero = np.zeros(4, dtype=complex)
    # anchor sees neither member of the second mode pair
    anchor_amps = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
    probes = {
        (1, 1): (anchor_amps, 1.0, 1j * anchor_amps.conj(), 1j),
        (1, 2): (zero, 1.0, zero, 1j),
        (2, 1): (zero, 1.0, zero, 1j),
    }
    with pytest.raises(ZeroAnchorEntry):
        graph_surface(e, "fermion", probes)


def test_phases_from_lists_upper_triangle():
    h = gen_distinct(3, "boson", 0)
    ph = phases_from(h)
    assert ("A", 1, 2) in ph and ("A", 2, 1) not in ph
    assert ph[("B", 1, 1)] == pytest.approx(1.0)
    assert all(abs(abs(v) - 1) < 1e-12 for v in ph.values())
