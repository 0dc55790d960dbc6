"""Seeded random instances for each reconstruction regime.

Boson instances keep B_nn = 0 off site 1 (the gauge the reconstruction
returns) and shift the diagonal of A until M is positive definite.
Draws whose quasiparticle energies come closer than SPECTRAL_MARGIN to zero
or to each other are rejected and redrawn from the same stream, since such
modes cannot be told apart within the default time budget.
"""

from __future__ import annotations

import numpy as np

from .core import CouplingGraph, QuadraticHamiltonian, Statistics, _raw_m, path_graph
from .diag import diagonalize
from .errors import DegenerateSpectrum, ZeroMode
from .reconstruct import is_infecting
from .spinmap import SpinChain

KINDS = ("chain-distinct", "chain-equal", "graph", "spin")
PD_MARGIN = 0.5
SPECTRAL_MARGIN = 0.05
MAX_DRAWS = 1000


def _pd_shift(A, B, stats):
    if stats is Statistics.FERMION:
        return A
    lowest = np.linalg.eigvalsh(_raw_m(QuadraticHamiltonian(A, B, stats)))[0]
    if lowest < PD_MARGIN:
        A = A + (PD_MARGIN - lowest) * np.eye(A.shape[0])
    return A


def _well_separated(h) -> bool:
    try:
        e = diagonalize(h).energies[: h.n_sites]
    except (DegenerateSpectrum, ZeroMode):
        return False
    return e[0] >= SPECTRAL_MARGIN and (e.size < 2 or np.diff(e).min() >= SPECTRAL_MARGIN)


def _edge_instance(n, edges, stats, rng, diag, hop, pair, equal=False, b11=(0.1, 0.3)):
    for _ in range(MAX_DRAWS):
        h = _draw_edges(n, edges, stats, rng, diag, hop, pair, equal, b11)
        if _well_separated(h):
            return h
    raise RuntimeError(f"no well-separated instance after {MAX_DRAWS} draws")


def _draw_edges(n, edges, stats, rng, diag, hop, pair, equal, b11):
    eps = stats.eps
    A = np.diag(rng.uniform(*diag, size=n)).astype(np.complex128)
    B = np.zeros((n, n), dtype=np.complex128)
    for i, j in sorted(edges):
        a = rng.uniform(*hop)
        b = a if equal else rng.uniform(*pair)
        A[i - 1, j - 1] = A[j - 1, i - 1] = a
        B[i - 1, j - 1] = b
        B[j - 1, i - 1] = -eps * b
    if eps == -1:
        B[0, 0] = rng.uniform(*b11)
    return QuadraticHamiltonian(_pd_shift(A, B, stats), B, stats)


def chain_distinct(n: int, statistics="fermion", seed: int = 0) -> QuadraticHamiltonian:
    """Real chain, |A_{n,n+1}| - |B_{n,n+1}| >= 0.1 on every bond."""
    stats = Statistics.parse(statistics)
    rng = np.random.default_rng(seed)
    return _edge_instance(n, path_graph(n).edges, stats, rng, (0.0, 2.0), (0.5, 1.5), (0.1, 0.4))


def chain_equal(n: int, statistics="fermion", seed: int = 0) -> QuadraticHamiltonian:
    """Real chain with A_{n,n+1} = B_{n,n+1}, transverse-Ising-like for fermions."""
    stats = Statistics.parse(statistics)
    rng = np.random.default_rng(seed)
    return _edge_instance(n, path_graph(n).edges, stats, rng, (0.5, 2.0), (0.3, 1.0), None, equal=True)


def random_tree(n: int, rng) -> frozenset:
    return frozenset((int(rng.integers(1, v)), v) for v in range(2, n + 1))


def infecting_access(edges, n: int) -> frozenset:
    """Leaves first, then the lowest nodes, until the set infects the graph."""
    g = CouplingGraph(n, edges)
    access = {v for v in range(1, n + 1) if len(g.neighbors(v)) <= 1} or {1}
    for v in range(1, n + 1):
        if is_infecting(g, access)[0]:
            break
        access.add(v)
    return frozenset(access)


def graph_instance(n: int, statistics="fermion", seed: int = 0):
    """Random tree with distinct couplings plus an infecting access set."""
    stats = Statistics.parse(statistics)
    rng = np.random.default_rng(seed)
    edges = random_tree(n, rng)
    access = infecting_access(edges, n)
    h = _edge_instance(n, edges, stats, rng, (0.0, 2.0), (0.5, 1.5), (0.1, 0.4))
    return h, CouplingGraph(n, edges, access)


def y_graph() -> CouplingGraph:
    """Leaves 1, 2, 3; middle sites 4, 5, 6; centre 7; the leaves accessed."""
    edges = frozenset({(1, 4), (2, 5), (3, 6), (4, 7), (5, 7), (6, 7)})
    return CouplingGraph(7, edges, frozenset({1, 2, 3}))


def y_graph_instance(seed: int = 0, anomalous: bool = True) -> QuadraticHamiltonian:
    rng = np.random.default_rng(seed)
    pair = (0.1, 0.4) if anomalous else (0.0, 0.0)
    return _edge_instance(7, y_graph().edges, Statistics.FERMION, rng, (0.0, 2.0), (0.5, 1.5), pair)


def spin_chain(n: int, seed: int = 0, gamma=None) -> SpinChain:
    """c in [0.5, 1.5], b in [0.5, 2]; gamma per bond in [-1, 1] unless given."""
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.5, 1.5, size=n - 1)
    b = rng.uniform(0.5, 2.0, size=n)
    g = rng.uniform(-1.0, 1.0, size=n - 1) if gamma is None else np.full(n - 1, float(gamma))
    return SpinChain(c, g, b)


def generate(kind: str, n: int, statistics="fermion", seed: int = 0) -> dict:
    """JSON document for ``kind``; graph instances carry their graph."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if kind == "chain-distinct":
        return chain_distinct(n, statistics, seed).to_dict()
    if kind == "chain-equal":
        return chain_equal(n, statistics, seed).to_dict()
    if kind == "graph":
        h, g = graph_instance(n, statistics, seed)
        return {"hamiltonian": h.to_dict(), "graph": g.to_dict()}
    if kind == "spin":
        return spin_chain(n, seed).to_dict()
    raise ValueError(f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")
