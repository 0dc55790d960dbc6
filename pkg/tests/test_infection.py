import itertools

import networkx as nx
import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from oracles import all_labelled_graphs, infect_closure, sweep_closure_all
from quadtomo import kernels
from quadtomo.core import CouplingGraph, path_graph
from quadtomo.generate import infecting_access, random_tree, y_graph
from quadtomo.reconstruct import is_infecting


def graph(n, edges):
    return CouplingGraph(n, [tuple(e) for e in edges])


def subsets(n):
    nodes = range(1, n + 1)
    for k in range(1, n + 1):
        yield from itertools.combinations(nodes, k)


def test_path_from_end():
    ok, plan = is_infecting(path_graph(3), {1})
    assert ok and plan.steps == [(1, 2), (2, 3)]


def test_path_from_middle():
    ok, plan = is_infecting(path_graph(3), {2})
    assert not ok and plan.steps == []


def test_star_needs_all_but_one_leaf():
    # centre 4 with leaves 1, 2, 3
    star = graph(4, [(4, 1), (4, 2), (4, 3)])
    ok, plan = is_infecting(star, {4, 1, 2})
    assert ok and plan.steps == [(4, 3)]
    assert not is_infecting(star, {4, 1})[0]


def test_y_graph_leaves():
    g = y_graph()
    assert is_infecting(g, {1, 2, 3})[0]
    assert not is_infecting(g, {1})[0]


def test_plan_is_valid_sequence():
    g = y_graph()
    ok, plan = is_infecting(g, {1, 2, 3})
    infected = {1, 2, 3}
    for v, u in plan.steps:
        assert v in infected and u not in infected
        assert [w for w in g.neighbors(v) if w not in infected] == [u]
        infected.add(u)
    assert infected == set(range(1, 8))


def test_default_access_from_graph():
    g = y_graph()
    assert is_infecting(g)[0] == is_infecting(g, g.access)[0]


def test_exhaustive_small_labelled_graphs():
    for n in range(1, 6):
        for edges in all_labelled_graphs(n):
            g = graph(n, edges)
            for c in subsets(n):
                ok, _ = is_infecting(g, set(c))
                assert ok == (len(infect_closure(n, edges, c)) == n), (n, edges, c)


def test_atlas_graphs_up_to_seven_nodes():
    rows = []
    for h in nx.graph_atlas_g()[1:]:
        n = h.number_of_nodes()
        edges = [(i + 1, j + 1) for i, j in h.edges()]
        g = graph(n, edges)
        masks = g.adjacency_masks()
        full = (1 << n) - 1
        closures = kernels.closure_all_subsets(np.array([masks]))[0]
        oracle = sweep_closure_all(np.array([masks]))[0]
        assert np.array_equal(closures, oracle)
        # sample the Python planner against the kernel on every subset of small graphs
        if n <= 6:
            for s in range(1, 1 << n):
                c = {i + 1 for i in range(n) if (s >> i) & 1}
                assert is_infecting(g, c)[0] == (closures[s] == full)
        rows.append(n)
    assert len(rows) == 1252


def test_random_eight_node_graphs():
    rng = np.random.default_rng(0)
    for _ in range(40):
        edges = [e for e in itertools.combinations(range(1, 9), 2) if rng.random() < 0.35]
        g = graph(8, edges)
        closures = kernels.closure_all_subsets(np.array([g.adjacency_masks()]))[0]
        for s in rng.choice(np.arange(1, 256), 40, replace=False):
            c = {i + 1 for i in range(8) if (s >> i) & 1}
            assert is_infecting(g, c)[0] == (closures[s] == 255)
            assert len(infect_closure(8, edges, c)) == bin(int(closures[s])).count("1")


def test_single_start_kernel_agrees_with_batch():
    g = y_graph()
    masks = np.array(g.adjacency_masks())
    batch = kernels.closure_all_subsets(masks[None])[0]
    for s in (1, 7, 9, 64, 127):
        assert kernels.infection_closure(masks, s) == batch[s]


@given(st.integers(2, 9), st.integers(0, 2**31 - 1), st.data())
def test_superset_of_infecting_set_infects(n, seed, data):
    edges = random_tree(n, np.random.default_rng(seed))
    g = graph(n, edges)
    c = infecting_access(edges, n)
    assert is_infecting(g, c)[0]
    extra = data.draw(st.sets(st.integers(1, n)))
    assert is_infecting(g, set(c) | extra)[0]


@given(st.integers(2, 7), st.integers(0, 2**31 - 1))
def test_closure_is_monotone(n, seed):
    rng = np.random.default_rng(seed)
    edges = [e for e in itertools.combinations(range(1, n + 1), 2) if rng.random() < 0.5]
    masks = np.array([graph(n, edges).adjacency_masks()])
    closure = kernels.closure_all_subsets(masks)[0]
    for s in range(1 << n):
        for v in range(n):
            t = s | (1 << v)
            assert closure[s] & ~closure[t] == 0
