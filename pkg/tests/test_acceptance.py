"""Acceptance gate: one PASS/FAIL line per criterion, at the fixed tolerances.

Run ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import itertools
import math
import sys

import networkx as nx
import numpy as np
import pytest
from networkx.algorithms.isomorphism import GraphMatcher

from graphconnes import operators as ops
from graphconnes.connes import (
    SolverConfig,
    Status,
    add_shortcut,
    attach_hair,
    connes_distance,
    distance_matrix,
    matrix_values,
    oracle_connes_distance,
    path_closed_form,
)
from graphconnes.graph import (
    binary_tree,
    bfs_distances,
    build_graph,
    component_count,
    cycle_graph,
    directed_lattice_2d,
    directed_path_graph,
    graph_distance,
    lattice_node,
    path_graph,
    random_graph,
)
from graphconnes.spectral import adjacency_norm_bounds, norm_exhaustion, operator_norm

CFG = SolverConfig(tol=1e-9)
# collected here and printed in the terminal summary by conftest.py
LINES: list[str] = []


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}  {title}: {detail}"
    LINES.append(line)
    print(line)
    assert ok, line


def _random_small(count, max_nodes, seed, directed=None, connected=False):
    """``count`` random graphs with 2..max_nodes nodes and varied density."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(2, max_nodes + 1))
        p = float(rng.uniform(0.15, 0.7))
        d = bool(rng.integers(2)) if directed is None else directed
        g = random_graph(n, p, seed=int(rng.integers(2**31)), directed=d)
        if connected and component_count(g) != 1:
            continue
        out.append(g)
    return out


def test_criterion_01_square():
    g = cycle_graph(4)
    res = connes_distance(g, 0, 2, CFG)
    root2 = math.sqrt(2)
    ok = (abs(res.value - root2) <= 1e-6
          and abs(res.lower_bound - root2) <= 1e-6
          and res.graph_distance == 2 and res.graph_distance > res.value + 1e-6)
    report(1, "square x1 -> x3", ok,
           f"value {res.value:.10f}, lower {res.lower_bound:.10f}, d = {res.graph_distance}")


# published values of dist(0, n) on the path for n = 1..7
PATH_SQUARES = [1, 2, 5, 8, 13, 18, 25]


def test_criterion_02_undirected_path():
    listed = all(path_closed_form(n) == math.sqrt(sq) for n, sq in enumerate(PATH_SQUARES, 1))
    worst = 0.0
    for n in range(1, 13):
        res = connes_distance(path_graph(n + 1), 0, n, CFG)
        worst = max(worst, abs(res.value - path_closed_form(n)))
    report(2, "undirected path n = 1..12", listed and worst <= 1e-5,
           f"closed form matches listed values {listed}; max error {worst:.2e}")


def test_criterion_03_directed_path():
    worst = 0.0
    for n in range(1, 13):
        res = connes_distance(directed_path_graph(n + 1), 0, n, CFG)
        worst = max(worst, abs(res.value - n))
    report(3, "directed path n = 1..12", worst <= 1e-6, f"max error {worst:.2e}")


def test_criterion_04_directed_lattice():
    w = h = 6
    g = directed_lattice_2d(w, h)
    origin = lattice_node(0, 0, h)
    axis_err, interior_bad, interior = 0.0, [], 0
    for x in range(w + 1):
        for y in range(h + 1):
            if x == y == 0:
                continue
            res = connes_distance(g, origin, lattice_node(x, y, h), CFG)
            if x == 0 or y == 0:
                axis_err = max(axis_err, abs(res.value - (x + y)))
            elif x != y:
                interior += 1
                lo, hi = math.hypot(x, y) - 1e-4, x + y - 1e-3
                if not lo <= res.value <= hi:
                    interior_bad.append((x, y, res.value))
    ok = axis_err <= 1e-6 and not interior_bad
    report(4, "directed 6x6 lattice", ok,
           f"axis max error {axis_err:.2e}; {interior - len(interior_bad)}/{interior} "
           f"interior pairs inside [sqrt(x^2+y^2), x+y]")


def test_criterion_04b_lattice_margin():
    # the same interior pairs, centred in a truncation with margin d on every side
    small = directed_lattice_2d(6, 6)
    worst, inside, margins = 0.0, True, set()
    loose = SolverConfig(tol=1e-7)
    for x in range(1, 7):
        for y in range(1, 7):
            if x == y:
                continue
            m = x + y
            w, h = x + 2 * m, y + 2 * m
            big = connes_distance(directed_lattice_2d(w, h), lattice_node(m, m, h),
                                  lattice_node(m + x, m + y, h), loose)
            ref = connes_distance(small, 0, lattice_node(x, y, 6), CFG)
            worst = max(worst, abs(big.value - ref.value))
            inside &= math.hypot(x, y) - 1e-4 <= big.value <= x + y - 1e-3
            margins.add(m)
    report(4, "directed lattice, margin >= d on every side", worst <= 1e-6 and inside,
           f"margins {min(margins)}..{max(margins)}; max change vs 6x6 corner "
           f"truncation {worst:.1e}; bounds hold {inside}")


def test_criterion_05_binary_tree():
    depth = 5
    g = binary_tree(depth)
    leaves = list(range(2**depth - 1, 2 ** (depth + 1) - 1))
    worst, seen = 0.0, set()
    for b in leaves[1:]:
        k = graph_distance(g, leaves[0], b)
        res = connes_distance(g, leaves[0], b, CFG)
        worst = max(worst, abs(res.value - path_closed_form(k)))
        seen.add(k)
    norms = [e.value for e in norm_exhaustion(binary_tree, 10, 1e-10)]
    monotone = all(b >= a - 1e-9 for a, b in zip(norms, norms[1:]))
    brackets = all(adjacency_norm_bounds(binary_tree(d))[0] - 1e-9 <= v <= 3.0
                   for d, v in enumerate(norms, start=1))
    ok = worst <= 1e-5 and monotone and brackets and norms[-1] <= 2.8285
    report(5, "binary tree leaves and norm sequence", ok,
           f"leaf distances {sorted(seen)} max error {worst:.2e}; "
           f"||A|| depth 10 = {norms[-1]:.7f}, monotone {monotone}")


def test_criterion_06_operator_identities():
    graphs = _random_small(50, 20, seed=6)
    worst_lap, worst_norm, anti_ok = 0.0, 0.0, True
    rng = np.random.default_rng(66)
    for g in graphs:
        dtd = ops.laplace_form(g).dense()
        factor = 1.0 if g.directed else 2.0
        worst_lap = max(worst_lap, float(np.abs(dtd + factor * ops.laplacian(g).dense()).max()))
        D, chi = ops.dirac(g).dense(), ops.grading(g).dense()
        anti_ok &= not np.any(chi @ D + D @ chi)
        for _ in range(10):
            f = rng.standard_normal(g.node_count)
            power = operator_norm(ops.commutator_operator(g, f), 1e-11).value
            worst_norm = max(worst_norm, abs(power - ops.commutator_norm(g, f)))
    ok = worst_lap <= 1e-12 and anti_ok and worst_norm <= 1e-8
    kinds = sum(g.directed for g in graphs)
    report(6, "operator identities on 50 random graphs", ok,
           f"{kinds} directed; d*d vs Laplacian {worst_lap:.1e}; chi D + D chi = 0 {anti_ok}; "
           f"||[D,f]|| vs power iteration {worst_norm:.1e}")


def test_criterion_07_cycle_space():
    graphs = _random_small(50, 20, seed=7)
    bad = [(g.node_count, ops.cycle_space_dimension(g), ops.expected_cycle_space_dimension(g))
           for g in graphs
           if ops.cycle_space_dimension(g) != ops.expected_cycle_space_dimension(g)]
    report(7, "cycle-space dimension on 50 random graphs", not bad,
           f"{50 - len(bad)}/50 exact agreements")


def _pair_orbits(nxg: nx.Graph) -> list[tuple[int, int]]:
    """One representative per automorphism orbit of unordered node pairs."""
    autos = list(GraphMatcher(nxg, nxg).isomorphisms_iter())
    seen, reps = set(), []
    for a, b in itertools.combinations(sorted(nxg.nodes), 2):
        if (a, b) in seen:
            continue
        reps.append((a, b))
        for m in autos:
            seen.add(tuple(sorted((m[a], m[b]))))
    return reps


def _oracle_gap(g, pairs):
    worst = 0.0
    for a, b in pairs:
        res = connes_distance(g, a, b, CFG)
        ref = oracle_connes_distance(g, a, b, budget=4)
        worst = max(worst, abs(res.value - ref))
    return worst


def test_criterion_08a_oracle_exhaustive_undirected():
    worst, graphs, pairs = 0.0, 0, 0
    for nxg in nx.graph_atlas_g():
        if not 2 <= nxg.number_of_nodes() <= 6 or not nx.is_connected(nxg):
            continue
        g = build_graph(nxg.number_of_nodes(), list(nxg.edges), directed=False)
        reps = _pair_orbits(nxg)
        graphs += 1
        pairs += len(reps)
        worst = max(worst, _oracle_gap(g, reps))
    report(8, "oracle agreement, all connected graphs <= 6 nodes", worst <= 1e-4,
           f"{graphs} graphs, {pairs} pair orbits, max |solver - oracle| {worst:.2e}")


def test_criterion_08b_oracle_random_directed():
    worst, pairs = 0.0, 0
    for g in _random_small(50, 8, seed=8, directed=True):
        reach = [(a, b) for a, b in itertools.combinations(range(g.node_count), 2)
                 if bfs_distances(g, a, undirected=True)[b] >= 0]
        pairs += len(reach)
        worst = max(worst, _oracle_gap(g, reach))
    report(8, "oracle agreement, 50 random directed graphs <= 8 nodes", worst <= 1e-4,
           f"{pairs} pairs, max |solver - oracle| {worst:.2e}")


def test_criterion_09_metric_axioms():
    sym, tri = 0.0, 0.0
    for g in _random_small(20, 10, seed=9, directed=False, connected=True):
        table = distance_matrix(g, CFG)
        assert all(r.status is Status.CONVERGED for row in table for r in row)
        m = matrix_values(table)
        sym = max(sym, float(np.abs(m - m.T).max()))
        # m[i, k] <= m[i, j] + m[j, k] for all i, j, k
        excess = m[:, None, :] - m[:, :, None] - m[None, :, :]
        tri = max(tri, float(excess.max()))
    ok = sym <= 1e-6 and tri <= 3e-6
    report(9, "metric axioms on 20 random connected graphs", ok,
           f"symmetry {sym:.1e}, triangle excess {tri:.1e}")


def test_criterion_10_structural_lemmas():
    hair_err, cut_bad, cuts = 0.0, [], 0
    graphs = [path_graph(8), cycle_graph(9), binary_tree(3), directed_lattice_2d(3, 3)]
    graphs += _random_small(6, 9, seed=10, directed=False, connected=True)
    for g in graphs:
        a, b = 0, int(np.argmax(bfs_distances(g, 0, undirected=True)))
        res = connes_distance(g, a, b, CFG)
        hair_err = max(hair_err, abs(connes_distance(attach_hair(g), a, b, CFG).value - res.value))
        for length in range(1, math.ceil(res.value)):
            cuts += 1
            new = connes_distance(add_shortcut(g, a, b, length), a, b, CFG).value
            if new > length + 1e-6:
                cut_bad.append((g.node_count, length, new))
    ok = hair_err <= 1e-6 and not cut_bad
    report(10, "hair and shortcut lemmas", ok,
           f"hair max change {hair_err:.1e}; {cuts - len(cut_bad)}/{cuts} shortcuts bounded")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
