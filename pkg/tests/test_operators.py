import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphconnes import operators as ops
from graphconnes.checks import operator_identity_checks
from graphconnes.graph import (
    GraphError,
    binary_tree,
    build_graph,
    cycle_graph,
    directed_path_graph,
    path_graph,
    random_graph,
)

from strategies import graphs, graphs_with_function


def test_coboundary_orientation():
    g = directed_path_graph(2)
    np.testing.assert_array_equal(ops.coboundary(g, [0.0, 1.0, 3.0]), [1.0, 2.0])
    # d* sends an edge to (target) - (source)
    np.testing.assert_array_equal(ops.boundary_adjoint(g, [1.0, 0.0]), [-1.0, 1.0, 0.0])
    # delta sends d_ik to its terminal node n_k
    np.testing.assert_array_equal(ops.boundary(g, [1.0, 0.0]), [0.0, 1.0, 0.0])


def test_length_checks():
    g = path_graph(2)
    with pytest.raises(ValueError):
        ops.coboundary(g, [1.0, 2.0])
    with pytest.raises(ValueError):
        ops.coboundary_operator(g).apply(np.ones(5))
    with pytest.raises(ValueError):
        ops.coboundary_operator(g).adjoint_apply(np.ones(3))


def test_square_laplacian_spectrum():
    lap = ops.laplacian(cycle_graph(4)).dense()
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(-lap)), [0, 2, 2, 4], atol=1e-12)


def test_directed_adjacency_row_sums():
    g = build_graph(3, [(0, 1), (0, 2), (2, 1)], directed=True)
    a_in, a_out = ops.adjacency(g)
    np.testing.assert_array_equal(a_out.dense().sum(axis=1), g.out_degrees())
    np.testing.assert_array_equal(a_in.dense(), a_out.dense().T)
    v_in, v_out = ops.degree(g)
    np.testing.assert_array_equal(np.diag(v_out.dense()), g.out_degrees())


def test_antisymmetric_space():
    g = cycle_graph(5)
    h = np.random.default_rng(1).standard_normal(g.edge_count)
    a = ops.antisymmetrize(g, h)
    np.testing.assert_allclose(ops.antisymmetrize(g, a), a)
    basis = ops.antisymmetric_basis(g)
    np.testing.assert_allclose(basis.T @ basis, np.eye(5), atol=1e-15)
    # d f is antisymmetric, so it lives in the bond space
    df = ops.coboundary(g, np.arange(5.0))
    np.testing.assert_allclose(ops.antisymmetrize(g, df), df)
    with pytest.raises(GraphError):
        ops.antisymmetrize(directed_path_graph(2), [1.0, 1.0])


def test_square_commutator_norm():
    g = cycle_graph(4)
    f = np.array([0.0, 1.0, 2.0, 1.0]) / np.sqrt(2)
    assert ops.commutator_norm(g, f) == pytest.approx(1.0, abs=1e-15)


def test_commutator_apply_on_single_edge():
    g = directed_path_graph(1)
    x = np.array([1.0, 0.0, 0.0])
    out = ops.commutator_apply(g, [0.0, 1.0], x)
    np.testing.assert_array_equal(out, [0.0, 0.0, 1.0])


def test_dirac_blocks():
    g = path_graph(2)
    D = ops.dirac(g).dense()
    d = ops.coboundary_operator(g).dense()
    np.testing.assert_array_equal(D[3:, :3], d)
    np.testing.assert_array_equal(D[:3, 3:], d.T)
    assert not D[:3, :3].any() and not D[3:, 3:].any()
    assert np.array_equal(ops.involution(np.array([1 + 2j])), [1 - 2j])


def test_edgeless_operators():
    g = build_graph(3, [], directed=False)
    assert ops.dirac(g).shape == (3, 3)
    assert ops.commutator_norm(g, [1.0, 2.0, 3.0]) == 0.0
    assert ops.cycle_space_dimension(g) == 0


@pytest.mark.parametrize("g, expected", [
    (cycle_graph(4), 5),       # 8 oriented edges, 3 = n - c independent gradients
    (path_graph(5), 5),        # a tree: only the symmetric part is free
    (binary_tree(2), 6),
])
def test_cycle_space_dimension(g, expected):
    assert ops.cycle_space_dimension(g) == expected
    assert ops.expected_cycle_space_dimension(g) == expected


def test_antisymmetric_cycle_space_is_first_betti_number():
    assert ops.cycle_space_dimension(path_graph(6), antisymmetric=True) == 0
    assert ops.cycle_space_dimension(cycle_graph(6), antisymmetric=True) == 1
    g = random_graph(10, 0.5, seed=3)
    betti = len(g.bonds()) - g.node_count + 1
    assert ops.cycle_space_dimension(g, antisymmetric=True) == betti


def test_operator_helpers():
    g = cycle_graph(3)
    op = ops.laplacian(g)
    assert op.is_self_adjoint()
    assert not ops.coboundary_operator(g).is_self_adjoint()
    assert op.to_triplets().splitlines()[0] == "0 0 -2.0"
    np.testing.assert_allclose((op.adjoint @ op).dense(), op.dense() @ op.dense())


@pytest.mark.parametrize("seed, directed", [(7, False), (3, True), (11, False)])
def test_identity_suite(seed, directed):
    g = random_graph(15, 0.3, seed=seed, directed=directed)
    failed = [c.name for c in operator_identity_checks(g) if not c.passed]
    assert not failed


@settings(max_examples=50, deadline=None)
@given(graphs_with_function(max_nodes=8))
def test_commutator_norm_is_operator_norm(gf):
    g, f = gf
    exact = np.linalg.norm(ops.commutator_operator(g, f).dense(), 2) if g.edge_count else 0.0
    assert ops.commutator_norm(g, f) == pytest.approx(exact, rel=1e-9, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(graphs(max_nodes=8))
def test_laplace_identity(g):
    factor = 1.0 if g.directed else 2.0
    np.testing.assert_allclose(ops.laplace_form(g).dense(), -factor * ops.laplacian(g).dense(),
                               atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(graphs_with_function(max_nodes=8), st.floats(-5, 5))
def test_norm_invariant_under_constant_shift(gf, c):
    g, f = gf
    shifted = np.asarray(f) + c
    assert ops.commutator_norm(g, shifted) == pytest.approx(ops.commutator_norm(g, f),
                                                            rel=1e-9, abs=1e-9)
