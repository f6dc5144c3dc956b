"""Operator calculus on the node space H0 and the edge space H1.

H1 has one basis vector per *stored* directed edge, ordered like
``Graph.edges``. The coboundary uses ``(df)_ik = f_k - f_i`` for directed and
undirected graphs alike; flipping that sign would leave ``d*d``, ``||df||``
and the commutator norm unchanged.

All operators are sparse matrices wrapped in :class:`GraphOperator`; the
combined space H = H0 + H1 lists node coordinates first.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg  # noqa: F401

from .graph import Graph, GraphError, component_count

DENSE_LIMIT = 4096
RANK_RTOL = 1e-9


@dataclass(frozen=True)
class GraphOperator:
    """A named linear map between H0, H1 or H, backed by a sparse matrix."""

    name: str
    domain: str
    codomain: str
    matrix: sp.csr_matrix

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def apply(self, x):
        x = np.asarray(x)
        if x.shape[0] != self.shape[1]:
            raise ValueError(
                f"{self.name} expects a vector of length {self.shape[1]}, got {x.shape[0]}"
            )
        return self.matrix @ x

    def adjoint_apply(self, y):
        y = np.asarray(y)
        if y.shape[0] != self.shape[0]:
            raise ValueError(
                f"adjoint of {self.name} expects length {self.shape[0]}, got {y.shape[0]}"
            )
        return self.matrix.conj().T @ y

    @property
    def adjoint(self) -> "GraphOperator":
        return GraphOperator(
            f"{self.name}*", self.codomain, self.domain, self.matrix.conj().T.tocsr()
        )

    def dense(self) -> np.ndarray:
        if self.shape[0] * self.shape[1] > 4 * DENSE_LIMIT**2:
            raise MemoryError(f"{self.name} is too large to materialize")
        return self.matrix.toarray()

    def __matmul__(self, other: "GraphOperator") -> "GraphOperator":
        return GraphOperator(
            f"{self.name}{other.name}", other.domain, self.codomain,
            (self.matrix @ other.matrix).tocsr(),
        )

    def is_self_adjoint(self, trials: int = 3, seed: int = 0, rtol: float = 1e-12) -> bool:
        """Randomized check of <Ax|y> = <x|Ay>."""
        if self.shape[0] != self.shape[1]:
            return False
        rng = np.random.default_rng(seed)
        scale = max(1.0, sp.linalg.norm(self.matrix))
        for _ in range(trials):
            x = rng.standard_normal(self.shape[1])
            y = rng.standard_normal(self.shape[1])
            gap = abs(np.vdot(self.apply(x), y) - np.vdot(x, self.apply(y)))
            if gap > rtol * scale * np.linalg.norm(x) * np.linalg.norm(y):
                return False
        return True

    def to_triplets(self) -> str:
        """Coordinate-triplet text, one ``row col value`` line per nonzero."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return "".join(
            f"{coo.row[p]} {coo.col[p]} {coo.data[p].item()!r}\n" for p in order
        )


def _csr(rows, cols, vals, shape) -> sp.csr_matrix:
    return sp.csr_matrix((np.asarray(vals, dtype=float), (rows, cols)), shape=shape)


def _check_vertex(g: Graph, f) -> np.ndarray:
    f = np.asarray(f)
    if f.ndim != 1 or f.shape[0] != g.node_count:
        raise ValueError(f"vertex vector must have length {g.node_count}, got shape {f.shape}")
    return f


def _check_edge(g: Graph, h) -> np.ndarray:
    h = np.asarray(h)
    if h.ndim != 1 or h.shape[0] != g.edge_count:
        raise ValueError(f"edge vector must have length {g.edge_count}, got shape {h.shape}")
    return h


# -- d, d1, d2 and their adjoints --------------------------------------------


def ingoing_map(g: Graph) -> GraphOperator:
    """d1: n_i -> sum of the edges ending at n_i."""
    m = g.edge_count
    return GraphOperator("d1", "H0", "H1",
                         _csr(np.arange(m), g.targets, np.ones(m), (m, g.node_count)))


def outgoing_map(g: Graph) -> GraphOperator:
    """d2: n_i -> sum of the edges leaving n_i."""
    m = g.edge_count
    return GraphOperator("d2", "H0", "H1",
                         _csr(np.arange(m), g.sources, np.ones(m), (m, g.node_count)))


def coboundary_operator(g: Graph) -> GraphOperator:
    m = g.edge_count
    rows = np.concatenate([np.arange(m), np.arange(m)])
    cols = np.concatenate([g.targets, g.sources])
    vals = np.concatenate([np.ones(m), -np.ones(m)])
    return GraphOperator("d", "H0", "H1", _csr(rows, cols, vals, (m, g.node_count)))


def coboundary(g: Graph, f) -> np.ndarray:
    """``(df)_ik = f_k - f_i`` on every stored edge."""
    f = _check_vertex(g, f)
    if g.edge_count == 0:
        return np.zeros(0, dtype=f.dtype if np.iscomplexobj(f) else float)
    return f[g.targets] - f[g.sources]


def boundary_adjoint(g: Graph, h) -> np.ndarray:
    """``d* h``: ingoing edge values minus outgoing edge values at each node."""
    h = _check_edge(g, h)
    dtype = complex if np.iscomplexobj(h) else float
    out = np.zeros(g.node_count, dtype=dtype)
    np.add.at(out, g.targets, h)
    np.subtract.at(out, g.sources, h)
    return out


def boundary(g: Graph, h) -> np.ndarray:
    """delta: d_ik -> n_k (the terminal-node map, called delta_1 as well)."""
    h = _check_edge(g, h)
    out = np.zeros(g.node_count, dtype=complex if np.iscomplexobj(h) else float)
    np.add.at(out, g.targets, h)
    return out


def bond_vector(g: Graph, i: int, k: int) -> np.ndarray:
    """Edge vector of the bond ``b_ik = d_ik - d_ki``."""
    b = np.zeros(g.edge_count)
    b[g.edge_index(i, k)] = 1.0
    b[g.edge_index(k, i)] = -1.0
    return b


def antisymmetrize(g: Graph, h) -> np.ndarray:
    """Orthogonal projection of ``h`` onto the antisymmetric edge space."""
    if g.directed:
        raise GraphError("antisymmetric edge space is defined for undirected graphs only")
    h = _check_edge(g, h)
    rev = np.fromiter((g.edge_index(k, i) for i, k in g.edges), dtype=np.intp,
                      count=g.edge_count)
    return 0.5 * (h - h[rev])


def antisymmetric_basis(g: Graph) -> np.ndarray:
    """Orthonormal basis ``b_ik / sqrt(2)`` of H1^a as columns."""
    bonds = g.bonds()
    basis = np.zeros((g.edge_count, len(bonds)))
    for col, (i, k) in enumerate(bonds):
        basis[:, col] = bond_vector(g, i, k) / np.sqrt(2.0)
    return basis


# -- adjacency, degree, Laplacian -------------------------------------------


def out_adjacency(g: Graph) -> GraphOperator:
    """``A_out[i, k] = 1`` for every edge ``i -> k``; row sums are out-degrees."""
    n = g.node_count
    return GraphOperator("A_out", "H0", "H0",
                         _csr(g.sources, g.targets, np.ones(g.edge_count), (n, n)))


def in_adjacency(g: Graph) -> GraphOperator:
    n = g.node_count
    return GraphOperator("A_in", "H0", "H0",
                         _csr(g.targets, g.sources, np.ones(g.edge_count), (n, n)))


def _diag(name: str, values) -> GraphOperator:
    return GraphOperator(name, "H0", "H0", sp.diags(np.asarray(values, float)).tocsr())


def adjacency(g: Graph):
    """A for undirected graphs; the pair ``(A_in, A_out)`` for directed ones."""
    if g.directed:
        return in_adjacency(g), out_adjacency(g)
    return GraphOperator("A", "H0", "H0", out_adjacency(g).matrix)


def degree(g: Graph):
    """V for undirected graphs; the pair ``(V_in, V_out)`` for directed ones."""
    if g.directed:
        return _diag("V_in", g.in_degrees()), _diag("V_out", g.out_degrees())
    return _diag("V", g.degrees())


def laplacian(g: Graph) -> GraphOperator:
    """Delta = A - V (undirected) or (A_in + A_out) - (V_in + V_out) (directed).

    ``-Delta`` is positive semidefinite; ``d*d = -2 Delta`` on undirected and
    ``d*d = -Delta`` on directed graphs.
    """
    if g.directed:
        a_in, a_out = adjacency(g)
        v_in, v_out = degree(g)
        mat = (a_in.matrix + a_out.matrix) - (v_in.matrix + v_out.matrix)
    else:
        mat = adjacency(g).matrix - degree(g).matrix
    return GraphOperator("Delta", "H0", "H0", mat.tocsr())


def laplace_form(g: Graph) -> GraphOperator:
    """``d*d`` assembled from its definition (not from A and V)."""
    d = coboundary_operator(g)
    return d.adjoint @ d


# -- Dirac operator, grading, involution ------------------------------------


def dirac(g: Graph) -> GraphOperator:
    """D = [[0, d*], [d, 0]] on H0 + H1."""
    d = coboundary_operator(g).matrix
    mat = sp.bmat([[None, d.T], [d, None]], format="csr",
                  dtype=float) if g.edge_count else sp.csr_matrix((g.node_count,) * 2)
    return GraphOperator("D", "H", "H", mat)


def grading(g: Graph) -> GraphOperator:
    """chi = +1 on H0, -1 on H1."""
    vals = np.concatenate([np.ones(g.node_count), -np.ones(g.edge_count)])
    return GraphOperator("chi", "H", "H", sp.diags(vals).tocsr())


def involution(x) -> np.ndarray:
    """J: entrywise complex conjugation on H."""
    return np.conj(np.asarray(x))


def grading_and_involution(g: Graph) -> tuple[GraphOperator, Callable]:
    return grading(g), involution


def edge_anchor(g: Graph) -> np.ndarray:
    """Node whose function value multiplies each edge basis vector.

    Undirected graphs use the left module ``f . d_ik = f_i d_ik``; directed
    graphs anchor at the target so that ``[d, f]`` weights each edge by its
    source and its norm runs over out-neighbours.
    """
    return g.targets if g.directed else g.sources


def multiplication(g: Graph, f) -> GraphOperator:
    """Representation of the node function ``f`` on H."""
    f = _check_vertex(g, f)
    vals = np.concatenate([f, f[edge_anchor(g)]]) if g.edge_count else f
    return GraphOperator("f", "H", "H", sp.diags(vals).tocsr())


def commutator_operator(g: Graph, f) -> GraphOperator:
    """[D, f] = [[0, [d*, f]], [[d, f], 0]] as a sparse matrix."""
    D = dirac(g).matrix
    F = multiplication(g, f).matrix
    return GraphOperator("[D,f]", "H", "H", (D @ F - F @ D).tocsr())


def commutator_apply(g: Graph, f, x) -> np.ndarray:
    """Apply [D, f] to ``x`` in H0 + H1 (length ``node_count + edge_count``)."""
    return commutator_operator(g, f).apply(x)


def local_jump_sums(g: Graph, f) -> np.ndarray:
    """``a_i``: sum over edges leaving node i of ``|f_k - f_i|^2``."""
    jumps = np.abs(coboundary(g, f)) ** 2
    return np.bincount(g.sources, weights=jumps, minlength=g.node_count)


def commutator_norm(g: Graph, f) -> float:
    """||[D, f]||: the largest root-sum-square of jumps to (out-)neighbours."""
    if g.edge_count == 0:
        return 0.0
    return float(np.sqrt(local_jump_sums(g, f).max()))


# -- cycle space ------------------------------------------------------------


def numerical_rank(mat: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def cycle_space_dimension(g: Graph, antisymmetric: bool = False) -> int:
    """dim Ker(d*) by numerical rank, on H1 or on the antisymmetric subspace."""
    d = coboundary_operator(g).dense()
    if antisymmetric:
        basis = antisymmetric_basis(g)
        return basis.shape[1] - numerical_rank(basis.T @ d)
    return g.edge_count - numerical_rank(d)


def range_dimension(g: Graph) -> int:
    """dim Rg(d) = dim Rg(d*), equal to ``n - c``."""
    return numerical_rank(coboundary_operator(g).dense())


def expected_cycle_space_dimension(g: Graph) -> int:
    return g.edge_count - (g.node_count - component_count(g))
