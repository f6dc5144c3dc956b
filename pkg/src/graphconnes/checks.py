"""Numerical verification of the operator identities on a given graph."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .graph import Graph
from .spectral import operator_norm, spectral_norm


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


def _max_abs(mat) -> float:
    mat = np.asarray(mat)
    return float(np.abs(mat).max()) if mat.size else 0.0


def operator_identity_checks(
    g: Graph, seed: int = 42, trials: int = 10, exact_tol: float = 1e-12
) -> list[Check]:
    rng = np.random.default_rng(seed)
    n, m = g.node_count, g.edge_count
    out: list[Check] = []

    worst = 0.0
    for _ in range(trials):
        f = rng.standard_normal(n)
        h = rng.standard_normal(m)
        gap = abs(ops.coboundary(g, f) @ h - f @ ops.boundary_adjoint(g, h))
        worst = max(worst, gap / max(np.linalg.norm(f) * np.linalg.norm(h), 1e-300))
    out.append(Check("adjointness <df|h> = <f|d*h>", worst <= exact_tol, f"{worst:.3g}"))

    dtd = ops.laplace_form(g).dense()
    lap = ops.laplacian(g).dense()
    factor = 1.0 if g.directed else 2.0
    err = _max_abs(dtd + factor * lap)
    label = "d*d = -Delta" if g.directed else "d*d = -2 Delta"
    out.append(Check(label, err <= exact_tol, f"{err:.3g}"))

    d1, d2 = ops.ingoing_map(g).dense(), ops.outgoing_map(g).dense()
    if g.directed:
        v_in, v_out = (x.dense() for x in ops.degree(g))
        a_out = ops.out_adjacency(g).dense()
        err = max(_max_abs(d1.T @ d1 - v_in), _max_abs(d2.T @ d2 - v_out),
                  _max_abs(d1.T @ d2 - a_out.T), _max_abs(d2.T @ d1 - a_out))
        out.append(Check("d1*d1 = V_in, d2*d2 = V_out, d1*d2 + d2*d1 = A_in + A_out",
                         err <= exact_tol, f"{err:.3g}"))
    else:
        v, a = ops.degree(g).dense(), ops.adjacency(g).dense()
        err = max(_max_abs(d1.T @ d1 - v), _max_abs(d2.T @ d2 - v),
                  _max_abs(d1.T @ d2 - a), _max_abs(d2.T @ d1 - a))
        out.append(Check("d1*d1 = d2*d2 = V, d1*d2 = d2*d1 = A", err <= exact_tol, f"{err:.3g}"))

    D = ops.dirac(g).dense()
    chi = ops.grading(g).dense()
    out.append(Check("D self-adjoint", _max_abs(D - D.T) == 0.0))
    out.append(Check("chi D + D chi = 0", _max_abs(chi @ D + D @ chi) == 0.0))
    d = ops.coboundary_operator(g).dense()
    D2 = D @ D
    err = max(_max_abs(D2[:n, :n] - d.T @ d), _max_abs(D2[n:, n:] - d @ d.T),
              _max_abs(D2[:n, n:]), _max_abs(D2[n:, :n]))
    out.append(Check("D^2 = diag(d*d, dd*)", err <= exact_tol, f"{err:.3g}"))

    worst_norm = 0.0
    worst_chi = 0.0
    for _ in range(trials):
        f = rng.standard_normal(n)
        comm = ops.commutator_operator(g, f)
        power = operator_norm(comm, 1e-11)
        worst_norm = max(worst_norm, abs(power.value - ops.commutator_norm(g, f)))
        F = ops.multiplication(g, f).dense()
        worst_chi = max(worst_chi, _max_abs(chi @ F - F @ chi))
    out.append(Check("||[D,f]|| closed form = power iteration", worst_norm <= 1e-8,
                     f"{worst_norm:.3g}"))
    out.append(Check("[chi, f] = 0", worst_chi == 0.0))

    worst = 0.0
    for _ in range(trials):
        f = rng.standard_normal(n)
        df = ops.coboundary(g, f)
        lhs = df @ df
        worst = max(worst, abs(lhs - f @ dtd @ f) / max(1.0, lhs))
        if not g.directed:
            rhs = 2 * (f @ v @ f - f @ a @ f)
            worst = max(worst, abs(lhs - rhs) / max(1.0, lhs))
    out.append(Check("||df||^2 = <f|d*d f>", worst <= 1e-12, f"{worst:.3g}"))

    got = ops.cycle_space_dimension(g)
    want = ops.expected_cycle_space_dimension(g)
    out.append(Check("dim Ker(d*) = sum v_i - (n - c)", got == want, f"{got} vs {want}"))

    if not g.directed and m:
        lap_norm = spectral_norm(ops.laplacian(g)).value
        a_norm = spectral_norm(ops.adjacency(g)).value
        ok = lap_norm <= g.v_max + a_norm + 1e-8
        out.append(Check("||-Delta|| <= v_max + ||A||", ok,
                         f"{lap_norm:.6g} <= {g.v_max} + {a_norm:.6g}"))
    return out
