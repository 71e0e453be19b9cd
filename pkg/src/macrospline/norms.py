"""Quadrature-based error norms over element meshes.

Norms of a difference field (analytic field minus interpolant) are
computed by tensor Gauss rules per element and accumulated pairwise in a
fixed element order, so results are bit-identical regardless of any
parallelism upstream.  Broken second-order seminorms never integrate
across element interfaces, where the interpolant's second derivatives
jump.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .interpolation import CompositeInterpolant, PiecewisePoly2D
from .mesh import EdgeInfo

__all__ = [
    "QuadratureRule",
    "gauss_rule",
    "seminorm",
    "edge_l2",
    "jump_norm_sum",
    "linf_sampled",
    "NormReport",
    "compute_norm_report",
]

FIRST_ORDER = ((1, 0), (0, 1))
SECOND_ORDER = ((2, 0), (1, 1), (0, 2))


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes/weights on [-1, 1]; exact through degree 2*order-1."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray


def gauss_rule(order: int = 5) -> QuadratureRule:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return QuadratureRule(order, nodes, weights)


def _pairwise_sum(values) -> float:
    """Tree reduction with a fixed association order."""
    vals = list(values)
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return float(vals[0])


def _unwrap(interp):
    if isinstance(interp, CompositeInterpolant):
        return interp.poly
    return interp


def _all_elements(poly: PiecewisePoly2D):
    nx, ny = len(poly.grid_x) - 1, len(poly.grid_y) - 1
    return [(ix, jy) for jy in range(ny) for ix in range(nx)]


def _difference_batch(field, poly, elements, loc_x, loc_y, alpha):
    """D^alpha (field - poly) at tensor local points on many elements.

    Returns an array of shape (n_elements, len(loc_x), len(loc_y)).
    """
    ix = np.array([e[0] for e in elements], dtype=int)
    jy = np.array([e[1] for e in elements], dtype=int)
    gx, gy = poly.grid_x, poly.grid_y
    wx = gx[ix + 1] - gx[ix]
    wy = gy[jy + 1] - gy[jy]
    c = poly._deriv_coef(alpha[0], alpha[1])[jy, ix]
    P = loc_x[:, None] ** np.arange(c.shape[1])[None, :]
    Q = loc_y[:, None] ** np.arange(c.shape[2])[None, :]
    vals = np.einsum("ekl,pk,ql->epq", c, P, Q)
    vals *= ((2.0 / wx) ** alpha[0] * (2.0 / wy) ** alpha[1])[:, None, None]
    if field is not None:
        X = (0.5 * (gx[ix] + gx[ix + 1]))[:, None] + (0.5 * wx)[:, None] * loc_x[None, :]
        Y = (0.5 * (gy[jy] + gy[jy + 1]))[:, None] + (0.5 * wy)[:, None] * loc_y[None, :]
        F = np.asarray(field(X[:, :, None], Y[:, None, :], alpha[0], alpha[1]), dtype=float)
        return F - vals
    return -vals


def seminorm(field, interp, alpha=(0, 0), region=None, rule: QuadratureRule | None = None) -> float:
    """L2 norm of D^alpha (field - interp) over a set of elements.

    ``region`` is an iterable of element indices (ix, jy); the whole mesh
    by default.  Either the field or the interpolant may be None.
    """
    poly = _unwrap(interp)
    if rule is None:
        rule = gauss_rule()
    if poly is None:
        raise ValueError("an interpolant is required to define the element mesh")
    elements = sorted(region if region is not None else _all_elements(poly), key=lambda e: (e[1], e[0]))
    if not elements:
        return 0.0
    diff = _difference_batch(field, poly, elements, rule.nodes, rule.nodes, alpha)
    ix = np.array([e[0] for e in elements], dtype=int)
    jy = np.array([e[1] for e in elements], dtype=int)
    jac = 0.25 * (poly.grid_x[ix + 1] - poly.grid_x[ix]) * (poly.grid_y[jy + 1] - poly.grid_y[jy])
    contributions = jac * np.einsum("p,q,epq->e", rule.weights, rule.weights, diff * diff)
    return float(np.sqrt(max(_pairwise_sum(contributions), 0.0)))


def _edge_points(edge: EdgeInfo, rule: QuadratureRule):
    (x0, y0), (x1, y1) = edge.endpoints
    half = 0.5 * edge.length
    if edge.orientation == "horizontal":
        xs = 0.5 * (x0 + x1) + half * rule.nodes
        ys = np.full_like(xs, y0)
    else:
        ys = 0.5 * (y0 + y1) + half * rule.nodes
        xs = np.full_like(ys, x0)
    return xs, ys, half


def edge_l2(field, interp, edge: EdgeInfo, rule: QuadratureRule | None = None, alpha=(0, 0), side: str = "-") -> float:
    """L2 norm of the difference trace along one edge (one-sided)."""
    poly = _unwrap(interp)
    if rule is None:
        rule = gauss_rule()
    xs, ys, half = _edge_points(edge, rule)
    if edge.orientation == "horizontal":
        sides = ("-", side)
    else:
        sides = (side, "-")
    vals = 0.0
    if field is not None:
        vals = np.asarray(field(xs, ys, alpha[0], alpha[1]), dtype=float)
    if poly is not None:
        vals = vals - poly.evaluate(xs, ys, alpha[0], alpha[1], side=sides)
    return float(np.sqrt(half * np.dot(rule.weights, vals * vals)))


def _jump_batch(field, poly, edges, rule, orientation):
    """Per-edge squared normal-derivative jump integrals (vectorized)."""
    if not edges:
        return np.zeros(0)
    p0 = np.array([e.endpoints[0] for e in edges])
    p1 = np.array([e.endpoints[1] for e in edges])
    half = 0.5 * np.array([e.length for e in edges])
    if orientation == "horizontal":
        X = (0.5 * (p0[:, 0] + p1[:, 0]))[:, None] + half[:, None] * rule.nodes[None, :]
        Y = np.broadcast_to(p0[:, 1][:, None], X.shape)
        alpha, lo_side, hi_side = (0, 1), ("-", "-"), ("-", "+")
    else:
        Y = (0.5 * (p0[:, 1] + p1[:, 1]))[:, None] + half[:, None] * rule.nodes[None, :]
        X = np.broadcast_to(p0[:, 0][:, None], Y.shape)
        alpha, lo_side, hi_side = (1, 0), ("-", "-"), ("+", "-")
    lo = poly.evaluate(X, Y, alpha[0], alpha[1], side=lo_side)
    hi = poly.evaluate(X, Y, alpha[0], alpha[1], side=hi_side)
    if field is not None:
        f = np.asarray(field(X, Y, alpha[0], alpha[1]), dtype=float)
        jump = (f - lo) - (f - hi)
    else:
        jump = lo - hi
    return half * ((jump * jump) @ rule.weights)


def jump_norm_sum(field, interp, edges, rule: QuadratureRule | None = None) -> float:
    """Sum over edges of the squared L2 norm of the normal-derivative jump.

    The jump is the trace from the lower-index element minus the trace
    from the higher one, matching normals that point in the increasing
    coordinate direction.
    """
    poly = _unwrap(interp)
    if rule is None:
        rule = gauss_rule()
    ordered = sorted(edges, key=lambda e: e.endpoints)
    if any(e.edge_type == "boundary" for e in ordered):
        raise ValueError("jump norms are defined on interior edges only")
    contributions = np.zeros(len(ordered))
    for orientation in ("horizontal", "vertical"):
        idx = [k for k, e in enumerate(ordered) if e.orientation == orientation]
        vals = _jump_batch(field, poly, [ordered[k] for k in idx], rule, orientation)
        contributions[idx] = vals
    return _pairwise_sum(contributions)


def linf_sampled(field, interp, region=None, samples_per_element: int = 5) -> float:
    """Max |difference| over a deterministic tensor sample grid."""
    poly = _unwrap(interp)
    elements = sorted(region if region is not None else _all_elements(poly), key=lambda e: (e[1], e[0]))
    if not elements:
        return 0.0
    loc = np.linspace(-1.0, 1.0, samples_per_element)
    diff = _difference_batch(field, poly, elements, loc, loc, (0, 0))
    return float(np.max(np.abs(diff)))


# ---------------------------------------------------------------------------
# Aggregated reports.
# ---------------------------------------------------------------------------


@dataclass
class NormReport:
    """Per-region and global error norms plus typed edge-jump sums."""

    regional: dict
    global_values: dict
    jump_sums: dict = dataclass_field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": "macrospline-norms/1",
                "regional": self.regional,
                "global": self.global_values,
                "jump_sums": self.jump_sums,
            },
            indent=1,
        )

    def to_csv_rows(self):
        for region in sorted(self.regional):
            for quantity in sorted(self.regional[region]):
                yield (region, quantity, self.regional[region][quantity])
        for quantity in sorted(self.global_values):
            yield ("global", quantity, self.global_values[quantity])
        for edge_type in sorted(self.jump_sums):
            yield ("edges", f"jump2_{edge_type}", self.jump_sums[edge_type])


def compute_norm_report(field, interp, mesh, edges=None, rule: QuadratureRule | None = None, samples_per_element: int = 4) -> NormReport:
    """L2, H1-semi, broken-H2-semi and sampled sup norms per subdomain."""
    poly = _unwrap(interp)
    if rule is None:
        rule = gauss_rule()
    by_region = {}
    N = mesh.N
    for jy in range(N):
        for ix in range(N):
            by_region.setdefault(mesh.region[jy, ix], []).append((ix, jy))

    regional = {}
    for region, elements in sorted(by_region.items()):
        l2 = seminorm(field, poly, (0, 0), elements, rule)
        h1 = np.sqrt(_pairwise_sum(seminorm(field, poly, a, elements, rule) ** 2 for a in FIRST_ORDER))
        h2 = np.sqrt(_pairwise_sum(seminorm(field, poly, a, elements, rule) ** 2 for a in SECOND_ORDER))
        regional[region] = {
            "L2": l2,
            "H1_semi": float(h1),
            "broken_H2_semi": float(h2),
            "Linf_sampled": linf_sampled(field, poly, elements, samples_per_element),
        }
    global_values = {
        "L2": float(np.sqrt(_pairwise_sum(v["L2"] ** 2 for v in regional.values()))),
        "H1_semi": float(np.sqrt(_pairwise_sum(v["H1_semi"] ** 2 for v in regional.values()))),
        "broken_H2_semi": float(np.sqrt(_pairwise_sum(v["broken_H2_semi"] ** 2 for v in regional.values()))),
        "Linf_sampled": max(v["Linf_sampled"] for v in regional.values()),
    }
    jump_sums = {}
    if edges is not None:
        for edge_type in ("I", "II", "III", "IV"):
            subset = [e for e in edges if e.edge_type == edge_type]
            jump_sums[edge_type] = jump_norm_sum(field, poly, subset, rule) if subset else 0.0
    return NormReport(regional, global_values, jump_sums)
