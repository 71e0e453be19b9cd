"""Interpolation operators on tensor-product rectangle meshes.

All operators produce a :class:`PiecewisePoly2D`, a per-element grid of
tensor monomial coefficients in element-local coordinates.  Available
operators:

* full C1 macro interpolation from values and first/mixed derivatives at
  the four macro vertices (Lagrange and Newton assemblies),
* the reduced variant that drops the mixed-derivative basis functions,
* quasi-interpolation that replaces the mixed-derivative point values by
  weighted averages over selected macro edges,
* bicubic Hermite element interpolation,
* the anisotropic two-element macro operator (quadratic Lagrange along
  the long direction, C1 spline across),
* the standard biquadratic nodal interpolant,
* the composite operator on a Shishkin mesh that glues the above
  together with a continuous normal derivative across long edges.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .fields import ScalarField
from .mesh import MacroMesh, ShishkinMesh, SigmaEdge, SigmaSelection
from .spline_core import (
    DualWeight,
    HERMITE_DD_MATRIX,
    LAGRANGE3,
    LAGRANGE3_DD_MATRIX,
    NEWTON_LOCAL,
    REF_LOCAL,
    eval_dual_weight,
)

__all__ = [
    "PiecewisePoly2D",
    "CompositeInterpolant",
    "interp_full_macro",
    "interp_reduced_macro",
    "interp_bfs",
    "nodal_q2",
    "interp_aniso",
    "quasi_interp",
    "build_composite",
    "evaluate",
    "interp_full",
    "interp_reduced",
    "interp_bfs_mesh",
    "nodal_q2_mesh",
    "interp_aniso_mesh",
    "assemble_from_nodal_data",
    "random_c1q2",
    "sigma_average",
]

ASPECT_WARN = 1e8

# Row order of the Hermite data/basis pairing: value and scaled slope at
# the left endpoint, then at the right endpoint.
_HB = {}  # side -> (4 basis, 3 local coefficients)
for side in (0, 1):
    _HB[side] = np.vstack(
        [
            REF_LOCAL["phi_minus"][side],
            REF_LOCAL["psi_minus"][side],
            REF_LOCAL["phi_plus"][side],
            REF_LOCAL["psi_plus"][side],
        ]
    )
_NB = {side: np.vstack([NEWTON_LOCAL[k][side] for k in (1, 2, 3, 4)]) for side in (0, 1)}
_LG3 = np.vstack([LAGRANGE3[-1], LAGRANGE3[0], LAGRANGE3[1]])  # rows: nodes -1, 0, 1
# Newton basis in the Lagrange direction: 1, (x+1), (x+1)x
_LGN = np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
# Bicubic Newton basis 1, (x+1), (x+1)^2, (x+1)^2(x-1)
_BFSN = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0],
        [-1.0, -1.0, 1.0, 1.0],
    ]
)


# ---------------------------------------------------------------------------
# Piecewise polynomial container.
# ---------------------------------------------------------------------------


class PiecewisePoly2D:
    """Per-element tensor polynomial in element-local coordinates.

    ``coef[jy, ix, kx, ky]`` multiplies xi^kx * eta^ky with xi, eta in
    [-1, 1] over element (ix, jy).  All elements share one degree.
    """

    def __init__(self, grid_x, grid_y, coef):
        self.grid_x = np.asarray(grid_x, dtype=float)
        self.grid_y = np.asarray(grid_y, dtype=float)
        self.coef = np.asarray(coef, dtype=float)
        ny, nx = len(self.grid_y) - 1, len(self.grid_x) - 1
        if self.coef.shape[:2] != (ny, nx):
            raise ValueError("coefficient grid does not match the element mesh")

    @property
    def degree(self) -> tuple:
        return (self.coef.shape[2] - 1, self.coef.shape[3] - 1)

    def _locate(self, grid, v, side):
        idx = np.searchsorted(grid, v, side="left" if side == "-" else "right") - 1
        return np.clip(idx, 0, len(grid) - 2)

    def _deriv_coef(self, ax, ay):
        c = self.coef
        for _ in range(ax):
            c = np.polynomial.polynomial.polyder(c, axis=2)
        for _ in range(ay):
            c = np.polynomial.polynomial.polyder(c, axis=3)
        return c

    def evaluate(self, x, y, ax: int = 0, ay: int = 0, side=("-", "-")):
        """Pointwise D^(ax,ay) values; ``side`` picks the element at grid lines.

        The default takes the element with the lowest index whose closed
        bounding box contains the point; jump computations request the
        other limit explicitly.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        xb, yb = np.broadcast_arrays(x, y)
        if np.any(xb < self.grid_x[0] - 1e-12) or np.any(xb > self.grid_x[-1] + 1e-12):
            raise ValueError("x outside the mesh domain")
        if np.any(yb < self.grid_y[0] - 1e-12) or np.any(yb > self.grid_y[-1] + 1e-12):
            raise ValueError("y outside the mesh domain")
        flat_x, flat_y = xb.ravel(), yb.ravel()
        ix = self._locate(self.grid_x, flat_x, side[0])
        jy = self._locate(self.grid_y, flat_y, side[1])
        c = self._deriv_coef(ax, ay)
        wx = self.grid_x[ix + 1] - self.grid_x[ix]
        wy = self.grid_y[jy + 1] - self.grid_y[jy]
        xi = (2.0 * flat_x - self.grid_x[ix] - self.grid_x[ix + 1]) / wx
        eta = (2.0 * flat_y - self.grid_y[jy] - self.grid_y[jy + 1]) / wy
        out = np.empty_like(flat_x)
        key = jy * (len(self.grid_x) - 1) + ix
        order = np.argsort(key, kind="stable")
        sorted_key = key[order]
        starts = np.flatnonzero(np.r_[True, sorted_key[1:] != sorted_key[:-1]])
        bounds = np.r_[starts, len(sorted_key)]
        for s, e in zip(bounds[:-1], bounds[1:]):
            sel = order[s:e]
            ce = c[jy[sel[0]], ix[sel[0]]]
            out[sel] = np.polynomial.polynomial.polyval2d(xi[sel], eta[sel], ce)
        out *= (2.0 / wx) ** ax * (2.0 / wy) ** ay
        out = out.reshape(xb.shape)
        return out if out.ndim else float(out)

    def __call__(self, x, y, ax=0, ay=0):
        return self.evaluate(x, y, ax, ay)

    def element_values(self, ix, jy, xi, eta, ax=0, ay=0):
        """D^(ax,ay) on one element at local coordinates (vectorized)."""
        c = self.coef[jy, ix]
        for _ in range(ax):
            c = np.polynomial.polynomial.polyder(c, axis=0)
        for _ in range(ay):
            c = np.polynomial.polynomial.polyder(c, axis=1)
        wx = self.grid_x[ix + 1] - self.grid_x[ix]
        wy = self.grid_y[jy + 1] - self.grid_y[jy]
        return np.polynomial.polynomial.polyval2d(xi, eta, c) * (2.0 / wx) ** ax * (2.0 / wy) ** ay

    def as_field(self, name: str = "mesh_function") -> ScalarField:
        return ScalarField(name, lambda x, y, ax, ay: self.evaluate(x, y, ax, ay))

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": "macrospline-poly/1",
                "grid_x": self.grid_x.tolist(),
                "grid_y": self.grid_y.tolist(),
                "degree": list(self.degree),
                "coef": self.coef.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "PiecewisePoly2D":
        data = json.loads(text)
        if data.get("schema") != "macrospline-poly/1":
            raise ValueError("unrecognized serialization schema")
        return cls(data["grid_x"], data["grid_y"], np.asarray(data["coef"]))

    def to_csv_rows(self):
        ny, nx, dx, dy = self.coef.shape
        for jy in range(ny):
            for ix in range(nx):
                for kx in range(dx):
                    for ky in range(dy):
                        yield (ix, jy, kx, ky, self.coef[jy, ix, kx, ky])


def evaluate(interpolant, x, y, alpha=(0, 0), side=("-", "-")):
    """Evaluate an interpolant (or composite) with an explicit side convention."""
    poly = interpolant.poly if isinstance(interpolant, CompositeInterpolant) else interpolant
    return poly.evaluate(x, y, alpha[0], alpha[1], side=side)


# ---------------------------------------------------------------------------
# Local data collection.
# ---------------------------------------------------------------------------


def _check_macro(x0, x1, y0, y1):
    if not (x1 > x0 and y1 > y0):
        raise ValueError("degenerate macro bounds")
    aspect = max((x1 - x0) / (y1 - y0), (y1 - y0) / (x1 - x0))
    if aspect > ASPECT_WARN:
        warnings.warn(f"macro aspect ratio {aspect:.2e} may lose precision", stacklevel=3)


def _hermite_data(field, x0, x1, y0, y1):
    """4x4 matrix of scaled corner data in the Hermite row/column order."""
    hx, hy = 0.5 * (x1 - x0), 0.5 * (y1 - y0)
    xs, ys = np.array([x0, x1]), np.array([y0, y1])
    G = np.empty((4, 4))
    for px in (0, 1):
        for py in (0, 1):
            G[px::2, py::2] = hx**px * hy**py * np.asarray(field(xs[:, None], ys[None, :], px, py))
    return G


def _blocks_from_hermite(G):
    """Element-local [kx, ky] coefficient blocks, indexed [sy][sx]."""
    return [[_HB[sx].T @ G @ _HB[sy] for sx in (0, 1)] for sy in (0, 1)]


def _blocks_from_newton(G):
    F = HERMITE_DD_MATRIX @ G @ HERMITE_DD_MATRIX.T
    return [[_NB[sx].T @ F @ _NB[sy] for sx in (0, 1)] for sy in (0, 1)]


def _macro_poly(x0, x1, y0, y1, blocks) -> PiecewisePoly2D:
    gx = np.array([x0, 0.5 * (x0 + x1), x1])
    gy = np.array([y0, 0.5 * (y0 + y1), y1])
    coef = np.empty((2, 2, 3, 3))
    for sy in (0, 1):
        for sx in (0, 1):
            coef[sy, sx] = blocks[sy][sx]
    return PiecewisePoly2D(gx, gy, coef)


# ---------------------------------------------------------------------------
# Macro-level operators.
# ---------------------------------------------------------------------------


def interp_full_macro(field, macro, assembly: str = "lagrange") -> PiecewisePoly2D:
    """Full C1 macro interpolant on macro = (x0, x1, y0, y1), four elements.

    Matches value, both first derivatives and the mixed derivative of the
    field at the four macro vertices; reproduces biquadratics exactly.
    """
    x0, x1, y0, y1 = macro
    _check_macro(x0, x1, y0, y1)
    G = _hermite_data(field, x0, x1, y0, y1)
    if assembly == "lagrange":
        blocks = _blocks_from_hermite(G)
    elif assembly == "newton":
        blocks = _blocks_from_newton(G)
    else:
        raise ValueError("assembly must be 'lagrange' or 'newton'")
    return _macro_poly(x0, x1, y0, y1, blocks)


def interp_reduced_macro(field, macro) -> PiecewisePoly2D:
    """Reduced macro interpolant: mixed-derivative coefficients set to zero."""
    x0, x1, y0, y1 = macro
    _check_macro(x0, x1, y0, y1)
    G = _hermite_data(field, x0, x1, y0, y1)
    G[1, 1] = G[1, 3] = G[3, 1] = G[3, 3] = 0.0
    return _macro_poly(x0, x1, y0, y1, _blocks_from_hermite(G))


def interp_bfs(field, element) -> PiecewisePoly2D:
    """Bicubic Hermite interpolant on one element from the 16 corner functionals."""
    x0, x1, y0, y1 = element
    _check_macro(x0, x1, y0, y1)
    G = _hermite_data(field, x0, x1, y0, y1)
    F = HERMITE_DD_MATRIX @ G @ HERMITE_DD_MATRIX.T
    C = _BFSN.T @ F @ _BFSN
    return PiecewisePoly2D(np.array([x0, x1]), np.array([y0, y1]), C[None, None, :, :])


def nodal_q2(field, element) -> PiecewisePoly2D:
    """Standard biquadratic nodal interpolant on one element (3x3 nodes)."""
    x0, x1, y0, y1 = element
    _check_macro(x0, x1, y0, y1)
    xs = np.array([x0, 0.5 * (x0 + x1), x1])
    ys = np.array([y0, 0.5 * (y0 + y1), y1])
    V = np.asarray(field(xs[:, None], ys[None, :], 0, 0))
    C = _LG3.T @ V @ _LG3
    return PiecewisePoly2D(np.array([x0, x1]), np.array([y0, y1]), C[None, None, :, :])


def _aniso_blocks_y(field, x0, x1, y0, y1, assembly, dy_override=None):
    """Coefficient blocks [sy] for the y-spline anisotropic operator.

    ``dy_override``: optional (bottom, top) arrays replacing the y-derivative
    data at the three Lagrange points of that edge (used to match an
    adjacent interpolant's normal derivative).
    """
    hy = 0.5 * (y1 - y0)
    xs = np.array([x0, 0.5 * (x0 + x1), x1])
    ys = np.array([y0, y1])
    G = np.empty((3, 4))
    for py in (0, 1):
        G[:, py::2] = hy**py * np.asarray(field(xs[:, None], ys[None, :], 0, py))
    if dy_override is not None:
        bottom, top = dy_override
        if bottom is not None:
            G[:, 1] = hy * np.asarray(bottom)
        if top is not None:
            G[:, 3] = hy * np.asarray(top)
    if assembly == "lagrange":
        return [_LG3.T @ G @ _HB[sy] for sy in (0, 1)]
    F = LAGRANGE3_DD_MATRIX @ G @ HERMITE_DD_MATRIX.T
    return [_LGN.T @ F @ _NB[sy] for sy in (0, 1)]


class _Transposed:
    def __init__(self, field):
        self.field = field

    def __call__(self, x, y, ax=0, ay=0):
        return self.field(y, x, ay, ax)


def interp_aniso(field, macro, orientation: str = "y_spline", assembly: str = "lagrange", deriv_override=None) -> PiecewisePoly2D:
    """Anisotropic two-element macro interpolant.

    For ``y_spline`` the macro is one element wide and split across its
    height: quadratic Lagrange along x through the edge endpoints and
    midpoint, C1 quadratic spline along y from values and y-derivatives
    on the two long edges.  ``x_spline`` swaps the roles.
    """
    x0, x1, y0, y1 = macro
    _check_macro(x0, x1, y0, y1)
    if orientation == "y_spline":
        blocks = _aniso_blocks_y(field, x0, x1, y0, y1, assembly, deriv_override)
        gx = np.array([x0, x1])
        gy = np.array([y0, 0.5 * (y0 + y1), y1])
        coef = np.empty((2, 1, 3, 3))
        for sy in (0, 1):
            coef[sy, 0] = blocks[sy]
        return PiecewisePoly2D(gx, gy, coef)
    if orientation == "x_spline":
        swapped = interp_aniso(_Transposed(field), (y0, y1, x0, x1), "y_spline", assembly, deriv_override)
        coef = np.transpose(swapped.coef, (1, 0, 3, 2))
        return PiecewisePoly2D(swapped.grid_y, swapped.grid_x, coef)
    raise ValueError("orientation must be 'y_spline' or 'x_spline'")


# ---------------------------------------------------------------------------
# Mesh-level drivers.
# ---------------------------------------------------------------------------


def _mesh_driver(field, mesh: MacroMesh, macro_op) -> PiecewisePoly2D:
    nmx, nmy = mesh.n_macros
    gx, gy = mesh.element_x, mesh.element_y
    coef = np.zeros((2 * nmy, 2 * nmx, 3, 3))
    for mj in range(nmy):
        for mi in range(nmx):
            local = macro_op(field, mesh.macro_bounds(mi, mj), (mi, mj))
            coef[2 * mj : 2 * mj + 2, 2 * mi : 2 * mi + 2] = local.coef
    return PiecewisePoly2D(gx, gy, coef)


def interp_full(field, mesh: MacroMesh, assembly: str = "lagrange") -> PiecewisePoly2D:
    return _mesh_driver(field, mesh, lambda f, b, _: interp_full_macro(f, b, assembly))


def interp_reduced(field, mesh: MacroMesh) -> PiecewisePoly2D:
    return _mesh_driver(field, mesh, lambda f, b, _: interp_reduced_macro(f, b))


def interp_bfs_mesh(field, grid_x, grid_y) -> PiecewisePoly2D:
    gx, gy = np.asarray(grid_x, dtype=float), np.asarray(grid_y, dtype=float)
    coef = np.zeros((len(gy) - 1, len(gx) - 1, 4, 4))
    for jy in range(len(gy) - 1):
        for ix in range(len(gx) - 1):
            coef[jy, ix] = interp_bfs(field, (gx[ix], gx[ix + 1], gy[jy], gy[jy + 1])).coef[0, 0]
    return PiecewisePoly2D(gx, gy, coef)


def nodal_q2_mesh(field, grid_x, grid_y) -> PiecewisePoly2D:
    gx, gy = np.asarray(grid_x, dtype=float), np.asarray(grid_y, dtype=float)
    coef = np.zeros((len(gy) - 1, len(gx) - 1, 3, 3))
    for jy in range(len(gy) - 1):
        for ix in range(len(gx) - 1):
            coef[jy, ix] = nodal_q2(field, (gx[ix], gx[ix + 1], gy[jy], gy[jy + 1])).coef[0, 0]
    return PiecewisePoly2D(gx, gy, coef)


def interp_aniso_mesh(field, lagrange_grid, spline_grid, orientation: str = "y_spline") -> PiecewisePoly2D:
    """Anisotropic operator over a mesh: one grid of plain elements along the
    Lagrange direction, one grid of two-element macros across it."""
    lag = np.asarray(lagrange_grid, dtype=float)
    spl = np.asarray(spline_grid, dtype=float)
    if orientation == "y_spline":
        gx, gy = lag, _bisect_coords(spl)
        coef = np.zeros((len(gy) - 1, len(gx) - 1, 3, 3))
        for mj in range(len(spl) - 1):
            for ix in range(len(lag) - 1):
                local = interp_aniso(field, (lag[ix], lag[ix + 1], spl[mj], spl[mj + 1]), "y_spline")
                coef[2 * mj : 2 * mj + 2, ix] = local.coef[:, 0]
        return PiecewisePoly2D(gx, gy, coef)
    swapped = interp_aniso_mesh(_Transposed(field), lagrange_grid, spline_grid, "y_spline")
    coef = np.transpose(swapped.coef, (1, 0, 3, 2))
    return PiecewisePoly2D(swapped.grid_y, swapped.grid_x, coef)


def _bisect_coords(c):
    out = np.empty(2 * len(c) - 1)
    out[0::2] = c
    out[1::2] = 0.5 * (c[:-1] + c[1:])
    return out


# ---------------------------------------------------------------------------
# Quasi-interpolation.
# ---------------------------------------------------------------------------

_GAUSS5 = np.polynomial.legendre.leggauss(5)


def sigma_average(field, edge: SigmaEdge) -> float:
    """Weighted mean of the mixed derivative over one macro edge.

    Five-point Gauss on each half of the edge, split at the midpoint
    where the weight (and a mesh function's derivative) may kink.
    """
    lo, hi = edge.span
    weight = DualWeight((lo, hi), edge.node_side)
    mid = 0.5 * (lo + hi)
    nodes, wts = _GAUSS5
    total = 0.0
    for a, b in ((lo, mid), (mid, hi)):
        half = 0.5 * (b - a)
        pts = 0.5 * (a + b) + half * nodes
        if edge.orientation == "horizontal":
            vals = field(pts, np.full_like(pts, edge.level), 1, 1)
        else:
            vals = field(np.full_like(pts, edge.level), pts, 1, 1)
        total += half * float(np.dot(wts, np.asarray(vals) * eval_dual_weight(weight, pts)))
    return total


def quasi_interp(field, mesh: MacroMesh, sigma: SigmaSelection) -> PiecewisePoly2D:
    """Quasi-interpolant: reduced operator plus edge-averaged mixed terms.

    The coefficient of each mixed-derivative basis function is the
    weighted mean of u_xy over the node's sigma edge, which preserves
    every C1 biquadratic mesh function and any field that is biquadratic
    on the associated macro patch.
    """
    nmx, nmy = mesh.n_macros
    averages = {}

    def macro_op(f, bounds, idx):
        mi, mj = idx
        x0, x1, y0, y1 = bounds
        hx, hy = 0.5 * (x1 - x0), 0.5 * (y1 - y0)
        G = _hermite_data(f, x0, x1, y0, y1)
        for (p, q), node in (((1, 1), (mi, mj)), ((1, 3), (mi, mj + 1)), ((3, 1), (mi + 1, mj)), ((3, 3), (mi + 1, mj + 1))):
            node = tuple(node)
            if node not in averages:
                averages[node] = sigma_average(f, sigma.edge(node))
            G[p, q] = hx * hy * averages[node]
        return _macro_poly(x0, x1, y0, y1, _blocks_from_hermite(G))

    return _mesh_driver(field, mesh, macro_op)


def assemble_from_nodal_data(mesh: MacroMesh, dofs) -> PiecewisePoly2D:
    """C1 biquadratic mesh function from nodal (v, v_x, v_y, v_xy) data."""

    def macro_op(_f, bounds, idx):
        mi, mj = idx
        x0, x1, y0, y1 = bounds
        hx, hy = 0.5 * (x1 - x0), 0.5 * (y1 - y0)
        G = np.empty((4, 4))
        for p, (px, di) in enumerate(((0, 0), (1, 0), (0, 1), (1, 1))):
            for q, (py, dj) in enumerate(((0, 0), (1, 0), (0, 1), (1, 1))):
                v = dofs[(mi + di, mj + dj)]
                G[p, q] = hx**px * hy**py * v[px + 2 * py]
        return _macro_poly(x0, x1, y0, y1, _blocks_from_hermite(G))

    return _mesh_driver(None, mesh, macro_op)


def random_c1q2(mesh: MacroMesh, rng) -> PiecewisePoly2D:
    """Random member of the C1 biquadratic space over the element mesh."""
    nmx, nmy = mesh.n_macros
    dofs = {}
    for i in range(nmx + 1):
        for j in range(nmy + 1):
            dofs[(i, j)] = tuple(rng.normal(size=4))
    return assemble_from_nodal_data(mesh, dofs)


# ---------------------------------------------------------------------------
# Shishkin composite interpolant.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompositeInterpolant:
    """Region-wise interpolant on a Shishkin mesh, stored as one global
    piecewise biquadratic plus the interface-matching coefficients."""

    poly: PiecewisePoly2D
    mesh: ShishkinMesh
    modifications: dict

    def __call__(self, x, y, ax=0, ay=0):
        return self.poly.evaluate(x, y, ax, ay)


def _nodal_edge_slope(field, coords_along, level, step, orientation, inward: int):
    """Derivative of the interior nodal interpolant transverse to an
    interface, at points along it.

    ``inward`` is +1 when the interior element extends to larger
    transverse coordinates, -1 otherwise.  The derivative of a quadratic
    through the interface node, the first interior midpoint and the first
    interior node is a fixed nodal combination.
    """
    s = np.asarray(coords_along, dtype=float)
    lv = level

    def at(offset):
        if orientation == "horizontal":  # values along a horizontal line
            return np.asarray(field(s, np.full_like(s, lv + offset)))
        return np.asarray(field(np.full_like(s, lv + offset), s))

    v0 = at(0.0)
    v1 = at(inward * step * 0.5)
    v2 = at(inward * step)
    return inward * (-3.0 * v0 + 4.0 * v1 - v2) / step


def build_composite(field, mesh: ShishkinMesh, sigma: SigmaSelection) -> CompositeInterpolant:
    """Glue quasi-, anisotropic and nodal interpolation on a Shishkin mesh.

    Corner regions use the quasi-interpolant, the edge strips the
    anisotropic macro operator with the interface slope replaced by the
    interior nodal interpolant's slope, and the interior plain nodal
    interpolation; the result is continuous with a continuous normal
    derivative across long (type II) and corner-region (type IV) edges.
    """
    N = mesh.N
    n4 = N // 4
    gx, gy = mesh.grid_x, mesh.grid_y
    H = mesh.coarse_step
    coef = np.zeros((N, N, 3, 3))
    averages = {}

    def corner_average(node):
        if node not in averages:
            averages[node] = sigma_average(field, sigma.edge(node))
        return averages[node]

    modifications = {}

    def interface_slopes(key, coords, level, orientation, inward):
        if key not in modifications:
            modifications[key] = _nodal_edge_slope(field, coords, level, H, orientation, inward)
        return modifications[key]

    def coarse_points(grid, k0):
        return np.array([grid[k0], 0.5 * (grid[k0] + grid[k0 + 1]), grid[k0 + 1]])

    def junction_slopes(a, b):
        """Interior nodal-interpolant slopes (d/dx, d/dy) at a strip/corner
        junction node, shared bitwise with the adjacent strip macros."""
        col = n4 if a == n4 else 3 * n4 - 1
        row = n4 if b == n4 else 3 * n4 - 1
        pick_x = 0 if a == n4 else 2
        pick_y = 0 if b == n4 else 2
        dy = interface_slopes(("y", gy[b], col), coarse_points(gx, col), gy[b], "horizontal", +1 if b == n4 else -1)[pick_x]
        dx = interface_slopes(("x", gx[a], row), coarse_points(gy, row), gx[a], "vertical", +1 if a == n4 else -1)[pick_y]
        return dx, dy

    junctions = {(n4, n4), (n4, 3 * n4), (3 * n4, n4), (3 * n4, 3 * n4)}

    for m in mesh.macros:
        i0, i1 = m.ix
        j0, j1 = m.jy
        x0, x1, y0, y1 = gx[i0], gx[i1], gy[j0], gy[j1]
        if m.kind == "single":
            coef[j0, i0] = nodal_q2(field, (x0, x1, y0, y1)).coef[0, 0]
        elif m.kind == "corner4":
            hx, hy = 0.5 * (x1 - x0), 0.5 * (y1 - y0)
            G = _hermite_data(field, x0, x1, y0, y1)
            for (p, q), node in (
                ((1, 1), (i0, j0)),
                ((1, 3), (i0, j1)),
                ((3, 1), (i1, j0)),
                ((3, 3), (i1, j1)),
            ):
                G[p, q] = hx * hy * corner_average(node)
            # slope dofs at a junction node follow the interior nodal
            # interpolant so the traces agree with the modified strips
            for di in (0, 1):
                for dj in (0, 1):
                    node = (i0 if di == 0 else i1, j0 if dj == 0 else j1)
                    if node in junctions:
                        dx, dy = junction_slopes(*node)
                        G[2 * di + 1, 2 * dj] = hx * dx
                        G[2 * di, 2 * dj + 1] = hy * dy
            local = _macro_poly(x0, x1, y0, y1, _blocks_from_hermite(G))
            coef[j0:j1, i0:i1] = local.coef
        elif m.kind == "strip2y":
            xs3 = np.array([x0, 0.5 * (x0 + x1), x1])
            override = [None, None]
            if m.region == "omega1" and j1 == n4:
                override[1] = interface_slopes(("y", gy[n4], i0), xs3, gy[n4], "horizontal", +1)
            if m.region == "omega3" and j0 == 3 * n4:
                override[0] = interface_slopes(("y", gy[3 * n4], i0), xs3, gy[3 * n4], "horizontal", -1)
            local = interp_aniso(field, (x0, x1, y0, y1), "y_spline", deriv_override=tuple(override))
            coef[j0:j1, i0:i1] = local.coef
        elif m.kind == "strip2x":
            ys3 = np.array([y0, 0.5 * (y0 + y1), y1])
            override = [None, None]
            if m.region == "omega2" and i1 == n4:
                override[1] = interface_slopes(("x", gx[n4], j0), ys3, gx[n4], "vertical", +1)
            if m.region == "omega4" and i0 == 3 * n4:
                override[0] = interface_slopes(("x", gx[3 * n4], j0), ys3, gx[3 * n4], "vertical", -1)
            local = interp_aniso(field, (x0, x1, y0, y1), "x_spline", deriv_override=tuple(override))
            coef[j0:j1, i0:i1] = local.coef
        else:
            raise ValueError(f"unknown macro kind {m.kind}")

    poly = PiecewisePoly2D(gx, gy, coef)
    return CompositeInterpolant(poly, mesh, modifications)
