"""Independent verification oracles.

Everything here re-derives quantities through a second route: finite
differences against analytic derivatives, naive recursive divided
differences against the table algorithm, quadrature evaluations of the
dual/associated functionals against their closed forms, and
bound-consistency ratios that track the right-hand sides of the error
estimates across refinement levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .interpolation import (
    assemble_from_nodal_data,
    interp_aniso,
    interp_bfs,
    interp_full_macro,
    interp_reduced_macro,
)
from .mesh import MacroMesh, build_macro_mesh
from .spline_core import (
    DualWeight,
    KnotSequence,
    edge_hat_basis,
    edge_spline_basis,
    edge_theta,
    eval_dual_weight,
    eval_ref_basis,
)

__all__ = [
    "CheckResult",
    "fd_check",
    "brute_force_divided_difference",
    "divided_difference_2d",
    "kronecker_table",
    "dual_weight_checks",
    "orthogonality_checks",
    "peano_checks",
    "reduced_functional_checks",
    "aniso_functional_checks",
    "check_duality_and_functionals",
    "check_trace_inequality",
    "BoundSpec",
    "BoundTerm",
    "bound_spec_catalog",
    "bound_consistency",
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.value <= self.tolerance

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance, "passed": self.passed}


# ---------------------------------------------------------------------------
# Finite differences.
# ---------------------------------------------------------------------------

_D1_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_D1_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_D2_OFFSETS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
_D2_WEIGHTS = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def _axis_stencil(order, step):
    if order == 0:
        return np.array([0.0]), np.array([1.0])
    if order == 1:
        return _D1_OFFSETS * step, _D1_WEIGHTS / step
    return _D2_OFFSETS * step, _D2_WEIGHTS / step**2


def fd_check(target, alpha, points, step=None) -> float:
    """Max deviation of analytic D^alpha from 4th-order central differences.

    ``target`` is any (x, y, ax, ay) evaluator; the deviation is relative
    to the magnitude of the derivative over the sample.  Points must keep
    two stencil steps clear of any element interface.
    """
    ax, ay = alpha
    if not (0 <= ax <= 2 and 0 <= ay <= 2):
        raise ValueError("finite-difference orders are limited to 2 per axis")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    hx = step if step is not None else (6e-3 if ax == 1 else 8e-3)
    hy = step if step is not None else (6e-3 if ay == 1 else 8e-3)
    if hx <= 0 or hy <= 0 or hx < 1e-8 or hy < 1e-8:
        raise ValueError("step underflow")
    offs_x, w_x = _axis_stencil(ax, hx)
    offs_y, w_y = _axis_stencil(ay, hy)
    exact = np.array([target(x, y, ax, ay) for x, y in pts])
    approx = np.zeros(len(pts))
    for ox, wx_ in zip(offs_x, w_x):
        for oy, wy_ in zip(offs_y, w_y):
            approx += wx_ * wy_ * np.array([target(x + ox, y + oy, 0, 0) for x, y in pts])
    scale = max(float(np.max(np.abs(exact))), 1.0)
    return float(np.max(np.abs(approx - exact))) / scale


# ---------------------------------------------------------------------------
# Divided-difference oracles.
# ---------------------------------------------------------------------------


def brute_force_divided_difference(knots: KnotSequence, field1d) -> float:
    """Naive recursion straight from the definition; ``field1d(x, order)``."""

    def rec(zs):
        if len(zs) == 1:
            return field1d(zs[0], 0)
        if zs[0] == zs[-1]:
            n = len(zs) - 1
            return field1d(zs[0], n) / math.factorial(n)
        return (rec(zs[1:]) - rec(zs[:-1])) / (zs[-1] - zs[0])

    return float(rec(tuple(knots.expanded())))


def divided_difference_2d(fn, xseq, yseq) -> float:
    """Two-dimensional divided difference of ``fn(x, y, ax, ay)``.

    The parametrized one-dimensional divided difference along x is
    differentiated in y through the coincident-knot branch.
    """

    def dd_x(y, ay):
        def rec(zs):
            if len(zs) == 1:
                return fn(zs[0], y, 0, ay)
            if zs[0] == zs[-1]:
                n = len(zs) - 1
                return fn(zs[0], y, n, ay) / math.factorial(n)
            return (rec(zs[1:]) - rec(zs[:-1])) / (zs[-1] - zs[0])

        return rec(tuple(xseq))

    def rec_y(zs):
        if len(zs) == 1:
            return dd_x(zs[0], 0)
        if zs[0] == zs[-1]:
            n = len(zs) - 1
            return dd_x(zs[0], n) / math.factorial(n)
        return (rec_y(zs[1:]) - rec_y(zs[:-1])) / (zs[-1] - zs[0])

    return float(rec_y(tuple(yseq)))


HERMITE_NODE_SEQS = {1: (-1.0,), 2: (-1.0, -1.0), 3: (-1.0, -1.0, 1.0), 4: (-1.0, -1.0, 1.0, 1.0)}
LAGRANGE_NODE_SEQS = {1: (-1.0,), 2: (-1.0, 0.0), 3: (-1.0, 0.0, 1.0)}


# ---------------------------------------------------------------------------
# Quadrature helpers on the reference square.
# ---------------------------------------------------------------------------

_GLN, _GLW = np.polynomial.legendre.leggauss(10)


def _gauss_1d(fn, a, b):
    half = 0.5 * (b - a)
    pts = 0.5 * (a + b) + half * _GLN
    return half * float(np.dot(_GLW, fn(pts)))


def _gauss_2d(fn, ax0, ax1, ay0, ay1):
    hx, hy = 0.5 * (ax1 - ax0), 0.5 * (ay1 - ay0)
    X = 0.5 * (ax0 + ax1) + hx * _GLN
    Y = 0.5 * (ay0 + ay1) + hy * _GLN
    XX, YY = np.meshgrid(X, Y, indexing="ij")
    return hx * hy * float(np.einsum("i,j,ij->", _GLW, _GLW, fn(XX, YY)))


def _s_weight(k):
    # Peano kernels (1-t)/4 and t/4
    if k == 1:
        return lambda t: (1.0 - t) / 4.0
    return lambda t: t / 4.0


# ---------------------------------------------------------------------------
# Kronecker duality table.
# ---------------------------------------------------------------------------


def kronecker_table() -> tuple:
    """All 256 pairings of corner functionals with nodal basis functions.

    Returns (max deviation from the delta pattern, the 16x16 table).
    """
    mesh = build_macro_mesh([-1.0, 1.0], [-1.0, 1.0])
    dof_kinds = ((0, 0), (1, 0), (0, 1), (1, 1))
    table = np.zeros((16, 16))
    col = 0
    for kind in range(4):
        for i in (0, 1):
            for j in (0, 1):
                dofs = {(a, b): [0.0] * 4 for a in (0, 1) for b in (0, 1)}
                dofs[(i, j)][kind] = 1.0
                p = assemble_from_nodal_data(mesh, {k: tuple(v) for k, v in dofs.items()})
                row = 0
                for wkind, (ax, ay) in enumerate(dof_kinds):
                    for a in (0, 1):
                        for b in (0, 1):
                            sx = "-" if a == 1 else "+"
                            sy = "-" if b == 1 else "+"
                            table[row, col] = p.evaluate(2 * a - 1.0, 2 * b - 1.0, ax, ay, side=(sx, sy))
                            row += 1
                col += 1
    dev = float(np.max(np.abs(table - np.eye(16))))
    return dev, table


# ---------------------------------------------------------------------------
# Dual weights, orthogonality, Peano form.
# ---------------------------------------------------------------------------


def dual_weight_checks() -> list:
    """Unit integral and duality system on uniform and 10:1-graded edges."""
    out = []
    for tag, (a, b) in (("uniform", (0.0, 1.0)), ("graded", (2.0, 2.1))):
        mid = 0.5 * (a + b)
        for dual_side in ("left", "right"):
            w = DualWeight((a, b), dual_side)
            unit = sum(_gauss_1d(lambda t: eval_dual_weight(w, t), lo, hi) for lo, hi in ((a, mid), (mid, b)))
            out.append(CheckResult(f"dual_unit_integral[{tag},{dual_side}]", abs(unit - 1.0), 1e-12))
            for basis_side in ("left", "right"):
                pair = sum(
                    _gauss_1d(lambda t: eval_dual_weight(w, t) * edge_spline_basis((a, b), basis_side, 1, t), lo, hi)
                    for lo, hi in ((a, mid), (mid, b))
                )
                want = 1.0 if dual_side == basis_side else 0.0
                out.append(CheckResult(f"dual_duality[{tag},{dual_side},{basis_side}]", abs(pair - want), 1e-12))
    return out


def orthogonality_checks() -> list:
    """The averaging space is L2-orthogonal to the hat-function slopes."""
    out = []
    for tag, (a, b) in (("uniform", (0.0, 1.0)), ("nonuniform", (0.7, 0.775))):
        mid = 0.5 * (a + b)

        def psum(t):
            return edge_spline_basis((a, b), "left", 0, t) + edge_spline_basis((a, b), "right", 0, t)

        for hat_side in ("left", "right"):
            for fname, fn in (("psi_sum", psum), ("theta", lambda t: edge_theta((a, b), t))):
                val = sum(
                    _gauss_1d(lambda t: fn(t) * edge_hat_basis((a, b), hat_side, 1, t), lo, hi)
                    for lo, hi in ((a, mid), (mid, b))
                )
                out.append(CheckResult(f"orthogonality[{tag},{fname},phi_{hat_side}']", abs(val), 1e-12))
    return out


def peano_checks(rng=None) -> list:
    """Second/third divided differences as weighted integrals of u''."""
    rng = rng or np.random.default_rng(123)
    out = []

    def check(fn, label):
        for i, nodes in ((1, (-1.0, -1.0, 1.0)), (2, (-1.0, -1.0, 1.0, 1.0))):
            s = _s_weight(i)
            lhs = brute_force_divided_difference(
                KnotSequence(((-1.0, 2), (1.0, i))), lambda x, o, f=fn: f(x, o)
            )
            rhs = _gauss_1d(lambda t, f=fn: s(t) * f(t, 2), -1.0, 0.0) + _gauss_1d(
                lambda t, f=fn: s(t) * f(t, 2), 0.0, 1.0
            )
            out.append(CheckResult(f"peano[{label},order{i + 1}]", abs(lhs - rhs), 1e-10))

    for trial in range(20):
        c = rng.normal(size=6)
        a_, b_ = rng.uniform(0.5, 3.0), rng.uniform(-1.0, 1.0)

        def poly_trig(x, order, c=c, a_=a_, b_=b_):
            d = np.asarray(c)
            for _ in range(order):
                d = np.polynomial.polynomial.polyder(d)
            return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), d) + a_**order * np.sin(
                a_ * np.asarray(x, dtype=float) + b_ + order * math.pi / 2
            )

        check(poly_trig, f"random{trial}")

    for kind in ("phi_minus", "phi_plus", "psi_minus", "psi_plus"):
        def basis(x, order, kind=kind):
            return eval_ref_basis(kind, min(order, 2), x) if order <= 2 else 0.0

        check(basis, kind)
    return out


# ---------------------------------------------------------------------------
# Associated functionals of the reduced operator.
# ---------------------------------------------------------------------------


def reduced_functional_checks(rng=None) -> list:
    """Mean-value identities and invariance for the reduced operator.

    For the x-derivative the associated functionals are the corner values
    plus edge means of v and v_y on the two horizontal edges; for the
    mixed derivative they are the four edge integrals and the area
    integral.  Each is checked for the closed-form identity and for
    invariance under interpolation.
    """
    rng = rng or np.random.default_rng(7)
    out = []
    macro = (-1.0, 1.0, -1.0, 1.0)
    for trial in range(5):
        from .fields import make_polynomial_field

        u = make_polynomial_field(rng.normal(size=(4, 4)))
        p = interp_reduced_macro(u, macro)

        def pu(x, y, ax, ay):
            return p.evaluate(x, y, ax, ay)

        # identity chain: edge mean of u_x equals the corner difference,
        # edge mean of u_xy the corner difference of u_y
        f5_u = 0.5 * (_gauss_1d(lambda x: u(x, np.full_like(x, -1.0), 1, 0), -1.0, 0.0) + _gauss_1d(lambda x: u(x, np.full_like(x, -1.0), 1, 0), 0.0, 1.0))
        out.append(CheckResult(f"reduced_F5_identity[{trial}]", abs(f5_u - 0.5 * (u(1, -1) - u(-1, -1))), 1e-10))
        f7_u = 0.5 * (_gauss_1d(lambda x: u(x, np.full_like(x, -1.0), 1, 1), -1.0, 0.0) + _gauss_1d(lambda x: u(x, np.full_like(x, -1.0), 1, 1), 0.0, 1.0))
        out.append(CheckResult(f"reduced_F7_identity[{trial}]", abs(f7_u - 0.5 * (u(1, -1, 0, 1) - u(-1, -1, 0, 1))), 1e-10))

        # invariance of the eight functionals for the x-derivative
        worst = 0.0
        for corner in ((-1, -1), (1, -1), (-1, 1), (1, 1)):
            sx = "-" if corner[0] > 0 else "+"
            sy = "-" if corner[1] > 0 else "+"
            worst = max(worst, abs(u(*corner, 1, 0) - p.evaluate(*corner, 1, 0, side=(sx, sy))))
        for ylevel, yside in ((-1.0, "-"), (1.0, "-")):
            for dy in (0, 1):
                fu = 0.5 * (
                    _gauss_1d(lambda x: u(x, np.full_like(x, ylevel), 1, dy), -1.0, 0.0)
                    + _gauss_1d(lambda x: u(x, np.full_like(x, ylevel), 1, dy), 0.0, 1.0)
                )
                fp = 0.5 * (
                    _gauss_1d(lambda x: p.evaluate(x, np.full_like(x, ylevel), 1, dy), -1.0, 0.0)
                    + _gauss_1d(lambda x: p.evaluate(x, np.full_like(x, ylevel), 1, dy), 0.0, 1.0)
                )
                worst = max(worst, abs(fu - fp))
        out.append(CheckResult(f"reduced_dx_invariance[{trial}]", worst, 1e-10))

        # mixed-derivative functionals: four edge integrals and the area mean
        worst = 0.0
        edges = (
            (lambda v: _gauss_1d(lambda x: v(x, np.full_like(x, -1.0), 1, 1), -1.0, 0.0) + _gauss_1d(lambda x: v(x, np.full_like(x, -1.0), 1, 1), 0.0, 1.0)),
            (lambda v: _gauss_1d(lambda x: v(x, np.full_like(x, 1.0), 1, 1), -1.0, 0.0) + _gauss_1d(lambda x: v(x, np.full_like(x, 1.0), 1, 1), 0.0, 1.0)),
            (lambda v: _gauss_1d(lambda y: v(np.full_like(y, -1.0), y, 1, 1), -1.0, 0.0) + _gauss_1d(lambda y: v(np.full_like(y, -1.0), y, 1, 1), 0.0, 1.0)),
            (lambda v: _gauss_1d(lambda y: v(np.full_like(y, 1.0), y, 1, 1), -1.0, 0.0) + _gauss_1d(lambda y: v(np.full_like(y, 1.0), y, 1, 1), 0.0, 1.0)),
            (lambda v: sum(_gauss_2d(lambda X, Y: v(X, Y, 1, 1), a0, a1, b0, b1) for a0, a1 in ((-1.0, 0.0), (0.0, 1.0)) for b0, b1 in ((-1.0, 0.0), (0.0, 1.0)))),
        )
        for k, F in enumerate(edges):
            worst = max(worst, abs(F(lambda x, y, ax, ay: u(x, y, ax, ay)) - F(pu)))
        out.append(CheckResult(f"reduced_dxy_invariance[{trial}]", worst, 1e-10))
    return out


# ---------------------------------------------------------------------------
# Associated functionals of the anisotropic operator (reference macro).
# ---------------------------------------------------------------------------


def _aniso_table_entries():
    """Entries of the associated-functional table as (i, j, gamma, evaluator).

    Each evaluator consumes v(x, y, ax, ay) representing D^gamma u and
    integrates over parts of the reference square; split in y at 0 where
    spline derivatives kink.
    """

    def int_x(v, a, b, ay=0):
        return _gauss_1d(lambda x: v(x, np.full_like(x, -1.0), 0, ay), a, b)

    def sy_line(v, k, x, ax, ay):
        s = _s_weight(k)

        def f(y):
            y = np.atleast_1d(y)
            return v(np.full_like(y, x), y, ax, ay)

        return _gauss_1d(lambda y: s(y) * f(y), -1.0, 0.0) + _gauss_1d(lambda y: s(y) * f(y), 0.0, 1.0)

    def sy_strip(v, k, a, b, ax, ay):
        s = _s_weight(k)

        def fn(X, Y):
            return v(X, Y, ax, ay)

        total = 0.0
        for y0, y1 in ((-1.0, 0.0), (0.0, 1.0)):
            hx, hy = 0.5 * (b - a), 0.5 * (y1 - y0)
            X = 0.5 * (a + b) + hx * _GLN
            Y = 0.5 * (y0 + y1) + hy * _GLN
            XX, YY = np.meshgrid(X, Y, indexing="ij")
            total += hx * hy * float(np.einsum("i,j,ij->", _GLW, _GLW * s(Y), fn(XX, YY)))
        return total

    entries = []
    # gamma = (1, 0)
    for ell in (1, 2):
        entries.append((2, ell, (1, 0), lambda v, ell=ell: int_x(v, -1.0, 0.0, ell - 1)))
        entries.append(
            (3, ell, (1, 0), lambda v, ell=ell: 0.5 * int_x(v, 0.0, 1.0, ell - 1) - 0.5 * int_x(v, -1.0, 0.0, ell - 1))
        )
    for k in (3, 4):
        entries.append((2, k, (1, 0), lambda v, k=k: sy_strip(v, k - 2, -1.0, 0.0, 0, 2)))
        entries.append(
            (3, k, (1, 0), lambda v, k=k: 0.5 * (sy_strip(v, k - 2, 0.0, 1.0, 0, 2) - sy_strip(v, k - 2, -1.0, 0.0, 0, 2)))
        )
    # gamma = (0, 1)
    entries.append((1, 2, (0, 1), lambda v: float(v(-1.0, -1.0, 0, 0))))
    entries.append((2, 2, (0, 1), lambda v: float(v(0.0, -1.0, 0, 0) - v(-1.0, -1.0, 0, 0))))
    entries.append((3, 2, (0, 1), lambda v: 0.5 * float(v(-1.0, -1.0, 0, 0) - 2.0 * v(0.0, -1.0, 0, 0) + v(1.0, -1.0, 0, 0))))
    for k in (3, 4):
        entries.append((1, k, (0, 1), lambda v, k=k: sy_line(v, k - 2, -1.0, 0, 1)))
        entries.append((2, k, (0, 1), lambda v, k=k: sy_strip(v, k - 2, -1.0, 0.0, 1, 1)))
        entries.append(
            (3, k, (0, 1), lambda v, k=k: 0.5 * (sy_line(v, k - 2, -1.0, 0, 1) - 2.0 * sy_line(v, k - 2, 0.0, 0, 1) + sy_line(v, k - 2, 1.0, 0, 1)))
        )
    # gamma = (1, 1)
    entries.append((2, 2, (1, 1), lambda v: int_x(v, -1.0, 0.0)))
    entries.append((3, 2, (1, 1), lambda v: 0.5 * int_x(v, 0.0, 1.0) - 0.5 * int_x(v, -1.0, 0.0)))
    for k in (3, 4):
        entries.append((2, k, (1, 1), lambda v, k=k: sy_strip(v, k - 2, -1.0, 0.0, 0, 1)))
        entries.append(
            (3, k, (1, 1), lambda v, k=k: 0.5 * (sy_strip(v, k - 2, 0.0, 1.0, 0, 1) - sy_strip(v, k - 2, -1.0, 0.0, 0, 1)))
        )
    # gamma = (0, 2)
    for k in (3, 4):
        entries.append((1, k, (0, 2), lambda v, k=k: sy_line(v, k - 2, -1.0, 0, 0)))
        entries.append((2, k, (0, 2), lambda v, k=k: sy_strip(v, k - 2, -1.0, 0.0, 1, 0)))
        entries.append(
            (3, k, (0, 2), lambda v, k=k: 0.5 * (sy_line(v, k - 2, -1.0, 0, 0) - 2.0 * sy_line(v, k - 2, 0.0, 0, 0) + sy_line(v, k - 2, 1.0, 0, 0)))
        )
    return entries


def aniso_functional_checks(rng=None) -> list:
    """Associated-functional table of the anisotropic operator.

    Verifies that each tabulated functional applied to D^gamma u equals
    the divided difference F_ij(u), and that the divided differences are
    invariant under interpolation.
    """
    rng = rng or np.random.default_rng(21)
    from .fields import make_polynomial_field

    out = []
    macro = (-1.0, 1.0, -1.0, 1.0)
    for trial in range(3):
        u = make_polynomial_field(rng.normal(size=(4, 4)))
        p = interp_aniso(u, macro, "y_spline")

        worst_id, worst_inv = 0.0, 0.0
        for i, j, gamma, functional in _aniso_table_entries():
            dd_u = divided_difference_2d(u, LAGRANGE_NODE_SEQS[i], HERMITE_NODE_SEQS[j])
            val = functional(lambda x, y, ax, ay, g=gamma: u(x, y, ax + g[0], ay + g[1]))
            worst_id = max(worst_id, abs(dd_u - val))
            dd_p = divided_difference_2d(lambda x, y, ax, ay: p.evaluate(x, y, ax, ay), LAGRANGE_NODE_SEQS[i], HERMITE_NODE_SEQS[j])
            worst_inv = max(worst_inv, abs(dd_u - dd_p))
        out.append(CheckResult(f"aniso_table_identities[{trial}]", worst_id, 1e-10))
        out.append(CheckResult(f"aniso_table_invariance[{trial}]", worst_inv, 1e-10))
    return out


def check_duality_and_functionals() -> list:
    """Full identity suite: duality, dual weights, orthogonality, Peano,
    reduced-operator and anisotropic associated functionals."""
    out = [CheckResult("kronecker_table", kronecker_table()[0], 1e-12)]
    out.extend(dual_weight_checks())
    out.extend(orthogonality_checks())
    out.extend(peano_checks())
    out.extend(reduced_functional_checks())
    out.extend(aniso_functional_checks())
    return out


# ---------------------------------------------------------------------------
# Anisotropic multiplicative trace inequality.
# ---------------------------------------------------------------------------


def check_trace_inequality(field, element, p: int = 2) -> tuple:
    """(lhs, rhs) of the trace inequality on the two x-normal edges.

    lhs = ||v||^2 over both vertical edges; rhs = 2 ||v|| ||v_x|| +
    (2/h_x) ||v||^2 with norms over the element.
    """
    if p != 2:
        raise ValueError("only the L2 case is implemented")
    x0, x1, y0, y1 = element
    hx = x1 - x0
    lhs = _gauss_1d(lambda y: field(np.full_like(y, x0), y) ** 2, y0, y1) + _gauss_1d(
        lambda y: field(np.full_like(y, x1), y) ** 2, y0, y1
    )
    nrm = math.sqrt(_gauss_2d(lambda X, Y: field(X, Y) ** 2, x0, x1, y0, y1))
    nrm_x = math.sqrt(_gauss_2d(lambda X, Y: field(X, Y, 1, 0) ** 2, x0, x1, y0, y1))
    rhs = 2.0 * nrm * nrm_x + 2.0 / hx * nrm * nrm
    return lhs, rhs


# ---------------------------------------------------------------------------
# Bound-consistency ratios.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundTerm:
    """One right-hand-side term: a derivative seminorm or mean integral.

    ``total`` is the full derivative multi-index of u; ``weight`` the
    exponents (e1, e2) of the macro half-sizes multiplying the term.
    """

    total: tuple
    weight: tuple
    kind: str  # seminorm | mean


@dataclass(frozen=True)
class BoundSpec:
    """Operator, differentiated error D^gamma, and its estimate's terms."""

    name: str
    operator: str  # full | reduced | bfs | aniso_y
    gamma: tuple
    terms: tuple


def _terms_for(gamma, seminorm_order, mean_order=None, mean_scaling=-0.5):
    g1, g2 = gamma
    terms = []
    for a1 in range(seminorm_order + 1):
        a2 = seminorm_order - a1
        terms.append(BoundTerm((g1 + a1, g2 + a2), (float(a1), float(a2)), "seminorm"))
    if mean_order is not None:
        for a1 in range(mean_order + 1):
            a2 = mean_order - a1
            terms.append(BoundTerm((g1 + a1, g2 + a2), (a1 + mean_scaling, a2 + mean_scaling), "mean"))
    return tuple(terms)


def bound_spec_catalog() -> dict:
    """The estimates exercised by the consistency oracle.

    Mean-integral weights carry the extra 1/sqrt(area) factor that the
    reference-element scaling produces; the plain printed weights grow
    like 1/h under refinement and cannot satisfy a bounded-ratio check.
    """
    specs = {
        # the reduced estimate carries a single mean term, of the mixed
        # derivative only
        "reduced_dx": BoundSpec(
            "reduced_dx",
            "reduced",
            (1, 0),
            _terms_for((1, 0), 2) + (BoundTerm((1, 1), (-0.5, 0.5), "mean"),),
        ),
        "full_g00": BoundSpec("full_g00", "full", (0, 0), _terms_for((0, 0), 4, 3)),
        "full_g10": BoundSpec("full_g10", "full", (1, 0), _terms_for((1, 0), 3, 2)),
        "full_g11": BoundSpec("full_g11", "full", (1, 1), _terms_for((1, 1), 2, 1)),
        "bfs_g00": BoundSpec("bfs_g00", "bfs", (0, 0), _terms_for((0, 0), 4)),
        "bfs_g10": BoundSpec("bfs_g10", "bfs", (1, 0), _terms_for((1, 0), 3)),
        "bfs_g11": BoundSpec("bfs_g11", "bfs", (1, 1), _terms_for((1, 1), 2)),
        "aniso_g00": BoundSpec("aniso_g00", "aniso_y", (0, 0), _terms_for((0, 0), 3)),
        "aniso_g01": BoundSpec("aniso_g01", "aniso_y", (0, 1), _terms_for((0, 1), 2)),
        "aniso_xx": BoundSpec(
            "aniso_xx",
            "aniso_y",
            (2, 0),
            (
                BoundTerm((3, 0), (1.0, 0.0), "seminorm"),
                BoundTerm((2, 1), (0.0, 1.0), "seminorm"),
                BoundTerm((3, 0), (1.0, 0.0), "seminorm"),
                BoundTerm((2, 1), (0.0, 1.0), "seminorm"),
                BoundTerm((1, 2), (-1.0, 2.0), "seminorm"),
            ),
        ),
        "aniso_l2_suboptimal": BoundSpec(
            "aniso_l2_suboptimal",
            "aniso_y",
            (0, 0),
            (
                BoundTerm((2, 0), (2.0, 0.0), "seminorm"),
                BoundTerm((1, 1), (1.0, 1.0), "seminorm"),
                BoundTerm((0, 2), (0.0, 2.0), "seminorm"),
                BoundTerm((2, 1), (2.0, 1.0), "seminorm"),
                BoundTerm((1, 2), (1.0, 2.0), "seminorm"),
                BoundTerm((0, 3), (0.0, 3.0), "seminorm"),
            ),
        ),
    }
    return specs


def _apply_operator(spec: BoundSpec, field, bounds):
    if spec.operator == "full":
        return interp_full_macro(field, bounds)
    if spec.operator == "reduced":
        return interp_reduced_macro(field, bounds)
    if spec.operator == "bfs":
        return interp_bfs(field, bounds)
    if spec.operator == "aniso_y":
        return interp_aniso(field, bounds, "y_spline")
    raise ValueError(f"unknown operator {spec.operator!r}")


def _macro_lhs(spec, field, poly):
    gx, gy = poly.grid_x, poly.grid_y
    total = 0.0
    for jy in range(len(gy) - 1):
        for ix in range(len(gx) - 1):
            def diff_sq(X, Y, ix=ix, jy=jy):
                wx = gx[ix + 1] - gx[ix]
                wy = gy[jy + 1] - gy[jy]
                XI = (2.0 * X - gx[ix] - gx[ix + 1]) / wx
                ETA = (2.0 * Y - gy[jy] - gy[jy + 1]) / wy
                d = field(X, Y, *spec.gamma) - poly.element_values(ix, jy, XI, ETA, *spec.gamma)
                return d * d

            total += _gauss_2d(diff_sq, gx[ix], gx[ix + 1], gy[jy], gy[jy + 1])
    return math.sqrt(max(total, 0.0))


def _macro_rhs(spec, field, bounds):
    x0, x1, y0, y1 = bounds
    h1, h2 = 0.5 * (x1 - x0), 0.5 * (y1 - y0)
    total = 0.0
    for term in spec.terms:
        w = h1 ** term.weight[0] * h2 ** term.weight[1]
        if term.kind == "seminorm":
            val = math.sqrt(_gauss_2d(lambda X, Y: field(X, Y, *term.total) ** 2, x0, x1, y0, y1))
        else:
            val = abs(_gauss_2d(lambda X, Y: field(X, Y, *term.total), x0, x1, y0, y1))
        total += w * val
    return total


def bound_consistency(spec: BoundSpec, field, meshes, zero_rhs_tol: float = 1e-10) -> dict:
    """Sup of LHS/RHS over macros, per refinement level.

    Macros with an (absolutely and relatively) vanishing right-hand side
    must have a vanishing left-hand side instead of entering the ratio.
    """
    sup_ratios = []
    zero_rhs_lhs = []
    for mesh in meshes:
        if isinstance(mesh, MacroMesh):
            nmx, nmy = mesh.n_macros
            macro_list = [mesh.macro_bounds(i, j) for j in range(nmy) for i in range(nmx)]
        else:
            macro_list = list(mesh)
        pairs = []
        for bounds in macro_list:
            poly = _apply_operator(spec, field, bounds)
            pairs.append((_macro_lhs(spec, field, poly), _macro_rhs(spec, field, bounds)))
        rhs_scale = max((r for _, r in pairs), default=0.0)
        floor = 1e-12 * max(rhs_scale, 1.0)
        ratios = [l / r for l, r in pairs if r > floor]
        zero_rhs_lhs.extend(l for l, r in pairs if r <= floor)
        if ratios:
            sup_ratios.append(max(ratios))
    result = {
        "spec": spec.name,
        "sup_ratios": sup_ratios,
        "zero_rhs_lhs_max": max(zero_rhs_lhs, default=0.0),
        "zero_rhs_ok": all(l <= zero_rhs_tol for l in zero_rhs_lhs),
    }
    if sup_ratios:
        result["max_over_min"] = max(sup_ratios) / min(sup_ratios)
    return result
