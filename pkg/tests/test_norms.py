import numpy as np
import pytest

from macrospline.fields import make_polynomial_field, make_smooth_field
from macrospline.interpolation import interp_full, nodal_q2_mesh
from macrospline.mesh import build_macro_mesh, build_shishkin, classify_edges
from macrospline.norms import (
    NormReport,
    compute_norm_report,
    edge_l2,
    gauss_rule,
    jump_norm_sum,
    linf_sampled,
    seminorm,
)


def _unit_mesh_poly(n=2):
    # zero interpolant over a uniform element mesh, to carry the grids
    f = make_polynomial_field([[0.0]])
    mesh = build_macro_mesh(np.linspace(0, 1, n + 1), np.linspace(0, 1, n + 1))
    return interp_full(f, mesh)


def test_quadrature_exactness():
    rng = np.random.default_rng(0)
    for order in (3, 4, 5):
        rule = gauss_rule(order)
        deg = 2 * order - 1
        coefs = rng.normal(size=deg + 1)
        exact = sum(c / (k + 1) * (1 - (-1) ** (k + 1)) for k, c in enumerate(coefs))
        approx = float(np.dot(rule.weights, np.polynomial.polynomial.polyval(rule.nodes, coefs)))
        assert approx == pytest.approx(exact, rel=1e-13, abs=1e-13)


def test_seminorm_constant_and_linear():
    zero = _unit_mesh_poly()
    one = make_polynomial_field([[1.0]])
    assert seminorm(one, zero) == pytest.approx(1.0, abs=1e-13)
    x = make_polynomial_field([[0.0], [1.0]])
    assert seminorm(x, zero) ** 2 == pytest.approx(1.0 / 3.0, abs=1e-13)


def test_seminorm_derivative_analytic():
    zero = _unit_mesh_poly()
    f = make_polynomial_field([[0, 0, 0], [0, 0, 0], [0, 0, 1.0]])  # x^2 y^2
    # ||d/dx x^2 y^2||^2 = ||2 x y^2||^2 = 4 * 1/3 * 1/5
    assert seminorm(f, zero, (1, 0)) == pytest.approx(2.0 / np.sqrt(15.0), rel=1e-13)


def test_region_additivity():
    zero = _unit_mesh_poly(4)
    f = make_smooth_field("sin_sin")
    all_sq = seminorm(f, zero) ** 2
    parts = 0.0
    for ix in range(8):
        for jy in range(8):
            parts += seminorm(f, zero, region=[(ix, jy)]) ** 2
    assert parts == pytest.approx(all_sq, rel=1e-10)


def test_monotone_under_refinement():
    f = make_smooth_field("sin_sin")
    errors = []
    for n in (2, 4, 8, 16):
        mesh = build_macro_mesh(np.linspace(0, 1, n + 1), np.linspace(0, 1, n + 1))
        p = interp_full(f, mesh)
        errors.append(seminorm(f, p))
    violations = sum(1 for a, b in zip(errors, errors[1:]) if b > 1.05 * a)
    assert violations <= 1


def test_edge_l2_and_jump_of_c1_interpolant():
    f = make_smooth_field("sin_sin")
    mesh = build_shishkin(1e-4, 8)
    edges = classify_edges(mesh)
    p = nodal_q2_mesh(f, mesh.grid_x, mesh.grid_y)
    interior = [e for e in edges if e.edge_type != "boundary"]
    e0 = interior[0]
    val = edge_l2(f, p, e0)
    assert val >= 0.0
    with pytest.raises(ValueError):
        jump_norm_sum(f, p, [e for e in edges if e.edge_type == "boundary"][:1])


def test_jump_zero_for_globally_c1():
    # a C1 macro interpolant has no first-derivative jumps anywhere
    from macrospline.interpolation import random_c1q2

    rng = np.random.default_rng(3)
    mesh = build_macro_mesh(np.linspace(0, 1, 3), np.linspace(0, 1, 3))
    p = random_c1q2(mesh, rng)
    # build pseudo-edges across all interior element lines
    from macrospline.mesh import EdgeInfo

    gx, gy = p.grid_x, p.grid_y
    edges = []
    for ix in range(1, len(gx) - 1):
        for jy in range(len(gy) - 1):
            edges.append(
                EdgeInfo(((gx[ix], gy[jy]), (gx[ix], gy[jy + 1])), "vertical", (1.0, 0.0), "I", ((ix - 1, jy), (ix, jy)))
            )
    assert jump_norm_sum(None, p, edges) < 1e-20


def test_linf_sampled():
    zero = _unit_mesh_poly()
    f = make_smooth_field("sin_sin")
    assert linf_sampled(f, zero, samples_per_element=9) == pytest.approx(1.0, abs=1e-6)
    c = make_polynomial_field([[0.25]])
    assert linf_sampled(c, zero) == pytest.approx(0.25, abs=1e-14)


def test_norm_report_additivity_and_serialization():
    mesh = build_shishkin(1e-4, 8)
    f = make_smooth_field("sin_sin")
    p = nodal_q2_mesh(f, mesh.grid_x, mesh.grid_y)
    edges = classify_edges(mesh)
    report = compute_norm_report(f, p, mesh, edges)
    total_sq = sum(v["L2"] ** 2 for v in report.regional.values())
    assert report.global_values["L2"] ** 2 == pytest.approx(total_sq, rel=1e-10)
    assert report.jump_sums["II"] >= 0.0
    text = report.to_json()
    assert "macrospline-norms/1" in text
    rows = list(report.to_csv_rows())
    assert any(r[0] == "edges" for r in rows)
    assert all(v >= 0 for _, _, v in rows if isinstance(v, float))
