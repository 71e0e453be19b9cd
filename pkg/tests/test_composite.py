import numpy as np

from macrospline.fields import make_layer_decomposition, make_polynomial_field, make_smooth_field
from macrospline.interpolation import build_composite, nodal_q2
from macrospline.mesh import build_shishkin, classify_edges, select_sigma
from macrospline.norms import gauss_rule, jump_norm_sum, seminorm


def _setup(eps=1e-6, N=16):
    mesh = build_shishkin(eps, N)
    sigma = select_sigma(mesh, "toward_corner")
    return mesh, sigma


def _value_jump_max(poly, edges, npts=7):
    worst = 0.0
    for e in edges:
        (x0, y0), (x1, y1) = e.endpoints
        if e.orientation == "horizontal":
            xs = np.linspace(x0, x1, npts)
            ys = np.full_like(xs, y0)
            lo = poly.evaluate(xs, ys, side=("-", "-"))
            hi = poly.evaluate(xs, ys, side=("-", "+"))
        else:
            ys = np.linspace(y0, y1, npts)
            xs = np.full_like(ys, x0)
            lo = poly.evaluate(xs, ys, side=("-", "-"))
            hi = poly.evaluate(xs, ys, side=("+", "-"))
        worst = max(worst, float(np.max(np.abs(lo - hi))))
    return worst


def test_composite_reproduces_global_q2():
    mesh, sigma = _setup()
    rng = np.random.default_rng(31)
    f = make_polynomial_field(rng.normal(size=(3, 3)))
    star = build_composite(f, mesh, sigma)
    X, Y = np.meshgrid(np.linspace(0, 1, 41), np.linspace(0, 1, 41), indexing="ij")
    assert np.max(np.abs(star.poly.evaluate(X, Y) - f(X, Y))) < 1e-9
    # interface slopes coincide with the exact transverse derivative, so
    # the modification leaves the anisotropic interpolant untouched
    for (axis, level, k0), vals in star.modifications.items():
        g = mesh.grid_x
        pts = np.array([g[k0], 0.5 * (g[k0] + g[k0 + 1]), g[k0 + 1]])
        exact = f(pts, level, 0, 1) if axis == "y" else f(level, pts, 1, 0)
        assert np.max(np.abs(vals - exact)) < 1e-9


def test_composite_continuity_all_edges():
    mesh, sigma = _setup(1e-6, 16)
    f = make_smooth_field("sin_sin")
    star = build_composite(f, mesh, sigma)
    interior = [e for e in classify_edges(mesh) if e.edge_type != "boundary"]
    assert _value_jump_max(star.poly, interior) < 1e-10


def test_composite_normal_derivative_continuous_on_II_and_IV():
    mesh, sigma = _setup(1e-6, 16)
    edges = classify_edges(mesh)
    rule = gauss_rule(4)
    for f in (make_smooth_field("sin_sin"), make_layer_decomposition(1e-6, smooth="bounded_third").total):
        star = build_composite(f, mesh, sigma)
        for t in ("II", "IV"):
            subset = [e for e in edges if e.edge_type == t]
            assert subset
            assert jump_norm_sum(f, star, subset, rule) < 1e-10
        # types I and III do jump in general
        for t in ("I", "III"):
            subset = [e for e in edges if e.edge_type == t]
            assert jump_norm_sum(f, star, subset, rule) > 1e-12


def test_composite_layer_field_continuity():
    mesh, sigma = _setup(1e-8, 16)
    dec = make_layer_decomposition(1e-8, smooth="bounded_third")
    star = build_composite(dec.total, mesh, sigma)
    interior = [e for e in classify_edges(mesh) if e.edge_type != "boundary"]
    assert _value_jump_max(star.poly, interior) < 1e-10


def test_evaluate_wrapper_on_composite():
    from macrospline.interpolation import evaluate

    mesh, sigma = _setup(1e-4, 8)
    f = make_smooth_field("sin_sin")
    star = build_composite(f, mesh, sigma)
    x, y = 0.51, 0.52
    assert evaluate(star, x, y, alpha=(1, 0)) == star.poly.evaluate(x, y, 1, 0)
    lam = mesh.lam
    lo = evaluate(star, 0.5, lam, alpha=(0, 1), side=("-", "-"))
    hi = evaluate(star, 0.5, lam, alpha=(0, 1), side=("-", "+"))
    assert abs(lo - hi) < 1e-11  # normal derivative continuous across y=lam


def test_composite_interior_is_nodal_interpolant():
    mesh, sigma = _setup(1e-6, 16)
    f = make_smooth_field("exp_xy")
    star = build_composite(f, mesh, sigma)
    gx, gy = mesh.grid_x, mesh.grid_y
    ix = jy = mesh.N // 2  # deep inside the coarse region
    local = nodal_q2(f, (gx[ix], gx[ix + 1], gy[jy], gy[jy + 1]))
    assert np.max(np.abs(star.poly.coef[jy, ix] - local.coef[0, 0])) < 1e-14


def test_composite_error_decreases_with_n():
    eps = 1e-6
    dec = make_layer_decomposition(eps, smooth="bounded_third")
    u = dec.total
    errs = []
    for N in (8, 16, 32):
        mesh = build_shishkin(eps, N)
        sigma = select_sigma(mesh, "toward_corner")
        star = build_composite(u, mesh, sigma)
        errs.append(seminorm(u, star, rule=gauss_rule(4)))
    assert errs[1] < errs[0] and errs[2] < errs[1]
    # layer terms carry log factors, so demand a bit less than order two
    assert errs[2] < 0.09 * errs[0]
