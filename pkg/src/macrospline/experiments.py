"""Verification suites and convergence/Shishkin experiment drivers.

Experiments collect errors over refinement levels or (epsilon, N) grids,
fit observed orders, and serialize rate tables to CSV and JSON.  Grid
points may run in a thread pool; rows are assembled in sorted key order
afterward, so the output is bit-identical for any thread count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import oracles
from .fields import get_field, make_layer_decomposition, make_polynomial_field, make_smooth_field
from .interpolation import (
    build_composite,
    interp_aniso_mesh,
    interp_bfs_mesh,
    interp_full,
    interp_full_macro,
    interp_reduced,
    interp_reduced_macro,
    nodal_q2_mesh,
    quasi_interp,
    random_c1q2,
)
from .mesh import build_macro_mesh, build_shishkin, classify_edges, select_sigma
from .norms import FIRST_ORDER, SECOND_ORDER, gauss_rule, jump_norm_sum, seminorm
from .oracles import CheckResult

__all__ = [
    "ExperimentConfig",
    "RateTable",
    "observed_orders",
    "ls_slope",
    "run_convergence",
    "run_shishkin",
    "verification_suite",
    "write_csv",
    "write_json",
]

OPERATORS = ("full", "reduced", "quasi", "bfs", "nodal", "aniso_y")
FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class ExperimentConfig:
    operator: str = "full"
    field: str = "sin_sin"
    mesh_family: str = "uniform"  # uniform | stretched | shishkin
    levels: int = 4
    base_n: int = 2
    N_list: tuple = (8, 16, 32, 64)
    eps_list: tuple = (1e-4, 1e-6, 1e-8)
    lambda0: float = 3.0
    c_star: float = 1.0
    sigma: str = "toward_corner"
    smooth_variant: str = "bounded_third"
    smooth_amplitude: float = 1.0
    edge_amplitude: float = 1.0
    threads: int = 1
    out: str | None = None
    fmt: str = "csv"

    def validate(self):
        if self.operator not in OPERATORS:
            raise ValueError(f"operator must be one of {OPERATORS}")
        if self.mesh_family == "shishkin":
            if any(n % 8 != 0 for n in self.N_list):
                raise ValueError("Shishkin N values must be multiples of 8")
        elif self.levels < 3:
            raise ValueError("rate fitting needs at least 3 levels")
        if self.threads < 1:
            raise ValueError("threads must be positive")


@dataclass
class RateTable:
    """Rows of (level tag, h or N, error per norm, observed order per norm)."""

    columns: tuple
    rows: list = dataclass_field(default_factory=list)
    meta: dict = dataclass_field(default_factory=dict)

    def column(self, name):
        k = self.columns.index(name)
        return [row[k] for row in self.rows]


def observed_orders(errors, hs):
    """Pairwise orders log(e_k/e_{k+1}) / log(h_k/h_{k+1}); first entry None."""
    orders = [None]
    for (e0, e1), (h0, h1) in zip(zip(errors, errors[1:]), zip(hs, hs[1:])):
        if e0 > 0 and e1 > 0:
            orders.append(math.log(e0 / e1) / math.log(h0 / h1))
        else:
            orders.append(float("nan"))
    return orders


def ls_slope(errors, hs, tail: int = 3):
    """Least-squares convergence order over the last ``tail`` levels."""
    e = np.asarray(errors[-tail:], dtype=float)
    h = np.asarray(hs[-tail:], dtype=float)
    if len(e) < 2:
        return float("nan")
    if np.any(e <= 0):
        return float("inf")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def _apply_mesh_operator(operator, field, n, sigma_strategy="left", aspect=1.0):
    """Interpolant of ``field`` on an n-per-side mesh; returns (poly, h)."""
    gx = np.linspace(0.0, 1.0, n + 1)
    gy = np.linspace(0.0, 1.0, n + 1)
    if aspect != 1.0:
        gx = np.linspace(0.0, 1.0, max(2, int(n / aspect)) + 1)
    if operator in ("full", "reduced", "quasi"):
        mesh = build_macro_mesh(gx, gy)
        if operator == "full":
            return interp_full(field, mesh), 1.0 / n
        if operator == "reduced":
            return interp_reduced(field, mesh), 1.0 / n
        sigma = select_sigma(mesh, sigma_strategy)
        return quasi_interp(field, mesh, sigma), 1.0 / n
    if operator == "bfs":
        return interp_bfs_mesh(field, gx, gy), 1.0 / n
    if operator == "nodal":
        return nodal_q2_mesh(field, gx, gy), 1.0 / n
    if operator == "aniso_y":
        return interp_aniso_mesh(field, gx, gy, "y_spline"), 1.0 / n
    raise ValueError(f"unknown operator {operator!r}")


def run_convergence(config: ExperimentConfig) -> RateTable:
    """Uniform-refinement errors and observed orders for one operator."""
    config.validate()
    field = get_field(config.field)
    rule = gauss_rule(5)

    def level_job(level):
        n = config.base_n * 2**level
        poly, h = _apply_mesh_operator(config.operator, field, n, config.sigma)
        l2 = seminorm(field, poly, (0, 0), rule=rule)
        h1 = math.sqrt(sum(seminorm(field, poly, a, rule=rule) ** 2 for a in FIRST_ORDER))
        h2 = math.sqrt(sum(seminorm(field, poly, a, rule=rule) ** 2 for a in SECOND_ORDER))
        return level, (n, h, l2, h1, h2)

    results = {}
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            for level, payload in pool.map(level_job, range(config.levels)):
                results[level] = payload
    else:
        for level in range(config.levels):
            level, payload = level_job(level)
            results[level] = payload

    ns, hs, l2s, h1s, h2s = zip(*(results[k] for k in sorted(results)))
    o_l2 = observed_orders(l2s, hs)
    o_h1 = observed_orders(h1s, hs)
    o_h2 = observed_orders(h2s, hs)
    table = RateTable(("n", "h", "L2", "order_L2", "H1", "order_H1", "brokenH2", "order_H2"))
    for k in range(len(ns)):
        table.rows.append((ns[k], hs[k], l2s[k], o_l2[k], h1s[k], o_h1[k], h2s[k], o_h2[k]))
    table.meta = {
        "schema": "macrospline-rates/1",
        "experiment": "converge",
        "operator": config.operator,
        "field": config.field,
        "ls_order_L2": ls_slope(l2s, hs),
        "ls_order_H1": ls_slope(h1s, hs),
        "ls_order_H2": ls_slope(h2s, hs),
    }
    return table


SHISHKIN_MODELS = {
    "L2": lambda N, eps: N**-2.0,
    "weighted_H1": lambda N, eps: N**-2.0 * math.log(N) ** 2,
    "weighted_H2": lambda N, eps: N**-1.0 * math.log(N),
    "jump2_I": lambda N, eps: N**-3.0,
    "jump2_III": lambda N, eps: eps**-0.5 * N**-3.0 * math.log(N) ** 4,
}


def run_shishkin(config: ExperimentConfig) -> RateTable:
    """Composite-interpolant error survey over an (epsilon, N) grid.

    Per grid point: weighted error norms of u - u*, the squared
    normal-derivative jump sums per edge type, and fitted constants
    against the model rates.
    """
    config.validate()
    rule = gauss_rule(4)

    def job(key):
        eps, N = key
        dec = make_layer_decomposition(
            eps,
            config.c_star,
            smooth=config.smooth_variant,
            edge_amplitude=config.edge_amplitude,
            smooth_amplitude=config.smooth_amplitude,
        )
        u = dec.total
        mesh = build_shishkin(eps, N, config.lambda0, config.c_star)
        sigma = select_sigma(mesh, config.sigma)
        star = build_composite(u, mesh, sigma)
        edges = classify_edges(mesh)
        l2 = seminorm(u, star, (0, 0), rule=rule)
        h1 = math.sqrt(sum(seminorm(u, star, a, rule=rule) ** 2 for a in FIRST_ORDER))
        h2 = math.sqrt(sum(seminorm(u, star, a, rule=rule) ** 2 for a in SECOND_ORDER))
        jumps = {}
        for t in ("I", "II", "III", "IV"):
            subset = [e for e in edges if e.edge_type == t]
            jumps[t] = jump_norm_sum(u, star, subset, rule) if subset else 0.0
        row = {
            "eps": eps,
            "N": N,
            "L2": l2,
            "weighted_H1": eps**0.25 * h1,
            "weighted_H2": eps**0.75 * h2,
            "jump2_I": jumps["I"],
            "jump2_II": jumps["II"],
            "jump2_III": jumps["III"],
            "jump2_IV": jumps["IV"],
        }
        for name, model in SHISHKIN_MODELS.items():
            row[f"C_{name}"] = row[name] / model(N, eps)
        return key, row

    keys = [(eps, N) for eps in config.eps_list for N in config.N_list]
    results = {}
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            for key, row in pool.map(job, keys):
                results[key] = row
    else:
        for key in keys:
            _, row = job(key)
            results[key] = row

    columns = (
        "eps",
        "N",
        "L2",
        "order_L2",
        "weighted_H1",
        "weighted_H2",
        "jump2_I",
        "order_jump2_I",
        "jump2_II",
        "jump2_III",
        "jump2_IV",
        "C_L2",
        "C_weighted_H1",
        "C_weighted_H2",
        "C_jump2_I",
        "C_jump2_III",
    )
    table = RateTable(columns)
    meta_orders = {}
    for eps in config.eps_list:
        sub = [results[(eps, N)] for N in sorted(config.N_list)]
        hs = [1.0 / r["N"] for r in sub]
        o_l2 = observed_orders([r["L2"] for r in sub], hs)
        o_j1 = observed_orders([r["jump2_I"] for r in sub], hs)
        meta_orders[str(eps)] = {
            "ls_order_L2": ls_slope([r["L2"] for r in sub], hs),
            "ls_order_jump2_I": ls_slope([r["jump2_I"] for r in sub], hs),
            "C_L2_values": [r["C_L2"] for r in sub],
        }
        for k, r in enumerate(sub):
            table.rows.append(
                (
                    r["eps"],
                    r["N"],
                    r["L2"],
                    o_l2[k],
                    r["weighted_H1"],
                    r["weighted_H2"],
                    r["jump2_I"],
                    o_j1[k],
                    r["jump2_II"],
                    r["jump2_III"],
                    r["jump2_IV"],
                    r["C_L2"],
                    r["C_weighted_H1"],
                    r["C_weighted_H2"],
                    r["C_jump2_I"],
                    r["C_jump2_III"],
                )
            )
    table.meta = {
        "schema": "macrospline-rates/1",
        "experiment": "shishkin",
        "smooth_variant": config.smooth_variant,
        "orders_by_eps": meta_orders,
    }
    return table


# ---------------------------------------------------------------------------
# Verification battery for the CLI.
# ---------------------------------------------------------------------------


def verification_suite(rng_seed: int = 2026) -> list:
    """All identity/reproduction/continuity checks as CheckResult items."""
    rng = np.random.default_rng(rng_seed)
    out = list(oracles.check_duality_and_functionals())

    # reproduction checks
    worst = 0.0
    for aspect in (1.0, 1e3, 1e6):
        f = make_polynomial_field(rng.normal(size=(3, 3)))
        macro = (0.0, 1.0, 0.0, 1.0 / aspect)
        p = interp_full_macro(f, macro)
        X, Y = np.meshgrid(np.linspace(0, 1, 9), np.linspace(0, 1.0 / aspect, 9), indexing="ij")
        scale = max(1.0, float(np.max(np.abs(f(X, Y)))))
        worst = max(worst, float(np.max(np.abs(p.evaluate(X, Y) - f(X, Y)))) / scale)
    out.append(CheckResult("reproduction_full_q2", worst, 1e-9))

    f = make_polynomial_field(rng.normal(size=(4, 4)))
    from .interpolation import interp_bfs

    p = interp_bfs(f, (0.0, 1.0, 0.0, 0.5))
    X, Y = np.meshgrid(np.linspace(0, 1, 9), np.linspace(0, 0.5, 9), indexing="ij")
    out.append(
        CheckResult(
            "reproduction_bfs_q3",
            float(np.max(np.abs(p.evaluate(X, Y) - f(X, Y)))) / max(1.0, float(np.max(np.abs(f(X, Y))))),
            1e-9,
        )
    )

    mesh = build_macro_mesh(np.linspace(0, 1, 4), np.linspace(0, 1, 4))
    sigma = select_sigma(mesh, "toward_corner")
    v = random_c1q2(mesh, rng)
    q = quasi_interp(v.as_field(), mesh, sigma)
    out.append(CheckResult("projector_quasi_c1q2", float(np.max(np.abs(q.coef - v.coef))), 1e-10))

    # C1 continuity of the full and quasi interpolants
    smooth = make_smooth_field("sin_sin")
    for name, poly in (("full", interp_full(smooth, mesh)), ("quasi", quasi_interp(smooth, mesh, sigma))):
        worst = 0.0
        ts = np.linspace(0.0, 1.0, 50)
        for line in mesh.macro_x.coordinates[1:-1]:
            for ax, ay in ((0, 0), (1, 0), (0, 1)):
                a = poly.evaluate(np.full_like(ts, line), ts, ax, ay, side=("-", "-"))
                b = poly.evaluate(np.full_like(ts, line), ts, ax, ay, side=("+", "-"))
                worst = max(worst, float(np.max(np.abs(a - b))))
        out.append(CheckResult(f"c1_continuity_{name}", worst, 1e-10))

    # composite continuity across long/corner edges on a small Shishkin mesh
    mesh_s = build_shishkin(1e-6, 8)
    star = build_composite(smooth, mesh_s, select_sigma(mesh_s, "toward_corner"))
    edges = classify_edges(mesh_s)
    for t in ("II", "IV"):
        subset = [e for e in edges if e.edge_type == t]
        out.append(CheckResult(f"composite_jump2_{t}", jump_norm_sum(smooth, star, subset, gauss_rule(4)), 1e-10))

    # trace inequality battery
    worst = 0.0
    for _ in range(20):
        f = make_polynomial_field(rng.normal(size=(3, 3)))
        aspect = 10.0 ** rng.uniform(0, 6)
        lhs, rhs = oracles.check_trace_inequality(f, (0.0, 1.0, 0.0, 1.0 / aspect))
        worst = max(worst, lhs - rhs)
    out.append(CheckResult("trace_inequality_violation", worst, 1e-10))
    return out


# ---------------------------------------------------------------------------
# Serialization.
# ---------------------------------------------------------------------------


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return FLOAT_FMT % value
    return str(value)


def write_csv(table: RateTable, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(table.columns) + "\n")
        for row in table.rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(table: RateTable, path: str) -> None:
    payload = dict(table.meta)
    payload["columns"] = list(table.columns)
    payload["rows"] = [[None if v is None else v for v in row] for row in table.rows]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
