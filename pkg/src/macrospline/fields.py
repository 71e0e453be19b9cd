"""Analytic scalar test fields with exact partial derivatives.

Every field evaluates D^(ax,ay) u(x, y) for orders up to 3 in each
variable, vectorized over numpy arrays.  This includes manufactured
boundary/corner-layer decompositions whose components copy the decay
structure of the reaction-diffusion solution split, so interpolation
experiments run on functions with closed-form derivatives instead of PDE
solves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "ScalarField",
    "LayerDecomposition",
    "make_polynomial_field",
    "make_smooth_field",
    "make_layer_decomposition",
    "field_registry",
    "get_field",
]

MAX_ORDER = 4


@dataclass(frozen=True)
class ScalarField:
    """Scalar function on the plane with exact derivatives.

    Orders up to (3,3) are guaranteed by every field; most also supply
    fourth derivatives, which the error-bound oracles consume.
    """

    name: str
    _eval: Callable

    def __call__(self, x, y, ax: int = 0, ay: int = 0):
        if not (0 <= ax <= MAX_ORDER and 0 <= ay <= MAX_ORDER):
            raise ValueError("derivative orders must lie in 0..4")
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = self._eval(x, y, ax, ay)
        return out if np.ndim(out) else float(out)

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(
            f"{self.name}+{other.name}",
            lambda x, y, ax, ay: self._eval(x, y, ax, ay) + other._eval(x, y, ax, ay),
        )

    def scaled(self, c: float) -> "ScalarField":
        return ScalarField(f"{c}*{self.name}", lambda x, y, ax, ay: c * self._eval(x, y, ax, ay))


def make_polynomial_field(coefficients) -> ScalarField:
    """Field sum_ij c[i,j] x^i y^j with derivatives by term differentiation."""
    coef = np.atleast_2d(np.asarray(coefficients, dtype=float))

    def ev(x, y, ax, ay):
        c = coef
        for _ in range(ax):
            c = np.polynomial.polynomial.polyder(c, axis=0)
        for _ in range(ay):
            c = np.polynomial.polynomial.polyder(c, axis=1)
        xb, yb = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return np.polynomial.polynomial.polyval2d(xb, yb, c)

    return ScalarField("poly", ev)


def separable_field(name: str, fx: Callable, fy: Callable) -> ScalarField:
    """Product field u(x,y) = fx(x) * fy(y) from 1D derivative evaluators."""

    def ev(x, y, ax, ay):
        return fx(x, ax) * fy(y, ay)

    return ScalarField(name, ev)


def sin_profile(freq: float = math.pi, shift: float = 0.0):
    def f(t, order):
        return freq**order * np.sin(freq * np.asarray(t, dtype=float) + shift + order * math.pi / 2.0)

    return f


def exp_profile(rate: float):
    """t -> exp(rate * t) with derivatives rate^k exp(rate t)."""

    def f(t, order):
        return rate**order * np.exp(rate * np.asarray(t, dtype=float))

    return f


def runge_profile(a: float = 4.0, center: float = 0.5):
    """t -> 1/(1 + a (t-c)^2), derivatives up to order 4 in closed form."""

    def f(t, order):
        s = np.asarray(t, dtype=float) - center
        g = 1.0 + a * s * s
        if order == 0:
            return 1.0 / g
        if order == 1:
            return -2.0 * a * s / g**2
        if order == 2:
            return (8.0 * a * a * s * s - 2.0 * a * g) / g**3
        if order == 3:
            return (24.0 * a * a * s * g - 48.0 * a**3 * s**3) / g**4
        if order == 4:
            return 24.0 * a * a / g**3 - 288.0 * a**3 * s * s / g**4 + 384.0 * a**4 * s**4 / g**5
        raise ValueError("order must lie in 0..4")

    return f


def _exp_xy(x, y, ax, ay):
    # D^(ax,ay) e^{xy} = e^{xy} * sum_k C(ax,k) ay!/(ay-k)! x^{ay-k} y^{ax-k}
    total = np.zeros(np.broadcast(x, y).shape)
    for k in range(min(ax, ay) + 1):
        c = math.comb(ax, k) * math.factorial(ay) // math.factorial(ay - k)
        total = total + c * x ** (ay - k) * y ** (ax - k)
    return np.exp(x * y) * total


_SMOOTH = {
    "sin_sin": lambda: separable_field("sin_sin", sin_profile(), sin_profile()),
    "exp_xy": lambda: ScalarField("exp_xy", _exp_xy),
    "runge": lambda: separable_field("runge", runge_profile(), runge_profile()),
}


def make_smooth_field(name: str) -> ScalarField:
    if name not in _SMOOTH:
        raise ValueError(f"unknown smooth field {name!r}; choose from {sorted(_SMOOTH)}")
    return _SMOOTH[name]()


# ---------------------------------------------------------------------------
# Manufactured layer decompositions.
# ---------------------------------------------------------------------------


def _poly1d(coef):
    c = np.asarray(coef, dtype=float)

    def f(t, order):
        d = c
        for _ in range(order):
            d = np.polynomial.polynomial.polyder(d)
        return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), d) * np.ones(np.shape(t) or ())

    return f


def _one(t, order):
    t = np.asarray(t, dtype=float)
    return np.ones_like(t) if order == 0 else np.zeros_like(t)


def _reflect(profile):
    """t -> profile(1-t)."""

    def f(t, order):
        return (-1.0) ** order * profile(1.0 - np.asarray(t, dtype=float), order)

    return f


@dataclass(frozen=True)
class LayerDecomposition:
    """Smooth part plus four edge layers and four corner layers.

    ``total`` is their sum; the components decay away from their edge or
    corner at rate c_star/sqrt(epsilon), matching the shape of the
    reaction-diffusion solution split.
    """

    smooth: ScalarField
    edge_layers: tuple
    corner_layers: tuple
    epsilon: float
    c_star: float
    edge_amplitude: float = 1.0

    @property
    def total(self) -> ScalarField:
        parts = (self.smooth,) + self.edge_layers + self.corner_layers
        total = parts[0]
        for p in parts[1:]:
            total = total + p
        return ScalarField("layer_total", total._eval)

    def components(self):
        return {
            "S": self.smooth,
            "E1": self.edge_layers[0],
            "E2": self.edge_layers[1],
            "E3": self.edge_layers[2],
            "E4": self.edge_layers[3],
            "E12": self.corner_layers[0],
            "E23": self.corner_layers[1],
            "E34": self.corner_layers[2],
            "E41": self.corner_layers[3],
        }


def make_layer_decomposition(
    epsilon: float,
    c_star: float = 1.0,
    smooth: str = "default",
    edge_amplitude: float = 1.0,
    smooth_amplitude: float = 1.0,
) -> LayerDecomposition:
    """Manufactured decomposition with exact derivatives.

    ``smooth`` selects the regular part: "default" is the biquadratic
    x(1-x)y(1-y)+1, "bounded_third" a trigonometric part with
    epsilon-independent third derivatives, and "eps_growth" adds an
    oscillatory term whose k-th derivatives grow like eps^{1-k/2}.
    The decomposition bounds fix no concrete constants, so the relative
    weight of the smooth part and the layers is configurable.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    rate = c_star / math.sqrt(epsilon)

    bubble = _poly1d([0.0, 1.0, -1.0])  # t(1-t)
    if smooth == "default":
        S = separable_field("S", bubble, bubble) + make_polynomial_field([[1.0]])
    elif smooth == "bounded_third":
        S = separable_field("S", sin_profile(), sin_profile()) + make_polynomial_field([[1.0]])
    elif smooth == "eps_growth":
        osc = separable_field("osc", sin_profile(freq=1.0 / math.sqrt(epsilon)), sin_profile(freq=1.0 / math.sqrt(epsilon)))
        S = separable_field("S", bubble, bubble) + make_polynomial_field([[1.0]]) + osc.scaled(epsilon)
    else:
        raise ValueError("smooth must be 'default', 'bounded_third' or 'eps_growth'")
    if smooth_amplitude != 1.0:
        S = S.scaled(smooth_amplitude)

    g = _poly1d([1.0, 1.0, -1.0])  # smooth edge modulation 1 + t(1-t)
    amp = edge_amplitude
    decay0 = exp_profile(-rate)  # exp(-rate*t), layer at t=0
    decay1 = _reflect(decay0)  # exp(-rate*(1-t)), layer at t=1

    edge_layers = (
        separable_field("E1", g, decay0).scaled(amp),  # layer along y=0
        separable_field("E2", decay0, g).scaled(amp),  # layer along x=0
        separable_field("E3", g, decay1).scaled(amp),  # layer along y=1
        separable_field("E4", decay1, g).scaled(amp),  # layer along x=1
    )
    corner_layers = (
        separable_field("E12", decay0, decay0).scaled(amp),  # corner (0,0)
        separable_field("E23", decay0, decay1).scaled(amp),  # corner (0,1)
        separable_field("E34", decay1, decay1).scaled(amp),  # corner (1,1)
        separable_field("E41", decay1, decay0).scaled(amp),  # corner (1,0)
    )
    return LayerDecomposition(S, edge_layers, corner_layers, epsilon, c_star, amp)


# ---------------------------------------------------------------------------
# Registry for the CLI.
# ---------------------------------------------------------------------------


def field_registry() -> dict:
    reg = {name: make_smooth_field for name in _SMOOTH}
    return {
        "sin_sin": lambda: make_smooth_field("sin_sin"),
        "exp_xy": lambda: make_smooth_field("exp_xy"),
        "runge": lambda: make_smooth_field("runge"),
        "sin_plus_sin": lambda: separable_field("sx", sin_profile(), _one)
        + separable_field("sy", _one, sin_profile()),
        "xy": lambda: make_polynomial_field([[0.0, 0.0], [0.0, 1.0]]),
        "x3y3": lambda: make_polynomial_field([[0.0] * 4, [0.0] * 4, [0.0] * 4, [0.0, 0.0, 0.0, 1.0]]),
        "q2_random": lambda: make_polynomial_field(np.random.default_rng(0).normal(size=(3, 3))),
    }


def get_field(name: str) -> ScalarField:
    reg = field_registry()
    if name not in reg:
        raise ValueError(f"unknown field {name!r}; choose from {sorted(reg)}")
    return reg[name]()
