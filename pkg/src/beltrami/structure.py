"""Structure functions H(z, xi) for the nonlinear Beltrami equation.

A structure function is evaluated elementwise on numpy arrays.  Its
ellipticity ``k`` (Lipschitz constant in ``xi``), Hoelder exponent ``alpha``
and constant in ``z`` are declared metadata; :func:`verify_condition` checks
them by sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

KINDS = ("linear", "autonomous", "frozen", "custom")


@dataclass(frozen=True)
class StructureFunction:
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    k: float
    alpha: float = 0.5
    holder_const: float = 0.0
    kind: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.k < 1.0:
            raise ValueError(f"ellipticity k must lie in [0, 1), got {self.k}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.holder_const < 0:
            raise ValueError("holder_const must be non-negative")
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")

    @property
    def K(self) -> float:
        return (1.0 + self.k) / (1.0 - self.k)

    def eval(self, z, xi):
        z = np.asarray(z, dtype=complex)
        xi = np.asarray(xi, dtype=complex)
        out = np.asarray(self.fn(z, xi), dtype=complex)
        return np.broadcast_to(out, np.broadcast(z, xi).shape)

    def __call__(self, z, xi):
        return self.eval(z, xi)


def k_from_K(K: float) -> float:
    return (K - 1.0) / (K + 1.0)


def zero_structure(alpha: float = 0.5) -> StructureFunction:
    return linear_structure(0.0, 0.0, alpha)


def linear_structure(mu: complex, nu: complex = 0.0, alpha: float = 0.5) -> StructureFunction:
    """``H(z, xi) = mu xi + nu conj(xi)``."""
    mu, nu = complex(mu), complex(nu)
    k = abs(mu) + abs(nu)
    if k >= 1.0:
        raise ValueError(f"|mu| + |nu| = {k} violates ellipticity")
    return StructureFunction(
        lambda z, xi: mu * xi + nu * np.conj(xi),
        k=k, alpha=alpha, holder_const=0.0, kind="linear",
        params={"kind": "linear", "mu": mu, "nu": nu},
    )


def _power_H(k: float):
    c = -k / 3.0

    def fn(z, xi):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = c * xi * xi / np.conj(xi)
        return np.where(xi == 0, 0.0, out)

    return fn


@dataclass(frozen=True)
class ExtremalPair:
    """``f0(z) = z^2 |z|^(a - 1)`` with ``a = 3/(2K + 1)`` and its equation."""

    H: StructureFunction
    K: float

    @property
    def a(self) -> float:
        return 3.0 / (2.0 * self.K + 1.0)

    def f0(self, z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = z * z * r ** (self.a - 1.0)
        return np.where(r == 0, 0.0, out)

    def df0(self, z):
        """Closed-form ``(d/dz f0, d/dzbar f0)``."""
        a = self.a
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            dz = 0.5 * (a + 3.0) * z * r ** (a - 1.0)
            dzbar = 0.5 * (a - 1.0) * z**3 * r ** (a - 3.0)
        return np.where(r == 0, 0.0, dz), np.where(r == 0, 0.0, dzbar)


def power_example(K: float, alpha: float = 0.5) -> ExtremalPair:
    if not K > 1:
        raise ValueError(f"K must exceed 1, got {K}")
    k = k_from_K(K)
    H = StructureFunction(
        lambda z, xi, _f=_power_H(k): _f(z, xi),
        k=k, alpha=alpha, holder_const=0.0, kind="autonomous",
        params={"kind": "power", "K": float(K)},
    )
    return ExtremalPair(H=H, K=float(K))


def holder_linear(mu_amplitude: float, alpha: float) -> StructureFunction:
    """``H(z, xi) = A |z|^alpha / (1 + |z|^alpha) xi``.

    ``t -> t/(1+t)`` is 1-Lipschitz and ``|z| -> |z|^alpha`` is alpha-Hoelder
    with constant 1, so ``|H(z1, xi) - H(z2, xi)| <= A |z1 - z2|^alpha |xi|``.
    """
    A = float(mu_amplitude)
    if not 0 <= A < 1:
        raise ValueError(f"mu_amplitude must lie in [0, 1), got {A}")

    def fn(z, xi):
        t = np.abs(z) ** alpha
        return A * t / (1.0 + t) * xi

    return StructureFunction(
        fn, k=A, alpha=alpha, holder_const=0.5 * A, kind="custom",
        params={"kind": "holder_linear", "mu_amplitude": A, "alpha": float(alpha)},
    )


def freeze(H: StructureFunction, z0: complex) -> StructureFunction:
    """The autonomous function ``xi -> H(z0, xi)``."""
    z0 = complex(z0)
    base = H.fn
    return StructureFunction(
        lambda z, xi: base(np.asarray(z0, dtype=complex), xi),
        k=H.k, alpha=H.alpha, holder_const=0.0, kind="frozen",
        params={"kind": "frozen", "base": H.params, "z0": z0},
    )


def structure_from_config(spec: dict) -> StructureFunction:
    kind = spec.get("kind")
    if kind == "linear":
        return linear_structure(complex(spec.get("mu", 0)), complex(spec.get("nu", 0)),
                                float(spec.get("alpha", 0.5)))
    if kind == "zero":
        return zero_structure()
    if kind == "power":
        return power_example(float(spec["K"])).H
    if kind == "holder_linear":
        return holder_linear(float(spec["mu_amplitude"]), float(spec["alpha"]))
    if kind == "frozen":
        return freeze(structure_from_config(spec["base"]), complex(spec.get("z0", 0)))
    raise ValueError(f"unknown structure kind {kind!r}")


# --- sampled checks ---------------------------------------------------------


@dataclass(frozen=True)
class ConditionReport:
    max_lipschitz: float
    max_holder: float
    max_at_zero: float
    ok: bool

    def as_dict(self) -> dict:
        return {
            "max_lipschitz": self.max_lipschitz,
            "max_holder": self.max_holder,
            "max_at_zero": self.max_at_zero,
            "ok": self.ok,
        }


def _uniform_disk(rng, center, radius, size):
    r = radius * np.sqrt(rng.random(size))
    t = 2 * np.pi * rng.random(size)
    return center + r * np.exp(1j * t)


def verify_condition(H: StructureFunction, domain, samples: int = 1000,
                     rng: np.random.Generator | None = None, slack: float = 1e-6) -> ConditionReport:
    """Sample Lipschitz and Hoelder quotients of ``H`` and ``|H(z, 0)|``.

    ``z`` is drawn uniformly from the domain disk and ``xi`` from ``D(0, 10)``.
    The Hoelder quotient is normalised as ``|H(z1,xi) - H(z2,xi)| / (|z1-z2|^alpha 2|xi|)``.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    rng = np.random.default_rng(0) if rng is None else rng
    z1 = _uniform_disk(rng, domain.center, domain.radius, samples)
    z2 = _uniform_disk(rng, domain.center, domain.radius, samples)
    x1 = _uniform_disk(rng, 0, 10.0, samples)
    x2 = _uniform_disk(rng, 0, 10.0, samples)
    lip = np.abs(H.eval(z1, x1) - H.eval(z1, x2)) / np.abs(x1 - x2)
    dz = np.abs(z1 - z2)
    hol = np.abs(H.eval(z1, x1) - H.eval(z2, x1)) / (dz**H.alpha * 2 * np.abs(x1))
    at0 = np.abs(H.eval(z1, np.zeros_like(z1)))
    rep = ConditionReport(float(lip.max()), float(hol.max()), float(at0.max()), True)
    ok = (rep.max_lipschitz <= H.k + slack and rep.max_holder <= H.holder_const + slack
          and rep.max_at_zero <= slack)
    return ConditionReport(rep.max_lipschitz, rep.max_holder, rep.max_at_zero, bool(ok))


# --- linearisation ----------------------------------------------------------


@dataclass(frozen=True)
class LinearCoefficients:
    mu: complex
    nu: complex
    h_xi: complex
    h_xibar: complex


class NotDifferentiable(ValueError):
    pass


def linearize(H: StructureFunction, xi: complex, z: complex = 0.0, rtol: float = 1e-4) -> LinearCoefficients:
    """``mu = H_xi / (1 - |H_xibar|^2)``, ``nu = conj(H_xi) H_xibar / (1 - |H_xibar|^2)``.

    Wirtinger derivatives in ``xi`` come from central differences along 1 and
    i with step ``1e-5 max(1, |xi|)``; a third difference along the diagonal
    must agree with them, otherwise ``H`` is not C^1 at ``xi``.
    """
    xi = complex(xi)
    delta = 1e-5 * max(1.0, abs(xi))

    def d(e):
        return complex((H.eval(z, xi + delta * e) - H.eval(z, xi - delta * e)) / (2 * delta))

    dx, dy = d(1.0), d(1j)
    h_xi = 0.5 * (dx - 1j * dy)
    h_xibar = 0.5 * (dx + 1j * dy)
    e = (1 + 1j) / math.sqrt(2)
    predicted = h_xi * e + h_xibar * e.conjugate()
    scale = max(abs(dx), abs(dy), 1e-12)
    if abs(d(e) - predicted) > rtol * scale + 1e-9:
        raise NotDifferentiable(f"H is not differentiable at xi = {xi}")
    denom = 1.0 - abs(h_xibar) ** 2
    mu = h_xi / denom
    nu = h_xi.conjugate() * h_xibar / denom
    if abs(mu) + abs(nu) > H.k + 1e-4:
        raise AssertionError(f"|mu| + |nu| = {abs(mu) + abs(nu)} exceeds k = {H.k}")
    return LinearCoefficients(mu, nu, h_xi, h_xibar)
