"""Inverse structure function H* of a Beltrami equation.

If ``f`` solves ``f_zbar = H(z, f_z)`` then ``g = f^-1`` solves
``g_wbar = H*(g, g_w)``.  At a point, with ``xi = g_w`` and ``zeta = g_wbar``,
the chain rule gives

    -zeta / (|xi|^2 - |zeta|^2) = H(g, conj(xi) / (|xi|^2 - |zeta|^2)),

and ``H*(g, xi)`` is the ``zeta`` with ``|zeta| < |xi|`` solving it.  The map
``F_xi(zeta) = -zeta / (|xi|^2 - |zeta|^2)`` is a bijection of the disk
``|zeta| < |xi|`` onto the plane, so the relation becomes the fixed point

    zeta' = H(g, conj(xi) / (|xi|^2 - |F_xi^-1(zeta')|^2)),   zeta = F_xi^-1(zeta').
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .grid import ComplexField, make_disk, wirtinger
from .structure import StructureFunction


def f_xi(xi, zeta, k: float | None = None):
    """``-zeta / (|xi|^2 - |zeta|^2)``; ``|zeta|`` must stay below ``k |xi|``."""
    xi = np.asarray(xi, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    if np.any(xi == 0):
        raise ValueError("xi must be non-zero")
    bound = np.abs(xi) * (1.0 if k is None else k)
    r = np.abs(zeta)
    if np.any(r > bound * (1 + 1e-12)) or (k is None and np.any(r >= bound)):
        raise ValueError("zeta lies outside the disk where F_xi is bijective")
    out = -zeta / (np.abs(xi) ** 2 - r**2)
    return out[()] if out.ndim == 0 else out


def f_xi_inverse(xi, zeta_prime, k: float | None = None):
    """Preimage of ``zeta_prime`` under ``F_xi``.

    ``F_xi`` maps rays to opposite rays, so ``zeta = -(zeta'/|zeta'|) r`` with
    ``r`` the positive root of ``|zeta'| r^2 + r - |zeta'| |xi|^2 = 0``.
    """
    xi = np.asarray(xi, dtype=complex)
    zp = np.asarray(zeta_prime, dtype=complex)
    if np.any(xi == 0):
        raise ValueError("xi must be non-zero")
    s = np.abs(zp)
    x2 = np.abs(xi) ** 2
    r = 2.0 * s * x2 / (1.0 + np.sqrt(1.0 + 4.0 * s * s * x2))
    # via the angle: zp / |zp| overflows for subnormal zp
    phase = np.where(s > 0, np.exp(1j * np.angle(zp)), 0.0)
    zeta = -phase * r
    if k is not None and np.any(r > k * np.sqrt(x2) * (1 + 1e-12)):
        raise ValueError("zeta_prime lies outside the image of the disk |zeta| <= k|xi|")
    back = -zeta / (x2 - r * r)
    if np.any(np.abs(back - zp) >= 1e-10 * (1.0 + s)):
        raise AssertionError("F_xi roundtrip failed")
    return zeta[()] if zeta.ndim == 0 else zeta


def k_star(K: float) -> float:
    return (K**3 - 1.0) / (K**3 + 1.0)


@dataclass(frozen=True)
class InverseStructure:
    H: StructureFunction
    tol: float = 1e-12
    max_iters: int = 500

    @property
    def k_star(self) -> float:
        return k_star(self.H.K)


class NoConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class HStarResult:
    value: np.ndarray
    iterations: int
    max_ratio: float  # largest ratio of consecutive iterate steps
    relation_residual: float


def relation_residual(H: StructureFunction, g, xi, zeta) -> np.ndarray:
    """``|F_xi(zeta) - H(g, conj(xi)/(|xi|^2 - |zeta|^2))|``, zero at ``xi = 0``."""
    g, xi, zeta = np.broadcast_arrays(*(np.asarray(a, dtype=complex) for a in (g, xi, zeta)))
    out = np.zeros(xi.shape)
    nz = xi != 0
    den = np.abs(xi[nz]) ** 2 - np.abs(zeta[nz]) ** 2
    out[nz] = np.abs(-zeta[nz] / den - H.eval(g[nz], np.conj(xi[nz]) / den))
    return out


def h_star_detail(inv: InverseStructure, g, xi) -> HStarResult:
    H = inv.H
    g, xi = np.broadcast_arrays(np.asarray(g, dtype=complex), np.asarray(xi, dtype=complex))
    shape = xi.shape
    g, xi = g.ravel(), xi.ravel()
    out = np.zeros(xi.shape, dtype=complex)
    nz = xi != 0
    gg, xx = g[nz], xi[nz]
    x2 = np.abs(xx) ** 2
    xb = np.conj(xx)
    zp = np.zeros_like(xx)
    prev_step = None
    max_ratio = 0.0
    it = 0
    done = xx.size == 0
    while not done:
        if it >= inv.max_iters:
            raise NoConvergence(f"H* iteration did not converge in {inv.max_iters} steps")
        zeta = f_xi_inverse(xx, zp)
        new = H.eval(gg, xb / (x2 - np.abs(zeta) ** 2))
        step = np.abs(new - zp)
        zp = new
        it += 1
        if prev_step is not None:
            active = prev_step > 1e3 * inv.tol * (1.0 + np.abs(zp))
            if active.any():
                max_ratio = max(max_ratio, float(np.max(step[active] / prev_step[active])))
        prev_step = step
        done = bool(np.all(step <= inv.tol * np.maximum(1.0, np.abs(zp))))
    if xx.size:
        out[nz] = f_xi_inverse(xx, zp)
    res = relation_residual(H, g, xi, out)
    scale = np.maximum(1.0, np.abs(zp)) if xx.size else np.ones(0)
    worst = 0.0
    if xx.size:
        rel = res[nz] / scale
        worst = float(rel.max())
        if worst >= 10 * inv.tol:
            raise AssertionError(f"H* output violates its defining relation by {worst}")
    return HStarResult(out.reshape(shape), it, max_ratio, worst)


def h_star(inv: InverseStructure, g, xi):
    """``H*(g, xi)``, vectorised over broadcast ``g`` and ``xi``; ``H*(g, 0) = 0``."""
    v = h_star_detail(inv, g, xi).value
    return v[()] if v.ndim == 0 else v


def _sample_disk(rng, radius, size):
    return radius * np.sqrt(rng.random(size)) * np.exp(2j * np.pi * rng.random(size))


def verify_lipschitz_star(inv: InverseStructure, samples: int = 1000,
                          rng: np.random.Generator | None = None) -> float:
    """Largest sampled ``|H*(g,xi1) - H*(g,xi2)| / |xi1 - xi2|``."""
    if samples < 100:
        raise ValueError("need at least 100 samples")
    rng = np.random.default_rng(0) if rng is None else rng
    g = _sample_disk(rng, 1.0, samples)
    x1 = _sample_disk(rng, 10.0, samples)
    # half the pairs are close, to probe the local derivative
    x2 = np.where(np.arange(samples) % 2 == 0,
                  _sample_disk(rng, 10.0, samples),
                  x1 + _sample_disk(rng, 1e-3, samples))
    q = np.abs(h_star(inv, g, x1) - h_star(inv, g, x2)) / np.abs(x1 - x2)
    worst = float(q.max())
    if worst > inv.k_star + 1e-6:
        raise AssertionError(f"H* Lipschitz quotient {worst} exceeds k* = {inv.k_star}")
    return worst


@dataclass(frozen=True)
class HolderStarReport:
    constant: float
    scaling_exponent: float | None
    distances: list
    numerators: list


def verify_holder_star(inv: InverseStructure, samples: int = 200,
                       rng: np.random.Generator | None = None) -> HolderStarReport:
    """Empirical Hoelder constant of ``H*`` in ``g`` and its dyadic scaling.

    The constant is the largest ``|H*(g1,xi) - H*(g2,xi)| / (|g1-g2|^alpha |xi|)``
    over random triples.  The scaling exponent is the log-log slope of the
    mean numerator against ``|g1 - g2| = 0.1 * 2^-j``, ``j = 0..11``, with
    ``g1 = 0``.
    """
    H = inv.H
    rng = np.random.default_rng(0) if rng is None else rng
    g1 = _sample_disk(rng, 1.0, samples)
    g2 = _sample_disk(rng, 1.0, samples)
    xi = _sample_disk(rng, 10.0, samples)
    num = np.abs(h_star(inv, g1, xi) - h_star(inv, g2, xi))
    C = float(np.max(num / (np.abs(g1 - g2) ** H.alpha * np.abs(xi))))
    if not C < 1e6:
        raise AssertionError(f"Hoelder constant of H* is not finite: {C}")
    if H.holder_const == 0:
        return HolderStarReport(C, None, [], [])
    dirs = np.exp(2j * np.pi * rng.random(samples))
    xs = _sample_disk(rng, 10.0, samples)
    dists = 0.1 * 2.0 ** -np.arange(12)
    nums = [float(np.mean(np.abs(h_star(inv, 0.0, xs) - h_star(inv, t * dirs, xs)) / np.abs(xs)))
            for t in dists]
    slope = float(np.polyfit(np.log(dists), np.log(nums), 1)[0])
    return HolderStarReport(C, slope, [float(t) for t in dists], nums)


# --- inverse PDE check ------------------------------------------------------


class NotInjective(ValueError):
    pass


def _lagrange4(t):
    """Cubic Lagrange weights and derivatives at offset ``t`` in [1, 2) on nodes 0..3."""
    w = np.stack([
        -(t - 1) * (t - 2) * (t - 3) / 6,
        t * (t - 2) * (t - 3) / 2,
        -t * (t - 1) * (t - 3) / 2,
        t * (t - 1) * (t - 2) / 6,
    ])
    dw = np.stack([
        -(3 * t * t - 12 * t + 11) / 6,
        (3 * t * t - 10 * t + 6) / 2,
        -(3 * t * t - 8 * t + 3) / 2,
        (3 * t * t - 6 * t + 2) / 6,
    ])
    return w, dw


class _Bicubic:
    """Local bicubic Lagrange interpolant of a field on its full grid."""

    def __init__(self, F: ComplexField):
        d = F.domain
        self.d = d
        self.grid = d.scatter(F.values, fill=np.nan)

    def __call__(self, z):
        d = self.d
        h = d.spacing
        w = z - d.center
        u = (w.real + d.radius) / h - 0.5
        v = (w.imag + d.radius) / h - 0.5
        i0 = np.floor(u).astype(int) - 1
        j0 = np.floor(v).astype(int) - 1
        if np.any(i0 < 0) or np.any(j0 < 0) or np.any(i0 + 3 >= d.n) or np.any(j0 + 3 >= d.n):
            raise ValueError("interpolation stencil leaves the grid")
        wu, du = _lagrange4(u - i0)
        wv, dv = _lagrange4(v - j0)
        val = np.zeros(z.shape, dtype=complex)
        fx = np.zeros(z.shape, dtype=complex)
        fy = np.zeros(z.shape, dtype=complex)
        for a in range(4):
            for b in range(4):
                g = self.grid[i0 + a, j0 + b]
                val += wu[a] * wv[b] * g
                fx += du[a] * wv[b] * g
                fy += wu[a] * dv[b] * g
        if np.any(np.isnan(val)):
            raise ValueError("interpolation stencil leaves the disk")
        return val, fx / h, fy / h


def invert_field(F: ComplexField, targets: np.ndarray, iters: int = 30) -> np.ndarray:
    """Solve ``F(z) = w`` for each target by nearest-node seeded Newton steps."""
    d = F.domain
    inner = d.interior(2.5)
    tree = cKDTree(np.column_stack([F.values[inner].real, F.values[inner].imag]))
    _, idx = tree.query(np.column_stack([targets.real, targets.imag]))
    z = d.nodes[inner][idx].copy()
    interp = _Bicubic(F)
    for _ in range(iters):
        val, fx, fy = interp(z)
        r = val - targets
        # real 2x2 Jacobian columns (fx, fy) in the (re, im) basis
        a, b, c, e = fx.real, fy.real, fx.imag, fy.imag
        det = a * e - b * c
        dx = (e * r.real - b * r.imag) / det
        dy = (-c * r.real + a * r.imag) / det
        z = z - (dx + 1j * dy)
        if np.max(np.abs(r)) < 1e-13:
            break
    val, _, _ = interp(z)
    if np.max(np.abs(val - targets)) > 1e-9:
        raise NotInjective("Newton inversion of F did not converge")
    return z


@dataclass(frozen=True)
class InversePDEReport:
    residual: float
    image_center: complex
    image_radius: float
    n_image: int


def verify_inverse_pde(H: StructureFunction, F: ComplexField, n_image: int | None = None,
                       inv: InverseStructure | None = None) -> InversePDEReport:
    """Invert ``F`` on a grid over half its image disk and check ``g``'s equation.

    The image disk is centred at ``F(center)`` with radius the distance to the
    nearest image of the outermost nodes.  Returns the max of
    ``|g_wbar - H*(g, g_w)|`` over the image grid.
    """
    d = F.domain
    grad = wirtinger(F)
    J = np.abs(grad.dz.values) ** 2 - np.abs(grad.dzbar.values) ** 2
    inner = d.interior(4.0)
    if np.any(J[inner] <= 0):
        raise NotInjective("Jacobian of F changes sign on interior nodes")
    inv = InverseStructure(H) if inv is None else inv
    w0 = complex(_Bicubic(F)(np.array([d.center]))[0][0])
    rim = d.distance_to_boundary < 1.5 * d.spacing
    radius = float(np.min(np.abs(F.values[rim] - w0)))
    n_image = d.n // 2 if n_image is None else n_image
    img = make_disk(w0, 0.5 * radius, n_image)
    g = ComplexField(img, invert_field(F, img.nodes))
    gg = wirtinger(g)
    hs = h_star(inv, g.values, gg.dz.values)
    res = float(np.max(np.abs(gg.dzbar.values - hs)))
    return InversePDEReport(res, w0, radius, n_image)
