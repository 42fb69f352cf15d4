"""Local Cauchy and Beurling transforms on a disk by grid quadrature.

For ``D_R = D(z0, R)``, ``a = z - z0`` and ``b = w - z0``,

    C psi(z) =  1/pi int psi(w) / (z - w) - a conj(psi(w)) / (R^2 - a conj(b)) dA(w)
    S psi(z) = -1/pi int psi(w) / (z - w)^2 + R^2 conj(psi(w)) / (R^2 - a conj(b))^2 dA(w)

Quadrature: every masked node carries the area of its cell inside the disk,
and slivers of cells whose centre falls outside go to the nearest masked
node.  At a target ``z`` the kernels act on the remainder
``psi(w) - psi(z) - psi_z(z) (w - z) - psi_zbar(z) conj(w - z)``; the affine
part is integrated exactly over the disk, with ``psi_z``, ``psi_zbar`` taken
by finite differences.  The self-cell of the singular kernels is dropped
(its principal value vanishes).  Constants and affine densities come out
exact to rounding; nodes hugging the circle would otherwise make the
reflected sums nearly singular.

Summation: the singular sums are discrete convolutions and go through a
zero-padded FFT.  The reflected sums depend on ``a conj(b) / R^2`` only and
are summed by a power series where that product is at most ``split`` in
modulus, directly elsewhere.  :func:`direct_transforms` evaluates the same
quadrature with a plain double loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import ComplexField, DiskDomain, GradientField, disk_rect_area, wirtinger

_SERIES_EPS = 1e-17
_CHUNK = 512


# --- quadrature weights -----------------------------------------------------


@lru_cache(maxsize=16)
def cut_cell_weights(domain: DiskDomain) -> np.ndarray:
    """Quadrature weight of every masked node; they sum to ``pi R^2``."""
    d = domain
    n, h, R = d.n, d.spacing, d.radius
    X, Y = np.meshgrid(d.axis, d.axis, indexing="ij")
    W = np.where(d.mask, h * h, 0.0)
    half = 0.5 * h
    for i, j in zip(*np.nonzero(np.abs(np.hypot(X, Y) - R) < h)):
        W[i, j] = disk_rect_area(R, X[i, j] - half, X[i, j] + half, Y[i, j] - half, Y[i, j] + half)
    steps = sorted(
        ((di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1) if di or dj),
        key=lambda s: s[0] ** 2 + s[1] ** 2,
    )
    for i, j in zip(*np.nonzero(~d.mask & (W > 0))):
        for di, dj in steps:
            a, b = i + di, j + dj
            if 0 <= a < n and 0 <= b < n and d.mask[a, b]:
                W[a, b] += W[i, j]
                break
    w = W[d.mask]
    w.setflags(write=False)
    return w


# --- affine correction ------------------------------------------------------


def _exact_integrals(d: DiskDomain):
    """Disk integrals of the kernels ``(K1, K2, P1, P2)`` against 1, b, conj(b).

    ``K1 = 1/(z - w)``, ``K2 = 1/(z - w)^2`` (principal value),
    ``P1 = 1/(1 - u conj(v))``, ``P2 = P1^2`` with ``u = a/R``, ``v = b/R``.
    """
    a = d.offsets
    ab = np.conj(a)
    A = math.pi * d.radius**2
    zero = np.zeros_like(a)
    full = np.full_like(a, A)
    one = (math.pi * ab, zero, full, full)
    lin = (math.pi * np.abs(a) ** 2 - A, -math.pi * ab, 0.5 * A * a, A * a)
    antilin = (0.5 * math.pi * ab**2, zero, zero, zero)
    return one, lin, antilin


def _defects(d: DiskDomain, sums):
    """Exact integral minus discrete sum for densities 1, w - z and conj(w - z)."""
    a = d.offsets
    ab = np.conj(a)
    e0, ea, eb = _exact_integrals(d)
    s0 = sums(np.ones_like(a))
    sa = sums(a)
    sb = sums(ab)
    d0 = [e - s for e, s in zip(e0, s0)]
    da = [(e - a * e1) - (s - a * s1) for e, e1, s, s1 in zip(ea, e0, sa, s0)]
    db = [(e - ab * e1) - (s - ab * s1) for e, e1, s, s1 in zip(eb, e0, sb, s0)]
    return d0, da, db


def _combine(d, psi, grad, sums, defects, want_c, want_s):
    v = psi.values
    if grad is None:
        grad = wirtinger(psi)
    pz, pzb = grad.dz.values, grad.dzbar.values
    d0, da, db = defects
    q1, q2, _, _ = sums(v, reflected=False)
    _, _, r1, r2 = sums(np.conj(v), singular=False)
    vb, pzc, pzbc = np.conj(v), np.conj(pz), np.conj(pzb)
    R2 = d.radius**2
    c = s = None
    if want_c:
        k1 = q1 + v * d0[0] + pz * da[0] + pzb * db[0]
        p1 = r1 + vb * d0[2] + pzbc * da[2] + pzc * db[2]
        c = (k1 - d.offsets / R2 * p1) / math.pi
    if want_s:
        k2 = q2 + v * d0[1] + pz * da[1] + pzb * db[1]
        p2 = r2 + vb * d0[3] + pzbc * da[3] + pzc * db[3]
        s = -(k2 + p2 / R2) / math.pi
    return c, s


# --- fast summation ---------------------------------------------------------


def _singular_kernels(n: int, h: float) -> tuple[np.ndarray, np.ndarray]:
    m = 2 * n
    k = np.fft.fftfreq(m, 1.0 / m)  # 0, 1, ..., n-1, -n, ..., -1
    delta = (k[:, None] + 1j * k[None, :]) * h
    with np.errstate(divide="ignore", invalid="ignore"):
        k1 = np.where(delta == 0, 0.0, 1.0 / delta)
        k2 = np.where(delta == 0, 0.0, 1.0 / delta**2)
    return np.fft.fft2(k1), np.fft.fft2(k2)


class TransformWorkspace:
    """Weights, kernels and correction terms for one domain."""

    def __init__(self, domain: DiskDomain, split: float = 0.95):
        if not 0 < split < 1:
            raise ValueError("split must lie in (0, 1)")
        d = domain
        self.domain = d
        self.split = split
        self.weights = cut_cell_weights(d)
        self._k1_hat, self._k2_hat = _singular_kernels(d.n, d.spacing)
        self._u = d.offsets / d.radius
        self._inner = np.abs(self._u) <= split
        # split^M (M + 1) below _SERIES_EPS
        m = int(math.ceil(math.log(_SERIES_EPS) / math.log(split)))
        while split**m * (m + 1) > _SERIES_EPS:
            m += 1
        self._terms = m
        self._defects = _defects(d, self._sums)

    def _check(self, psi: ComplexField) -> None:
        if psi.domain != self.domain:
            raise ValueError("field domain does not match the workspace domain")

    def _convolve(self, dens: np.ndarray, kernel_hat: np.ndarray) -> np.ndarray:
        d = self.domain
        pad = np.zeros((2 * d.n, 2 * d.n), dtype=complex)
        pad[: d.n, : d.n][d.mask] = dens
        out = np.fft.ifft2(np.fft.fft2(pad) * kernel_hat)
        return out[: d.n, : d.n][d.mask]

    def _reflected(self, dens: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``sum dens / (1 - u conj(v))`` and the same with the kernel squared."""
        u = self._u
        vbar = np.conj(u)
        inner = self._inner
        outer = ~inner
        M = self._terms

        def moments(x, vb):
            mom = np.empty(M + 1, dtype=complex)
            pw = x.copy()
            for m in range(M + 1):
                mom[m] = pw.sum()
                pw *= vb
            return mom

        def series(mom, x):
            s1 = np.zeros_like(x)
            s2 = np.zeros_like(x)
            for m in range(M, -1, -1):
                s1 = s1 * x + mom[m]
                s2 = s2 * x + (m + 1) * mom[m]
            return s1, s2

        p1 = np.empty(u.size, dtype=complex)
        p2 = np.empty(u.size, dtype=complex)
        p1[inner], p2[inner] = series(moments(dens, vbar), u[inner])
        if outer.any():
            xo = u[outer]
            p1[outer], p2[outer] = series(moments(dens[inner], vbar[inner]), xo)
            do, vo = dens[outer], vbar[outer]
            idx = np.nonzero(outer)[0]
            for start in range(0, idx.size, _CHUNK):
                sl = slice(start, start + _CHUNK)
                r = 1.0 / (1.0 - xo[sl, None] * vo[None, :])
                p1[idx[sl]] += r @ do
                p2[idx[sl]] += (r * r) @ do
        return p1, p2

    def _sums(self, dens, singular=True, reflected=True):
        """Weighted sums ``(K1, K2, P1, P2)`` of a node density."""
        wd = dens * self.weights
        q1 = q2 = r1 = r2 = None
        if singular:
            q1 = self._convolve(wd, self._k1_hat)
            q2 = self._convolve(wd, self._k2_hat)
        if reflected:
            r1, r2 = self._reflected(wd)
        return q1, q2, r1, r2

    def apply(self, psi: ComplexField, want_c: bool = True, want_s: bool = True,
              grad: GradientField | None = None):
        """Return ``(C psi, S psi)`` as value arrays (``None`` where not requested).

        ``grad`` replaces the finite-difference derivatives of ``psi`` in the
        affine correction.
        """
        self._check(psi)
        return _combine(self.domain, psi, grad, self._sums, self._defects, want_c, want_s)


@lru_cache(maxsize=8)
def workspace_for(domain: DiskDomain) -> TransformWorkspace:
    return TransformWorkspace(domain)


def cauchy(ws: TransformWorkspace, psi: ComplexField) -> ComplexField:
    c, _ = ws.apply(psi, want_s=False)
    return ComplexField(ws.domain, c)


def beurling(ws: TransformWorkspace, psi: ComplexField) -> ComplexField:
    _, s = ws.apply(psi, want_c=False)
    return ComplexField(ws.domain, s)


def _direct_sums(d: DiskDomain, weights: np.ndarray):
    z = d.nodes
    a = d.offsets
    R2 = d.radius**2

    def sums(dens, singular=True, reflected=True):
        wd = dens * weights
        q1 = np.empty(d.size, dtype=complex)
        q2 = np.empty(d.size, dtype=complex)
        r1 = np.empty(d.size, dtype=complex)
        r2 = np.empty(d.size, dtype=complex)
        for start in range(0, d.size, _CHUNK):
            sl = slice(start, start + _CHUNK)
            diff = z[sl, None] - z[None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                inv = np.where(diff == 0, 0.0, 1.0 / diff)
            refl = 1.0 / (1.0 - a[sl, None] * np.conj(a)[None, :] / R2)
            q1[sl] = inv @ wd
            q2[sl] = (inv * inv) @ wd
            r1[sl] = refl @ wd
            r2[sl] = (refl * refl) @ wd
        return q1, q2, r1, r2

    return sums


def direct_transforms(psi: ComplexField, grad: GradientField | None = None):
    """Reference O(N^2) evaluation of ``(C psi, S psi)`` with the same quadrature."""
    d = psi.domain
    sums = _direct_sums(d, cut_cell_weights(d))
    return _combine(d, psi, grad, sums, _defects(d, sums), True, True)


@dataclass(frozen=True)
class IdentityReport:
    dbar_residual: float
    boundary_residual: float
    beurling_residual: float

    def as_dict(self) -> dict:
        return {
            "dbar_residual": self.dbar_residual,
            "boundary_residual": self.boundary_residual,
            "beurling_residual": self.beurling_residual,
        }


def verify_cauchy_identities(ws: TransformWorkspace, psi: ComplexField,
                             cs: tuple[np.ndarray, np.ndarray] | None = None) -> IdentityReport:
    """Check dbar C = id, dz C = S and Re C = 0 near the circle.

    Derivatives are finite differences of the quadrature ``C psi``; interior
    means farther than ``4h`` from the circle, the boundary collar is the set
    of nodes within ``2h`` of it.  ``cs`` passes an existing ``ws.apply(psi)``.
    """
    d = ws.domain
    ws._check(psi)
    c, s = ws.apply(psi) if cs is None else cs
    grad = wirtinger(ComplexField(d, c))
    interior = d.interior(4.0)
    collar = d.distance_to_boundary <= 2.0 * d.spacing

    def _max(x):
        return float(np.max(x, initial=0.0))

    return IdentityReport(
        dbar_residual=_max(np.abs(grad.dzbar.values - psi.values)[interior]),
        boundary_residual=_max(np.abs(c.real)[collar]),
        beurling_residual=_max(np.abs(s - grad.dz.values)[interior]),
    )
