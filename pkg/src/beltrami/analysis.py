"""Regularity measurements on discrete fields.

Jacobians, distortion quotients, difference quotients, Caccioppoli ratios,
L^2 decay rates and Morrey-Campanato Hoelder exponents.  Gradients default
to :func:`~beltrami.grid.wirtinger`; solver output can pass its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import (ComplexField, GradientField, disk_selection, gradient_l2_norm, l2_norm,
                   make_disk, mean, restrict, shrunk_domain, subdisk_weights, weighted_l2,
                   weighted_mean, wirtinger)
from .solver import SolverConfig, solve_frozen
from .structure import StructureFunction

# gradients below this multiple of the field's scale count as a constant map
DEGENERATE_RTOL = 1e-8
# fitted exponents this close to 1 are reported as smooth
SMOOTH_SLACK = 0.05


@dataclass(frozen=True)
class JacobianReport:
    min_J: float
    argmin: complex
    mean_J: float
    negative_fraction: float

    def as_dict(self) -> dict:
        return {"min_J": self.min_J, "argmin": [self.argmin.real, self.argmin.imag],
                "mean_J": self.mean_J, "negative_fraction": self.negative_fraction}


def _grad(f: ComplexField, grad: GradientField | None) -> GradientField:
    if grad is None:
        return wirtinger(f)
    if grad.domain != f.domain:
        raise ValueError("gradient and field live on different domains")
    return grad


def jacobian_values(grad: GradientField) -> np.ndarray:
    return np.abs(grad.dz.values) ** 2 - np.abs(grad.dzbar.values) ** 2


def jacobian(f: ComplexField, grad: GradientField | None = None,
             select: np.ndarray | None = None) -> JacobianReport:
    """``J = |f_z|^2 - |f_zbar|^2`` over nodes more than 4h from the circle."""
    d = f.domain
    J = jacobian_values(_grad(f, grad))
    sel = d.interior(4.0) if select is None else select
    if not sel.any():
        raise ValueError("no nodes selected")
    Js = J[sel]
    i = int(np.argmin(Js))
    return JacobianReport(float(Js[i]), complex(d.nodes[sel][i]), float(Js.mean()),
                          float(np.mean(Js <= 0)))


def distortion_values(f: ComplexField, grad: GradientField | None = None) -> np.ndarray:
    """Pointwise ``(|f_z| + |f_zbar|) / (|f_z| - |f_zbar|)``.

    Nodes where both derivatives are negligible against the field scale get
    1; nodes with ``|f_zbar| >= |f_z|`` otherwise get infinity.
    """
    d = f.domain
    g = _grad(f, grad)
    a = np.abs(g.dz.values)
    b = np.abs(g.dzbar.values)
    scale = max(float(np.max(np.abs(f.values), initial=0.0)) / d.radius, 1e-300)
    flat = a + b <= DEGENERATE_RTOL * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(a > b, (a + b) / (a - b), np.inf)
    return np.where(flat, 1.0, q)


def quasiregularity_constant(f: ComplexField, grad: GradientField | None = None,
                             select: np.ndarray | None = None) -> float:
    """Max distortion quotient over nodes more than 4h from the circle (``inf`` if J <= 0)."""
    d = f.domain
    sel = d.interior(4.0) if select is None else select
    q = distortion_values(f, grad)[sel]
    return float(np.max(q, initial=1.0))


def _shift_cells(f: ComplexField, h: float, direction: complex) -> tuple[int, int]:
    s = h * complex(direction) / f.domain.spacing
    si, sj = round(s.real), round(s.imag)
    if abs(s.real - si) > 1e-9 or abs(s.imag - sj) > 1e-9:
        raise ValueError("h * direction must be a whole number of grid steps")
    return si, sj


def difference_quotient(f: ComplexField, h: float, direction: complex = 1.0,
                        grad: GradientField | None = None):
    """``F_h(z) = (F(z + h e) - F(z)) / h`` on the shrunk concentric disk.

    Returns the field and, when ``grad`` is given, the matching difference
    quotient of the gradient.
    """
    d = f.domain
    e = complex(direction)
    if abs(abs(e) - 1) > 1e-12:
        raise ValueError("direction must be a unit complex number")
    if h < 2 * d.spacing * (1 - 1e-12):
        raise ValueError("h must be at least twice the grid spacing")
    si, sj = _shift_cells(f, h, e)
    m = max(abs(si), abs(sj))
    # a diagonal shift needs more room than its largest component
    while True:
        sub = shrunk_domain(d, m)
        moved = make_disk(sub.center + h * e, sub.radius, sub.n)
        try:
            fwd = restrict(f, moved)
            break
        except ValueError:
            m += 1
    base = restrict(f, sub)
    Fh = ComplexField(sub, (fwd.values - base.values) / h)
    gh = None
    if grad is not None:
        pieces = []
        for comp in (grad.dz, grad.dzbar):
            pieces.append(ComplexField(sub, (restrict(comp, moved).values - restrict(comp, sub).values) / h))
        gh = GradientField(*pieces)
    return Fh, gh


def difference_quotient_qr(f: ComplexField, h: float, direction: complex = 1.0,
                           grad: GradientField | None = None) -> float:
    """Distortion of ``F_h``; see :func:`difference_quotient`."""
    Fh, gh = difference_quotient(f, h, direction, grad)
    return quasiregularity_constant(Fh, gh)


def caccioppoli_ratio(f: ComplexField, rho: float, R: float,
                      grad: GradientField | None = None) -> float:
    """``||D f||^2_{D_rho} (R - rho)^2 / ||f - f_R||^2_{D_R}`` with ``|Df|^2 = |f_z|^2 + |f_zbar|^2``."""
    d = f.domain
    if not 0 < rho < R <= d.radius * (1 + 1e-12):
        raise ValueError("need 0 < rho < R <= domain radius")
    num = gradient_l2_norm(_grad(f, grad), rho) ** 2 * (R - rho) ** 2
    den = l2_norm(f - mean(f, R), R) ** 2
    scale = l2_norm(f, R) ** 2
    if den <= 1e-24 * max(scale, 1e-300) or den == 0:
        return 0.0
    return num / den


def _loglog_slope(radii, values):
    x = np.log(np.asarray(radii, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - fit) ** 2)) / ss if ss > 0 else 1.0
    return float(slope), float(intercept), r2


def decay_exponent(g: ComplexField, z0: complex, radii) -> float:
    """Log-log slope of ``||g||_{L^2(D(z0, rho))}`` against ``rho``.

    Sub-disk integrals use exact cell overlaps (:func:`subdisk_weights`).
    """
    radii = list(radii)
    if len(radii) < 4:
        raise ValueError("need at least 4 radii")
    vals = [weighted_l2(g.values, subdisk_weights(g.domain, r, z0)) for r in radii]
    if min(vals) <= 0:
        raise ValueError("field vanishes on a test disk")
    return _loglog_slope(radii, vals)[0]


def default_radii(domain, count: int = 6) -> list[float]:
    return [0.4 * domain.radius * 0.5**j for j in range(count)]


@dataclass(frozen=True)
class HolderEstimate:
    gamma: float
    M: float
    radii: list
    values: list
    r_squared: float
    flag: str = ""

    def as_dict(self) -> dict:
        return {"gamma": self.gamma, "M": self.M, "radii": list(self.radii),
                "values": list(self.values), "r_squared": self.r_squared, "flag": self.flag}


class DegenerateFit(ValueError):
    pass


def campanato_values(g: ComplexField, z0: complex, radii) -> list[float]:
    """``||g - g_rho||_{L^2(D(z0, rho))}`` with exact cell overlaps."""
    out = []
    for r in radii:
        w = subdisk_weights(g.domain, r, z0)
        out.append(weighted_l2(g.values - weighted_mean(g.values, w), w))
    return out


def holder_exponent(g: ComplexField, z0: complex = 0.0, radii=None) -> HolderEstimate:
    """Fit ``log ||g - g_rho||_{L^2(D(z0, rho))} = log M + (1 + gamma) log rho``."""
    radii = default_radii(g.domain) if radii is None else [float(r) for r in radii]
    if len(radii) < 5:
        raise ValueError("need at least 5 radii")
    if any(b >= a for a, b in zip(radii[:-1], radii[1:])):
        raise ValueError("radii must be strictly decreasing")
    vals = campanato_values(g, z0, radii)
    if max(vals) < 1e-14:
        raise DegenerateFit("oscillation is below 1e-14 at every radius")
    if min(vals) <= 0:
        raise DegenerateFit("zero oscillation on a test disk")
    slope, intercept, r2 = _loglog_slope(radii, vals)
    gamma = slope - 1.0
    # cell-sized disks pull smooth fields a few hundredths below gamma = 1
    flag = "smoother than Hoelder scale" if gamma >= 1.0 - SMOOTH_SLACK else ""
    return HolderEstimate(gamma, math.exp(intercept), radii, vals, max(0.0, min(1.0, r2)), flag)


@dataclass(frozen=True)
class FloorRow:
    R0: float
    min_J: float
    mean_J: float
    negative_fraction: float
    argmin: complex

    def as_dict(self) -> dict:
        return {"R0": self.R0, "min_J": self.min_J, "mean_J": self.mean_J,
                "negative_fraction": self.negative_fraction,
                "argmin": [self.argmin.real, self.argmin.imag]}


def jacobian_floor_study(H: StructureFunction, radii, cfg: SolverConfig,
                         z0: complex = 0.0) -> list[FloorRow]:
    """Solve the frozen problem on ``D(0, 2 R0)`` and take ``min J`` over ``D(0, R0)``.

    Each solve uses ``cfg``'s grid size and iteration budget with the
    tolerance rescaled to the larger disk.
    """
    rows = []
    base_tol_scale = cfg.tol / math.sqrt(math.pi * cfg.domain.radius**2)
    for R0 in radii:
        d = make_disk(0, 2.0 * R0, cfg.domain.n)
        c = SolverConfig(d, tol=base_tol_scale * math.sqrt(math.pi * d.radius**2),
                         max_iters=cfg.max_iters)
        rep = solve_frozen(H, z0, c)
        if not rep.converged:
            raise RuntimeError(f"solver did not converge for R0 = {R0}")
        sel = disk_selection(d, R0)
        jr = jacobian(rep.F, select=sel)
        rows.append(FloorRow(float(R0), jr.min_J, jr.mean_J, jr.negative_fraction, jr.argmin))
        if not (jr.min_J > 0 and jr.negative_fraction == 0):
            raise AssertionError(f"Jacobian is not positive on D(0, {R0})")
    return rows


def monotone_energy(grad: GradientField, K: float, radii, center: complex | None = None) -> list[float]:
    """``r^(-2/K) int_{D_r} J`` at each radius (non-decreasing for quasiregular maps)."""
    d = grad.domain
    J = jacobian_values(grad)
    out = []
    for r in radii:
        sel = disk_selection(d, r, center)
        out.append(float(np.sum(J[sel]) * d.cell_area) * r ** (-2.0 / K))
    return out
