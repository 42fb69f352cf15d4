"""Contraction solver for the local Riemann-Hilbert problem on a disk.

Find ``F`` on ``D(z0, R)`` with ``F_zbar = H(z0, F_z)`` and ``Re(F - f) = 0``
on the circle.  Writing ``F = f + C psi`` turns this into the fixed point

    psi = H(z0, S psi + f_z) - f_zbar,

a contraction with factor ``k`` on L^2 because ``S`` is an isometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import ComplexField, DiskDomain, GradientField, gradient_l2_norm, l2_norm, wirtinger
from .structure import StructureFunction, freeze
from .transforms import workspace_for


@dataclass(frozen=True)
class SolverConfig:
    domain: DiskDomain
    tol: float | None = None
    max_iters: int = 200

    def __post_init__(self):
        if self.tol is None:
            object.__setattr__(self, "tol", default_tol(self.domain))
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


def default_tol(domain: DiskDomain) -> float:
    return 1e-8 * math.sqrt(math.pi * domain.radius**2)


@dataclass
class SolverReport:
    F: ComplexField
    psi: ComplexField
    grad: GradientField  # (S psi + f_z, psi + f_zbar)
    iterations: int
    increments: list[float]
    measured_contraction: float
    final_residual: float
    fd_residual: float
    norm_ratio: float
    defect_norms: tuple[float, float]  # (||F_zbar - f_zbar||, ||F_z - f_z||)
    converged: bool
    k: float
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "increments": list(self.increments),
            "measured_contraction": self.measured_contraction,
            "final_residual": self.final_residual,
            "fd_residual": self.fd_residual,
            "norm_ratio": self.norm_ratio,
            "defect_norms": list(self.defect_norms),
            "converged": self.converged,
        }


def _ratios(increments) -> list[float]:
    return [b / a for a, b in zip(increments[:-1], increments[1:]) if a > 0]


def solve_riemann_hilbert(H: StructureFunction, z0: complex, f: ComplexField, cfg: SolverConfig,
                          psi0: ComplexField | None = None,
                          grad_f: GradientField | None = None) -> SolverReport:
    """Iterate ``psi <- H(z0, S psi + f_z) - f_zbar`` from ``psi0`` (default 0).

    Stops when the L^2 increment drops below ``cfg.tol``.  The returned
    gradient of ``F`` is ``(S psi + f_z, psi + f_zbar)``; ``final_residual``
    is the L^2 norm of ``F_zbar - H(z0, F_z)`` for that gradient and
    ``fd_residual`` the same with finite differences of ``F`` on nodes more
    than 4h from the circle.
    """
    d = cfg.domain
    if f.domain != d:
        raise ValueError("base field is not on the solver domain")
    ws = workspace_for(d)
    gf = wirtinger(f) if grad_f is None else grad_f
    fz, fzb = gf.dz.values, gf.dzbar.values
    z0 = complex(z0)

    def step(psi):
        _, s = ws.apply(psi, want_c=False)
        return ComplexField(d, H.eval(z0, s + fz) - fzb)

    psi = ComplexField.constant(d, 0) if psi0 is None else psi0
    increments: list[float] = []
    converged = False
    for _ in range(cfg.max_iters):
        new = step(psi)
        inc = l2_norm(new - psi)
        increments.append(inc)
        psi = new
        if inc < cfg.tol:
            converged = True
            break

    c, s = ws.apply(psi)
    F = ComplexField(d, c) + f
    gF = GradientField(ComplexField(d, s + fz), ComplexField(d, psi.values + fzb))
    res = gF.dzbar.values - H.eval(z0, gF.dz.values)
    final_residual = math.sqrt(float(np.sum(np.abs(res) ** 2)) * d.cell_area)

    fd = wirtinger(F)
    inner = d.interior(4.0)
    fd_res = (fd.dzbar.values - H.eval(z0, fd.dz.values))[inner]
    fd_residual = math.sqrt(float(np.sum(np.abs(fd_res) ** 2)) * d.cell_area)

    base = gradient_l2_norm(gf)
    norm_ratio = gradient_l2_norm(gF) / base if base > 0 else float("nan")
    ratios = _ratios(increments)
    return SolverReport(
        F=F, psi=psi, grad=gF,
        iterations=len(increments),
        increments=increments,
        measured_contraction=max(ratios, default=0.0),
        final_residual=final_residual,
        fd_residual=fd_residual,
        norm_ratio=norm_ratio,
        defect_norms=(l2_norm(psi), l2_norm(ComplexField(d, s))),
        converged=converged,
        k=H.k,
    )


def identity_field(domain: DiskDomain) -> ComplexField:
    return ComplexField(domain, domain.nodes)


def identity_gradient(domain: DiskDomain) -> GradientField:
    return GradientField(ComplexField.constant(domain, 1), ComplexField.constant(domain, 0))


def solve_frozen(H: StructureFunction, z0: complex, cfg: SolverConfig, **kw) -> SolverReport:
    """Solve ``F_zbar = H(z0, F_z)`` with ``Re(F - z) = 0`` on the circle."""
    d = cfg.domain
    return solve_riemann_hilbert(freeze(H, z0), z0, identity_field(d), cfg,
                                 grad_f=identity_gradient(d), **kw)


def contraction_trace(report: SolverReport, slack: float = 0.05) -> list[float]:
    """Ratios of consecutive increments, checked against ``k + slack``.

    A run that converged in one or two steps has nothing to measure and
    yields its (possibly empty) trace unchecked.
    """
    inc = report.increments
    if len(inc) < 3 and not report.converged:
        raise ValueError("need at least 3 increments to form a contraction trace")
    ratios = _ratios(inc)
    if len(inc) >= 3 and max(ratios, default=0.0) > report.k + slack:
        raise AssertionError(f"contraction ratio {max(ratios)} exceeds k + {slack} = {report.k + slack}")
    return ratios
