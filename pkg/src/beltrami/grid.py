"""Disk domains, complex fields on them, Wirtinger derivatives and discrete norms.

Every disk is discretised by a cell-centred Cartesian grid over its bounding
square; a node belongs to the disk when its centre lies strictly inside.  All
quadratures use the uniform cell weight ``h**2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Union

import numpy as np


@dataclass(frozen=True, eq=False)
class DiskDomain:
    """Cell-centred grid on the disk ``D(center, radius)``.

    The grid has ``n`` nodes per axis of the bounding square.  Node ``(i, j)``
    sits at ``center + (-R + (i + 1/2) h) + 1j * (-R + (j + 1/2) h)``; masked
    nodes are stored in row-major ``(i, j)`` order.
    """

    center: complex
    radius: float
    n: int

    @property
    def spacing(self) -> float:
        return 2.0 * self.radius / self.n

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    @cached_property
    def axis(self) -> np.ndarray:
        """Offsets of the node centres from ``center`` along one axis."""
        h = self.spacing
        return -self.radius + (np.arange(self.n) + 0.5) * h

    @cached_property
    def mask(self) -> np.ndarray:
        x = self.axis[:, None]
        y = self.axis[None, :]
        return x * x + y * y < self.radius**2

    @cached_property
    def index(self) -> tuple[np.ndarray, np.ndarray]:
        """Grid indices ``(i, j)`` of the masked nodes."""
        return np.nonzero(self.mask)

    @cached_property
    def nodes(self) -> np.ndarray:
        i, j = self.index
        return self.center + self.axis[i] + 1j * self.axis[j]

    @cached_property
    def offsets(self) -> np.ndarray:
        """``nodes - center``, computed without cancellation."""
        i, j = self.index
        return self.axis[i] + 1j * self.axis[j]

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    @cached_property
    def distance_to_boundary(self) -> np.ndarray:
        return self.radius - np.abs(self.offsets)

    def interior(self, margin: float = 4.0) -> np.ndarray:
        """Masked nodes farther than ``margin * spacing`` from the circle."""
        return self.distance_to_boundary > margin * self.spacing

    def within(self, sub_radius: float) -> np.ndarray:
        """Masked nodes inside the concentric sub-disk of radius ``sub_radius``."""
        if sub_radius > self.radius * (1 + 1e-12):
            raise ValueError(
                f"sub_radius {sub_radius} exceeds domain radius {self.radius}"
            )
        return np.abs(self.offsets) < sub_radius

    def scatter(self, values: np.ndarray, fill=np.nan) -> np.ndarray:
        """Place per-node values on the full ``n x n`` grid."""
        out = np.full((self.n, self.n), fill, dtype=np.result_type(values, fill))
        out[self.mask] = values
        return out

    def key(self) -> tuple[complex, float, int]:
        return (complex(self.center), float(self.radius), int(self.n))

    def __eq__(self, other) -> bool:
        return isinstance(other, DiskDomain) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"DiskDomain(center={self.center!r}, radius={self.radius!r}, n={self.n})"


def make_disk(center: complex, radius: float, n: int) -> DiskDomain:
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if n < 8 or n % 2:
        raise ValueError(f"n must be even and >= 8, got {n}")
    return DiskDomain(complex(center), float(radius), int(n))


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex values on the masked nodes of a domain."""

    domain: DiskDomain
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.domain.size,):
            raise ValueError(
                f"field has {values.shape} values, domain has {self.domain.size} nodes"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, domain: DiskDomain, fn: Callable) -> "ComplexField":
        return cls(domain, np.broadcast_to(fn(domain.nodes), domain.nodes.shape))

    @classmethod
    def constant(cls, domain: DiskDomain, c: complex) -> "ComplexField":
        return cls(domain, np.full(domain.size, c, dtype=complex))

    def at(self, z: complex) -> complex:
        """Value at the node located at ``z``; off-mask points are an error."""
        d = self.domain
        h = d.spacing
        w = complex(z) - d.center
        i = (w.real + d.radius) / h - 0.5
        j = (w.imag + d.radius) / h - 0.5
        ii, jj = round(i), round(j)
        if abs(i - ii) > 1e-6 or abs(j - jj) > 1e-6:
            raise ValueError(f"{z} is not a grid node")
        if not (0 <= ii < d.n and 0 <= jj < d.n) or not d.mask[ii, jj]:
            raise ValueError(f"{z} lies outside the disk mask")
        grid = np.full((d.n, d.n), -1, dtype=np.int64)
        grid[d.mask] = np.arange(d.size)
        return complex(self.values[grid[ii, jj]])

    def grid(self) -> np.ndarray:
        return self.domain.scatter(self.values)

    def _check(self, other: "ComplexField") -> None:
        if other.domain != self.domain:
            raise ValueError("fields live on different domains")

    def __add__(self, other):
        if isinstance(other, ComplexField):
            self._check(other)
            return ComplexField(self.domain, self.values + other.values)
        return ComplexField(self.domain, self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ComplexField):
            self._check(other)
            return ComplexField(self.domain, self.values - other.values)
        return ComplexField(self.domain, self.values - other)

    def __mul__(self, other):
        if isinstance(other, ComplexField):
            self._check(other)
            return ComplexField(self.domain, self.values * other.values)
        return ComplexField(self.domain, self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return ComplexField(self.domain, -self.values)

    def conj(self) -> "ComplexField":
        return ComplexField(self.domain, self.values.conj())


@dataclass(frozen=True)
class GradientField:
    """The pair ``(d/dz f, d/dzbar f)`` on one domain."""

    dz: ComplexField
    dzbar: ComplexField

    def __post_init__(self):
        if self.dz.domain != self.dzbar.domain:
            raise ValueError("gradient components live on different domains")

    @property
    def domain(self) -> DiskDomain:
        return self.dz.domain

    def directional(self, e: complex) -> ComplexField:
        """Directional derivative ``d_e f = f_z e + f_zbar conj(e)``."""
        e = complex(e)
        return ComplexField(self.domain, self.dz.values * e + self.dzbar.values * e.conjugate())

    def norm_sq(self) -> np.ndarray:
        """Pointwise ``|f_z|**2 + |f_zbar|**2``."""
        return np.abs(self.dz.values) ** 2 + np.abs(self.dzbar.values) ** 2


def _shift(a: np.ndarray, step: int, axis: int) -> np.ndarray:
    """``out[i] = a[i + step]`` along ``axis``, zero/False past the edge."""
    out = np.zeros_like(a)
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if step > 0:
        src[axis], dst[axis] = slice(step, None), slice(None, -step)
    else:
        src[axis], dst[axis] = slice(None, step), slice(-step, None)
    out[tuple(dst)] = a[tuple(src)]
    return out


def _axis_derivative(g: np.ndarray, mask: np.ndarray, h: float, axis: int) -> np.ndarray:
    fwd = _shift(g, 1, axis)
    bwd = _shift(g, -1, axis)
    mf = _shift(mask, 1, axis)
    mb = _shift(mask, -1, axis)
    out = np.where(
        mf & mb,
        (fwd - bwd) / (2 * h),
        np.where(mf, (fwd - g) / h, (g - bwd) / h),
    )
    return out[mask]


def wirtinger(f: ComplexField) -> GradientField:
    """Finite-difference Wirtinger derivatives of ``f``.

    Centred differences are used along each axis where both neighbours are in
    the mask, one-sided first-order differences elsewhere.
    """
    d = f.domain
    g = d.scatter(f.values, fill=0.0)
    with np.errstate(invalid="ignore"):
        fx = _axis_derivative(g, d.mask, d.spacing, 0)
        fy = _axis_derivative(g, d.mask, d.spacing, 1)
    return GradientField(
        ComplexField(d, 0.5 * (fx - 1j * fy)),
        ComplexField(d, 0.5 * (fx + 1j * fy)),
    )


def disk_selection(domain: DiskDomain, sub_radius: float | None = None,
                   center: complex | None = None) -> np.ndarray:
    """Masked nodes in ``D(center, sub_radius)``; defaults to the whole domain.

    The sub-disk must lie inside the domain disk.
    """
    d = domain
    rho = d.radius if sub_radius is None else float(sub_radius)
    if center is None or complex(center) == d.center:
        return d.within(rho)
    c = complex(center) - d.center
    if abs(c) + rho > d.radius * (1 + 1e-12):
        raise ValueError(f"D({center}, {rho}) is not contained in the domain")
    return np.abs(d.offsets - c) < rho


def l2_norm(f: ComplexField, sub_radius: float | None = None, center: complex | None = None) -> float:
    d = f.domain
    v = f.values[disk_selection(d, sub_radius, center)]
    return _scaled_root(np.abs(v), d.cell_area)


def _scaled_root(a: np.ndarray, weight) -> float:
    """``sqrt(sum(weight a^2))`` scaled by ``max a`` so tiny or huge values neither underflow nor overflow."""
    m = float(np.max(a, initial=0.0))
    if m == 0 or not math.isfinite(m):
        return m
    return m * math.sqrt(float(np.sum(weight * (a / m) ** 2)))


def mean(f: ComplexField, sub_radius: float | None = None, center: complex | None = None) -> complex:
    sel = disk_selection(f.domain, sub_radius, center)
    if not sel.any():
        raise ValueError("sub-disk contains no grid nodes")
    return complex(np.mean(f.values[sel]))


def gradient_l2_norm(grad: GradientField, sub_radius: float | None = None,
                     center: complex | None = None) -> float:
    """``(sum |f_z|^2 + |f_zbar|^2) h^2`` to the power one half."""
    d = grad.domain
    sel = disk_selection(d, sub_radius, center)
    a = np.hypot(np.abs(grad.dz.values[sel]), np.abs(grad.dzbar.values[sel]))
    return _scaled_root(a, d.cell_area)


def disk_rect_area(R: float, x0: float, x1: float, y0: float, y1: float) -> float:
    """Area of the disk ``|w| < R`` intersected with ``[x0, x1] x [y0, y1]``."""
    x0, x1 = max(x0, -R), min(x1, R)
    if x1 <= x0:
        return 0.0

    def prim(x):  # antiderivative of sqrt(R^2 - x^2)
        return 0.5 * (x * math.sqrt(max(R * R - x * x, 0.0)) + R * R * math.asin(x / R))

    cuts = {x0, x1}
    for y in (y0, y1):
        if abs(y) < R:
            c = math.sqrt(R * R - y * y)
            cuts.update(t for t in (-c, c) if x0 < t < x1)
    xs = sorted(cuts)
    area = 0.0
    for a, b in zip(xs[:-1], xs[1:]):
        xm = 0.5 * (a + b)
        s = math.sqrt(max(R * R - xm * xm, 0.0))
        top_arc, bot_arc = s < y1, -s > y0
        if min(s, y1) <= max(-s, y0):
            continue
        arc = prim(b) - prim(a)
        area += (arc if top_arc else y1 * (b - a)) + (arc if bot_arc else -y0 * (b - a))
    return area


def subdisk_weights(domain: DiskDomain, rho: float, center: complex | None = None) -> np.ndarray:
    """Area of each node's cell inside ``D(center, rho)``.

    Cells cut by the circle get their exact overlap instead of all or
    nothing, so small disks are integrated without lattice-count noise.
    """
    d = domain
    disk_selection(d, rho, center)  # raises if the sub-disk leaves the domain
    c = d.center if center is None else complex(center)
    h = d.spacing
    off = d.nodes - c
    r = np.abs(off)
    reach = h / math.sqrt(2)
    w = np.where(r + reach <= rho, h * h, 0.0)
    for k in np.nonzero((r + reach > rho) & (r - reach < rho))[0]:
        x, y = off[k].real, off[k].imag
        w[k] = disk_rect_area(rho, x - h / 2, x + h / 2, y - h / 2, y + h / 2)
    return w


def weighted_mean(values: np.ndarray, w: np.ndarray) -> complex:
    return complex(np.sum(w * values) / np.sum(w))


def weighted_l2(values: np.ndarray, w: np.ndarray) -> float:
    return _scaled_root(np.abs(values), w)


def restrict(f: ComplexField, sub: DiskDomain) -> ComplexField:
    """Values of ``f`` on the nodes of a grid-aligned sub-domain."""
    d = f.domain
    shift = (sub.center - d.center + (d.radius - sub.radius) * (1 + 1j)) / d.spacing
    if abs(sub.spacing - d.spacing) > 1e-12 * d.spacing:
        raise ValueError("sub-domain spacing differs")
    si, sj = round(shift.real), round(shift.imag)
    if abs(shift.real - si) > 1e-6 or abs(shift.imag - sj) > 1e-6:
        raise ValueError("sub-domain nodes are not parent grid nodes")
    i, j = sub.index
    i, j = i + si, j + sj
    if i.min(initial=0) < 0 or j.min(initial=0) < 0 or i.max(initial=0) >= d.n or j.max(initial=0) >= d.n:
        raise ValueError("sub-domain leaves the parent grid")
    if not d.mask[i, j].all():
        raise ValueError("sub-domain leaves the parent disk")
    pos = np.full((d.n, d.n), -1, dtype=np.int64)
    pos[d.mask] = np.arange(d.size)
    return ComplexField(sub, f.values[pos[i, j]])


def shrunk_domain(d: DiskDomain, cells: int) -> DiskDomain:
    """Concentric disk ``cells`` grid steps smaller, on the same nodes."""
    if cells < 0 or d.n - 2 * cells < 8:
        raise ValueError(f"cannot shrink a {d.n}-grid by {cells} cells")
    return make_disk(d.center, d.radius - cells * d.spacing, d.n - 2 * cells)


FieldLike = Union[ComplexField, GradientField]


# --- CSV field dumps ---------------------------------------------------------

FIELD_HEADER = ["re_z", "im_z", "re_f", "im_f"]


def write_field_csv(path: str | Path, f: ComplexField) -> Path:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FIELD_HEADER)
        for z, v in zip(f.domain.nodes, f.values):
            w.writerow([repr(float(x)) for x in (z.real, z.imag, v.real, v.imag)])
    tmp.replace(path)
    return path


def read_field_csv(path: str | Path, domain: DiskDomain) -> ComplexField:
    """Read a field dump; the node set must match ``domain`` exactly."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != FIELD_HEADER:
        raise ValueError(f"{path}: expected header {','.join(FIELD_HEADER)}")
    data = np.array(rows[1:], dtype=float).reshape(-1, 4)
    z = data[:, 0] + 1j * data[:, 1]
    if z.shape != domain.nodes.shape:
        raise ValueError(
            f"{path}: {z.size} rows but domain has {domain.size} masked nodes"
        )
    tol = 1e-9 * max(1.0, abs(domain.center) + domain.radius)
    if np.max(np.abs(z - domain.nodes), initial=0.0) > tol:
        raise ValueError(f"{path}: node coordinates disagree with the declared domain")
    return ComplexField(domain, data[:, 2] + 1j * data[:, 3])
