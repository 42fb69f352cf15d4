import numpy as np
import pytest

from beltrami.acceptance import band_limited_field
from beltrami.grid import ComplexField, l2_norm, make_disk
from beltrami.transforms import (TransformWorkspace, beurling, cauchy, cut_cell_weights,
                                 direct_transforms, verify_cauchy_identities, workspace_for)

ROUNDING = 1e-10


def test_cut_cell_weights_cover_disk():
    d = make_disk(0.2 + 0.1j, 0.8, 64)
    w = cut_cell_weights(d)
    assert w.sum() == pytest.approx(np.pi * 0.64, rel=1e-12)
    assert np.all(w > 0)
    assert np.allclose(w[d.interior(2)], d.cell_area)


def test_cauchy_of_one(d128):
    ws = workspace_for(d128)
    z = d128.nodes
    c = cauchy(ws, ComplexField.constant(d128, 1))
    err = np.max(np.abs(c.values - (np.conj(z) - z))[d128.interior(4)])
    assert err < 5 * d128.spacing
    assert err < ROUNDING  # affine densities are integrated exactly


def test_constant_density_off_centre():
    d = make_disk(0.5 - 0.25j, 0.75, 64)
    ws = workspace_for(d)
    c0 = 2 - 1j
    a = d.nodes - d.center
    psi = ComplexField.constant(d, c0)
    c, s = ws.apply(psi)
    sel = d.interior(4)
    assert np.max(np.abs(c - (c0 * np.conj(a) - np.conj(c0) * a))[sel]) < 5 * d.spacing
    assert np.max(np.abs(s + np.conj(c0))[sel]) < 10 * d.spacing
    assert np.max(np.abs(c.real)) < 1e-9


def test_zero_density_gives_zero(d64):
    ws = workspace_for(d64)
    zero = ComplexField.constant(d64, 0)
    assert np.all(cauchy(ws, zero).values == 0)
    assert np.all(beurling(ws, zero).values == 0)
    rep = verify_cauchy_identities(ws, zero)
    assert rep.dbar_residual == rep.boundary_residual == rep.beurling_residual == 0


def test_beurling_of_constant(d128):
    s = beurling(workspace_for(d128), ComplexField.constant(d128, 0.3 + 2j))
    assert np.max(np.abs(s.values + (0.3 - 2j))[d128.interior(4)]) < 10 * d128.spacing


def test_isometry_random_fields(d128):
    ws = workspace_for(d128)
    rng = np.random.default_rng(7)
    for _ in range(5):
        psi = band_limited_field(d128, rng)
        assert 0.95 <= l2_norm(beurling(ws, psi)) / l2_norm(psi) <= 1.05


def test_isometry_improves_under_refinement():
    errs = []
    for n in (64, 128):
        d = make_disk(0, 1, n)
        psi = band_limited_field(d, np.random.default_rng(3))
        errs.append(abs(l2_norm(beurling(workspace_for(d), psi)) / l2_norm(psi) - 1))
    assert errs[1] < errs[0]


def test_identities_for_one():
    reps = [verify_cauchy_identities(workspace_for(make_disk(0, 1, n)),
                                     ComplexField.constant(make_disk(0, 1, n), 1)) for n in (64, 128)]
    for r in reps:
        assert max(r.dbar_residual, r.boundary_residual, r.beurling_residual) < 0.1


def test_identities_for_zeta_refine():
    # C(zeta) = |z|^2 - 1 exactly, so only the boundary collar carries error
    reps = []
    for n in (128, 256):
        d = make_disk(0, 1, n)
        reps.append(verify_cauchy_identities(workspace_for(d), ComplexField(d, d.nodes)))
    a, b = reps
    assert b.boundary_residual <= 0.7 * a.boundary_residual
    for x, y in ((a.dbar_residual, b.dbar_residual), (a.beurling_residual, b.beurling_residual)):
        assert y <= 0.7 * x or max(x, y) < ROUNDING


def test_fast_matches_direct():
    d = make_disk(0.1j, 0.9, 32)
    psi = band_limited_field(d, np.random.default_rng(11))
    c, s = workspace_for(d).apply(psi)
    cd, sd = direct_transforms(psi)
    assert np.max(np.abs(c - cd)) < 1e-11 * max(1, np.max(np.abs(cd)))
    assert np.max(np.abs(s - sd)) < 1e-11 * max(1, np.max(np.abs(sd)))


def test_split_does_not_change_result():
    d = make_disk(0, 1, 32)
    psi = band_limited_field(d, np.random.default_rng(5))
    a = TransformWorkspace(d, split=0.95).apply(psi)
    b = TransformWorkspace(d, split=0.6).apply(psi)
    for x, y in zip(a, b):
        assert np.max(np.abs(x - y)) < 1e-11 * np.max(np.abs(x))


def test_real_linearity(d64):
    ws = workspace_for(d64)
    rng = np.random.default_rng(2)
    p1, p2 = band_limited_field(d64, rng), band_limited_field(d64, rng)
    a, b = 1.7, -0.3
    c, s = ws.apply(a * p1 + b * p2)
    c1, s1 = ws.apply(p1)
    c2, s2 = ws.apply(p2)
    assert np.allclose(c, a * c1 + b * c2, atol=1e-12)
    assert np.allclose(s, a * s1 + b * s2, atol=1e-12)
    # the reflected kernel is conjugate-linear, so C is not complex-linear
    ci, _ = ws.apply(1j * p1)
    assert not np.allclose(ci, 1j * c1)


def test_domain_mismatch(d64):
    with pytest.raises(ValueError):
        cauchy(workspace_for(d64), ComplexField.constant(make_disk(0, 1, 32), 1))
