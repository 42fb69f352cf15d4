import math

import numpy as np
import pytest

from beltrami.grid import (ComplexField, GradientField, disk_rect_area, disk_selection, l2_norm,
                           make_disk, mean, read_field_csv, restrict, shrunk_domain, subdisk_weights,
                           wirtinger, write_field_csv)


def test_make_disk_area():
    d = make_disk(0, 1, 64)
    assert math.pi * 0.97 <= d.mask.sum() * d.cell_area <= math.pi * 1.03


@pytest.mark.parametrize("n", [64, 128, 256])
def test_mask_area_convergence(n):
    d = make_disk(0.3 - 0.1j, 0.7, n)
    area = d.mask.sum() * d.cell_area
    assert abs(area - math.pi * 0.49) / (math.pi * 0.49) < 2 / n


def test_center_nodes_masked():
    d = make_disk(0, 1, 8)
    h = d.spacing
    for off in (1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j):
        ComplexField.constant(d, 0).at(off * h / 2)  # raises if unmasked


def test_mask_strictly_inside():
    d = make_disk(1 + 1j, 0.5, 64)
    assert np.all(np.abs(d.nodes - (1 + 1j)) < 0.5)
    assert d.spacing * d.n == pytest.approx(2 * d.radius, rel=1e-15)


@pytest.mark.parametrize("bad", [(0, 1.0, 7), (0, 1.0, 6), (0, 0.0, 16), (0, -1.0, 16)])
def test_make_disk_rejects(bad):
    with pytest.raises(ValueError):
        make_disk(*bad)


def test_field_shape_and_at():
    d = make_disk(0, 1, 16)
    with pytest.raises(ValueError):
        ComplexField(d, np.zeros(3))
    f = ComplexField.from_function(d, lambda z: z)
    z = d.nodes[5]
    assert f.at(z) == z
    with pytest.raises(ValueError):
        f.at(0.99 + 0.99j)  # off the mask
    with pytest.raises(ValueError):
        f.at(0.01)  # not a node


def test_fields_on_different_domains_do_not_mix():
    a = ComplexField.constant(make_disk(0, 1, 16), 1)
    b = ComplexField.constant(make_disk(0, 1, 32), 1)
    with pytest.raises(ValueError):
        a + b


def test_wirtinger_affine_exact():
    d = make_disk(0.2j, 1.3, 64)
    z = d.nodes
    a, b, c = 1.5 - 0.5j, 0.25j, 3 - 1j
    g = wirtinger(ComplexField(d, a * z + b * np.conj(z) + c))
    eps = 100 * np.finfo(float).eps * 10
    assert np.max(np.abs(g.dz.values - a)) < eps
    assert np.max(np.abs(g.dzbar.values - b)) < eps


def test_wirtinger_identity_and_conjugate(d64):
    z = d64.nodes
    g = wirtinger(ComplexField(d64, z))
    assert np.allclose(g.dz.values, 1, atol=1e-12) and np.allclose(g.dzbar.values, 0, atol=1e-12)
    g = wirtinger(ComplexField(d64, np.conj(z)))
    assert np.allclose(g.dz.values, 0, atol=1e-12) and np.allclose(g.dzbar.values, 1, atol=1e-12)


def test_wirtinger_z_squared(d128):
    z = d128.nodes
    g = wirtinger(ComplexField(d128, z * z))
    err = np.max(np.abs(g.dz.values - 2 * z)[d128.interior(4)])
    assert err < 10 * d128.spacing**2


def test_wirtinger_second_order():
    errs = []
    for n in (64, 128, 256):
        d = make_disk(0, 1, n)
        z = d.nodes
        x = z.real
        g = wirtinger(ComplexField(d, z * z * np.conj(z) + x**3))
        sel = d.interior(4)
        errs.append(max(np.max(np.abs(g.dz.values - (2 * z * np.conj(z) + 1.5 * x**2))[sel]),
                        np.max(np.abs(g.dzbar.values - (z * z + 1.5 * x**2))[sel])))
    for a, b in zip(errs[:-1], errs[1:]):
        assert 3.5 <= a / b <= 4.5


def test_l2_norm_examples(d128):
    z = d128.nodes
    assert l2_norm(ComplexField.constant(d128, 1)) == pytest.approx(math.sqrt(math.pi), rel=0.02)
    assert l2_norm(ComplexField.constant(d128, 0)) == 0
    assert l2_norm(ComplexField(d128, z)) == pytest.approx(math.sqrt(math.pi / 2), rel=0.02)


def test_mean_examples(d128):
    z = d128.nodes
    assert mean(ComplexField.constant(d128, 2 - 1j)) == pytest.approx(2 - 1j)
    assert abs(mean(ComplexField(d128, z), 0.5)) < 0.02 * 0.5
    assert mean(ComplexField(d128, np.conj(z) ** 2 + 3)) == pytest.approx(3, rel=0.02)


def test_sub_disk_must_fit(d64):
    with pytest.raises(ValueError):
        disk_selection(d64, 0.5, 0.7)
    with pytest.raises(ValueError):
        l2_norm(ComplexField.constant(d64, 1), 1.5)


def test_disk_rect_area():
    assert disk_rect_area(1.0, -2, 2, -2, 2) == pytest.approx(math.pi)
    assert disk_rect_area(1.0, 0, 2, 0, 2) == pytest.approx(math.pi / 4)
    assert disk_rect_area(1.0, 1, 2, 1, 2) == 0
    assert disk_rect_area(2.0, -0.1, 0.1, -0.1, 0.1) == pytest.approx(0.04)


def test_subdisk_weights_sum_to_area(d64):
    for rho, c in ((0.3, 0), (0.2, 0.1 + 0.3j)):
        w = subdisk_weights(d64, rho, c)
        assert w.sum() == pytest.approx(math.pi * rho**2, rel=1e-12)
        assert np.all(w >= 0) and np.all(w <= d64.cell_area * (1 + 1e-12))


def test_restrict_and_shrink():
    d = make_disk(0, 1, 64)
    f = ComplexField(d, d.nodes)
    sub = shrunk_domain(d, 4)
    assert sub.n == 56 and sub.radius == pytest.approx(1 - 4 * d.spacing)
    assert np.allclose(restrict(f, sub).values, sub.nodes)
    moved = make_disk(sub.center + 2 * d.spacing, sub.radius, sub.n)
    assert np.allclose(restrict(f, moved).values, moved.nodes)
    with pytest.raises(ValueError):
        restrict(f, make_disk(0.5, sub.radius, sub.n))


def test_gradient_components_share_domain():
    a = ComplexField.constant(make_disk(0, 1, 16), 1)
    b = ComplexField.constant(make_disk(0, 1, 32), 1)
    with pytest.raises(ValueError):
        GradientField(a, b)


def test_field_csv_roundtrip(tmp_path):
    d = make_disk(0.5, 0.25, 16)
    f = ComplexField(d, d.nodes ** 2 + 1j)
    p = write_field_csv(tmp_path / "f.csv", f)
    assert p.read_text().splitlines()[0] == "re_z,im_z,re_f,im_f"
    assert not list(tmp_path.glob("*.tmp"))
    g = read_field_csv(p, d)
    assert np.array_equal(g.values, f.values)
    with pytest.raises(ValueError):
        read_field_csv(p, make_disk(0.5, 0.25, 32))
    with pytest.raises(ValueError):
        read_field_csv(p, make_disk(0.6, 0.25, 16))
