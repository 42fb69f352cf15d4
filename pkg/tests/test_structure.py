import numpy as np
import pytest

from beltrami.grid import ComplexField, make_disk, wirtinger
from beltrami.structure import (NotDifferentiable, StructureFunction, freeze, holder_linear, k_from_K,
                                linear_structure, linearize, power_example, structure_from_config,
                                verify_condition, zero_structure)


def _pairs(rng, m, r=10.0):
    def pts():
        return r * np.sqrt(rng.random(m)) * np.exp(2j * np.pi * rng.random(m))
    return pts(), pts()


def test_linear_metadata():
    H = linear_structure(0, 0)
    assert H.k == 0 and H.K == 1 and np.all(H.eval(0.3, [1, 1j]) == 0)
    H = linear_structure(0.5)
    assert H.k == 0.5 and H.K == pytest.approx(3)
    assert H.eval(0, 2 + 1j) == pytest.approx(1 + 0.5j)
    assert H.holder_const == 0 and H.kind == "linear"


def test_linear_lipschitz_sampled(rng):
    H = linear_structure(0.25, 0.25j)
    assert H.k == pytest.approx(0.5)
    x1, x2 = _pairs(rng, 10_000)
    q = np.abs(H.eval(0, x1) - H.eval(0, x2)) / np.abs(x1 - x2)
    assert q.max() <= 0.5 + 1e-9


def test_linear_rejects_non_elliptic():
    with pytest.raises(ValueError):
        linear_structure(0.6, 0.4)
    with pytest.raises(ValueError):
        StructureFunction(lambda z, xi: xi, k=1.0)


@pytest.mark.parametrize("k", [0.0, 0.3, 0.9])
def test_K_from_k(k):
    H = linear_structure(k)
    assert H.K == pytest.approx((1 + k) / (1 - k), abs=1e-12)
    assert k_from_K(H.K) == pytest.approx(k, abs=1e-12)


def test_power_example_values():
    pe = power_example(2)
    k = 1 / 3
    assert pe.H.k == pytest.approx(k) and pe.a == pytest.approx(0.6)
    assert pe.H.eval(0, 1) == pytest.approx(-1 / 9)
    xi = np.array([1, 1j, 2 - 1j, -3 + 0.5j])
    assert np.allclose(np.abs(pe.H.eval(0, xi)), np.abs(xi) / 9)
    assert pe.H.eval(0, 0) == 0


def test_power_example_near_conformal_limit():
    pe = power_example(1 + 1e-9)
    z = np.array([0.3 + 0.4j, -0.5j])
    assert pe.H.k < 1e-9
    assert np.allclose(pe.f0(z), z * z, atol=1e-8)


def test_power_example_rejects_K_at_most_one():
    with pytest.raises(ValueError):
        power_example(1.0)


@pytest.mark.parametrize("K", [2.0, 3.0])
def test_f0_closed_form_derivatives_solve_equation(K):
    pe = power_example(K)
    z = np.array([0.3 + 0.1j, -0.7j, 0.5 - 0.5j])
    dz, dzb = pe.df0(z)
    assert np.allclose(dzb, pe.H.eval(0, dz), atol=1e-14)
    a = pe.a
    r = np.abs(z)
    assert np.allclose(np.abs(dz), (a + 3) / 2 * r**a)
    assert np.allclose(np.abs(dzb), (1 - a) / 2 * r**a)


def test_f0_discrete_beltrami_ratio():
    # |f0_zbar| / |f0_z| = (1 - a)/(a + 3) = k/3 for the extremal pair
    pe = power_example(2)
    d = make_disk(0, 1, 256)
    g = wirtinger(ComplexField(d, pe.f0(d.nodes)))
    r = np.abs(d.nodes)
    sel = (r > 0.2) & (r < 0.9)
    ratio = np.abs(g.dzbar.values[sel]) / np.abs(g.dz.values[sel])
    k = pe.H.k
    assert np.all(np.abs(ratio - k / 3) < 0.02)


def test_f0_discrete_residual():
    pe = power_example(2)
    d = make_disk(0, 1, 256)
    g = wirtinger(ComplexField(d, pe.f0(d.nodes)))
    r = np.abs(d.nodes)
    sel = (r > 0.1) & d.interior(4)
    res = np.abs(g.dzbar.values - pe.H.eval(0, g.dz.values))[sel]
    assert res.max() < 20 * d.spacing**pe.a


def test_freeze():
    H = linear_structure(0.3 - 0.2j)
    F = freeze(H, 0.7j)
    xi = np.array([1, 2j, -1 + 1j])
    assert np.array_equal(F.eval(5.0, xi), H.eval(0, xi))
    assert F.kind == "frozen" and F.holder_const == 0
    G = holder_linear(0.5, 0.5)
    assert np.all(freeze(G, 0).eval(0.4, xi) == 0)
    assert np.allclose(freeze(G, 1).eval(0.4, xi), xi / 4)


def test_frozen_sampled_k(rng):
    F = freeze(holder_linear(0.5, 0.5), 1)
    x1, x2 = _pairs(rng, 2000)
    q = np.abs(F.eval(0, x1) - F.eval(0, x2)) / np.abs(x1 - x2)
    assert q.max() == pytest.approx(0.25)


def test_holder_linear_metadata(rng):
    H = holder_linear(0.4, 0.5)
    assert H.k == 0.4 and H.alpha == 0.5 and H.holder_const == pytest.approx(0.2)
    rep = verify_condition(H, make_disk(0, 1, 16), 2000, rng)
    assert rep.ok and rep.max_at_zero == 0


def test_verify_condition_examples(rng):
    d = make_disk(0, 1, 16)
    rep = verify_condition(linear_structure(0.5), d, 1000, rng)
    assert 0.49 <= rep.max_lipschitz <= 0.5 + 1e-12 and rep.ok
    rep = verify_condition(zero_structure(), d, 1000, rng)
    assert rep.max_lipschitz == 0 and rep.max_holder == 0 and rep.ok
    rep = verify_condition(power_example(2).H, d, 1000, rng)
    assert rep.max_lipschitz <= 1 / 3 + 1e-6 and rep.ok


def test_verify_condition_detects_bad_metadata(rng):
    bad = StructureFunction(lambda z, xi: 0.5 * xi, k=0.2)
    assert not verify_condition(bad, make_disk(0, 1, 16), 500, rng).ok
    shifted = StructureFunction(lambda z, xi: 0.1 + 0.1 * xi, k=0.1)
    assert not verify_condition(shifted, make_disk(0, 1, 16), 500, rng).ok


def test_linearize_linear():
    mu0, nu0 = 0.3, 0.2j
    L = linearize(linear_structure(mu0, nu0), 1 + 1j)
    assert L.h_xi == pytest.approx(mu0, abs=1e-9) and L.h_xibar == pytest.approx(nu0, abs=1e-9)
    assert L.mu == pytest.approx(mu0 / (1 - abs(nu0) ** 2), abs=1e-9)
    assert L.nu == pytest.approx(np.conj(mu0) * nu0 / (1 - abs(nu0) ** 2), abs=1e-9)


def test_linearize_zero_and_real_part():
    L = linearize(zero_structure(), 2.0)
    assert L.mu == 0 and L.nu == 0
    k = 0.6
    H = StructureFunction(lambda z, xi: (k / 2) * (xi + np.conj(xi)), k=k)
    L = linearize(H, 0.7 - 0.2j)
    den = 1 - k * k / 4
    assert L.mu == pytest.approx((k / 2) / den, abs=1e-8)
    assert L.nu == pytest.approx((k * k / 4) / den, abs=1e-8)
    assert abs(L.mu) + abs(L.nu) <= k


def test_linearize_power_example_bound():
    H = power_example(2).H
    for xi in (1, 1j, 0.3 - 2j):
        L = linearize(H, xi)
        assert abs(L.mu) + abs(L.nu) <= H.k + 1e-4


def test_linearize_rejects_kink():
    # a kink along a line looks linear to central differences; a cone does not
    H = StructureFunction(lambda z, xi: 0.5 * np.maximum(np.maximum(xi.real, xi.imag), 0) + 0j, k=0.5)
    with pytest.raises(NotDifferentiable):
        linearize(H, 0)


def test_structure_from_config():
    assert structure_from_config({"kind": "linear", "mu": 0.5}).k == 0.5
    assert structure_from_config({"kind": "power", "K": 2}).k == pytest.approx(1 / 3)
    H = structure_from_config({"kind": "frozen", "z0": 1,
                               "base": {"kind": "holder_linear", "mu_amplitude": 0.5, "alpha": 0.5}})
    assert H.eval(0, 4) == pytest.approx(1)
    with pytest.raises(ValueError):
        structure_from_config({"kind": "nope"})
