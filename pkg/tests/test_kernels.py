import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orlicz_lab import kernels as K
from orlicz_lab import young
from orlicz_lab.errors import AlignmentError, InputError, SingularityError
from orlicz_lab.fields import Grid, SampledField


def test_kernel_grad_value_symmetry_homogeneity():
    spec = K.KernelSpec(3, "first-derivative", (1,))
    z = np.array([1.0, 0.0, 0.0])
    assert K.kernel_grad(spec, z) == pytest.approx(-1 / (4 * np.pi), rel=1e-15)
    rng = np.random.default_rng(0)
    w = rng.normal(size=(50, 3))
    assert np.allclose(K.kernel_grad(spec, -w), -K.kernel_grad(spec, w), rtol=1e-15)
    assert np.allclose(K.kernel_grad(spec, 2 * w), 2.0 ** (1 - 3) * K.kernel_grad(spec, w),
                       rtol=1e-13)


@pytest.mark.parametrize("d", [3, 4])
def test_hessian_homogeneity_and_trace(d):
    rng = np.random.default_rng(d)
    z = rng.normal(size=(100, d))
    for i in range(1, d + 1):
        for j in range(1, d + 1):
            spec = K.KernelSpec(d, "second-derivative", (i, j))
            k1 = K.kernel_hess(spec, z)
            for lam in (2.0, 10.0):
                k2 = K.kernel_hess(spec, lam * z)
                assert np.allclose(k2 * lam ** d, k1, rtol=1e-12, atol=0)
    tr = sum(K.kernel_hess(K.KernelSpec(d, "second-derivative", (i, i)), z)
             for i in range(1, d + 1))
    scale = np.sum(z * z, axis=1) ** (-d / 2)
    assert np.max(np.abs(tr) / scale) < 1e-12


def test_smoothness_constant_finite_and_stable():
    spec = K.KernelSpec(3, "second-derivative", (1, 2))
    c1 = K.smoothness_constant(spec, 10000, 0)
    c2 = K.smoothness_constant(spec, 20000, 1)
    assert np.isfinite(c1) and 0 < c1
    assert abs(c2 / c1 - 1) < 0.1


def test_kernel_errors():
    with pytest.raises(InputError):
        K.KernelSpec(2)
    with pytest.raises(InputError):
        K.KernelSpec(3, "second-derivative", (1, 4))
    with pytest.raises(SingularityError):
        K.kernel_hess(K.KernelSpec(3), np.zeros(3))


def test_potential_zero():
    g = Grid.cube(9)
    w = K.potential(SampledField(g, np.zeros(g.extents)))
    assert np.all(w.values == 0)


def test_potential_discrete_eigenmode():
    n = 9
    g = Grid.cube(n)
    h = g.spacing[0]
    x = g.centers()
    k = (1, 2, 1)
    mode = np.prod([np.sin(kk * np.pi * xi) for kk, xi in zip(k, x)], axis=0)
    lam = sum(4 / h ** 2 * np.sin(kk * np.pi * h / 2) ** 2 for kk in k)
    w = K.potential(SampledField(g, mode))
    assert np.max(np.abs(w.values * lam - mode)) < 1e-10


def test_potential_linearity():
    rng = np.random.default_rng(2)
    g = Grid.ball(12)
    h1, h2 = (SampledField(g, rng.normal(size=g.extents) * g.mask) for _ in range(2))
    solver = K.PotentialSolver(g)
    lhs = solver.potential(SampledField(g, 2 * h1.values - 3 * h2.values)).values
    rhs = 2 * solver.potential(h1).values - 3 * solver.potential(h2).values
    assert np.max(np.abs(lhs - rhs)) < 1e-9 * np.max(np.abs(rhs))


def test_quasi_potential_zero():
    g = Grid.cube(9)
    w = K.quasi_potential(SampledField(g, np.zeros((3,) + g.extents)))
    assert np.all(w.values == 0)


def test_quasi_potential_of_gradient():
    errs = []
    for n in (9, 17, 33):
        g = Grid.cube(n)
        x = g.centers()
        phi = np.prod([np.sin(np.pi * xi) for xi in x], axis=0)
        grad = np.stack([np.pi * np.cos(np.pi * x[i]) *
                         np.prod([np.sin(np.pi * x[j]) for j in range(3) if j != i], axis=0)
                         for i in range(3)])
        w = K.quasi_potential(SampledField(g, grad))
        errs.append(np.max(np.abs(w.values + phi)))
    # first order: the boundary faces average the datum with its zero extension
    assert errs[0] > errs[1] > errs[2]
    assert np.log2(errs[1] / errs[2]) > 0.8


def test_q_bound_r_independent():
    for p in (2, 4):
        cs = [K.q_bound_constant(young.power(p), r, n=16, samples=4) for r in (0.4, 0.2, 0.1)]
        assert max(cs) / min(cs) <= 2


def test_riesz_potential_ball_center():
    n = 41
    g = Grid.cube(n, length=2.4, origin=(-1.2,) * 3)
    x = g.centers()
    f = SampledField(g, (sum(xi ** 2 for xi in x) < 1).astype(float))
    v = K.riesz_potential(f, 2.0)
    c = n // 2
    assert v.values[c, c, c] == pytest.approx(2 * np.pi, rel=2e-2)


def test_riesz_potential_positivity_and_translation():
    rng = np.random.default_rng(5)
    g = Grid.cube(14)
    vals = np.zeros(g.extents)
    vals[3:9, 4:9, 2:8] = rng.uniform(size=(6, 5, 6))
    shifted = np.roll(vals, 1, axis=0)
    a = K.riesz_potential(SampledField(g, vals), 1.0).values
    b = K.riesz_potential(SampledField(g, shifted), 1.0).values
    assert a.min() > -1e-12 * a.max()
    assert np.max(np.abs(b[1:] - a[:-1])) < 1e-12 * a.max()


def test_riesz_potential_errors():
    g = Grid.cube(6)
    f = SampledField(g, np.ones(g.extents))
    with pytest.raises(InputError):
        K.riesz_potential(f, 3.0)


def test_reflect_extend_odd_even():
    hg = K.half_ball_grid(8, 0.8)
    c = SampledField(hg, np.full(hg.extents, 2.0))
    odd = K.reflect_extend(c, "odd")
    k = hg.extents[-1]
    assert np.all(odd.values[..., :k] == -2.0) and np.all(odd.values[..., k:] == 2.0)
    rng = np.random.default_rng(1)
    f = SampledField(hg, rng.normal(size=hg.extents))
    ev = K.reflect_extend(f, "even").values
    assert np.array_equal(ev, ev[..., ::-1])
    v = SampledField(hg, rng.normal(size=(3,) + hg.extents))
    ve = K.reflect_extend(v, "even").values
    assert np.array_equal(ve[0], ve[0][..., ::-1])
    assert np.array_equal(ve[2], -ve[2][..., ::-1])


def test_reflect_extend_alignment():
    g = Grid.cube(6, origin=(0.0, 0.0, 0.05))
    with pytest.raises(AlignmentError):
        K.reflect_extend(SampledField(g, np.ones(g.extents)), "odd")
    with pytest.raises(InputError):
        K.half_ball_grid(7)


def test_reflection_first_order():
    rel = []
    for n in (8, 16, 32):
        hg = K.half_ball_grid(n, 0.8)
        x = hg.centers()
        hv = np.cos(3 * x[0]) * np.exp(x[1]) * (1 + x[2])
        w = K.potential(K.reflect_extend(SampledField(hg, hv), "odd"))
        k = hg.extents[-1]
        assert np.max(np.abs(w.values[..., k] + w.values[..., k - 1])) < 1e-12
        rel.append(np.abs(w.values[..., k]).max() / np.abs(w.values).max())
    orders = np.log2(np.array(rel[:-1]) / np.array(rel[1:]))
    assert np.all(orders > 0.8)


@settings(max_examples=20)
@given(i=st.integers(1, 3), j=st.integers(1, 3), seed=st.integers(0, 1000),
       lam=st.floats(1e-3, 1e3))
def test_hessian_homogeneity_property(i, j, seed, lam):
    z = np.random.default_rng(seed).normal(size=(10, 3))
    spec = K.KernelSpec(3, "second-derivative", (i, j))
    assert np.allclose(K.kernel_hess(spec, lam * z) * lam ** 3, K.kernel_hess(spec, z),
                       rtol=1e-12, atol=0)


@settings(max_examples=10)
@given(seed=st.integers(0, 1000))
def test_hessian_symmetric_property(seed):
    z = np.random.default_rng(seed).normal(size=(10, 3))
    a = K.kernel_hess(K.KernelSpec(3, "second-derivative", (1, 2)), z)
    b = K.kernel_hess(K.KernelSpec(3, "second-derivative", (2, 1)), z)
    assert np.allclose(a, b, rtol=1e-15, atol=0)
