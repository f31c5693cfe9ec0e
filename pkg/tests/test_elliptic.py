import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orlicz_lab import elliptic as E
from orlicz_lab import embeddings as emb
from orlicz_lab import young
from orlicz_lab.errors import (EllipticityError, GeometryError, InputError, MaskError,
                               PreconditionError)
from orlicz_lab.fields import Grid, SampledField

PSI = young.power(4)
GAMMA = emb.associated_space(PSI, 3)


def _zero_data(grid):
    return SampledField(grid, np.zeros((3,) + grid.extents)), SampledField(grid, np.zeros(grid.extents))


def _problem(grid, coeffs, F, g):
    return E.EllipticProblem(grid, coeffs, F, g, PSI, GAMMA)


def test_cutoff_profile():
    s = np.linspace(0, 3, 301)
    eta = E.cutoff(s)
    assert np.all(eta[s <= 1.25] == 1.0) and np.all(eta[s >= 1.75] == 0.0)
    assert np.all(np.diff(eta) <= 0) and eta.min() >= 0 and eta.max() <= 1


def test_solve_laplace_eigenmode():
    g = Grid.cube(9)
    h = g.spacing[0]
    x = g.centers()
    mode = np.sin(np.pi * x[0]) * np.sin(2 * np.pi * x[1]) * np.sin(np.pi * x[2])
    lam = sum(4 / h ** 2 * np.sin(k * np.pi * h / 2) ** 2 for k in (1, 2, 1))
    F, _ = _zero_data(g)
    pb = _problem(g, E.CoefficientSet.build(g, np.eye(3)), F, SampledField(g, mode))
    u = E.solve(pb)
    assert np.max(np.abs(u.values * lam - mode)) < 1e-10


def test_solve_zero_data():
    g = Grid.cube(9)
    F, z = _zero_data(g)
    cat = E.smooth_catalog()
    u = E.solve(_problem(g, cat.sample(g), F, z))
    assert np.all(u.values == 0)


def _manufactured(n):
    # constant coefficients: L u = -A:D2u - B.grad u + C.grad u + V u
    A = np.array([[1.0, 0.2, 0.0], [0.1, 1.5, 0.1], [0.0, 0.1, 0.8]])
    B = np.array([0.3, -0.2, 0.1])
    C = np.array([0.1, 0.4, -0.3])
    V = 0.7
    g = Grid.cube(n)
    x = g.centers()
    s = [np.sin(np.pi * xi) for xi in x]
    c = [np.cos(np.pi * xi) for xi in x]
    u = s[0] * s[1] * s[2]
    grad = [np.pi * c[0] * s[1] * s[2], np.pi * s[0] * c[1] * s[2], np.pi * s[0] * s[1] * c[2]]
    H = np.empty((3, 3) + g.extents)
    for i in range(3):
        for j in range(3):
            if i == j:
                H[i, j] = -np.pi ** 2 * u
            else:
                k = 3 - i - j
                H[i, j] = np.pi ** 2 * c[i] * c[j] * s[k]
    rhs = -np.einsum("ij,ij...->...", A, H) + sum((C[i] - B[i]) * grad[i] for i in range(3)) + V * u
    F, _ = _zero_data(g)
    pb = _problem(g, E.CoefficientSet.build(g, A, B, C, V), F, SampledField(g, rhs))
    return np.max(np.abs(E.solve(pb).values - u))


def test_manufactured_solution_second_order():
    errs = [_manufactured(n) for n in (9, 17, 33)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.8)


def test_solve_input_errors():
    g = Grid.cube(7)
    F, z = _zero_data(g)
    with pytest.raises(InputError):
        E.solve(_problem(g, E.CoefficientSet.build(g, np.eye(3)), F, z))
    g9 = Grid.cube(9)
    with pytest.raises(EllipticityError):
        E.CoefficientSet.build(g9, -np.eye(3))
    F9, z9 = _zero_data(g9)
    with pytest.raises(InputError):
        _problem(g9, E.CoefficientSet.build(g9, np.eye(3)), z9, z9)


def test_smallest_singular_positive():
    g = Grid.cube(9)
    F, gg = E.random_data(g, 0)
    pb = _problem(g, E.smooth_catalog().sample(g), F, gg)
    assert E.smallest_singular_estimate(pb) > 1e-8


def test_apriori_degenerate_and_scaling():
    g = Grid.cube(9)
    F, z = _zero_data(g)
    cs = E.smooth_catalog().sample(g)
    rep = E.verify_apriori(_problem(g, cs, F, z), SampledField(g, np.zeros(g.extents)))
    assert rep.degenerate and np.isnan(rep.ratio)
    F, gg = E.random_data(g, 3)
    pb = _problem(g, cs, F, gg)
    u = E.solve(pb)
    r1 = E.verify_apriori(pb, u).ratio
    pb10 = pb.with_data(F.scaled(10.0), gg.scaled(10.0))
    u10 = E.solve(pb10)
    assert np.allclose(u10.values, 10 * u.values, rtol=1e-8, atol=1e-12)
    assert E.verify_apriori(pb10, u10).ratio == pytest.approx(r1, rel=1e-8)


def _interior_mask(grid, lo, hi):
    x = grid.centers()
    return np.all([(xi > lo) & (xi < hi) for xi in x], axis=0)


def test_interior_zero_and_shrinking_domain():
    g = Grid.cube(17)
    F, z = _zero_data(g)
    cs = E.smooth_catalog().sample(g)
    D = _interior_mask(g, 0.25, 0.75)
    rep, c = E.interior_l2_check(_problem(g, cs, F, z), SampledField(g, np.zeros(g.extents)), D)
    assert c == 0.0 and rep.provenance["lhs"] == 0 and rep.provenance["rhs"] == 0
    F, gg = E.random_data(g, 1)
    pb = _problem(g, cs, F, gg)
    u = E.solve(pb)
    rep1, c1 = E.interior_l2_check(pb, u, D)
    D2 = _interior_mask(g, 0.17, 0.83)
    rep2, c2 = E.interior_l2_check(pb, u, D2, c_ref=2 * c1)
    assert rep2.provenance["delta0"] < rep1.provenance["delta0"]
    assert rep2.provenance["rhs"] > rep1.provenance["rhs"]
    assert rep2.passed


def test_interior_mask_errors():
    g = Grid.cube(17)
    F, z = _zero_data(g)
    pb = _problem(g, E.smooth_catalog().sample(g), F, z)
    u = SampledField(g, np.zeros(g.extents))
    with pytest.raises(MaskError):
        E.interior_l2_check(pb, u, _interior_mask(g, 0.05, 0.95))
    with pytest.raises(MaskError):
        E.interior_l2_check(pb, u, np.ones((3, 3, 3), dtype=bool))


def test_modified_coefficients_limits():
    cat = E.smooth_catalog()
    g = Grid.cube(12)
    cs = cat.sample(g)
    # B_2r(0) inside a cube of side 4: eta = 1 on |x| <= 5r/4, 0 on |x| >= 7r/4
    big = Grid.cube(12, length=4.0, origin=(-2.0,) * 3)
    csb = cat.sample(big)
    x = big.centers()
    dist = np.sqrt(sum(xi ** 2 for xi in x))
    r = 1.0
    mod = E.modified_coefficients(csb, r, (0.0, 0.0, 0.0))
    inner = dist <= 1.25 * r
    far = dist >= 1.75 * r
    assert np.allclose(mod.A[:, :, inner], csb.A[:, :, inner])
    assert np.allclose(mod.A[:, :, far], mod.A0[:, :, None])
    assert np.all(mod.B[:, far] == 0) and np.all(mod.C[:, far] == 0) and np.all(mod.V[far] == 0)
    with pytest.raises(GeometryError):
        E.modified_coefficients(cs, 0.0, (0.5, 0.5, 0.5))
    with pytest.raises(GeometryError):
        E.modified_coefficients(cs, 0.4, (0.5, 0.5, 0.5))


def test_Kr_vanishes_for_constant_coefficients():
    cat = E.constant_catalog()
    op = E.local_operator(cat, 0.2, n=12)
    rng = np.random.default_rng(0)
    u = rng.normal(size=op.disc.N)
    assert np.max(np.abs(op.apply_vec(u))) < 1e-12
    assert np.all(op.apply_vec(np.zeros(op.disc.N)) == 0)


def test_fixed_point_identity_exact():
    cat = E.singular_catalog()
    op = E.local_operator(cat, 0.1, n=12)
    F, g = E.random_data(op.grid, 2)
    u = op.direct_vec(F, g)
    res = u - op.apply_vec(u) - op.z_vec(F, g)
    assert np.max(np.abs(res)) < 1e-9 * np.max(np.abs(u))


def test_contraction_constant_catalog_zero():
    rep = E.contraction_delta(E.constant_catalog(), PSI, GAMMA, (0.4, 0.2, 0.1), n=12)
    assert np.allclose(rep.delta, 0.0)


def test_contraction_precondition_and_order():
    with pytest.raises(PreconditionError):
        E.contraction_delta(E.singular_catalog(), young.power(3), GAMMA, (0.4, 0.2), n=12)
    with pytest.raises(InputError):
        E.contraction_delta(E.singular_catalog(), PSI, GAMMA, (0.1, 0.2), n=12)


def test_contraction_singular_decreasing():
    rep = E.contraction_delta(E.singular_catalog(), PSI, GAMMA, (0.4, 0.1, 0.025), n=16)
    assert np.all(np.diff(rep.delta) < 0)
    # the B term scales like r^(1/4) times a restricted norm of |x|^(-1/2)
    B = np.array([t[1] for t in rep.terms])
    assert np.all(np.diff(B) < 0)


def test_neumann_constant_catalog_one_step():
    _, rep = E.neumann_solve(E.constant_catalog(), PSI, GAMMA, 0.2, n=12)
    assert rep.provenance["iterations"] <= 2
    assert rep.provenance["mismatch"] < 1e-10


def test_neumann_singular_converges():
    _, rep = E.neumann_solve(E.singular_catalog(), PSI, GAMMA, 0.0125, n=16)
    assert rep.passed
    assert rep.provenance["rate"] <= 0.6 and rep.provenance["mismatch"] <= 1e-6


def test_local_control_trivial():
    g = Grid.cube(16)
    cs = E.constant_catalog().sample(g)
    holds, _, _ = E.local_control_check(cs, 1.0, 1.0)
    assert holds


@settings(max_examples=6)
@given(seed=st.integers(0, 10_000), c=st.floats(0.1, 100.0))
def test_solution_linear_in_data(seed, c):
    g = Grid.cube(9)
    F, gg = E.random_data(g, seed)
    pb = _problem(g, E.smooth_catalog().sample(g), F, gg)
    u = E.solve(pb).values
    uc = E.solve(pb.with_data(F.scaled(c), gg.scaled(c))).values
    assert np.allclose(uc, c * u, rtol=1e-7, atol=1e-12 * c)


@settings(max_examples=10)
@given(s=st.floats(0.0, 5.0), t=st.floats(0.0, 5.0))
def test_cutoff_monotone_property(s, t):
    a, b = sorted((s, t))
    assert E.cutoff(a) >= E.cutoff(b)
