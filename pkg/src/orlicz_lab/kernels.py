"""Newtonian kernel derivatives, the potentials P and Q, Riesz potentials and reflection.

The potentials are discrete zero-Dirichlet solves of their defining
equations on the grid of the ball (or any masked grid); the closed kernel
formulas are kept for the Calderon-Zygmund property checks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal
from scipy.special import gamma as gamma_fn

from .discrete import Discretization, check_ellipticity
from .errors import AlignmentError, InputError, SingularityError
from .fields import Grid, SampledField

__all__ = [
    "KernelSpec", "omega", "kernel_grad", "kernel_hess", "smoothness_constant",
    "PotentialSolver", "potential", "quasi_potential", "riesz_potential",
    "reflect_extend", "half_ball_grid", "second_differences", "q_bound_constant",
]


def omega(d):
    """Surface measure of the unit sphere in ``R^d`` (``omega(3) = 4 pi``)."""
    return 2.0 * np.pi ** (d / 2.0) / gamma_fn(d / 2.0)


@dataclass(frozen=True)
class KernelSpec:
    dim: int
    order: str = "second-derivative"
    indices: tuple = (1, 1)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 3:
            raise InputError("kernel dimension must be an integer >= 3")
        k = 1 if self.order == "first-derivative" else 2
        if self.order not in ("first-derivative", "second-derivative"):
            raise InputError(f"unknown kernel order {self.order!r}")
        if len(self.indices) != k or not all(1 <= i <= self.dim for i in self.indices):
            raise InputError(f"indices {self.indices} invalid for order {self.order}")

    @property
    def normalization(self):
        return omega(self.dim)


def _points(z, d):
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != d:
        raise InputError(f"points must have last axis of length {d}")
    r2 = np.sum(z * z, axis=-1)
    if np.any(r2 == 0):
        raise SingularityError("kernel evaluated at the origin")
    return z, r2


def kernel_grad(spec, z):
    """``-z_i |z|^{-d} / omega_d`` (vectorised over the leading axes of ``z``)."""
    d = spec.dim
    (i,) = spec.indices if spec.order == "first-derivative" else (spec.indices[0],)
    z, r2 = _points(z, d)
    return -z[..., i - 1] * r2 ** (-d / 2.0) / omega(d)


def kernel_hess(spec, z):
    """``-(delta_ij |z|^{-d} - d z_i z_j |z|^{-d-2}) / omega_d``."""
    d = spec.dim
    i, j = spec.indices
    z, r2 = _points(z, d)
    delta = 1.0 if i == j else 0.0
    return -(delta * r2 ** (-d / 2.0)
             - d * z[..., i - 1] * z[..., j - 1] * r2 ** (-d / 2.0 - 1.0)) / omega(d)


def smoothness_constant(spec, n_pairs=10000, seed=0):
    """Largest ``|K(z+h) - K(z)| |z|^{d+1} / |h|`` over random pairs with ``2|h| <= |z|``."""
    rng = np.random.default_rng(seed)
    d = spec.dim
    z = rng.normal(size=(n_pairs, d))
    z *= (10.0 ** rng.uniform(-2, 2, size=n_pairs) / np.linalg.norm(z, axis=1))[:, None]
    h = rng.normal(size=(n_pairs, d))
    frac = rng.uniform(1e-3, 0.5, size=n_pairs)
    h *= (frac * np.linalg.norm(z, axis=1) / np.linalg.norm(h, axis=1))[:, None]
    K = kernel_hess if spec.order == "second-derivative" else kernel_grad
    rz = np.linalg.norm(z, axis=1)
    rh = np.linalg.norm(h, axis=1)
    deg = d + 1 if spec.order == "second-derivative" else d
    ratio = np.abs(K(spec, z + h) - K(spec, z)) * rz ** deg / rh
    return float(ratio.max())


# ---------------------------------------------------------------- potentials

class PotentialSolver:
    """``P`` and ``Q`` for a constant matrix ``A0`` on a fixed grid.

    ``A0`` is replaced by its symmetric part (the antisymmetric part of a
    constant matrix does not contribute to ``div(A0 grad w)``).
    """

    def __init__(self, grid, A0=None, tol=1e-10, disc=None):
        d = grid.dim
        A0 = np.eye(d) if A0 is None else np.asarray(A0, dtype=float)
        S, m, M = check_ellipticity(A0)
        self.grid = grid
        self.A0 = S
        self.ellipticity = (m, M)
        self.tol = tol
        self.disc = disc if disc is not None else Discretization(grid)
        self.matrix = self.disc.operator(S)
        self.last_info = None

    def _solve(self, rhs):
        x, info = self.disc.solve(self.matrix, rhs, self.tol, symmetric=True,
                                  key=("A0", self.A0.tobytes()))
        self.last_info = info
        return x

    def potential_vec(self, h_vec):
        return self._solve(h_vec)

    def quasi_potential_faces(self, fluxes):
        """``Q`` applied to a field given by its face fluxes."""
        return self._solve(self.disc.divergence(fluxes))

    def potential(self, h):
        if h.is_vector:
            raise InputError("potential needs a scalar field")
        return SampledField(self.grid, self.disc.to_grid(self._solve(self.disc.to_vec(h.values))))

    def quasi_potential(self, G):
        if not G.is_vector:
            raise InputError("quasi_potential needs a vector field")
        rhs = self.disc.data_divergence(G.values)
        return SampledField(self.grid, self.disc.to_grid(self._solve(rhs)))


def potential(h, A0=None, tol=1e-10):
    """Zero-Dirichlet solution ``w`` of ``-div(A0 grad w) = h`` on the grid of ``h``."""
    return PotentialSolver(h.grid, A0, tol).potential(h)


def quasi_potential(G, A0=None, tol=1e-10):
    """Zero-Dirichlet solution ``w`` of ``-div(A0 grad w) = div G``, ``G`` zero-extended."""
    return PotentialSolver(G.grid, A0, tol).quasi_potential(G)


def second_differences(w):
    """Cellwise Frobenius magnitude of the discrete Hessian (centred twice)."""
    from .fields import gradient
    g = gradient(w)
    comps = []
    for i in range(w.grid.dim):
        gi = gradient(g.component(i))
        comps.append(gi.values)
    H = np.concatenate(comps, axis=0)
    return SampledField(w.grid, np.sqrt(np.sum(H ** 2, axis=0)))


# ---------------------------------------------------------------- Riesz

def _self_cell(h, d, alpha, sub=8):
    """``int |y|^{alpha-d}`` over one cube cell of side ``h`` centred at 0.

    Exact over the inscribed ball, midpoint rule on ``sub^d`` sub-cells for
    the remainder.
    """
    ball = omega(d) * (h / 2.0) ** alpha / alpha
    s = (np.arange(sub) + 0.5) / sub - 0.5
    pts = np.stack(np.meshgrid(*([s * h] * d), indexing="ij"), axis=-1).reshape(-1, d)
    r = np.linalg.norm(pts, axis=1)
    rem = (r >= h / 2.0)
    return ball + np.sum(r[rem] ** (alpha - d)) * (h / sub) ** d


def riesz_potential(f, alpha):
    """``I_alpha f(x) = int f(y) |x - y|^{alpha - d} dy`` by direct summation over cells."""
    g = f.grid
    d = g.dim
    if not 0 < alpha < d:
        raise InputError(f"alpha must lie in (0, {d})")
    if f.is_vector:
        raise InputError("riesz_potential needs a scalar field")
    if len(set(np.round(g.spacing, 14))) != 1:
        raise InputError("riesz_potential needs a uniform isotropic grid")
    h = g.spacing[0]
    vals = np.where(g.mask, f.values, 0.0)
    offs = [np.arange(-(n - 1), n) * h for n in g.extents]
    Z = np.meshgrid(*offs, indexing="ij")
    r = np.sqrt(sum(z * z for z in Z))
    with np.errstate(divide="ignore"):
        K = np.where(r > 0, r ** (alpha - d), 0.0) * h ** d
    K[tuple(n - 1 for n in g.extents)] = _self_cell(h, d, alpha)
    # the cell sum is a discrete convolution; FFT evaluates it to roundoff
    out = signal.fftconvolve(vals, K, mode="full")
    sl = tuple(slice(n - 1, 2 * n - 1) for n in g.extents)
    return SampledField(g, out[sl])


# ---------------------------------------------------------------- reflection

def half_ball_grid(n, radius=1.0, dim=3):
    """Upper half ball ``{|x| < R, x_d > 0}`` on a grid whose lower face is ``x_d = 0``.

    ``n`` (even) cells across the full diameter; ``n/2`` along ``x_d``.
    """
    if n % 2:
        raise InputError("half-ball grids need an even cell count across the diameter")
    R = float(radius)
    h = 2 * R / n
    ext = (n,) * (dim - 1) + (n // 2,)
    origin = (-R,) * (dim - 1) + (0.0,)
    g = Grid(ext, (h,) * dim, origin, np.ones(ext, dtype=bool))
    x = g.centers()
    mask = sum(xi ** 2 for xi in x) < R * R
    return g.with_mask(mask)


def reflect_extend(f, parity="odd", plane=0.0):
    """Extend a field on a grid whose lower ``x_d`` face is the plane ``x_d = plane``.

    Odd: ``f(Rx) = -f(x)``; even: ``f(Rx) = f(x)``.  For vector fields the
    ``x_d`` component gets the opposite parity, which is what the reflection
    of a gradient does.
    """
    g = f.grid
    h = g.spacing[-1]
    if abs(g.origin[-1] - plane) > 1e-12 * max(1.0, abs(plane), h):
        raise AlignmentError("the reflection plane must coincide with the lower cell face")
    if parity not in ("odd", "even"):
        raise InputError("parity must be 'odd' or 'even'")
    sgn = -1.0 if parity == "odd" else 1.0
    ext = g.extents[:-1] + (2 * g.extents[-1],)
    origin = g.origin[:-1] + (plane - g.extents[-1] * h,)
    mask = np.concatenate([g.mask[..., ::-1], g.mask], axis=-1)
    grid = Grid(ext, g.spacing, origin, mask)
    if f.is_vector:
        comps = []
        for i in range(g.dim):
            s = sgn if i < g.dim - 1 else -sgn
            v = f.values[i]
            comps.append(np.concatenate([s * v[..., ::-1], v], axis=-1))
        vals = np.stack(comps)
    else:
        vals = np.concatenate([sgn * f.values[..., ::-1], f.values], axis=-1)
    conv = "reflected-odd" if parity == "odd" else "reflected-even"
    return SampledField(grid, vals, conv)


def q_bound_constant(psi, r, n=16, samples=8, seed=0, A0=None, dim=3):
    """Empirical ``sup ||grad Q G||_{L^psi(B_r)} / ||G||_{L^psi(B_r)}`` over random smooth ``G``.

    The ball ``B_r`` is resolved by ``n`` cells per diameter at every radius;
    the gradient is the one of the discrete operator.
    """
    from .elliptic import random_data
    from .fields import luxemburg_norm

    grid = Grid.ball(n, radius=r, dim=dim)
    solver = PotentialSolver(grid, A0)
    disc = solver.disc
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(samples):
        G, _ = random_data(grid, int(rng.integers(2 ** 31)))
        w = solver.quasi_potential(G)
        gw = np.stack([disc.to_grid(v) for v in disc.cell_gradient(disc.to_vec(w.values))])
        den = luxemburg_norm(G, psi)
        if den > 0:
            best = max(best, luxemburg_norm(SampledField(grid, gw), psi) / den)
    return best
