"""Divergence-form elliptic problems with lower-order terms.

The equation is

    -div(A grad u + B u + F) + C . grad u + V u = g   in Omega,   u = 0 on the boundary,

discretised by the cell-centred finite-volume scheme of :mod:`discrete`.
The module also provides the localisation machinery (cut-off, modified
coefficients, the operator ``K_r``, the bracket ``delta(r)``, the Neumann
solve) and numerical checks of the interior ``L^2`` bound and of the
Orlicz a priori estimate.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy import ndimage

from . import young
from .discrete import Discretization
from .errors import (DivergenceError, EllipticityError, GeometryError, InputError,
                     MaskError, PreconditionError, SolverError)
from .fields import Grid, SampledField, gradient, lebesgue_norm, luxemburg_norm, sobolev_norm
from .kernels import PotentialSolver
from .report import Check, VerificationReport

__all__ = [
    "CoefficientCatalog", "CoefficientSet", "EllipticProblem", "EstimateReport",
    "ContractionReport", "cutoff", "constant_catalog", "smooth_catalog",
    "singular_catalog", "solve", "verify_apriori", "interior_l2_check",
    "modified_coefficients", "LocalOperator", "apply_Kr", "contraction_delta",
    "neumann_solve", "local_control_check", "random_data", "scaled_norm",
]


# ---------------------------------------------------------------- cut-off

def _smooth_step(x):
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def cutoff(s):
    """Smooth nonincreasing profile: 1 on ``s <= 5/4``, 0 on ``s >= 7/4``."""
    s = np.asarray(s, dtype=float)
    return 1.0 - _smooth_step((s - 1.25) / 0.5)


# ---------------------------------------------------------------- coefficients

def _as_matrix_field(A, grid):
    d = grid.dim
    A = np.asarray(A, dtype=float)
    if A.shape == (d, d):
        A = np.broadcast_to(A[(...,) + (None,) * d], (d, d) + grid.extents).copy()
    if A.shape != (d, d) + grid.extents:
        raise InputError(f"A must be a constant ({d},{d}) matrix or a field over the grid")
    return A


def _as_vector_field(X, grid):
    d = grid.dim
    if X is None:
        return np.zeros((d,) + grid.extents)
    X = np.asarray(X, dtype=float)
    if X.shape == (d,):
        X = np.broadcast_to(X[(...,) + (None,) * d], (d,) + grid.extents).copy()
    if X.shape != (d,) + grid.extents:
        raise InputError("vector coefficient has the wrong shape")
    return X


def _as_scalar_field(X, grid):
    if X is None:
        return np.zeros(grid.extents)
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        return np.full(grid.extents, float(X))
    if X.shape != grid.extents:
        raise InputError("scalar coefficient has the wrong shape")
    return X


@dataclass
class CoefficientSet:
    """Sampled ``A, B, C, V`` with ellipticity bounds and recorded norms."""
    grid: Grid
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    V: np.ndarray
    m: float = float("nan")
    M: float = float("nan")
    omega_A: float = float("nan")
    norms: dict = field(default_factory=dict)
    c0: float | None = None
    k0: float | None = None

    @classmethod
    def build(cls, grid, A, B=None, C=None, V=None, xi_net=64, seed=0):
        cs = cls(grid, _as_matrix_field(A, grid), _as_vector_field(B, grid),
                 _as_vector_field(C, grid), _as_scalar_field(V, grid))
        cs.certify(xi_net, seed)
        return cs

    def certify(self, xi_net=64, seed=0):
        """Ellipticity bounds over inside cells, checked on a random unit-vector net."""
        d = self.grid.dim
        Ain = self.A[:, :, self.grid.mask]            # (d, d, N)
        S = 0.5 * (Ain + Ain.transpose(1, 0, 2))
        eig_min = np.linalg.eigvalsh(np.moveaxis(S, -1, 0))[:, 0]
        rng = np.random.default_rng(seed)
        xi = rng.normal(size=(xi_net, d))
        xi /= np.linalg.norm(xi, axis=1, keepdims=True)
        quad = np.einsum("ki,ijn,kj->kn", xi, Ain, xi)
        m_net = float(quad.min())
        m = float(min(eig_min.min(), m_net))
        if not m > 0:
            raise EllipticityError(f"A is not uniformly elliptic (min form {m:.3g})")
        M = float(np.linalg.norm(np.moveaxis(Ain, -1, 0), ord=2, axis=(1, 2)).max())
        jumps = []
        for a in range(d):
            dA = np.diff(self.A, axis=2 + a)
            both = self.grid.mask[(slice(None),) * a + (slice(1, None),)] & \
                self.grid.mask[(slice(None),) * a + (slice(None, -1),)]
            if both.any():
                jumps.append(np.abs(dA[:, :, both]).max() / self.grid.spacing[a])
        self.m, self.M = m, M
        self.omega_A = float(max(jumps) if jumps else 0.0)
        return self

    def field(self, name):
        if name == "B":
            return SampledField(self.grid, self.B)
        if name == "C":
            return SampledField(self.grid, self.C)
        if name == "V":
            return SampledField(self.grid, self.V)
        raise InputError(f"unknown coefficient {name!r}")

    def record_norms(self, psi, gamma):
        d = self.grid.dim
        self.norms = {"B": luxemburg_norm(self.field("B"), psi),
                      "C": lebesgue_norm(self.field("C"), d),
                      "V": luxemburg_norm(self.field("V"), gamma)}
        self.norms["Lambda"] = sum(self.norms.values())
        return self.norms


@dataclass(frozen=True)
class CoefficientCatalog:
    """Coefficients as functions of position, so they can be sampled on any grid.

    ``A(x) -> (d, d, ...)``, ``B(x), C(x) -> (d, ...)``, ``V(x) -> (...)``
    where ``x`` is the list of coordinate arrays.
    """
    name: str
    dim: int
    A: callable
    B: callable
    C: callable
    V: callable
    center: tuple = None
    params: dict = field(default_factory=dict)

    def sample(self, grid):
        x = grid.centers()
        return CoefficientSet.build(grid, self.A(x), self.B(x), self.C(x), self.V(x))


def _zeros_vec(d):
    return lambda x: np.zeros((d,) + x[0].shape)


def constant_catalog(dim=3, A0=None):
    A0 = np.eye(dim) if A0 is None else np.asarray(A0, dtype=float)
    return CoefficientCatalog(
        "constant", dim,
        lambda x: np.broadcast_to(A0.reshape((dim, dim) + (1,) * np.ndim(x[0])),
                                  (dim, dim) + np.shape(x[0])).copy(),
        _zeros_vec(dim), _zeros_vec(dim), lambda x: np.zeros(x[0].shape))


def _perturbed_identity(dim, eps, phase=0.0):
    def A(x):
        s = sum(np.cos((k + 1) * xi + phase) for k, xi in enumerate(x)) / dim
        out = np.zeros((dim, dim) + x[0].shape)
        for i in range(dim):
            out[i, i] = 1.0 + eps * s
        # symmetric off-diagonal coupling
        out[0, 1] = out[1, 0] = 0.5 * eps * np.sin(x[-1] + phase)
        return out
    return A


def smooth_catalog(dim=3, eps=0.2, b=0.3, c=0.3, v=1.0, phase=0.0):
    """Bounded smooth coefficients; ``V >= 0`` keeps the problem coercive-ish."""
    def B(x):
        return np.stack([b * np.cos(x[(i + 1) % dim] + phase) for i in range(dim)])

    def C(x):
        return np.stack([c * np.sin(x[(i + 2) % dim] - phase) for i in range(dim)])

    def V(x):
        return v * (1.0 + 0.5 * np.cos(sum(x) + phase))

    return CoefficientCatalog("smooth", dim, _perturbed_identity(dim, eps, phase), B, C, V,
                              params={"eps": eps, "b": b, "c": c, "v": v, "phase": phase})


def singular_catalog(dim=3, x0=None, eps=0.2, b=0.5, beta_b=0.5, c=0.3, v=0.5, beta_v=1.0):
    """Point singularities at ``x0``: ``|B| = b |x-x0|^{-beta_b}``, ``V = v |x-x0|^{-beta_v}``.

    With ``psi = t^4`` in three dimensions, ``beta_b = 1/2`` keeps ``B`` in
    ``L^psi`` and ``beta_v = 1`` keeps ``V`` in ``L^gamma``.
    """
    x0 = np.zeros(dim) if x0 is None else np.asarray(x0, dtype=float)

    def rad(x):
        return np.sqrt(sum((xi - ci) ** 2 for xi, ci in zip(x, x0)))

    def B(x):
        r = rad(x)
        e = np.zeros((dim,) + r.shape)
        e[0] = 1.0
        return b * e * r ** (-beta_b)

    def C(x):
        return np.stack([c * np.cos(x[i]) for i in range(dim)])

    def V(x):
        return v * rad(x) ** (-beta_v)

    return CoefficientCatalog("singular", dim, _perturbed_identity(dim, eps), B, C, V,
                              center=tuple(x0),
                              params={"eps": eps, "b": b, "beta_b": beta_b, "c": c, "v": v,
                                      "beta_v": beta_v})


# ---------------------------------------------------------------- problems

@dataclass
class EllipticProblem:
    grid: Grid
    coeffs: CoefficientSet
    F: SampledField
    g: SampledField
    psi: young.YoungFunction
    gamma: young.YoungFunction
    disc: Discretization = None

    def __post_init__(self):
        if not (self.F.grid.same_as(self.grid) and self.g.grid.same_as(self.grid)):
            raise InputError("F and g must live on the problem grid")
        if self.coeffs.grid is not self.grid and not self.coeffs.grid.same_as(self.grid):
            raise InputError("coefficients must live on the problem grid")
        if not self.F.is_vector or self.g.is_vector:
            raise InputError("F must be a vector field and g a scalar field")
        if self.disc is None:
            self.disc = Discretization(self.grid)

    def with_data(self, F, g):
        return EllipticProblem(self.grid, self.coeffs, F, g, self.psi, self.gamma, self.disc)

    def matrix(self):
        c = self.coeffs
        return self.disc.operator(c.A, c.B, c.C, c.V)

    def rhs(self):
        return self.disc.data_divergence(self.F.values) + self.disc.to_vec(self.g.values)


def solve(problem, tol=1e-10, return_info=False):
    """Zero-Dirichlet solution of the equation on the problem grid."""
    if min(problem.grid.extents) < 9:
        raise InputError("solve needs at least 9 cells per axis")
    M = problem.matrix()
    x, info = problem.disc.solve(M, problem.rhs(), tol)
    u = SampledField(problem.grid, problem.disc.to_grid(x))
    return (u, info) if return_info else u


def smallest_singular_estimate(problem, iters=6, seed=0):
    """Inverse iteration on ``M^T M``; a cheap proxy for the distance to singularity."""
    M = problem.matrix()
    disc = problem.disc
    rng = np.random.default_rng(seed)
    x = rng.normal(size=disc.N)
    x /= np.linalg.norm(x)
    MT = M.T.tocsr()
    sigma = np.inf
    for _ in range(iters):
        y, _ = disc.solve(M, x, 1e-10)
        z, _ = disc.solve(MT, y, 1e-10)
        nz = np.linalg.norm(z)
        sigma = 1.0 / np.sqrt(nz)
        x = z / nz
    return float(sigma)


def random_data(grid, seed, modes=3, amp_F=1.0, amp_g=1.0):
    """Smooth random ``(F, g)``: a few random Fourier modes, deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    x = grid.centers()
    d = grid.dim
    L = [h * n for h, n in zip(grid.spacing, grid.extents)]
    org = grid.origin

    def mode():
        k = rng.integers(1, modes + 1, size=d)
        ph = rng.uniform(0, 2 * np.pi, size=d)
        return rng.normal() * np.prod([np.cos(np.pi * k[i] * (x[i] - org[i]) / L[i] + ph[i])
                                       for i in range(d)], axis=0)

    F = np.stack([amp_F * sum(mode() for _ in range(modes)) for _ in range(d)])
    g = amp_g * sum(mode() for _ in range(modes))
    F = np.where(grid.mask, F, 0.0)
    g = np.where(grid.mask, g, 0.0)
    return SampledField(grid, F), SampledField(grid, g)


# ---------------------------------------------------------------- estimates

@dataclass
class EstimateReport:
    lhs: float
    rhs_terms: tuple
    ratio: float
    degenerate: bool = False
    trace: list = field(default_factory=list)

    def as_dict(self):
        return {"lhs": self.lhs, "u_L1": self.rhs_terms[0], "F_Lpsi": self.rhs_terms[1],
                "g_Lgamma": self.rhs_terms[2], "ratio": self.ratio,
                "degenerate": self.degenerate}


def verify_apriori(problem, u):
    """``||u||_{W^{1,psi}} / (||u||_{L^1} + ||F||_{L^psi} + ||g||_{L^gamma})``."""
    lhs = sobolev_norm(u, problem.psi)
    terms = (lebesgue_norm(u, 1.0), luxemburg_norm(problem.F, problem.psi),
             luxemburg_norm(problem.g, problem.gamma))
    den = sum(terms)
    if den == 0:
        return EstimateReport(lhs, terms, float("nan") if lhs == 0 else float("inf"),
                              degenerate=lhs == 0)
    return EstimateReport(lhs, terms, lhs / den)


def _distance_to_boundary(grid, D):
    """Distance from the cells of ``D`` to the complement of the domain (cell centres)."""
    padded = np.pad(grid.mask, 1, constant_values=False)
    dist = ndimage.distance_transform_edt(padded, sampling=grid.spacing)
    dist = dist[(slice(1, -1),) * grid.dim]
    # the boundary sits on the faces: half a cell closer than the ghost centres
    return float(dist[D].min() - 0.5 * min(grid.spacing))


def interior_l2_check(problem, u, D, c_ref=None):
    """Both sides of the interior gradient bound on ``D`` and their ratio."""
    grid = problem.grid
    D = np.asarray(D, dtype=bool)
    if D.shape != grid.extents or np.any(D & ~grid.mask):
        raise MaskError("D must be a sub-mask of the domain")
    delta0 = _distance_to_boundary(grid, D)
    if delta0 <= 2 * max(grid.spacing):
        raise MaskError(f"dist(D, boundary) = {delta0:.3g} is not more than two cells")
    d = grid.dim
    grad = gradient(u)
    gD = SampledField(grid.with_mask(D), grad.values)
    lhs = lebesgue_norm(gD, 2.0)
    rhs = (lebesgue_norm(u, 2.0) / delta0 + lebesgue_norm(problem.F, 2.0)
           + lebesgue_norm(problem.g, 2.0 * d / (d + 2.0)))
    const = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else float("inf"))
    rep = VerificationReport("interior L2 gradient bound",
                             provenance={"delta0": delta0, "lhs": lhs, "rhs": rhs})
    if c_ref is None:
        rep.add(Check("interior-l2:constant", "interior-l2", const, None, None,
                      bool(np.isfinite(const)), {"lhs": lhs, "rhs": rhs}))
    else:
        rep.add(Check.bound("interior-l2:constant", "interior-l2", const, c_ref,
                            lhs=lhs, rhs=rhs))
    return rep, const


# ---------------------------------------------------------------- localisation

def _ball_inside(grid, x0, radius):
    lo = np.asarray(grid.origin)
    hi = lo + np.asarray(grid.spacing) * np.asarray(grid.extents)
    x0 = np.asarray(x0, dtype=float)
    return bool(np.all(x0 - radius >= lo - 1e-12) and np.all(x0 + radius <= hi + 1e-12))


def _value_at(grid, arr, x0):
    idx = tuple(int(np.clip(np.floor((x - o) / h), 0, n - 1))
                for x, o, h, n in zip(x0, grid.origin, grid.spacing, grid.extents))
    return arr[(...,) + idx]


def modified_coefficients(coeffs, r, x0, A0=None):
    """``A_r = (1 - eta_r) A0 + eta_r A``; ``B_r, C_r, V_r`` multiplied by ``eta_r``.

    ``A0`` defaults to ``A`` at the cell containing ``x0``.
    """
    grid = coeffs.grid
    if r <= 0:
        raise GeometryError("r must be positive")
    if not _ball_inside(grid, x0, 2 * r):
        raise GeometryError("B_{2r}(x0) is not inside the grid")
    x = grid.centers()
    dist = np.sqrt(sum((xi - ci) ** 2 for xi, ci in zip(x, x0)))
    eta = cutoff(dist / r)
    A0 = _value_at(grid, coeffs.A, x0) if A0 is None else np.asarray(A0, dtype=float)
    d = grid.dim
    A0f = np.broadcast_to(A0[(...,) + (None,) * d], coeffs.A.shape)
    Ar = (1.0 - eta) * A0f + eta * coeffs.A
    out = CoefficientSet(grid, Ar, eta * coeffs.B, eta * coeffs.C, eta * coeffs.V)
    out.certify()
    out.A0 = A0
    out.eta = eta
    return out


class LocalOperator:
    """``K_r`` and ``z_r`` on one grid (the ball ``B_{2r}(x0)``) for modified coefficients.

    With ``S0`` the symmetric part of ``A0`` and ``L0 = -div(S0 grad .)``,
    ``K_r u = Q[(A_r - S0) grad u + B_r u] - P[C_r . grad u + V_r u]`` and
    ``z_r = Q[F] + P[g]``; the fixed point of ``u = K_r u + z_r`` is exactly
    the discrete solution of the modified equation.
    """

    def __init__(self, coeffs_r, tol=1e-12):
        grid = coeffs_r.grid
        self.grid = grid
        self.coeffs = coeffs_r
        self.disc = Discretization(grid)
        self.solver = PotentialSolver(grid, coeffs_r.A0, tol, disc=self.disc)
        S0 = self.solver.A0
        d = grid.dim
        dA = coeffs_r.A - S0[(...,) + (None,) * d]
        self._flux = self.disc.flux_matrices(dA, coeffs_r.B)
        lower = _diag(coeffs_r.V[grid.mask])
        for b in range(d):
            lower = lower + _diag(coeffs_r.C[b][grid.mask]) @ self.disc.grad[b]
        self._lower = lower.tocsr()
        self.tol = tol

    def apply_vec(self, u):
        fl = [M @ u for M in self._flux]
        q = self.solver.quasi_potential_faces(fl)
        p = self.solver.potential_vec(self._lower @ u)
        return q - p

    def z_vec(self, F, g):
        rhs = self.disc.data_divergence(F.values) + self.disc.to_vec(g.values)
        return self.solver._solve(rhs)

    def direct_vec(self, F, g):
        c = self.coeffs
        M = self.disc.operator(c.A, c.B, c.C, c.V)
        rhs = self.disc.data_divergence(F.values) + self.disc.to_vec(g.values)
        x, _ = self.disc.solve(M, rhs, self.tol)
        return x

    def field(self, vec):
        return SampledField(self.grid, self.disc.to_grid(vec))


def _diag(v):
    return sp.diags(v)


def apply_Kr(u, coeffs_r, psi=None, r=None, op=None):
    """``K_r u`` as a field; ``op`` reuses a :class:`LocalOperator`."""
    op = LocalOperator(coeffs_r) if op is None else op
    return op.field(op.apply_vec(op.disc.to_vec(u.values)))


def scaled_norm(u, psi, r, disc=None):
    """Scaled ``W^{1,psi}(B_{2r})`` norm ``||grad u|| + ||u||/(2r)`` of a zero-Dirichlet field.

    The gradient is the one of the discrete operator (mirror ghosts), which
    is defined on every inside cell of a staircase ball.
    """
    if r <= 0:
        raise InputError("r must be positive")
    disc = Discretization(u.grid) if disc is None else disc
    vec = disc.to_vec(u.values)
    grad = np.stack([disc.to_grid(gv) for gv in disc.cell_gradient(vec)])
    return (luxemburg_norm(SampledField(u.grid, grad), psi)
            + luxemburg_norm(u, psi) / (2.0 * r))


# ---------------------------------------------------------------- delta(r)

@dataclass
class ContractionReport:
    r_values: list
    terms: list
    delta: list
    r0: float | None
    Kr_norm: list = field(default_factory=list)
    caveat: str = "bracket constant normalised to 1"

    def as_rows(self):
        rows = []
        for k, r in enumerate(self.r_values):
            a, b, c, v = self.terms[k]
            rows.append({"r": r, "A_term": a, "B_term": b, "C_term": c, "V_term": v,
                         "delta": self.delta[k],
                         "Kr_norm": self.Kr_norm[k] if k < len(self.Kr_norm) else float("nan")})
        return rows


def local_ball_grid(x0, r, n):
    """Ball ``B_{2r}(x0)`` on ``n`` (even) cells per diameter; ``x0`` is a cell vertex."""
    if n % 2:
        n += 1
    return Grid.ball(n, radius=2.0 * r, dim=len(x0), center=x0)


def contraction_delta(catalog, psi, gamma, r_list, x0=None, n=24, Kr_samples=0, seed=0):
    """The four bracket terms of ``delta(r)`` on ``B_{2r}(x0)`` for each ``r``.

    Coefficients are sampled from ``catalog`` on a ball grid of fixed cell
    count, so every radius is resolved equally.  ``Kr_samples > 0`` adds an
    empirical estimate of the scaled operator norm of ``K_r``.
    """
    from .embeddings import iinf_converges

    d = catalog.dim
    if not iinf_converges(psi, d):
        raise PreconditionError(f"I-infinity diverges for {psi!r}: no contraction bracket")
    r_list = [float(r) for r in r_list]
    if any(b >= a for a, b in zip(r_list, r_list[1:])):
        raise InputError("r_list must be strictly decreasing")
    x0 = np.zeros(d) if x0 is None else np.asarray(x0, dtype=float)
    terms, delta, kr = [], [], []
    for r in r_list:
        grid = local_ball_grid(x0, r, n)
        cs = catalog.sample(grid)
        A0 = catalog.A([np.array(c) for c in x0])
        if A0.ndim > 2:
            A0 = A0.reshape(d, d)
        dA = cs.A[:, :, grid.mask] - A0[:, :, None]
        a_term = float(np.linalg.norm(np.moveaxis(dA, -1, 0), ord=2, axis=(1, 2)).max())
        scale = r * float(young.left_inverse(psi, r ** (-d)))
        b_term = luxemburg_norm(cs.field("B"), psi) * scale
        c_term = lebesgue_norm(cs.field("C"), d)
        v_term = luxemburg_norm(cs.field("V"), gamma) * scale
        terms.append((a_term, b_term, c_term, v_term))
        delta.append(a_term + b_term + c_term + v_term)
        if Kr_samples:
            kr.append(Kr_norm_estimate(catalog, psi, r, x0, n, Kr_samples, seed))
    r0 = next((r for r, dl in zip(r_list, delta) if dl <= 0.5), None)
    return ContractionReport(r_list, terms, delta, r0, kr)


def local_operator(catalog, r, x0=None, n=24):
    d = catalog.dim
    x0 = np.zeros(d) if x0 is None else np.asarray(x0, dtype=float)
    grid = local_ball_grid(x0, r, n)
    cs = catalog.sample(grid)
    A0 = catalog.A([np.array(c) for c in x0]).reshape(d, d)
    return LocalOperator(modified_coefficients(cs, r, x0, A0=A0))


def Kr_norm_estimate(catalog, psi, r, x0=None, n=24, samples=20, seed=0, op=None):
    """Max of ``||K_r u|| / ||u||`` (scaled norm) over random smooth ``u``."""
    op = local_operator(catalog, r, x0, n) if op is None else op
    rng = np.random.default_rng(seed)
    best = 0.0
    x = op.grid.centers()
    for k in range(samples):
        u = random_data(op.grid, int(rng.integers(2 ** 31)))[1]
        # vanish near the sphere so u is an honest element of the localized space
        c = np.zeros(len(x)) if x0 is None else np.asarray(x0, dtype=float)
        rr = np.sqrt(sum((xi - ci) ** 2 for xi, ci in zip(x, c)))
        u = SampledField(op.grid, u.values * cutoff(rr / r))
        nu = scaled_norm(u, psi, r, op.disc)
        if nu == 0:
            continue
        Ku = apply_Kr(u, op.coeffs, op=op)
        best = max(best, scaled_norm(Ku, psi, r, op.disc) / nu)
    return best


# ---------------------------------------------------------------- Neumann

def neumann_solve(catalog, psi, gamma, r, x0=None, n=24, F=None, g=None, seed=0,
                  tol=1e-9, max_iter=200, op=None):
    """Fixed-point iteration ``u <- K_r u + z_r`` on ``B_{2r}(x0)``.

    Data default to random smooth fields multiplied by the cut-off (support
    in ``B_{7r/4}``).  Returns the iterate and a report with the geometric
    decay rate of the increments and the mismatch with the direct solve.
    """
    op = local_operator(catalog, r, x0, n) if op is None else op
    grid = op.grid
    if F is None or g is None:
        F0, g0 = random_data(grid, seed)
        eta = op.coeffs.eta
        F = SampledField(grid, F0.values * eta) if F is None else F
        g = SampledField(grid, g0.values * eta) if g is None else g
    z = op.z_vec(F, g)
    zf = op.field(z)
    zn = scaled_norm(zf, psi, r, op.disc)
    u = z.copy()
    incs = []
    grows = 0
    for k in range(max_iter):
        new = op.apply_vec(u) + z
        inc = scaled_norm(op.field(new - u), psi, r, op.disc)
        u = new
        incs.append(inc)
        if len(incs) > 1 and incs[-1] > incs[-2]:
            grows += 1
            if grows >= 3:
                raise DivergenceError(f"increments grew three times in a row (last {inc:.3g})")
        else:
            grows = 0
        if inc <= tol * max(zn, 1e-300):
            break
    else:
        raise SolverError(f"Neumann iteration did not converge in {max_iter} steps")
    incs = np.asarray(incs)
    pos = incs[incs > 0]
    if pos.size >= 3:
        rate = float(np.exp(np.mean(np.diff(np.log(pos[:-1])))))
    elif pos.size == 2:
        rate = float(pos[1] / pos[0])
    else:
        rate = 0.0
    direct = op.direct_vec(F, g)
    uf = op.field(u)
    mismatch = scaled_norm(op.field(u - direct), psi, r, op.disc) / max(scaled_norm(op.field(direct), psi, r, op.disc), 1e-300)
    rep = VerificationReport(f"Neumann solve r={r:g}",
                             provenance={"r": r, "n": n, "iterations": len(incs),
                                         "increments": incs.tolist()})
    rep.add(Check.bound("neumann:rate", "neumann", rate, 0.6))
    rep.add(Check.bound("neumann:mismatch", "neumann", mismatch, 1e-6))
    data = luxemburg_norm(F, psi) + luxemburg_norm(g, gamma)
    rep.provenance.update({"rate": rate, "mismatch": mismatch,
                           "u_scaled": scaled_norm(uf, psi, r, op.disc), "data": data,
                           "z_scaled": zn})
    return uf, rep


# ---------------------------------------------------------------- local control

def local_control_check(coeffs, c0, k0, centers=None, radii=(0.5, 0.25, 0.125, 0.0625)):
    """``int_{B_r(x)} (|B|^2 + |C|^2 + |V|)^{d/2} <= (c0 r^k0)^{d/2}`` over a net.

    Returns ``(holds, witness, c0_min)`` with ``witness = (x, r, ratio)`` the
    worst pair and ``c0_min`` the smallest ``c0`` that works for ``k0`` on
    the net (a cell-resolution sweep).
    """
    grid = coeffs.grid
    d = grid.dim
    if c0 <= 0 or k0 <= 0:
        raise InputError("c0 and k0 must be positive")
    dens = (np.sum(coeffs.B ** 2, axis=0) + np.sum(coeffs.C ** 2, axis=0)
            + np.abs(coeffs.V)) ** (d / 2.0)
    dens = np.where(grid.mask, dens, 0.0)
    x = grid.centers()
    if centers is None:
        idx = np.argwhere(grid.mask)
        step = max(1, idx.shape[0] // 64)
        centers = [tuple(x[a][tuple(i)] for a in range(d)) for i in idx[::step]]
        # the densest cell is always a centre
        k = np.unravel_index(np.argmax(dens), dens.shape)
        centers.append(tuple(x[a][k] for a in range(d)))
    vol = grid.cell_volume
    worst = (None, None, -np.inf)
    c0_min = 0.0
    for c in centers:
        rr = np.sqrt(sum((xi - ci) ** 2 for xi, ci in zip(x, c)))
        for r in radii:
            if r < min(grid.spacing):
                continue
            val = float(np.sum(dens[rr < r]) * vol)
            need = val ** (2.0 / d) / r ** k0
            c0_min = max(c0_min, need)
            ratio = need / c0
            if ratio > worst[2]:
                worst = (c, r, ratio)
    return bool(c0_min <= c0), worst, c0_min
