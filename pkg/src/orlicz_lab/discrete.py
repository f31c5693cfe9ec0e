"""Cell-centred finite-volume operators with zero Dirichlet data on the mask boundary.

Unknowns live on the inside cells of a :class:`~orlicz_lab.fields.Grid`.
Outside cells act as mirror ghosts (``u_ghost = -u_inside``), which puts
the Dirichlet boundary on the cell faces of the staircase mask and keeps
the scheme second order on cubes.

Every operator is a sparse matrix, so the discrete identity between the
localized equation and its potential representation holds exactly.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import EllipticityError, GridError, SolverError

DIRECT_LIMIT = 8000


class Discretization:
    """Sparse building blocks on one grid.

    Attributes
    ----------
    index : int array over the grid, ``-1`` outside the mask
    grad : list of ``N x N`` centred gradient matrices (one per axis)
    faces : per axis, dict with face cell pairs and the face operators
    """

    def __init__(self, grid):
        self.grid = grid
        d = grid.dim
        mask = grid.mask
        self.N = int(mask.sum())
        if self.N < 1:
            raise GridError("empty mask")
        index = np.full(grid.extents, -1, dtype=np.int64)
        index[mask] = np.arange(self.N)
        self.index = index
        pad = np.pad(index, 1, constant_values=-1)
        self.grad = [self._centered(pad, b) for b in range(d)]
        self.faces = [self._faces(pad, a) for a in range(d)]
        self._lu_cache = {}

    # -------------------------------------------------------------- blocks

    def _shifted(self, pad, axis, k):
        sl = [slice(1, -1)] * pad.ndim
        sl[axis] = slice(1 + k, pad.shape[axis] - 1 + k)
        return pad[tuple(sl)]

    def _centered(self, pad, b):
        h = self.grid.spacing[b]
        me = self.index[self.grid.mask]
        up = self._shifted(pad, b, 1)[self.grid.mask]
        dn = self._shifted(pad, b, -1)[self.grid.mask]
        rows, cols, vals = [], [], []
        for nb, sgn in ((up, 1.0), (dn, -1.0)):
            ok = nb >= 0
            rows += [me[ok], me[~ok]]
            cols += [nb[ok], me[~ok]]
            # ghost neighbour contributes -u_me
            vals += [np.full(ok.sum(), sgn / (2 * h)), np.full((~ok).sum(), -sgn / (2 * h))]
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(self.N, self.N))

    def _faces(self, pad, a):
        """Faces normal to axis ``a`` touching at least one inside cell."""
        h = self.grid.spacing[a]
        sl_l = [slice(1, -1)] * pad.ndim
        sl_r = [slice(1, -1)] * pad.ndim
        sl_l[a] = slice(0, pad.shape[a] - 1)
        sl_r[a] = slice(1, pad.shape[a])
        L = pad[tuple(sl_l)].ravel()
        R = pad[tuple(sl_r)].ravel()
        keep = (L >= 0) | (R >= 0)
        L, R = L[keep], R[keep]
        nf = L.size
        f = np.arange(nf)
        both = (L >= 0) & (R >= 0)
        lonly = (L >= 0) & (R < 0)
        ronly = (L < 0) & (R >= 0)
        # normal derivative, mirror ghosts
        rows = np.concatenate([f[both], f[both], f[lonly], f[ronly]])
        cols = np.concatenate([R[both], L[both], L[lonly], R[ronly]])
        vals = np.concatenate([np.full(both.sum(), 1 / h), np.full(both.sum(), -1 / h),
                               np.full(lonly.sum(), -2 / h), np.full(ronly.sum(), 2 / h)])
        Dn = sp.csr_matrix((vals, (rows, cols)), shape=(nf, self.N))
        # average of an unknown to the face (zero on boundary faces)
        Avg = sp.csr_matrix((np.full(2 * both.sum(), 0.5),
                             (np.concatenate([f[both], f[both]]),
                              np.concatenate([L[both], R[both]]))), shape=(nf, self.N))
        # average of a datum (zero-extended outside the mask)
        rows = np.concatenate([f[L >= 0], f[R >= 0]])
        cols = np.concatenate([L[L >= 0], R[R >= 0]])
        AvgData = sp.csr_matrix((np.full(rows.size, 0.5), (rows, cols)), shape=(nf, self.N))
        # face flux divergence into inside cells: (F_right - F_left)/h
        rows = np.concatenate([L[L >= 0], R[R >= 0]])
        cols = np.concatenate([f[L >= 0], f[R >= 0]])
        vals = np.concatenate([np.full((L >= 0).sum(), 1 / h), np.full((R >= 0).sum(), -1 / h)])
        Div = sp.csr_matrix((vals, (rows, cols)), shape=(self.N, nf))
        # cell used for face coefficients (either side when both inside)
        return {"L": L, "R": R, "both": both, "Dn": Dn, "Avg": Avg, "AvgData": AvgData,
                "Div": Div, "n": nf}

    # -------------------------------------------------------------- fields <-> vectors

    def to_vec(self, values):
        return np.asarray(values, dtype=float)[self.grid.mask]

    def to_grid(self, vec):
        out = np.zeros(self.grid.extents)
        out[self.grid.mask] = vec
        return out

    def face_average(self, a, cellvals):
        """Face values of an inside-cell coefficient (one-sided at the boundary)."""
        fc = self.faces[a]
        L, R = fc["L"], fc["R"]
        cl = np.where(L >= 0, cellvals[np.maximum(L, 0)], 0.0)
        cr = np.where(R >= 0, cellvals[np.maximum(R, 0)], 0.0)
        return np.where(fc["both"], 0.5 * (cl + cr), np.where(L >= 0, cl, cr))

    def face_gradient(self, a, b):
        """Derivative along ``b`` on faces normal to ``a``."""
        fc = self.faces[a]
        if a == b:
            return fc["Dn"]
        return fc["Avg"] @ self.grad[b]

    # -------------------------------------------------------------- operators

    def flux_matrices(self, A=None, B=None):
        """Per axis, the face-flux matrix of ``A grad u + B u``."""
        d = self.grid.dim
        out = []
        for a in range(d):
            fc = self.faces[a]
            M = sp.csr_matrix((fc["n"], self.N))
            if A is not None:
                for b in range(d):
                    coef = self._coef(A, (a, b))
                    if coef is None:
                        continue
                    M = M + sp.diags(self.face_average(a, coef)) @ self.face_gradient(a, b)
            if B is not None:
                coef = self._coef(B, (a,))
                if coef is not None:
                    M = M + fc["Avg"] @ sp.diags(coef)
            out.append(M.tocsr())
        return out

    def _coef(self, X, idx):
        """Inside-cell vector of component ``idx`` of a constant or sampled coefficient."""
        X = np.asarray(X, dtype=float)
        k = len(idx)
        if X.ndim == k:            # constant
            v = X[idx]
            return None if v == 0 else np.full(self.N, float(v))
        comp = X[idx]
        v = comp[self.grid.mask]
        return None if not np.any(v) else v

    def divergence(self, fluxes):
        """``sum_a Div_a flux_a`` for face-flux vectors or matrices."""
        return sum(self.faces[a]["Div"] @ fluxes[a] for a in range(self.grid.dim))

    def operator(self, A, B=None, C=None, V=None):
        """``u -> -div(A grad u + B u) + C . grad u + V u`` as a sparse matrix."""
        fl = self.flux_matrices(A, B)
        M = -self.divergence(fl)
        d = self.grid.dim
        if C is not None:
            for b in range(d):
                coef = self._coef(C, (b,))
                if coef is not None:
                    M = M + sp.diags(coef) @ self.grad[b]
        if V is not None:
            coef = self._coef(V, ())
            if coef is not None:
                M = M + sp.diags(coef)
        return sp.csr_matrix(M)

    def data_divergence(self, G):
        """``div G`` of a cell vector field, zero-extended outside the mask."""
        G = np.asarray(G, dtype=float)
        total = np.zeros(self.N)
        for a in range(self.grid.dim):
            fc = self.faces[a]
            total += fc["Div"] @ (fc["AvgData"] @ G[a][self.grid.mask])
        return total

    def cell_gradient(self, u):
        return np.stack([g @ u for g in self.grad])

    # -------------------------------------------------------------- solves

    def solve(self, M, rhs, tol=1e-10, symmetric=False, key=None):
        """Solve ``M x = rhs`` to relative residual ``tol``.

        Small systems use a cached sparse LU (keyed by ``key``); larger ones
        CG (symmetric) or Jacobi-preconditioned BiCGSTAB, then GMRES.
        """
        rhs = np.asarray(rhs, dtype=float)
        nb = np.linalg.norm(rhs)
        if nb == 0:
            return np.zeros_like(rhs), {"method": "trivial", "residual": 0.0, "iterations": 0}
        if self.N <= DIRECT_LIMIT:
            lu = self._lu_cache.get(key) if key is not None else None
            if lu is None:
                try:
                    lu = spla.splu(sp.csc_matrix(M))
                except RuntimeError as exc:
                    raise SolverError(f"sparse LU failed: {exc}") from exc
                if key is not None:
                    self._lu_cache[key] = lu
            x = lu.solve(rhs)
            res = np.linalg.norm(M @ x - rhs) / nb
            if not np.isfinite(res) or res > tol:
                raise SolverError(f"direct solve residual {res:.2e} exceeds {tol:.0e}")
            return x, {"method": "splu", "residual": float(res), "iterations": 1}
        diag = M.diagonal()
        if np.any(diag == 0):
            raise SolverError("zero diagonal entry in the assembled system")
        P = spla.LinearOperator(M.shape, lambda v: v / diag)
        it = [0]

        def count(_):
            it[0] += 1

        rt = 0.05 * tol
        if symmetric:
            x, info = spla.cg(M, rhs, rtol=rt, maxiter=20000, M=P, callback=count)
            method = "cg"
        else:
            x, info = spla.bicgstab(M, rhs, rtol=rt, maxiter=20000, M=P, callback=count)
            method = "bicgstab"
        res = np.linalg.norm(M @ x - rhs) / nb
        if info != 0 or res > tol:
            x, info = spla.gmres(M, rhs, x0=x, rtol=rt, restart=100, maxiter=200, M=P)
            method += "+gmres"
            res = np.linalg.norm(M @ x - rhs) / nb
        if not np.isfinite(res) or res > tol:
            raise SolverError(f"{method} reached residual {res:.2e} > {tol:.0e}")
        return x, {"method": method, "residual": float(res), "iterations": it[0]}


def check_ellipticity(A0):
    """Symmetric part of a constant matrix, which must be positive definite."""
    A0 = np.asarray(A0, dtype=float)
    if A0.ndim != 2 or A0.shape[0] != A0.shape[1]:
        raise EllipticityError("A0 must be a square matrix")
    S = 0.5 * (A0 + A0.T)
    w = np.linalg.eigvalsh(S)
    if w.min() <= 0:
        raise EllipticityError(f"symmetric part of A0 is not positive definite (min eig {w.min():.3g})")
    return S, float(w.min()), float(np.linalg.norm(A0, 2))
