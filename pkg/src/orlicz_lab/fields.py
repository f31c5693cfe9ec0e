"""Sampled fields on rectilinear grids and the norms used throughout.

Integrals are midpoint sums over the cells inside the domain mask.  All
modulars are accumulated in log space, so Young functions with explosive
growth never overflow a sum.
"""
from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import young
from .errors import GridError, InputError, MaskError, OverflowGuard

__all__ = [
    "Grid", "SampledField", "RearrangedProfile", "rearrange", "modular",
    "luxemburg_norm", "luxemburg_norm_profile", "lebesgue_norm", "gradient",
    "sobolev_norm", "scaled_ball_norm", "lorentz_norm", "save_field", "load_field",
]

BOUNDARY_CONVENTIONS = ("zero-extension", "reflected-odd", "reflected-even")


@dataclass(frozen=True, eq=False)
class Grid:
    """Cell-centred rectilinear grid with a boolean domain mask.

    ``extents`` are cell counts per axis, ``spacing`` the cell widths and
    ``origin`` the lower corner of the bounding box.
    """
    extents: tuple
    spacing: tuple
    origin: tuple
    mask: np.ndarray

    def __post_init__(self):
        ext = tuple(int(n) for n in self.extents)
        sp = tuple(float(h) for h in self.spacing)
        org = tuple(float(o) for o in self.origin)
        if len(ext) not in (2, 3) or len(sp) != len(ext) or len(org) != len(ext):
            raise GridError("grids are 2- or 3-dimensional with matching extents/spacing/origin")
        if min(ext) < 1 or min(sp) <= 0 or not all(np.isfinite(sp)):
            raise GridError(f"invalid extents {ext} or spacing {sp}")
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != ext:
            raise MaskError(f"mask shape {mask.shape} does not match extents {ext}")
        if not mask.any():
            raise MaskError("domain mask is empty")
        mask = mask.copy()
        mask.setflags(write=False)
        object.__setattr__(self, "extents", ext)
        object.__setattr__(self, "spacing", sp)
        object.__setattr__(self, "origin", org)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def cube(cls, n, dim=3, length=1.0, origin=None):
        n = int(n)
        h = float(length) / n
        org = (0.0,) * dim if origin is None else tuple(origin)
        return cls((n,) * dim, (h,) * dim, org, np.ones((n,) * dim, dtype=bool))

    @classmethod
    def ball(cls, n, radius=1.0, dim=3, center=None, half=False):
        """``n`` cells per axis over ``[-R, R]^dim`` around ``center``; mask ``|x| < R``.

        With ``half=True`` only cells with ``x_dim > 0`` are kept (the upper
        half ball, flat side on ``x_dim = 0``).
        """
        n = int(n)
        R = float(radius)
        c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
        h = 2.0 * R / n
        g = cls((n,) * dim, (h,) * dim, tuple(c - R), np.ones((n,) * dim, dtype=bool))
        x = g.centers()
        rr = sum((xi - ci) ** 2 for xi, ci in zip(x, c))
        mask = rr < R * R
        if half:
            mask &= x[-1] > c[-1]
        return cls(g.extents, g.spacing, g.origin, mask)

    @property
    def dim(self):
        return len(self.extents)

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def n_inside(self):
        return int(self.mask.sum())

    @property
    def measure(self):
        return self.n_inside * self.cell_volume

    def axes(self):
        return [o + h * (np.arange(n) + 0.5)
                for o, h, n in zip(self.origin, self.spacing, self.extents)]

    def centers(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def with_mask(self, mask):
        return Grid(self.extents, self.spacing, self.origin, mask)

    def same_as(self, other):
        return (self.extents == other.extents
                and np.allclose(self.spacing, other.spacing, rtol=1e-14, atol=0)
                and np.allclose(self.origin, other.origin, rtol=1e-14, atol=1e-15)
                and np.array_equal(self.mask, other.mask))


class SampledField:
    """Scalar (shape ``extents``) or vector (shape ``(dim, *extents)``) samples.

    Values outside the mask are stored but ignored by every norm.
    """

    def __init__(self, grid, values, boundary="zero-extension"):
        values = np.array(values, dtype=float)
        if values.shape == grid.extents:
            self.components = 1
        elif values.shape == (grid.dim,) + grid.extents:
            self.components = grid.dim
        else:
            raise InputError(f"values of shape {values.shape} fit neither a scalar nor a "
                             f"vector field on extents {grid.extents}")
        if boundary not in BOUNDARY_CONVENTIONS:
            raise InputError(f"unknown boundary convention {boundary!r}")
        inside = values[..., grid.mask] if self.components == 1 else values[:, grid.mask]
        if not np.all(np.isfinite(inside)):
            raise InputError("field values must be finite inside the mask")
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.boundary = boundary

    def __repr__(self):
        kind = "scalar" if self.components == 1 else f"{self.components}-vector"
        return f"SampledField({kind}, extents={self.grid.extents})"

    @property
    def is_vector(self):
        return self.components > 1

    def magnitude(self):
        """Pointwise Euclidean magnitude (absolute value for scalars)."""
        if self.is_vector:
            return np.sqrt(np.sum(self.values ** 2, axis=0))
        return np.abs(self.values)

    def inside_values(self):
        return self.magnitude()[self.grid.mask]

    def scaled(self, c):
        return SampledField(self.grid, c * self.values, self.boundary)

    def component(self, i):
        if not self.is_vector:
            raise InputError("scalar field has no components")
        return SampledField(self.grid, self.values[i], self.boundary)

    @classmethod
    def from_function(cls, grid, fn, boundary="zero-extension"):
        return cls(grid, fn(*grid.centers()), boundary)


# ---------------------------------------------------------------- rearrangement

@dataclass(frozen=True)
class RearrangedProfile:
    """Right-continuous step function ``f*``: value ``values[k]`` on ``[s_{k-1}, s_k)``."""
    breakpoints: np.ndarray
    values: np.ndarray

    @property
    def total_measure(self):
        return float(self.breakpoints[-1])

    def widths(self):
        return np.diff(np.concatenate([[0.0], self.breakpoints]))

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        k = np.searchsorted(self.breakpoints, s, side="right")
        out = np.where(k < self.values.size, self.values[np.minimum(k, self.values.size - 1)], 0.0)
        return out

    def distribution(self, level):
        """``|{f* > level}|``."""
        return float(np.sum(self.widths()[self.values > level]))


def rearrange(f):
    """Nonincreasing rearrangement of ``|f|`` over the inside cells."""
    vals = np.sort(f.inside_values())[::-1]
    vol = f.grid.cell_volume
    s = vol * np.arange(1, vals.size + 1)
    return RearrangedProfile(s, vals)


# ---------------------------------------------------------------- Orlicz norms

def _log_modular(values, weights, psi, lam):
    """``log sum_k w_k psi(|v_k|/lam)``; ``-inf`` for the zero field."""
    pos = values > 0
    if not np.any(pos):
        return -np.inf
    u = np.log(values[pos]) - np.log(lam)
    lp = psi.log_eval(u, strict=False)
    lw = np.log(weights[pos]) if np.ndim(weights) else np.log(weights)
    if np.any(np.isnan(lp)):
        k = int(np.flatnonzero(np.isnan(lp))[0])
        raise OverflowGuard(f"modular of {psi!r} not finite at lambda={lam:.6g}", cell=k)
    return float(logsumexp(lp + lw))


def modular(f, psi, lam=1.0):
    """``int psi(|f|/lam)`` by midpoint quadrature over the inside cells."""
    return float(np.exp(_log_modular(f.inside_values(), f.grid.cell_volume, psi, lam)))


def luxemburg_norm_profile(values, weights, psi, rtol=1e-10):
    """Luxemburg norm of a step function with ``values`` on cells of measure ``weights``."""
    values = np.abs(np.asarray(values, dtype=float))
    weights = np.broadcast_to(np.asarray(weights, dtype=float), values.shape)
    vmax = values.max(initial=0.0)
    if vmax == 0:
        return 0.0
    total = float(np.sum(weights))
    # at lam_hi every |v|/lam is <= psi^{-1}(1/|Omega|), so the modular is <= 1
    lam_hi = vmax / float(young.left_inverse(psi, 1.0 / total))
    l_hi = np.log(lam_hi)
    if not _log_modular(values, weights, psi, lam_hi) <= 1e-13:
        # numerical slack in the inverse: walk up
        for _ in range(200):
            l_hi += np.log(2.0)
            if _log_modular(values, weights, psi, np.exp(l_hi)) <= 0:
                break
        else:
            raise OverflowGuard("could not bracket the Luxemburg norm from above")
    l_lo = l_hi
    for _ in range(2000):
        l_lo -= np.log(2.0)
        if _log_modular(values, weights, psi, np.exp(l_lo)) >= 0:
            break
    else:
        raise OverflowGuard("could not bracket the Luxemburg norm from below")
    tol = 0.01 * rtol
    while l_hi - l_lo > tol:
        mid = 0.5 * (l_lo + l_hi)
        if _log_modular(values, weights, psi, np.exp(mid)) > 0:
            l_lo = mid
        else:
            l_hi = mid
    return float(np.exp(0.5 * (l_lo + l_hi)))


def luxemburg_norm(f, psi, rtol=1e-10):
    """``inf{lam > 0 : int psi(|f|/lam) <= 1}`` (vector fields: Euclidean magnitude)."""
    return luxemburg_norm_profile(f.inside_values(), f.grid.cell_volume, psi, rtol)


def lebesgue_norm(f, p):
    v = f.inside_values()
    vol = f.grid.cell_volume
    if np.isinf(p):
        return float(v.max(initial=0.0))
    if v.max(initial=0.0) == 0:
        return 0.0
    m = v.max()
    return float(m * (vol * np.sum((v / m) ** p)) ** (1.0 / p))


# ---------------------------------------------------------------- derivatives

def _axis_derivative(values, mask, h, axis):
    """Second-order derivative along ``axis`` restricted to the mask."""
    v = np.moveaxis(values, axis, -1)
    m = np.moveaxis(mask, axis, -1)
    n = v.shape[-1]
    out = np.zeros_like(v)

    def sh(a, k, fill):
        # a[..., i+k] at position i, ``fill`` outside the array
        res = np.full_like(a, fill)
        if k > 0:
            res[..., :-k] = a[..., k:]
        elif k < 0:
            res[..., -k:] = a[..., :k]
        else:
            res = a.copy()
        return res

    mp1, mm1 = sh(m, 1, False), sh(m, -1, False)
    mp2, mm2 = sh(m, 2, False), sh(m, -2, False)
    vp1, vm1 = sh(v, 1, 0.0), sh(v, -1, 0.0)
    vp2, vm2 = sh(v, 2, 0.0), sh(v, -2, 0.0)
    central = m & mp1 & mm1
    forward = m & ~central & mp1 & mp2
    backward = m & ~central & ~forward & mm1 & mm2
    out = np.where(central, (vp1 - vm1) / (2 * h), out)
    out = np.where(forward, (-3 * v + 4 * vp1 - vp2) / (2 * h), out)
    out = np.where(backward, (3 * v - 4 * vm1 + vm2) / (2 * h), out)
    orphan = m & ~(central | forward | backward)
    if np.any(orphan) or n < 3:
        raise GridError(f"fewer than 3 inside cells along a line of axis {axis}")
    return np.moveaxis(out, -1, axis)


def gradient(f):
    """Gradient of a scalar field: centred inside, one-sided second order at the mask edge."""
    if f.is_vector:
        raise InputError("gradient needs a scalar field")
    g = f.grid
    comps = [_axis_derivative(f.values, g.mask, g.spacing[a], a) for a in range(g.dim)]
    return SampledField(g, np.stack(comps), f.boundary)


def sobolev_norm(f, psi):
    """``||f|| + sum_i ||d_i f||`` in ``L^psi``."""
    grad = gradient(f)
    total = luxemburg_norm(f, psi)
    for i in range(f.grid.dim):
        total += luxemburg_norm(grad.component(i), psi)
    return total


def scaled_ball_norm(f, psi, r):
    """``||grad f|| + ||f|| / (2r)`` over the (masked) ball ``B_{2r}``."""
    if r <= 0:
        raise InputError("r must be positive")
    return luxemburg_norm(gradient(f), psi) + luxemburg_norm(f, psi) / (2.0 * r)


# ---------------------------------------------------------------- Lorentz

def lorentz_norm(f, p, q):
    """``||t^{1/p - 1/q} f*(t)||_{L^q(0, |Omega|)}``, exact for the step profile."""
    if not p > 1:
        raise InputError(f"Lorentz exponent p must exceed 1, got {p}")
    if not (q >= 1):
        raise InputError(f"Lorentz exponent q must be in [1, inf], got {q}")
    prof = f if isinstance(f, RearrangedProfile) else rearrange(f)
    v, s = prof.values, prof.breakpoints
    if v.size == 0 or v[0] == 0:
        return 0.0
    if np.isinf(q):
        return float(np.max(v * s ** (1.0 / p)))
    s0 = np.concatenate([[0.0], s[:-1]])
    w = (p / q) * (s ** (q / p) - s0 ** (q / p))
    m = v[0]
    return float(m * np.sum(w * (v / m) ** q) ** (1.0 / q))


# ---------------------------------------------------------------- I/O

_MAGIC = b"OLFIELD1"


def _header(f):
    g = f.grid
    return {"dim": g.dim, "extents": list(g.extents), "spacing": [repr(h) for h in g.spacing],
            "origin": [repr(o) for o in g.origin], "components": f.components,
            "boundary": f.boundary}


def _grid_from_header(h, mask):
    return Grid(tuple(h["extents"]), tuple(float(x) for x in h["spacing"]),
                tuple(float(x) for x in h["origin"]), mask)


def save_field(path_or_buf, f, fmt="binary"):
    """Write ``f`` as flat binary or CSV; both round-trip bit-exactly."""
    head = _header(f)
    if fmt == "binary":
        hb = json.dumps(head, sort_keys=True).encode()
        payload = (_MAGIC + struct.pack("<I", len(hb)) + hb
                   + np.packbits(f.grid.mask.ravel()).tobytes()
                   + np.ascontiguousarray(f.values, dtype="<f8").tobytes())
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(payload)
        else:
            with open(path_or_buf, "wb") as fh:
                fh.write(payload)
        return
    if fmt != "csv":
        raise InputError(f"unknown field format {fmt!r}")
    buf = io.StringIO()
    buf.write("# " + json.dumps(head, sort_keys=True) + "\n")
    cols = ["mask"] + [f"v{i}" for i in range(f.components)]
    buf.write(",".join(cols) + "\n")
    vals = f.values.reshape(f.components, -1) if f.is_vector else f.values.reshape(1, -1)
    mask = f.grid.mask.ravel()
    for k in range(mask.size):
        buf.write(str(int(mask[k])) + "," + ",".join(repr(float(x)) for x in vals[:, k]) + "\n")
    text = buf.getvalue()
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w") as fh:
            fh.write(text)


def load_field(path_or_buf, fmt="binary"):
    if fmt == "binary":
        raw = path_or_buf.read() if hasattr(path_or_buf, "read") else open(path_or_buf, "rb").read()
        if raw[:8] != _MAGIC:
            raise InputError("not a field file (bad magic)")
        (n,) = struct.unpack("<I", raw[8:12])
        head = json.loads(raw[12:12 + n].decode())
        ext = tuple(head["extents"])
        cells = int(np.prod(ext))
        nb = (cells + 7) // 8
        off = 12 + n
        mask = np.unpackbits(np.frombuffer(raw[off:off + nb], dtype=np.uint8))[:cells]
        vals = np.frombuffer(raw[off + nb:], dtype="<f8").astype(float)
        grid = _grid_from_header(head, mask.reshape(ext).astype(bool))
        shape = ext if head["components"] == 1 else (head["components"],) + ext
        return SampledField(grid, vals.reshape(shape), head["boundary"])
    text = path_or_buf.read() if hasattr(path_or_buf, "read") else open(path_or_buf).read()
    lines = text.splitlines()
    head = json.loads(lines[0][2:])
    rows = np.array([[float(x) for x in ln.split(",")] for ln in lines[2:]])
    ext = tuple(head["extents"])
    grid = _grid_from_header(head, rows[:, 0].astype(bool).reshape(ext))
    if head["components"] == 1:
        vals = rows[:, 1].reshape(ext)
    else:
        vals = rows[:, 1:].T.reshape((head["components"],) + ext)
    return SampledField(grid, vals, head["boundary"])
