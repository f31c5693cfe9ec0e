"""N-functions (Young functions) and their calculus.

A :class:`YoungFunction` is evaluated in logarithmic coordinates: ``log_eval(u)``
returns ``log psi(exp(u))``.  This keeps derived functions such as Sobolev
conjugates, whose values leave the floating point range long before their
arguments do, representable without overflow.  ``psi(t)`` is the ordinary
evaluation on top of it.

Three kinds of functions share the class:

* catalog members with a closed form (``power``, ``power-log``, ...);
* lazy numeric closures, e.g. the Legendre transform of a catalog member
  without a tabulated conjugate, evaluated by optimisation on each call;
* tabulated closures (``numeric-closure`` with a hull), piecewise linear in
  log-log coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from .errors import ConvergenceError, DomainError, InputError

__all__ = [
    "YoungFunction", "GrowthReport", "Precedence",
    "power", "power_log", "power_loglog", "entropy", "exponential",
    "exp_power", "double_exp", "quadratic_floor", "from_table", "from_spec",
    "left_inverse", "conjugate", "growth_report", "precedes", "equivalent",
    "validate", "log_grid", "tabulate",
]

INV_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
# search range, in log t, for lazy Legendre transforms and inverses
LAZY_U_RANGE = (-1e7, 1e7)


def _lazy_grid():
    """Coarse search abscissae in ``log t``: unit steps near 0, 2% steps far out."""
    far = np.geomspace(100.0, LAZY_U_RANGE[1], int(np.log(1e5) / np.log(1.02)))
    return np.concatenate([-far[::-1], np.arange(-99.0, 100.0), far])


def log_grid(t_min=1e-8, t_max=1e8, per_decade=400):
    """Log-spaced grid with ``per_decade`` points per decade, endpoints included."""
    if not (0 < t_min < t_max):
        raise InputError("log_grid needs 0 < t_min < t_max")
    n = int(round(per_decade * np.log10(t_max / t_min))) + 1
    return np.logspace(np.log10(t_min), np.log10(t_max), max(n, 2))


def _log_expm1(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        big = x + np.log1p(-np.exp(-np.abs(x)))
        small = np.log(np.expm1(np.minimum(x, 50.0)))
    return np.where(x > 30.0, big, small)


class YoungFunction:
    """An N-function evaluated through ``log psi(e^u)``.

    Instances are immutable.  ``log_hull`` is ``None`` for functions defined
    on all of ``[0, inf)``; tabulated closures carry the interval
    ``(log t_lo, log t_hi)`` covered by their table and raise :class:`DomainError` outside it, unless
    built with ``below="power"`` in which case the first table segment's
    power law is continued down to ``t = 0``.
    """

    def __init__(self, family: str, params: Mapping, logfn: Callable, *,
                 log_hull=None, closed_conjugate: Callable | None = None,
                 table=None, below="error", lazy=False):
        self.family = family
        self.lazy = lazy
        self.params = MappingProxyType(dict(params))
        self._logfn = logfn
        self._log_hull = None if log_hull is None else (float(log_hull[0]), float(log_hull[1]))
        self._closed_conjugate = closed_conjugate
        self.table = table
        self.below = below

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params.items()
                          if not isinstance(v, (dict, YoungFunction)))
        return f"YoungFunction({self.family}{', ' if inner else ''}{inner})"

    @property
    def is_tabulated(self):
        return self.table is not None

    @property
    def has_closed_conjugate(self):
        return self._closed_conjugate is not None

    @property
    def bounded(self):
        return self._log_hull is not None

    @property
    def log_hull(self):
        return LAZY_U_RANGE if self._log_hull is None else self._log_hull

    @property
    def hull(self):
        if self._log_hull is None:
            return None
        with np.errstate(over="ignore"):
            return (float(np.exp(self._log_hull[0])), float(np.exp(self._log_hull[1])))

    def log_eval(self, u, *, strict=True):
        """Return ``log psi(exp(u))``."""
        u = np.asarray(u, dtype=float)
        if self._log_hull is not None:
            ulo, uhi = self._log_hull
            tol = 1e-12 * max(1.0, abs(uhi), abs(ulo))
            too_high = u > uhi + tol
            too_low = (u < ulo - tol) & (self.below != "power")
            if strict and (np.any(too_high) or np.any(too_low)):
                bad = u[too_high | too_low]
                raise DomainError(
                    f"{self!r}: log t={bad.flat[0]:.6g} outside tabulation "
                    f"hull [{ulo:.6g}, {uhi:.6g}] in log t")
        out = self._logfn(u)
        if strict and self.lazy and not np.all(np.isfinite(out)):
            raise ConvergenceError(f"{self!r}: supremum not attained inside the search range")
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(np.isnan(t)):
            raise DomainError("Young functions are defined for t >= 0 only")
        pos = t > 0
        out = np.zeros_like(t)
        if np.any(pos):
            with np.errstate(over="ignore"):
                out[pos] = np.exp(self.log_eval(np.log(t[pos])))
        return out if out.ndim else float(out)

    def describe(self):
        """JSON-friendly description (configs use the same keys)."""
        out = {"family": self.family}
        for k, v in self.params.items():
            out[k] = v.describe() if isinstance(v, YoungFunction) else v
        return out


# ---------------------------------------------------------------- catalog

def _check_exponent(name, value, lower=1.0):
    if not np.isfinite(value) or value <= lower:
        raise InputError(f"{name} must be > {lower}, got {value}")


def power(q, c=1.0):
    """``c * t**q``."""
    q, c = float(q), float(c)
    _check_exponent("q", q)
    if c <= 0:
        raise InputError("power: scale c must be positive")
    logc = np.log(c)

    def conj():
        qq = q / (q - 1.0)
        return power(qq, (q - 1.0) * c * (c * q) ** (-qq))

    return YoungFunction("power", {"q": q, "c": c},
                         lambda u: logc + q * np.asarray(u), closed_conjugate=conj)


def power_log(q, alpha, shift=np.e):
    """``t**q * log(shift + t)**alpha``.

    ``shift = e`` (default) gives an N-function for every ``q > 1`` and real
    ``alpha`` that behaves like ``t**q`` at 0; ``shift = 1`` behaves like
    ``t**(q + alpha)`` at 0 and is used for the ``s log(1+s)`` scales.
    """
    q, alpha, shift = float(q), float(alpha), float(shift)
    _check_exponent("q", q)
    if shift == 1.0 and q + alpha <= 1.0:
        raise InputError("power-log with shift 1 needs q + alpha > 1")
    if shift < 1.0:
        raise InputError("power-log shift must be >= 1")
    lshift = np.log(shift)

    def logfn(u):
        u = np.asarray(u, dtype=float)
        if shift == 1.0:
            with np.errstate(divide="ignore", over="ignore"):
                # log(log1p(t)) accurate for tiny t as well
                inner = np.where(u < -20.0, u - 0.5 * np.exp(u),
                                 np.log(np.logaddexp(0.0, u)))
        else:
            inner = np.log(np.logaddexp(lshift, u))
        return q * u + alpha * inner

    return YoungFunction("power-log", {"q": q, "alpha": alpha, "shift": shift}, logfn)


def power_loglog(q, alpha):
    """``t**q * log(log(e**e + t))**alpha``; ``~ t**q (log log t)**alpha`` at infinity."""
    q, alpha = float(q), float(alpha)
    _check_exponent("q", q)

    def logfn(u):
        u = np.asarray(u, dtype=float)
        return q * u + alpha * np.log(np.log(np.logaddexp(np.e, u)))

    return YoungFunction("power-loglog", {"q": q, "alpha": alpha}, logfn)


def _entropy_log(u):
    u = np.asarray(u, dtype=float)
    t = np.exp(np.minimum(u, 700.0))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        series = np.log(t * t / 2.0 * (1.0 - t / 3.0 + t * t / 6.0))
        direct = np.log((1.0 + t) * np.log1p(t) - t)
        huge = u + np.log(u - 1.0 + (u + 1.0) * np.exp(-u))
    return np.where(u < np.log(1e-3), series, np.where(u > 600.0, huge, direct))


def _exponential_log(u):
    u = np.asarray(u, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        s = np.exp(u)
        series = np.log(s * s / 2.0 * (1.0 + s / 3.0 + s * s / 12.0))
        direct = np.log(np.expm1(np.minimum(s, 700.0)) - s)
        huge = s + np.log1p(-(s + 1.0) * np.exp(-s))
    return np.where(u < np.log(1e-3), series, np.where(s > 40.0, huge, direct))


def entropy():
    """``(1+t) log(1+t) - t``; conjugate to :func:`exponential`."""
    return YoungFunction("entropy", {}, _entropy_log, closed_conjugate=exponential)


def exponential():
    """``e**s - s - 1``; conjugate to :func:`entropy`."""
    return YoungFunction("exponential", {}, _exponential_log, closed_conjugate=entropy)


def exp_power(p):
    """``exp(t**p) - 1`` for ``p > 1``."""
    p = float(p)
    _check_exponent("p", p)
    def logfn(u):
        with np.errstate(over="ignore"):
            return _log_expm1(np.exp(p * np.asarray(u, dtype=float)))

    return YoungFunction("exp-power", {"p": p}, logfn)


def double_exp(p):
    """``exp(exp(t**p)) - e`` for ``p > 1``."""
    p = float(p)
    _check_exponent("p", p)

    def logfn(u):
        with np.errstate(over="ignore"):
            x = np.expm1(np.exp(p * np.asarray(u, dtype=float)))
        return 1.0 + _log_expm1(x)

    return YoungFunction("double-exp", {"p": p}, logfn)


def quadratic_floor(psi, b=1.0):
    """``max(psi(t), b t**2)``.

    Changes ``psi`` only near 0 (for functions growing faster than ``t**2``),
    so the Orlicz space on a bounded domain is unchanged while the Sobolev
    construction, which needs integrability at 0, becomes available when
    ``psi`` grows like ``t**d`` or faster near 0.
    """
    b = float(b)
    logb = np.log(b)

    def logfn(u):
        return np.maximum(psi.log_eval(u), logb + 2.0 * np.asarray(u, dtype=float))

    params = dict(psi.params)
    params["floor"] = b
    return YoungFunction(psi.family, params, logfn)


def from_table(log_t, log_psi, *, family="numeric-closure", params=None, below="error"):
    """Tabulated closure, linear in ``(log t, log psi)``."""
    log_t = np.asarray(log_t, dtype=float)
    log_psi = np.asarray(log_psi, dtype=float)
    ok = np.isfinite(log_t) & np.isfinite(log_psi)
    log_t, log_psi = log_t[ok], log_psi[ok]
    if log_t.size < 2 or np.any(np.diff(log_t) <= 0):
        raise InputError("tabulation needs >= 2 strictly increasing abscissae")
    slope_lo = (log_psi[1] - log_psi[0]) / (log_t[1] - log_t[0])

    def logfn(u):
        u = np.asarray(u, dtype=float)
        out = np.interp(u, log_t, log_psi)
        if below == "power":
            out = np.where(u < log_t[0], log_psi[0] + slope_lo * (u - log_t[0]), out)
        return out

    return YoungFunction(family, params or {}, logfn,
                         log_hull=(log_t[0], log_t[-1]),
                         table=(log_t, log_psi), below=below)


def tabulate(psi, t_min, t_max, per_decade=400, **kw):
    """Freeze ``psi`` into a tabulated closure on ``[t_min, t_max]``."""
    t = log_grid(t_min, t_max, per_decade)
    u = np.log(t)
    return from_table(u, psi.log_eval(u), params={"of": psi.describe(), "op": "tabulate"}, **kw)


_FAMILIES = {
    "power": lambda c: power(c["q"], c.get("c", 1.0)),
    "power-log": lambda c: power_log(c["q"], c.get("alpha", 0.0), c.get("shift", np.e)),
    "power-loglog": lambda c: power_loglog(c["q"], c.get("alpha", 0.0)),
    "entropy": lambda c: entropy(),
    "exponential": lambda c: exponential(),
    "exp-power": lambda c: exp_power(c.get("p", c.get("q"))),
    "double-exp": lambda c: double_exp(c.get("p", c.get("q"))),
}


def from_spec(spec):
    """Build a catalog function from ``{"family": tag, "q": .., "alpha": ..}``."""
    if not isinstance(spec, Mapping) or "family" not in spec:
        raise InputError("function spec must be an object with a 'family' key")
    fam = spec["family"]
    if fam not in _FAMILIES:
        raise InputError(f"unknown family {fam!r}; known: {sorted(_FAMILIES)}")
    try:
        psi = _FAMILIES[fam](spec)
    except KeyError as exc:
        raise InputError(f"family {fam!r} requires parameter {exc.args[0]!r}") from None
    if spec.get("floor"):
        psi = quadratic_floor(psi, spec["floor"])
    return psi


# ---------------------------------------------------------------- inverse

def left_inverse(psi, s, rtol=1e-12):
    """``inf{t >= 0 : psi(t) > s}``, by bisection in ``log t``."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(np.isnan(s)):
        raise DomainError("left_inverse needs s >= 0")
    out = np.zeros_like(s)
    pos = s > 0
    if np.any(pos):
        out[pos] = np.exp(_log_left_inverse(psi, np.log(s[pos]), rtol))
    return out if out.ndim else float(out)


def _log_left_inverse(psi, ls, rtol=1e-12):
    ls = np.atleast_1d(np.asarray(ls, dtype=float))
    if psi.is_tabulated:
        lt, lp = psi.table
        if np.any(ls > lp[-1]) or (psi.below != "power" and np.any(ls < lp[0])):
            raise DomainError(f"{psi!r}: value outside the tabulated range")
        # breakpoint search without monotone smoothing: inf{t: psi(t) > s}
        lp_run = np.maximum.accumulate(lp)
        k = np.searchsorted(lp_run, ls, side="right")
        k = np.clip(k, 1, lp.size - 1)
        x0, x1, y0, y1 = lt[k - 1], lt[k], lp_run[k - 1], lp_run[k]
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(y1 > y0, (ls - y0) / (y1 - y0), 0.0)
        out = x0 + np.clip(frac, 0.0, 1.0) * (x1 - x0)
        if psi.below == "power":
            slope = (lp[1] - lp[0]) / (lt[1] - lt[0])
            out = np.where(ls < lp[0], lt[0] + (ls - lp[0]) / slope, out)
        return out
    lo = np.full_like(ls, -50.0)
    hi = np.full_like(ls, 50.0)
    with np.errstate(invalid="ignore", over="ignore"):
        for _ in range(64):
            short = psi.log_eval(hi, strict=False) <= ls
            deep = psi.log_eval(lo, strict=False) > ls
            if not (np.any(short) or np.any(deep)):
                break
            hi = np.where(short, 2.0 * hi, hi)
            lo = np.where(deep, 2.0 * lo, lo)
            if np.max(hi) > LAZY_U_RANGE[1] or np.min(lo) < LAZY_U_RANGE[0]:
                raise ConvergenceError(f"{psi!r}: cannot bracket the inverse")
        while np.max((hi - lo) / np.maximum(1.0, np.abs(hi))) > rtol:
            mid = 0.5 * (lo + hi)
            above = psi.log_eval(mid) > ls
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
    return hi


# ---------------------------------------------------------------- conjugation

def _log_objective(psi, ls, u):
    """``log(s e^u - psi(e^u))`` (``-inf`` where the objective is <= 0)."""
    a = ls + u
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        b = psi.log_eval(u, strict=False)
        diff = np.minimum(b - a, 0.0)
        val = a + np.log1p(-np.exp(diff))
    return np.where((b < a) & np.isfinite(val), val, -np.inf)


def log_legendre(psi, ls, u_range=None, step=1.0, iters=90, chunk=256, edges=False):
    """``log psi*(e^ls)`` by a coarse grid supremum plus golden-section refinement.

    Returns ``(values, argmax_u)``.  Points whose coarse maximiser sits on the
    edge of the search range are returned as ``nan``: the supremum is not
    attained inside it.  With ``edges=True`` they become ``+inf`` (maximiser
    beyond the top) or ``-inf`` (below the bottom) instead, which is what an
    enclosing Legendre transform needs.
    """
    ls = np.atleast_1d(np.asarray(ls, dtype=float))
    if u_range is None and not psi.is_tabulated:
        grid = _lazy_grid()
        n = grid.size - 1
    else:
        ulo, uhi = u_range if u_range is not None else psi.log_hull
        n = max(int(np.ceil((uhi - ulo) / step)), 2)
        grid = np.linspace(ulo, uhi, n + 1)
    coarse = psi.log_eval(grid, strict=False)
    vals = np.full(ls.shape, np.nan)
    arg = np.full(ls.shape, np.nan)
    for start in range(0, ls.size, chunk):
        sl = slice(start, start + chunk)
        lsc = ls[sl, None]
        a = lsc + grid[None, :]
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            obj = a + np.log1p(-np.exp(np.minimum(coarse[None, :] - a, 0.0)))
        obj = np.where((coarse[None, :] < a) & np.isfinite(obj), obj, -np.inf)
        k = np.argmax(obj, axis=1)
        kmax = np.max(obj, axis=1)
        interior = (k > 0) & (k < n) & np.isfinite(kmax)
        lo = grid[np.clip(k - 1, 0, n)]
        hi = grid[np.clip(k + 1, 0, n)]
        lsv = ls[sl]
        # golden section on a unimodal objective
        x1 = hi - INV_GOLDEN * (hi - lo)
        x2 = lo + INV_GOLDEN * (hi - lo)
        f1 = _log_objective(psi, lsv, x1)
        f2 = _log_objective(psi, lsv, x2)
        for _ in range(iters):
            left = f1 >= f2
            hi = np.where(left, x2, hi)
            lo = np.where(left, lo, x1)
            x2n = np.where(left, x1, lo + INV_GOLDEN * (hi - lo))
            x1n = np.where(left, hi - INV_GOLDEN * (hi - lo), x2)
            f2n = np.where(left, f1, np.nan)
            f1n = np.where(left, np.nan, f2)
            need1 = np.isnan(f1n)
            need2 = np.isnan(f2n)
            f1n[need1] = _log_objective(psi, lsv[need1], x1n[need1])
            f2n[need2] = _log_objective(psi, lsv[need2], x2n[need2])
            x1, x2, f1, f2 = x1n, x2n, f1n, f2n
        best = np.maximum(np.maximum(f1, f2), kmax)
        if edges:
            fill = np.where(k >= n, np.inf, -np.inf)
        else:
            fill = np.nan
        vals[sl] = np.where(interior, best, fill)
        arg[sl] = np.where(interior, 0.5 * (lo + hi), np.nan)
    return vals, arg


def _log_slope(lt, lp):
    """Second-order slope on a nonuniform grid, written to avoid overflow for huge spacings."""
    dx = np.diff(lt)
    sl = np.diff(lp) / dx
    w = 1.0 / (1.0 + dx[1:] / dx[:-1])          # dx1 / (dx1 + dx2)
    inner = (1.0 - w) * sl[:-1] + w * sl[1:]
    return np.concatenate([[sl[0]], inner, [sl[-1]]])


def conjugate(psi, *, per_decade=200):
    """Young conjugate ``psi*(s) = sup_t (s t - psi(t))``.

    Closed form where the catalog knows it; a lazy numeric closure for other
    functions defined on ``[0, inf)``; a tabulated closure for tabulated
    functions (covering the slopes attained strictly inside their hull).
    """
    if psi.has_closed_conjugate:
        return psi._closed_conjugate()
    if not psi.is_tabulated:
        def logfn(u):
            u = np.asarray(u, dtype=float)
            vals, _ = log_legendre(psi, u.ravel(), edges=True)
            return vals.reshape(u.shape)

        return YoungFunction("numeric-closure", {"of": psi, "op": "conjugate"}, logfn,
                             lazy=True)
    lt, lp = psi.table
    # parametric Legendre transform: at t_k the supremum is attained for the
    # slope s_k = psi'(t_k) = g_k psi(t_k)/t_k, g = d log psi / d log t, and
    # psi*(s_k) = (g_k - 1) psi(t_k)
    g = _log_slope(lt, lp)
    ok = g > 1.0 + 1e-9
    ls = lp - lt + np.log(np.where(ok, g, 1.0))
    lv = lp + np.log(np.where(ok, g - 1.0, 1.0))
    ok[[0, -1]] = False
    ls, lv = ls[ok], lv[ok]
    inc = np.concatenate([[True], np.diff(ls) > 0])
    inc &= np.maximum.accumulate(ls) <= ls
    if inc.sum() < 3:
        raise ConvergenceError("tabulated conjugate: too few superlinear nodes")
    return from_table(ls[inc], lv[inc], params={"of": psi, "op": "conjugate"})


# ---------------------------------------------------------------- growth

@dataclass(frozen=True)
class GrowthReport:
    delta2: bool
    ell: float
    nabla2: bool
    ell_conjugate: float
    p_minus: float
    p_plus: float
    L: float
    window: tuple

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _doubling(psi, u):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        r = psi.log_eval(u + np.log(2.0)) - psi.log_eval(u)
    if not np.all(np.isfinite(r)):
        return False, np.inf
    per_decade = (u.size - 1) / max((u[-1] - u[0]) / np.log(10.0), 1e-12)
    back = int(round(2 * per_decade))
    ell = float(np.exp(min(np.max(r), 700.0)))
    # unbounded trend: ratio grew by more than 10% over the last two decades
    if back < u.size and r[-1] - r[-1 - back] > np.log(1.1):
        return False, ell
    return True, ell


def growth_report(psi, window=(1e-8, 1e8), per_decade=400, alphas=(2.0, 4.0, 8.0, 16.0)):
    """Delta_2 / nabla_2 verdicts and dilation index estimates on a test grid.

    ``p_minus`` and ``p_plus`` are the inf and sup over the grid of
    ``log(psi(a t) / psi(t)) / log a`` for ``a`` in ``alphas``.  ``L`` is the
    largest factor by which the two-sided power bounds built from these
    estimates fail on a finer set of dilations in ``(1, 16]``.
    """
    t = log_grid(window[0], window[1], per_decade)
    u = np.log(t)
    delta2, ell = _doubling(psi, u)
    try:
        nabla2, ell_c = _doubling(conjugate(psi), u)
    except ConvergenceError:
        nabla2, ell_c = False, np.inf
    base = psi.log_eval(u)
    idx = []
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for a in alphas:
            idx.append((psi.log_eval(u + np.log(a)) - base) / np.log(a))
    idx = np.concatenate(idx)
    if np.all(np.isfinite(idx)):
        p_minus, p_plus = float(np.min(idx)), float(np.max(idx))
        worst = 0.0
        for a in np.geomspace(1.05, 16.0, 40):
            d = psi.log_eval(u + np.log(a)) - base
            worst = max(worst, float(np.max(p_minus * np.log(a) - d)),
                        float(np.max(d - p_plus * np.log(a))))
        L = float(np.exp(worst))
    else:
        p_minus, p_plus, L = float(np.nanmin(idx)), np.inf, np.inf
    return GrowthReport(delta2, ell, nabla2, ell_c, p_minus, p_plus, L, tuple(window))


# ---------------------------------------------------------------- ordering

@dataclass(frozen=True)
class Precedence:
    holds: bool
    c: float | None
    witness_t: float | None = None

    def __bool__(self):
        return self.holds


def _fails(psi1, psi2, u, lc, slack, top=np.inf):
    with np.errstate(invalid="ignore", over="ignore"):
        a = psi1.log_eval(u)
        b = psi2.log_eval(np.minimum(u + lc, top))
    bad = a > b + slack * np.maximum(1.0, np.abs(b))
    bad &= ~(np.isinf(a) & np.isinf(b) & (a > 0) & (b > 0))
    return bad


def _in_hull(psi, u):
    if not psi.bounded:
        return np.ones(u.shape, dtype=bool)
    lo, hi = psi.log_hull
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    ok = u <= hi + tol
    if psi.below != "power":
        ok &= u >= lo - tol
    return ok


def precedes(psi1, psi2, c_max=8.0, t=None, slack=1e-10, clip=False):
    """Is ``psi1(t) <= psi2(c t)`` on the grid for some ``c`` in ``[1, c_max]``?

    Returns the smallest such ``c`` (to relative accuracy 1e-9) or, when
    ``c_max`` does not suffice, the first failing ``t``.  With ``clip=True``
    dilated arguments beyond the hull of a tabulated ``psi2`` are clipped to
    its end, a lower bound for the increasing ``psi2``: a positive verdict
    stays sound, a negative one may be an artefact of the hull.
    """
    if c_max <= 1:
        raise InputError("c_max must exceed 1")
    t = log_grid() if t is None else np.asarray(t, dtype=float)
    u = np.log(t)
    # tabulated closures: only compare where every dilated evaluation is covered
    lc_max = np.log(c_max)
    inside = _in_hull(psi1, u) & _in_hull(psi2, u)
    if clip:
        top = psi2.log_hull[1] if psi2.bounded else np.inf
    else:
        inside &= _in_hull(psi2, u + lc_max)
        top = np.inf
    if inside.sum() < 2:
        raise DomainError("comparison grid does not meet the tabulation hulls")
    t, u = t[inside], u[inside]

    def fails(lc):
        return _fails(psi1, psi2, u, lc, slack, top)

    bad = fails(lc_max)
    if np.any(bad):
        return Precedence(False, None, float(t[np.argmax(bad)]))
    if not np.any(fails(0.0)):
        return Precedence(True, 1.0)
    lo, hi = 0.0, lc_max
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if np.any(fails(mid)):
            lo = mid
        else:
            hi = mid
    return Precedence(True, float(np.exp(hi)))


def equivalent(psi1, psi2, c_max=8.0, t=None):
    """``psi1 ~ psi2`` on the grid; returns ``(verdict, witness c)``."""
    a = precedes(psi1, psi2, c_max, t)
    b = precedes(psi2, psi1, c_max, t)
    if a.holds and b.holds:
        return True, max(a.c, b.c)
    return False, None


# ---------------------------------------------------------------- validity

def validate(psi, t=None, small_ratio=1e-2, large_ratio=10.0):
    """Check the N-function axioms on a grid; returns a dict of verdicts."""
    t = log_grid(1e-6, 1e6, 100) if t is None else np.asarray(t, dtype=float)
    v = psi(t)
    lv = psi.log_eval(np.log(t))
    with np.errstate(invalid="ignore"):
        dlv = np.diff(lv)
    dlv[np.isinf(lv[1:]) & np.isinf(lv[:-1])] = 0.0
    mono = bool(np.all(dlv >= -1e-12 * np.maximum(1.0, np.abs(lv[1:]))))
    a, b = t[:-1], t[1:]
    mid = psi(0.5 * (a + b))
    convex = bool(np.all(mid <= 0.5 * (v[:-1] + v[1:]) * (1 + 1e-10) + 1e-300))
    # midpoint convexity across long chords as well
    h = t.size // 2
    wide = psi(0.5 * (t[:h] + t[h:2 * h]))
    convex &= bool(np.all(wide <= 0.5 * (v[:h] + v[h:2 * h]) * (1 + 1e-10)))
    zero = float(psi(0.0)) == 0.0
    # ratio psi(t)/t against its value at the geometric middle of the grid
    ref = float(psi(np.sqrt(t[0] * t[-1]))) / np.sqrt(t[0] * t[-1])
    sub = bool(v[0] / t[0] < small_ratio * ref)
    sup = bool(v[-1] / t[-1] > large_ratio * ref)
    return {"valid": mono and convex and zero and sub and sup, "monotone": mono,
            "convex": convex, "zero_at_zero": zero, "sublinear_at_0": sub,
            "superlinear_at_inf": sup}
