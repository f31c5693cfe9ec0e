"""Rearrangement-invariant spaces: descriptors, Boyd indices, class (C), Riesz-potential pairs.

Spaces are described on ``(0, |Omega|)`` through their representation norm
on nonincreasing step profiles (:class:`~orlicz_lab.fields.RearrangedProfile`).
Three kinds are supported: Lebesgue ``L^p``, Lorentz ``L^{p,q}`` with norm
``||t^{1/p - 1/q} f*(t)||_{L^q}``, and Orlicz ``L^psi`` (Luxemburg norm).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import young
from .embeddings import _cell_log_integrals, log_grid_u
from .errors import DomainError, InputError, QuadratureError
from .fields import RearrangedProfile, lorentz_norm, luxemburg_norm_profile
from .report import Check, VerificationReport

__all__ = [
    "RISpace", "BoydReport", "ClassCReport", "StieltjesTransform", "fundamental_function",
    "boyd_indices", "stieltjes", "y_norm", "class_c_check", "riesz_transforms",
    "cianchi_conditions", "classical_pairs", "classical_pairs_suite", "mismatch_pair",
    "default_battery", "dilate",
]

BOYD_S = 2.0 ** np.arange(4, 15)
VARPI_R = (1e-1, 1e-2, 1e-3, 1e-4)
ASYMPTOTIC_T = (np.e, 1e300)


def _dual(p):
    if np.isinf(p):
        return 1.0
    if p == 1:
        return np.inf
    return p / (p - 1.0)


# ---------------------------------------------------------------- descriptors

@dataclass(frozen=True)
class RISpace:
    """``kind`` is ``"lebesgue"``, ``"lorentz"`` or ``"orlicz"``."""
    kind: str
    p: float = None
    q: float = None
    psi: young.YoungFunction = None
    measure_total: float = 1.0
    associate_of: str = None

    def __post_init__(self):
        if self.kind not in ("lebesgue", "lorentz", "orlicz"):
            raise InputError(f"unknown space kind {self.kind!r}")
        if not self.measure_total > 0:
            raise InputError("measure_total must be positive")
        if self.kind in ("lebesgue", "lorentz") and self.associate_of is None:
            if not 1 < self.p < np.inf:
                raise InputError(f"{self.kind} exponent p must lie in (1, inf), got {self.p}")
        if self.kind == "lorentz" and not 1 <= self.q <= np.inf:
            raise InputError(f"Lorentz exponent q must lie in [1, inf], got {self.q}")
        if self.kind == "orlicz" and not isinstance(self.psi, young.YoungFunction):
            raise InputError("Orlicz spaces need a YoungFunction")

    @classmethod
    def lebesgue(cls, p, measure_total=1.0):
        return cls("lebesgue", p=float(p), measure_total=measure_total)

    @classmethod
    def lorentz(cls, p, q, measure_total=1.0):
        return cls("lorentz", p=float(p), q=float(q), measure_total=measure_total)

    @classmethod
    def orlicz(cls, psi, measure_total=1.0):
        return cls("orlicz", psi=psi, measure_total=measure_total)

    def __repr__(self):
        if self.kind == "lebesgue":
            return f"L^{self.p:g}"
        if self.kind == "lorentz":
            return f"L^({self.p:g},{self.q:g})"
        return f"L^psi[{self.psi.family}]"

    # ------------------------------------------------------------ norms

    def norm(self, prof):
        """Representation norm of a nonincreasing step profile."""
        v, w = prof.values, prof.widths()
        if v.size == 0 or v.max() == 0:
            return 0.0
        if self.kind == "lebesgue":
            if np.isinf(self.p):
                return float(v.max())
            m = v.max()
            return float(m * np.sum(w * (v / m) ** self.p) ** (1.0 / self.p))
        if self.kind == "lorentz":
            return lorentz_norm(prof, self.p, self.q)
        return luxemburg_norm_profile(v, w, self.psi)

    def associate(self):
        """Associate space ``X'``: dual exponents; for Orlicz the conjugate Luxemburg norm.

        The Orlicz associate norm is within a factor 2 of the conjugate
        Luxemburg norm returned here.
        """
        if self.kind == "lebesgue":
            return RISpace("lebesgue", p=_dual(self.p), measure_total=self.measure_total,
                           associate_of=repr(self))
        if self.kind == "lorentz":
            return RISpace("lorentz", p=_dual(self.p), q=_dual(self.q),
                           measure_total=self.measure_total, associate_of=repr(self))
        return RISpace("orlicz", psi=_tabulated_conjugate(self.psi),
                       measure_total=self.measure_total, associate_of=repr(self))

    def power_norm(self, a, R):
        """``||s^{-a} chi_(0,R)(s)||_X`` (``inf`` when the power is not in ``X``)."""
        if not 0 < R <= self.measure_total * (1 + 1e-12):
            raise DomainError("R must lie in (0, |Omega|]")
        if self.kind == "orlicz":
            return _orlicz_power_norm(self.psi, a, R)
        p = self.p
        q = p if self.kind == "lebesgue" else self.q
        e = 1.0 / p - a
        if abs(e) < 1e-12:
            e = 0.0
        if np.isinf(q):
            if e < 0 or (e == 0 and np.isinf(p)):
                return np.inf
            return float(R ** e)
        if e <= 0:
            return np.inf
        if self.kind == "lebesgue":
            return float((R ** (e * p) / (e * p)) ** (1.0 / p))
        # int_0^R t^{q(1/p - a) - 1} dt with the Lorentz weight t^{1/p - 1/q}
        return float((R ** (e * q) / (e * q)) ** (1.0 / q))


def _tabulated_conjugate(psi):
    if psi.has_closed_conjugate or psi.is_tabulated:
        return young.conjugate(psi)
    u = np.linspace(-60.0, 60.0, 6001)
    lp = psi.log_eval(u, strict=False)
    ok = np.isfinite(lp)
    return young.conjugate(young.from_table(u[ok], lp[ok], params={"of": psi}))


def _orlicz_power_norm(phi, a, R):
    """Luxemburg norm of ``s^{-a}`` on ``(0, R)`` under ``phi``.

    With ``y = s^{-a}`` the modular is ``(1/a) int_{R^{-a}}^inf phi(y/lam) y^{-1/a-1} dy``,
    integrated in ``v = log y`` with the piecewise-power cell rule.
    """
    v0 = -a * np.log(R)

    def log_mod(llam):
        lo, hi = phi.log_hull
        v = np.linspace(v0, min(v0 + 400.0, hi + llam - 1e-9), 20001)
        if v[-1] <= v0:
            return np.inf
        L = phi.log_eval(v - llam, strict=False) - v / a
        if not np.all(np.isfinite(L)):
            return np.inf
        slope = (L[-1] - L[-2001]) / (v[-1] - v[-2001])
        if slope > -1e-3:
            return np.inf
        cells = _cell_log_integrals(v, L)
        tail = L[-1] - np.log(-slope)
        return float(np.logaddexp(np.logaddexp.reduce(cells), tail) - np.log(a))

    if not np.isfinite(log_mod(0.0)) and not np.isfinite(log_mod(30.0)):
        return np.inf
    lo, hi = -5.0, 5.0
    for _ in range(60):
        if log_mod(hi) < 0:
            break
        hi += 5.0
    for _ in range(60):
        if log_mod(lo) > 0:
            break
        lo -= 5.0
    try:
        root = optimize.brentq(log_mod, lo, hi, xtol=1e-12)
    except ValueError as exc:
        raise QuadratureError(f"cannot bracket the Luxemburg norm of s^-{a}") from exc
    return float(np.exp(root))


def fundamental_function(X, t):
    """``phi_X(t) = ||chi_(0,t)||_X`` for ``0 < t <= |Omega|``."""
    t = float(t)
    if not 0 < t <= X.measure_total * (1 + 1e-12):
        raise DomainError(f"fundamental function needs 0 < t <= {X.measure_total}")
    return X.norm(RearrangedProfile(np.array([t]), np.array([1.0])))


# ---------------------------------------------------------------- Boyd indices

def dilate(prof, s):
    """``f(./s)``: breakpoints stretched by ``s``."""
    return RearrangedProfile(prof.breakpoints * s, prof.values)


def default_battery():
    """Indicators, geometric steps and truncated power steps on ``(0, inf)``."""
    out = [RearrangedProfile(np.array([1.0]), np.array([1.0]))]
    b = 2.0 ** np.arange(-20, 1)
    for c in (0.1, 0.3, 0.6, 0.9):
        out.append(RearrangedProfile(b, b ** (-c)))
    out.append(RearrangedProfile(np.array([0.25, 1.0]), np.array([2.0, 1.0])))
    k = np.arange(1, 41, dtype=float)
    out.append(RearrangedProfile(k, 1.0 / k))
    return out


@dataclass
class BoydReport:
    lower: float
    upper: float
    slopes_large: list
    slopes_small: list
    flag: str = ""

    @property
    def ok(self):
        return not self.flag

    def as_dict(self):
        return {"lower": self.lower, "upper": self.upper, "flag": self.flag,
                "slopes_large": self.slopes_large, "slopes_small": self.slopes_small}


def _profile_key(prof):
    v = prof.values / prof.values.max()
    return (prof.breakpoints.size, tuple(np.round(prof.breakpoints / prof.breakpoints[-1], 12)),
            tuple(np.round(v, 12)))


def _extrapolate(s, slopes):
    """Limit of ``slopes`` as ``|log s| -> inf`` from a fit ``a + b / log s``."""
    x = 1.0 / np.log(s)
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.asarray(slopes), rcond=None)
    return float(coef[0])


def boyd_indices(X, battery=None, s_values=BOYD_S):
    """Boyd indices from the dilation sweep ``h_X(s) = sup ||f(./s)|| / ||f||``.

    Profiles live on ``(0, inf)``; the upper index is the extrapolated limit
    of ``log h(s) / log s`` along ``s_values``, the lower one along ``1/s_values``.
    """
    battery = default_battery() if battery is None else list(battery)
    nonzero = [f for f in battery if f.values.size and f.values.max() > 0]
    distinct = {_profile_key(f) for f in nonzero}
    s_values = np.asarray(s_values, dtype=float)
    if len(distinct) < 2:
        return BoydReport(np.nan, np.nan, [], [], flag="insufficient battery")
    base = [X.norm(f) for f in nonzero]

    def h(s):
        return max(X.norm(dilate(f, s)) / n0 for f, n0 in zip(nonzero, base))

    large = [float(np.log(h(s)) / np.log(s)) for s in s_values]
    small = [float(np.log(h(1.0 / s)) / np.log(1.0 / s)) for s in s_values]
    upper = _extrapolate(s_values, large)
    lower = _extrapolate(1.0 / s_values, small)
    return BoydReport(min(lower, upper), max(lower, upper), large, small)


# ---------------------------------------------------------------- Stieltjes

class StieltjesTransform:
    """``(S_a f)(t) = t^{1/a-1} int_0^t f + int_t^{|Omega|} f(s) s^{1/a-1} ds`` for a step ``f``."""

    def __init__(self, prof, a, measure_total=None):
        if not a > 1:
            raise InputError("the Stieltjes weight needs a > 1")
        if np.any(prof.values < 0):
            raise InputError("the Stieltjes transform needs a nonnegative profile")
        self.a = float(a)
        self.prof = prof
        self.total = prof.total_measure if measure_total is None else float(measure_total)
        b = prof.breakpoints
        self._b0 = np.concatenate([[0.0], b[:-1]])
        self._b1 = b

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0) or np.any(t > self.total * (1 + 1e-12)):
            raise DomainError("S_a is evaluated on (0, |Omega|]")
        e = 1.0 / self.a
        b0, b1, v = self._b0, self._b1, self.prof.values
        # cumulative integrals at the breakpoints, then the partial cell containing t
        F = np.concatenate([[0.0], np.cumsum(v * (b1 - b0))])
        cell = v * (b1 ** e - b0 ** e) / e
        G = np.concatenate([np.cumsum(cell[::-1])[::-1], [0.0]])
        tt = t.ravel()
        k = np.searchsorted(b1, tt, side="left")
        inside = k < v.size
        kk = np.minimum(k, v.size - 1)
        head = np.where(inside, F[kk] + v[kk] * (tt - b0[kk]), F[-1])
        tail = np.where(inside, G[kk + 1] + v[kk] * (b1[kk] ** e - tt ** e) / e, 0.0)
        out = tt ** (e - 1.0) * head + tail
        return out.reshape(t.shape) if t.ndim else float(out[0])

    def at_breakpoints(self):
        return self._b1.copy(), self(self._b1)


def stieltjes(prof, a, measure_total=None):
    return StieltjesTransform(prof, a, measure_total)


def _sample_profile(fn, total, breakpoints=(), n=600, floor=1e-12):
    """Step profile of a nonincreasing function: value at the geometric cell midpoint."""
    b = np.unique(np.concatenate([np.geomspace(floor * total, total, n),
                                  np.asarray(breakpoints, dtype=float)]))
    b = b[(b > 0) & (b <= total)]
    b0 = np.concatenate([[b[0] / 2.0], b[:-1]])
    mid = np.sqrt(b0 * b)
    return RearrangedProfile(b, np.asarray(fn(mid), dtype=float))


def y_norm(X, prof, d, alpha=1.0):
    """``||S_{d/alpha}(f*)||_X`` (the optimal domain norm)."""
    S = stieltjes(prof, d / alpha, X.measure_total)
    total = min(X.measure_total, prof.total_measure) if np.isfinite(X.measure_total) \
        else prof.total_measure
    return X.norm(_sample_profile(S, total, prof.breakpoints))


# ---------------------------------------------------------------- class (C)

@dataclass
class ClassCReport:
    space: str
    d: int
    alpha: float
    c_i: bool
    c_ii: bool
    c_iii: bool
    c_iv: bool
    measured: dict = field(default_factory=dict)
    precondition: bool = None

    @property
    def overall(self):
        return bool(self.c_i and self.c_ii and self.c_iii and self.c_iv)

    def as_dict(self):
        return {"space": self.space, "d": self.d, "alpha": self.alpha, "C-i": self.c_i,
                "C-ii": self.c_ii, "C-iii": self.c_iii, "C-iv": self.c_iv,
                "overall": self.overall, "precondition": self.precondition,
                "measured": self.measured}


def _membership_exponent(X):
    """A power ``c`` with ``s^{-c}`` comfortably inside ``X`` near 0."""
    if X.kind in ("lebesgue", "lorentz"):
        return 0.5 / X.p
    return 0.5 / max(young.growth_report(X.psi, (1e2, 1e8), 50).p_plus, 1.0)


def product_battery(X, d, n=20, cells=4000, seed=0):
    """Factorized ``h = f g`` with ``f in L^d`` and ``g in X`` on ``(0, |Omega|)``."""
    rng = np.random.default_rng(seed)
    total = X.measure_total
    x = (np.arange(cells) + 0.5) * total / cells
    w = total / cells
    cg = _membership_exponent(X)
    out = []
    for _ in range(n):
        x1, x2 = rng.uniform(0, total, size=2)
        b1 = rng.uniform(0.05, 0.45) / d
        b2 = rng.uniform(0.1, 1.0) * cg
        f = np.abs(x - x1) ** (-b1) + rng.uniform(0, 1)
        g = np.abs(x - x2) ** (-b2) * (1 + 0.5 * np.sin(rng.uniform(1, 20) * x))
        out.append((f, g, w))
    return out


def _profile_of(values, w):
    v = np.sort(np.abs(values))[::-1]
    return RearrangedProfile(w * np.arange(1, v.size + 1), v)


def class_c_check(X, d, alpha=1.0, r_values=VARPI_R, gauge=1e3, seed=0):
    """Numerical evaluation of the four items of class ``(C)``.

    ``(C-iv)`` is judged by finiteness of ``varpi_X(r)`` along ``r_values``;
    whether it also tends to 0 is reported in ``measured["varpi_decays"]``.
    ``(C-iii)`` is a spot check: "no counterexample" when every battery
    ratio ``||h||_Y / (||f||_{L^d} ||g||_X)`` stays below ``gauge``.
    """
    if int(d) != d or d < 2:
        raise InputError("d must be an integer >= 2")
    if not 0 < alpha < d:
        raise InputError("alpha must lie in (0, d)")
    meas = {}
    # (C-i)
    B = boyd_indices(X)
    meas["boyd"] = B.as_dict()
    c_i = bool(B.ok and 0 < B.lower <= B.upper < 1)
    # (C-ii)
    a = d / alpha
    total = X.measure_total
    if np.isfinite(total):
        prof = _sample_profile(lambda s: (1.0 + total - s) ** (a - 1.0), total, n=2000)
        nrm = X.norm(prof)
        c_ii = bool(np.isfinite(nrm))
        meas["weight_norm"] = nrm
    else:
        c_ii = False
        meas["weight_norm"] = np.inf
    # (C-iii)
    ratios = []
    Ld = RISpace.lebesgue(d, total)
    for f, g, w in product_battery(X, d, seed=seed):
        pf, pg, ph = _profile_of(f, w), _profile_of(g, w), _profile_of(f * g, w)
        ratios.append(y_norm(X, ph, d, alpha) / (Ld.norm(pf) * X.norm(pg)))
    meas["product_ratio_max"] = float(np.max(ratios))
    c_iii = bool(np.all(np.isfinite(ratios)) and np.max(ratios) <= gauge)
    # (C-iv)
    Xa = X.associate()
    varpi = [Xa.power_norm(1.0 - 1.0 / d, r ** d) for r in r_values]
    meas["varpi"] = dict(zip(map(float, r_values), varpi))
    finite = bool(np.all(np.isfinite(varpi)))
    nonincreasing = finite and bool(np.all(np.diff(varpi) <= 1e-12 * max(varpi)))
    decays = False
    if finite and min(varpi) > 0:
        slope = np.polyfit(np.log(r_values), np.log(varpi), 1)[0]
        meas["varpi_slope"] = float(slope)
        decays = bool(slope > 1e-3)
    meas["varpi_decays"] = decays
    c_iv = bool(finite and nonincreasing)
    # precondition t^{1/d} / phi_X(t) -> 0, reported only
    ts = np.geomspace(1e-8, 1e-2, 4) * min(total, 1.0)
    ratio = [t ** (1.0 / d) / fundamental_function(X, t) for t in ts]
    meas["precondition_ratios"] = ratio
    pre = bool(np.polyfit(np.log(ts), np.log(ratio), 1)[0] > 1e-6)
    return ClassCReport(repr(X), int(d), float(alpha), c_i, c_ii, c_iii, c_iv, meas, pre)


# ---------------------------------------------------------------- Riesz pairs

# beyond this, log corrections of log-log tables drown in the roundoff of log t
U_TOP = 1e12


def _transform_grid():
    """``u = log t`` from 0: fine near the origin, geometric far out."""
    inner = log_grid_u(0.0, 1e3)
    far = np.geomspace(1e3, U_TOP, int(np.log(U_TOP / 1e3) / np.log(1.02)))[1:]
    return np.concatenate([inner, far])


def _as_table(f, u):
    lp = f.log_eval(u, strict=False)
    bad = ~np.isfinite(lp) | (np.abs(lp) > 1e250)
    n = int(np.argmax(bad)) if bad.any() else u.size
    if n < 10:
        raise QuadratureError(f"{f!r} is not finite on enough of the grid")
    return u[:n], lp[:n]


def _conjugate_table(f):
    if f.has_closed_conjugate:
        return young.conjugate(f)
    u = np.concatenate([np.arange(-60.0, 0.0, 0.02), _transform_grid()])
    uu, lp = _as_table(f, u)
    return young.conjugate(young.from_table(uu, lp, params={"of": f}))


def riesz_transforms(f, beta, u=None):
    """``F_beta(s) = int_0^s r^{beta-1} (Phi^{-1}(r^beta))^beta dr`` with
    ``Phi(s) = int_0^s f(t) t^{-1-beta} dt``.

    Near 0, ``f`` is replaced below ``t = 1`` by ``f(1) t^{beta+1}`` (sets of
    finite measure only see large arguments); both integrals then have
    closed heads.  Returns a tabulated Young function.
    """
    u = _transform_grid() if u is None else np.asarray(u, dtype=float)
    u, L = _as_table(f, u)
    cells = _cell_log_integrals(u, L - beta * u)
    log_phi = np.logaddexp.accumulate(np.concatenate([[L[0]], cells]))
    # parametric in tau = e^u: r = Phi(tau)^{1/beta}, integrand in log r is r^beta tau^beta
    v = log_phi / beta
    keep = np.concatenate([[True], np.diff(v) > 0])
    v, u = v[keep], u[keep]
    L2 = beta * v + beta * u
    k = beta + beta * beta
    head = k * v[0] - np.log(k) - beta * L[0]
    cells2 = _cell_log_integrals(v, L2)
    logF = np.logaddexp.accumulate(np.concatenate([[head], cells2]))
    ok = np.isfinite(logF) & (np.abs(logF) < 1e250)
    return young.from_table(v[ok], logF[ok], params={"beta": beta, "op": "riesz-transform"})


def _zero_integral_converges(f, beta):
    """Is ``int_0 f(t) t^{-1-beta} dt`` finite?  Slope of ``log f`` on ``u in [-40, -20]``."""
    u = np.array([-40.0, -20.0])
    lp = f.log_eval(u, strict=False)
    slope = (lp[1] - lp[0]) / 20.0
    return bool(slope > beta + 1e-6), float(slope)


def cianchi_conditions(gamma, psi, d, alpha=1.0, c_max=8.0, t=None, measure="finite"):
    """Two integrability conditions at 0 and two dominations, as a report.

    ``measure="finite"`` judges the pair on a set of finite measure, where
    only large arguments matter: the integrability conditions at 0 are then
    recorded but not part of the verdict.
    """
    if not 0 < alpha < d:
        raise InputError("alpha must lie in (0, d)")
    beta = d / (d - alpha)
    t = young.log_grid(*ASYMPTOTIC_T, per_decade=10) if t is None else np.asarray(t)
    gstar = _conjugate_table(gamma)
    rep = VerificationReport(f"Riesz pair gamma={gamma.family} psi={psi.family}",
                             provenance={"d": d, "alpha": alpha, "beta": beta,
                                         "measure": measure, "c_max": c_max})
    i1, s1 = _zero_integral_converges(psi, beta)
    i2, s2 = _zero_integral_converges(gstar, beta)
    rep.provenance.update({"psi_zero_slope": s1, "gamma_star_zero_slope": s2,
                           "psi_integral_at_0": i1, "gamma_star_integral_at_0": i2})
    if measure != "finite":
        rep.add(Check("riesz:psi-integral", "riesz-pair", s1, beta, None, i1))
        rep.add(Check("riesz:gamma*-integral", "riesz-pair", s2, beta, None, i2))
    gamma_da = riesz_transforms(gstar, beta)
    psi_star_da = riesz_transforms(psi, beta)
    psi_da = young.conjugate(psi_star_da)
    for name, lo, hi in (("riesz:psi_da<gamma", psi_da, gamma),
                         ("riesz:psi<gamma_da", psi, gamma_da)):
        try:
            pr = young.precedes(lo, hi, c_max=c_max, t=t, clip=True)
            rep.add(Check(name, "riesz-pair", pr.c if pr.holds else pr.witness_t,
                          c_max, None, bool(pr.holds), {"holds": pr.holds}))
        except DomainError as exc:
            rep.add(Check(name, "riesz-pair", np.nan, c_max, None, False,
                          {"error": str(exc)}))
    return rep


def _oneil_gamma(d, alpha):
    a = 1.0 - alpha / d

    def logfn(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            inner = np.where(u < -20.0, u - 0.5 * np.exp(u), np.log(np.logaddexp(0.0, u)))
        return u + a * inner

    return young.YoungFunction("s-log", {"alpha": a, "shift": 1.0}, logfn)


def classical_pairs(d=3, alpha=1.0, p=None):
    """Named ``(gamma, psi)`` pairs; Lebesgue with ``p`` (default midway in ``(1/alpha, d/alpha)``)."""
    beta = d / (d - alpha)
    pairs = {}
    p = 0.5 * (1.0 / alpha + d / alpha) if p is None else float(p)
    if 1 < alpha * p < d and p > 1:
        pairs["lebesgue"] = (young.power(p), young.power(d * p / (d - alpha * p)))
    else:
        pairs["lebesgue"] = None
    pairs["oneil"] = (_oneil_gamma(d, alpha), young.power(beta))
    pairs["trudinger"] = (young.power(d / alpha), young.exp_power(beta))
    # log power of the Young function; (d - alpha)/d is its Lorentz-Zygmund norm exponent
    pairs["double-exponential"] = (young.power_log(d / alpha, (d - alpha) / alpha, shift=1.0),
                                   young.double_exp(beta))
    return pairs


def mismatch_pair(d=3, alpha=1.0):
    """Trudinger target with a domain exponent half a unit too small: not a bounded pair."""
    if not d / alpha - 0.5 > 1:
        raise InputError("mismatch pair needs d/alpha - 1/2 > 1")
    return young.power(d / alpha - 0.5), young.exp_power(d / (d - alpha))


def classical_pairs_suite(d=3, alpha=1.0, c_max=8.0, p=None):
    if int(d) != d or d < 3:
        raise InputError("the pair suite needs an integer d >= 3")
    if not 0 < alpha < d:
        raise InputError("alpha must lie in (0, d)")
    rep = VerificationReport(f"classical Riesz pairs d={d} alpha={alpha:g}")
    for name, pair in classical_pairs(d, alpha, p).items():
        if pair is None:
            rep.provenance[name] = "not applicable (alpha p outside (1, d))"
            continue
        sub = cianchi_conditions(*pair, d, alpha, c_max)
        rep.add(Check(f"pair:{name}", "riesz-pair", float(len(sub.failures())), 0.0, None,
                      sub.passed, {"checks": [c.name for c in sub.checks],
                                   "measured": [c.measured for c in sub.checks]}))
    return rep
