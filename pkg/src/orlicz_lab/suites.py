"""Verification suites shared by the command line and the acceptance tests.

Every suite returns a :class:`~orlicz_lab.report.VerificationReport` whose
rows carry a descriptive anchor tag and whose provenance records the timing
and the parameters used.
"""
from __future__ import annotations

import time

import numpy as np

from . import elliptic as E
from . import embeddings as emb
from . import kernels as K
from . import ri_spaces as R
from . import young
from .errors import OrliczLabError
from .fields import (Grid, SampledField, lebesgue_norm, lorentz_norm, luxemburg_norm,
                     rearrange)
from .report import Check, VerificationReport

__all__ = [
    "assoc_catalog", "round_trip_catalog", "table1_suite", "associated_law_suite",
    "round_trip_suite", "norm_engine_suite", "kernel_suite", "contraction_suite",
    "apriori_suite", "interior_suite", "ri_suite", "reflection_suite", "SUITES",
]

SIX_DECADES = (1e2, 1e8)


def _timed(fn):
    def wrapper(*args, **kw):
        t0 = time.perf_counter()
        rep = fn(*args, **kw)
        rep.provenance["seconds"] = round(time.perf_counter() - t0, 3)
        return rep
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def assoc_catalog():
    """Catalog members with a convergent I-infinity integral in three dimensions."""
    return {
        "t^4": young.power(4), "t^6": young.power(6), "t^3.5": young.power(3.5),
        "t^4 log": young.power_log(4, 1), "t^3 log^3": young.power_log(3, 3),
        "t^4 loglog": young.power_loglog(4, 1), "exponential": young.exponential(),
        "exp(t^2)": young.exp_power(2), "exp(exp(t^2))": young.double_exp(2),
    }


def round_trip_catalog():
    """Catalog members inside the doubling classes, where the round trip is claimed."""
    return {
        "t^4": young.power(4), "t^6": young.power(6), "t^3.5": young.power(3.5),
        "t^2": young.power(2), "t^4 log": young.power_log(4, 1),
        "t^3 log^3": young.power_log(3, 3), "t^4 loglog": young.power_loglog(4, 1),
    }


# ---------------------------------------------------------------- Orlicz side

@_timed
def table1_suite(d=3):
    return emb.table1_reproduce(d)


@_timed
def associated_law_suite(d=3, window=SIX_DECADES, eps=(0.5, 1.0, 3.0), bound=8.0):
    """``gamma^{-1}(t) / (t^{1/d} psi^{-1}(t))`` in ``[1/8, 8]`` and exact power exponents."""
    rep = VerificationReport("associated-space law", provenance={"d": d, "window": window})
    t = np.geomspace(*window, 61)
    for name, psi in assoc_catalog().items():
        if not emb.iinf_converges(psi, d):
            rep.provenance[f"skipped:{name}"] = "I-infinity diverges"
            continue
        try:
            g = emb.associated_space(psi, d)
            ratio = young.left_inverse(g, t) / emb.gamma_inverse_shortcut(psi, d, t)
            ok = bool(np.all(np.isfinite(ratio)) and ratio.min() >= 1.0 / bound
                      and ratio.max() <= bound)
            rep.add(Check(f"assoc:ratio:{name}", "associated-law", float(ratio.max()), bound,
                          None, ok, {"min": float(ratio.min()), "max": float(ratio.max())}))
        except OrliczLabError as exc:
            rep.add(Check(f"assoc:ratio:{name}", "associated-law", np.nan, bound, None, False,
                          {"error": repr(exc)}))
    for e in eps:
        q = d + e
        g = emb.associated_space(young.power(q), d)
        fit = emb.fit_asymptotics(g, window, basis=())
        rep.add(Check.compare(f"assoc:exponent:t^{q:g}", "associated-law:power",
                              fit.exponent, d * q / (d + q), 1e-2))
    return rep


@_timed
def round_trip_suite(d=3, c_max=8.0, window=SIX_DECADES):
    """``sobolev_conjugate(associated_space(psi)) ~ psi`` with witness ``c <= c_max``."""
    rep = VerificationReport("round trip gamma_d ~ psi",
                             provenance={"d": d, "c_max": c_max,
                                         "out_of_hypothesis": ["exponential types"]})
    for name, psi in round_trip_catalog().items():
        try:
            gd = emb.sobolev_conjugate(emb.associated_space(psi, d), d)
            lo, hi = gd.hull
            t = np.geomspace(max(window[0], lo), min(window[1], hi / c_max), 61)
            ok, c = young.equivalent(gd, psi, c_max, t)
            rep.add(Check(f"roundtrip:{name}", "round-trip", c if ok else np.nan, c_max, None,
                          bool(ok)))
        except OrliczLabError as exc:
            rep.add(Check(f"roundtrip:{name}", "round-trip", np.nan, c_max, None, False,
                          {"error": repr(exc)}))
    return rep


@_timed
def norm_engine_suite(n_fields=50, n=12, seed=0):
    """Luxemburg vs ``L^p``, ``L^{p,p}`` vs ``L^p`` and equimeasurability on random fields."""
    rep = VerificationReport("norm engine", provenance={"fields": n_fields, "n": n,
                                                         "seed": seed})
    rng = np.random.default_rng(seed)
    grid = Grid.cube(n)
    lux_err, lor_ratio, dist_err = [], [], []
    for k in range(n_fields):
        p = float(rng.uniform(1.2, 6.0))
        f = SampledField(grid, rng.lognormal(0.0, 1.0, grid.extents) * rng.choice([-1, 1],
                                                                                   grid.extents))
        lp = lebesgue_norm(f, p)
        lux_err.append(abs(luxemburg_norm(f, young.power(p)) / lp - 1.0))
        lor_ratio.append(lorentz_norm(f, p, p) / lp)
        prof = rearrange(f)
        vals = np.abs(f.inside_values())
        for level in np.quantile(vals, [0.1, 0.5, 0.9]):
            dist_err.append(abs(prof.distribution(level) - grid.cell_volume *
                                np.sum(vals > level)))
    rep.add(Check.bound("norms:luxemburg-vs-Lp", "norm-engine", max(lux_err), 1e-8))
    spread = float(np.max(lor_ratio) - np.min(lor_ratio))
    rep.add(Check.bound("norms:lorentz-pp-vs-Lp", "norm-engine", spread, 1e-6,
                        mean=float(np.mean(lor_ratio))))
    rep.add(Check.bound("norms:equimeasurable", "norm-engine", max(dist_err),
                        grid.cell_volume))
    return rep


# ---------------------------------------------------------------- kernels

@_timed
def kernel_suite(d=3, seed=0, n_ball=32, radii=(0.4, 0.2, 0.1), q_samples=6):
    """Homogeneity, zero trace, smoothness stability and the r-independence of the Q bound."""
    rep = VerificationReport("kernel suite", provenance={"d": d, "n_ball": n_ball})
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(2000, d))
    lam = 10.0 ** rng.uniform(-3, 3, size=(2000, 1))
    worst_h, worst_tr = 0.0, 0.0
    for i in range(1, d + 1):
        for j in range(1, d + 1):
            spec = K.KernelSpec(d, "second-derivative", (i, j))
            k1 = K.kernel_hess(spec, z)
            k2 = K.kernel_hess(spec, lam * z)
            h = np.abs(k2 * lam[:, 0] ** d - k1) / np.maximum(np.abs(k1), 1e-300)
            worst_h = max(worst_h, float(np.max(h[np.abs(k1) > 1e-8 * np.abs(k1).max()])))
    trace = sum(K.kernel_hess(K.KernelSpec(d, "second-derivative", (i, i)), z)
                for i in range(1, d + 1))
    scale = np.sum(z * z, axis=1) ** (-d / 2.0)
    worst_tr = float(np.max(np.abs(trace) / scale))
    rep.add(Check.bound("kernel:homogeneity", "kernel", worst_h, 1e-12))
    rep.add(Check.bound("kernel:trace", "kernel", worst_tr, 1e-12))
    spec = K.KernelSpec(d, "second-derivative", (1, 2))
    s1 = K.smoothness_constant(spec, 10000, seed)
    s2 = K.smoothness_constant(spec, 20000, seed + 1)
    rep.add(Check.bound("kernel:smoothness-stable", "kernel", abs(s2 / s1 - 1.0), 0.1,
                        n10000=s1, n20000=s2))
    for p in (2, 4):
        psi = young.power(p)
        cs = [K.q_bound_constant(psi, r, n=n_ball, samples=q_samples, seed=seed) for r in radii]
        spread = max(cs) / min(cs)
        rep.add(Check.bound(f"kernel:Q-bound-spread:t^{p}", "quasi-potential-bound", spread, 2.0,
                            constants=cs, radii=list(radii)))
    return rep


@_timed
def reflection_suite(sizes=(8, 16, 32), radius=0.8):
    """Odd-extended potentials vanish on the interface to first order under refinement."""
    rep = VerificationReport("boundary reflection", provenance={"sizes": list(sizes)})
    rel, interp = [], []
    for n in sizes:
        hg = K.half_ball_grid(n, radius)
        x = hg.centers()
        hv = np.cos(3 * x[0]) * np.exp(x[1]) * (1 + x[2])
        ext = K.reflect_extend(SampledField(hg, hv), "odd")
        w = K.potential(ext)
        k = ext.grid.extents[-1] // 2
        face = 0.5 * (w.values[..., k] + w.values[..., k - 1])
        interp.append(float(np.abs(face).max()))
        rel.append(float(np.abs(w.values[..., k]).max() / np.abs(w.values).max()))
    rep.provenance.update({"adjacent_row": rel, "interface": interp})
    rep.add(Check.bound("reflection:interface-value", "reflection", max(interp), 1e-12))
    for a, b, na, nb in zip(rel, rel[1:], sizes, sizes[1:]):
        order = np.log(a / b) / np.log(nb / na)
        rep.add(Check.compare(f"reflection:order:{na}->{nb}", "reflection", order, 1.0, 0.2))
    return rep


# ---------------------------------------------------------------- elliptic

def _psi_pair(name, d=3):
    psi = {"t^4": young.power(4), "t^3.5 log": young.power_log(3.5, 1.0)}[name]
    return psi, emb.associated_space(psi, d)


@_timed
def contraction_suite(r_list=(0.4, 0.2, 0.1, 0.05, 0.025), n_delta=20, n_neumann=32, seed=0):
    """``delta(r)`` decay, ``r0`` and the Neumann solve at ``r0/2`` for the singular catalog."""
    psi, gamma = _psi_pair("t^4")
    cat = E.singular_catalog(3)
    cr = E.contraction_delta(cat, psi, gamma, r_list, n=n_delta)
    rep = VerificationReport("contraction", provenance={"rows": cr.as_rows(), "r0": cr.r0,
                                                        "caveat": cr.caveat})
    dec = bool(np.all(np.diff(cr.delta) < 0))
    rep.add(Check("contraction:delta-decreasing", "delta-bracket",
                  float(np.max(np.diff(cr.delta))), 0.0, None, dec))
    rep.add(Check("contraction:r0-found", "delta-bracket",
                  np.nan if cr.r0 is None else cr.r0, 0.5, None, cr.r0 is not None))
    if cr.r0 is not None:
        _, nrep = E.neumann_solve(cat, psi, gamma, cr.r0 / 2.0, n=n_neumann, seed=seed)
        rep.extend(nrep.checks)
        rep.provenance["neumann"] = {k: v for k, v in nrep.provenance.items()
                                     if k != "increments"}
    return rep


def _instance(grid, psi, gamma, seed):
    cat = E.smooth_catalog(3, phase=0.37 * seed, v=1.0 + 0.1 * (seed % 5))
    F, g = E.random_data(grid, seed)
    return E.EllipticProblem(grid, cat.sample(grid), F, g, psi, gamma)


@_timed
def apriori_suite(n_ensemble=50, sizes=(17, 33), seed=0, n_scaled=3, drift=2.0):
    """Ratio ``||u||_{W^{1,psi}} / (||u||_1 + ||F||_psi + ||g||_gamma)`` over an ensemble."""
    rep = VerificationReport("a priori estimate",
                             provenance={"ensemble": n_ensemble, "sizes": list(sizes)})
    for name in ("t^4", "t^3.5 log"):
        psi, gamma = _psi_pair(name)
        maxima = []
        for n in sizes:
            grid = Grid.cube(n)
            ratios, scale_err = [], []
            for k in range(n_ensemble):
                pb = _instance(grid, psi, gamma, seed + k)
                u = E.solve(pb)
                r = E.verify_apriori(pb, u).ratio
                ratios.append(r)
                if k < n_scaled:
                    c = 10.0 ** (k - 1) * 3.7
                    pb2 = pb.with_data(pb.F.scaled(c), pb.g.scaled(c))
                    r2 = E.verify_apriori(pb2, E.solve(pb2)).ratio
                    scale_err.append(abs(r2 / r - 1.0))
            m = float(np.max(ratios))
            maxima.append(m)
            rep.add(Check(f"apriori:finite:{name}:{n}", "a-priori", m, None, None,
                          bool(np.all(np.isfinite(ratios))),
                          {"min": float(np.min(ratios))}))
            rep.add(Check.bound(f"apriori:scaling:{name}:{n}", "a-priori", max(scale_err), 1e-8))
        d = max(maxima) / min(maxima)
        rep.add(Check.bound(f"apriori:drift:{name}", "a-priori", d, drift, maxima=maxima))
    return rep


@_timed
def interior_suite(n_ensemble=20, sizes=(17, 33), seed=100, drift=2.0):
    """Empirical interior ``L^2`` gradient constant over an ensemble, on two grids."""
    psi, gamma = _psi_pair("t^4")
    rep = VerificationReport("interior L2", provenance={"ensemble": n_ensemble,
                                                         "sizes": list(sizes)})
    maxima = []
    for n in sizes:
        grid = Grid.cube(n)
        x = grid.centers()
        D = np.all([(xi > 0.25) & (xi < 0.75) for xi in x], axis=0)
        cs = []
        for k in range(n_ensemble):
            pb = _instance(grid, psi, gamma, seed + k)
            _, c = E.interior_l2_check(pb, E.solve(pb), D)
            cs.append(c)
        m = float(np.max(cs))
        maxima.append(m)
        rep.add(Check(f"interior:finite:{n}", "interior-l2", m, None, None,
                      bool(np.all(np.isfinite(cs)))))
    rep.add(Check.bound("interior:drift", "interior-l2", max(maxima) / min(maxima), drift,
                        maxima=maxima))
    return rep


# ---------------------------------------------------------------- RI spaces

@_timed
def ri_suite(d=3, alpha=1.0):
    """Boyd indices, the Lorentz class (C) battery, classical Riesz pairs and a mismatch."""
    rep = VerificationReport("rearrangement-invariant suite", provenance={"d": d})
    for p, q in ((2, 1), (3, 3), (4, 2)):
        b = R.boyd_indices(R.RISpace.lorentz(p, q))
        err = max(abs(b.lower - 1 / p), abs(b.upper - 1 / p))
        rep.add(Check.compare(f"boyd:L({p},{q})", "boyd", err, 0.0, 2e-2,
                              lower=b.lower, upper=b.upper))
    for p in (2.5, 3.0, 3.5, 4.0):
        for q in (1.0, 2.0, np.inf):
            cc = R.class_c_check(R.RISpace.lorentz(p, q), d, alpha)
            expect = p > d or (p == d and q == 1)
            rep.add(Check(f"class-c:L({p:g},{q:g})", "class-c", float(cc.overall),
                          float(expect), None, cc.overall == expect, cc.as_dict()))
    pairs = R.classical_pairs_suite(d, alpha)
    for c in pairs.checks:
        rep.add(c)
    mm = R.cianchi_conditions(*R.mismatch_pair(d, alpha), d, alpha)
    rep.add(Check("riesz:mismatch-rejected", "riesz-pair", float(mm.passed), 0.0, None,
                  not mm.passed))
    return rep


SUITES = {
    1: ("Table 1 reproduction", table1_suite),
    2: ("associated-space law", associated_law_suite),
    3: ("round trip gamma_d ~ psi", round_trip_suite),
    4: ("norm engine", norm_engine_suite),
    5: ("kernel suite", kernel_suite),
    6: ("contraction", contraction_suite),
    7: ("a priori estimate", apriori_suite),
    8: ("interior L2 estimate", interior_suite),
    9: ("rearrangement-invariant suite", ri_suite),
    10: ("boundary reflection", reflection_suite),
}
