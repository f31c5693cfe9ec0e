"""Command-line entry point: ``orlicz-lab <command> [flags]`` or ``python -m orlicz_lab``.

Every command writes ``<command>.csv`` and ``<command>.json`` (plus SVG
plots where a curve is meaningful) into ``--out`` and exits with

* 0 when every check passes,
* 1 when at least one check fails,
* 2 on invalid input (the message names the offending config field),
* 3 on a numerical failure or a violated mathematical precondition.

A JSON config (``--config``) carries ``"schema": "orlicz-lab/1"`` and any of
the keys of :class:`RunConfig`; command-line flags override it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import elliptic as E
from . import embeddings as emb
from . import ri_spaces as R
from . import suites, young
from .errors import InputError, NumericalError, OrliczLabError, PreconditionError
from .fields import Grid, load_field
from .report import Check, VerificationReport

SCHEMA = "orlicz-lab/1"
COMMANDS = ("conjugate", "sobolev-conjugate", "associated", "modulus", "table1",
            "verify-estimate", "contraction", "neumann", "class-c", "riesz-check", "boyd",
            "interior-l2")


class ConfigError(InputError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class RunConfig:
    command: str
    function: dict = field(default_factory=lambda: {"family": "power", "q": 4.0})
    gamma: dict | None = None
    space: dict = field(default_factory=lambda: {"kind": "lorentz", "p": 4.0, "q": 1.0})
    catalog: dict = field(default_factory=lambda: {"name": "singular"})
    manifest: dict | None = None
    d: int = 3
    alpha: float = 1.0
    grid: int | None = None
    ensemble: int | None = None
    seed: int = 0
    c_max: float = 8.0
    t_range: tuple = (1e-2, 1e8)
    r_values: tuple = (0.4, 0.2, 0.1, 0.05, 0.025)
    r: float | None = None
    tolerances: dict = field(default_factory=dict)
    out: str = "orlicz-lab-out"
    plots: bool = True


# ---------------------------------------------------------------- validation

def _num(cfg, key, kind=float, lo=None, hi=None, strict=True):
    v = cfg[key]
    try:
        if isinstance(v, bool):
            raise TypeError
        v = kind(v)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected {kind.__name__}, got {cfg[key]!r}") from None
    if kind is int and cfg[key] != v:
        raise ConfigError(key, f"expected an integer, got {cfg[key]!r}")
    if lo is not None and (v <= lo if strict else v < lo):
        raise ConfigError(key, f"must be {'>' if strict else '>='} {lo}, got {v}")
    if hi is not None and v > hi:
        raise ConfigError(key, f"must be <= {hi}, got {v}")
    return v


def parse_function(spec, path="function"):
    """Young function from a config object, errors prefixed with the field path."""
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected an object with a 'family' key")
    for k, v in spec.items():
        if k != "family" and not isinstance(v, (int, float)):
            raise ConfigError(f"{path}.{k}", f"expected a number, got {v!r}")
    try:
        return young.from_spec(spec)
    except InputError as exc:
        msg = str(exc)
        for k in ("q", "alpha", "p", "c", "shift"):
            if msg.startswith(f"{k} ") or f"parameter '{k}'" in msg:
                raise ConfigError(f"{path}.{k}", msg) from None
        raise ConfigError(f"{path}.family", msg) from None


def parse_space(spec, path="space"):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(path, "expected an object with a 'kind' key")
    kind = spec["kind"]
    total = spec.get("measure_total", 1.0)
    try:
        if kind == "lebesgue":
            return R.RISpace.lebesgue(float(spec["p"]), total)
        if kind == "lorentz":
            q = spec.get("q", spec["p"])
            q = np.inf if q in ("inf", None) else float(q)
            return R.RISpace.lorentz(float(spec["p"]), q, total)
        if kind == "orlicz":
            return R.RISpace.orlicz(parse_function(spec.get("psi"), f"{path}.psi"), total)
    except KeyError as exc:
        raise ConfigError(f"{path}.{exc.args[0]}", "required") from None
    except ConfigError:
        raise
    except InputError as exc:
        raise ConfigError(path, str(exc)) from None
    raise ConfigError(f"{path}.kind", f"unknown kind {kind!r}; known: lebesgue, lorentz, orlicz")


CATALOGS = {"constant": E.constant_catalog, "smooth": E.smooth_catalog,
            "singular": E.singular_catalog}


def parse_catalog(spec, d, path="catalog"):
    if not isinstance(spec, dict) or spec.get("name") not in CATALOGS:
        raise ConfigError(f"{path}.name", f"expected one of {sorted(CATALOGS)}")
    params = {k: v for k, v in spec.items() if k != "name"}
    try:
        return CATALOGS[spec["name"]](d, **params)
    except TypeError as exc:
        raise ConfigError(path, str(exc)) from None


def validate(cfg):
    """Check a raw config mapping and return a :class:`RunConfig`."""
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    if "schema" in cfg and cfg["schema"] != SCHEMA:
        raise ConfigError("schema", f"unsupported schema {cfg['schema']!r}; expected {SCHEMA!r}")
    known = {f.name for f in fields(RunConfig)} | {"schema"}
    for k in cfg:
        if k not in known:
            raise ConfigError(k, "unknown key")
    if cfg.get("command") not in COMMANDS:
        raise ConfigError("command", f"expected one of {', '.join(COMMANDS)}")
    cfg = {k: v for k, v in cfg.items() if k != "schema" and v is not None}
    rc = RunConfig(**cfg)
    rc.d = _num(cfg, "d", int, lo=1) if "d" in cfg else rc.d
    rc.alpha = _num(cfg, "alpha", float, lo=0.0, hi=rc.d) if "alpha" in cfg else rc.alpha
    rc.seed = _num(cfg, "seed", int, lo=0, strict=False) if "seed" in cfg else 0
    rc.c_max = _num(cfg, "c_max", float, lo=1.0, strict=False) if "c_max" in cfg else rc.c_max
    if "grid" in cfg:
        rc.grid = _num(cfg, "grid", int, lo=8, strict=False)
    if "ensemble" in cfg:
        rc.ensemble = _num(cfg, "ensemble", int, lo=0)
    if "r" in cfg:
        rc.r = _num(cfg, "r", float, lo=0.0)
    tr = cfg.get("t_range", rc.t_range)
    if (not isinstance(tr, (list, tuple)) or len(tr) != 2
            or not all(isinstance(x, (int, float)) for x in tr) or not 0 < tr[0] < tr[1]):
        raise ConfigError("t_range", "expected [t_min, t_max] with 0 < t_min < t_max")
    rc.t_range = (float(tr[0]), float(tr[1]))
    rv = cfg.get("r_values", rc.r_values)
    if not isinstance(rv, (list, tuple)) or len(rv) < 2:
        raise ConfigError("r_values", "expected a list of at least two radii")
    rc.r_values = tuple(float(x) for x in rv)
    if not isinstance(rc.tolerances, dict):
        raise ConfigError("tolerances", "expected an object")
    for k, v in rc.tolerances.items():
        if not isinstance(v, (int, float)) or v <= 0:
            raise ConfigError(f"tolerances.{k}", f"expected a positive number, got {v!r}")
    # parse eagerly so every field path error surfaces before any computation
    parse_function(rc.function, "function")
    if rc.gamma is not None:
        parse_function(rc.gamma, "gamma")
    parse_space(rc.space)
    parse_catalog(rc.catalog, rc.d)
    return rc


# ---------------------------------------------------------------- output

def _write_table(path, rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row[c]) for c in columns])
    Path(path).write_text(buf.getvalue())


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return x


def _svg_plot(path, curves, xlabel, ylabel, title, logx=True, logy=True, kind="line"):
    """Standalone SVG line (or histogram) plot with deterministic output."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "orlicz-lab"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, x, y in curves:
        if kind == "hist":
            ax.hist(y, bins=min(20, max(5, len(y) // 3)), label=label, alpha=0.6)
        else:
            ax.plot(x, y, marker="." if len(x) < 40 else None, label=label)
    if logx and kind != "hist":
        ax.set_xscale("log")
    if logy and kind != "hist":
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(curves) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


@dataclass
class Outcome:
    report: VerificationReport
    tables: dict = field(default_factory=dict)   # filename -> (rows, columns)
    plots: list = field(default_factory=list)    # (filename, kwargs for _svg_plot)
    summary: dict = field(default_factory=dict)


def _curve_rows(t, values):
    return [{"t": a, "value": b} for a, b in zip(t, values)]


def _grid_t(cfg, psi=None):
    lo, hi = cfg.t_range
    t = np.geomspace(lo, hi, int(np.ceil(20 * np.log10(hi / lo))) + 1)
    if psi is not None and psi.hull is not None:
        a, b = psi.hull
        t = t[(t >= a) & (t <= b)]
    return t


def _fit_check(f, name, window):
    try:
        fit = emb.fit_asymptotics(f, window)
    except NumericalError as exc:
        return Check(name, "asymptotic-fit", np.nan, None, None, False, {"error": str(exc)}), None
    return Check(name, "asymptotic-fit", fit.exponent, None, None, True, fit.as_dict()), fit


def _fit_window(cfg):
    lo, hi = max(cfg.t_range[0], 1e2), cfg.t_range[1]
    return (lo, hi) if hi / lo >= 1e3 else None


def _curve_command(cfg, label, build):
    psi = parse_function(cfg.function)
    fn = build(psi)
    t = _grid_t(cfg, fn)
    rep = VerificationReport(f"{label} of {psi}", provenance={"function": cfg.function,
                                                               "d": cfg.d})
    vals = fn(t)
    finite = bool(np.all(np.isfinite(vals)) and np.all(np.diff(vals) >= 0))
    rep.add(Check(f"{label}:finite-increasing", "tabulation", float(finite), 1.0, None, finite))
    window = _fit_window(cfg)
    if window is not None:
        chk, _ = _fit_check(fn, f"{label}:fit", window)
        rep.add(chk)
    return rep, t, vals, fn, psi


def cmd_conjugate(cfg):
    rep, t, vals, conj, psi = _curve_command(cfg, "conjugate", young.conjugate)
    tt = _grid_t(cfg, psi)
    ok, c = young.equivalent(young.conjugate(conj), psi, cfg.c_max, tt[(tt >= 1) & (tt <= 1e6)])
    rep.add(Check("conjugate:involution", "legendre", c if ok else np.nan, cfg.c_max, None,
                  bool(ok)))
    # Young's inequality s t <= psi(s) + psi*(t) on a product grid
    s = tt[:: max(1, tt.size // 25)]
    S, T = np.meshgrid(s, t[:: max(1, t.size // 25)])
    gap = (psi(S) + conj(T)) / (S * T)
    rep.add(Check.bound("conjugate:young-inequality", "legendre", float(-np.min(gap - 1.0)),
                        1e-8))
    return Outcome(rep, {"conjugate-curve.csv": (_curve_rows(t, vals), ["t", "value"])},
                   [("conjugate.svg", dict(curves=[("psi", tt, psi(tt)), ("psi*", t, vals)],
                                           xlabel="t", ylabel="value",
                                           title="Young function and its conjugate"))])


def cmd_sobolev_conjugate(cfg):
    rep, t, vals, psid, psi = _curve_command(
        cfg, "sobolev-conjugate", lambda p: emb.sobolev_conjugate(p, cfg.d))
    return Outcome(rep, {"sobolev-conjugate-curve.csv": (_curve_rows(t, vals), ["t", "value"])},
                   [("sobolev-conjugate.svg",
                     dict(curves=[("psi", t, psi(t)), ("psi_d", t, vals)], xlabel="t",
                          ylabel="value", title=f"Sobolev conjugate, d={cfg.d}"))])


def cmd_associated(cfg):
    rep, t, vals, g, psi = _curve_command(
        cfg, "associated", lambda p: emb.associated_space(p, cfg.d))
    tt = t[t >= 1e2]
    if tt.size:
        ratio = young.left_inverse(g, tt) / emb.gamma_inverse_shortcut(psi, cfg.d, tt)
        ok = bool(ratio.min() >= 1.0 / cfg.c_max and ratio.max() <= cfg.c_max)
        rep.add(Check("associated:shortcut-ratio", "associated-law", float(ratio.max()),
                      cfg.c_max, None, ok, {"min": float(ratio.min())}))
    return Outcome(rep, {"associated-curve.csv": (_curve_rows(t, vals), ["t", "value"])},
                   [("associated.svg", dict(curves=[("psi", t, psi(t)), ("gamma", t, vals)],
                                            xlabel="t", ylabel="value",
                                            title=f"Associated Young function, d={cfg.d}"))])


def cmd_modulus(cfg):
    psi = parse_function(cfg.function)
    mod = emb.continuity_modulus(psi, cfg.d)
    lo, hi = mod.r_range
    r = np.geomspace(max(lo, 1e-12), min(hi, 1.0), 121)
    vals = mod(r)
    rep = VerificationReport(f"continuity modulus of {psi}", provenance={"d": cfg.d})
    dec = bool(np.all(np.diff(vals) >= -1e-12 * vals[1:]))
    rep.add(Check("modulus:monotone", "modulus", float(dec), 1.0, None, dec))
    rep.add(Check.bound("modulus:vanishes-at-0", "modulus", float(vals[0] / vals[-1]), 1e-2))
    if r[-1] / r[0] >= 1e3:
        try:
            fit = emb.fit_asymptotics((r, vals), (1 / r[-1], 1 / r[0]), variable=1 / r,
                                      basis=("log",))
            rep.add(Check("modulus:fit", "asymptotic-fit", fit.exponent, None, None, True,
                          fit.as_dict()))
        except NumericalError as exc:
            rep.add(Check("modulus:fit", "asymptotic-fit", np.nan, None, None, False,
                          {"error": str(exc)}))
    rows = [{"r": a, "value": b} for a, b in zip(r, vals)]
    return Outcome(rep, {"modulus-curve.csv": (rows, ["r", "value"])},
                   [("modulus.svg", dict(curves=[("varpi", r, vals)], xlabel="r",
                                         ylabel="varpi(r)", title="Continuity modulus"))])


def cmd_table1(cfg):
    return Outcome(suites.table1_suite(cfg.d))


def _manifest(cfg):
    """Instance manifest: explicit from the config, otherwise generated from the flags."""
    if cfg.manifest is not None:
        m = cfg.manifest
        if not isinstance(m, dict) or not isinstance(m.get("instances"), list):
            raise ConfigError("manifest.instances", "expected a list of instances")
        return m
    n = cfg.ensemble or 10
    grids = [cfg.grid] if cfg.grid else [17, 33]
    return {"function": cfg.function,
            "instances": [{"grid": g, "seed": cfg.seed + k,
                           "catalog": {"name": "smooth", "phase": 0.37 * k,
                                       "v": 1.0 + 0.1 * (k % 5)}}
                          for g in grids for k in range(n)]}


def _instance_problem(inst, psi, gamma, d, path):
    try:
        n = int(inst["grid"])
        seed = int(inst.get("seed", 0))
    except (KeyError, TypeError, ValueError):
        raise ConfigError(f"{path}.grid", "each instance needs an integer 'grid'") from None
    grid = Grid.cube(n, dim=d)
    coeffs = parse_catalog(inst.get("catalog", {"name": "smooth"}), d,
                           f"{path}.catalog").sample(grid)
    if "F" in inst or "g" in inst:
        try:
            F, g = load_field(inst["F"]), load_field(inst["g"])
        except KeyError as exc:
            raise ConfigError(f"{path}.{exc.args[0]}", "both F and g files are required") from None
        except OSError as exc:
            raise ConfigError(path, str(exc)) from None
    else:
        F, g = E.random_data(grid, seed)
    return E.EllipticProblem(grid, coeffs, F, g, psi, gamma)


def cmd_verify_estimate(cfg):
    m = _manifest(cfg)
    psi = parse_function(m.get("function", cfg.function), "manifest.function")
    gamma = (parse_function(cfg.gamma, "gamma") if cfg.gamma else
             emb.associated_space(psi, cfg.d))
    rows = []
    for k, inst in enumerate(m["instances"]):
        pb = _instance_problem(inst, psi, gamma, cfg.d, f"manifest.instances[{k}]")
        est = E.verify_apriori(pb, E.solve(pb))
        rows.append({"instance": k, "grid": pb.grid.extents[0], "seed": inst.get("seed", 0),
                     "lhs": est.lhs, "rhs": float(sum(est.rhs_terms)), "ratio": est.ratio})
    ratios = np.array([r["ratio"] for r in rows])
    by_grid = {}
    for r in rows:
        by_grid.setdefault(r["grid"], []).append(r["ratio"])
    maxima = {g: float(np.max(v)) for g, v in sorted(by_grid.items())}
    drift = max(maxima.values()) / min(maxima.values())
    limit = cfg.tolerances.get("drift", 2.0)
    rep = VerificationReport("a priori estimate ensemble")
    rep.add(Check("estimate:finite", "a-priori", float(ratios.max()), None, None,
                  bool(np.all(np.isfinite(ratios)))))
    rep.add(Check.bound("estimate:refinement-drift", "a-priori", drift, limit, maxima=maxima))
    summary = {"max": float(ratios.max()), "median": float(np.median(ratios)),
               "refinement_drift": drift, "max_by_grid": maxima, "instances": len(rows),
               "manifest": m}
    plots = [("verify-estimate.svg", dict(curves=[(f"n={g}", None, np.array(v))
                                                  for g, v in sorted(by_grid.items())],
                                          xlabel="ratio", ylabel="count",
                                          title="A priori ratio histogram", kind="hist"))]
    cols = ["instance", "grid", "seed", "lhs", "rhs", "ratio"]
    return Outcome(rep, {"verify-estimate-ratios.csv": (rows, cols)}, plots, summary)


def _gamma_for(cfg, psi):
    return parse_function(cfg.gamma, "gamma") if cfg.gamma else emb.associated_space(psi, cfg.d)


def cmd_contraction(cfg):
    psi = parse_function(cfg.function)
    cat = parse_catalog(cfg.catalog, cfg.d)
    gamma = _gamma_for(cfg, psi)
    cr = E.contraction_delta(cat, psi, gamma, cfg.r_values, n=cfg.grid or 20, seed=cfg.seed)
    rep = VerificationReport(f"contraction bracket for catalog {cat.name}",
                             provenance={"r0": cr.r0, "caveat": cr.caveat})
    d = np.asarray(cr.delta)
    rep.add(Check("contraction:delta-decreasing", "delta-bracket", float(np.max(np.diff(d))),
                  0.0, None, bool(np.all(np.diff(d) < 0))))
    rep.add(Check("contraction:r0-found", "delta-bracket",
                  np.nan if cr.r0 is None else cr.r0, 0.5, None, cr.r0 is not None))
    cols = ["r", "A_term", "B_term", "C_term", "V_term", "delta", "Kr_norm"]
    plots = [("contraction.svg", dict(curves=[("delta", cr.r_values, cr.delta)], xlabel="r",
                                      ylabel="delta(r)", title="Contraction bracket decay"))]
    return Outcome(rep, {"contraction-table.csv": (cr.as_rows(), cols)}, plots,
                   {"r0": cr.r0})


def cmd_neumann(cfg):
    psi = parse_function(cfg.function)
    cat = parse_catalog(cfg.catalog, cfg.d)
    gamma = _gamma_for(cfg, psi)
    r = cfg.r
    if r is None:
        cr = E.contraction_delta(cat, psi, gamma, cfg.r_values, n=20)
        if cr.r0 is None:
            raise PreconditionError("no radius with delta(r) <= 1/2 in r_values; pass r")
        r = cr.r0 / 2.0
    _, rep = E.neumann_solve(cat, psi, gamma, r, n=cfg.grid or 32, seed=cfg.seed)
    incs = rep.provenance["increments"]
    rows = [{"iteration": k + 1, "increment": v} for k, v in enumerate(incs)]
    plots = [("neumann.svg", dict(curves=[("increment", np.arange(1, len(incs) + 1), incs)],
                                  xlabel="iteration", ylabel="scaled increment",
                                  title=f"Neumann iteration, r={r:g}", logx=False))]
    return Outcome(rep, {"neumann-curve.csv": (rows, ["iteration", "increment"])}, plots)


def cmd_class_c(cfg):
    X = parse_space(cfg.space)
    cc = R.class_c_check(X, cfg.d, cfg.alpha, seed=cfg.seed)
    rep = VerificationReport(f"class (C) for {cc.space}", provenance=cc.as_dict())
    for item, ok in (("i", cc.c_i), ("ii", cc.c_ii), ("iii", cc.c_iii), ("iv", cc.c_iv)):
        m = cc.measured.get(f"C-{item}", {})
        rep.add(Check(f"class-c:C-{item}", "class-c", float(ok), 1.0, None, bool(ok),
                      m if isinstance(m, dict) else {"value": m}))
    return Outcome(rep, summary=cc.as_dict())


def cmd_riesz_check(cfg):
    if cfg.gamma is None:
        rep = R.classical_pairs_suite(cfg.d, cfg.alpha, cfg.c_max)
        g, p = R.mismatch_pair(cfg.d, cfg.alpha)
        mm = R.cianchi_conditions(g, p, cfg.d, cfg.alpha, cfg.c_max)
        rep.add(Check("riesz:mismatch-rejected", "riesz-pair", float(mm.passed), 0.0, None,
                      not mm.passed))
        return Outcome(rep)
    gamma = parse_function(cfg.gamma, "gamma")
    psi = parse_function(cfg.function)
    return Outcome(R.cianchi_conditions(gamma, psi, cfg.d, cfg.alpha, cfg.c_max))


def cmd_boyd(cfg):
    X = parse_space(cfg.space)
    b = R.boyd_indices(X)
    rep = VerificationReport(f"Boyd indices of {X.kind}", provenance=b.as_dict())
    ok = bool(b.ok and 0 <= b.lower <= b.upper <= 1)
    rep.add(Check("boyd:ordered", "boyd", b.upper - b.lower, None, None, ok,
                  {"lower": b.lower, "upper": b.upper, "flag": b.flag}))
    rows = [{"s": s, "slope_large": a, "slope_small": c}
            for s, a, c in zip(R.BOYD_S, b.slopes_large, b.slopes_small)]
    return Outcome(rep, {"boyd-slopes.csv": (rows, ["s", "slope_large", "slope_small"])},
                   summary=b.as_dict())


def cmd_interior_l2(cfg):
    sizes = (cfg.grid,) if cfg.grid else (17, 33)
    if len(sizes) == 1:
        sizes = (sizes[0], 2 * sizes[0] - 1)
    rep = suites.interior_suite(cfg.ensemble or 20, sizes, seed=cfg.seed)
    return Outcome(rep)


HANDLERS = {
    "conjugate": cmd_conjugate, "sobolev-conjugate": cmd_sobolev_conjugate,
    "associated": cmd_associated, "modulus": cmd_modulus, "table1": cmd_table1,
    "verify-estimate": cmd_verify_estimate, "contraction": cmd_contraction,
    "neumann": cmd_neumann, "class-c": cmd_class_c, "riesz-check": cmd_riesz_check,
    "boyd": cmd_boyd, "interior-l2": cmd_interior_l2,
}


def run(cfg):
    """Execute a validated :class:`RunConfig`; returns ``(exit_code, Outcome)``."""
    outcome = HANDLERS[cfg.command](cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rep = outcome.report
    (out / f"{cfg.command}.csv").write_text(rep.to_csv())
    doc = json.loads(rep.to_json())
    doc["summary"] = json.loads(json.dumps(outcome.summary, default=repr)) if outcome.summary else {}
    doc["config"] = {k: v for k, v in vars(cfg).items()}
    (out / f"{cfg.command}.json").write_text(json.dumps(doc, indent=2, sort_keys=True,
                                                        default=repr))
    for name, (rows, cols) in outcome.tables.items():
        _write_table(out / name, rows, cols)
    if cfg.plots:
        for name, kw in outcome.plots:
            _svg_plot(out / name, **kw)
    return (0 if rep.passed else 1), outcome


# ---------------------------------------------------------------- argparse

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (schema orlicz-lab/1)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--grid", type=int, help="cells per axis")
    common.add_argument("--d", type=int, help="dimension")
    common.add_argument("--ensemble", type=int, help="ensemble size")
    common.add_argument("--c-max", type=float, dest="c_max", help="largest dilation constant")
    common.add_argument("--function", help='Young function as JSON, e.g. \'{"family": "power", "q": 4}\'')
    common.add_argument("--gamma", help="second Young function as JSON")
    common.add_argument("--space", help='RI space as JSON, e.g. \'{"kind": "lorentz", "p": 4, "q": 1}\'')
    common.add_argument("--no-plots", action="store_true", help="skip SVG output")
    p = argparse.ArgumentParser(prog="orlicz-lab", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for c in COMMANDS:
        sub.add_parser(c, parents=[common])
    return p


def _merge(args):
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError("--config", str(exc)) from None
        except json.JSONDecodeError as exc:
            raise ConfigError("--config", f"invalid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("<root>", "config must be a JSON object")
    cfg["command"] = args.command
    if args.command == "sobolev-conjugate" and "function" not in cfg and args.function is None:
        # the Sobolev conjugate needs a convergent integral at 0, i.e. growth below t^d
        cfg["function"] = {"family": "power", "q": 2.0}
    for k in ("out", "seed", "grid", "d", "ensemble", "c_max"):
        v = getattr(args, k)
        if v is not None:
            cfg[k] = v
    for k in ("function", "gamma", "space"):
        v = getattr(args, k)
        if v is not None:
            try:
                cfg[k] = json.loads(v)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"--{k}", f"invalid JSON: {exc}") from None
    if args.no_plots:
        cfg["plots"] = False
    return validate(cfg)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _merge(args)
        code, outcome = run(cfg)
    except InputError as exc:
        print(f"orlicz-lab: invalid input: {exc}", file=sys.stderr)
        return 2
    except (PreconditionError, NumericalError) as exc:
        print(f"orlicz-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except OrliczLabError as exc:
        print(f"orlicz-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    print(outcome.report.summary())
    for c in outcome.report.failures():
        print(f"  FAILED {c.name} measured={c.measured:.6g} target={c.target}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
