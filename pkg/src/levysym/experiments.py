"""Configuration-driven experiments: parse, run, summarise.

A configuration is a JSON object::

    {"experiment": "<kind>", "seed": 7,
     "triple": {...} | "scenario": "<catalog name>",
     "params": {...}, "sampler": {...}, "output": {"csv": ..., "json": ...}}

Comparison experiments estimate the functional for the process (start ``z``,
domain ``D``) and for its symmetrization (start ``0``, domain ``D*``, rearranged
functions and potential) on independent streams of the same seed, then apply
:func:`levysym.functionals.compare_reports`. For ``lambda1`` the sides swap, as
the inequality runs the other way.
"""
from __future__ import annotations

import json

import numpy as np

from .characteristics import (LevyTriple, UnsupportedTripleError, symmetrize_approx,
                              symmetrize_triple, validate)
from .domains import domain_from_dict
from .functionals import (FunctionalSpec, Verdict, append_csv, approximate, compare_reports,
                          csv_row, estimate_exit_moment, estimate_feynman_kac,
                          estimate_heat_content, estimate_lambda1, estimate_product_functional,
                          estimate_survival, estimate_torsional_rigidity, function_from_dict,
                          potential_from_dict, psi_from_dict)
from .oracle import (bll_check, exponent_convergence, gaussian_refinement, random_bll_instance,
                     random_walk_instance, randomwalk_check)
from .sampler import SamplerConfig
from .scenarios import scenario

__all__ = ["KINDS", "ConfigError", "parse_config", "run_experiment", "run_many", "EXIT_CODES"]

KINDS = ("validate", "symmetrize", "thm11", "survival", "feynman-kac", "exit-moment", "lambda1",
         "heat-content", "torsion", "oracle-bll", "oracle-rw", "oracle-gauss", "oracle-psi")
COMPARISONS = ("thm11", "survival", "feynman-kac", "exit-moment", "lambda1", "heat-content",
               "torsion")
EXIT_CODES = {"holds": 0, "success": 0, "valid": 0, "inconclusive": 0, "violated": 2,
              "invalid": 2}

_SAMPLER_KEYS = {"truncation_n", "epsilon_n", "num_paths", "horizon", "steps", "chunk_size",
                 "n_jobs"}
_REQUIRED = {
    "thm11": ("times", "functions"),
    "survival": ("domain", "start", "T"),
    "feynman-kac": ("domain", "start", "T"),
    "exit-moment": ("domain", "start"),
    "lambda1": ("domain",),
    "heat-content": ("domain", "T"),
    "torsion": ("domain", "T_max"),
    "oracle-gauss": ("A", "b", "t"),
}


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending field."""


def _need(d, key, where):
    if key not in d:
        raise ConfigError(f"missing required field {where}{key!r}")
    return d[key]


def parse_config(cfg):
    """Normalise a configuration dict; raises :class:`ConfigError`."""
    if not isinstance(cfg, dict):
        raise ConfigError("configuration must be a JSON object")
    kind = _need(cfg, "experiment", "")
    if kind not in KINDS:
        raise ConfigError(f"field 'experiment': unknown kind {kind!r}; expected one of {KINDS}")
    sampler = dict(cfg.get("sampler") or {})
    seed = cfg.get("seed", sampler.pop("seed", None))
    if seed is None:
        raise ConfigError("missing required field 'seed'")
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"field 'seed' must be an unsigned 64-bit integer, got {seed!r}")
    unknown = set(sampler) - _SAMPLER_KEYS
    if unknown:
        raise ConfigError(f"unknown sampler field(s) {sorted(unknown)}")
    params = dict(cfg.get("params") or {})
    for key in _REQUIRED.get(kind, ()):
        _need(params, key, "params.")
    triple = None
    if not kind.startswith("oracle-") or kind == "oracle-psi":
        if "triple" in cfg:
            try:
                triple = LevyTriple.from_dict(cfg["triple"])
            except KeyError as exc:
                raise ConfigError(f"missing required field 'triple.{exc.args[0]}'") from None
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"field 'triple': {exc}") from None
        elif "scenario" in cfg:
            try:
                triple = scenario(cfg["scenario"])
            except KeyError as exc:
                raise ConfigError(f"field 'scenario': {exc.args[0]}") from None
        else:
            raise ConfigError("missing required field 'triple' (or 'scenario')")
    try:
        scfg = SamplerConfig(seed=seed, **sampler)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field 'sampler': {exc}") from None
    return {"experiment": kind, "name": cfg.get("name", kind), "triple": triple,
            "scenario": cfg.get("scenario"), "params": params, "sampler": scfg, "seed": seed,
            "output": cfg.get("output") or {}}


def _domain(params, key="domain"):
    try:
        return domain_from_dict(params[key])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"field 'params.{key}': {exc}") from None


def _sides(triple, cfg):
    """Truncated approximation and its symmetrization."""
    approx = approximate(triple, cfg)
    return approx, symmetrize_approx(approx)


def _compare(kind, triple, params, cfg):
    approx, star = _sides(triple, cfg)
    d = approx.dim
    rich = bool(params.get("richardson", False))
    zero = np.zeros(d)
    if kind == "thm11":
        doms = params.get("domains")
        if isinstance(doms, dict) or doms is None:
            doms = [doms] * len(params["times"])
        spec = FunctionalSpec(params["times"], [function_from_dict(f) for f in params["functions"]],
                              [None if D is None else domain_from_dict(D) for D in doms],
                              start=np.asarray(params.get("start", zero), dtype=float))
        lhs = estimate_product_functional(approx, spec, cfg, tag=0)
        rhs = estimate_product_functional(star, spec.rearranged(d), cfg, tag=1)
        return lhs, rhs
    D = _domain(params)
    Ds = D.symmetrize()
    T = params.get("T")
    if kind == "survival":
        return (estimate_survival(approx, params["start"], D, T, cfg, 0, rich),
                estimate_survival(star, zero, Ds, T, cfg, 1, rich))
    if kind == "feynman-kac":
        V = potential_from_dict(params.get("potential"))
        f = function_from_dict(params.get("f", {"type": "constant", "value": 1.0}))
        return (estimate_feynman_kac(approx, params["start"], D, V, f, T, cfg, 0, rich),
                estimate_feynman_kac(star, zero, Ds, V.rearranged(D), f.rearranged(), T, cfg, 1,
                                     rich))
    if kind == "exit-moment":
        psi = psi_from_dict(params.get("psi"))
        return (estimate_exit_moment(approx, params["start"], D, psi, cfg, T, 0, rich),
                estimate_exit_moment(star, zero, Ds, psi, cfg, T, 1, rich))
    if kind == "lambda1":
        V = potential_from_dict(params.get("potential"))
        hz = params.get("horizons")
        # Faber-Krahn: the symmetrized side has the smaller decay rate
        lhs = estimate_lambda1(star, Ds, V.rearranged(D), hz, cfg, zero, 1, rich)
        rhs = estimate_lambda1(approx, D, V, hz, cfg, params.get("start"), 0, rich)
        return lhs, rhs
    if kind == "heat-content":
        return (estimate_heat_content(approx, D, T, cfg, 0, rich),
                estimate_heat_content(star, Ds, T, cfg, 1, rich))
    if kind == "torsion":
        q = params.get("time_quad", 64)
        return (estimate_torsional_rigidity(approx, D, params["T_max"], q, cfg, 0, rich),
                estimate_torsional_rigidity(star, Ds, params["T_max"], q, cfg, 1, rich))
    raise ConfigError(f"unknown comparison {kind!r}")


def _oracle(kind, params, seed, triple):
    rng = np.random.default_rng(seed)
    if kind == "oracle-bll":
        count = int(params.get("instances", 100))
        m, k = params.get("m"), params.get("k")
        res = [bll_check(random_bll_instance(rng, m, k)) for _ in range(count)]
    elif kind == "oracle-rw":
        count = int(params.get("instances", 100))
        res = [randomwalk_check(*random_walk_instance(rng)) for _ in range(count)]
    elif kind == "oracle-gauss":
        errs = gaussian_refinement(np.asarray(params["A"], float), np.asarray(params["b"], float),
                                   float(params["t"]), float(params.get("half_width", 10.0)),
                                   int(params.get("cells", 51)),
                                   int(params.get("refinements", 3)))
        ratios = errs[:-1] / errs[1:]
        ok = bool(np.all(ratios >= float(params.get("min_ratio", 1.8))))
        return ("holds" if ok else "violated", float(errs[-1]), 0.0,
                {"sup_errors": errs.tolist(), "ratios": ratios.tolist()})
    else:
        xi = params.get("xi", [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
        ns = params.get("n_list", [4, 16, 64])
        rows = exponent_convergence(triple, [np.atleast_1d(x) for x in xi], ns)
        ok = True
        for col in ("plain", "star"):
            for x in range(len(xi)):
                errs = [r[col] for r in rows[x::len(xi)]]
                ok &= all(b <= a for a, b in zip(errs, errs[1:]))
        last = [r for r in rows if r["n"] == ns[-1]]
        return ("holds" if ok else "violated", max(r["plain"] for r in last),
                max(r["star"] for r in last), {"table": rows})
    worst = max(res, key=lambda r: r["lhs"] - r["rhs"] - r["allowance"])
    ok = all(r["holds"] for r in res)
    return ("holds" if ok else "violated", worst["lhs"], worst["rhs"],
            {"instances": len(res), "failures": sum(not r["holds"] for r in res),
             "worst_allowance": worst["allowance"]})


def run_experiment(config):
    """Run one configuration; returns the JSON summary (``status`` included)."""
    c = parse_config(config)
    kind, cfg, triple = c["experiment"], c["sampler"], c["triple"]
    summary = {"experiment": c["name"], "kind": kind}
    fingerprint = dict(cfg.fingerprint(), scenario=c["scenario"], streams={"lhs": 0, "rhs": 1},
                       steps=cfg.steps, horizon=cfg.horizon, num_paths=cfg.num_paths)
    rows = []
    if kind == "validate":
        rep = validate(triple)
        verdict = "valid" if rep.valid else "invalid"
        summary.update(verdict=verdict, lhs=None, rhs=None, report=rep.to_dict())
    elif kind == "symmetrize":
        try:
            sym = symmetrize_triple(triple)
        except UnsupportedTripleError as exc:
            raise ConfigError(f"field 'triple': {exc}") from None
        summary.update(verdict="success", lhs=None, rhs=None, triple=sym.to_dict())
    elif kind in COMPARISONS:
        lhs, rhs = _compare(kind, triple, c["params"], cfg)
        verdict = compare_reports(lhs, rhs).value
        summary.update(verdict=verdict, lhs=lhs.to_dict(), rhs=rhs.to_dict())
        fingerprint["epsilon_n"] = lhs.fingerprint["epsilon_n"]
        rows = [csv_row(c["name"], "lhs", lhs, verdict), csv_row(c["name"], "rhs", rhs, verdict)]
    else:
        verdict, lhs, rhs, extra = _oracle(kind, c["params"], c["seed"], triple)
        summary.update(verdict=verdict, lhs=lhs, rhs=rhs, details=extra)
        rows = [{"experiment": kind, "side": "oracle", "mean": repr(lhs - rhs), "std_error": 0.0,
                 "num_paths": 0, "n": "", "epsilon_n": "", "m": "", "T": "",
                 "seed": c["seed"], "verdict": verdict}]
    summary["fingerprint"] = fingerprint
    summary["status"] = EXIT_CODES[summary["verdict"]]
    out = c["output"]
    if out.get("csv") and rows:
        append_csv(out["csv"], rows)
    if out.get("json"):
        with open(out["json"], "w") as fh:
            json.dump(summary, fh, indent=2, default=_default)
    summary["_rows"] = rows
    return summary


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, Verdict):
        return o.value
    raise TypeError(f"cannot serialise {type(o).__name__}")


def run_many(configs, csv_path=None, progress=None):
    """Run configurations in order; returns summaries (failures recorded, not raised)."""
    out = []
    for cfg in configs:
        try:
            s = run_experiment(cfg)
        except Exception as exc:  # recorded per experiment, suite keeps going
            s = {"experiment": cfg.get("name", cfg.get("experiment")), "verdict": "error",
                 "status": 1, "error": f"{type(exc).__name__}: {exc}", "_rows": []}
        if csv_path and s["_rows"]:
            append_csv(csv_path, s["_rows"])
        if progress:
            progress(s)
        out.append(s)
    return out
