"""Batch command-line front end.

Usage::

    gausscool <command> --config job.yaml --out results/ [--force-order]

Each run writes ``result.json`` (full-precision document) and
``result.csv`` (flat table), both headed by the quadrature convention,
units, tool version and the resolved configuration. Exit codes: 0 success,
1 configuration error, 2 domain error.
"""

import argparse
import copy
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from gausscool import __version__
from gausscool.chain import ChainSpec, chain_modes, chain_synthesize_plan, frequency_planner
from gausscool.dynamics import cooled_state, cooling_operators
from gausscool.exceptions import (
    AmplitudeOverflow,
    GaussCoolError,
    InvalidInput,
)
from gausscool.gaussian import (
    QUADRATURE_CONVENTION,
    QUADRATURE_ORDERING,
    covariance_from_map,
    symplectic_spectrum,
)
from gausscool.modulation import HardwareSpec, cooling_rates, synthesize_plan
from gausscool.resonances import (
    audit_ghz,
    audit_plan,
    enumerate_resonances,
    ghz_default_eta,
    squeezing_threshold,
)
from gausscool.states import GhzSpec, compose_script, ghz_map

COMMANDS = ("build-state", "synthesize", "resonances", "audit", "chain", "plan", "cool", "fidelity")
UNITS = "2pi x MHz (config values are f/2pi in MHz)"

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_numvec = {"type": "array", "items": _num, "minItems": 1}


def _scalar_or_vec(item):
    return {"oneOf": [item, {"type": "array", "items": item, "minItems": 1}]}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


STEP_SCHEMA = {
    "oneOf": [
        _obj({"op": {"const": "squeezer"}, "j": {"type": "integer", "minimum": 0}, "r": _num},
             ["op", "j", "r"]),
        _obj({"op": {"const": "beamsplitter"}, "j": {"type": "integer", "minimum": 0},
              "l": {"type": "integer", "minimum": 0}, "theta": _num},
             ["op", "j", "l", "theta"]),
    ]
}

CONFIG_SCHEMA = _obj({
    "command": {"enum": list(COMMANDS)},
    "target": _obj({
        "ghz": _obj({
            "n_modes": {"type": "integer", "minimum": 2},
            "r1": _nonneg, "r2": _nonneg,
            "squeezing": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        }, ["n_modes"]),
        "script": _obj({
            "n_modes": {"type": "integer", "minimum": 1},
            "steps": {"type": "array", "items": STEP_SCHEMA},
        }, ["n_modes", "steps"]),
    }),
    "hardware": _obj({
        "omega": _numvec, "epsilon": _numvec,
        "layout": _obj({"eps1": _pos, "omega1": _pos, "spacing": _nonneg}, ["eps1", "omega1", "spacing"]),
        "g": {"oneOf": [_num, {"type": "array", "items": _numvec}]},
        "gamma": _scalar_or_vec(_pos),
        "kappa": _scalar_or_vec(_nonneg),
    }, ["g", "gamma"]),
    "chain": _obj({
        "topology": {"enum": ["open", "closed"]},
        "n_modes": {"type": "integer", "minimum": 1},
        "omega": _num, "J": _num, "phase": _num,
        "g_local": _scalar_or_vec(_num),
        "epsilon": _numvec,
    }, ["topology", "omega", "J", "g_local"]),
    "numerics": _obj({
        "eta_pivot": _scalar_or_vec({"type": "number", "exclusiveMinimum": 0, "maximum": 0.3}),
        "eta_scale": _pos,
        "pivot": {"oneOf": [{"type": "integer", "minimum": 0},
                            {"type": "array", "items": {"type": "integer", "minimum": 0}}]},
        "mode": {"enum": ["cooling", "lasing"]},
        "max_order": {"type": "integer", "minimum": 1},
        "near_threshold": _nonneg,
        "danger_margin": _pos,
        "dispersive_ratio": _pos,
        "cooperativity_threshold": _pos,
        "squeezing_grid": {"type": "array", "items": {"type": "number", "minimum": 0,
                                                      "exclusiveMaximum": 1}, "minItems": 1},
        "fidelity_levels": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0,
                                                       "exclusiveMaximum": 1}, "minItems": 1},
        "rate_scale": {"type": "array", "items": _nonneg, "minItems": 1},
    }),
    "planner": _obj({
        "topology": {"enum": ["open", "closed", "all_to_all"]},
        "g": _pos, "eps1": _pos, "qubit_spacing": _nonneg, "omega_min": _pos,
        "margin": _num, "n_max": {"type": "integer", "minimum": 2, "maximum": 10000},
        "law": {"enum": ["scaling", "exact"]},
        "omega1": _pos, "mode_spacing": _nonneg,
    }, ["topology", "g", "eps1", "qubit_spacing", "omega_min"]),
}, ["command"])


class ConfigError(Exception):
    def __init__(self, field, message):
        self.field = field
        super().__init__(message)


# ---------------------------------------------------------------- config


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("", f"cannot read config: {exc}") from exc
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"config is not valid YAML/JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("", "config must be a mapping")
    return cfg


def validate_config(cfg):
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        err = errors[0]
        # report the deepest error inside oneOf branches
        while err.context:
            err = max(err.context, key=lambda e: len(e.absolute_path))
        field = ".".join(str(p) for p in err.absolute_path)
        raise ConfigError(field, err.message)


def _require(cfg, *keys):
    node = cfg
    for i, k in enumerate(keys):
        if not isinstance(node, dict) or k not in node:
            raise ConfigError(".".join(keys[: i + 1]), f"'{'.'.join(keys)}' is required for this command")
        node = node[k]
    return node


def _target(cfg):
    t = _require(cfg, "target")
    if ("ghz" in t) == ("script" in t):
        raise ConfigError("target", "give exactly one of target.ghz or target.script")
    if "ghz" in t:
        return _ghz_spec(t["ghz"])
    s = t["script"]
    try:
        return compose_script(s["n_modes"], s["steps"])
    except InvalidInput as exc:
        raise ConfigError("target.script.steps", str(exc)) from exc


def _ghz_spec(g):
    n = g["n_modes"]
    if "squeezing" in g:
        if "r1" in g or "r2" in g:
            raise ConfigError("target.ghz", "give either squeezing or r1/r2, not both")
        return GhzSpec.from_squeezing_fraction(n, g["squeezing"])
    if "r1" not in g:
        raise ConfigError("target.ghz.r1", "r1 (or squeezing) is required")
    return GhzSpec(n, g["r1"], g.get("r2", g["r1"]))


def _target_map(cfg):
    t = _target(cfg)
    return ghz_map(t) if isinstance(t, GhzSpec) else t


def _n_modes(cfg):
    t = _require(cfg, "target")
    return (t.get("ghz") or t.get("script") or {}).get("n_modes")


def _hardware(cfg, n_modes):
    h = _require(cfg, "hardware")
    if "layout" in h:
        if "omega" in h or "epsilon" in h:
            raise ConfigError("hardware.layout", "layout excludes explicit omega/epsilon")
        if n_modes is None:
            raise ConfigError("hardware.layout", "layout needs a target giving n_modes")
        lay = h["layout"]
        steps = lay["spacing"] * np.arange(n_modes)
        omega, epsilon = lay["omega1"] - steps, lay["eps1"] - steps
    else:
        omega, epsilon = _require(cfg, "hardware", "omega"), _require(cfg, "hardware", "epsilon")
    if n_modes is not None and len(omega) != n_modes:
        raise ConfigError("hardware.omega", f"expected {n_modes} mode frequencies")
    try:
        return HardwareSpec(omega, epsilon, h["g"], h["gamma"], h.get("kappa", 0.0))
    except InvalidInput as exc:
        raise ConfigError("hardware", str(exc)) from exc


def _numerics(cfg):
    return cfg.get("numerics", {})


def _eta_pivot(cfg, n_modes):
    num = _numerics(cfg)
    if "eta_pivot" in num:
        return num["eta_pivot"]
    return ghz_default_eta(n_modes, num.get("eta_scale", 0.1))


# ---------------------------------------------------------------- serialization


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _jsonable(x.real), "im": _jsonable(x.imag)}
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if isinstance(v, (complex, np.complexfloating)):
        return "%.17g%+.17gj" % (v.real, v.imag)
    if isinstance(v, (tuple, list)):
        return ";".join(str(int(x)) for x in v)
    return str(v)


def header(cfg):
    return {
        "tool": "gausscool",
        "version": __version__,
        "quadrature_ordering": QUADRATURE_ORDERING,
        "quadrature_convention": QUADRATURE_CONVENTION,
        "units": UNITS,
        "config": cfg,
    }


def emit_results(out_dir, cfg, result, columns, rows):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"header": header(cfg), "result": result}
    (out / "result.json").write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    buf = io.StringIO()
    for line in json.dumps(_jsonable(header(cfg)), sort_keys=True).splitlines():
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    (out / "result.csv").write_text(buf.getvalue())


# ---------------------------------------------------------------- commands


def _plan_rows(plan):
    rows = []
    n = plan.n_modes
    for j in range(n):
        for m in range(2 * n):
            rows.append((j, m, "red" if m < n else "blue", plan.Omega[j, m], plan.eta[j, m],
                         plan.phi[j, m], plan.gbar[j].real, plan.gbar[j].imag))
    return rows


PLAN_COLUMNS = ["j", "m", "sideband", "Omega", "eta", "phi", "gbar_re", "gbar_im"]


def _plan_doc(plan):
    return {"Omega": plan.Omega, "eta": plan.eta, "phi": plan.phi, "gbar": plan.gbar,
            "mode": plan.mode, "pivot": plan.pivot, "eta_max": plan.eta_max}


def cmd_build_state(cfg, opts):
    gmap = _target_map(cfg)
    V = covariance_from_map(gmap)
    n = gmap.n_modes
    rows = [(i, k, V[i, k]) for i in range(2 * n) for k in range(2 * n)]
    result = {"n_modes": n, "A": gmap.A, "B": gmap.B, "covariance": V,
              "symplectic_spectrum": symplectic_spectrum(V),
              "eigenvalues": np.linalg.eigvalsh(V)}
    return result, ["row", "col", "V"], rows


def cmd_synthesize(cfg, opts):
    gmap = _target_map(cfg)
    hw = _hardware(cfg, gmap.n_modes)
    num = _numerics(cfg)
    plan = synthesize_plan(gmap, hw, _eta_pivot(cfg, gmap.n_modes), num.get("mode", "cooling"),
                           num.get("pivot"))
    rates = cooling_rates(plan, hw, num.get("cooperativity_threshold", 10.0))
    result = {"plan": _plan_doc(plan), "cooling_rates": rates.rates,
              "cooperativities": rates.cooperativities, "low_cooperativity": rates.flagged,
              "hardware_issues": hw.diagnostics(num.get("dispersive_ratio", 10.0))}
    return result, PLAN_COLUMNS, _plan_rows(plan)


def cmd_resonances(cfg, opts):
    num = _numerics(cfg)
    plan = None
    if "target" in cfg:
        gmap = _target_map(cfg)
        hw = _hardware(cfg, gmap.n_modes)
        plan = synthesize_plan(gmap, hw, _eta_pivot(cfg, gmap.n_modes), num.get("mode", "cooling"),
                               num.get("pivot"))
    else:
        hw = _hardware(cfg, None)
    rep = enumerate_resonances(hw, num.get("max_order", 3), num.get("near_threshold", 0.0), plan,
                               num.get("danger_margin", 10.0), force=opts.force_order)
    rows = [(e.j, e.l, e.channel, e.n, e.order, e.nu, e.weight, e.exact, e.designed, e.dangerous)
            for e in rep.entries]
    summary = {}
    for e in rep.entries:
        key = f"order_{e.order}_{'exact' if e.exact else 'near'}"
        summary[key] = summary.get(key, 0) + 1
    result = {"max_order": rep.max_order, "exact_tol": rep.exact_tol, "counts": summary,
              "n_entries": len(rep.entries), "n_dangerous": sum(e.dangerous for e in rep.entries)}
    cols = ["j", "l", "channel", "n_vector", "order", "nu", "weight", "exact", "designed", "dangerous"]
    return result, cols, rows


AUDIT_COLUMNS = ["squeezing_fraction", "r", "eta_max", "fidelity", "gtilde_over_gbar_maxdev"]


def cmd_audit(cfg, opts):
    t = _target(cfg)
    if not isinstance(t, GhzSpec):
        hw = _hardware(cfg, t.n_modes)
        num = _numerics(cfg)
        plan = synthesize_plan(t, hw, _eta_pivot(cfg, t.n_modes), "cooling", num.get("pivot"))
        a = audit_plan(plan, hw)
        result = {"fidelity": a.fidelity, "eta_max": a.eta_max, "gbar": a.gbar, "gtilde": a.gtilde,
                  "symmetric_residual": a.symmetric_residual}
        return result, ["fidelity", "eta_max", "gtilde_over_gbar_maxdev"], [
            (a.fidelity, a.eta_max, a.gtilde_over_gbar_maxdev)]
    n = t.n_modes
    hw = _hardware(cfg, n)
    eta1 = _eta_pivot(cfg, n)
    grid = _numerics(cfg).get("squeezing_grid")
    specs = [t] if grid is None else [GhzSpec.from_squeezing_fraction(n, f) for f in grid]
    rows, points = [], []
    for s in specs:
        a = audit_ghz(s, hw, eta1)
        frac = -math.expm1(-2 * s.r1)
        rows.append((frac, s.r1, a.eta_max, a.fidelity, a.gtilde_over_gbar_maxdev))
        points.append({"squeezing_fraction": frac, "r1": s.r1, "r2": s.r2, "fidelity": a.fidelity,
                       "eta_max": a.eta_max, "gbar": a.gbar, "gtilde": a.gtilde,
                       "symmetric_residual": a.symmetric_residual})
    return {"n_modes": n, "eta_pivot": eta1, "points": points}, AUDIT_COLUMNS, rows


def cmd_fidelity(cfg, opts):
    n = _require(cfg, "target", "ghz", "n_modes")
    hw = _hardware(cfg, n)
    eta1 = _eta_pivot(cfg, n)
    levels = _numerics(cfg).get("fidelity_levels", [0.99, 0.95, 0.9])
    rows = []
    for lv in levels:
        f = squeezing_threshold(n, hw, eta1, lv)
        rows.append((lv, f, -0.5 * math.log1p(-f)))
    result = {"n_modes": n, "eta_pivot": eta1,
              "thresholds": [{"fidelity": lv, "squeezing_fraction": f, "r": r} for lv, f, r in rows]}
    return result, ["fidelity", "squeezing_fraction", "r"], rows


def cmd_chain(cfg, opts):
    c = _require(cfg, "chain")
    gmap = _target_map(cfg)
    n = c.get("n_modes", gmap.n_modes)
    if n != gmap.n_modes:
        raise ConfigError("chain.n_modes", "chain and target sizes differ")
    try:
        chain = ChainSpec(c["topology"], n, c["omega"], c["J"], c["g_local"], c.get("phase", 0.0),
                          c.get("epsilon"))
    except InvalidInput as exc:
        raise ConfigError("chain", str(exc)) from exc
    basis = chain_modes(chain)
    plan = chain_synthesize_plan(chain, gmap, _eta_pivot(cfg, n), _numerics(cfg).get("pivot"), basis)
    result = {"normal_mode_frequencies": basis.frequencies, "wavenumbers": basis.wavenumbers,
              "plan": _plan_doc(plan)}
    return result, PLAN_COLUMNS, _plan_rows(plan)


def cmd_plan(cfg, opts):
    p = _require(cfg, "planner")
    rep = frequency_planner(p["topology"], p["g"], p["eps1"], p["qubit_spacing"], p["omega_min"],
                            p.get("margin"), p.get("n_max", 200), p.get("law", "scaling"),
                            p.get("omega1"), p.get("mode_spacing"))
    cols = ["n_modes", "J", "omega_min", "omega_max", "eps_min", "margin_over_g", "feasible"]
    rows = [(r.n_modes, r.J, r.omega_min, r.omega_max, r.eps_min, r.margin, r.feasible)
            for r in rep.rows]
    return {"topology": rep.topology, "max_n": rep.max_n, "threshold": rep.threshold}, cols, rows


def cmd_cool(cfg, opts):
    gmap = _target_map(cfg)
    hw = _hardware(cfg, gmap.n_modes)
    num = _numerics(cfg)
    engineered = cooling_operators(gmap)
    plan = synthesize_plan(engineered, hw, _eta_pivot(cfg, gmap.n_modes), "cooling", num.get("pivot"))
    base = np.abs(plan.gbar) ** 2 / hw.gamma
    rows, points = [], []
    for s in num.get("rate_scale", [1.0]):
        rep = cooled_state(engineered, s * base, hw.kappa)
        coop = float(np.min(rep.cooperativities))
        rows.append((s, coop, rep.fidelity, float(np.max(rep.occupations)), rep.residual))
        points.append({"rate_scale": s, "fidelity": rep.fidelity, "occupations": rep.occupations,
                       "cooperativities": rep.cooperativities, "covariance": rep.covariance,
                       "lyapunov_residual": rep.residual})
    result = {"plan": _plan_doc(plan), "target_covariance": covariance_from_map(gmap),
              "points": points}
    cols = ["rate_scale", "min_cooperativity", "fidelity", "max_occupation", "lyapunov_residual"]
    return result, cols, rows


HANDLERS = {
    "build-state": cmd_build_state,
    "synthesize": cmd_synthesize,
    "resonances": cmd_resonances,
    "audit": cmd_audit,
    "chain": cmd_chain,
    "plan": cmd_plan,
    "cool": cmd_cool,
    "fidelity": cmd_fidelity,
}


# ---------------------------------------------------------------- entry point


def _write_error(out_dir, code, kind, field, message):
    record = {"error": {"exit_code": code, "kind": kind, "field": field, "message": message}}
    text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    sys.stderr.write(text)
    try:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "error.json").write_text(text)
    except OSError:
        pass


def _error_field(exc):
    if isinstance(exc, AmplitudeOverflow):
        return f"eta[{exc.j},{exc.m}]"
    k1 = getattr(exc, "k1", None)
    if k1 is not None:
        return f"k={exc.k1},{exc.k2}"
    return ""


def run(command, config_path, out_dir, force_order=False):
    """Execute one job; returns the process exit status."""
    try:
        cfg = load_config(config_path)
        cfg.setdefault("command", command)
        validate_config(cfg)
        if cfg["command"] != command:
            raise ConfigError("command", f"config is for '{cfg['command']}', not '{command}'")
        resolved = copy.deepcopy(cfg)
    except ConfigError as exc:
        _write_error(out_dir, 1, "ConfigError", exc.field, str(exc))
        return 1
    opts = argparse.Namespace(force_order=force_order)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result, cols, rows = HANDLERS[command](cfg, opts)
        result = dict(result)
        result["warnings"] = sorted({str(w.message) for w in caught})
    except ConfigError as exc:
        _write_error(out_dir, 1, "ConfigError", exc.field, str(exc))
        return 1
    except GaussCoolError as exc:
        _write_error(out_dir, 2, type(exc).__name__, _error_field(exc), str(exc))
        return 2
    try:
        emit_results(out_dir, resolved, result, cols, rows)
    except OSError as exc:
        _write_error(out_dir, 1, "OutputError", "out", str(exc))
        return 1
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="gausscool", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="YAML or JSON job file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--force-order", action="store_true",
                        help="allow resonance enumeration beyond order 5 for large registers")
    args = parser.parse_args(argv)
    return run(args.command, args.config, args.out, args.force_order)


if __name__ == "__main__":
    sys.exit(main())
