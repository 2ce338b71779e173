"""Command-line front end: ``pnspace norm | verify | study``.

Every run prints one JSON document (keys sorted) holding ``schema``, the
command, the fully resolved configuration and the result. Settings come
from built-in defaults, then an optional TOML file (``--config``), then
command-line flags.

Exit codes: 0 pass, 1 usage, configuration or parse error, 2 numerical
failure (non-convergence, infeasible or ambiguous fit), 3 hypothesis or
admissibility violation, 4 the check ran and did not pass.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any, Callable

from . import exprlang
from .errors import (
    FitAmbiguous,
    HypothesisError,
    Infeasible,
    NoConvergence,
    PnSpaceError,
)
from .grid import make_grid
from .modulars import SpaceSpec
from .norms import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    NormResult,
    luxemburg_norm,
    metric_const,
    metric_var,
    pn_pseudonorm,
    sobolev_norm,
)
from .studies import DEFAULT_CUTOFFS, check_1d_identities, counterexample_nonlinearity, refine_study
from .transforms import psi_exponent
from .verify import checks
from .verify.families import FunctionFamily
from .verify.report import jsonable

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

SCHEMA = 1
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_HYPOTHESIS, EXIT_FAILED = 0, 1, 2, 3, 4

NORM_KINDS = ("luxemburg", "pn", "pn_theta", "sobolev", "metric_const", "metric_var")
VERIFY_IDS = ("2.1", "2.2", "2.3", "holder", "2.5", "lambda", "4.1", "4.2", "4.3", "4.4",
              "3.1", "3.2", "2.7", "metric", "homeo")
STUDY_KINDS = ("counterexample", "refine", "identities_1d")

# string-valued settings shared by the subcommands; all default to unset
_FIELDS = {
    "u": "function (expression in x, y)",
    "v": "second function for metrics",
    "w": "perturbation for the homeomorphism check",
    "p": "exponent p", "q": "conjugate exponent q",
    "alpha": "exponent alpha", "alpha1": "exponent alpha1",
    "beta": "exponent beta", "beta0": "exponent beta0", "beta1": "exponent beta1",
    "gamma": "exponent gamma", "theta": "exponent theta", "theta1": "exponent theta1",
    "psi": "exponent psi", "zeta": "exponent zeta", "xi": "exponent xi",
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- configuration


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="pnspace", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML file; flags override its values")
        for name, text in _FIELDS.items():
            p.add_argument(f"--{name}", default=None, help=text)
        p.add_argument("--domain", default=None, help="a,b or a0,b0,a1,b1")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--indent", type=int, default=None, help="pretty-print the JSON")

    n = sub.add_parser("norm", help="evaluate a norm, pseudo-norm or metric")
    common(n)
    n.add_argument("--kind", choices=NORM_KINDS, default=None)
    n.add_argument("--n", "--nodes", dest="nodes", type=int, default=None,
                   help="nodes per axis")
    n.add_argument("--m", type=int, default=None, help="order of the constant-exponent space")
    n.add_argument("--eps0", type=float, default=None)
    n.add_argument("--form", choices=("sum", "inf"), default=None)
    n.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    n.add_argument("--vanishing", action="store_const", const=True, default=None)

    v = sub.add_parser("verify", help="check an inequality or structural property")
    common(v)
    v.add_argument("--lemma", choices=VERIFY_IDS, default=None)
    v.add_argument("--n", dest="dim", type=int, default=None, help="space dimension (1 or 2)")
    v.add_argument("--nodes", type=int, default=None, help="nodes per axis")
    v.add_argument("--family", default=None, help="e.g. trig:seed=7:count=100")
    v.add_argument("--eps", type=float, default=None)
    v.add_argument("--decay", type=float, default=None)
    v.add_argument("--allow-inadmissible", dest="allow_inadmissible", action="store_const",
                   const=True, default=None)

    s = sub.add_parser("study", help="truncation studies and 1D identities")
    common(s)
    s.add_argument("--kind", choices=STUDY_KINDS, default=None)
    s.add_argument("--tau", type=float, default=None)
    s.add_argument("--nodes", type=int, default=None)
    s.add_argument("--cutoffs", default=None, help="comma-separated, strictly decreasing")
    s.add_argument("--density", type=int, default=None, help="nodes per unit length")
    s.add_argument("--expect", choices=("convergent", "divergent"), default=None)
    s.add_argument("--csv", default=None, help="write cutoff/value pairs here")
    return top


_DEFAULTS: dict[str, dict[str, Any]] = {
    "norm": {"kind": "luxemburg", "domain": "0,1", "nodes": 1025, "tol": DEFAULT_TOL,
             "max_iter": DEFAULT_MAX_ITER, "form": "sum", "m": 1, "vanishing": False},
    "verify": {"lemma": "4.1", "dim": 1, "family": "trig:seed=0:count=100", "tol": None,
               "allow_inadmissible": False, "decay": 1e-3},
    "study": {"kind": "counterexample", "domain": "0,1", "nodes": 257},
}


def _load_toml(path: str, command: str) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"invalid TOML in {path}: {exc}") from exc
    flat = {k: v for k, v in data.items() if not isinstance(v, dict)}
    flat.update(data.get(command, {}))
    if command == "verify" and "n" in flat:
        flat["dim"] = flat.pop("n")
    if command == "norm" and "n" in flat:
        flat["nodes"] = flat.pop("n")
    return flat


def resolve_config(ns: argparse.Namespace) -> dict:
    """Defaults, then TOML, then flags; unset entries are dropped."""
    cmd = ns.command
    cfg = dict(_DEFAULTS[cmd])
    if ns.config:
        cfg.update(_load_toml(ns.config, cmd))
    for key, val in vars(ns).items():
        if key in ("command", "config", "indent") or val is None:
            continue
        cfg[key] = val
    # TOML may give numbers or lists where the flags give strings
    for key in set(cfg) & (set(_FIELDS) | {"domain", "cutoffs", "family"}):
        val = cfg[key]
        if isinstance(val, list):
            cfg[key] = ",".join(repr(float(x)) for x in val)
        elif isinstance(val, (int, float)) and not isinstance(val, bool):
            cfg[key] = repr(float(val))
    return {k: v for k, v in cfg.items() if v is not None}


# ---------------------------------------------------------------- helpers


def _need(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise UsageError("missing setting(s): " + ", ".join("--" + k for k in missing))


def _float(cfg: dict, key: str) -> float:
    """A setting that must be a constant; arithmetic expressions without x, y are allowed."""
    val = cfg[key]
    if isinstance(val, (int, float)):
        return float(val)
    e = exprlang.parse(val)
    if exprlang.variables(e):
        raise UsageError(f"--{key} must be a constant, got {val!r}")
    return float(exprlang.evaluate(e))


def _exponent(cfg: dict, key: str):
    """Constant exponents become floats, anything else stays an expression string."""
    val = cfg[key]
    e = exprlang.parse(val)
    return float(exprlang.evaluate(e)) if not exprlang.variables(e) else val


def _grid(cfg: dict, nodes: int, dim: int | None = None):
    if "domain" in cfg:
        try:
            bounds = [float(s) for s in str(cfg["domain"]).split(",")]
        except ValueError as exc:
            raise UsageError(f"bad --domain {cfg['domain']!r}") from exc
    else:
        bounds = [0.0, 1.0] * (dim or 1)
    if dim is not None and len(bounds) != 2 * dim:
        raise UsageError(f"--domain has {len(bounds) // 2} axes but --n is {dim}")
    return make_grid(len(bounds) // 2, bounds, nodes)


def _result_dict(obj) -> dict:
    if isinstance(obj, NormResult):
        return obj.to_dict()
    if isinstance(obj, float):
        return {"value": obj}
    return obj.to_dict()


# ---------------------------------------------------------------- commands


def cmd_norm(cfg: dict) -> tuple[dict, bool]:
    grid = _grid(cfg, int(cfg["nodes"]))
    kind, tol = cfg["kind"], float(cfg["tol"])
    _need(cfg, "u")
    u = exprlang.sample(cfg["u"], grid)
    if kind == "luxemburg":
        _need(cfg, "p")
        res = luxemburg_norm(u, _exponent(cfg, "p"), tol, int(cfg["max_iter"]))
    elif kind == "sobolev":
        _need(cfg, "p")
        res = float(sobolev_norm(u, _exponent(cfg, "p"), tol, int(cfg["max_iter"])))
    elif kind == "pn":
        _need(cfg, "beta")
        if "gamma" in cfg:
            spec = SpaceSpec.var(_exponent(cfg, "gamma"), _exponent(cfg, "beta"))
        else:
            _need(cfg, "alpha")
            spec = SpaceSpec.const(int(cfg["m"]), _float(cfg, "alpha"), _float(cfg, "beta"),
                                   vanishing=bool(cfg["vanishing"]))
        res = pn_pseudonorm(u, spec, tol, int(cfg["max_iter"]))
    elif kind == "pn_theta":
        _need(cfg, "gamma", "beta", "theta")
        spec = SpaceSpec.var_theta(_exponent(cfg, "gamma"), _exponent(cfg, "beta"),
                                   _exponent(cfg, "theta"), cfg.get("eps0"))
        res = pn_pseudonorm(u, spec, tol, int(cfg["max_iter"]), form=cfg["form"])
    elif kind == "metric_const":
        _need(cfg, "v", "alpha", "beta")
        v = exprlang.sample(cfg["v"], grid)
        res = float(metric_const(u, v, _float(cfg, "alpha"), _float(cfg, "beta"), tol))
    else:
        _need(cfg, "v", "gamma", "beta")
        v = exprlang.sample(cfg["v"], grid)
        g, b = _exponent(cfg, "gamma"), _exponent(cfg, "beta")
        if "psi" in cfg:
            psi = _exponent(cfg, "psi")
        else:
            _need(cfg, "theta")
            psi = psi_exponent(_exponent(cfg, "theta"), g, b, float(cfg.get("eps0", 0.0)), grid)
        res = float(metric_var(u, v, g, b, psi, tol))
    out = _result_dict(res)
    value = out["value"]
    return out, bool(isinstance(value, float) and math.isfinite(value))


def _family(cfg: dict, vanishing: bool = False) -> FunctionFamily:
    dim = int(cfg["dim"])
    if dim not in (1, 2):
        raise UsageError(f"--n must be 1 or 2 for verification, got {dim}")
    nodes = int(cfg.get("nodes", 257 if dim == 1 else 65))
    grid = _grid(cfg, nodes, dim)
    fam = FunctionFamily.from_spec(str(cfg["family"]), grid)
    if vanishing and not fam.vanishing:
        fam = FunctionFamily(fam.grid, fam.kind, fam.seed, fam.count, fam.amplitude, True,
                             fam.expressions)
    return fam


def _verify_table() -> dict[str, tuple[tuple[str, ...], Callable]]:
    F, E = _float, _exponent
    return {
        "2.1": (("alpha", "beta"), lambda f, c: checks.check_lemma_2_1(
            f, F(c, "alpha"), F(c, "beta"))),
        "2.2": (("alpha", "beta", "alpha1", "beta1"), lambda f, c: checks.check_lemma_2_2(
            f, F(c, "alpha"), F(c, "beta"), F(c, "alpha1"), F(c, "beta1"))),
        "2.3": (("alpha", "beta0", "beta1"), lambda f, c: checks.check_lemma_2_3(
            f, F(c, "alpha"), F(c, "beta0"), F(c, "beta1"))),
        "holder": (("p",), lambda f, c: checks.check_holder_var(
            f, E(c, "p"), E(c, "q") if "q" in c else None)),
        "2.5": (("p",), lambda f, c: checks.check_luxemburg_sandwich(
            f, E(c, "p"), float(c.get("tol") or 1e-6))),
        "lambda": (("gamma", "beta", "theta"), lambda f, c: checks.check_lambda_sandwich(
            f, E(c, "gamma"), E(c, "beta"), E(c, "theta"), float(c.get("tol") or 1e-6))),
        "4.1": (("alpha", "beta"), lambda f, c: checks.check_lemma_4_1(
            f, E(c, "alpha"), E(c, "beta"))),
        "4.2": (("zeta", "beta", "eps"), lambda f, c: checks.check_lemma_4_2(
            f, E(c, "zeta"), F(c, "beta"), float(c["eps"]))),
        "4.3": (("xi", "beta", "beta1"), lambda f, c: checks.check_lemma_4_3(
            f, E(c, "xi"), E(c, "beta"), E(c, "beta1"))),
        "4.4": (("gamma", "beta", "theta", "xi", "alpha", "theta1"),
                lambda f, c: checks.check_lemma_4_4(
                    f, E(c, "gamma"), E(c, "beta"), E(c, "theta"), E(c, "xi"),
                    E(c, "alpha"), E(c, "theta1"))),
        "3.1": (("alpha", "beta", "p"), lambda f, c: checks.check_embedding_3_1(
            f, F(c, "alpha"), F(c, "beta"), F(c, "p"), bool(c["allow_inadmissible"]))),
        "3.2": (("alpha", "beta", "p"), lambda f, c: checks.check_embedding_3_2(
            f, F(c, "alpha"), F(c, "beta"), F(c, "p"), bool(c["allow_inadmissible"]))),
        "2.7": (("p", "gamma", "beta", "theta"), lambda f, c: checks.check_theorem_2_7(
            f, E(c, "p"), E(c, "gamma"), E(c, "beta"), E(c, "theta"))),
        "metric": (("gamma", "beta", "theta"), lambda f, c: checks.check_metric_axioms(
            f, SpaceSpec.var_theta(E(c, "gamma"), E(c, "beta"), E(c, "theta")),
            float(c.get("tol") or 1e-12))),
        "homeo": (("u", "w", "gamma", "beta", "theta"),
                  lambda f, c: checks.check_homeomorphism_sequences(
                      exprlang.sample(c["u"], f.grid), c["w"],
                      SpaceSpec.var_theta(E(c, "gamma"), E(c, "beta"), E(c, "theta")),
                      decay=float(c["decay"]))),
    }


def cmd_verify(cfg: dict) -> tuple[dict, bool]:
    lemma = cfg["lemma"]
    needs, run = _verify_table()[lemma]
    _need(cfg, *needs)
    fam = _family(cfg, vanishing=lemma in ("3.1", "3.2"))
    report = run(fam, cfg)
    return report.to_dict(), bool(report.passed)


def _cutoffs(cfg: dict) -> tuple[float, ...]:
    if "cutoffs" not in cfg:
        return DEFAULT_CUTOFFS
    try:
        return tuple(float(exprlang.evaluate(exprlang.parse(s)))
                     for s in str(cfg["cutoffs"]).split(","))
    except PnSpaceError as exc:
        raise UsageError(f"bad --cutoffs: {exc}") from exc


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def cmd_study(cfg: dict) -> tuple[dict, bool]:
    kind = cfg["kind"]
    density = int(cfg["density"]) if "density" in cfg else None
    if kind == "counterexample":
        _need(cfg, "beta", "tau", "theta")
        rep = counterexample_nonlinearity(_float(cfg, "beta"), float(cfg["tau"]),
                                          _float(cfg, "theta"), _cutoffs(cfg), density)
        if "csv" in cfg:
            names = list(rep.studies)
            cols = [rep.studies[k].values for k in names]
            _write_csv(cfg["csv"], ["cutoff", *names],
                       zip(rep.studies[names[0]].cutoffs, *cols))
        return rep.to_dict(), bool(rep.passed)
    if kind == "refine":
        _need(cfg, "u", "beta")
        if "gamma" in cfg:
            spec = SpaceSpec.var(_exponent(cfg, "gamma"), _exponent(cfg, "beta"))
        else:
            _need(cfg, "alpha")
            spec = SpaceSpec.const(1, _float(cfg, "alpha"), _float(cfg, "beta"))
        bounds = [float(s) for s in str(cfg["domain"]).split(",")]
        if len(bounds) != 2 or bounds[0] != 0.0:
            raise UsageError("refinement studies truncate (a, b) toward a = 0; use --domain 0,b")
        study = refine_study(cfg["u"], spec, _cutoffs(cfg), upper=bounds[1], density=density)
        if "csv" in cfg:
            study.to_csv(cfg["csv"])
        out = study.to_dict()
        ok = True
        if "expect" in cfg:
            ok = study.classification == cfg["expect"]
            out["expected"] = cfg["expect"]
        return out, ok
    _need(cfg, "u", "alpha", "beta")
    grid = _grid(cfg, int(cfg["nodes"]), 1)
    rep = check_1d_identities(cfg["u"], _float(cfg, "alpha"), _float(cfg, "beta"), grid)
    return rep.to_dict(), bool(rep.passed)


_COMMANDS = {"norm": cmd_norm, "verify": cmd_verify, "study": cmd_study}


def _emit(doc: dict, indent: int | None, stream) -> None:
    stream.write(json.dumps(jsonable(doc), sort_keys=True, indent=indent) + "\n")


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the diagnostic
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    doc: dict = {"schema": SCHEMA, "command": ns.command}
    try:
        cfg = resolve_config(ns)
        doc["config"] = cfg
        result, passed = _COMMANDS[ns.command](cfg)
    except (UsageError, PnSpaceError, ValueError) as exc:
        code = EXIT_USAGE
        if isinstance(exc, HypothesisError):
            code = EXIT_HYPOTHESIS
        elif isinstance(exc, (NoConvergence, Infeasible, FitAmbiguous)):
            code = EXIT_NUMERIC
        stderr.write(f"pnspace {ns.command}: {type(exc).__name__}: {exc}\n")
        if code != EXIT_USAGE:
            doc["error"] = {"type": type(exc).__name__, "message": str(exc)}
            doc["pass"] = False
            _emit(doc, ns.indent, stdout)
        return code
    doc["result"] = result
    doc["pass"] = passed
    _emit(doc, ns.indent, stdout)
    return EXIT_OK if passed else EXIT_FAILED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
