"""Command-line front end: one subcommand per experiment.

Every emitted file records the full run configuration, either as the leading
``config`` key of a JSON document or as a ``# config: {...}`` first line of a
CSV file, and ``lanalytic rerun FILE`` replays it.

Exit codes: 0 ok, 2 not elliptic, 64 usage, 65 infeasible configuration,
74 I/O error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .approx import boundary_data, convergence_sweep, max_principle_probe
from .errors import LAnalyticError, NotElliptic, RankDeficientWarning
from .geom import (
    BoundaryCurve,
    ConformalMapFamily,
    curve_from_map,
    make_holder_map,
    make_poly_map,
)
from .lacunary import (
    LacunarySpec,
    check_conditions,
    h2_norm_psi_prime,
    lacunary_csv,
    l1_psi_second_lower_bound,
)
from .opcore import CanonicalForm, EllipticOperator, classify, reduce, rotate_parameter
from .probe import SolutionPair, decay_experiment, eval_Mn, make_bump

EXIT_OK = 0
EXIT_NOT_ELLIPTIC = 2
EXIT_USAGE = 64
EXIT_INFEASIBLE = 65
EXIT_IO = 74


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# config and parsing helpers


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def to_json(self) -> dict:
        return {"command": self.command, "params": self.params, "seed": self.seed}

    @classmethod
    def from_json(cls, d: dict) -> "RunConfig":
        return cls(d["command"], dict(d.get("params", {})), int(d.get("seed", 0)))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def parse_range(text: str) -> list[int]:
    """``a``, ``a:b``, ``a:b:s`` or ``a:b:xF`` (geometric factor ``F``), inclusive."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [int(parts[0])]
        a, b = int(parts[0]), int(parts[1])
        if len(parts) == 2:
            step = "1"
        elif len(parts) == 3:
            step = parts[2]
        else:
            raise ValueError
        if a > b:
            raise ValueError
        if step.startswith("x"):
            factor = float(step[1:])
            if factor <= 1:
                raise ValueError
            out, v = [], float(a)
            while int(round(v)) <= b:
                n = int(round(v))
                if not out or n != out[-1]:
                    out.append(n)
                v *= factor
            if out[-1] != b:
                out.append(b)
            return out
        s = int(step)
        if s <= 0:
            raise ValueError
        return list(range(a, b + 1, s))
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected a, a:b, a:b:s or a:b:xF") from None


def parse_complex_list(text: str) -> list[complex]:
    try:
        return [complex(s.strip().replace(" ", "")) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad coefficient list {text!r}") from None


def parse_domain(spec: str, normalize: bool) -> BoundaryCurve:
    """``disk``, ``holder:ALPHA,C`` or ``poly:M,C``."""
    name, _, arg = spec.partition(":")
    vals = [s for s in arg.split(",") if s]
    try:
        if name == "disk" and not vals:
            cmap = ConformalMapFamily("disk")
        elif name == "holder" and len(vals) == 2:
            cmap = make_holder_map(float(vals[0]), complex(vals[1]))
        elif name == "poly" and len(vals) == 2:
            cmap = make_poly_map(int(vals[0]), complex(vals[1]))
        else:
            raise UsageError(f"bad domain {spec!r}; expected disk, holder:ALPHA,C or poly:M,C")
    except ValueError as exc:
        if isinstance(exc, LAnalyticError):
            raise
        raise UsageError(f"bad domain {spec!r}") from None
    return curve_from_map(cmap, normalize=normalize)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(float(x.real)), _jsonable(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def _json_doc(cfg: RunConfig, body: dict) -> str:
    doc = {"config": cfg.to_json()}
    doc.update(body)
    return json.dumps(_jsonable(doc), indent=2) + "\n"


def _csv_with_config(cfg: RunConfig, csv_text: str) -> str:
    lines = csv_text.splitlines(keepends=True)
    if lines and lines[0].startswith("# config:"):
        lines = lines[1:]
    return f"# config: {cfg.dumps()}\n" + "".join(lines)


# ---------------------------------------------------------------------------
# commands: each returns (exit code, {"json": text, "csv": text, "svg": text})

Outputs = dict[str, str]


def _operator(p: dict) -> EllipticOperator:
    return EllipticOperator.from_reals(*p["coeffs"])


def cmd_classify(cfg: RunConfig) -> tuple[int, Outputs]:
    op = _operator(cfg.params)
    kind = classify(op, cfg.params.get("tol", 1e-10))
    code = EXIT_NOT_ELLIPTIC if kind.value == "not_elliptic" else EXIT_OK
    return code, {"json": json.dumps({"class": kind.value}) + "\n"}


def cmd_reduce(cfg: RunConfig) -> tuple[int, Outputs]:
    op = _operator(cfg.params)
    try:
        cf = reduce(op)
    except NotElliptic as exc:
        return EXIT_NOT_ELLIPTIC, {"json": json.dumps({"error": "not_elliptic", "detail": str(exc)}) + "\n"}
    return EXIT_OK, {"json": json.dumps(_jsonable(cf.to_json())) + "\n"}


def _canonical(p: dict) -> CanonicalForm:
    return CanonicalForm.standard(p["kind"], p["tau"])


def _effective_tau(p: dict, curve: BoundaryCurve) -> complex:
    """The canonical ``tau`` follows the rigid motion that normalizes the domain."""
    return rotate_parameter(p["tau"], -curve.rotation) if p.get("normalize") else complex(p["tau"])


def cmd_sweep(cfg: RunConfig) -> tuple[int, Outputs]:
    p = cfg.params
    curve = parse_domain(p["domain"], p.get("normalize", False))
    psi = boundary_data(p["data"], curve)
    rep = convergence_sweep(_canonical(p), curve, psi, parse_range(p["degrees"]),
                            p["res_tol"], p["ratio_cap"], method=p["method"], M=p.get("M"),
                            tau=_effective_tau(p, curve), config=cfg.to_json())
    return EXIT_OK, {"json": _json_doc(cfg, {k: v for k, v in rep.summary().items() if k != "config"}),
                     "csv": _csv_with_config(cfg, rep.to_csv())}


def cmd_probe(cfg: RunConfig) -> tuple[int, Outputs]:
    p = cfg.params
    curve = parse_domain(p["domain"], True)
    tau = rotate_parameter(p["tau"], -curve.rotation) if p["tau"] else 0j
    f = SolutionPair.from_coeffs(parse_complex_list(p["h"]), parse_complex_list(p["g"]),
                                 tau, bianalytic=p.get("bianalytic", False))
    bump = make_bump(complex(p["zeta"]), p["eps"])
    ns = parse_range(p["n"])
    rep = decay_experiment(bump, curve, f, ns, window=(ns[0], ns[-1]), config=cfg.to_json())
    ident = [abs(abs(eval_Mn(bump, lambda z, n=n: -1j * np.conj(z) ** (n + 1), n)) - bump.mu0) / bump.mu0
             for n in ns]
    body = {k: v for k, v in rep.summary().items() if k != "config"}
    body.update(mu0=bump.mu0, rotated_tau=tau, norm_identity_max_rel_error=max(ident))
    out = {"json": _json_doc(cfg, body), "csv": _csv_with_config(cfg, rep.to_csv())}
    if p.get("svg"):
        out["svg"] = f"<!-- config: {cfg.dumps()} -->\n" + rep.to_svg() + "\n"
    return EXIT_OK, out


def cmd_maxprobe(cfg: RunConfig) -> tuple[int, Outputs]:
    p = cfg.params
    curve = parse_domain(p["domain"], p.get("normalize", False))
    z0 = curve.centroid() if p.get("z0") in (None, "centroid") else complex(p["z0"])
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficientWarning)
        for n in parse_range(p["n"]):
            res = max_principle_probe(_canonical(p), curve, z0, n, tau=_effective_tau(p, curve))
            rows.append({"n": n, "boundary_sup": res.boundary_sup, "amplification": res.amplification,
                         "coefficients": res.coefficients})
    amps = [r["amplification"] for r in rows]
    increasing = all(b > a for a, b in zip(amps, amps[1:]))
    return EXIT_OK, {"json": _json_doc(cfg, {"z0": z0, "rows": rows, "strictly_increasing": increasing})}


def cmd_lacunary(cfg: RunConfig) -> tuple[int, Outputs]:
    p = cfg.params
    spec = LacunarySpec(K=p["K"], k0=p["k0"], rule=p["rule"])
    cond = check_conditions(spec)
    bound = l1_psi_second_lower_bound(spec)
    h2 = h2_norm_psi_prime(spec)
    body = {"min_ratio": cond.min_ratio, "double_sum_partial": cond.double_sum_partial,
            "conditions_ok": cond.ok, "h2_norm": h2.value, "h2_norm_squared": h2.squared,
            "h2_tail_bound": h2.tail_bound, "l1_partial_sum": bound.partial_sum,
            "harmonic_reference": bound.harmonic_reference}
    return EXIT_OK, {"csv": _csv_with_config(cfg, lacunary_csv(spec)), "json": _json_doc(cfg, body)}


def cmd_bumpcheck(cfg: RunConfig) -> tuple[int, Outputs]:
    p = cfg.params
    bump = make_bump(complex(p["zeta"]), p["eps"])
    rows = []
    for n in parse_range(p["n"]):
        v = eval_Mn(bump, lambda z, n=n: -1j * np.conj(z) ** (n + 1), n)
        rows.append({"n": n, "abs_Mn": abs(v), "rel_error": abs(abs(v) - bump.mu0) / bump.mu0})
    body = {"mu0": bump.mu0, "area_norm": bump.area_norm, "half_width": bump.half_width,
            "max_rel_error": max(r["rel_error"] for r in rows), "rows": rows}
    return EXIT_OK, {"json": _json_doc(cfg, body)}


COMMANDS: dict[str, Callable[[RunConfig], tuple[int, Outputs]]] = {
    "classify": cmd_classify,
    "reduce": cmd_reduce,
    "sweep": cmd_sweep,
    "probe": cmd_probe,
    "maxprobe": cmd_maxprobe,
    "lacunary": cmd_lacunary,
    "bumpcheck": cmd_bumpcheck,
}


# ---------------------------------------------------------------------------
# argument parsing


def _add_outputs(sp, kinds=("json", "csv")):
    # repeated here so the flags work on either side of the subcommand
    sp.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="same as the global --seed")
    sp.add_argument("--dry-run", action="store_true", default=argparse.SUPPRESS,
                    help="validate and print the config only")
    for k in kinds:
        sp.add_argument(f"--{k}", dest=f"out_{k}", metavar="PATH", help=f"write {k.upper()} output here")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lanalytic", description="Elliptic operators with complex coefficients, "
                 "L-analytic polynomial fitting and decay experiments.")
    ap.add_argument("--seed", type=int, default=0, help="recorded in every config (default 0)")
    ap.add_argument("--dry-run", action="store_true", help="validate and print the config only")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name in ("classify", "reduce"):
        sp = sub.add_parser(name, help=f"{name} an operator given as six reals")
        sp.add_argument("coeffs", type=float, nargs=6,
                        metavar="X", help="Re c11, Im c11, Re c12, Im c12, Re c22, Im c22")
        _add_outputs(sp, ("json",))

    sp = sub.add_parser("sweep", help="degree sweep of Dirichlet fits")
    sp.add_argument("--kind", choices=["se", "nse"], required=True)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--domain", default="disk")
    sp.add_argument("--normalize", action="store_true")
    sp.add_argument("--data", required=True, help="trace_of:MONO, inv_pole:A, abs_cos, abs_z, fourier:k:c,...")
    sp.add_argument("--degrees", required=True)
    sp.add_argument("--res-tol", type=float, default=1e-3)
    sp.add_argument("--ratio-cap", type=float, default=10.0)
    sp.add_argument("--method", choices=["l2", "lawson"], default="lawson")
    sp.add_argument("--M", type=int, default=None)
    _add_outputs(sp)

    sp = sub.add_parser("probe", help="decay of M_n on a solution trace")
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--c", default="0.4", help="holder map coefficient")
    sp.add_argument("--tau", type=float, default=0.5)
    sp.add_argument("--bianalytic", action="store_true")
    sp.add_argument("--h", default="0,0,1", help="coefficients of h, lowest first")
    sp.add_argument("--g", default="0,0,0,1", help="coefficients of g, lowest first")
    sp.add_argument("--n", default="32:512:x1.4142135623730951")
    sp.add_argument("--eps", type=float, default=0.3)
    sp.add_argument("--zeta", default="1")
    _add_outputs(sp, ("json", "csv", "svg"))

    sp = sub.add_parser("maxprobe", help="weak maximum principle probe")
    sp.add_argument("--kind", choices=["se", "nse"], required=True)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--domain", default="disk")
    sp.add_argument("--normalize", action="store_true")
    sp.add_argument("--z0", default="centroid")
    sp.add_argument("--n", default="4:32:x2")
    _add_outputs(sp, ("json",))

    sp = sub.add_parser("lacunary", help="lacunary series diagnostics")
    sp.add_argument("--K", type=int, default=8)
    sp.add_argument("--k0", type=int, default=2)
    sp.add_argument("--rule", default="2^k^2", choices=["2^k^2", "3^k", "4^k"])
    _add_outputs(sp)

    sp = sub.add_parser("bumpcheck", help="bump normalization and the norm identity")
    sp.add_argument("--eps", type=float, default=0.3)
    sp.add_argument("--zeta", default="1")
    sp.add_argument("--n", default="8:256:8")
    _add_outputs(sp, ("json",))

    sp = sub.add_parser("rerun", help="replay the config recorded in an output file")
    sp.add_argument("config", metavar="FILE")
    _add_outputs(sp, ("json", "csv", "svg"))
    return ap


_NON_PARAMS = {"command", "seed", "dry_run", "out_json", "out_csv", "out_svg", "config"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(ns).items() if k not in _NON_PARAMS}
    if ns.command == "probe":
        params["domain"] = f"holder:{params.pop('alpha')},{params.pop('c')}"
        params["svg"] = bool(ns.out_svg)
        if params["bianalytic"]:
            params["tau"] = 0.0
    if ns.command in ("sweep", "probe", "maxprobe", "bumpcheck"):
        for key in ("degrees", "n"):
            if key in params:
                parse_range(params[key])
    return RunConfig(ns.command, params, ns.seed)


def load_config(path: str) -> RunConfig:
    with open(path) as fh:
        text = fh.read()
    first = text.split("\n", 1)[0]
    for marker in ("# config:", "<!-- config:"):
        if first.startswith(marker):
            body = first[len(marker):].strip()
            if body.endswith("-->"):
                body = body[:-3].strip()
            return RunConfig.from_json(json.loads(body))
    doc = json.loads(text)
    return RunConfig.from_json(doc["config"] if "config" in doc else doc)


def run(cfg: RunConfig) -> tuple[int, Outputs]:
    if cfg.command not in COMMANDS:
        raise UsageError(f"unknown command {cfg.command!r}")
    return COMMANDS[cfg.command](cfg)


def _emit(outputs: Outputs, paths: dict[str, str | None], stdout) -> None:
    # files first, so an I/O failure leaves stdout empty
    for kind in ("json", "csv", "svg"):
        if kind in outputs and paths.get(kind):
            with open(paths[kind], "w", newline="") as fh:
                fh.write(outputs[kind])
    # whatever the command lists first goes to stdout
    rest = [k for k in outputs if not paths.get(k)]
    if rest:
        stdout.write(outputs[rest[0]])


def main(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    paths = {k: getattr(ns, f"out_{k}", None) for k in ("json", "csv", "svg")}
    try:
        cfg = load_config(ns.config) if ns.command == "rerun" else config_from_args(ns)
        if ns.dry_run:
            stdout.write(json.dumps({"dry_run": True, "config": cfg.to_json()}, sort_keys=True) + "\n")
            return EXIT_OK
        code, outputs = run(cfg)
        _emit(outputs, paths, stdout)
        return code
    except UsageError as exc:
        sys.stderr.write(f"lanalytic: error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"lanalytic: I/O error: {exc}\n")
        return EXIT_IO
    except (LAnalyticError, ValueError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"lanalytic: infeasible configuration: {exc}\n")
        return EXIT_INFEASIBLE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
