"""Command-line front end: ``classify``, ``region`` and ``sweep``.

Exit codes: 0 success / Valid, 1 Invalid, 2 Unknown, 3 a threshold set in the
config was exceeded, 64 usage or parse error, 74 output could not be written.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from . import __version__
from .exponents import TupleParseError, beta, classify, format_tuple, parse_tuple
from .grid import GridSpec

EXIT_OK, EXIT_INVALID, EXIT_UNKNOWN, EXIT_THRESHOLD = 0, 1, 2, 3
EXIT_USAGE, EXIT_IO = 64, 74
VERDICT_CODES = {"Valid": EXIT_OK, "Invalid": EXIT_INVALID, "Unknown": EXIT_UNKNOWN}
ENV_OUT = "STRICHARTZ_LAB_OUT"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def write_atomic(path: Path, text: str) -> Path:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

def _fraction(text: str) -> Fraction:
    return Fraction(text.strip())


def _int(text: str) -> int:
    return int(text.strip())


def _float(text: str) -> float:
    return float(Fraction(text.strip()))


def _fractions(text: str) -> list[Fraction]:
    return [Fraction(x.strip()) for x in text.split(",") if x.strip()]


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


REQUIRED = object()
_TUPLE = {"n": (_int, REQUIRED), "1/r": (_fraction, REQUIRED), "1/rt": (_fraction, REQUIRED),
          "1/q": (_fraction, REQUIRED), "1/qt": (_fraction, REQUIRED)}
_COMMON = {"seed": (_int, None), "plot": (_bool, False)}

SCHEMAS = {
    "dispersive": {"n": (_int, REQUIRED), "points_per_axis": (_int, None), "width": (_float, 0.25),
                   "samples": (_int, 65), "max_growth": (_float, None)},
    "strichartz": {"n": (_int, REQUIRED), "1/q": (_fraction, REQUIRED), "1/r": (_fraction, REQUIRED),
                   "trials": (_int, 50), "points_per_axis": (_int, None), "dt": (_float, 0.125),
                   "max_ratio": (_float, None)},
    "bilinear": {**_TUPLE, "j_min": (_int, -2), "j_max": (_int, 6), "trials": (_int, 2),
                 "steps": (_int, 6), "refine": (_int, 0), "fit_j_min": (_int, 2),
                 "max_spread": (_float, None), "slope_tolerance": (_float, None)},
    "counterexample": {**_TUPLE, "eps": (_fractions, [Fraction(1, 2 ** k) for k in (2, 3, 4, 5)]),
                       "time_points": (_int, 8), "shell_points": (_int, 64),
                       "slope_tolerance": (_float, None), "ratio_tolerance": (_float, None)},
    "atoms-audit": {"seeds": (_int, 200), "p": (_fractions, [Fraction(1), Fraction(3, 2), Fraction(2), Fraction(4)]),
                    "n": (_int, 2), "points_per_axis": (_int, 64), "max_C_a": (_float, None),
                    "max_C_s": (_float, None), "max_C_c": (_float, None),
                    "max_reconstruction": (_float, None)},
}


def parse_config(text: str, experiment: str) -> tuple[dict, dict]:
    """Strict flat ``key=value`` parsing.  Returns (typed values, raw strings)."""
    schema = {**SCHEMAS[experiment], **_COMMON}
    raw: dict[str, str] = {}
    unknown, errors = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key=value, got {line!r}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in schema:
            unknown.append(key)
        elif key in raw:
            errors.append(f"line {lineno}: duplicate key {key!r}")
        else:
            raw[key] = value
    if unknown:
        errors.append("unknown keys: " + ", ".join(sorted(unknown)))
    missing = [k for k, (_, d) in schema.items() if d is REQUIRED and k not in raw]
    if missing:
        errors.append("missing required keys: " + ", ".join(missing))
    values = {}
    for key, (conv, default) in schema.items():
        if key in raw:
            try:
                values[key] = conv(raw[key])
            except (ValueError, ZeroDivisionError) as exc:
                errors.append(f"{key}: cannot parse {raw[key]!r} ({exc})")
        else:
            values[key] = default
    if errors:
        raise UsageError("; ".join(errors))
    return values, raw


def _tuple_from(cfg: dict):
    text = " ".join(f"{k}={cfg[k]}" for k in ("n", "1/r", "1/rt", "1/q", "1/qt"))
    try:
        return parse_tuple(text)
    except TupleParseError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(ENV_OUT) or ".")


def _say(args, text: str):
    if not args.quiet:
        print(text)


def cmd_classify(args) -> int:
    try:
        t = parse_tuple(args.tuple, args.n)
    except TupleParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    c = classify(t)
    slack = c.csv_row()[2]
    _say(args, f"{c.verdict}: {c.source} (slack {slack})")
    _say(args, ",".join([format_tuple(t)] + [f'"{x}"' if "," in x else x for x in c.csv_row()]))
    return VERDICT_CODES[c.verdict]


def cmd_region(args) -> int:
    from .svg import region_svg, vertex_csv

    if args.n < 3:
        print(f"region diagram needs n >= 3, got {args.n}", file=sys.stderr)
        return EXIT_USAGE
    out = _out_dir(args)
    try:
        svg = write_atomic(out / f"region_n{args.n}.svg", region_svg(args.n))
        csv_path = write_atomic(out / f"region_n{args.n}.csv", vertex_csv(args.n))
    except OSError as exc:
        print(f"cannot write to {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    _say(args, f"wrote {svg} and {csv_path}")
    return EXIT_OK


def _spec(n: int, points, dt: float = 0.125) -> GridSpec:
    return GridSpec(n, points, dt=dt) if points else GridSpec.default(n, dt=dt)


def run_experiment(name: str, cfg: dict, seed: int, threads: int | None):
    """Run one configured experiment; returns (csv text, breaches, plot or None)."""
    from . import experiments as ex
    from .svg import loglog_svg

    config = {k: _show(v) for k, v in cfg.items() if v is not None}
    config["seed"] = seed
    breaches: list[str] = []
    plot = None

    if name == "dispersive":
        recs = ex.dispersive_sweep(cfg["n"], cfg["width"], cfg["samples"], _spec(cfg["n"], cfg["points_per_axis"]))
        base = recs[0].ratios["ratio"]
        growth = max(r.ratios["ratio"] for r in recs) / base
        if cfg["max_growth"] is not None and growth > cfg["max_growth"]:
            breaches.append(f"growth {growth:.4g} > max_growth {cfg['max_growth']}")
        text = ex.records_to_csv(name, config, recs, extra={"growth": repr(growth)})
        if cfg["plot"]:
            plot = loglog_svg({"ratio": [(1 + r.value, r.ratios["ratio"]) for r in recs]}, "1 + t", "ratio")
    elif name == "strichartz":
        spec = _spec(cfg["n"], cfg["points_per_axis"], cfg["dt"])
        try:
            recs = ex.strichartz_ratio_records(cfg["1/q"], cfg["1/r"], cfg["n"], cfg["trials"], seed, spec, threads)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        top = max(r.measured["ratio"] for r in recs)
        if cfg["max_ratio"] is not None and top > cfg["max_ratio"]:
            breaches.append(f"max ratio {top:.6g} > max_ratio {cfg['max_ratio']}")
        text = ex.records_to_csv(name, config, recs, extra={"max_ratio": repr(top)})
    elif name == "bilinear":
        t = _tuple_from(cfg)
        b = beta(t)
        try:
            recs = ex.bilinear_decay_sweep(t, range(cfg["j_min"], cfg["j_max"] + 1), cfg["trials"], seed,
                                           cfg["steps"], cfg["refine"], threads=threads)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        rho = [r.ratios["rho"] for r in recs]
        spread = max(rho) / min(rho)
        tail = [(2.0 ** r.value, r.measured["sup_Bj"]) for r in recs if r.value >= cfg["fit_j_min"]]
        fits = {}
        if len(tail) >= 3:
            fits["sup_Bj_vs_2^j"] = ex.fit_loglog(tail)
        if cfg["max_spread"] is not None and spread > cfg["max_spread"]:
            breaches.append(f"rho spread {spread:.4g} > max_spread {cfg['max_spread']}")
        if cfg["slope_tolerance"] is not None:
            if not fits:
                raise UsageError("slope_tolerance needs at least 3 scales with j >= fit_j_min")
            dev = abs(fits["sup_Bj_vs_2^j"].slope - float(b.value))
            if dev > cfg["slope_tolerance"]:
                breaches.append(f"|slope - beta| = {dev:.4g} > slope_tolerance {cfg['slope_tolerance']}")
        text = ex.records_to_csv(name, config, recs, fits,
                                 extra={"beta": str(b.value), "regime": b.regime, "rho_spread": repr(spread)})
        if cfg["plot"]:
            plot = loglog_svg({"sup |B_j|": [(2.0 ** r.value, r.measured["sup_Bj"]) for r in recs]},
                              "2^j", "|B_j|", format_tuple(t))
    elif name == "counterexample":
        t = _tuple_from(cfg)
        try:
            res = ex.counterexample_sweep(t, [float(e) for e in cfg["eps"]], threads,
                                          cfg["time_points"], cfg["shell_points"])
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        pred = res.predicted
        if cfg["slope_tolerance"] is not None:
            rel = abs(res.lhs_fit.slope - float(pred["lhs"])) / abs(float(pred["lhs"]))
            if rel > cfg["slope_tolerance"]:
                breaches.append(f"lhs slope off by {rel:.3%} > {cfg['slope_tolerance']}")
        if cfg["ratio_tolerance"] is not None:
            dev = abs(res.ratio_fit.slope - float(pred["ratio"]))
            if dev > cfg["ratio_tolerance"]:
                breaches.append(f"ratio exponent off by {dev:.4g} > {cfg['ratio_tolerance']}")
        extra = {f"predicted_{k}": str(v) for k, v in pred.items()}
        extra.update({f"mirrored_{k}": str(v) for k, v in res.mirrored.items()})
        text = ex.records_to_csv(name, config, res.records,
                                 {"lhs": res.lhs_fit, "rhs": res.rhs_fit, "ratio": res.ratio_fit}, extra)
        if cfg["plot"]:
            plot = loglog_svg({"lhs": [(r.value, r.measured["lhs"]) for r in res.records],
                               "rhs": [(r.value, r.measured["rhs"]) for r in res.records]},
                              "eps", "norm", format_tuple(t))
    elif name == "atoms-audit":
        spec = GridSpec(cfg["n"], cfg["points_per_axis"])
        recs = ex.atoms_audit(cfg["seeds"], [float(p) for p in cfg["p"]], seed, spec, threads)
        maxima = {k: max(r.measured[k] for r in recs) for k in ("C_a", "C_s", "C_c", "reconstruction")}
        for k, v in maxima.items():
            limit = cfg[f"max_{k}"]
            if limit is not None and v > limit:
                breaches.append(f"{k} = {v:.6g} > {limit}")
        text = ex.records_to_csv(name, config, recs, extra={f"max_{k}": repr(v) for k, v in maxima.items()})
    else:
        raise UsageError(f"unknown experiment {name!r}")
    return text, breaches, plot


def _show(v) -> str:
    if isinstance(v, list):
        return ",".join(str(x) for x in v)
    return str(v)


def cmd_sweep(args) -> int:
    if args.experiment not in SCHEMAS:
        print(f"unknown experiment {args.experiment!r}; choose from {', '.join(SCHEMAS)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg, _ = parse_config(text, args.experiment)
        seed = cfg.pop("seed") if cfg.get("seed") is not None else args.seed
        cfg.pop("seed", None)
        csv_text, breaches, plot = run_experiment(args.experiment, cfg, seed, args.threads)
    except (UsageError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = _out_dir(args)
    try:
        path = write_atomic(out / f"{args.experiment}.csv", csv_text)
        if plot is not None:
            write_atomic(out / f"{args.experiment}.svg", plot)
    except OSError as exc:
        print(f"cannot write to {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    _say(args, f"wrote {path}")
    for b in breaches:
        print(f"threshold exceeded: {b}", file=sys.stderr)
    return EXIT_THRESHOLD if breaches else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="strichartz-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--out", help=f"output directory (default ${ENV_OUT} or .)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--quiet", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", help="verdict for an exponent tuple")
    c.add_argument("tuple", help='e.g. "n=3 1/r=1/4 1/rt=1/12 1/q=1/4 1/qt=3/4"')
    c.add_argument("--n", type=int, default=None)
    c.set_defaults(func=cmd_classify)

    r = sub.add_parser("region", help="exponent-region diagram (SVG) and vertex CSV")
    r.add_argument("--n", type=int, required=True)
    r.set_defaults(func=cmd_region)

    s = sub.add_parser("sweep", help="run an experiment from a key=value config")
    s.add_argument("experiment")
    s.add_argument("config")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
