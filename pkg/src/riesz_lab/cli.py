"""
Command-line front end: ``riesz-lab <build|coeffs|ft|scan|converge|gaps>``.

Every command writes its artifacts into ``--out`` and stamps each file with
the hash of the run configuration.  Exit codes: 0 ok, 2 usage or input
error, 3 certification failure, 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .clouds import bound_ratios, gap_bound_table, gap_table_csv
from .convolution import (
    DEFAULT_GRID,
    constant,
    convergence_csv,
    convergence_experiment,
    fejer_indicator,
    indicator,
    random_bandlimited,
    single_mode,
)
from .core import (
    ContractionSchedule,
    RieszSpec,
    _cosine_table,
    decompose_frequency,
    ft_real,
    interpolated_ft,
    partial_product,
)
from .errors import CertificationError, SelectionExhausted
from .multipliers import (
    DEFAULT_BUDGET,
    ContractionFamily,
    default_scan_grid,
    greedy_subsequence,
    scan_csv,
    scan_sup,
    triangle_multiplier,
    uniform_multiplier,
)
from .plotting import convergence_figure, ft_figure, gap_table_figure, save_svg, sigma_scan_figure
from .schedules import dyadic_construct, intertwine_construct, rate_budget, rate_scheduler

EXIT_OK, EXIT_USAGE, EXIT_CERT, EXIT_INTERNAL = 0, 2, 3, 4


class UsageError(Exception):
    pass


# h catalog for the rate scheduler: (h, h^{-1}); both dominate |lebesgue_ft| on t >= 1
RATE_MAJORANTS = {
    "inv_t": (lambda t: 1 / t, lambda y: 1 / Fraction(y)),
    "inv_sqrt_t": (lambda t: t**-0.5, lambda y: 1 / Fraction(y) ** 2),
}


@dataclass
class RunConfig:
    command: str
    params: dict
    out: Path
    seed: int = 0
    inputs: dict = field(default_factory=dict)  # flag -> path

    def canonical(self) -> dict:
        digests = {k: hashlib.sha256(Path(p).read_bytes()).hexdigest() for k, p in sorted(self.inputs.items())}
        return {"command": self.command, "params": self.params, "seed": self.seed, "inputs": digests}

    @property
    def hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(text.encode()).hexdigest()


def _num(x) -> str:
    return format(float(x), ".17g")


def _frac(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _json_default(obj):
    if isinstance(obj, Fraction):
        return _frac(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(type(obj).__name__)


def _stamp(cfg: RunConfig, K, extra: dict | None = None) -> dict:
    data = {"config_hash": cfg.hash, "K": K, "seed": cfg.seed, "command": cfg.command}
    data.update(extra or {})
    return data


def _header(cfg: RunConfig, K, extra: dict | None = None) -> list[str]:
    return [f"{k}: {v}" for k, v in _stamp(cfg, K, extra).items()]


def _write(cfg: RunConfig, name: str, text: str) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / name
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _write_json(cfg: RunConfig, name: str, data: dict) -> Path:
    return _write(cfg, name, json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")


def _write_svg(cfg: RunConfig, name: str, fig, K) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / name
    save_svg(fig, path, cfg.hash, f"riesz-lab {cfg.command} config_hash: {cfg.hash} K: {K} seed: {cfg.seed}")
    return path


def _parse_fractions(text: str) -> list[Fraction]:
    try:
        return [Fraction(x.strip()) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse rationals from {text!r}") from exc


def _load_spec(args, inputs: dict, required: bool = True) -> RieszSpec | None:
    if getattr(args, "spec", None):
        path = Path(args.spec)
        if not path.is_file():
            raise UsageError(f"spec file {path} not found")
        inputs["spec"] = path
        return RieszSpec.from_json(path.read_text())
    if getattr(args, "frequencies", None):
        freqs = [int(f) for f in _parse_fractions(args.frequencies)]
        coeffs = _parse_fractions(args.coefficients) if args.coefficients else None
        return RieszSpec(tuple(freqs), coeffs, Fraction(args.floor))
    if required:
        raise UsageError("give --spec FILE or --frequencies LIST")
    return None


def _load_schedule(args, inputs: dict) -> ContractionSchedule:
    if getattr(args, "schedule", None):
        path = Path(args.schedule)
        if not path.is_file():
            raise UsageError(f"schedule file {path} not found")
        inputs["schedule"] = path
        return ContractionSchedule.from_json(path.read_text())
    if getattr(args, "scales", None) is not None:
        return ContractionSchedule(tuple(_parse_fractions(args.scales)), "manual")
    if getattr(args, "dyadic_steps", None):
        return ContractionSchedule(tuple(Fraction(1, 2**k) for k in range(1, args.dyadic_steps + 1)), "manual")
    raise UsageError("give --schedule FILE, --scales LIST or --dyadic-steps N")


def _params(args) -> dict:
    skip = {"out", "func", "seed", "spec", "schedule", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _config(args, inputs: dict) -> RunConfig:
    return RunConfig(args.command, _params(args), Path(args.out), args.seed, inputs)


# -- build -----------------------------------------------------------------


def cmd_build(args) -> int:
    inputs: dict = {}
    cfg = _config(args, inputs)
    spec = None
    summary: dict = {"method": args.method}
    if args.method == "dyadic":
        spec, schedule = dyadic_construct(args.M, args.K)
        summary["a"] = [int(e) for e in schedule.meta["a"]]
        summary["b"] = [int(e) for e in schedule.meta["b"]]
    elif args.method == "intertwine":
        spec, schedule = intertwine_construct(Fraction(args.delta), args.K)
    elif args.method == "rate":
        h, h_inv = RATE_MAJORANTS[args.h]
        schedule = rate_scheduler(h, h_inv, args.N, Fraction(args.t1), transform=uniform_multiplier())
        summary["budget"] = rate_budget()
    else:
        family = ContractionFamily(triangle_multiplier(), args.length)
        selection = greedy_subsequence(family, steps=args.steps)
        schedule = selection.schedule
        summary.update(indices=list(selection.indices), scan_sup=selection.scan.sup, budget=selection.scan.budget)
    K = len(schedule)
    summary["scales"] = [_frac(t) for t in schedule.scales]
    if schedule.dyadic_exponents:
        summary["dyadic_exponents"] = list(schedule.dyadic_exponents)
    if spec is not None:
        summary["frequencies"] = [str(n) for n in spec.frequencies]
        _write_json(cfg, "spec.json", {**spec.to_dict(), **_stamp(cfg, len(spec))})
    _write_json(cfg, "schedule.json", {**schedule.to_dict(), **_stamp(cfg, K)})
    _write_json(cfg, "build.json", {**summary, **_stamp(cfg, K)})
    print(f"build {args.method}: K={K} scales={', '.join(summary['scales'][:6])}"
          + (" ..." if K > 6 else ""))
    if "a" in summary:
        print(f"  a = {tuple(summary['a'])}  b = {tuple(summary['b'])}")
    if spec is not None:
        print(f"  frequencies = {', '.join(summary['frequencies'][:4])}" + (" ..." if len(spec) > 4 else ""))
    return EXIT_OK


# -- coeffs / ft -----------------------------------------------------------


def cmd_coeffs(args) -> int:
    inputs: dict = {}
    spec = _load_spec(args, inputs)
    cfg = _config(args, inputs)
    order = spec._order(args.order)
    table = _cosine_table(spec, order)
    buf = io.StringIO()
    for line in _header(cfg, order):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "c_j", "mu_hat", "top_index", "signs"])
    w.writerow([0, "1", "1", "", ""])
    for j, c in table:
        sv = decompose_frequency(spec, j, order)
        w.writerow([j, _frac(c), _frac(c / 2), sv.top_index, " ".join(str(s) for s in sv.signs)])
    _write(cfg, "coeffs.csv", buf.getvalue())
    poly = partial_product(spec, order)
    _write_json(cfg, "coeffs.json", {"count": len(table), "degree": str(poly.degree),
                                     "integral": _frac(poly.integral()), **_stamp(cfg, order)})
    print(f"coeffs: {len(table)} nonzero cosine coefficients up to degree {poly.degree}")
    return EXIT_OK


def cmd_ft(args) -> int:
    inputs: dict = {}
    spec = _load_spec(args, inputs)
    cfg = _config(args, inputs)
    order = spec._order(args.order)
    if args.s_max is None and spec.degree(order) >= 2**1000:
        raise UsageError("degree beyond double range: pass --s-max or a lower --order")
    s_max = args.s_max if args.s_max is not None else 2.0 * float(max(spec.degree(order), 1))
    s = np.linspace(args.s_min, s_max, args.points)
    if args.variant == "interpolated":
        vals = np.asarray(interpolated_ft(spec, s, order), dtype=complex)
    else:
        vals = np.asarray(ft_real(partial_product(spec, order), s), dtype=complex)
    buf = io.StringIO()
    for line in _header(cfg, order):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "re", "im", "abs"])
    for x, v in zip(s, vals):
        w.writerow([_num(x), _num(v.real), _num(v.imag), _num(abs(v))])
    _write(cfg, "ft.csv", buf.getvalue())
    _write_svg(cfg, "ft.svg", ft_figure(s, vals, f"|ft| ({args.variant}), order {order}"), order)
    print(f"ft: {args.points} points on [{args.s_min:g}, {s_max:g}], max |ft| = {np.max(np.abs(vals)):.6g}")
    return EXIT_OK


# -- scan ------------------------------------------------------------------


def cmd_scan(args) -> int:
    inputs: dict = {}
    spec = _load_spec(args, inputs, required=args.measure == "riesz")
    schedule = _load_schedule(args, inputs)
    cfg = _config(args, inputs)
    K = len(schedule) if args.K is None else args.K
    if K > len(schedule):
        raise UsageError(f"--K {K} exceeds the schedule length {len(schedule)}")
    measure = spec if args.measure == "riesz" else {"uniform": uniform_multiplier,
                                                    "triangle": triangle_multiplier}[args.measure]()
    budget = args.budget
    if budget is None:
        budget = rate_budget() if schedule.provenance == "rate" else DEFAULT_BUDGET
    grid = default_scan_grid(schedule.head(K), spec if args.measure == "riesz" else None, args.order,
                             t_min=args.t_min, t_max=args.t_max, per_octave=args.per_octave, points=args.points)
    scan = scan_sup(measure, schedule, K, grid, budget, args.order, args.variant)
    _write(cfg, "scan.csv", scan_csv(scan, _header(cfg, K, {"order": args.order})))
    _write(cfg, "scan.json", scan.summary_json(_stamp(cfg, K, {"provenance": schedule.provenance})) + "\n")
    _write_svg(cfg, "scan.svg", sigma_scan_figure(scan), K)
    status = "pass" if scan.passed else f"budget exceeded at t={scan.witness:.6g}"
    print(f"scan: sup Sigma_{K} = {scan.sup:.6g} (budget {budget:.6g}) over {scan.grid.size} points: {status}")
    return EXIT_OK


# -- converge --------------------------------------------------------------


def _signal(args):
    kind = args.signal
    if kind == "constant":
        return constant(1.0, args.J if args.J is not None else 0)
    if kind == "mode":
        return single_mode(args.mode)
    if kind == "indicator":
        return indicator(0.0, 0.5, args.J if args.J is not None else 512)
    if kind == "fejer":
        return fejer_indicator(0.0, 0.5, args.J if args.J is not None else 32)
    return random_bandlimited(args.modes, args.seed)


def cmd_converge(args) -> int:
    inputs: dict = {}
    spec = _load_spec(args, inputs, required=args.kernel == "riesz")
    schedule = _load_schedule(args, inputs)
    cfg = _config(args, inputs)
    if not len(schedule):
        raise UsageError("schedule is empty")
    kernel = spec if args.kernel == "riesz" else args.kernel
    signal = _signal(args)
    reports = convergence_experiment(kernel, schedule, signal, args.grid, args.order, args.variant, args.threshold)
    K = len(schedule)
    header = _header(cfg, K, {"order": args.order, "signal": signal.name})
    _write(cfg, "converge.csv", convergence_csv(reports, header))
    _write_json(cfg, "converge.json", {
        "verdict": reports[-1].verdict,
        "final_l2_err": reports[-1].l2_err,
        "final_sup_err": reports[-1].sup_err,
        "threshold": args.threshold,
        **_stamp(cfg, K, {"order": args.order, "signal": signal.name}),
    })
    _write_svg(cfg, "converge.svg", convergence_figure(reports, f"{args.kernel} kernel, {signal.name}"), K)
    print(f"converge: final L2 error {reports[-1].l2_err:.6g}, sup error {reports[-1].sup_err:.6g}: "
          f"{reports[-1].verdict}")
    return EXIT_OK


# -- gaps ------------------------------------------------------------------


def cmd_gaps(args) -> int:
    inputs: dict = {}
    spec = _load_spec(args, inputs)
    cfg = _config(args, inputs)
    order = spec._order(args.order)
    rows = gap_bound_table(spec, order, args.per_octave, with_transform=args.with_transform)
    _write(cfg, "gaps.csv", gap_table_csv(rows, _header(cfg, order)))
    ratios = bound_ratios(rows)
    _write_json(cfg, "gaps.json", {
        "rows": len(rows),
        "all_hold": all(r.holds for r in rows),
        "B_ratios": ratios,
        "C_used": rows[0].C_used if rows else None,
        **_stamp(cfg, order),
    })
    if rows:
        _write_svg(cfg, "gaps.svg", gap_table_figure(rows, f"gap bounds, order {order}"), order)
    print(f"gaps: {len(rows)} gaps, grid bound below B_m on all: {all(r.holds for r in rows)}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def _add_spec_flags(p) -> None:
    g = p.add_argument_group("measure")
    g.add_argument("--spec", help="spec JSON written by 'build'")
    g.add_argument("--frequencies", help="comma-separated frequencies, e.g. 4,16,64")
    g.add_argument("--coefficients", help="comma-separated rationals a_m (default all 1)")
    g.add_argument("--floor", default="3", help="declared lacunarity floor (default 3)")
    g.add_argument("--order", type=int, default=None, help="partial product order (default all)")


def _add_schedule_flags(p) -> None:
    g = p.add_argument_group("schedule")
    g.add_argument("--schedule", help="schedule JSON written by 'build'")
    g.add_argument("--scales", help="comma-separated nonincreasing rationals")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--seed", type=int, default=0, help="seed for random signals (default 0)")

    parser = argparse.ArgumentParser(prog="riesz-lab", description="Riesz product and square-function toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="construct a spec and contraction schedule")
    p.add_argument("--method", required=True, choices=["dyadic", "rate", "intertwine", "greedy"])
    p.add_argument("--M", type=int, default=3, help="dyadic: number of frequencies")
    p.add_argument("--K", type=int, default=None, help="dyadic/intertwine: number of scales")
    p.add_argument("--delta", default="4", help="intertwine: lacunarity floor")
    p.add_argument("--h", default="inv_t", choices=sorted(RATE_MAJORANTS), help="rate: majorant")
    p.add_argument("--N", type=int, default=4, help="rate: number of scales")
    p.add_argument("--t1", default="1", help="rate: first scale")
    p.add_argument("--steps", type=int, default=3, help="greedy: selection steps")
    p.add_argument("--length", type=int, default=10**6, help="greedy: candidate family length")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("coeffs", parents=[common], help="exact coefficients of a partial product")
    _add_spec_flags(p)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("ft", parents=[common], help="real-line transform of a partial product")
    _add_spec_flags(p)
    p.add_argument("--variant", default="real", choices=["real", "interpolated"])
    p.add_argument("--s-min", type=float, default=0.0)
    p.add_argument("--s-max", type=float, default=None, help="default twice the degree")
    p.add_argument("--points", type=int, default=2001)
    p.set_defaults(func=cmd_ft)

    p = sub.add_parser("scan", parents=[common], help="sup scan of the square-function multiplier")
    _add_spec_flags(p)
    _add_schedule_flags(p)
    p.add_argument("--measure", default="riesz", choices=["riesz", "uniform", "triangle"])
    p.add_argument("--variant", default="real", choices=["real", "interpolated"])
    p.add_argument("--K", type=int, default=None, help="number of scales (default all)")
    p.add_argument("--t-min", type=float, default=1e-3)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--per-octave", type=int, default=64)
    p.add_argument("--points", type=int, default=None, help="override per-octave density")
    p.add_argument("--budget", type=float, default=None, help="default 5, or the rate budget")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("converge", parents=[common], help="convolution convergence experiment")
    _add_spec_flags(p)
    _add_schedule_flags(p)
    p.add_argument("--dyadic-steps", type=int, default=None, help="use t_k = 2^-k for k = 1..N")
    p.add_argument("--kernel", default="uniform", choices=["uniform", "triangle", "riesz"])
    p.add_argument("--variant", default="real", choices=["real", "interpolated"])
    p.add_argument("--signal", default="random", choices=["constant", "mode", "indicator", "fejer", "random"])
    p.add_argument("--modes", type=int, default=64, help="random: band limit")
    p.add_argument("--mode", type=int, default=1, help="mode: frequency")
    p.add_argument("--J", type=int, default=None, help="indicator/fejer: truncation")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--threshold", type=float, default=1e-2)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("gaps", parents=[common], help="off-cloud bound table over the gaps")
    _add_spec_flags(p)
    p.add_argument("--per-octave", type=int, default=64)
    p.add_argument("--with-transform", action="store_true", help="also record grid sup of |ft|")
    p.set_defaults(func=cmd_gaps)
    return parser


def _defaults(args) -> None:
    if args.command == "build" and args.K is None:
        args.K = 3 if args.method == "dyadic" else 2


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _defaults(args)
    try:
        return args.func(args)
    except (UsageError, ValueError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"riesz-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CertificationError, SelectionExhausted) as exc:
        print(f"riesz-lab: certification failed: {exc}", file=sys.stderr)
        return EXIT_CERT
    except Exception as exc:  # noqa: BLE001
        print(f"riesz-lab: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
