"""Command-line entry point.

Every subcommand reads a JSON scenario (see :mod:`covert_mimo.config`) and
writes one report, CSV by default, to standard output or ``--output``.
Exit status is 0 on success, 1 for configuration or validation errors and 2
for numerical failures such as a rank-deficient channel pair.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import allocation, capacity, compound, covert_code, covertness, detector
from .config import DEFAULTS, load_scenario
from .errors import CovertMimoError, NumericalError, RankDeficient, ValidationError

DESK_MAX_M = 2**10
DESK_MAX_K = 4
NATS_FIELDS = {"c_covert_v", "r_key_v", "c_covert_d", "f_v", "f_d", "c_covert", "log_mk_rate",
               "log_M", "log_MK"}
BITS_COMMANDS = ("capacity", "reliability", "compound", "compare-metrics")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def render(rows, fields, fmt, extra=None) -> str:
    """CSV table of ``rows`` or a JSON document of ``rows`` plus ``extra``."""
    if fmt == "json":
        doc = dict(extra or {})
        doc["rows"] = [{f: r[f] for f in fields} for r in rows]
        return json.dumps(_jsonable(doc), indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_fmt(r[f]) for f in fields])
    return buf.getvalue()


def _to_bits(rows, on):
    if not on:
        return rows
    return [{k: (v / math.log(2.0) if k in NATS_FIELDS else v) for k, v in r.items()} for r in rows]


def _units(args):
    return "bits" if args.bits else "nats"


def _seed(args, cfg):
    seed = args.seed if args.seed is not None else cfg.seed
    if seed is None:
        raise ValidationError("seed", "randomized subcommands need --seed or a 'seed' entry")
    return seed


def _trials(args, cfg):
    return args.trials if args.trials is not None else cfg.trials


def _gsvd(cfg):
    try:
        return cfg.gsvd()
    except RankDeficient:
        report = cfg.subspaces()
        print(json.dumps({"subspaces": report.as_dict()}, indent=2), file=sys.stderr)
        raise


def _design(cfg, gsvd):
    n = cfg.need("n")
    alloc = allocation.solve_allocation_v(gsvd, cfg.sigma_b2, cfg.sigma_w2)
    return n, alloc, allocation.build_constellation(alloc, gsvd, n, cfg.delta)


def _desk_code(cfg, gsvd, alloc, const, seed):
    log_m, log_mk = covert_code.size_code(gsvd, alloc, const.n, cfg.delta, cfg.xi,
                                          cfg.sigma_b2, cfg.sigma_w2, keyless_ok=True)
    M, K = covert_code.desk_sizes(log_m, log_mk, DESK_MAX_M, DESK_MAX_K)
    M = cfg.M if cfg.M is not None else M
    K = cfg.K if cfg.K is not None else K
    return log_m, log_mk, covert_code.generate(const, M, K, seed)


def cmd_gsvd(args, cfg):
    g = _gsvd(cfg)
    rows = [
        {"j": j, "lambda_b": g.lambda_b[j], "lambda_w": g.lambda_w[j], "ratio": g.ratio[j]}
        for j in range(g.m)
    ]
    extra = {"V": g.V, "U_b": g.U_b, "U_w": g.U_w, "subspaces": cfg.subspaces().as_dict()}
    return render(rows, ["j", "lambda_b", "lambda_w", "ratio"], args.format, extra)


def cmd_capacity(args, cfg):
    g = _gsvd(cfg)
    s = capacity.summarize(g, cfg.sigma_b2, cfg.sigma_w2, cfg.delta)
    return render(_to_bits([s.as_dict()], args.bits), list(s.as_dict()), args.format,
                  {"delta": cfg.delta, "units": _units(args)})


def cmd_allocate(args, cfg):
    g = _gsvd(cfg)
    n = cfg.need("n")
    if args.metric == "v":
        alloc = allocation.solve_allocation_v(g, cfg.sigma_b2, cfg.sigma_w2)
    else:
        alloc = allocation.solve_allocation_d(g, cfg.sigma_b2, cfg.sigma_w2)
    const = allocation.build_constellation(alloc, g, n, cfg.delta, metric=args.metric)
    rows = [
        {"j": j, "T": alloc.T[j], "rho": const.rho[j], "amplitude": const.amplitudes[j]}
        for j in range(g.m)
    ]
    extra = {"metric": args.metric, "n": n, "delta": cfg.delta}
    extra.update({k: v for k, v in alloc.as_dict().items() if k != "T"})
    if args.metric == "v":
        check = allocation.perturbed_feasibility(alloc, n, cfg.delta, cfg.C)
        extra["finite_n"] = {"budget": check.budget, "margin": check.margin,
                             "feasible": check.feasible, "shrink": check.shrink}
    if const.Q_n is not None:
        extra["Q_n"] = const.Q_n
    if args.format == "csv":
        for r in rows:
            r.update(mu=alloc.mu, objective=alloc.objective, margin=alloc.margin)
        return render(rows, ["j", "T", "rho", "amplitude", "mu", "objective", "margin"], "csv")
    return render(rows, ["j", "T", "rho", "amplitude"], "json", extra)


def cmd_detector(args, cfg):
    g = _gsvd(cfg)
    seed = _seed(args, cfg)
    n, alloc, const = _design(cfg, g)
    _, _, code = _desk_code(cfg, g, alloc, const, seed)
    p_star = detector.min_received_power(code, g)
    conf = detector.make_config(g, detector.threshold_for(p_star, n, g, cfg.sigma_w2), n)
    rep = detector.run_detector_mc(code, conf, g, cfg.sigma_w2, _trials(args, cfg), seed,
                                   cfg.slack_B0, cfg.slack_B1)
    extra = {"M": code.M, "K": code.K, "P_star": p_star, "tau": conf.tau}
    return render([rep.as_dict()], list(rep.CSV_FIELDS), args.format, extra)


def cmd_covertness(args, cfg):
    g = _gsvd(cfg)
    seed = _seed(args, cfg)
    _, _, const = _design(cfg, g)
    rep = covertness.report(g, const, cfg.sigma_w2, _trials(args, cfg), seed)
    return render([rep.as_dict()], list(rep.CSV_FIELDS), args.format)


RELIABILITY_FIELDS = ["n", "trials", "M", "K", "log_M", "log_MK", "error_rate", "half_width"]


def cmd_reliability(args, cfg):
    g = _gsvd(cfg)
    seed = _seed(args, cfg)
    n, alloc, const = _design(cfg, g)
    log_m, log_mk, code = _desk_code(cfg, g, alloc, const, seed)
    trials = _trials(args, cfg)
    rate, hw = covert_code.simulate_reliability(code, g, cfg.sigma_b2, trials, seed)
    row = {"n": n, "trials": trials, "M": code.M, "K": code.K, "log_M": log_m,
           "log_MK": log_mk, "error_rate": rate, "half_width": hw}
    return render(_to_bits([row], args.bits), RELIABILITY_FIELDS, args.format, {"units": _units(args)})


def cmd_compound(args, cfg):
    uset = compound.UncertaintySet(cfg.need("lambda_0"), cfg.bob_gains())
    c, rate = compound.compound_capacity(uset, cfg.sigma_b2, cfg.sigma_w2)
    row = {"lambda0": uset.lambda_0, "c_covert": c, "log_mk_rate": rate}
    extra = {"units": _units(args)}
    if args.format == "json":
        alloc = compound.worst_case_design(uset, cfg.sigma_b2, cfg.sigma_w2)
        extra["worst_case_T"] = alloc.T
    return render(_to_bits([row], args.bits), ["lambda0", "c_covert", "log_mk_rate"], args.format, extra)


def cmd_compare_metrics(args, cfg):
    g = _gsvd(cfg)
    grid = np.linspace(args.delta_min, args.delta_max, args.points)
    rows = capacity.throughput_curves(g, cfg.sigma_b2, cfg.sigma_w2, grid)
    return render(_to_bits(rows, args.bits), ["delta", "f_d", "f_v", "ratio"], args.format,
                  {"units": _units(args)})


COMMANDS = {
    "gsvd": (cmd_gsvd, "GSVD gains and subspace report"),
    "capacity": (cmd_capacity, "closed-form covert capacities"),
    "allocate": (cmd_allocate, "optimal constellation design (needs n)"),
    "detector": (cmd_detector, "power-detector Monte Carlo against a random code (needs n, seed)"),
    "covertness": (cmd_covertness, "closed-form and Monte Carlo variational distance (needs n, seed)"),
    "reliability": (cmd_reliability, "ML decoding error rate of a desk-scale code (needs n, seed)"),
    "compound": (cmd_compound, "worst-case capacity over the uncertainty set (needs lambda_0)"),
    "compare-metrics": (cmd_compare_metrics, "throughput ratio of the two covertness metrics over delta"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("config", help="JSON scenario file")
    common.add_argument("--seed", type=int, default=None,
                        help="RNG seed; overrides the scenario's 'seed'")
    common.add_argument("--trials", type=int, default=None,
                        help=f"Monte Carlo trials (default: scenario value, else {DEFAULTS['trials']})")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="report format (default csv)")
    common.add_argument("--output", default=None, help="write the report here instead of stdout")

    parser = _Parser(
        prog="covert-mimo",
        description="Covert communication over MIMO-AWGN channels.",
        epilog=(
            "Scenario defaults: delta=0.2, trials=10000, xi=0.5, C=1, slack_B0=slack_B1=0. "
            f"Codes are sized by xi and clipped to M<={DESK_MAX_M}, K<={DESK_MAX_K} "
            "unless the scenario sets M and K."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        if name in BITS_COMMANDS:
            p.add_argument("--bits", action="store_true", help="report information in bits instead of nats")
        if name == "allocate":
            p.add_argument("--metric", choices=("v", "d"), default="v",
                           help="variational distance (v) or relative entropy (d) design")
        if name == "compare-metrics":
            p.add_argument("--delta-min", type=float, default=0.01)
            p.add_argument("--delta-max", type=float, default=0.9)
            p.add_argument("--points", type=int, default=90)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.trials is not None and args.trials < 1:
            raise ValidationError("trials", "must be >= 1")
        if args.command == "compare-metrics" and args.points < 1:
            raise ValidationError("points", "must be >= 1")
        cfg = load_scenario(args.config)
        text = COMMANDS[args.command][0](args, cfg)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CovertMimoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))
