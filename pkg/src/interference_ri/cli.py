"""Command-line front end.

Exit codes: 0 success, 2 usage or parse error, 3 method constraint
(e.g. exact enumeration too large), 4 internal failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .assignment import load_assignment
from .exceptions import InvalidArgument, MethodConstraintError, ParseError
from .fileio import load_outcomes, parse_grid
from .inference import (
    Hypothesis,
    Method,
    PValueSurface,
    confidence_region,
    grid_test,
    randomization_test,
)
from .models import MODEL_NAMES, make_model
from .network import generate_network, generate_positions, load_edges, save_edges, save_positions
from .simulation import (
    configs_from_json,
    coverage_study,
    power_report,
    simulate,
    size_report,
)
from .teststats import STATISTICS, get_statistic

EXIT_USAGE = 2
EXIT_METHOD = 3
EXIT_INTERNAL = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--outcomes", required=True, help="outcome file, one number per line")
    p.add_argument("--assignment", required=True, help="assignment file, one 0/1 per line")
    p.add_argument("--network", help="edge-list file (required for the spillover model)")
    p.add_argument("--units", type=int, help="unit count for the network (default: number of outcomes)")
    p.add_argument("--model", choices=MODEL_NAMES, default="sharp-null")
    p.add_argument("--stat", choices=sorted(STATISTICS), default="ks")
    p.add_argument("--method", choices=("exact", "montecarlo", "asymptotic"), default="montecarlo")
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--cap", type=int, default=10**7, help="largest assignment space to enumerate")
    p.add_argument("--seed", type=int, help="required for --method montecarlo")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="interference-ri", description="Randomization inference for models of interference.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("netgen", help="closest-pairs network on seeded positions")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--edges", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--positions-out")

    p = sub.add_parser("test", help="test one hypothesis; prints JSON")
    _add_data_args(p)
    p.add_argument("--beta", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--quantiles", action="store_true", help="include reference-distribution quantiles")

    p = sub.add_parser("grid", help="p-value surface over a parameter grid; writes CSV")
    _add_data_args(p)
    p.add_argument("--beta-grid")
    p.add_argument("--tau-grid")
    p.add_argument("--alpha-grid")
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="optional JSON report with provenance")

    p = sub.add_parser("region", help="grid points not rejected at --alpha")
    p.add_argument("--surface", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("simulate", help="size/power/coverage study")
    p.add_argument("--config", help="JSON config document")
    p.add_argument("--preset", help="preset sweep name (alternative to --config)")
    p.add_argument("--member", help="single member of the preset sweep")
    p.add_argument("--seed", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True, help="JSON report path; CSVs are written beside it")
    return parser


def _usage(msg: str):
    raise InvalidArgument(msg)


def _method(args) -> Method:
    if args.method == "montecarlo":
        if args.seed is None:
            _usage("--method montecarlo needs an explicit --seed")
        return Method.montecarlo(args.draws, args.seed)
    if args.method == "exact":
        return Method.exact(args.cap)
    return Method.asymptotic()


def _load_data(args):
    y = load_outcomes(args.outcomes)
    z = load_assignment(args.assignment)
    if y.size != z.size:
        _usage(f"{y.size} outcomes but {z.size} assignment entries")
    net = None
    if args.network:
        net = load_edges(args.network, n=args.units if args.units is not None else y.size)
        if net.n != y.size:
            _usage(f"network has {net.n} units but there are {y.size} outcomes")
    if args.model == "spillover" and net is None:
        _usage("--model spillover needs --network")
    return y, z, make_model(args.model, net)


def _cmd_netgen(args) -> int:
    pos = generate_positions(args.n, args.seed)
    net = generate_network(pos, args.edges)
    save_edges(net, args.out)
    if args.positions_out:
        save_positions(pos, args.positions_out)
    return 0


def _cmd_test(args) -> int:
    y, z, model = _load_data(args)
    given = {"beta": args.beta, "tau": args.tau, "alpha": args.alpha}
    extra = [k for k, v in given.items() if v is not None and k not in model.param_names]
    if extra:
        _usage(f"model {model.name} does not take {', '.join('--' + k for k in extra)}")
    params = {k: given[k] for k in model.param_names}
    missing = [k for k, v in params.items() if v is None]
    if missing:
        _usage(f"model {model.name} needs {', '.join('--' + k for k in missing)}")
    res = randomization_test(y, z, Hypothesis(model, params), get_statistic(args.stat), _method(args),
                             quantiles=args.quantiles)
    print(json.dumps(res.to_dict(), indent=2))
    return 0


def _cmd_grid(args) -> int:
    y, z, model = _load_data(args)
    flags = {"beta": args.beta_grid, "tau": args.tau_grid, "alpha": args.alpha_grid}
    extra = [k for k, v in flags.items() if v is not None and k not in model.param_names]
    if extra:
        _usage(f"model {model.name} does not take {', '.join('--' + k + '-grid' for k in extra)}")
    grids = {}
    for k in model.param_names:
        if flags[k] is None:
            _usage(f"model {model.name} needs --{k}-grid")
        grids[k] = parse_grid(flags[k])
    method = _method(args)
    surface = grid_test(y, z, model, grids, get_statistic(args.stat), method)
    surface.to_csv(args.out)
    if args.report:
        Path(args.report).write_text(json.dumps(surface.to_dict(), indent=2) + "\n", encoding="utf-8")
    return 0


def _cmd_region(args) -> int:
    surface = PValueSurface.from_csv(args.surface)
    if not 0.0 < args.alpha < 1.0:
        _usage("--alpha must be in (0, 1)")
    kept = confidence_region(surface, args.alpha)
    keep = {tuple(pt[k] for k in surface.names) for pt in kept}
    lines = [",".join([*surface.names, "p"])]
    for params, p in surface.points():
        if tuple(params[k] for k in surface.names) in keep:
            lines.append(",".join(repr(params[k]) for k in surface.names) + "," + repr(p))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_simulate(args) -> int:
    if bool(args.config) == bool(args.preset):
        _usage("give exactly one of --config or --preset")
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, args.config) from None
        if not isinstance(doc, dict):
            raise ParseError("config must be a JSON object", None, args.config)
    else:
        doc = {"preset": args.preset}
        if args.member:
            doc["member"] = args.member
    for key in ("seed", "replications", "workers"):
        val = getattr(args, key)
        if val is not None:
            doc[key] = val
    if "seed" not in doc:
        _usage("simulate needs an explicit seed (--seed or a 'seed' key in the config)")
    configs = configs_from_json(doc)

    out = Path(args.out)
    stem = out.with_suffix("")
    report = {"members": {}}
    for name, cfg in configs.items():
        result = simulate(cfg)
        entry = {"config": cfg.to_dict()}
        power = power_report(result)
        entry["power"] = power.to_dict()
        power.to_csv(f"{stem}_{name}_power.csv")
        if cfg.hypothesis_model == cfg.true_model:
            size = size_report(result)
            entry["size"] = size.to_dict()
            size.to_csv(f"{stem}_{name}_size.csv")
            entry["coverage"] = coverage_study(cfg, result=result).to_dict()
        report["members"][name] = entry
    out.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    return 0


_COMMANDS = {
    "netgen": _cmd_netgen,
    "test": _cmd_test,
    "grid": _cmd_grid,
    "region": _cmd_region,
    "simulate": _cmd_simulate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except MethodConstraintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_METHOD
    except (ParseError, InvalidArgument, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
