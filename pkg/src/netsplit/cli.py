"""Command-line interface: ``netsplit <subcommand> [options]``.

Exit codes: 0 success, 1 usage or parameter error, 2 data error, 3 numerical
failure.  ``--config FILE`` reads a JSON object whose keys are option names
(dashes or underscores); options given on the command line win.  Every run
writes ``config.resolved.json`` next to its outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from ._rng import RNG_NAME
from .community import CommunityAssignment, spectral_clustering
from .exceptions import DataError, NetsplitError, NumericalError, ParameterError
from .inference import infer_split, parse_contrast
from .network import EdgeDomain, NetworkKind, read_labels, read_network, result_record, write_json, write_labels, \
    write_network
from .sim import GAP_PARTITIONS, GAP_SETTINGS, OVERRIDE_FIELDS, PRESETS, analyze_real, gap_curves, preset_charts, rows_to_csv, \
    run_preset
from .split import SplitMode, SplitPair, SplitParams, split_network

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3
_DOMAIN = {"gaussian": EdgeDomain.REAL, "poisson": EdgeDomain.COUNT, "bernoulli": EdgeDomain.BINARY}
_INTERNAL = {"command", "config", "func"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise ParameterError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"missing required option(s): {flags}")


def _resolved(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in _INTERNAL}
    cfg["command"] = args.command
    cfg["version"] = __version__
    cfg["rng"] = RNG_NAME
    return cfg


def _echo_config(args, directory: str) -> None:
    write_json(_resolved(args), os.path.join(directory or ".", "config.resolved.json"))


def _dir_of(path: str) -> str:
    return os.path.dirname(os.path.abspath(path))


def _split_params(mode: str, epsilon, gamma, tau2, seed) -> SplitParams:
    m = SplitMode.parse(mode)
    if m is SplitMode.BERNOULLI:
        if gamma is None:
            raise UsageError("--gamma is required for bernoulli fission")
        if epsilon is not None:
            raise ParameterError("--epsilon does not apply to bernoulli fission; use --gamma")
        return SplitParams(m, gamma=gamma, seed=seed)
    if epsilon is None:
        raise UsageError(f"--epsilon is required for {m.model} thinning")
    if gamma is not None:
        raise ParameterError(f"--gamma does not apply to {m.model} thinning; use --epsilon")
    if m is SplitMode.GAUSSIAN and tau2 is None:
        raise UsageError("--tau2 is required for gaussian thinning")
    return SplitParams(m, epsilon=epsilon, tau2=tau2 if m is SplitMode.GAUSSIAN else None, seed=seed)


def _check_range(flag: str, value, low: float, high: float) -> None:
    if value is not None and not low < value < high:
        raise ParameterError(f"{flag} must lie strictly between {low:g} and {high:g}, got {value!r}")


# --------------------------------------------------------------- commands


def cmd_split(args) -> None:
    _require(args, "mode", "input", "out_train", "out_test")
    _check_range("--epsilon", args.epsilon, 0.0, 1.0)
    _check_range("--gamma", args.gamma, 0.0, 0.5)
    params = _split_params(args.mode, args.epsilon, args.gamma, args.tau2, args.seed)
    A = read_network(args.input, NetworkKind.parse(args.kind), _DOMAIN[params.mode.model], args.nodes)
    pair = split_network(A, params)
    for path in (args.out_train, args.out_test):
        os.makedirs(_dir_of(path), exist_ok=True)
    write_network(pair.train, args.out_train)
    write_network(pair.test, args.out_test)
    _echo_config(args, _dir_of(args.out_train))
    if _dir_of(args.out_test) != _dir_of(args.out_train):
        _echo_config(args, _dir_of(args.out_test))


def cmd_cluster(args) -> None:
    _require(args, "input", "k", "out")
    A = read_network(args.input, NetworkKind.parse(args.kind), EdgeDomain(args.domain), args.nodes)
    assignment = spectral_clustering(A, args.k, args.restarts, seed=args.seed, normalize_rows=args.normalize_rows)
    os.makedirs(_dir_of(args.out), exist_ok=True)
    write_labels(assignment.labels, args.out)
    _echo_config(args, _dir_of(args.out))


def cmd_infer(args) -> None:
    _require(args, "model", "train", "test", "labels", "contrast", "out")
    _check_range("--epsilon", args.epsilon, 0.0, 1.0)
    _check_range("--gamma", args.gamma, 0.0, 0.5)
    _check_range("--alpha", args.alpha, 0.0, 1.0)
    params = _split_params(args.model, args.epsilon, args.gamma, args.tau2, 0)
    kind = NetworkKind.parse(args.kind)
    domain = _DOMAIN[params.mode.model]
    train = read_network(args.train, kind, domain, args.nodes)
    test = read_network(args.test, kind, domain, args.nodes if args.nodes is not None else train.n)
    if test.n != train.n:
        raise DataError(f"train has {train.n} nodes but test has {test.n}")
    labels = read_labels(args.labels)
    if labels.size != train.n:
        raise DataError(f"labels file has {labels.size} entries for a network of {train.n} nodes")
    K = args.k if args.k is not None else int(labels.max()) + 1
    assignment = CommunityAssignment(labels, K)
    u = parse_contrast(args.contrast, K, kind.directed)
    result = infer_split(SplitPair(train, test, params), assignment, u, args.alpha)
    record = result_record(result, params.fraction)
    write_json(record, args.out)
    _echo_config(args, _dir_of(args.out))
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)


def _overrides(args) -> dict:
    out = {}
    for flag, field_name in OVERRIDE_FIELDS.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        if flag in ("model", "contrast"):
            out[field_name] = [v for v in str(value).split(",") if v]
        elif flag in ("n", "k", "k_true", "restarts"):
            out[field_name] = [int(v) for v in _float_list(value)]
        else:
            out[field_name] = _float_list(value)
    if args.gammas is not None:
        out["gammas"] = _float_list(args.gammas)
    if args.setting is not None:
        out["setting"] = [args.setting]
    return out


def cmd_simulate(args) -> None:
    _require(args, "preset", "out_dir")
    if args.replicates < 1:
        raise ParameterError("--replicates must be at least 1")
    rows = run_preset(args.preset, _overrides(args), args.replicates, args.seed, args.threads)
    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "report.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))
    if args.svg:
        for name, doc in preset_charts(args.preset, rows).items():
            with open(os.path.join(args.out_dir, name), "w", encoding="utf-8") as fh:
                fh.write(doc)
    _echo_config(args, args.out_dir)


def cmd_gapcurves(args) -> None:
    _require(args, "setting", "out")
    gammas = _float_list(args.gammas)
    rows = gap_curves(args.setting, args.n, gammas, args.reps, args.seed, args.threads, args.partition)
    columns = ("gamma", "mean_abs_V_gap", "mean_abs_Phi_gap")
    os.makedirs(_dir_of(args.out), exist_ok=True)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv([{c: r[c] for c in columns} for r in rows]))
    _echo_config(args, _dir_of(args.out))


def cmd_analyze(args) -> None:
    _require(args, "input", "out_dir")
    gammas = _float_list(args.gammas)
    for g in gammas:
        _check_range("--gammas", g, 0.0, 0.5)
    A = read_network(args.input, NetworkKind.parse(args.kind), EdgeDomain.BINARY, args.nodes)
    rows = analyze_real(A, gammas, args.repeats, args.k, args.contrast or "", args.alpha, args.seed,
                        args.restarts, args.threads)
    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "report.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))
    _echo_config(args, args.out_dir)


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netsplit", description="Selective inference for network community contrasts.")
    parser.add_argument("--version", action="version", version=f"netsplit {__version__} (rng {RNG_NAME})")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, seed=True, threads=False):
        p.add_argument("--config", help="JSON file of option values; command-line flags take precedence")
        if seed:
            p.add_argument("--seed", type=int, default=0)
        if threads:
            p.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("split", help="thin or fission a network")
    common(p)
    p.add_argument("--mode", choices=["gaussian", "poisson", "bernoulli"])
    p.add_argument("--epsilon", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--tau2", type=float)
    p.add_argument("--in", dest="input")
    p.add_argument("--nodes", type=int, help="node count when the edge list has no header")
    p.add_argument("--kind", default="directed")
    p.add_argument("--out-train")
    p.add_argument("--out-test")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("cluster", help="spectral clustering of a network")
    common(p)
    p.add_argument("--in", dest="input")
    p.add_argument("--nodes", type=int)
    p.add_argument("--kind", default="directed")
    p.add_argument("--domain", default="real", choices=[d.value for d in EdgeDomain])
    p.add_argument("--k", type=int)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--normalize-rows", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("infer", help="confidence interval for a contrast on the test network")
    common(p, seed=False)
    p.add_argument("--model", choices=["gaussian", "poisson", "bernoulli"])
    p.add_argument("--train")
    p.add_argument("--test")
    p.add_argument("--nodes", type=int)
    p.add_argument("--labels")
    p.add_argument("--k", type=int, help="number of communities (default: largest label)")
    p.add_argument("--contrast")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--tau2", type=float)
    p.add_argument("--alpha", type=float, default=0.10)
    p.add_argument("--kind", default="directed")
    p.add_argument("--out")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("simulate", help="run a simulation preset")
    common(p, threads=True)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--out-dir")
    p.add_argument("--svg", action="store_true", help="also write SVG line charts")
    for flag in OVERRIDE_FIELDS:
        p.add_argument("--" + flag.replace("_", "-"), dest=flag, help="override (comma-separated list = grid)")
    p.add_argument("--gammas", help="gamma grid for the gap preset")
    p.add_argument("--setting", choices=GAP_SETTINGS)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gapcurves", help="mean |V - B| and |Phi - B| against gamma")
    common(p, threads=True)
    p.add_argument("--setting", choices=GAP_SETTINGS)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--gammas", default="0.001,0.1,0.2,0.3,0.4,0.5")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--partition", default="estimated", choices=GAP_PARTITIONS,
                   help="cluster each train network, or use fixed halves")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gapcurves)

    p = sub.add_parser("analyze", help="repeated fission analysis of an observed binary network")
    common(p, threads=True)
    p.add_argument("--in", dest="input")
    p.add_argument("--nodes", type=int)
    p.add_argument("--kind", default="undirected")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--gammas", default="0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45")
    p.add_argument("--repeats", type=int, default=500)
    p.add_argument("--contrast", help="default: within minus between communities")
    p.add_argument("--alpha", type=float, default=0.10)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_analyze)
    return parser


def _load_config(path: str, parser: argparse.ArgumentParser) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read config file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"config file {path} is not valid JSON: {exc.msg} at line {exc.lineno}") from None
    if not isinstance(cfg, dict):
        raise DataError(f"config file {path} must contain a JSON object")
    known = {a.dest for a in parser._actions}
    out = {}
    for key, value in cfg.items():
        dest = {"in": "input"}.get(key, key.replace("-", "_"))
        if dest in ("command", "version", "rng"):
            continue
        if dest not in known:
            raise UsageError(f"unknown key {key!r} in config file {path}")
        out[dest] = value
    return out


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError(parser.format_usage() + "netsplit: error: a subcommand is required")
    if getattr(args, "config", None):
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**_load_config(args.config, sub))
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
        args.func(args)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"netsplit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"netsplit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"netsplit: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NetsplitError as exc:
        print(f"netsplit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
