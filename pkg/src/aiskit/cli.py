"""``aiskit`` command line.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 pool did not
converge (results are still written).
"""

from __future__ import annotations

import argparse
import io
import sys
import warnings

from . import ids, recommender
from .config import RunConfig, resolve
from .errors import (
    AISError,
    BudgetExhaustedWarning,
    ConfigError,
    DataFormatError,
    DimensionError,
    EmptySelfError,
    EvaluationError,
    InvalidObservationError,
    NoDataError,
    NotFoundError,
)
from .immune_pool import write_trace_csv
from .negative_selection import dumps_detectors, generate_detectors, load_detectors
from .synth import synth_packets, synth_ratings

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NONCONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_options(suppress: bool) -> argparse.ArgumentParser:
    default = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--config", metavar="PATH", default=default, help="key = value config file")
    g.add_argument("--seed", type=int, default=default, help="root random seed")
    g.add_argument("--out", metavar="PATH", default=default, help="output file (default stdout)")
    g.add_argument("--trace", metavar="PATH", nargs="?", const="", default=default,
                   help="also write the pool iteration trace CSV")
    return p


def _pool_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("pool dynamics")
    g.add_argument("--ratings", metavar="PATH", help="ratings CSV (user_id,item_id,rating)")
    g.add_argument("--capacity", type=int)
    g.add_argument("--k2", type=float, help="stimulation rate")
    g.add_argument("--k3", type=float, help="death rate")
    g.add_argument("--dt", type=float)
    g.add_argument("--decay-mode", choices=("proportional", "fixed_amount"))
    g.add_argument("--fixed-decay", type=float)
    g.add_argument("--removal-floor", type=float)
    g.add_argument("--saturation-cap", type=float)
    g.add_argument("--stability-window", type=int)
    g.add_argument("--max-iterations", type=int)
    g.add_argument("--initial-concentration", type=float)
    g.add_argument("--overlap-threshold", type=int, help="Pearson penalty threshold")
    return p


def _nsd_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("detector generation")
    g.add_argument("--r", type=int, help="r-contiguous match threshold (bit mode)")
    g.add_argument("--count", type=int, help="target number of detectors")
    g.add_argument("--max-candidates", type=int)
    g.add_argument("--mode", choices=("bits", "signatures"))
    g.add_argument("--mutate-on-match", action="store_const", const=True, default=None)
    g.add_argument("--max-mutation-retries", type=int)
    g.add_argument("--wildcard-prob", type=float)
    return p


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="aiskit", parents=[_global_options(False)],
                  description="Artificial immune system toolkit")
    glob = _global_options(True)
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    rec = sub.add_parser("recommend", help="AIS collaborative-filtering recommender")
    rsub = rec.add_subparsers(dest="action", required=True, parser_class=_Parser)
    pred = rsub.add_parser("predict", parents=[glob, _pool_options()], help="predict one rating")
    pred.add_argument("--user", type=int, required=True)
    pred.add_argument("--item", type=int, required=True)
    top_k = rsub.add_parser("top", parents=[glob, _pool_options()], help="top-k recommendations")
    top_k.add_argument("--user", type=int, required=True)
    top_k.add_argument("--k", type=int, default=10)

    nsd = sub.add_parser("nsd", help="negative-selection detectors")
    nsub = nsd.add_subparsers(dest="action", required=True, parser_class=_Parser)
    train = nsub.add_parser("train", parents=[glob, _nsd_options()], help="generate detectors")
    train.add_argument("--self", dest="self_file", required=True, metavar="F")
    for name, helptext in (("monitor", "write alerts CSV"), ("eval", "write evaluation report")):
        p = nsub.add_parser(name, parents=[glob], help=helptext)
        p.add_argument("--detectors", required=True, metavar="D")
        p.add_argument("--stream", required=True, metavar="F")

    syn = sub.add_parser("synth", help="synthetic fixtures")
    ssub = syn.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sr = ssub.add_parser("ratings", parents=[glob], help="planted-neighbourhood ratings CSV")
    sr.add_argument("--users", type=int, default=20)
    sr.add_argument("--items", type=int, default=60)
    sr.add_argument("--clones", type=int, default=5)
    sr.add_argument("--target", type=int, default=0)
    sr.add_argument("--noise", type=float, default=0.0)
    sp = ssub.add_parser("packets", parents=[glob], help="labelled packet log CSV")
    sp.add_argument("--self", dest="self_count", type=int, default=50)
    sp.add_argument("--anomalies", type=int, default=10)
    return top


CONFIG_FLAGS = (
    "seed", "ratings", "capacity", "k2", "k3", "dt", "decay_mode", "fixed_decay",
    "removal_floor", "saturation_cap", "stability_window", "max_iterations",
    "initial_concentration", "overlap_threshold", "r", "count", "max_candidates",
    "mode", "mutate_on_match", "max_mutation_retries", "wildcard_prob",
)


def _run_config(args) -> RunConfig:
    flags = {k: getattr(args, k, None) for k in CONFIG_FLAGS}
    return resolve(flags, config_path=getattr(args, "config", None))


def _emit(args, text: str) -> None:
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _trace_path(args) -> str | None:
    trace = getattr(args, "trace", None)
    if trace is None:
        return None
    if trace:
        return trace
    out = getattr(args, "out", None)
    return f"{out}.trace.csv" if out else "trace.csv"


def cmd_recommend(args) -> int:
    cfg = _run_config(args)
    pool_cfg = cfg.pool_config()
    aff_cfg = cfg.affinity_config()
    ratings = cfg.get("ratings")
    if not ratings:
        raise UsageError("--ratings is required (flag, AIS_RATINGS or config file)")
    dataset = recommender.read_ratings(ratings)
    hood = recommender.build_neighborhood(args.user, dataset, pool_cfg, aff_cfg)
    target = dataset[args.user]
    if args.action == "predict":
        preds = [recommender.predict(target, args.item, hood)]
    else:
        if args.k < 1:
            raise UsageError("--k must be >= 1")
        preds = recommender.recommend(target, hood, args.k, dataset.catalog)
    buf = io.StringIO()
    recommender.write_predictions(args.user, preds, buf)
    _emit(args, buf.getvalue())
    trace = _trace_path(args)
    if trace:
        with open(trace, "w", newline="\n") as fh:
            write_trace_csv(hood.result, fh)
    if not hood.result.converged:
        print(f"aiskit: pool did not stabilise within {pool_cfg.max_iterations} iterations",
              file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_nsd(args) -> int:
    if args.action == "train":
        cfg = _run_config(args)
        gen_cfg = cfg.generation_config()
        log = ids.read_log(args.self_file)
        bits_log = bool(log.records) and not isinstance(log.records[0], ids.PacketSignature)
        mode = "bits" if bits_log else ("bits" if cfg["mode"] == "bits" else "signatures")
        self_set = ids.build_self_set(log, mode)
        r = cfg["r"]
        if self_set.shape == "bits" and r is None:
            raise UsageError("--r is required for bit-pattern detectors")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", BudgetExhaustedWarning)
            detectors = generate_detectors(self_set, gen_cfg, r)
        for w in caught:
            print(f"aiskit: warning: {w.message}", file=sys.stderr)
        _emit(args, dumps_detectors(detectors))
        return EXIT_OK

    detectors = load_detectors(args.detectors)
    log = ids.read_log(args.stream)
    buf = io.StringIO()
    if args.action == "monitor":
        ids.write_alerts(ids.detect(detectors, log), buf)
    else:
        buf.write(ids.evaluate(detectors, log).to_lines())
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = _run_config(args)
    buf = io.StringIO()
    try:
        if args.action == "ratings":
            votes = synth_ratings(args.users, args.items, args.clones, args.target,
                                  args.noise, cfg["seed"])
            recommender.write_ratings(votes, buf)
        else:
            ids.write_log(synth_packets(args.self_count, args.anomalies, cfg["seed"]), buf)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, buf.getvalue())
    return EXIT_OK


DATA_ERRORS = (DataFormatError, NotFoundError, NoDataError, EmptySelfError, EvaluationError,
               DimensionError, InvalidObservationError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = {"recommend": cmd_recommend, "nsd": cmd_nsd, "synth": cmd_synth}[args.command]
    try:
        return handler(args)
    except (UsageError, ConfigError) as exc:
        print(f"aiskit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"aiskit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except AISError as exc:
        print(f"aiskit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"aiskit: data error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
