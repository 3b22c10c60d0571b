"""Command line interface: ``loglinclp {enumerate,train,rank,loglik}``.

Exit status is 0 on success, 1 when a query has no proof tree, and 2 on
syntax, validation or file errors.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from typing import Optional, Sequence

from loglinclp.derivation import DEFAULT_MAX_DEPTH, DEFAULT_MAX_TREES, enumerate_proof_trees
from loglinclp.estimator import EstimationError, IMConfig
from loglinclp.hierarchy import HierarchyError
from loglinclp.model import ModelFormatError, SampleError, TrainingSample, dump_model, parse_model
from loglinclp.patterns import PatternSyntaxError, load_patterns
from loglinclp.program import ProgramError, load_corpus, load_program, parse_goal
from loglinclp.selector import DEFAULT_GAIN_THRESHOLD
from loglinclp.trainer import InduceConfig, fit, induce, rank

EXIT_OK, EXIT_NO_PARSE, EXIT_ERROR = 0, 1, 2


class CommandError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc.strerror}") from exc


def _fmt(args):
    return repr if args.full_precision else (lambda v: f"{v:.6f}")


@contextlib.contextmanager
def _sink(target: Optional[str]):
    if target is None:
        yield None
    elif target == "-":
        yield sys.stdout
    else:
        with open(target, "w", encoding="utf-8") as fh:
            yield fh


def _depth(args, default=DEFAULT_MAX_DEPTH):
    return args.max_depth if args.max_depth is not None else default


def cmd_enumerate(args) -> int:
    program = load_program(_read(args.program))
    goal = parse_goal(args.query, program)
    found = enumerate_proof_trees(program, goal, _depth(args), args.max_trees)
    for n, tree in enumerate(found, 1):
        print(f"tree {n}")
        print(tree.render())
        print("answer\t" + (" & ".join(map(str, tree.answer)) or "true"))
    if found.truncated:
        print(f"# truncated at {args.max_trees} trees", file=sys.stderr)
    if not found:
        print("no parse")
        return EXIT_NO_PARSE
    return EXIT_OK


def _im_config(args) -> IMConfig:
    return IMConfig(loglik_tol=args.tol_loglik, root_tol=args.tol_root, max_iters=args.max_iter)


def cmd_train(args) -> int:
    program = load_program(_read(args.program))
    entries = load_corpus(_read(args.corpus), program)
    depth = _depth(args)
    cfg = InduceConfig(im=_im_config(args), gain_threshold=args.gain_threshold,
                       max_properties=args.max_properties, max_rounds=args.max_rounds,
                       max_depth=depth, max_trees=args.max_trees)
    sample = TrainingSample.from_corpus(program, entries, depth, args.max_trees)
    fmt = _fmt(args)
    with _sink(args.trace) as trace_out, _sink(args.selection_log) as sel_out:
        if args.fixed_properties:
            patterns = load_patterns(_read(args.fixed_properties))
            model, trace = fit(program, sample, patterns, cfg)
            if trace_out:
                for line in trace.lines(args.full_precision):
                    print(line, file=trace_out)
        else:
            model, rounds = induce(program, sample, cfg)
            for record in rounds:
                if trace_out:
                    for line in record.trace.lines(args.full_precision):
                        print(f"{record.round}\t{line}", file=trace_out)
                if sel_out:
                    for report in record.reports:
                        print(f"{record.round}\t{report.line(args.full_precision)}", file=sel_out)
                print(record.line(args.full_precision))
    with open(args.out_model, "w", encoding="utf-8") as fh:
        fh.write(dump_model(model, depth))
    print(f"loglik\t{fmt(model.log_likelihood())}")
    return EXIT_OK


def cmd_rank(args) -> int:
    saved = parse_model(_read(args.model))
    program = load_program(_read(args.program))
    goal = parse_goal(args.query, program)
    ranking = rank(saved, program, goal, _depth(args, saved.depth), args.max_trees)
    if not ranking.parsed:
        print("no parse")
        return EXIT_NO_PARSE
    fmt = _fmt(args)
    for n, entry in enumerate(ranking, 1):
        answer = " & ".join(map(str, entry.tree.answer)) or "true"
        print(f"{n}\t{fmt(entry.probability)}\t{answer}")
        if args.show_trees:
            print(entry.tree.render(prefix="    "))
    return EXIT_OK


def cmd_loglik(args) -> int:
    saved = parse_model(_read(args.model))
    program = load_program(_read(args.program))
    entries = load_corpus(_read(args.corpus), program)
    sample = TrainingSample.from_corpus(program, entries, _depth(args, saved.depth), args.max_trees)
    print(_fmt(args)(saved.bind(sample).log_likelihood()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loglinclp",
        description="Log-linear models over proof trees of constraint logic programs, "
                    "trained from unparsed queries.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--max-depth", type=int, default=None,
                       help=f"resolution steps per derivation (default {DEFAULT_MAX_DEPTH}; "
                            "rank and loglik default to the model's training depth)")
        p.add_argument("--max-trees", type=int, default=DEFAULT_MAX_TREES,
                       help="proof trees kept per query (default %(default)s)")
        p.add_argument("--full-precision", action="store_true",
                       help="print floats with repr instead of 6 decimals")

    p = sub.add_parser("enumerate", help="list the proof trees of a query")
    p.add_argument("program")
    p.add_argument("query")
    common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("train", help="induce properties and estimate parameters")
    p.add_argument("program")
    p.add_argument("corpus")
    p.add_argument("out_model")
    common(p)
    p.add_argument("--tol-loglik", type=float, default=1e-6,
                   help="stop when the log-likelihood changes less (default %(default)s)")
    p.add_argument("--tol-root", type=float, default=1e-10,
                   help="relative residual for update equations (default %(default)s)")
    p.add_argument("--max-iter", type=int, default=1000,
                   help="IM steps per estimation (default %(default)s)")
    p.add_argument("--max-properties", type=int, default=50, help="(default %(default)s)")
    p.add_argument("--max-rounds", type=int, default=50, help="(default %(default)s)")
    p.add_argument("--gain-threshold", type=float, default=DEFAULT_GAIN_THRESHOLD,
                   help="smallest approximate gain worth a new property (default %(default)s)")
    p.add_argument("--fixed-properties", metavar="FILE", default=None,
                   help="skip selection; estimate these patterns, one per line (default: off)")
    p.add_argument("--trace", nargs="?", const="-", default=None, metavar="FILE",
                   help="per-iteration 'iteration, L, lambdas' rows; stdout if no FILE (default: off)")
    p.add_argument("--selection-log", nargs="?", const="-", default=None, metavar="FILE",
                   help="per-round candidate scores; stdout if no FILE (default: off)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rank", help="rank the proof trees of a query")
    p.add_argument("model")
    p.add_argument("program")
    p.add_argument("query")
    common(p)
    p.add_argument("--show-trees", action="store_true", help="print each ranked tree (default: off)")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("loglik", help="log-likelihood of a corpus under a model")
    p.add_argument("model")
    p.add_argument("program")
    p.add_argument("corpus")
    common(p)
    p.set_defaults(func=cmd_loglik)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CommandError, ProgramError, HierarchyError, SampleError, ModelFormatError,
            PatternSyntaxError, EstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
