"""Command-line interface.

Subcommands: gen-data, train, eval, recognize, buckets, size-study.
Exit codes: 0 success, 1 usage error, 2 data/model incompatibility,
3 runtime failure.

Model configuration files are flat key/value text, one ``key = value`` per
line, ``#`` comments allowed; keys match ModelConfig fields.
"""
from __future__ import annotations

import argparse
import sys

from .blocksworld import build_blocksworld_vocabulary, vocabulary_for_domain
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .dataset import (
    dataset_domain_id,
    generate_instances,
    generate_training_pairs,
    read_dataset,
    write_dataset,
)
from .errors import GoalRecError, IncompatibilityError
from .experiments import (
    bucket_rows_to_csv,
    load_instances,
    load_pairs,
    run_bucket_study,
    run_experiment,
    run_size_study,
    size_rows_to_csv,
    summary_path_for,
)
from .model import ModelConfig, train
from .recognizer import recognize


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        raise UsageError(message)


def parse_config_file(path) -> ModelConfig:
    values = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise UsageError(f"{path}:{line_no}: expected 'key = value', got {text!r}")
            key, _, value = text.partition("=")
            values[key.strip()] = value.strip()
    return ModelConfig.from_mapping(values)


def _parse_ratio_setting(text: str):
    """'a:b' -> uniform range tuple, 'x,y,z' -> list of levels, 'x' -> float."""
    text = text.strip()
    try:
        if ":" in text:
            low, high = (float(part) for part in text.split(":"))
            return (low, high)
        if "," in text:
            return [float(part) for part in text.split(",") if part.strip()]
        return float(text)
    except ValueError:
        raise UsageError(f"bad ratio specification {text!r}") from None


def _parse_int_range(text: str) -> tuple[int, int]:
    try:
        if ":" in text:
            low, high = (int(part) for part in text.split(":"))
        else:
            low = high = int(text)
    except ValueError:
        raise UsageError(f"bad integer range {text!r}") from None
    if low > high:
        raise UsageError(f"bad integer range {text!r}")
    return low, high


def _config_from_args(args) -> ModelConfig:
    config = parse_config_file(args.config) if args.config else ModelConfig()
    overrides = {}
    for key in ("embedding_dim", "hidden_size", "batch_size", "learning_rate",
                "epochs", "rng_seed"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return config.replace(**overrides) if overrides else config


def _add_config_flags(parser):
    parser.add_argument("--config", help="flat key/value configuration file")
    parser.add_argument("--embedding-dim", dest="embedding_dim", type=int)
    parser.add_argument("--hidden-size", dest="hidden_size", type=int)
    parser.add_argument("--batch-size", dest="batch_size", type=int)
    parser.add_argument("--learning-rate", dest="learning_rate", type=float)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--seed", dest="rng_seed", type=int)


def cmd_gen_data(args) -> int:
    vocab = build_blocksworld_vocabulary(args.blocks)
    goal_size = _parse_int_range(args.goal_size)
    if args.kind == "pairs":
        observability = _parse_ratio_setting(args.observability or "0.3:0.7")
        items = generate_training_pairs(
            vocab, args.count, goal_size=goal_size,
            observability=observability, rng_seed=args.seed,
        )
    else:
        parsed = _parse_ratio_setting(args.observability or "0.3,0.5,0.7")
        levels = parsed if isinstance(parsed, list) else [parsed] if isinstance(parsed, float) else list(parsed)
        if args.overlap in ("random", "sweep"):
            overlap = args.overlap
        else:
            try:
                overlap = float(args.overlap)
            except ValueError:
                raise UsageError(f"bad overlap {args.overlap!r}") from None
        items = generate_instances(
            vocab,
            n_groups=args.count,
            per_group=args.per_group,
            observabilities=levels,
            goal_size=goal_size,
            goal_set_size=_parse_int_range(args.goal_set_size),
            overlap=overlap,
            hidden_mode=args.hidden,
            rng_seed=args.seed,
        )
    count = write_dataset(args.out, items, vocab)
    print(f"wrote {count} {args.kind} to {args.out} (domain {vocab.domain_id})")
    return 0


def cmd_train(args) -> int:
    config = _config_from_args(args)
    vocab = vocabulary_for_domain(dataset_domain_id(args.pairs))
    pairs = load_pairs(args.pairs, vocabulary=vocab)
    params, report = train(pairs, config, vocab)
    save_checkpoint(
        args.out,
        Checkpoint(
            config=config,
            vocab_checksum=vocab.checksum,
            params=params,
            history=report.history,
        ),
    )
    print(
        f"trained {report.epochs_run} epochs on {len(pairs)} pairs in "
        f"{report.wall_seconds:.1f}s; final train loss {report.final_train_loss:.4f}, "
        f"validation loss {report.final_validation_loss:.4f}; checkpoint: {args.out}"
    )
    return 0


def cmd_eval(args) -> int:
    table = run_experiment(args.dataset, args.checkpoint, args.report)
    print(table.to_csv(), end="")
    print(f"records: {args.report}\nsummary: {summary_path_for(args.report)}")
    return 0


def cmd_recognize(args) -> int:
    items = read_dataset(args.instance)
    instances = [item for item in items if hasattr(item, "goal_set")]
    if not instances:
        raise GoalRecError(f"{args.instance} contains no recognition instances")
    if not 0 <= args.index < len(instances):
        raise UsageError(
            f"--index {args.index} out of range, file has {len(instances)} instances"
        )
    instance = instances[args.index]
    vocab = vocabulary_for_domain(dataset_domain_id(args.instance))
    checkpoint = load_checkpoint(args.checkpoint, vocabulary=vocab)
    result = recognize(instance, checkpoint.params, vocab, normalize=args.normalize)
    for position, goal in enumerate(instance.goal_set):
        marker = "*" if position == result.selected_index else " "
        labels = " ".join(sorted(f.label for f in goal))
        print(f"{marker} G{position}: score={result.scores[position]:.4f} {labels}")
    print(
        f"selected G{result.selected_index} "
        f"(hidden G{instance.hidden_goal_index}, "
        f"{'correct' if result.selected_index == instance.hidden_goal_index else 'wrong'}, "
        f"{result.latency * 1000.0:.2f} ms)"
    )
    return 0


def cmd_buckets(args) -> int:
    vocab = vocabulary_for_domain(dataset_domain_id(args.dataset))
    checkpoint = load_checkpoint(args.checkpoint, vocabulary=vocab)
    instances = load_instances(args.dataset, vocabulary=vocab)
    rows = run_bucket_study(instances, checkpoint.params, vocab)
    csv = bucket_rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(csv)
    print(csv, end="")
    return 0


def cmd_size_study(args) -> int:
    config = _config_from_args(args)
    vocab = vocabulary_for_domain(dataset_domain_id(args.pairs))
    pairs = load_pairs(args.pairs, vocabulary=vocab)
    test_instances = load_instances(args.test, vocabulary=vocab)
    try:
        fractions = [float(part) for part in args.fractions.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"bad fractions list {args.fractions!r}") from None
    rows = run_size_study(pairs, fractions, test_instances, config, vocab)
    csv = size_rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(csv)
    print(csv, end="")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="goalrec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    defaults_shown = dict(formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    p = sub.add_parser("gen-data", help="synthesise training pairs or test instances",
                       **defaults_shown)
    p.add_argument("--blocks", type=int, required=True, help="domain size (block count)")
    p.add_argument("--kind", choices=("pairs", "instances"), default="pairs")
    p.add_argument("--count", type=int, required=True,
                   help="number of pairs, or of goal-set groups for instances")
    p.add_argument("--per-group", type=int, default=3,
                   help="base problems per goal-set group (instances)")
    p.add_argument("--observability", default=None,
                   help="'a:b' uniform range, 'x,y,z' levels, or a single ratio")
    p.add_argument("--goal-size", default="2:4", help="hidden goal size range 'lo:hi'")
    p.add_argument("--goal-set-size", default="5:10", help="candidate set size range")
    p.add_argument("--overlap", default="random",
                   help="'random', 'sweep', or a fixed ratio in [0,1] (instances)")
    p.add_argument("--hidden", choices=("uniform", "anchor"), default="uniform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a model on a pairs dataset", **defaults_shown)
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True, help="checkpoint output path")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on an instance dataset",
                       **defaults_shown)
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--report", required=True,
                   help="evaluation records (JSON lines); summary CSV lands beside it")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("recognize", help="score one instance and print the selection",
                       **defaults_shown)
    p.add_argument("--instance", required=True, help="dataset file of instances")
    p.add_argument("--index", type=int, default=0, help="which instance in the file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--normalize", action="store_true",
                   help="divide scores by goal size (off by default)")
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("buckets", help="accuracy per difficulty class", **defaults_shown)
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", help="CSV output path (also printed)")
    p.set_defaults(func=cmd_buckets)

    p = sub.add_parser("size-study", help="retrain on nested fractions of the pairs",
                       **defaults_shown)
    p.add_argument("--pairs", required=True)
    p.add_argument("--test", required=True, help="instance dataset for evaluation")
    p.add_argument("--fractions", default="0.2,0.4,0.6,0.8,1.0")
    p.add_argument("--out", help="CSV output path (also printed)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_size_study)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except IncompatibilityError as exc:
        print(f"incompatible artifacts: {exc}", file=sys.stderr)
        return 2
    except (GoalRecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
