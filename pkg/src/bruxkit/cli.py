"""bruxkit command line: synth, validate, featurize, train, evaluate, report.

Exit codes are stable API:
  0  success
  1  validation issues found (validate)
  2  IO / parse / corpus-format errors
  3  a task dataset had an empty class
  4  every fold was degenerate (single-class predictions)
  5  at least one fold was skipped for single-class training
  64 usage errors
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .corpus import (
    CorpusError,
    Modality,
    load_annotations,
    load_corpus,
    load_recording,
    validate_pair,
)
from .eval import (
    EmptyClass,
    TASK_IDS,
    build_dataset,
    count_task_windows,
    loso_evaluate,
    render_table,
    report_from_json,
    report_to_json,
    task_spec,
    write_fold_csv,
)
from .features import featurize, write_features_csv
from .figures import render_report_figures
from .models import ModelError, ModelSpec, predict, save_model, train
from .segment import LabelPolicy, read_windows_csv, segment, write_windows_csv
from .synth import generate_corpus

EXIT_OK = 0
EXIT_ISSUES = 1
EXIT_IO = 2
EXIT_EMPTY_CLASS = 3
EXIT_ALL_DEGENERATE = 4
EXIT_SKIPPED_FOLDS = 5
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 64, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_scalar(text: str):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    if lowered in ("none", "null"):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def load_config(path: str | Path) -> dict:
    """Flat key=value config (a TOML subset): comments with '#', dotted keys."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, text = line.split("=", 1)
        values[key.strip()] = _parse_scalar(text)
    return values


def _parse_hp_overrides(pairs: list[str]) -> dict:
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError(f"--hp expects name=value, got {pair!r}")
        key, text = pair.split("=", 1)
        overrides[key.strip()] = _parse_scalar(text)
    return overrides


def _load_pairs(args) -> list:
    if getattr(args, "corpus", None):
        return load_corpus(args.corpus)
    if getattr(args, "recording", None) and getattr(args, "annotations", None):
        return [(load_recording(args.recording), load_annotations(args.annotations))]
    raise CorpusError("provide --corpus DIR or both --recording and --annotations")


def cmd_synth(args) -> int:
    if args.participants < 2:
        print("error: --participants must be at least 2", file=sys.stderr)
        return EXIT_IO
    try:
        manifest = generate_corpus(args.out, args.participants, args.seed)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(manifest['participants'])} participants to {args.out}")
    pairs = load_corpus(args.out)
    print("window counts at dominant_event policy (positive:silent):")
    for task_id in TASK_IDS:
        events = ("grinding",) if task_id.startswith("task1") else ("grinding", "clenching")
        for event in events:
            task = task_spec(task_id, event if task_id.startswith("task2") else None)
            pos, neg = count_task_windows(pairs, task, Modality.GYROSCOPE)
            print(f"  {task_id} ({task.positive_event}): {pos}:{neg}")
    return EXIT_OK


def cmd_validate(args) -> int:
    pairs = _load_pairs(args)
    issues = 0
    for rec, track in pairs:
        report = validate_pair(rec, track)
        print(report.render())
        issues += len(report.issues)
    return EXIT_ISSUES if issues else EXIT_OK


def cmd_featurize(args) -> int:
    if args.windows:
        windows = read_windows_csv(args.windows)
    else:
        windows = []
        for rec, track in _load_pairs(args):
            windows.extend(segment(rec, track, args.modality, args.policy))
        if args.windows_out:
            write_windows_csv(windows, args.windows_out)
            print(f"wrote {len(windows)} windows to {args.windows_out}")
    vectors = [featurize(w) for w in windows]
    write_features_csv(vectors, args.out)
    print(f"wrote {len(vectors)} feature rows to {args.out}")
    return EXIT_OK


def _model_spec(args) -> ModelSpec:
    return ModelSpec.make(args.model, seed=args.seed, **_parse_hp_overrides(args.hp))


def cmd_train(args) -> int:
    pairs = _load_pairs(args)
    task = task_spec(args.task, args.event)
    dataset = build_dataset(pairs, task, args.modality, args.policy)
    spec = _model_spec(args)
    model = train(spec, dataset.X, dataset.y)
    save_model(model, args.out)
    accuracy = float((predict(model, dataset.X) == dataset.y).mean())
    print(
        f"trained {spec.kind} on {len(dataset.y)} windows"
        f" ({task.id}, {args.modality}); training accuracy {accuracy:.4f}"
    )
    print(f"model written to {args.out}")
    return EXIT_OK


def _emit_report(report, out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    prefix = (
        f"report_{report.task}_{report.positive_event}_{report.modality}"
        f"_{report.model_kind}_{report.fingerprint[:12]}"
    )
    (out_dir / f"{prefix}.json").write_text(report_to_json(report) + "\n", encoding="utf-8")
    table = render_table(report)
    (out_dir / f"{prefix}.txt").write_text(table + "\n", encoding="utf-8")
    write_fold_csv(report, out_dir / f"{prefix}.csv")
    figures = render_report_figures(report, out_dir, prefix)
    print(table)
    print(f"report files: {out_dir / prefix}.{{json,txt,csv}}")
    for fig in figures:
        print(f"figure: {fig}")
    if report.all_degenerate:
        return EXIT_ALL_DEGENERATE
    if report.skipped_participants:
        return EXIT_SKIPPED_FOLDS
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = load_config(args.config) if args.config else {}

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return config.get(key, default)

    corpus_dir = pick(args.corpus, "corpus_dir", None)
    if corpus_dir is None:
        raise CorpusError("provide --corpus or corpus_dir in the config file")
    task_id = pick(args.task, "task", "task1a")
    if task_id not in TASK_IDS:
        raise ValueError(f"unknown task {task_id!r}; expected one of {TASK_IDS}")
    event = pick(args.event, "positive_event", None)
    modality = pick(args.modality, "modality", Modality.GYROSCOPE)
    if modality not in Modality.ALL:
        raise ValueError(f"unknown modality {modality!r}")
    policy = pick(args.policy, "label_policy", LabelPolicy.DOMINANT_EVENT)
    if policy not in LabelPolicy.ALL:
        raise ValueError(f"unknown label policy {policy!r}")
    model_kind = pick(args.model, "model", "svm")
    seed = int(pick(args.seed, "seed", 0))
    out_dir = Path(pick(args.out, "output_dir", "out"))
    overrides = {
        key.split(".", 1)[1]: value
        for key, value in config.items()
        if key.startswith("hp.")
    }
    overrides.update(_parse_hp_overrides(args.hp))

    pairs = load_corpus(corpus_dir)
    task = task_spec(task_id, event)
    dataset = build_dataset(pairs, task, modality, policy)
    spec = ModelSpec.make(model_kind, seed=seed, **overrides)
    report = loso_evaluate(dataset, spec)
    return _emit_report(report, out_dir)


def cmd_report(args) -> int:
    report = report_from_json(Path(args.report).read_text(encoding="utf-8"))
    return _emit_report(report, Path(args.out))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bruxkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--participants", type=int, default=13)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    def add_input_flags(p):
        p.add_argument("--corpus", help="corpus directory of recording/annotation pairs")
        p.add_argument("--recording", help="single recording CSV")
        p.add_argument("--annotations", help="single annotations JSON")

    p = sub.add_parser("validate", help="run corpus consistency checks")
    add_input_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("featurize", help="dump the 71-column feature CSV")
    add_input_flags(p)
    p.add_argument("--windows", help="featurize a windows CSV instead of raw recordings")
    p.add_argument("--windows-out", help="also dump the segmented windows CSV")
    p.add_argument("--modality", choices=Modality.ALL, default=Modality.GYROSCOPE)
    p.add_argument("--policy", choices=LabelPolicy.ALL, default=LabelPolicy.DOMINANT_EVENT)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_featurize)

    def add_model_flags(p, with_defaults: bool):
        default = (lambda v: v) if with_defaults else (lambda v: None)
        p.add_argument("--task", choices=TASK_IDS, default=default("task1a"))
        p.add_argument("--event", choices=("grinding", "clenching"), default=None,
                       help="positive event for task 2 (default grinding)")
        p.add_argument("--modality", choices=Modality.ALL, default=default(Modality.GYROSCOPE))
        p.add_argument("--policy", choices=LabelPolicy.ALL,
                       default=default(LabelPolicy.DOMINANT_EVENT))
        p.add_argument("--model",
                       choices=("decision_tree", "knn", "logistic_regression",
                                "random_forest", "svm"),
                       default=default("svm"))
        p.add_argument("--seed", type=int, default=default(0))
        p.add_argument("--hp", action="append", metavar="NAME=VALUE",
                       help="hyperparameter override; repeatable")

    p = sub.add_parser("train", help="train one model on a task dataset")
    add_input_flags(p)
    add_model_flags(p, with_defaults=True)
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="leave-one-subject-out evaluation")
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--corpus", default=None)
    add_model_flags(p, with_defaults=False)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="re-render table/CSV/figures from a report JSON")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EmptyClass as exc:
        print(f"error: empty class: {exc}", file=sys.stderr)
        return EXIT_EMPTY_CLASS
    except (CorpusError, ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
