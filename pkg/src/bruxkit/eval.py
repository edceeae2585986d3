"""Task datasets, leave-one-subject-out evaluation, and report rendering.

Metrics are macro-averaged over the two classes (positive event vs
silent); a per-class precision with an empty denominator contributes 0.
Reports carry per-fold confusions, mean and population std across folds,
and a fingerprint of the full run configuration.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .corpus import ACTIVITIES
from .features import featurize
from .models import ModelSpec, SingleClassTraining, predict, train
from .segment import LabelPolicy, segment

THREADS_ENV = "BRUXKIT_THREADS"


class EmptyClass(ValueError):
    """A task dataset ended up with zero windows in one class."""


@dataclass(frozen=True)
class TaskSpec:
    id: str
    positive_event: str
    event_activities: frozenset[str]
    silent_only_activities: frozenset[str] = frozenset()

    @property
    def included_activities(self) -> frozenset[str]:
        return self.event_activities | self.silent_only_activities


_WILD = frozenset({"none", "head_movement", "music"})
_ROUTINE = frozenset({"chewing_bread", "chewing_gum", "reading", "drinking", "walking"})

TASK_IDS = ("task1a", "task1b", "task2a", "task2b")


def task_spec(task_id: str, positive_event: str | None = None) -> TaskSpec:
    """Resolve a task id (and, for task 2, the detected event) to a TaskSpec.

    Tasks 1a/1b fix the positive event; tasks 2a/2b default to grinding and
    accept clenching, mirroring the paired result rows for those tasks.
    """
    if task_id == "task1a":
        fixed, activities, silent_only = "grinding", frozenset({"none"}), frozenset()
    elif task_id == "task1b":
        fixed, activities, silent_only = "clenching", frozenset({"none"}), frozenset()
    elif task_id == "task2a":
        fixed, activities, silent_only = None, _WILD, frozenset()
    elif task_id == "task2b":
        fixed, activities, silent_only = None, _WILD, _ROUTINE
    else:
        raise ValueError(f"unknown task {task_id!r}; expected one of {TASK_IDS}")
    if fixed is not None:
        if positive_event not in (None, fixed):
            raise ValueError(f"{task_id} detects {fixed}, not {positive_event}")
        positive_event = fixed
    elif positive_event is None:
        positive_event = "grinding"
    elif positive_event not in ("grinding", "clenching"):
        raise ValueError(f"positive event must be grinding or clenching, got {positive_event!r}")
    return TaskSpec(task_id, positive_event, activities, silent_only)


@dataclass
class Dataset:
    task: str
    positive_event: str
    modality: str
    policy: str
    X: np.ndarray  # (n, 71)
    y: np.ndarray  # (n,) 1 = positive event, 0 = silent
    participants: np.ndarray  # (n,) str
    activities: np.ndarray  # (n,) str

    @property
    def balance(self) -> tuple[int, int]:
        positive = int(self.y.sum())
        return positive, len(self.y) - positive


def iter_task_windows(corpus, task: TaskSpec, modality: str, policy: str):
    """Yield (window, binary label) pairs that belong to a task's dataset.

    Windows labelled with the other event are excluded, and activities in
    the task's silent-only set contribute silent windows only.
    """
    for rec, track in corpus:
        for window in segment(rec, track, modality, policy):
            activity = window.activity_context
            if window.label == "silent":
                if activity not in task.included_activities:
                    continue
            elif window.label == task.positive_event:
                if activity not in task.event_activities:
                    continue
            else:
                continue  # the other event never appears in this task
            yield window, 1 if window.label == task.positive_event else 0


def count_task_windows(corpus, task: TaskSpec, modality: str, policy: str = LabelPolicy.DOMINANT_EVENT) -> tuple[int, int]:
    """(positive, silent) window counts without paying for featurization."""
    positive = negative = 0
    for _, label in iter_task_windows(corpus, task, modality, policy):
        positive += label
        negative += 1 - label
    return positive, negative


def build_dataset(corpus, task: TaskSpec, modality: str, policy: str = LabelPolicy.DOMINANT_EVENT) -> Dataset:
    """Segment + featurize a corpus and filter windows for one task."""
    rows, labels, participants, activities = [], [], [], []
    for window, label in iter_task_windows(corpus, task, modality, policy):
        rows.append(featurize(window).values)
        labels.append(label)
        participants.append(window.participant_id)
        activities.append(window.activity_context)
    y = np.asarray(labels, dtype=int)
    if len(y) == 0 or y.sum() == 0 or y.sum() == len(y):
        raise EmptyClass(
            f"{task.id}/{modality}: positive={int(y.sum())} silent={int(len(y) - y.sum())}"
        )
    return Dataset(
        task=task.id,
        positive_event=task.positive_event,
        modality=modality,
        policy=policy,
        X=np.asarray(rows, dtype=float),
        y=y,
        participants=np.asarray(participants, dtype=object),
        activities=np.asarray(activities, dtype=object),
    )


METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


def metrics_from_confusion(tp: int, fp: int, fn: int, tn: int) -> dict[str, float]:
    """Accuracy plus macro-averaged precision/recall/f1 over the two classes."""
    total = tp + fp + fn + tn
    if total <= 0:
        raise ValueError("empty confusion")

    def _prf(tp_c, fp_c, fn_c):
        precision = tp_c / (tp_c + fp_c) if tp_c + fp_c else 0.0
        recall = tp_c / (tp_c + fn_c) if tp_c + fn_c else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return precision, recall, f1

    p_pos, r_pos, f_pos = _prf(tp, fp, fn)
    p_neg, r_neg, f_neg = _prf(tn, fn, fp)
    return {
        "accuracy": (tp + tn) / total,
        "precision": (p_pos + p_neg) / 2.0,
        "recall": (r_pos + r_neg) / 2.0,
        "f1": (f_pos + f_neg) / 2.0,
    }


@dataclass
class FoldResult:
    participant: str
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    accuracy: float = 0.0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    degenerate: bool = False
    skipped: bool = False
    activities: dict = field(default_factory=dict)  # activity -> [tp, fp, fn, tn]


@dataclass
class EvaluationReport:
    task: str
    positive_event: str
    modality: str
    policy: str
    model_kind: str
    hyperparameters: dict
    seed: int
    folds: list[FoldResult]
    mean: dict
    std: dict
    balance: dict
    fingerprint: str

    @property
    def skipped_participants(self) -> list[str]:
        return [f.participant for f in self.folds if f.skipped]

    @property
    def scored_folds(self) -> list[FoldResult]:
        return [f for f in self.folds if not f.skipped]

    @property
    def all_degenerate(self) -> bool:
        scored = self.scored_folds
        return bool(scored) and all(f.degenerate for f in scored)


def config_fingerprint(
    task_id: str, positive_event: str, modality: str, policy: str, spec: ModelSpec
) -> str:
    payload = {
        "task": task_id,
        "positive_event": positive_event,
        "modality": modality,
        "policy": policy,
        "model": spec.kind,
        "hyperparameters": spec.hyperparameters,
        "seed": spec.seed,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _run_fold(dataset: Dataset, spec: ModelSpec, participant: str) -> FoldResult:
    test_mask = dataset.participants == participant
    X_train, y_train = dataset.X[~test_mask], dataset.y[~test_mask]
    X_test, y_test = dataset.X[test_mask], dataset.y[test_mask]
    try:
        model = train(spec, X_train, y_train)
    except SingleClassTraining:
        return FoldResult(participant=participant, skipped=True)
    pred = predict(model, X_test)

    def confusion(mask) -> tuple[int, int, int, int]:
        p, t = pred[mask], y_test[mask]
        return (
            int(((p == 1) & (t == 1)).sum()),
            int(((p == 1) & (t == 0)).sum()),
            int(((p == 0) & (t == 1)).sum()),
            int(((p == 0) & (t == 0)).sum()),
        )

    tp, fp, fn, tn = confusion(np.ones(len(pred), dtype=bool))
    scores = metrics_from_confusion(tp, fp, fn, tn)
    test_activities = dataset.activities[test_mask]
    per_activity = {}
    for activity in ACTIVITIES:
        mask = test_activities == activity
        if mask.any():
            per_activity[activity] = list(confusion(mask))
    return FoldResult(
        participant=participant,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        degenerate=bool(len(np.unique(pred)) == 1),
        activities=per_activity,
        **scores,
    )


def loso_evaluate(dataset: Dataset, spec: ModelSpec) -> EvaluationReport:
    """One fold per participant, trained on all others; folds may run in
    parallel (BRUXKIT_THREADS) and are merged in lexicographic id order."""
    participants = sorted(set(dataset.participants))
    if len(participants) < 2:
        raise EmptyClass("leave-one-subject-out needs at least 2 participants")

    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            folds = list(pool.map(lambda p: _run_fold(dataset, spec, p), participants))
    else:
        folds = [_run_fold(dataset, spec, p) for p in participants]

    scored = [f for f in folds if not f.skipped]
    mean, std = {}, {}
    for name in METRIC_NAMES:
        values = np.array([getattr(f, name) for f in scored])
        mean[name] = float(values.mean()) if len(values) else None
        std[name] = float(values.std()) if len(values) else None

    positive, negative = dataset.balance
    return EvaluationReport(
        task=dataset.task,
        positive_event=dataset.positive_event,
        modality=dataset.modality,
        policy=dataset.policy,
        model_kind=spec.kind,
        hyperparameters=spec.hyperparameters,
        seed=spec.seed,
        folds=folds,
        mean=mean,
        std=std,
        balance={"positive": positive, "negative": negative},
        fingerprint=config_fingerprint(
            dataset.task, dataset.positive_event, dataset.modality, dataset.policy, spec
        ),
    )


def format_mean_std(mean: float, std: float) -> str:
    """Two decimals each, round-half-even, as printed in the result tables."""
    return f"{mean:.2f}±{std:.2f}"


def render_table(report: EvaluationReport) -> str:
    lines = [
        f"{report.task} ({report.positive_event}) / {report.modality}"
        f" / {report.model_kind} / {report.policy}",
        f"folds: {len(report.folds)}  balance: "
        f"{report.balance['positive']}:{report.balance['negative']} (positive:silent)",
    ]
    degenerate = [f.participant for f in report.scored_folds if f.degenerate]
    lines.append(f"{'metric':<12}{'mean':>16}")
    for name in METRIC_NAMES:
        if report.all_degenerate or report.mean[name] is None:
            cell = "N/A (degenerate)"
        else:
            cell = format_mean_std(report.mean[name], report.std[name])
        lines.append(f"{name:<12}{cell:>16}")
    if degenerate and not report.all_degenerate:
        lines.append(f"degenerate folds: {len(degenerate)} ({', '.join(degenerate)})")
    if report.all_degenerate:
        lines.append("all folds degenerate: model predicts a single class everywhere")
    if report.skipped_participants:
        lines.append(
            "skipped folds (single-class training): "
            + ", ".join(report.skipped_participants)
        )
    lines.append(f"fingerprint: {report.fingerprint}")
    return "\n".join(lines)


REPORT_FORMAT_VERSION = "bruxkit-report-v1"


def report_to_json(report: EvaluationReport) -> str:
    doc = {
        "format": REPORT_FORMAT_VERSION,
        "task": report.task,
        "positive_event": report.positive_event,
        "modality": report.modality,
        "policy": report.policy,
        "model": {
            "kind": report.model_kind,
            "hyperparameters": report.hyperparameters,
            "seed": report.seed,
        },
        "balance": report.balance,
        "folds": [asdict(f) for f in report.folds],
        "mean": report.mean,
        "std": report.std,
        "fingerprint": report.fingerprint,
    }
    return json.dumps(doc, indent=2)


def report_from_json(text: str) -> EvaluationReport:
    doc = json.loads(text)
    if doc.get("format") != REPORT_FORMAT_VERSION:
        raise ValueError(f"report format {doc.get('format')!r}, expected {REPORT_FORMAT_VERSION!r}")
    folds = [FoldResult(**f) for f in doc["folds"]]
    return EvaluationReport(
        task=doc["task"],
        positive_event=doc["positive_event"],
        modality=doc["modality"],
        policy=doc["policy"],
        model_kind=doc["model"]["kind"],
        hyperparameters=doc["model"]["hyperparameters"],
        seed=doc["model"]["seed"],
        folds=folds,
        mean=doc["mean"],
        std=doc["std"],
        balance=doc["balance"],
        fingerprint=doc["fingerprint"],
    )


FOLD_CSV_HEADER = "participant,accuracy,precision,recall,f1,tp,fp,fn,tn,degenerate,skipped"


def write_fold_csv(report: EvaluationReport, path: str | Path) -> None:
    """Delimited per-fold twin of the rendered table."""
    lines = [FOLD_CSV_HEADER]
    for f in report.folds:
        lines.append(
            f"{f.participant},{f.accuracy:.6f},{f.precision:.6f},{f.recall:.6f},"
            f"{f.f1:.6f},{f.tp},{f.fp},{f.fn},{f.tn},{int(f.degenerate)},{int(f.skipped)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
