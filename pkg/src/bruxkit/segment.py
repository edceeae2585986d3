"""Sliding-window segmentation: 8-sample windows, 50% overlap, one label each.

At 5 Hz the 1.6 s window is exactly 8 samples and the 0.8 s hop exactly 4,
so windowing is done in integer samples. Trailing partial windows are
dropped rather than padded.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import AnnotationTrack, Modality, Recording, fmt9, sample_labels

WINDOW_LEN = 8
HOP = 4


class LabelPolicy:
    DOMINANT_EVENT = "dominant_event"
    STRICT_SILENT = "strict_silent"
    ALL = (DOMINANT_EVENT, STRICT_SILENT)


class MixedEvents(ValueError):
    """Both grinding and clenching inside one window; annotation bug upstream."""


@dataclass(frozen=True)
class Window:
    participant_id: str
    modality: str
    start_index: int
    samples: np.ndarray  # (8, 6), axis order x_l, y_l, z_l, x_r, y_r, z_r
    label: str
    activity_context: str


def window_count(n_samples: int, window_len: int = WINDOW_LEN, hop: int = HOP) -> int:
    if window_len < 1 or hop < 1:
        raise ValueError("window_len and hop must be >= 1")
    if n_samples < window_len:
        return 0
    return (n_samples - window_len) // hop + 1


def resolve_label(sample_events: list[str], policy: str) -> str:
    """Collapse the window's 8 per-sample events into one label.

    dominant_event: most frequent event; an exact 4-4 tie resolves to silent.
    strict_silent: silent only when every sample is silent.
    """
    if len(sample_events) != WINDOW_LEN:
        raise ValueError(f"expected {WINDOW_LEN} events, got {len(sample_events)}")
    kinds = {e for e in sample_events if e != "silent"}
    if len(kinds) > 1:
        raise MixedEvents(f"window mixes events {sorted(kinds)}")
    if not kinds:
        return "silent"
    event = kinds.pop()
    n_event = sum(e == event for e in sample_events)
    if policy == LabelPolicy.DOMINANT_EVENT:
        return event if n_event > WINDOW_LEN // 2 else "silent"
    if policy == LabelPolicy.STRICT_SILENT:
        return event
    raise ValueError(f"unknown label policy {policy!r}")


def _dominant_activity(activities: list[str], starts: np.ndarray) -> str:
    counts: dict[str, int] = {}
    earliest: dict[str, float] = {}
    for a, s in zip(activities, starts):
        counts[a] = counts.get(a, 0) + 1
        earliest[a] = min(earliest.get(a, np.inf), float(s))
    best = max(counts.values())
    tied = [a for a, c in counts.items() if c == best]
    return min(tied, key=lambda a: (earliest[a], a))


def segment(
    rec: Recording,
    track: AnnotationTrack,
    modality: str,
    policy: str = LabelPolicy.DOMINANT_EVENT,
) -> list[Window]:
    """Slice one recording into labelled windows for the chosen modality."""
    cols = Modality.columns(modality)
    data = rec.channels[:, cols]
    events, activities, starts = sample_labels(rec, track)
    windows = []
    for s in range(0, len(rec) - WINDOW_LEN + 1, HOP):
        span = slice(s, s + WINDOW_LEN)
        label = resolve_label(events[span], policy)
        activity = _dominant_activity(activities[span], starts[span])
        windows.append(
            Window(
                participant_id=rec.participant_id,
                modality=modality,
                start_index=s,
                samples=data[span],
                label=label,
                activity_context=activity,
            )
        )
    return windows


WINDOW_CSV_HEADER = "participant,modality,start_index,label,activity," + ",".join(
    f"v{i}" for i in range(WINDOW_LEN * 6)
)


def write_windows_csv(windows: list[Window], path: str | Path) -> None:
    """Dump windows as CSV rows; values flattened time-major."""
    lines = [WINDOW_CSV_HEADER]
    for w in windows:
        values = ",".join(fmt9(v) for v in w.samples.reshape(-1))
        lines.append(
            f"{w.participant_id},{w.modality},{w.start_index},{w.label},"
            f"{w.activity_context},{values}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_windows_csv(path: str | Path) -> list[Window]:
    """Read a windows dump back, e.g. to feed it into featurize."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != WINDOW_CSV_HEADER:
        raise ValueError(f"{path}: not a bruxkit windows CSV")
    windows = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 5 + WINDOW_LEN * 6:
            raise ValueError(f"{path}:{lineno}: expected {5 + WINDOW_LEN * 6} fields")
        samples = np.array([float(v) for v in fields[5:]]).reshape(WINDOW_LEN, 6)
        windows.append(
            Window(
                participant_id=fields[0],
                modality=fields[1],
                start_index=int(fields[2]),
                samples=samples,
                label=fields[3],
                activity_context=fields[4],
            )
        )
    return windows
