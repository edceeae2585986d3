"""On-disk corpus formats: dual-ear IMU recordings and event/activity annotations.

A recording is a CSV of 5 Hz samples with 12 channels (accel + gyro, x/y/z,
left + right ear). Annotations are a JSON list of half-open ``[start, end)``
intervals carrying an event (grinding / clenching / silent) and a general
activity. Any instant not covered by a grinding or clenching interval is
silent.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMAT_VERSION = "bruxkit-v1"
SAMPLE_RATE_HZ = 5.0
RATE_TOLERANCE = 0.10  # allowed fractional jitter on the inter-sample delta
MIN_SAMPLES = 8  # one window

CSV_HEADER = "t,ax_l,ay_l,az_l,gx_l,gy_l,gz_l,ax_r,ay_r,az_r,gx_r,gy_r,gz_r"
CSV_COLUMNS = tuple(CSV_HEADER.split(","))
N_CHANNELS = 12

EVENTS = ("grinding", "clenching", "silent")
ACTIVITIES = (
    "none",
    "head_movement",
    "music",
    "chewing_bread",
    "chewing_gum",
    "reading",
    "drinking",
    "walking",
)


class CorpusError(ValueError):
    """Base class for recording/annotation format and invariant violations."""


class MalformedRow(CorpusError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NonMonotoneTime(CorpusError):
    pass


class RateViolation(CorpusError):
    pass


class TooShort(CorpusError):
    pass


class OverlappingEvents(CorpusError):
    pass


class InvertedInterval(CorpusError):
    pass


class UnknownLabel(CorpusError):
    pass


class UnknownFormatVersion(CorpusError):
    pass


class Modality:
    """Sensor selection; decides which 6 of the 12 channels feed the pipeline."""

    GYROSCOPE = "gyroscope"
    ACCELEROMETER = "accelerometer"
    ALL = (GYROSCOPE, ACCELEROMETER)

    # channel indices in axis order x_l, y_l, z_l, x_r, y_r, z_r
    _COLUMNS = {
        GYROSCOPE: (3, 4, 5, 9, 10, 11),
        ACCELEROMETER: (0, 1, 2, 6, 7, 8),
    }

    @staticmethod
    def columns(modality: str) -> tuple[int, ...]:
        try:
            return Modality._COLUMNS[modality]
        except KeyError:
            raise UnknownLabel(f"unknown modality {modality!r}") from None


def fmt9(x: float) -> str:
    """Canonical float formatting: 9 significant digits, '.' separator."""
    return format(float(x), ".9g")


@dataclass(frozen=True)
class ImuSample:
    t: float
    accel_left: tuple[float, float, float]
    accel_right: tuple[float, float, float]
    gyro_left: tuple[float, float, float]
    gyro_right: tuple[float, float, float]


@dataclass(frozen=True)
class Recording:
    """Time-ordered dual-ear 6-axis IMU samples for one participant.

    ``channels`` is an (n, 12) array in CSV column order:
    ax_l, ay_l, az_l, gx_l, gy_l, gz_l, ax_r, ay_r, az_r, gx_r, gy_r, gz_r.
    """

    participant_id: str
    sample_rate_hz: float
    t: np.ndarray
    channels: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        ch = np.asarray(self.channels, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "channels", ch)
        if self.sample_rate_hz <= 0:
            raise RateViolation(f"sample rate must be positive, got {self.sample_rate_hz}")
        if t.ndim != 1 or ch.shape != (t.shape[0], N_CHANNELS):
            raise CorpusError(f"channel array must be (n, {N_CHANNELS}), got {ch.shape}")
        if len(t) < MIN_SAMPLES:
            raise TooShort(f"recording has {len(t)} samples, need at least {MIN_SAMPLES}")
        if not np.isfinite(t).all() or not np.isfinite(ch).all():
            raise CorpusError("non-finite value in recording")
        if t[0] < 0:
            raise NonMonotoneTime("timestamps must be non-negative")
        dt = np.diff(t)
        if (dt <= 0).any():
            i = int(np.argmax(dt <= 0))
            raise NonMonotoneTime(f"t not strictly increasing at sample {i + 1}")
        period = 1.0 / self.sample_rate_hz
        bad = np.abs(dt - period) > RATE_TOLERANCE * period
        if bad.any():
            i = int(np.argmax(bad))
            raise RateViolation(
                f"delta {dt[i]:.6g}s at sample {i + 1} outside {period:.6g}s +/- 10%"
            )

    def __len__(self) -> int:
        return len(self.t)

    @property
    def duration(self) -> float:
        return float(self.t[-1])

    def sample(self, i: int) -> ImuSample:
        c = self.channels[i]
        return ImuSample(
            t=float(self.t[i]),
            accel_left=tuple(c[0:3]),
            gyro_left=tuple(c[3:6]),
            accel_right=tuple(c[6:9]),
            gyro_right=tuple(c[9:12]),
        )


@dataclass(frozen=True)
class Interval:
    start: float
    end: float
    event: str
    activity: str

    @property
    def duration(self) -> float:
        return self.end - self.start

    def covers(self, t: float) -> bool:
        return self.start <= t < self.end


@dataclass(frozen=True)
class AnnotationTrack:
    """Labelled half-open intervals (event x activity) aligned to a recording."""

    participant_id: str
    intervals: tuple[Interval, ...]

    def __post_init__(self):
        for iv in self.intervals:
            if iv.event not in EVENTS:
                raise UnknownLabel(f"unknown event {iv.event!r}")
            if iv.activity not in ACTIVITIES:
                raise UnknownLabel(f"unknown activity {iv.activity!r}")
            if iv.start < 0:
                raise InvertedInterval(f"interval start {iv.start} is negative")
            if not iv.start < iv.end:
                raise InvertedInterval(f"interval [{iv.start}, {iv.end}) is empty or inverted")
        ordered = tuple(sorted(self.intervals, key=lambda iv: (iv.start, iv.end)))
        object.__setattr__(self, "intervals", ordered)
        events = [iv for iv in ordered if iv.event != "silent"]
        for a, b in zip(events, events[1:]):
            if b.start < a.end:
                raise OverlappingEvents(
                    f"event intervals [{a.start}, {a.end}) and [{b.start}, {b.end}) overlap"
                )
        object.__setattr__(self, "_event_starts", tuple(iv.start for iv in events))
        object.__setattr__(self, "_event_intervals", tuple(events))

    def event_at(self, t: float) -> str:
        """Event of the unique covering interval; silent if uncovered."""
        starts = self._event_starts
        i = bisect_right(starts, t) - 1
        if i >= 0 and self._event_intervals[i].covers(t):
            return self._event_intervals[i].event
        return "silent"

    def activity_at(self, t: float) -> tuple[str, float]:
        """Activity covering t and the start of its interval.

        When intervals overlap, the earliest-starting covering interval wins.
        Uncovered instants report activity 'none' with start +inf.
        """
        for iv in self.intervals:
            if iv.start > t:
                break
            if iv.covers(t):
                return iv.activity, iv.start
        return "none", float("inf")

    @property
    def last_end(self) -> float:
        return max((iv.end for iv in self.intervals), default=0.0)

    def coverage_seconds(self, until: float) -> dict[str, float]:
        """Per-event coverage of [0, until), clamped to the recording span."""
        cov = {"grinding": 0.0, "clenching": 0.0}
        for iv in self._event_intervals:
            lo, hi = max(iv.start, 0.0), min(iv.end, until)
            if hi > lo:
                cov[iv.event] += hi - lo
        cov["silent"] = max(0.0, until - cov["grinding"] - cov["clenching"])
        return cov


def sample_labels(rec: Recording, track: AnnotationTrack) -> tuple[list[str], list[str], np.ndarray]:
    """Resolve (event, activity, activity interval start) for every sample.

    Paints intervals onto the sample grid in one pass; later-starting
    intervals are painted first so earliest-start covering intervals win,
    matching activity_at.
    """
    n = len(rec)
    events = ["silent"] * n
    activities = ["none"] * n
    starts = np.full(n, np.inf)
    t = rec.t
    for iv in sorted(track.intervals, key=lambda iv: iv.start, reverse=True):
        lo = int(np.searchsorted(t, iv.start, side="left"))
        hi = int(np.searchsorted(t, iv.end, side="left"))
        if hi <= lo:
            continue
        activities[lo:hi] = [iv.activity] * (hi - lo)
        starts[lo:hi] = iv.start
        if iv.event != "silent":
            events[lo:hi] = [iv.event] * (hi - lo)
    return events, activities, starts


def event_at(track: AnnotationTrack, t: float) -> str:
    return track.event_at(t)


def load_recording(path: str | Path) -> Recording:
    """Parse a bruxkit-v1 recording CSV, enforcing all Recording invariants."""
    path = Path(path)
    meta: dict[str, str] = {}
    rows: list[list[float]] = []
    header_seen = False
    with path.open("r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for part in line[1:].split(","):
                    if "=" in part:
                        k, v = part.split("=", 1)
                        meta[k.strip()] = v.strip()
                continue
            if not header_seen:
                if line != CSV_HEADER:
                    raise MalformedRow(lineno, f"expected header {CSV_HEADER!r}")
                header_seen = True
                continue
            fields = line.split(",")
            if len(fields) != len(CSV_COLUMNS):
                raise MalformedRow(
                    lineno, f"expected {len(CSV_COLUMNS)} fields, got {len(fields)}"
                )
            try:
                values = [float(f) for f in fields]
            except ValueError:
                raise MalformedRow(lineno, "non-numeric field") from None
            if not all(np.isfinite(values)):
                raise MalformedRow(lineno, "non-finite value")
            rows.append(values)
    fmt = meta.get("format")
    if fmt != FORMAT_VERSION:
        raise UnknownFormatVersion(f"{path}: format {fmt!r}, expected {FORMAT_VERSION!r}")
    if "participant" not in meta:
        raise MalformedRow(1, "missing '# participant=<id>, rate_hz=<r>' comment")
    try:
        rate = float(meta.get("rate_hz", "nan"))
    except ValueError:
        rate = float("nan")
    if not np.isfinite(rate) or rate <= 0:
        raise RateViolation(f"{path}: missing or invalid rate_hz")
    if rate != SAMPLE_RATE_HZ:
        raise RateViolation(f"{path}: rate_hz {rate:g} unsupported, expected {SAMPLE_RATE_HZ:g}")
    if not header_seen:
        raise MalformedRow(1, "missing column header")
    if len(rows) < MIN_SAMPLES:
        raise TooShort(f"{path}: {len(rows)} samples, need at least {MIN_SAMPLES}")
    data = np.asarray(rows, dtype=float)
    return Recording(
        participant_id=meta["participant"],
        sample_rate_hz=rate,
        t=data[:, 0],
        channels=data[:, 1:],
    )


def save_recording(rec: Recording, path: str | Path) -> None:
    path = Path(path)
    lines = [
        f"# format={FORMAT_VERSION}",
        f"# participant={rec.participant_id}, rate_hz={fmt9(rec.sample_rate_hz)}",
        CSV_HEADER,
    ]
    for i in range(len(rec)):
        fields = [fmt9(rec.t[i])] + [fmt9(v) for v in rec.channels[i]]
        lines.append(",".join(fields))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_annotations(path: str | Path) -> AnnotationTrack:
    """Parse a bruxkit-v1 annotation JSON document."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise CorpusError(f"{path}: expected a JSON object")
    if doc.get("format") != FORMAT_VERSION:
        raise UnknownFormatVersion(
            f"{path}: format {doc.get('format')!r}, expected {FORMAT_VERSION!r}"
        )
    participant = doc.get("participant")
    if not isinstance(participant, str) or not participant:
        raise CorpusError(f"{path}: missing participant id")
    raw = doc.get("intervals")
    if not isinstance(raw, list):
        raise CorpusError(f"{path}: missing intervals list")
    intervals = []
    for item in raw:
        try:
            intervals.append(
                Interval(
                    start=float(item["start"]),
                    end=float(item["end"]),
                    event=str(item["event"]),
                    activity=str(item["activity"]),
                )
            )
        except (KeyError, TypeError, ValueError):
            raise CorpusError(f"{path}: malformed interval {item!r}") from None
    return AnnotationTrack(participant_id=participant, intervals=tuple(intervals))


def save_annotations(track: AnnotationTrack, path: str | Path) -> None:
    doc = {
        "format": FORMAT_VERSION,
        "participant": track.participant_id,
        "intervals": [
            {"start": iv.start, "end": iv.end, "event": iv.event, "activity": iv.activity}
            for iv in track.intervals
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


@dataclass
class ValidationReport:
    participant_id: str
    issues: list[str] = field(default_factory=list)
    coverage: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.issues

    def render(self) -> str:
        lines = [f"participant {self.participant_id}:"]
        for event in EVENTS:
            lines.append(f"  {event} coverage: {self.coverage.get(event, 0.0):.1f} s")
        if self.issues:
            lines.extend(f"  ISSUE: {msg}" for msg in self.issues)
        else:
            lines.append("  no issues")
        return "\n".join(lines)


def validate_pair(rec: Recording, track: AnnotationTrack) -> ValidationReport:
    """Report-only consistency check of a recording/annotation pair.

    Half-open intervals may extend one sample period past the last sample
    (the end of its slot); anything beyond that is an out-of-range issue.
    """
    report = ValidationReport(participant_id=rec.participant_id)
    if rec.participant_id != track.participant_id:
        report.issues.append(
            f"participant mismatch: recording {rec.participant_id!r}"
            f" vs annotations {track.participant_id!r}"
        )
    last_t = rec.duration
    limit = last_t + 1.0 / rec.sample_rate_hz
    for iv in track.intervals:
        if iv.end > limit + 1e-9:
            report.issues.append(
                f"interval out of range: [{iv.start:g}, {iv.end:g}) {iv.event}/{iv.activity}"
                f" extends past last sample at {last_t:g} s"
            )
    report.coverage = track.coverage_seconds(until=last_t)
    return report


def load_corpus(directory: str | Path) -> list[tuple[Recording, AnnotationTrack]]:
    """Load every *_recording.csv / *_annotations.json pair, sorted by id."""
    directory = Path(directory)
    pairs = []
    for rec_path in sorted(directory.glob("*_recording.csv")):
        ann_path = rec_path.with_name(rec_path.name.replace("_recording.csv", "_annotations.json"))
        if not ann_path.exists():
            raise CorpusError(f"missing annotations for {rec_path.name}")
        pairs.append((load_recording(rec_path), load_annotations(ann_path)))
    if not pairs:
        raise CorpusError(f"no recordings found in {directory}")
    return pairs
