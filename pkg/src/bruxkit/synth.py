"""Deterministic synthetic corpus: 13 participants following the seven-part
collection protocol, with parameterised per-participant signal signatures.

Signal model, on top of per-segment Gaussian baseline noise:

* grinding: a carried sinusoid on the gyro x axes (carrier > amplitude, so
  the per-ear magnitude keeps the grinding frequency as its fundamental);
* clenching: a two-sample onset transient, then back to baseline --- the
  hold itself is invisible, which is what makes clenching the harder task;
* activities: characteristic structure (slow large head swings, ~1.7 Hz
  walking bounce, ~1.2 Hz chewing bursts, low-level noise for music /
  reading / drinking);
* accelerometer: gravity on z plus a strongly attenuated, mean-free copy
  of the gyro dynamics, so gyro features separate classes better.

The dominant chewing side scales mastication-driven signals on that ear.
All randomness is drawn from per-segment streams keyed by a stable segment
id, so editing one part of a script never reshuffles the noise elsewhere.

Control blocks draw event durations around 7.4 s and pauses around 2.6 s
(10 s cadence, six repeats): participants overshoot the nominal 5 s of
grinding and cut pauses short, which is also what keeps the grinding:silent
window ratio of the control task near the observed ~1.5.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .corpus import (
    AnnotationTrack,
    Interval,
    Recording,
    SAMPLE_RATE_HZ,
    save_annotations,
    save_recording,
)

MANIFEST_FORMAT_VERSION = "bruxkit-manifest-v1"
DT = 1.0 / SAMPLE_RATE_HZ

GRAVITY_G = 1.0
ACCEL_COUPLING = 0.0025  # gyro dynamics leaking into the accelerometer
ACCEL_NOISE_RATIO = 0.02  # accel noise std as a fraction of gyro noise std
CARRIER_RATIO = 1.5  # grinding carrier = ratio * grind_amp, keeps |.| linear

GYRO_COLS = np.array([3, 4, 5, 9, 10, 11])
ACCEL_COLS = np.array([0, 1, 2, 6, 7, 8])
ACCEL_Z_COLS = np.array([2, 8])


@dataclass(frozen=True)
class ParticipantProfile:
    id: str
    seed: int
    dominant_side: str  # "left" | "right"
    asymmetry_gain: float  # >= 1, dominant-side multiplier
    grind_freq: float  # Hz, within (0.8, 1.6)
    grind_amp: float
    clench_spike_amp: float
    activity_noise_amp: float
    baseline_noise_std: float

    def __post_init__(self):
        if self.dominant_side not in ("left", "right"):
            raise ValueError(f"dominant_side must be left or right, got {self.dominant_side!r}")
        if self.asymmetry_gain < 1.0:
            raise ValueError("asymmetry_gain must be >= 1")
        if not 0.8 <= self.grind_freq <= 1.6:
            raise ValueError("grind_freq must lie in [0.8, 1.6] Hz")
        for name in ("grind_amp", "clench_spike_amp", "activity_noise_amp"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.baseline_noise_std < 0:
            raise ValueError("baseline_noise_std must be non-negative")

    @property
    def ear_gains(self) -> tuple[float, float]:
        """(left, right) amplitude multipliers for mastication signals."""
        if self.dominant_side == "left":
            return self.asymmetry_gain, 1.0
        return 1.0, self.asymmetry_gain


@dataclass(frozen=True)
class ScriptSegment:
    duration: float  # seconds, multiple of the sample period
    event: str
    activity: str
    stream_id: str  # stable id for this segment's noise stream


@dataclass(frozen=True)
class ProtocolScript:
    segments: tuple[ScriptSegment, ...]

    @property
    def total_duration(self) -> float:
        return sum(s.duration for s in self.segments)

    def event_seconds(self, event: str) -> float:
        return sum(s.duration for s in self.segments if s.event == event)


def _grid(samples: int) -> float:
    return max(1, int(samples)) * DT


def _jitter_samples(rng: np.random.Generator, mean: float, std: float, lo: int, hi: int) -> int:
    return int(np.clip(round(rng.normal(mean, std)), lo, hi))


def _event_block(
    prefix: str,
    event: str,
    activity: str,
    rng: np.random.Generator,
    *,
    event_mean: float,
    event_std: float,
    pause_mean: float,
    pause_std: float,
    repeats: int = 6,
) -> list[ScriptSegment]:
    segments = []
    for rep in range(repeats):
        dur = _grid(_jitter_samples(rng, event_mean, event_std, 25, 45))
        segments.append(ScriptSegment(dur, event, activity, f"{prefix}.rep{rep}.event"))
        dur = _grid(_jitter_samples(rng, pause_mean, pause_std, 10, 25))
        segments.append(ScriptSegment(dur, "silent", activity, f"{prefix}.rep{rep}.pause"))
    return segments


def nominal_event_block(prefix: str, event: str, activity: str = "none") -> list[ScriptSegment]:
    """Exact protocol timing: event 5 s, pause 5 s, six repeats."""
    segments = []
    for rep in range(6):
        segments.append(ScriptSegment(5.0, event, activity, f"{prefix}.rep{rep}.event"))
        segments.append(ScriptSegment(5.0, "silent", activity, f"{prefix}.rep{rep}.pause"))
    return segments


def default_script(rng: np.random.Generator) -> ProtocolScript:
    """The seven collection experiments with human-like timing jitter.

    Between experiments the participant talks with the experimenter or sips
    water, annotated as reading/drinking transitions; together with the
    experiments this lands near 25 minutes.
    """

    def activity_seg(sid, activity, mean_s, std_s):
        samples = _jitter_samples(rng, mean_s * 5, std_s * 5, 25, 2000)
        return ScriptSegment(_grid(samples), "silent", activity, sid)

    segments: list[ScriptSegment] = []
    transition = 0

    def add_transition(activity, mean_s=90.0):
        nonlocal transition
        segments.append(activity_seg(f"trans{transition}", activity, mean_s, 6.0))
        transition += 1

    control = dict(event_mean=37.0, event_std=1.25, pause_mean=13.0, pause_std=1.0)
    wild = dict(event_mean=30.0, event_std=2.0, pause_mean=20.0, pause_std=2.0)

    # 1. control: grinding then clenching, participant still
    segments += _event_block("exp1a", "grinding", "none", rng, **control)
    add_transition("reading")
    segments += _event_block("exp1b", "clenching", "none", rng, **control)
    add_transition("drinking")
    # 2. head movement: plain, with grinding, with clenching
    segments.append(activity_seg("exp2a", "head_movement", 30.0, 1.5))
    segments += _event_block("exp2b", "grinding", "head_movement", rng, **wild)
    segments += _event_block("exp2c", "clenching", "head_movement", rng, **wild)
    add_transition("reading")
    # 3. chewing: bread then gum
    segments.append(activity_seg("exp3a", "chewing_bread", 150.0, 10.0))
    segments.append(activity_seg("exp3b", "chewing_gum", 40.0, 2.0))
    add_transition("reading")
    # 4. read out loud
    segments.append(activity_seg("exp4", "reading", 32.0, 1.5))
    add_transition("drinking", 60.0)
    # 5. drink a glass of water
    segments.append(activity_seg("exp5", "drinking", 40.0, 2.0))
    add_transition("reading")
    # 6. music: plain, with grinding, with clenching
    segments.append(activity_seg("exp6a", "music", 30.0, 1.5))
    segments += _event_block("exp6b", "grinding", "music", rng, **wild)
    segments += _event_block("exp6c", "clenching", "music", rng, **wild)
    add_transition("reading")
    # 7. walking: plain, then with clenching
    segments.append(activity_seg("exp7a", "walking", 30.0, 1.5))
    segments += _event_block("exp7b", "clenching", "walking", rng, **wild)
    add_transition("reading")
    return ProtocolScript(segments=tuple(segments))


def _segment_rng(profile_seed: int, stream_id: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{profile_seed}:{stream_id}".encode("utf-8")).digest()
    return np.random.default_rng(np.random.SeedSequence(int.from_bytes(digest[:16], "big")))


def generate_participant(
    profile: ParticipantProfile, script: ProtocolScript
) -> tuple[Recording, AnnotationTrack]:
    """Render a script into a recording plus exactly mirroring annotations."""
    lengths = [int(round(seg.duration * SAMPLE_RATE_HZ)) for seg in script.segments]
    n = sum(lengths)
    t = np.arange(n) * DT
    channels = np.zeros((n, 12))
    channels[:, ACCEL_Z_COLS] += GRAVITY_G

    gain_l, gain_r = profile.ear_gains
    event_gains = np.array([gain_l, gain_l, gain_l, gain_r, gain_r, gain_r])
    carrier = CARRIER_RATIO * profile.grind_amp
    accel_noise_std = profile.baseline_noise_std * ACCEL_NOISE_RATIO

    intervals = []
    start_sample = 0
    for seg, length in zip(script.segments, lengths):
        rng = _segment_rng(profile.seed, seg.stream_id)
        sl = slice(start_sample, start_sample + length)
        ts = t[sl]
        seg_start_t = start_sample * DT
        intervals.append(
            Interval(seg_start_t, seg_start_t + length * DT, seg.event, seg.activity)
        )
        start_sample += length

        gyro_add = np.zeros((length, 6))  # x_l, y_l, z_l, x_r, y_r, z_r
        accel_add = np.zeros((length, 6))

        if seg.event == "grinding":
            phase = rng.uniform(0.0, 2.0 * np.pi)
            wave = carrier + profile.grind_amp * np.sin(
                2.0 * np.pi * profile.grind_freq * ts + phase
            )
            wave = wave + rng.normal(0.0, 0.4 * profile.baseline_noise_std, length)
            gyro_add[:, 0] += wave * gain_l
            gyro_add[:, 3] += wave * gain_r
        elif seg.event == "clenching":
            onset = np.zeros(length)
            onset[0] = profile.clench_spike_amp
            if length > 1:
                onset[1] = -0.6 * profile.clench_spike_amp
            gyro_add[:, 0] += onset * gain_l
            gyro_add[:, 3] += onset * gain_r
            gyro_add[:, 1] += 0.5 * onset * gain_l
            gyro_add[:, 4] += 0.5 * onset * gain_r

        act = seg.activity
        amp = profile.activity_noise_amp
        if act == "head_movement":
            phase = rng.uniform(0.0, 2.0 * np.pi)
            swing = 6.0 * amp * np.sin(2.0 * np.pi * 0.3 * ts + phase)
            gyro_add[:, [1, 4]] += swing[:, None]
            gyro_add[:, [2, 5]] += 0.5 * swing[:, None]
        elif act == "walking":
            phase = rng.uniform(0.0, 2.0 * np.pi)
            bounce = np.sin(2.0 * np.pi * 1.7 * ts + phase)
            gyro_add += 2.0 * amp * bounce[:, None]
            accel_add[:, [2, 5]] += 0.04 * bounce[:, None]
            accel_add[:, [0, 3]] += 0.02 * np.sin(2.0 * np.pi * 1.7 * ts + phase + 1.0)[:, None]
        elif act in ("chewing_bread", "chewing_gum"):
            phase = rng.uniform(0.0, 2.0 * np.pi)
            envelope = np.clip(np.sin(2.0 * np.pi * 0.4 * ts + phase), 0.0, None)
            chew = 3.0 * amp * envelope * np.sin(2.0 * np.pi * 1.2 * ts + phase)
            gyro_add[:, 0] += chew * gain_l
            gyro_add[:, 3] += chew * gain_r
        elif act in ("music", "reading", "drinking"):
            level = {"music": 0.3, "reading": 0.7, "drinking": 0.5}[act]
            gyro_add += rng.normal(0.0, level * amp, (length, 6))

        channels[sl][:, GYRO_COLS] += gyro_add + rng.normal(
            0.0, profile.baseline_noise_std, (length, 6)
        )
        coupled = ACCEL_COUPLING * (gyro_add - gyro_add.mean(axis=0))
        channels[sl][:, ACCEL_COLS] += (
            accel_add + coupled + rng.normal(0.0, accel_noise_std, (length, 6))
        )

    recording = Recording(
        participant_id=profile.id,
        sample_rate_hz=SAMPLE_RATE_HZ,
        t=t,
        channels=channels,
    )
    track = AnnotationTrack(participant_id=profile.id, intervals=tuple(intervals))
    return recording, track


def default_profile(participant_index: int, master_seed: int) -> tuple[ParticipantProfile, ProtocolScript]:
    """Draw one participant's profile and jittered script deterministically."""
    rng = np.random.default_rng(np.random.SeedSequence([master_seed, participant_index]))
    profile = ParticipantProfile(
        id=f"p{participant_index:02d}",
        seed=int(rng.integers(0, 2**63)),
        dominant_side="left" if rng.random() < 0.5 else "right",
        asymmetry_gain=float(rng.uniform(1.1, 1.5)),
        grind_freq=float(rng.uniform(1.0, 1.5)),
        grind_amp=float(rng.uniform(4.0, 6.5)),
        clench_spike_amp=float(rng.uniform(7.0, 11.0)),
        activity_noise_amp=float(rng.uniform(0.8, 1.4)),
        baseline_noise_std=float(rng.uniform(0.45, 0.7)),
    )
    return profile, default_script(rng)


def generate_corpus(
    out_dir: str | Path, n_participants: int = 13, master_seed: int = 7
) -> dict:
    """Write n participant file pairs plus a manifest; returns the manifest."""
    if n_participants < 2:
        raise ValueError("need at least 2 participants for leave-one-subject-out")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format": MANIFEST_FORMAT_VERSION,
        "master_seed": int(master_seed),
        "participants": [],
    }
    for index in range(1, n_participants + 1):
        profile, script = default_profile(index, master_seed)
        recording, track = generate_participant(profile, script)
        rec_name = f"{profile.id}_recording.csv"
        ann_name = f"{profile.id}_annotations.json"
        save_recording(recording, out_dir / rec_name)
        save_annotations(track, out_dir / ann_name)
        manifest["participants"].append(
            {
                "id": profile.id,
                "recording": rec_name,
                "annotations": ann_name,
                "duration_s": round(script.total_duration, 6),
                "profile": asdict(profile),
            }
        )
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return manifest
