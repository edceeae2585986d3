"""71-dimensional window descriptor: raw samples, SOVM, spectral summaries,
amplitude statistics, and per-axis zero-crossing rates.

Layout (fixed ordering contract):
  [0..47]   raw samples, time-major, axes x_l, y_l, z_l, x_r, y_r, z_r
  [48..55]  SOVM per time step (sum of the two per-ear vector magnitudes)
  [56]      mean MFCC of the SOVM spectrum
  [57]      spectral flatness of the SOVM spectrum
  [58]      spectral centroid of the SOVM spectrum (Hz)
  [59]      mean of the degree-1 fit coefficients to the magnitude spectrum
  [60..64]  SOVM amplitude stats: max, min, mean, population std, mean abs dev
  [65..70]  per-axis zero-crossing rate, x_l, y_l, z_l, x_r, y_r, z_r

Each 8-sample window is treated as a single rectangular frame; the N=8
transform gives 5 one-sided bins at multiples of 0.625 Hz. Interior bins
fold in their conjugates so the one-sided power sum satisfies Parseval.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import fmt9
from .segment import WINDOW_LEN, Window

FS_HZ = 5.0
N_FFT = WINDOW_LEN
N_BINS = N_FFT // 2 + 1
BIN_HZ = FS_HZ / N_FFT  # 0.625
BIN_FREQS = np.arange(N_BINS) * BIN_HZ
EPS = 1e-10
N_MEL = 4
FEATURE_COUNT = 71

FEATURE_CSV_HEADER = "participant,modality,label," + ",".join(
    f"f{i}" for i in range(FEATURE_COUNT)
)


@dataclass(frozen=True)
class SpectralFrame:
    power: np.ndarray  # (5,) one-sided power, conjugate bins folded in
    freqs: np.ndarray  # (5,) bin frequencies in Hz


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray  # (71,)
    label: str
    participant_id: str
    modality: str


def _fft(x: np.ndarray) -> np.ndarray:
    """Radix-2 Cooley-Tukey DFT; input length must be a power of two."""
    n = x.shape[0]
    if n == 1:
        return x.astype(complex)
    if n % 2:
        raise ValueError(f"length {n} is not a power of two")
    even = _fft(x[0::2])
    odd = _fft(x[1::2])
    twiddled = np.exp(-2j * np.pi * np.arange(n // 2) / n) * odd
    return np.concatenate([even + twiddled, even - twiddled])


def _dct2_ortho_matrix(n: int) -> np.ndarray:
    k = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    mat = np.cos(np.pi * (2 * m + 1) * k / (2 * n))
    mat[0] *= np.sqrt(1.0 / n)
    mat[1:] *= np.sqrt(2.0 / n)
    return mat


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


def _mel_weights(n_filters: int) -> np.ndarray:
    """Triangular mel filterbank sampled at the 5 bin frequencies.

    Rows are normalised to unit area in the Riemann sense
    (sum(w) * BIN_HZ == 1), so a flat power spectrum yields identical
    energy in every filter.
    """
    edges = _mel_to_hz(np.linspace(0.0, float(_hz_to_mel(FS_HZ / 2)), n_filters + 2))
    weights = np.zeros((n_filters, N_BINS))
    for i in range(n_filters):
        lo, mid, hi = edges[i], edges[i + 1], edges[i + 2]
        rising = (BIN_FREQS - lo) / (mid - lo)
        falling = (hi - BIN_FREQS) / (hi - mid)
        weights[i] = np.clip(np.minimum(rising, falling), 0.0, None)
        weights[i] /= weights[i].sum() * BIN_HZ
    return weights


_DCT = _dct2_ortho_matrix(N_MEL)
_MEL_W = _mel_weights(N_MEL)


def sovm(window: Window) -> np.ndarray:
    """Per time step: ||right ear xyz|| + ||left ear xyz||."""
    s = window.samples
    left = np.sqrt((s[:, 0:3] ** 2).sum(axis=1))
    right = np.sqrt((s[:, 3:6] ** 2).sum(axis=1))
    return right + left


def power_spectrum(signal: np.ndarray, fs: float = FS_HZ) -> SpectralFrame:
    """One-sided power spectrum of one rectangular N=8 frame.

    Interior bins carry twice the squared magnitude (their conjugate bins
    folded in), so sum(power) / N equals the sum of squared samples.
    """
    signal = np.asarray(signal, dtype=float)
    if signal.shape != (N_FFT,):
        raise ValueError(f"expected a length-{N_FFT} signal, got {signal.shape}")
    spectrum = _fft(signal)[:N_BINS]
    power = np.abs(spectrum) ** 2
    power[1:-1] *= 2.0
    return SpectralFrame(power=power, freqs=np.arange(N_BINS) * (fs / N_FFT))


def mfcc_mean(frame: SpectralFrame) -> float:
    """Mean of the 4 cepstral coefficients of the 4-filter mel spectrum."""
    energies = _MEL_W @ frame.power
    log_energies = np.log(np.maximum(energies, EPS))
    return float((_DCT @ log_energies).mean())


def spectral_flatness(frame: SpectralFrame) -> float:
    guarded = frame.power + EPS
    geometric = np.exp(np.mean(np.log(guarded)))
    return float(geometric / np.mean(guarded))


def spectral_centroid(frame: SpectralFrame) -> float:
    return float((frame.freqs * frame.power).sum() / (frame.power.sum() + EPS))


def poly_mean(frame: SpectralFrame) -> float:
    """Mean of (slope, intercept) of the degree-1 fit to the magnitude spectrum."""
    magnitude = np.sqrt(frame.power)
    f = frame.freqs
    f_mean = f.mean()
    m_mean = magnitude.mean()
    slope = ((f - f_mean) * (magnitude - m_mean)).sum() / ((f - f_mean) ** 2).sum()
    intercept = m_mean - slope * f_mean
    return float((slope + intercept) / 2.0)


def amplitude_stats(s: np.ndarray) -> np.ndarray:
    """(max, min, mean, population std, mean absolute deviation)."""
    s = np.asarray(s, dtype=float)
    mean = s.mean()
    return np.array(
        [s.max(), s.min(), mean, s.std(), np.abs(s - mean).mean()]
    )


def zcr_per_axis(window: Window) -> np.ndarray:
    """Mean-centred strict sign changes per axis, divided by 7."""
    centred = window.samples - window.samples.mean(axis=0)
    crossings = (centred[:-1] * centred[1:] < 0).sum(axis=0)
    return crossings / (WINDOW_LEN - 1)


def featurize(window: Window) -> FeatureVector:
    """Concatenate all feature groups in the fixed 71-value order."""
    magnitudes = sovm(window)
    frame = power_spectrum(magnitudes)
    values = np.concatenate(
        [
            window.samples.reshape(-1),
            magnitudes,
            [
                mfcc_mean(frame),
                spectral_flatness(frame),
                spectral_centroid(frame),
                poly_mean(frame),
            ],
            amplitude_stats(magnitudes),
            zcr_per_axis(window),
        ]
    )
    if values.shape != (FEATURE_COUNT,):
        raise AssertionError(f"feature vector has shape {values.shape}")
    return FeatureVector(
        values=values,
        label=window.label,
        participant_id=window.participant_id,
        modality=window.modality,
    )


def write_features_csv(vectors: list[FeatureVector], path: str | Path) -> None:
    lines = [FEATURE_CSV_HEADER]
    for fv in vectors:
        values = ",".join(fmt9(v) for v in fv.values)
        lines.append(f"{fv.participant_id},{fv.modality},{fv.label},{values}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
