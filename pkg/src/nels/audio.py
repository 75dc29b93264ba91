"""Audio canonicalization, fixed 2.3 s segmentation, and log-mel features.

Everything downstream (classification, indexing, retrieval) works on
2.3 second segments of canonical audio: mono, 44.1 kHz, 16-bit-safe
amplitudes. Features are 60-band log mel-spectrograms computed with a
1024-sample Hann window and hop 512.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.io import wavfile

from nels import kernels
from nels.errors import ConfigurationError, ContractViolationError, InvalidAudioError

CANONICAL_RATE = 44100
SEGMENT_SECONDS = 2.3
SEGMENT_SAMPLES = 101430  # round(2.3 * 44100)
# a trailing remainder of at least half a segment is zero-padded, shorter is dropped
MIN_TAIL_SAMPLES = 50715  # 1.15 s

N_FFT = 1024
HOP = 512
N_MELS = 60
LOG_FLOOR = 1e-10


@dataclass
class Waveform:
    """A mono float64 signal with its sample rate; canonical iff 44.1 kHz."""

    samples: np.ndarray
    sample_rate: int

    @property
    def duration_s(self) -> float:
        return self.samples.shape[0] / float(self.sample_rate)

    @property
    def is_canonical(self) -> bool:
        return self.sample_rate == CANONICAL_RATE and self.samples.ndim == 1


@dataclass
class AudioSegment:
    """One 2.3 s slice of a canonical waveform."""

    segment_id: str
    media_id: str
    offset_s: float
    samples: np.ndarray
    duration_s: float = SEGMENT_SECONDS


@dataclass
class FeatureMatrix:
    """60 x T grid of log mel energies."""

    values: np.ndarray
    mel_bands: int = N_MELS

    @property
    def frames(self) -> int:
        return self.values.shape[1]


def load_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """Decode a WAV file to float64 in [-1, 1].

    Handles PCM 8/16/24/32-bit and float encodings; returns (samples, rate)
    with samples shaped (n,) for mono or (n, channels) otherwise.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # scipy warns on unknown chunks
        try:
            rate, data = wavfile.read(str(path))
        except Exception as exc:
            raise InvalidAudioError(f"cannot decode {path}: {exc}") from exc
    if data.size == 0:
        raise InvalidAudioError(f"{path} contains no samples")

    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        samples = data.astype(np.float64) / 2147483648.0
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise InvalidAudioError(f"{path}: unsupported sample format {data.dtype}")
    return samples, int(rate)


def save_canonical_wav(w: Waveform, path: str | Path) -> None:
    """Write a canonical waveform as PCM 16-bit mono WAV."""
    if not w.is_canonical:
        raise ContractViolationError("waveform must be canonical before writing")
    pcm = np.clip(np.round(w.samples * 32767.0), -32768, 32767).astype(np.int16)
    wavfile.write(str(path), CANONICAL_RATE, pcm)


def canonicalize_audio(samples: np.ndarray, sample_rate: int) -> Waveform:
    """Convert decoded audio of any rate/channel count to canonical form.

    Channels are averaged to mono, the result is resampled to 44.1 kHz with
    the windowed-sinc kernel, and amplitudes are clamped to [-1, 1]. Input
    that is already canonical passes through bit-identically.
    """
    if sample_rate is None or sample_rate <= 0:
        raise InvalidAudioError(f"unknown or invalid sample rate {sample_rate!r}")
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise InvalidAudioError("zero-length audio")
    if x.ndim == 2:
        x = x.mean(axis=1)
    elif x.ndim != 1:
        raise InvalidAudioError(f"expected 1-D or 2-D samples, got shape {x.shape}")

    if sample_rate != CANONICAL_RATE:
        x = kernels.resample(x, sample_rate, CANONICAL_RATE)
    return Waveform(samples=np.clip(x, -1.0, 1.0), sample_rate=CANONICAL_RATE)


def segment_waveform(w: Waveform, media_id: str) -> list[AudioSegment]:
    """Slice a canonical waveform into consecutive 2.3 s segments.

    A trailing remainder of >= 1.15 s is zero-padded into a final segment;
    shorter remainders are dropped. A clip shorter than one segment is
    padded into exactly one, so every admitted recording yields >= 1.
    """
    if not w.is_canonical:
        raise ContractViolationError(
            f"segment_waveform requires canonical audio, got rate {w.sample_rate}"
        )
    n = w.samples.shape[0]
    full = n // SEGMENT_SAMPLES
    remainder = n - full * SEGMENT_SAMPLES

    segments = []
    for i in range(full):
        chunk = w.samples[i * SEGMENT_SAMPLES : (i + 1) * SEGMENT_SAMPLES]
        segments.append(_make_segment(media_id, i, chunk))
    if full == 0 or remainder >= MIN_TAIL_SAMPLES:
        tail = w.samples[full * SEGMENT_SAMPLES :]
        padded = np.zeros(SEGMENT_SAMPLES, dtype=np.float64)
        padded[: tail.shape[0]] = tail
        segments.append(_make_segment(media_id, full, padded))
    return segments


def _make_segment(media_id: str, index: int, samples: np.ndarray) -> AudioSegment:
    return AudioSegment(
        segment_id=f"{media_id}#{index}",
        media_id=media_id,
        offset_s=index * SEGMENT_SECONDS,
        samples=samples,
    )


def hz_to_mel(f):
    """HTK mel scale."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(
    n_fft: int = N_FFT, n_mels: int = N_MELS, sample_rate: int = CANONICAL_RATE
) -> np.ndarray:
    """Triangular mel filterbank, one unit-peak row per band.

    Band centers are n_mels + 2 breakpoints equally spaced on the HTK mel
    scale between 0 Hz and sample_rate / 2; each row is renormalized to a
    maximum of exactly 1 after sampling at the FFT bin frequencies.
    """
    if n_mels < 1:
        raise ConfigurationError(f"n_mels must be >= 1, got {n_mels}")
    if n_fft < 2 or n_fft & (n_fft - 1):
        raise ConfigurationError(f"n_fft must be a power of two, got {n_fft}")

    breakpoints = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_mels + 2))
    bin_freqs = np.arange(n_fft // 2 + 1) * (sample_rate / n_fft)

    bank = np.zeros((n_mels, n_fft // 2 + 1), dtype=np.float64)
    for i in range(n_mels):
        left, center, right = breakpoints[i], breakpoints[i + 1], breakpoints[i + 2]
        rising = (bin_freqs - left) / (center - left)
        falling = (right - bin_freqs) / (right - center)
        row = np.maximum(0.0, np.minimum(rising, falling))
        peak = row.max()
        if peak <= 0.0:
            raise ConfigurationError(
                f"mel band {i} has no FFT bin support; lower n_mels or raise n_fft"
            )
        bank[i] = row / peak
    return bank


_default_filterbank: Optional[np.ndarray] = None


def default_filterbank() -> np.ndarray:
    """The shared 60 x 513 filterbank, computed once."""
    global _default_filterbank
    if _default_filterbank is None:
        fb = mel_filterbank()
        fb.flags.writeable = False
        _default_filterbank = fb
    return _default_filterbank


def log_mel_of_samples(samples: np.ndarray, backend: str | None = None) -> FeatureMatrix:
    """Log mel features of arbitrary-length canonical samples (N >= 1024)."""
    if samples.shape[0] < N_FFT:
        raise InvalidAudioError(
            f"need at least {N_FFT} samples for one analysis frame, got {samples.shape[0]}"
        )
    power = kernels.stft_power(samples, N_FFT, HOP, backend=backend)
    mel = default_filterbank() @ power.T
    values = np.log10(np.maximum(mel, LOG_FLOOR))
    return FeatureMatrix(values=values)


def log_mel_features(seg: AudioSegment, backend: str | None = None) -> FeatureMatrix:
    """The 60 x 197 feature matrix of one canonical 2.3 s segment."""
    if seg.samples.shape[0] != SEGMENT_SAMPLES:
        raise ContractViolationError(
            f"segment must have {SEGMENT_SAMPLES} samples, got {seg.samples.shape[0]}"
        )
    return log_mel_of_samples(seg.samples, backend=backend)


def write_matrix_file(fm: FeatureMatrix, path: str | Path) -> None:
    """Emit a feature matrix as text: header ``melspec 60 T``, then one
    whitespace-separated row of 60 values per frame."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"melspec {fm.mel_bands} {fm.frames}\n")
        for t in range(fm.frames):
            fh.write(" ".join(f"{v:.10g}" for v in fm.values[:, t]) + "\n")
