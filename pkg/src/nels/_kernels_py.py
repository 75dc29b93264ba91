"""NumPy implementations of the DSP hot paths.

This is the fallback backend behind nels.kernels; the compiled extension
in nels._accel implements the same two entry points. Both take validated,
contiguous float64 arrays (nels.kernels owns validation and parameter
construction), and both must stay deterministic: same input, same bits.
"""

import numpy as np


def stft_power(x: np.ndarray, n_fft: int, hop: int, window: np.ndarray) -> np.ndarray:
    """Framed one-sided power spectra, no center padding.

    Returns a (T, n_fft//2 + 1) array with T = 1 + (len(x) - n_fft) // hop.
    """
    n_frames = 1 + (x.shape[0] - n_fft) // hop
    frames = np.lib.stride_tricks.sliding_window_view(x, n_fft)[::hop][:n_frames]
    spectra = np.fft.rfft(frames * window, axis=1)
    return spectra.real**2 + spectra.imag**2


def resample_kernel(
    x: np.ndarray,
    out_len: int,
    ratio: float,
    table: np.ndarray,
    precision: int,
    scale: float,
    chunk: int = 8192,
) -> np.ndarray:
    """Windowed-sinc resampling via an oversampled filter table.

    ``table`` holds the right half of the symmetric filter sampled every
    1/precision input units at unit cutoff, with a trailing zero guard.
    ``scale`` = min(ratio, 1) shrinks the filter passband when decimating.
    """
    n_in = x.shape[0]
    step = scale * precision
    radius = (table.shape[0] - 2) / step  # support half-width in input samples
    half_taps = int(np.ceil(radius)) + 1
    offsets = np.arange(-half_taps, half_taps + 1)

    out = np.empty(out_len, dtype=np.float64)
    for start in range(0, out_len, chunk):
        m = np.arange(start, min(start + chunk, out_len))
        t0 = m / ratio
        n_idx = np.floor(t0).astype(np.int64)[:, None] + offsets[None, :]
        dist = np.abs(n_idx - t0[:, None]) * step
        tap_idx = dist.astype(np.int64)
        valid = (n_idx >= 0) & (n_idx < n_in) & (tap_idx < table.shape[0] - 1)
        tap_idx = np.where(valid, tap_idx, table.shape[0] - 2)
        frac = dist - tap_idx
        weights = table[tap_idx] + frac * (table[tap_idx + 1] - table[tap_idx])
        weights[~valid] = 0.0
        samples = x[np.clip(n_idx, 0, n_in - 1)]
        out[m] = (weights * samples).sum(axis=1) * scale
    return out
