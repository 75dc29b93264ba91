"""Backend selection and parameter construction for the DSP hot paths.

Two interchangeable backends implement the inner loops: the compiled
extension ``nels._accel`` and the NumPy module ``nels._kernels_py``.
Defaults are per kernel, chosen by measured benefit (see
benchmarks/bench_kernels.py): the resampler runs compiled when available,
while the framed FFT stays on NumPy's batched pocketfft, which the naive
compiled FFT does not beat. Set NELS_PURE_PYTHON=1 to force the NumPy
backend everywhere; every public function also takes an explicit
``backend=`` argument so tests and benchmarks can pin one.
"""

from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

from nels import _kernels_py
from nels.errors import ConfigurationError

try:
    from nels import _accel as _compiled
except ImportError:  # extension not built
    _compiled = None

_FORCE_PURE = os.environ.get("NELS_PURE_PYTHON", "").strip() not in ("", "0")

_HAVE_COMPILED = _compiled is not None and not _FORCE_PURE

DEFAULT_BACKENDS = {
    "stft_power": "python",
    "resample": "compiled" if _HAVE_COMPILED else "python",
}

# Windowed-sinc resampler parameters: Kaiser beta 8.6, 32 zero crossings
# per side, 512 table samples per crossing with linear interpolation.
KAISER_BETA = 8.6
FILTER_ZEROS = 32
FILTER_PRECISION = 512


def available_backends() -> dict:
    """Name -> implementing module, for tests and benchmarks."""
    backends = {"python": _kernels_py}
    if _compiled is not None:
        backends["compiled"] = _compiled
    return backends


def _impl(kernel: str, backend: str | None):
    name = backend or DEFAULT_BACKENDS[kernel]
    try:
        return available_backends()[name]
    except KeyError:
        raise ConfigurationError(f"unknown kernel backend {name!r}") from None


@lru_cache(maxsize=8)
def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window."""
    k = np.arange(n)
    w = 0.5 - 0.5 * np.cos(2.0 * np.pi * k / n)
    w.flags.writeable = False
    return w


def stft_power(
    x: np.ndarray,
    n_fft: int = 1024,
    hop: int = 512,
    backend: str | None = None,
) -> np.ndarray:
    """Hann-windowed one-sided power spectra of consecutive frames.

    No center padding: frame t covers samples [t*hop, t*hop + n_fft), so the
    output has 1 + floor((N - n_fft) / hop) rows and n_fft//2 + 1 columns.
    """
    if n_fft < 2 or n_fft & (n_fft - 1):
        raise ConfigurationError(f"n_fft must be a power of two, got {n_fft}")
    if hop < 1:
        raise ConfigurationError(f"hop must be >= 1, got {hop}")
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < n_fft:
        raise ConfigurationError(
            f"input must be 1-D with at least n_fft={n_fft} samples, got shape {x.shape}"
        )
    out = _impl("stft_power", backend).stft_power(x, n_fft, hop, hann_window(n_fft))
    return np.asarray(out)


@lru_cache(maxsize=1)
def _filter_table() -> np.ndarray:
    """Right half of the windowed-sinc prototype, plus a zero guard entry."""
    u = np.arange(FILTER_ZEROS * FILTER_PRECISION + 1) / FILTER_PRECISION
    shape = u / FILTER_ZEROS
    window = np.i0(KAISER_BETA * np.sqrt(1.0 - shape**2)) / np.i0(KAISER_BETA)
    table = np.sinc(u) * window
    table = np.append(table, 0.0)
    table.flags.writeable = False
    return table


def resample(
    x: np.ndarray,
    sr_in: int,
    sr_out: int,
    backend: str | None = None,
) -> np.ndarray:
    """Band-limited linear-phase resampling (windowed sinc, Kaiser 8.6).

    Output length is round(len(x) * sr_out / sr_in).
    """
    if sr_in <= 0 or sr_out <= 0:
        raise ConfigurationError(f"sample rates must be positive, got {sr_in} -> {sr_out}")
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] == 0:
        raise ConfigurationError(f"input must be a nonempty 1-D array, got shape {x.shape}")
    if sr_in == sr_out:
        return x.copy()
    ratio = sr_out / sr_in
    out_len = max(1, int(round(x.shape[0] * ratio)))
    scale = min(ratio, 1.0)
    out = _impl("resample", backend).resample_kernel(
        x, out_len, ratio, _filter_table(), FILTER_PRECISION, scale
    )
    return np.asarray(out)
