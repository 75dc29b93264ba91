# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled DSP hot paths: framed power spectra and windowed-sinc resampling.

Mirrors nels._kernels_py; nels.kernels picks whichever is available.
"""

import numpy as np

from libc.math cimport M_PI, ceil, cos, fabs, floor, sin


cdef void _fft_inplace(double* re, double* im, int n,
                       const int* rev, const double* wr, const double* wi) noexcept nogil:
    """Iterative radix-2 Cooley-Tukey; twiddles wr/wi have length n/2."""
    cdef int i, j, l, k, size, halfsize, tablestep
    cdef double tre, tim, tmp

    for i in range(n):
        j = rev[i]
        if j > i:
            tmp = re[i]; re[i] = re[j]; re[j] = tmp
            tmp = im[i]; im[i] = im[j]; im[j] = tmp

    size = 2
    while size <= n:
        halfsize = size >> 1
        tablestep = n // size
        i = 0
        while i < n:
            k = 0
            for j in range(i, i + halfsize):
                l = j + halfsize
                tre = re[l] * wr[k] - im[l] * wi[k]
                tim = re[l] * wi[k] + im[l] * wr[k]
                re[l] = re[j] - tre
                im[l] = im[j] - tim
                re[j] = re[j] + tre
                im[j] = im[j] + tim
                k += tablestep
            i += size
        size <<= 1


def stft_power(const double[::1] x, int n_fft, int hop, const double[::1] window):
    """Framed one-sided power spectra, no center padding."""
    cdef int n = x.shape[0]
    cdef int n_frames = 1 + (n - n_fft) // hop
    cdef int n_bins = n_fft // 2 + 1
    cdef int levels = 0
    while (1 << levels) < n_fft:
        levels += 1

    rev_np = np.zeros(n_fft, dtype=np.intc)
    cdef int[::1] rev = rev_np
    cdef int i, b, acc
    for i in range(n_fft):
        acc = 0
        for b in range(levels):
            acc = (acc << 1) | ((i >> b) & 1)
        rev[i] = acc

    angles = -2.0 * np.pi * np.arange(n_fft // 2) / n_fft
    wr_np = np.cos(angles)
    wi_np = np.sin(angles)
    cdef double[::1] wr = wr_np
    cdef double[::1] wi = wi_np

    out_np = np.empty((n_frames, n_bins), dtype=np.float64)
    cdef double[:, ::1] out = out_np
    re_np = np.empty(n_fft, dtype=np.float64)
    im_np = np.empty(n_fft, dtype=np.float64)
    cdef double[::1] re = re_np
    cdef double[::1] im = im_np

    cdef int t, off, k
    with nogil:
        for t in range(n_frames):
            off = t * hop
            for i in range(n_fft):
                re[i] = x[off + i] * window[i]
                im[i] = 0.0
            _fft_inplace(&re[0], &im[0], n_fft, &rev[0], &wr[0], &wi[0])
            for k in range(n_bins):
                out[t, k] = re[k] * re[k] + im[k] * im[k]
    return out_np


def resample_kernel(const double[::1] x, int out_len, double ratio,
                    const double[::1] table, int precision, double scale):
    """Windowed-sinc resampling via an oversampled filter table."""
    cdef int n_in = x.shape[0]
    cdef int table_len = table.shape[0]
    cdef double step = scale * precision
    cdef double radius = (table_len - 2) / step

    out_np = np.empty(out_len, dtype=np.float64)
    cdef double[::1] out = out_np

    cdef int m, lo, hi, nn, di
    cdef double t0, acc, dist, frac
    with nogil:
        for m in range(out_len):
            t0 = m / ratio
            lo = <int>ceil(t0 - radius)
            hi = <int>floor(t0 + radius)
            if lo < 0:
                lo = 0
            if hi > n_in - 1:
                hi = n_in - 1
            acc = 0.0
            for nn in range(lo, hi + 1):
                dist = fabs(nn - t0) * step
                di = <int>dist
                if di >= table_len - 1:
                    continue
                frac = dist - di
                acc += x[nn] * (table[di] + frac * (table[di + 1] - table[di]))
            out[m] = acc * scale
    return out_np
