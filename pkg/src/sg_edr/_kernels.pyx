# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled split-step kernels: in-place radix-2 FFT and the Strang loop.

Array contract (shared with ``_kernels_py``): ``rev`` is the bit-reversal
permutation of ``range(n)``; ``tw_re``/``tw_im`` hold ``exp(-2 pi i j / n)``
for ``j < n/2``. Forward transform uses the ``exp(-i ...)`` sign, inverse is
scaled by ``1/n``.
"""

import numpy as np


cdef void _fft(double complex[::1] a, const Py_ssize_t[::1] rev,
               const double[::1] tw_re, const double[::1] tw_im,
               bint inverse) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, size, half, stride, start, k
    cdef double complex u, v, t
    cdef double wr, wi, vr, vi
    cdef double scale

    for i in range(n):
        j = rev[i]
        if i < j:
            t = a[i]
            a[i] = a[j]
            a[j] = t

    size = 2
    while size <= n:
        half = size >> 1
        stride = n // size
        start = 0
        while start < n:
            for k in range(half):
                wr = tw_re[k * stride]
                wi = -tw_im[k * stride] if inverse else tw_im[k * stride]
                v = a[start + k + half]
                vr = v.real * wr - v.imag * wi
                vi = v.real * wi + v.imag * wr
                u = a[start + k]
                a[start + k] = u + (vr + 1j * vi)
                a[start + k + half] = u - (vr + 1j * vi)
            start += size
        size <<= 1

    if inverse:
        scale = 1.0 / n
        for i in range(n):
            a[i] = a[i] * scale


def fft(a, rev, tw_re, tw_im, bint inverse=False):
    """Return the (inverse) DFT of ``a`` as a new array."""
    out = np.array(a, dtype=np.complex128, copy=True, order="C")
    cdef double complex[::1] buf = out
    cdef const Py_ssize_t[::1] r = rev
    cdef const double[::1] wr = tw_re
    cdef const double[::1] wi = tw_im
    with nogil:
        _fft(buf, r, wr, wi, inverse)
    return out


def strang_evolve(psi, half_phase, kin_phase, Py_ssize_t nsteps, rev, tw_re, tw_im):
    """Apply ``nsteps`` Strang steps ``V/2 . T . V/2`` in place.

    ``half_phase`` multiplies in position space, ``kin_phase`` in FFT order.
    Adjacent half steps are fused into one full potential phase.
    """
    cdef double complex[::1] a = psi
    cdef const double complex[::1] h = half_phase
    cdef const double complex[::1] kin = kin_phase
    cdef const Py_ssize_t[::1] r = rev
    cdef const double[::1] wr = tw_re
    cdef const double[::1] wi = tw_im
    cdef Py_ssize_t n = a.shape[0], i, s
    if nsteps <= 0:
        return psi
    with nogil:
        for i in range(n):
            a[i] = a[i] * h[i]
        for s in range(nsteps):
            _fft(a, r, wr, wi, False)
            for i in range(n):
                a[i] = a[i] * kin[i]
            _fft(a, r, wr, wi, True)
            if s == nsteps - 1:
                for i in range(n):
                    a[i] = a[i] * h[i]
            else:
                for i in range(n):
                    a[i] = a[i] * h[i] * h[i]
    return psi


def spectral_phase(psi, kin_phase, rev, tw_re, tw_im):
    """Multiply by ``kin_phase`` in momentum space, in place."""
    cdef double complex[::1] a = psi
    cdef const double complex[::1] kin = kin_phase
    cdef const Py_ssize_t[::1] r = rev
    cdef const double[::1] wr = tw_re
    cdef const double[::1] wi = tw_im
    cdef Py_ssize_t n = a.shape[0], i
    with nogil:
        _fft(a, r, wr, wi, False)
        for i in range(n):
            a[i] = a[i] * kin[i]
        _fft(a, r, wr, wi, True)
    return psi
