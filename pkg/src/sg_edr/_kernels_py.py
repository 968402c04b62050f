"""Numpy fallback with the same contract as the compiled ``_kernels`` module."""

import numpy as np


def fft(a, rev, tw_re, tw_im, inverse=False):
    n = len(a)
    x = np.asarray(a, dtype=np.complex128)[rev]
    tw = tw_re + 1j * tw_im
    if inverse:
        tw = tw.conj()
    size = 2
    while size <= n:
        half = size // 2
        w = tw[:: n // size][:half]
        x = x.reshape(-1, size)
        even = x[:, :half]
        odd = x[:, half:] * w
        x = np.concatenate((even + odd, even - odd), axis=1).reshape(n)
        size *= 2
    if inverse:
        x /= n
    return x


def strang_evolve(psi, half_phase, kin_phase, nsteps, rev, tw_re, tw_im):
    if nsteps <= 0:
        return psi
    full_phase = half_phase * half_phase
    a = psi * half_phase
    for s in range(nsteps):
        a = fft(fft(a, rev, tw_re, tw_im) * kin_phase, rev, tw_re, tw_im, inverse=True)
        a *= half_phase if s == nsteps - 1 else full_phase
    psi[:] = a
    return psi


def spectral_phase(psi, kin_phase, rev, tw_re, tw_im):
    psi[:] = fft(fft(psi, rev, tw_re, tw_im) * kin_phase, rev, tw_re, tw_im, inverse=True)
    return psi
