"""Momentum-space evolution on a periodic ring, used as an independent oracle.

With ``psi(k) = sum_x exp(-i k x) psi(x)`` the shift ``T`` becomes
multiplication by ``exp(-i k)`` and one step is

    A(k) = [[n e^{-ik}, i m], [i m, n e^{ik}]],   cos w(k) = n cos k.
"""
from __future__ import annotations

import numpy as np

from .core import FieldState, MassParameter


def momentum_matrix(k, mass: MassParameter) -> np.ndarray:
    """``A(k)`` for scalar or array ``k``; shape ``(..., 2, 2)``."""
    k = np.asarray(k, dtype=float)
    out = np.zeros(k.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = mass.n * np.exp(-1j * k)
    out[..., 1, 1] = mass.n * np.exp(1j * k)
    out[..., 0, 1] = out[..., 1, 0] = 1j * mass.m
    return out


def dispersion(k, mass: MassParameter):
    """``w(k) = arccos(n cos k)`` in ``[0, pi]``."""
    return np.arccos(np.clip(mass.n * np.cos(k), -1.0, 1.0))


def matrix_power(a: np.ndarray, t: int) -> np.ndarray:
    """``a^t`` for a batch of unitary 2x2 matrices by eigendecomposition.

    Eigenvectors come from the Hermitian matrix ``(a - a^dag) / 2i``, which
    commutes with the normal matrix ``a``; ``eigh`` then returns an orthonormal
    basis even where the two eigenphases nearly coincide.
    """
    herm = (a - np.conj(np.swapaxes(a, -1, -2))) / 2j
    _, vecs = np.linalg.eigh(herm)
    lam = np.einsum("...ji,...jk,...ki->...i", vecs.conj(), a, vecs)
    phase = np.angle(lam)
    powered = np.exp(1j * t * phase)
    return np.einsum("...ij,...j,...kj->...ik", vecs, powered, vecs.conj())


def ring_size(width: int, t: int) -> int:
    size = max(width + 2 * t + 1, 1)
    return 1 << (size - 1).bit_length()


def evolve_spectral(state: FieldState, mass: MassParameter, t: int) -> FieldState:
    """Evolve on a ring wide enough that nothing wraps into the causal cone.

    The returned window covers ``[offset - t, stop - 1 + t]``.
    """
    width = len(state)
    if t == 0 or width == 0:
        return FieldState(state.offset, state.amplitudes, state.time + t)
    size = ring_size(width, t)
    ring = np.zeros((size, 2), dtype=complex)
    # ring index j <-> site offset - t + j
    ring[t:t + width] = state.amplitudes
    spec = np.fft.fft(ring, axis=0)
    k = 2 * np.pi * np.fft.fftfreq(size)
    u = matrix_power(momentum_matrix(k, mass), t)
    spec = np.einsum("kab,kb->ka", u, spec)
    out = np.fft.ifft(spec, axis=0)[:width + 2 * t]
    return FieldState(state.offset - t, out, state.time + t)
