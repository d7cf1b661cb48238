"""State space and direct stepping of the one-dimensional Dirac automaton.

One step acts on a two-component field as

    psi_R(x, t+1) = n psi_R(x-1, t) + i m psi_L(x, t)
    psi_L(x, t+1) = n psi_L(x+1, t) + i m psi_R(x, t)

i.e. A = A_R (x) T + A_L (x) T^-1 + A_F (x) I with the shift T|x> = |x+1>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

R, L = 0, 1


class DomainError(ValueError):
    """Raised for parameters outside their mathematical domain."""


@dataclass(frozen=True)
class MassParameter:
    m: float
    n: float

    def __post_init__(self):
        if not (0.0 <= self.m <= 1.0 and 0.0 <= self.n <= 1.0):
            raise DomainError(f"mass amplitudes must lie in [0, 1], got m={self.m}, n={self.n}")


def make_mass(m: float) -> MassParameter:
    """Build the mass pair ``(m, sqrt(1 - m^2))``."""
    m = float(m)
    if not math.isfinite(m) or m < 0.0 or m > 1.0:
        raise DomainError(f"mass m must satisfy 0 <= m <= 1, got {m!r}")
    return MassParameter(m, math.sqrt(1.0 - m * m))


class Spinor(NamedTuple):
    upper: complex  # R mode
    lower: complex  # L mode


def transition_matrices(mass: MassParameter) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return the generators ``(A_R, A_L, A_F)`` as 2x2 complex arrays."""
    a_r = np.array([[mass.n, 0.0], [0.0, 0.0]], dtype=complex)
    a_l = np.array([[0.0, 0.0], [0.0, mass.n]], dtype=complex)
    a_f = np.array([[0.0, 1j * mass.m], [1j * mass.m, 0.0]], dtype=complex)
    return a_r, a_l, a_f


@dataclass(frozen=True, eq=False)
class FieldState:
    """Finite-support field ``psi(x)`` stored as a dense window.

    ``amplitudes[j]`` holds ``(psi_R, psi_L)`` at site ``offset + j``; sites
    outside the window are zero.
    """

    offset: int
    amplitudes: np.ndarray
    time: int = 0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex, copy=True).reshape(-1, 2)
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        if self.time < 0:
            raise ValueError("time must be non-negative")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "time", int(self.time))

    def __len__(self):
        return self.amplitudes.shape[0]

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self))

    @property
    def stop(self) -> int:
        """One past the rightmost stored site."""
        return self.offset + len(self)

    def spinor(self, x: int) -> Spinor:
        j = x - self.offset
        if 0 <= j < len(self):
            return Spinor(complex(self.amplitudes[j, R]), complex(self.amplitudes[j, L]))
        return Spinor(0j, 0j)

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def probabilities(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def window(self, start: int, stop: int) -> np.ndarray:
        """Amplitudes on sites ``start..stop-1``, zero-padded as needed."""
        out = np.zeros((stop - start, 2), dtype=complex)
        lo, hi = max(start, self.offset), min(stop, self.stop)
        if lo < hi:
            out[lo - start:hi - start] = self.amplitudes[lo - self.offset:hi - self.offset]
        return out

    def shifted(self, delta: int) -> "FieldState":
        return FieldState(self.offset + delta, self.amplitudes, self.time)

    def trimmed(self) -> "FieldState":
        """Drop edge sites where both components are exactly zero."""
        nz = np.flatnonzero(np.any(self.amplitudes != 0, axis=1))
        if nz.size == 0:
            return FieldState(self.offset, np.zeros((0, 2), dtype=complex), self.time)
        lo, hi = nz[0], nz[-1] + 1
        if lo == 0 and hi == len(self):
            return self
        return FieldState(self.offset + lo, self.amplitudes[lo:hi], self.time)

    def __eq__(self, other):
        if not isinstance(other, FieldState):
            return NotImplemented
        return (self.offset == other.offset and self.time == other.time
                and np.array_equal(self.amplitudes, other.amplitudes))

    def __repr__(self):
        return f"FieldState(offset={self.offset}, sites={len(self)}, time={self.time})"


def delta_state(x: int = 0, upper: complex = 1.0, lower: complex = 0.0) -> FieldState:
    """A state localised on a single site."""
    return FieldState(x, np.array([[upper, lower]], dtype=complex))


def random_state(rng: np.random.Generator, width: int, offset: int = 0) -> FieldState:
    """Unit-norm state with i.i.d. complex Gaussian amplitudes on ``width`` sites."""
    amps = rng.normal(size=(width, 2)) + 1j * rng.normal(size=(width, 2))
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2))
    return FieldState(offset, amps)


def step(state: FieldState, mass: MassParameter) -> FieldState:
    amps = state.amplitudes
    size = amps.shape[0]
    if size == 0:
        return FieldState(state.offset, amps, state.time + 1)
    # new window covers offset-1 .. stop; index j <-> site offset-1+j
    out = np.zeros((size + 2, 2), dtype=complex)
    im = 1j * mass.m
    out[2:, R] = mass.n * amps[:, R]
    out[1:-1, R] += im * amps[:, L]
    out[:-2, L] = mass.n * amps[:, L]
    out[1:-1, L] += im * amps[:, R]
    return FieldState(state.offset - 1, out, state.time + 1).trimmed()


def evolve(state: FieldState, mass: MassParameter, t: int) -> FieldState:
    """Apply :func:`step` ``t`` times."""
    if t < 0:
        raise DomainError("t must be non-negative")
    for _ in range(t):
        state = step(state, mass)
    return state
