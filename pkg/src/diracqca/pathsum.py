"""Analytical path-sum propagator.

Every surviving path with ``f`` flips contributes ``alpha(f) = (i m)^f n^(t-f)``
times one matrix unit ``A_ab = |a><b|`` (0 = R, 1 = L), so the kernel

    K(d, t) = sum_f sum_ab c_ab(f) alpha(f) A_ab

reduces to four scalar channel sums over exact path counts ``c_ab(f)``.

The channel sums alternate in sign and cancel heavily at large ``t`` (terms
of order 1e28 for unit-size entries at t = 200), so they are accumulated as
exact integers in the rational ``m^2`` and rounded to floating point once.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import NamedTuple, Optional

import numpy as np

from .core import DomainError, FieldState, MassParameter


class ChannelIndex(NamedTuple):
    a: int
    b: int

    def __str__(self):
        return f"{self.a}{self.b}"

    @property
    def parity(self) -> int:
        return self.a ^ self.b

    @property
    def nu(self) -> Fraction:
        """``(ab - (1-a)(1-b)) / 2``: -1/2 for 00, +1/2 for 11, 0 off-diagonal."""
        return Fraction(self.a * self.b - (1 - self.a) * (1 - self.b), 2)

    def matrix(self) -> np.ndarray:
        out = np.zeros((2, 2), dtype=complex)
        out[self.a, self.b] = 1.0
        return out


C00, C11, C10, C01 = ChannelIndex(0, 0), ChannelIndex(1, 1), ChannelIndex(1, 0), ChannelIndex(0, 1)
CHANNELS = (C00, C11, C10, C01)


def channel(label) -> ChannelIndex:
    if isinstance(label, ChannelIndex):
        return label
    a, b = (int(c) for c in str(label))
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError(f"bad channel label {label!r}")
    return ChannelIndex(a, b)


def compose_ab(p, q) -> Optional[ChannelIndex]:
    """``A_ab A_cd = delta_bc A_ad``; ``None`` stands for the zero matrix."""
    p, q = channel(p), channel(q)
    if p.b != q.a:
        return None
    return ChannelIndex(p.a, q.b)


@dataclass(frozen=True)
class PathTally:
    r: int
    l: int
    f: int

    @property
    def t(self) -> int:
        return self.r + self.l + self.f

    @property
    def d(self) -> int:
        return self.r - self.l

    @property
    def mu_plus(self) -> Fraction:
        return Fraction(self.t + self.d - 1, 2)

    @property
    def mu_minus(self) -> Fraction:
        return Fraction(self.t - self.d - 1, 2)

    @classmethod
    def from_counts(cls, f: int, t: int, d: int) -> Optional["PathTally"]:
        """Tally with ``f`` flips and displacement ``d`` in ``t`` steps, if one exists."""
        if f < 0 or f > t - abs(d) or (t - f + d) % 2:
            return None
        return cls((t - f + d) // 2, (t - f - d) // 2, f)


def alpha(f: int, t: int, mass: MassParameter) -> complex:
    if not 0 <= f <= t:
        raise DomainError(f"need 0 <= f <= t, got f={f}, t={t}")
    return (1j ** (f % 4)) * mass.m ** f * mass.n ** (t - f)


def binom(n: int, k: int) -> int:
    """Binomial with ``C(n, 0) = 1`` for every integer ``n`` and zero otherwise off-range."""
    if k == 0:
        return 1
    if k < 0 or n < k:
        return 0
    return comb(n, k)


def coefficient(ch, f: int, t: int, d: int) -> int:
    """Number of surviving paths with ``f`` flips, displacement ``d`` in channel ``ch``."""
    ch = channel(ch)
    tally = PathTally.from_counts(f, t, d)
    if tally is None or f % 2 != ch.parity:
        return 0
    r, l = tally.r, tally.l
    if ch.parity:
        h = (f - 1) // 2
        return binom(h + r, r) * binom(h + l, l)
    h = f // 2
    if ch == C00:
        return binom(h + r, r) * binom(h + l - 1, l)
    return binom(h + l, l) * binom(h + r - 1, r)


@dataclass(frozen=True)
class ExactScalar:
    """``i^i_pow * m^m_pow * n^n_pow * value`` with ``value`` exact."""

    value: Fraction
    i_pow: int = 0
    m_pow: int = 0
    n_pow: int = 0

    def __post_init__(self):
        if self.value == 0:
            for name in ("i_pow", "m_pow", "n_pow"):
                object.__setattr__(self, name, 0)

    def to_complex(self, mass: MassParameter) -> complex:
        v = self.value.numerator / self.value.denominator
        v *= mass.m ** self.m_pow * mass.n ** self.n_pow
        return complex(0.0, v) if self.i_pow % 2 else complex(v, 0.0)


def _mass_squared(mass: MassParameter) -> tuple[int, int]:
    m2 = Fraction(mass.m) ** 2
    return m2.numerator, m2.denominator


@lru_cache(maxsize=16)
def _powers(base: int, count: int) -> tuple:
    out = [1]
    for _ in range(count):
        out.append(out[-1] * base)
    return tuple(out)


def channel_sum_exact(ch, t: int, d: int, mass: MassParameter) -> ExactScalar:
    """Exact ``sum_f c_ab(f) alpha(f)`` for one channel.

    With ``m^2 = p/q`` and ``n^2 = (q-p)/q`` the term with ``f = 2j + parity``
    is ``c * (-p)^j (q-p)^(h-j) / q^h`` for a common ``h``, so the whole sum is
    one integer over ``q^h``, evaluated by Horner's rule in ``j``.
    """
    ch = channel(ch)
    if abs(d) > t or (t + d) % 2 != ch.parity:
        return ExactScalar(Fraction(0))
    p, q = _mass_squared(mass)
    s = q - p
    # n^(t-f) = n^n_pow * (n^2)^(h-j)
    rest = t - ch.parity
    n_pow, h = rest % 2, rest // 2
    jmax = (t - abs(d) - ch.parity) // 2
    s_pows = _powers(s, h)
    acc = 0
    for j in range(jmax, -1, -1):
        acc = acc * -p + coefficient(ch, 2 * j + ch.parity, t, d) * s_pows[jmax - j]
    numer = acc * s_pows[h - jmax]
    return ExactScalar(Fraction(numer, q ** h), i_pow=ch.parity, m_pow=ch.parity, n_pow=n_pow)


def kernel_entry(t: int, d: int, mass: MassParameter) -> np.ndarray:
    """``K(d, t)`` as a 2x2 complex array."""
    out = np.zeros((2, 2), dtype=complex)
    for ch in CHANNELS:
        val = channel_sum_exact(ch, t, d, mass)
        if val.value:
            out[ch.a, ch.b] = val.to_complex(mass)
    return out


def _entries(args):
    t, ds, mass = args
    return [kernel_entry(t, d, mass) for d in ds]


@dataclass(frozen=True, eq=False)
class PropagatorKernel:
    """``K(d, t)`` for ``d = -t..t`` stored as ``entries[d + t]``."""

    t: int
    entries: np.ndarray

    def __getitem__(self, d: int) -> np.ndarray:
        if abs(d) > self.t:
            return np.zeros((2, 2), dtype=complex)
        return self.entries[d + self.t]

    @property
    def displacements(self) -> range:
        return range(-self.t, self.t + 1)

    def gram(self) -> np.ndarray:
        """``sum_d K(d)^dagger K(d)``; the identity for a unitary evolution."""
        e = self.entries
        return np.einsum("dji,djk->ik", e.conj(), e)

    def max_abs_diff(self, other: "PropagatorKernel") -> float:
        tt = max(self.t, other.t)
        a = np.array([self[d] for d in range(-tt, tt + 1)])
        b = np.array([other[d] for d in range(-tt, tt + 1)])
        return float(np.max(np.abs(a - b))) if a.size else 0.0


def kernel(t: int, mass: MassParameter, workers: Optional[int] = None) -> PropagatorKernel:
    """Path-sum kernel; ``workers > 1`` farms displacements out to processes.

    Each entry is computed exactly and independently of the others, so the
    result does not depend on ``workers``.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    ds = list(range(-t, t + 1))
    if workers and workers > 1 and len(ds) > 1:
        chunks = [(t, ds[i::workers], mass) for i in range(workers)]
        entries = np.zeros((len(ds), 2, 2), dtype=complex)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, block in enumerate(pool.map(_entries, chunks)):
                for d, e in zip(ds[i::workers], block):
                    entries[d + t] = e
    else:
        entries = np.array(_entries((t, ds, mass)), dtype=complex).reshape(len(ds), 2, 2)
    entries.setflags(write=False)
    return PropagatorKernel(t, entries)


def convolve(state: FieldState, k: PropagatorKernel) -> FieldState:
    """``psi_out(x) = sum_y K(x - y) psi_in(y)`` over the full causal cone."""
    t = k.t
    if len(state) == 0:
        return FieldState(state.offset, state.amplitudes, state.time + t)
    size = len(state) + 2 * t
    out = np.zeros((size, 2), dtype=complex)
    for a in (0, 1):
        for b in (0, 1):
            kab = k.entries[:, a, b]
            if np.any(kab):
                out[:, a] += np.convolve(kab, state.amplitudes[:, b])
    return FieldState(state.offset - t, out, state.time + t)


def evolve_via_kernel(state: FieldState, mass: MassParameter, t: int,
                      workers: Optional[int] = None) -> FieldState:
    return convolve(state, kernel(t, mass, workers=workers))
