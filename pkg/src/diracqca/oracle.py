"""Brute-force path enumeration, the ground truth for every combinatorial claim.

Words are written ``h_t ... h_1`` (leftmost letter applied last) and
enumerated with a base-3 counter whose least significant digit is ``h_1``
(digits 0, 1, 2 = R, L, F).  Every generator is a scalar times a 0/1 matrix,

    A_R = n E_00,  A_L = n E_11,  A_F = i m X,

so ``A(sigma) = alpha(f) S(sigma)`` with an integer "skeleton" ``S``; the
structural checks use ``S`` and are therefore exact.
"""
from __future__ import annotations

import itertools
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .core import MassParameter, transition_matrices
from .pathsum import (C00, C01, C10, C11, PathTally, PropagatorKernel, alpha,
                      coefficient)

MAX_T = 16
LETTERS = "RLF"
_CHUNK_DIGITS = 9

_SKEL_TUPLES = {"R": (1, 0, 0, 0), "L": (0, 0, 0, 1), "F": (0, 1, 1, 0)}
_IDENTITY = (1, 0, 0, 1)

_FORBIDDEN = re.compile(r"RL|LR|RFR|LFL")


class ResourceGuardError(RuntimeError):
    """Raised when an enumeration would exceed the 3^t guard."""


class PathClass(Enum):
    OMEGA_R = "OmegaR"
    OMEGA_L = "OmegaL"
    ALL_FLIPS = "AllFlips"
    NULL = "Null"


@dataclass(frozen=True)
class PathString:
    word: str  # h_t ... h_1
    tally: PathTally = field(init=False)

    def __post_init__(self):
        word = self.word.upper()
        if set(word) - set(LETTERS):
            raise ValueError(f"word must be over R, L, F: {self.word!r}")
        object.__setattr__(self, "word", word)
        object.__setattr__(self, "tally", PathTally(word.count("R"), word.count("L"), word.count("F")))

    @property
    def t(self) -> int:
        return len(self.word)

    @property
    def applied(self) -> str:
        """Letters in order of application, ``h_1`` first."""
        return self.word[::-1]

    @classmethod
    def from_index(cls, index: int, t: int) -> "PathString":
        digits = []
        for _ in range(t):
            index, r = divmod(index, 3)
            digits.append(LETTERS[r])
        return cls("".join(reversed(digits)))


def _as_path(path) -> PathString:
    return path if isinstance(path, PathString) else PathString(path)


def _word_product(word: str, gens: dict, identity) -> tuple:
    a, b, c, d = identity
    for h in word:
        e, f, g, k = gens[h]
        a, b, c, d = a * e + b * g, a * f + b * k, c * e + d * g, c * f + d * k
    return a, b, c, d


def _skeleton_tuple(word: str) -> tuple:
    return _word_product(word, _SKEL_TUPLES, _IDENTITY)


def _generator_tuples(mass: MassParameter) -> dict:
    return {h: tuple(complex(v) for v in g.ravel())
            for h, g in zip(LETTERS, transition_matrices(mass))}


def skeleton(path) -> np.ndarray:
    """Integer part of the product: ``A(sigma) / alpha(f)``."""
    return np.array(_skeleton_tuple(_as_path(path).word), dtype=np.int64).reshape(2, 2)


def product(path, mass: MassParameter) -> np.ndarray:
    """Ordered product ``A_{h_t} ... A_{h_1}``."""
    prod = _word_product(_as_path(path).word, _generator_tuples(mass), (1 + 0j, 0j, 0j, 1 + 0j))
    return np.array(prod, dtype=complex).reshape(2, 2)


def is_forbidden(path) -> bool:
    return _FORBIDDEN.search(_as_path(path).word) is not None


def classify(path, skel: Optional[tuple] = None) -> PathClass:
    path = _as_path(path)
    if skel is None:
        skel = _skeleton_tuple(path.word)
    if not any(skel):
        return PathClass.NULL
    if path.tally.f == path.t:
        return PathClass.ALL_FLIPS
    slots = path.applied.split("F")
    # tau_1 is the first-applied slot; its parity decides which letter fills odd slots
    for i, tau in enumerate(slots):
        if tau:
            odd = i % 2 == 0
            if (tau[0] == "R") == odd:
                return PathClass.OMEGA_R
            return PathClass.OMEGA_L
    raise AssertionError("unreachable: f < t implies a non-empty slot")


def _expected_tuple(cls: PathClass, f: int) -> tuple:
    if cls is PathClass.ALL_FLIPS:
        return _SKEL_TUPLES["F"] if f % 2 else _IDENTITY
    if cls is PathClass.NULL:
        return (0, 0, 0, 0)
    if f % 2:
        ch = C10 if cls is PathClass.OMEGA_R else C01
    else:
        ch = C00 if cls is PathClass.OMEGA_R else C11
    out = [0, 0, 0, 0]
    out[2 * ch.a + ch.b] = 1
    return tuple(out)


def expected_skeleton(cls: PathClass, f: int) -> np.ndarray:
    """Matrix unit(s) a surviving path must reduce to, given its class and flips."""
    return np.array(_expected_tuple(cls, f), dtype=np.int64).reshape(2, 2)


def _check_t(t: int):
    if t < 0:
        raise ValueError("t must be non-negative")
    if t > MAX_T:
        raise ResourceGuardError(f"brute-force enumeration limited to t <= {MAX_T}, got {t}")


def _digit_block(t: int, start: int, count: int) -> np.ndarray:
    """Digits ``(count, t)`` of indices ``start..start+count-1``; column 0 is h_1."""
    idx = np.arange(start, start + count, dtype=np.int64)
    out = np.empty((count, t), dtype=np.int8)
    for i in range(t):
        idx, out[:, i] = np.divmod(idx, 3)
    return out


def _chunks(t: int):
    total = 3 ** t
    size = 3 ** min(t, _CHUNK_DIGITS)
    return [(start, size) for start in range(0, total, size)]


def _chunk_kernel(args):
    t, start, count, mass = args
    gens = np.array(transition_matrices(mass))
    digits = _digit_block(t, start, count)
    prods = np.broadcast_to(np.eye(2, dtype=complex), (count, 2, 2)).copy()
    for i in range(t):
        # left-multiply by A_{h_{i+1}}
        prods = np.matmul(gens[digits[:, i]], prods)
    disp = np.sum(digits == 0, axis=1) - np.sum(digits == 1, axis=1)
    acc = np.zeros((2 * t + 1, 2, 2), dtype=complex)
    np.add.at(acc, disp + t, prods)
    return acc


def kernel_bruteforce(t: int, mass: MassParameter, workers: Optional[int] = None) -> PropagatorKernel:
    """Sum of ``A(sigma)`` over all ``3^t`` words, bucketed by displacement.

    Partial sums are formed per fixed-size chunk of the counter and added in
    chunk order, so the result is bitwise independent of ``workers``.
    """
    _check_t(t)
    jobs = [(t, start, count, mass) for start, count in _chunks(t)]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_kernel, jobs))
    else:
        parts = [_chunk_kernel(job) for job in jobs]
    total = np.zeros((2 * t + 1, 2, 2), dtype=complex)
    for part in parts:
        total += part
    total.setflags(write=False)
    return PropagatorKernel(t, total)


def all_paths(t: int):
    """All words in counter order (h_1 varies fastest)."""
    _check_t(t)
    for letters in itertools.product(LETTERS, repeat=t):
        yield PathString("".join(letters))


@dataclass
class StructureReport:
    t: int
    words: int = 0
    nonzero: int = 0
    violations: list = field(default_factory=list)
    # (d, f, class) -> number of words
    class_counts: Counter = field(default_factory=Counter)

    @property
    def ok(self) -> bool:
        return not self.violations


def structure_check(t: int, mass: Optional[MassParameter] = None,
                    numeric_rtol: float = 1e-14) -> StructureReport:
    """Exhaustively verify the forbidden-substring and channel laws at one ``t``.

    With ``mass`` given, each surviving numeric product is also compared with
    ``alpha(f)`` times the prescribed matrix unit(s).
    """
    report = StructureReport(t)
    gens = _generator_tuples(mass) if mass is not None else None
    for path in all_paths(t):
        report.words += 1
        skel = _skeleton_tuple(path.word)
        nonzero = any(skel)
        forbidden = is_forbidden(path)
        if nonzero == forbidden:
            report.violations.append((path.word, "forbidden-substring law"))
        cls = classify(path, skel)
        f = path.tally.f
        if skel != _expected_tuple(cls, f):
            report.violations.append((path.word, f"channel law ({cls.value})"))
        if nonzero:
            report.nonzero += 1
            report.class_counts[(path.tally.d, f, cls)] += 1
            if mass is not None:
                got = _word_product(path.word, gens, (1 + 0j, 0j, 0j, 1 + 0j))
                a_f = alpha(f, t, mass)
                scale = max(abs(a_f), np.finfo(float).tiny)
                err = max(abs(g - a_f * e) for g, e in zip(got, skel))
                if err > numeric_rtol * scale:
                    report.violations.append((path.word, "numeric product != alpha(f) A_ab"))
    return report


def coefficient_recount(t: int, report: Optional[StructureReport] = None) -> list:
    """Compare ``c_ab(f)`` with the enumerated class counts; returns mismatches."""
    if report is None:
        report = structure_check(t)
    counts = report.class_counts
    mismatches = []
    for d in range(-t, t + 1):
        for f in range(0, t - abs(d) + 1):
            allf = counts[(d, f, PathClass.ALL_FLIPS)]
            omega_r = counts[(d, f, PathClass.OMEGA_R)] + allf
            omega_l = counts[(d, f, PathClass.OMEGA_L)] + allf
            pairs = ((C10, omega_r), (C01, omega_l)) if f % 2 else ((C00, omega_r), (C11, omega_l))
            for ch, enumerated in pairs:
                c = coefficient(ch, f, t, d)
                if c != enumerated:
                    mismatches.append((t, d, f, str(ch), c, enumerated))
            for ch in ((C00, C11) if f % 2 else (C10, C01)):
                if coefficient(ch, f, t, d) != 0:
                    mismatches.append((t, d, f, str(ch), coefficient(ch, f, t, d), 0))
    return mismatches
