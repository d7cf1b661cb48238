"""Closed-form kernel via Jacobi polynomials at ``x = 1 + 2 (m/n)^2``.

With ``P = (t+d)/2``, ``Q = (t-d)/2``, ``mu_pm = (t +- d - 1)/2`` and
``z = (1 - x)/2 = -(m/n)^2`` the channel entries resum to

    K_00 = -n^t (m/n)^2 P_{P-1}^{(1,-t)}(x)            (Q >= 1)
    K_11 = -n^t (m/n)^2 (Q/P) P_{P-1}^{(1,-t)}(x)      (P >= 1)
    K_10 = K_01 = i m n^(t-1) P_{mu_+}^{(0,-t)}(x)

plus the straight boundary paths ``K_00(t, t) = K_11(-t, t) = n^t``.  Each
Jacobi polynomial is evaluated as a terminating 2F1 sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import mpmath
import numpy as np

from .core import DomainError, MassParameter
from .pathsum import (C00, C01, C10, C11, CHANNELS, ChannelIndex, ExactScalar,
                      PropagatorKernel, channel, kernel_entry)

Number = Union[int, Fraction, float]


class PrecisionLossError(ArithmeticError):
    """Double-precision summation would cancel away the requested accuracy."""


@dataclass(frozen=True)
class JacobiSpec:
    k: int
    alpha: int
    beta: int
    x: Number

    def __post_init__(self):
        if self.k < 0:
            raise DomainError("Jacobi degree must be non-negative")


def pochhammer(x: Number, k: int):
    out = 1
    for i in range(k):
        out *= x + i
    return out


def _series_length(a: int, b: int) -> int:
    """Index after the last nonzero term of 2F1(a, b; c; z) with ``a`` or ``b`` in -N."""
    ends = [-v for v in (a, b) if v <= 0]
    if not ends:
        raise ValueError("series does not terminate")
    return min(ends) + 1


def hyp2f1_exact(a: int, b: int, c: int, z: Fraction) -> Fraction:
    """Terminating 2F1 in exact rational arithmetic, Horner from the top term."""
    if c <= 0:
        raise ValueError("denominator parameter must be positive")
    z = Fraction(z)
    zn, zd = z.numerator, z.denominator
    last = _series_length(a, b) - 1
    # S = 1 + z (a)(b)/((c)(1)) (1 + z (a+1)(b+1)/((c+1)(2)) (1 + ...))
    num, den = 1, 1
    for j in range(last - 1, -1, -1):
        rn = (a + j) * (b + j) * zn
        rd = (c + j) * (j + 1) * zd
        num, den = den * rd + rn * num, den * rd
    return Fraction(num, den)


def _terms_float(a: int, b: int, c: int, z: float, ctx=math) -> list:
    terms = []
    term = ctx.mpf(1) if ctx is mpmath else 1.0
    for j in range(_series_length(a, b)):
        terms.append(term)
        term = term * (a + j) * (b + j) / ((c + j) * (j + 1)) * z
    return terms


def hyp2f1_mp(a: int, b: int, c: int, z: Number, digits: int = 15, extra: int = 20):
    """Terminating 2F1 in multiprecision floating point.

    The working precision is raised until the digits lost to cancellation,
    measured as ``log10(sum |term| / |sum|)``, leave ``digits + extra`` intact.
    """
    zf = Fraction(z)
    dps = 2 * (digits + extra)
    while True:
        with mpmath.workdps(dps):
            zz = mpmath.mpf(zf.numerator) / zf.denominator
            terms = _terms_float(a, b, c, zz, mpmath)
            total = mpmath.fsum(terms)
            scale = mpmath.fsum(abs(x) for x in terms)
            if total == 0:
                lost = dps
            else:
                lost = float(mpmath.log10(scale / abs(total)))
            if dps - lost >= digits + extra or dps > 20000:
                return +total
            dps = int(lost) + digits + extra + 10


def hyp2f1_double(a: int, b: int, c: int, z: float, rtol: float = 1e-12) -> float:
    """Terminating 2F1 by compensated double summation; refuses ill-conditioned sums."""
    terms = _terms_float(a, b, c, float(z))
    total = math.fsum(terms)
    scale = math.fsum(abs(x) for x in terms)
    eps = np.finfo(float).eps
    if total == 0.0 or scale / abs(total) * eps * len(terms) > rtol:
        raise PrecisionLossError(
            f"2F1({a}, {b}; {c}; {z}) cancels by a factor {scale / abs(total) if total else math.inf:.3g}; "
            "use the exact or multiprecision path")
    return total


def jacobi_eval(spec: JacobiSpec, precision: str = "exact"):
    """``P_k^(alpha, beta)(x) = (alpha+1)_k / k! * 2F1(-k, 1+alpha+beta+k; alpha+1; (1-x)/2)``.

    ``precision`` is ``"exact"`` (returns a Fraction; ``x`` must be rational),
    ``"mp"`` (mpmath float) or ``"double"``.
    """
    k, al, be = spec.k, spec.alpha, spec.beta
    if al + 1 <= 0:
        raise DomainError("alpha + 1 must be positive")
    lead = Fraction(pochhammer(al + 1, k), math.factorial(k))
    b = 1 + al + be + k
    if precision == "exact":
        zarg = (1 - Fraction(spec.x)) / 2
        return lead * hyp2f1_exact(-k, b, al + 1, zarg)
    zarg = (1 - Fraction(spec.x)) / 2
    if precision == "mp":
        val = hyp2f1_mp(-k, b, al + 1, zarg)
        return mpmath.mpf(lead.numerator) / lead.denominator * val
    if precision == "double":
        return float(lead) * hyp2f1_double(-k, b, al + 1, float(zarg))
    raise ValueError(f"unknown precision {precision!r}")


def channel_closedform_exact(ch, t: int, d: int, mass: MassParameter) -> ExactScalar:
    """One kernel entry from the Jacobi form, exact up to a single ``m``/``n``/``i`` factor."""
    ch = channel(ch)
    if abs(d) > t or (t + d) % 2 != ch.parity:
        return ExactScalar(Fraction(0))
    if mass.n == 0.0:
        raise DomainError("closed form needs n > 0; use the m = 1 limit")
    m2 = Fraction(mass.m) ** 2
    n2 = 1 - m2
    w = m2 / n2
    x = 1 + 2 * w
    if ch.parity:
        # i m n^(t-1) P_{mu+}^{(0,-t)}(x)
        mu_plus = (t + d - 1) // 2
        poly = jacobi_eval(JacobiSpec(mu_plus, 0, -t, x))
        rest = t - 1
        return ExactScalar(n2 ** (rest // 2) * poly, i_pow=1, m_pow=1, n_pow=rest % 2)
    big_p, big_q = (t + d) // 2, (t - d) // 2
    own, other = (big_p, big_q) if ch == C00 else (big_q, big_p)
    if other == 0:
        return ExactScalar(n2 ** (t // 2), n_pow=t % 2)
    if own == 0:
        return ExactScalar(Fraction(0))
    poly = jacobi_eval(JacobiSpec(big_p - 1, 1, -t, x))
    # -n^t w (own/P) P_{P-1}, n^t = n^(t%2) (n^2)^(t//2)
    val = -n2 ** (t // 2) * w * Fraction(own, big_p) * poly
    return ExactScalar(val, n_pow=t % 2)


def channel_closedform_mp(ch, t: int, d: int, mass: MassParameter, digits: int = 15):
    """Same entry in multiprecision floating point, returned as an mpmath complex."""
    ch = channel(ch)
    if abs(d) > t or (t + d) % 2 != ch.parity:
        return mpmath.mpc(0)
    if mass.n == 0.0:
        raise DomainError("closed form needs n > 0; use the m = 1 limit")
    with mpmath.workdps(digits + 20):
        m = mpmath.mpf(mass.m)
        n2 = 1 - m * m
        n = mpmath.sqrt(n2)
        w = m * m / n2
    m2 = Fraction(mass.m) ** 2
    x = 1 + 2 * m2 / (1 - m2)
    if ch.parity:
        mu_plus = (t + d - 1) // 2
        poly = jacobi_eval(JacobiSpec(mu_plus, 0, -t, x), precision="mp")
        with mpmath.workdps(digits + 20):
            return mpmath.mpc(0, 1) * m * n ** (t - 1) * poly
    big_p, big_q = (t + d) // 2, (t - d) // 2
    own, other = (big_p, big_q) if ch == C00 else (big_q, big_p)
    if other == 0:
        with mpmath.workdps(digits + 20):
            return mpmath.mpc(n ** t)
    if own == 0:
        return mpmath.mpc(0)
    poly = jacobi_eval(JacobiSpec(big_p - 1, 1, -t, x), precision="mp")
    with mpmath.workdps(digits + 20):
        return mpmath.mpc(-(n ** t) * w * own / big_p * poly)


def _pure_flip_entry(t: int, d: int) -> np.ndarray:
    out = np.zeros((2, 2), dtype=complex)
    if d == 0:
        phase = 1j ** (t % 4)
        if t % 2:
            out[0, 1] = out[1, 0] = phase
        else:
            out[0, 0] = out[1, 1] = phase
    return out


def kernel_closedform(t: int, mass: MassParameter, precision: str = "exact") -> PropagatorKernel:
    """Closed-form kernel; ``precision`` in ``{"exact", "mp", "double"}``."""
    if t < 0:
        raise DomainError("t must be non-negative")
    entries = np.zeros((2 * t + 1, 2, 2), dtype=complex)
    for d in range(-t, t + 1):
        if mass.n == 0.0:
            entries[d + t] = _pure_flip_entry(t, d)
            continue
        if t == 0:
            entries[t] = np.eye(2)
            continue
        for ch in CHANNELS:
            if precision == "exact":
                val = channel_closedform_exact(ch, t, d, mass)
                if val.value:
                    entries[d + t, ch.a, ch.b] = val.to_complex(mass)
            elif precision == "mp":
                entries[d + t, ch.a, ch.b] = complex(channel_closedform_mp(ch, t, d, mass))
            elif precision == "double":
                entries[d + t, ch.a, ch.b] = _channel_double(ch, t, d, mass)
            else:
                raise ValueError(f"unknown precision {precision!r}")
    entries.setflags(write=False)
    return PropagatorKernel(t, entries)


def _channel_double(ch: ChannelIndex, t: int, d: int, mass: MassParameter) -> complex:
    if abs(d) > t or (t + d) % 2 != ch.parity:
        return 0j
    m, n = mass.m, mass.n
    x = 1 + 2 * (m / n) ** 2
    if ch.parity:
        poly = jacobi_eval(JacobiSpec((t + d - 1) // 2, 0, -t, x), precision="double")
        return 1j * m * n ** (t - 1) * poly
    big_p, big_q = (t + d) // 2, (t - d) // 2
    own, other = (big_p, big_q) if ch == C00 else (big_q, big_p)
    if other == 0:
        return complex(n ** t)
    if own == 0:
        return 0j
    poly = jacobi_eval(JacobiSpec(big_p - 1, 1, -t, x), precision="double")
    return complex(-(n ** t) * (m / n) ** 2 * own / big_p * poly)


# ---------------------------------------------------------------------------
# literal evaluation of the printed prefactor formula
# ---------------------------------------------------------------------------

AGREE = "agree"
CONSTANT = "constant mismatch"
STRUCTURAL = "structural mismatch"


def printed_formula(ch, t: int, d: int, mass: MassParameter) -> Optional[complex]:
    """``gamma_ab P_k^(1,-t)(1 + 2(m/n)^2)`` exactly as printed.

    ``k = mu_+ - (a^b + 1)/2``, ``gamma_ab = -(i^(a^b)) n^t (m/n)^(2 + a^b)
    k! (mu_{(-1)^ab} + (1 - a^b)/2) / (2)_k``, zero when the parity of
    ``t + d`` excludes the channel.  Returns ``None`` when ``k`` is not a
    non-negative integer (formula undefined).
    """
    ch = channel(ch)
    if (t + d) % 2 != ch.parity:
        return 0j
    par = ch.parity
    mu_plus = Fraction(t + d - 1, 2)
    mu_minus = Fraction(t - d - 1, 2)
    k = mu_plus - Fraction(par + 1, 2)
    if k.denominator != 1 or k < 0:
        return None
    k = int(k)
    mu_sel = mu_plus if (-1) ** (ch.a * ch.b) > 0 else mu_minus
    m, n = mass.m, mass.n
    factor = Fraction(math.factorial(k)) * (mu_sel + Fraction(1 - par, 2)) / pochhammer(2, k)
    gamma = -(1j ** par) * n ** t * (m / n) ** (2 + par) * float(factor)
    m2 = Fraction(m) ** 2
    poly = jacobi_eval(JacobiSpec(k, 1, -t, 1 + 2 * m2 / (1 - m2)))
    return gamma * float(poly)


@dataclass
class ChannelReconciliation:
    channel: str
    printed: Optional[complex]
    normative: complex
    ratio: Optional[complex]
    verdict: str


@dataclass
class PrefactorReport:
    t: int
    d: int
    m: float
    channels: list = field(default_factory=list)

    def as_dict(self) -> dict:
        def pair(z):
            return None if z is None else [z.real, z.imag]
        return {
            "t": self.t, "d": self.d, "m": self.m,
            "channels": [{
                "channel": c.channel, "verdict": c.verdict,
                "printed": pair(c.printed), "normative": pair(c.normative),
                "ratio": pair(c.ratio),
            } for c in self.channels],
        }


def _ratio(printed, normative) -> Optional[complex]:
    if printed is None or normative == 0:
        return None
    return printed / normative


def reconcile_paper_prefactors(t: int, d: int, mass: MassParameter, tol: float = 1e-9) -> PrefactorReport:
    """Compare the printed prefactor formula with the path-sum kernel, per channel.

    A mismatch counts as constant when the ratio is the same at a second probe
    mass ``m/2``, i.e. the printed form is off by a mass-independent factor.
    """
    if abs(d) > t:
        raise DomainError("need |d| <= t")
    if mass.n == 0.0 or mass.m == 0.0:
        raise DomainError("reconciliation needs 0 < m < 1")
    from .core import make_mass
    probe = make_mass(mass.m / 2)
    normative = kernel_entry(t, d, mass)
    normative_probe = kernel_entry(t, d, probe)
    report = PrefactorReport(t, d, mass.m)
    for ch in (C00, C11, C10, C01):
        if (t + d) % 2 != ch.parity:
            continue
        got = printed_formula(ch, t, d, mass)
        want = complex(normative[ch.a, ch.b])
        ratio = _ratio(got, want)
        if got is None:
            verdict = STRUCTURAL
        elif want == 0:
            verdict = AGREE if abs(got) <= tol else STRUCTURAL
        elif abs(ratio - 1) <= tol:
            verdict = AGREE
        else:
            ratio2 = _ratio(printed_formula(ch, t, d, probe), complex(normative_probe[ch.a, ch.b]))
            if ratio != 0 and ratio2 is not None and abs(ratio2 - ratio) <= tol * abs(ratio):
                verdict = CONSTANT
            else:
                verdict = STRUCTURAL
        report.channels.append(ChannelReconciliation(str(ch), got, want, ratio, verdict))
    return report
