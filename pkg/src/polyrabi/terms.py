"""Canonical phase-term algebra.

Every operator coefficient in the dressed-state calculation is a finite sum
of elements ``c * exp(i*f*tau/2) * b_s`` where ``c`` is a complex amplitude,
``f`` a real half-frequency (in units of the comb base frequency) and ``b_s``
a ladder displacement of ``s`` steps on the non-degenerate field lattice.
Displacements compose additively and commute with everything, so products
close on the same form:

    (c1, f1, s1) * (c2, f2, s2) = (c1*c2, f1+f2, s1+s2)

Negative ``s`` is a raising displacement (``b_{-n} = b_n^dag`` in the
mean-field lattice), which makes counter-rotating mode configurations
first-class citizens of the algebra.

Sums are kept canonical: like-keyed terms merged, half-frequency keys within
``FREQ_MERGE_TOL`` identified, amplitudes below ``AMP_DROP_TOL`` removed.
All values are immutable; every operation returns a new object.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, NamedTuple

import numpy as np

__all__ = [
    "AMP_DROP_TOL",
    "FREQ_MERGE_TOL",
    "Term",
    "TermSum",
    "TermMatrix",
    "TermVector",
    "UntracedShiftError",
    "term_mul",
    "sum_canonicalize",
    "evaluate",
    "field_trace",
    "mat_vec",
    "mat_mat",
    "termwise_max_difference",
]

# Half-frequency keys closer than this are treated as the same key; amplitudes
# at or below the drop threshold are removed on canonicalization.  Both sit far
# below any physical scale of the problem (frequencies are O(1) comb units).
FREQ_MERGE_TOL = 1e-12
AMP_DROP_TOL = 1e-14


class UntracedShiftError(ValueError):
    """Numeric evaluation was asked for a sum that still carries ladder shifts."""


class Term(NamedTuple):
    """One element ``amp * exp(i*halffreq*tau/2) * b_shift``."""

    amp: complex
    halffreq: float
    shift: int


def term_mul(a: Term, b: Term) -> Term:
    """Product of two terms: amplitudes multiply, phases and shifts add."""
    return Term(a.amp * b.amp, a.halffreq + b.halffreq, a.shift + b.shift)


def _merge_sorted(terms: list[Term]) -> tuple[Term, ...]:
    """Merge a (shift, halffreq)-sorted term list into canonical form.

    Group amplitudes are combined with ``math.fsum`` so that a group whose
    true sum is exactly zero cancels exactly, independent of addend order.
    The analytic excitation probability at tau=0 relies on this.
    """
    out: list[Term] = []
    i = 0
    n = len(terms)
    while i < n:
        shift = terms[i].shift
        freq = terms[i].halffreq
        j = i + 1
        while j < n and terms[j].shift == shift and terms[j].halffreq - freq <= FREQ_MERGE_TOL:
            j += 1
        if j == i + 1:
            amp = terms[i].amp
        else:
            amp = complex(
                math.fsum(t.amp.real for t in terms[i:j]),
                math.fsum(t.amp.imag for t in terms[i:j]),
            )
        if abs(amp) > AMP_DROP_TOL:
            out.append(Term(amp, freq, shift))
        i = j
    return tuple(out)


class TermSum:
    """Canonical finite sum of :class:`Term` elements.

    Supports ``+``, ``-``, ``*`` (by scalar, Term or TermSum), unary ``-``,
    hermitian mirroring, tracing out the field shifts and numeric evaluation.
    Instances are immutable and safe to share between workers.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Term] = ()):
        items = [Term(complex(t[0]), float(t[1]), int(t[2])) for t in terms]
        items.sort(key=lambda t: (t.shift, t.halffreq))
        object.__setattr__(self, "terms", _merge_sorted(items))

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("TermSum is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> TermSum:
        return cls(())

    @classmethod
    def single(cls, amp: complex, halffreq: float = 0.0, shift: int = 0) -> TermSum:
        return cls((Term(amp, halffreq, shift),))

    @classmethod
    def constant(cls, amp: complex) -> TermSum:
        return cls.single(amp)

    @classmethod
    def cosine(cls, halffreq: float) -> TermSum:
        """cos(halffreq * tau / 2) expanded into its two exponentials."""
        return cls((Term(0.5, halffreq, 0), Term(0.5, -halffreq, 0)))

    @classmethod
    def sine(cls, halffreq: float) -> TermSum:
        """sin(halffreq * tau / 2) expanded into its two exponentials."""
        return cls((Term(-0.5j, halffreq, 0), Term(0.5j, -halffreq, 0)))

    @classmethod
    def ladder(cls, shift: int) -> TermSum:
        """Pure displacement b_shift."""
        return cls.single(1.0, 0.0, shift)

    # -- algebra -------------------------------------------------------------

    def __iter__(self) -> Iterator[Term]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: TermSum) -> TermSum:
        if not isinstance(other, TermSum):
            return NotImplemented
        return TermSum(self.terms + other.terms)

    def __sub__(self, other: TermSum) -> TermSum:
        if not isinstance(other, TermSum):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> TermSum:
        return TermSum(Term(-t.amp, t.halffreq, t.shift) for t in self.terms)

    def __mul__(self, other):
        if isinstance(other, TermSum):
            return TermSum(
                term_mul(a, b) for a in self.terms for b in other.terms
            )
        if isinstance(other, Term):
            return TermSum(term_mul(t, other) for t in self.terms)
        if isinstance(other, (int, float, complex)):
            return TermSum(Term(t.amp * other, t.halffreq, t.shift) for t in self.terms)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, TermSum) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self) -> str:
        body = ", ".join(f"({t.amp:.6g}, {t.halffreq:.6g}, {t.shift})" for t in self.terms)
        return f"TermSum[{body}]"

    def conjugate_mirror(self) -> TermSum:
        """Hermitian image: conjugate amplitudes, negate phases and shifts."""
        return TermSum(Term(t.amp.conjugate(), -t.halffreq, -t.shift) for t in self.terms)

    # -- queries -------------------------------------------------------------

    def amp_at(self, halffreq: float, shift: int) -> complex:
        """Amplitude stored at a (halffreq, shift) key, 0 if absent."""
        for t in self.terms:
            if t.shift == shift and abs(t.halffreq - halffreq) <= FREQ_MERGE_TOL:
                return t.amp
        return 0.0 + 0.0j

    def max_abs_amp(self) -> float:
        return max((abs(t.amp) for t in self.terms), default=0.0)

    def shifts(self) -> tuple[int, ...]:
        return tuple(sorted({t.shift for t in self.terms}))

    def by_shift(self) -> dict[int, "TermSum"]:
        """Split into sub-sums sharing the same ladder displacement."""
        groups: dict[int, list[Term]] = {}
        for t in self.terms:
            groups.setdefault(t.shift, []).append(t)
        return {s: TermSum(ts) for s, ts in groups.items()}

    # -- reduction and evaluation ---------------------------------------------

    def field_trace(self) -> TermSum:
        """Collapse every ladder displacement to unity (equal-weight trace)."""
        return TermSum(Term(t.amp, t.halffreq, 0) for t in self.terms)

    def evaluate(self, tau: float) -> complex:
        """Numeric value sum(amp * exp(i*halffreq*tau/2)) at one time point.

        Raises :class:`UntracedShiftError` if any ladder shift is still
        present; trace first.  Summation uses ``math.fsum`` per quadrature
        and is bit-identical to :meth:`evaluate_many` at the same point.
        """
        return complex(self.evaluate_many(np.array([tau]))[0])

    def evaluate_many(self, taus: np.ndarray) -> np.ndarray:
        """Vector of :meth:`evaluate` values over a time grid.

        Keeps the exact per-point ``fsum`` semantics of :meth:`evaluate`
        (the tau=0 value of a cancelling sum is exactly zero).
        """
        for t in self.terms:
            if t.shift != 0:
                raise UntracedShiftError(
                    f"cannot evaluate: term carries ladder shift {t.shift}"
                )
        return self.trace_evaluate_many(taus)

    def trace_evaluate_many(self, taus: np.ndarray) -> np.ndarray:
        """Evaluate with every ladder displacement read as unity.

        Unlike ``field_trace().evaluate_many(...)`` this sums the raw terms
        without merging first, so sums that cancel do so exactly (merging
        across shift groups rounds once per merged key and can leave dust of
        order 1e-17 where the true value is zero).
        """
        taus = np.asarray(taus, dtype=float)
        if not self.terms:
            return np.zeros(taus.shape, dtype=complex)
        amps = np.array([t.amp for t in self.terms])
        freqs = np.array([t.halffreq for t in self.terms])
        contrib = amps[None, :] * np.exp(0.5j * np.outer(taus, freqs))
        re = contrib.real.tolist()
        im = contrib.imag.tolist()
        return np.array(
            [complex(math.fsum(r), math.fsum(i)) for r, i in zip(re, im)]
        )


# -- module-level forms of the core operations --------------------------------


def sum_canonicalize(ts: TermSum | Iterable[Term]) -> TermSum:
    """Return the canonical form of a term collection (idempotent)."""
    if isinstance(ts, TermSum):
        return TermSum(ts.terms)
    return TermSum(ts)


def evaluate(ts: TermSum, tau: float) -> complex:
    return ts.evaluate(tau)


def field_trace(ts: TermSum) -> TermSum:
    return ts.field_trace()


def termwise_max_difference(a: TermSum, b: TermSum) -> float:
    """Largest surviving amplitude of a - b after canonicalization."""
    return (a - b).max_abs_amp()


# -- dense containers ----------------------------------------------------------

TermVector = tuple  # tuple[TermSum, ...]
TermMatrix = tuple  # tuple[tuple[TermSum, ...], ...]


def mat_vec(m: TermMatrix, v: TermVector) -> TermVector:
    """Matrix-vector product over TermSum entries."""
    out = []
    for row in m:
        acc = TermSum.zero()
        for entry, comp in zip(row, v):
            if entry and comp:
                acc = acc + entry * comp
        out.append(acc)
    return tuple(out)


def mat_mat(a: TermMatrix, b: TermMatrix) -> TermMatrix:
    """Matrix-matrix product over TermSum entries."""
    ncols = len(b[0])
    out = []
    for row in a:
        new_row = []
        for jcol in range(ncols):
            acc = TermSum.zero()
            for entry, brow in zip(row, b):
                if entry and brow[jcol]:
                    acc = acc + entry * brow[jcol]
            new_row.append(acc)
        out.append(tuple(new_row))
    return tuple(out)
