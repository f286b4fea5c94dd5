"""Assembly of the lab-frame propagator and excitation probabilities.

The fully dressed evolution is a bare two-level rotation at the final
generalized Rabi frequency.  It is written as a 4-vector of
:class:`~polyrabi.terms.TermSum` coefficients over ``(1, sigma_z, sigma_+,
sigma_-)`` and pulled back to the lab frame by one 4x4 transfer matrix per
dressing stage, applied right-to-left with canonicalization after each
product so the term count stays bounded.

The excitation probability is the squared modulus of the sigma_+ component
after the equal-weight partial trace over the field lattice; grouping the
sigma_+ terms by ladder shift before tracing gives the per-channel
transition probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cascade import CascadeResult, StageParams
from .terms import TermSum, TermVector, TermMatrix, mat_vec

__all__ = [
    "PropagatorComponents",
    "PeSeries",
    "dressed_propagator",
    "build_T",
    "undress",
    "excitation_probability",
]


@dataclass(frozen=True)
class PropagatorComponents:
    """Propagator coefficients over the basis (1, sigma_z, sigma_+, sigma_-).

    Any propagator produced here has unit determinant, which ties the
    sigma_- component to the sigma_+ one: ``u[3] == -mirror(u[2])`` where
    mirror conjugates amplitudes and negates half-frequencies and shifts.
    :meth:`hermiticity_defect` measures violation of that identity (0.0 for
    every correctly assembled propagator).
    """

    u: TermVector

    @property
    def identity(self) -> TermSum:
        return self.u[0]

    @property
    def sigma_z(self) -> TermSum:
        return self.u[1]

    @property
    def sigma_plus(self) -> TermSum:
        return self.u[2]

    @property
    def sigma_minus(self) -> TermSum:
        return self.u[3]

    def hermiticity_defect(self) -> float:
        return (self.u[3] + self.u[2].conjugate_mirror()).max_abs_amp()

    def evaluate_traced(self, tau: float) -> tuple[complex, complex, complex, complex]:
        """All four components traced and evaluated at one time point."""
        return tuple(c.field_trace().evaluate(tau) for c in self.u)


@dataclass(frozen=True)
class PeSeries:
    """Excitation probability on a time grid, optionally split by channel.

    ``channels`` maps a ladder shift s to the probability of ending in the
    up state displaced by s lattice steps below the initial field state.
    """

    tau: np.ndarray
    values: np.ndarray
    channels: dict[int, np.ndarray] | None = field(default=None)


def dressed_propagator(p: StageParams) -> PropagatorComponents:
    """Two-level propagator of the final, fully dressed stage.

    cos/sin entries are expanded into exponential pairs at half-frequencies
    +-rabi; the ladder factors carry the final mode's displacement.  A stage
    with zero rabi frequency evolves trivially (identity).
    """
    r = p.rabi
    dn = p.detuning_norm
    xn = p.chi_norm
    s = p.mode_shift
    cos = TermSum.cosine(r)
    sin = TermSum.sine(r)
    u = (
        cos,
        (-1j * dn) * sin,
        ((-1j * xn) * sin) * TermSum.ladder(s),
        ((-1j * xn.conjugate()) * sin) * TermSum.ladder(-s),
    )
    return PropagatorComponents(u=u)


def build_T(p: StageParams) -> TermMatrix:
    """Undressing transfer matrix of one stage.

    Inverts the stage's dressing and frame rotation on the 4-vector of
    propagator coefficients.  Trigonometric entries are exponential pairs at
    half-frequencies +-dm_next; ladder entries carry the stage mode's
    displacement (singly and doubly).  As in the dressing matrix, the
    double-displacement entries pick up the coupling's unit phase when the
    coupling is complex.
    """
    dn = p.detuning_norm
    xn = p.chi_norm
    sp = p.shift_plus_norm
    sm = p.shift_minus_norm
    ph = p.chi_phase
    s = p.mode_shift
    f = float(p.dm_next)  # halffreq of exp(+-i*theta/2) with theta = dm*tau
    cos = TermSum.cosine(f)
    sin = TermSum.sine(f)
    ep = TermSum.single(1.0, f, 0)   # exp(+i*theta/2)
    em = TermSum.single(1.0, -f, 0)  # exp(-i*theta/2)
    b = TermSum.ladder(s)
    bd = TermSum.ladder(-s)
    zero = TermSum.zero()
    return (
        (cos, -1j * sin, zero, zero),
        (
            (-1j * dn) * sin,
            dn * cos,
            (-0.5 * xn.conjugate()) * em * bd,
            (-0.5 * xn) * ep * b,
        ),
        (
            ((-1j * xn) * sin) * b,
            (xn * cos) * b,
            sp * em,
            (sm * ph) * ep * TermSum.ladder(2 * s),
        ),
        (
            ((-1j * xn.conjugate()) * sin) * bd,
            (xn.conjugate() * cos) * bd,
            (sm * ph.conjugate()) * em * TermSum.ladder(-2 * s),
            sp * ep,
        ),
    )


def undress(cr: CascadeResult) -> PropagatorComponents:
    """Pull the dressed propagator back to the lab frame through all stages."""
    u = dressed_propagator(cr.stages[-1]).u
    for p in reversed(cr.stages[:-1]):
        u = mat_vec(build_T(p), u)
    return PropagatorComponents(u=u)


def excitation_probability(
    u0: PropagatorComponents,
    taugrid: np.ndarray,
    channels: bool | list[int] | tuple[int, ...] | None = None,
) -> PeSeries:
    """Upper-state population over a time grid.

    P_e(tau) = |trace(u_sigma_plus) evaluated at tau|^2.  With ``channels``
    truthy, per-shift probabilities are also computed by evaluating each
    shift group separately before tracing; ``channels=True`` uses every shift
    present, a list restricts to the given shifts (absent ones yield zeros).
    The total is the squared modulus of the coherent sum over channels.
    """
    taugrid = np.asarray(taugrid, dtype=float)
    amp = u0.sigma_plus.trace_evaluate_many(taugrid)
    values = np.abs(amp) ** 2
    chan: dict[int, np.ndarray] | None = None
    if channels:
        groups = u0.sigma_plus.by_shift()
        wanted = sorted(groups) if channels is True else list(channels)
        chan = {}
        for s in wanted:
            g = groups.get(int(s))
            if g is None:
                chan[int(s)] = np.zeros(taugrid.shape)
            else:
                chan[int(s)] = np.abs(g.trace_evaluate_many(taugrid)) ** 2
    return PeSeries(tau=taugrid, values=values, channels=chan)
