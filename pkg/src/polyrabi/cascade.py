"""Progressive dressing of a spin-half by the modes of a frequency comb.

The driven two-level problem with mode offsets ``m_1 < ... < m_N`` (lowest
mode at ``j`` comb units, highest at ``j + m_N``) is reduced stage by stage:
each stage diagonalizes the coupling to one mode and rotates the frame so the
next mode's coupling becomes static.  The interaction is carried as a 3-vector
of :class:`~polyrabi.terms.TermSum` coefficients over the spin basis
``(sigma_z, sigma_+, sigma_-)`` and each stage acts through a 3x3 transfer
matrix plus a constant shift of the sigma_z entry.

After ``N-1`` stages the remaining static, resonant part is a plain two-level
interaction with detuning ``Delta_N`` and coupling ``chi_N``; everything else
is off-resonant and is reported (not silently discarded) by
:func:`run_cascade`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .terms import Term, TermSum, TermVector, TermMatrix, mat_vec

__all__ = [
    "ModeConfig",
    "StageParams",
    "CascadeResult",
    "TruncatedTerm",
    "DegenerateStageError",
    "ChiExtractionError",
    "ResonanceOrderWarning",
    "stage_zero",
    "build_M",
    "next_stage",
    "run_cascade",
]

_COMPONENT_NAMES = ("sigma_z", "sigma_plus", "sigma_minus")


class DegenerateStageError(ValueError):
    """A dressing stage with vanishing generalized Rabi frequency was requested."""


class ChiExtractionError(RuntimeError):
    """The static resonant coupling expected at the next mode is missing."""


class ResonanceOrderWarning(UserWarning):
    """The spin is closer to resonance with a lower mode than with the highest.

    The cascade still runs, but the truncation it relies on keeps less of the
    interaction, so accuracy degrades.
    """


@dataclass(frozen=True)
class ModeConfig:
    """Problem statement for an N-mode comb drive.

    Frequencies and times are dimensionless (comb units): mode k sits at
    ``(j + m[k]) * omega_f`` and ``delta0 = omega_0 - j*omega_f`` is the bare
    detuning from the lowest mode.  ``omega`` holds the complex Rabi
    amplitude of each mode.
    """

    j: int
    m: tuple[int, ...]
    omega: tuple[complex, ...]
    delta0: float

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(int(x) for x in self.m))
        object.__setattr__(self, "omega", tuple(complex(x) for x in self.omega))
        object.__setattr__(self, "delta0", float(self.delta0))
        object.__setattr__(self, "j", int(self.j))
        if len(self.m) < 1 or len(self.m) != len(self.omega):
            raise ValueError("need one Rabi amplitude per mode offset, at least one mode")
        if self.m[0] != 0:
            raise ValueError("mode offsets must start at 0")
        if any(b <= a for a, b in zip(self.m, self.m[1:])):
            raise ValueError("mode offsets must be strictly ascending")
        if any(x < 0 for x in self.m):
            raise ValueError("mode offsets must be non-negative")
        dist = [abs(self.delta0 - mk) for mk in self.m]
        if min(dist) < dist[-1] - 1e-12:
            warnings.warn(
                "spin is closer to resonance with a lower mode than with the "
                "highest; dressing order assumes the highest mode is nearest",
                ResonanceOrderWarning,
                stacklevel=2,
            )

    @property
    def n_modes(self) -> int:
        return len(self.m)

    @property
    def omega0(self) -> float:
        """Bare spin frequency in comb units."""
        return self.j + self.delta0

    @property
    def mode_shifts(self) -> tuple[int, ...]:
        """Ladder displacement carried by each mode's lowering operator."""
        return tuple(self.j + mk for mk in self.m)


@dataclass(frozen=True)
class StageParams:
    """Dressed quantities of one cascade stage.

    ``rabi`` is the generalized Rabi frequency sqrt(detuning^2 + |chi|^2);
    the ``*_norm`` properties are the same quantities divided by it.
    ``mode_shift`` is the ladder displacement of this stage's mode and
    ``dm_next`` the offset gap to the following mode (0 at the final stage).
    """

    k: int
    detuning: float
    chi: complex
    mode_shift: int
    dm_next: int

    @property
    def rabi(self) -> float:
        return math.hypot(self.detuning, abs(self.chi))

    @property
    def shift_plus(self) -> float:
        """Upper dressed-level shift (detuning + rabi) / 2."""
        return 0.5 * (self.detuning + self.rabi)

    @property
    def shift_minus(self) -> float:
        """Lower dressed-level shift (detuning - rabi) / 2, always <= 0."""
        return 0.5 * (self.detuning - self.rabi)

    @property
    def detuning_norm(self) -> float:
        r = self.rabi
        return self.detuning / r if r else 0.0

    @property
    def chi_norm(self) -> complex:
        r = self.rabi
        return self.chi / r if r else 0.0j

    @property
    def shift_plus_norm(self) -> float:
        r = self.rabi
        return self.shift_plus / r if r else 0.0

    @property
    def shift_minus_norm(self) -> float:
        r = self.rabi
        return self.shift_minus / r if r else 0.0

    @property
    def chi_phase(self) -> complex:
        """Unit phase chi / conj(chi); 1 for a vanishing or real coupling."""
        if self.chi == 0:
            return 1.0 + 0.0j
        return self.chi / self.chi.conjugate()

    @property
    def theta_term(self) -> Term:
        """Frame-rotation phase exp(i * dm_next * tau) as a Term."""
        return Term(1.0, 2.0 * self.dm_next, 0)


@dataclass(frozen=True)
class TruncatedTerm:
    """One off-resonant term dropped by the final two-level truncation."""

    component: str
    halffreq: float
    shift: int
    magnitude: float
    relative: float


@dataclass(frozen=True)
class CascadeResult:
    """Stages, final interaction vector and the final-truncation inventory."""

    config: ModeConfig
    stages: tuple[StageParams, ...]
    v_final: TermVector
    truncation_report: tuple[TruncatedTerm, ...]


def stage_zero(cfg: ModeConfig) -> TermVector:
    """Interaction vector before any dressing.

    Components over (sigma_z, sigma_+, sigma_-): a constant delta0/2 and, per
    mode, the comb-phased couplings ``(omega_k/2) e^{-i m_k tau} b_{j+m_k}``
    plus their hermitian mirrors.
    """
    vz = TermSum.constant(0.5 * cfg.delta0)
    plus = TermSum(
        Term(0.5 * om, -2.0 * mk, cfg.j + mk) for mk, om in zip(cfg.m, cfg.omega)
    )
    return (vz, plus, plus.conjugate_mirror())


def build_M(p: StageParams) -> TermMatrix:
    """Transfer matrix of one dressing-plus-rotation stage.

    Columns hold the images of sigma_z, sigma_+, sigma_- under conjugation by
    the stage's dressing unitary followed by the frame rotation that makes
    the next mode static.  For a complex coupling the lower-shift entries
    carry the coupling's unit phase squared; with a real coupling they reduce
    to the plain normalized shift.
    """
    if p.rabi == 0.0:
        raise DegenerateStageError(f"stage {p.k}: zero detuning and zero coupling")
    dn = p.detuning_norm
    xn = p.chi_norm
    sp = p.shift_plus_norm
    sm = p.shift_minus_norm
    ph = p.chi_phase
    f = 2.0 * p.dm_next  # halffreq of the frame phase exp(i*dm*tau)
    s = p.mode_shift
    one = TermSum.single
    return (
        (
            one(dn),
            one(0.5 * xn.conjugate(), 0.0, -s),
            one(0.5 * xn, 0.0, s),
        ),
        (
            one(-xn, f, s),
            one(sp, f, 0),
            one(sm * ph, f, 2 * s),
        ),
        (
            one(-xn.conjugate(), -f, -s),
            one(sm * ph.conjugate(), -f, -2 * s),
            one(sp, -f, 0),
        ),
    )


def next_stage(
    p: StageParams, v_prev: TermVector, cfg: ModeConfig
) -> tuple[TermVector, StageParams]:
    """Advance the interaction vector one stage and read off the next coupling.

    The new static coupling is twice the amplitude sitting at zero
    half-frequency and ladder shift ``j + m_{k+1}`` in the sigma_+ component
    (the vector carries the conventional factor 1/2).  The next detuning is
    ``rabi_k - dm_{k+1}``.
    """
    k_next = p.k + 1
    if k_next > cfg.n_modes:
        raise ValueError("cascade already complete")
    m = build_M(p)
    v = mat_vec(m, v_prev)
    v = (v[0] + TermSum.constant(-0.5 * p.dm_next), v[1], v[2])

    shift_next = cfg.j + cfg.m[k_next - 1]
    chi_next = 2.0 * v[1].amp_at(0.0, shift_next)
    if chi_next == 0 and cfg.omega[k_next - 1] != 0:
        raise ChiExtractionError(
            f"stage {k_next}: no static sigma_+ term at ladder shift {shift_next}"
        )
    detuning_next = p.rabi - p.dm_next
    dm = cfg.m[k_next] - cfg.m[k_next - 1] if k_next < cfg.n_modes else 0
    p_next = StageParams(
        k=k_next,
        detuning=detuning_next,
        chi=chi_next,
        mode_shift=shift_next,
        dm_next=dm,
    )
    return v, p_next


def run_cascade(cfg: ModeConfig) -> CascadeResult:
    """Run all N-1 dressing stages and report the final truncation.

    The returned stages hold everything the propagator needs; ``v_final`` is
    the full last interaction vector, from which only the static two-level
    part (constant sigma_z plus the resonant sigma_+- pair at shift
    ``j + m_N``) is kept downstream.  Every dropped term is listed with its
    magnitude relative to ``|chi_N|``.
    """
    first = StageParams(
        k=1,
        detuning=cfg.delta0,
        chi=cfg.omega[0],
        mode_shift=cfg.j + cfg.m[0],
        dm_next=cfg.m[1] - cfg.m[0] if cfg.n_modes > 1 else 0,
    )
    stages = [first]
    v = stage_zero(cfg)
    for _ in range(cfg.n_modes - 1):
        v, p = next_stage(stages[-1], v, cfg)
        stages.append(p)

    final = stages[-1]
    kept = {
        0: (0.0, 0),
        1: (0.0, final.mode_shift),
        2: (0.0, -final.mode_shift),
    }
    chi_mag = abs(final.chi)
    dropped = []
    for idx, comp in enumerate(v):
        keep_f, keep_s = kept[idx]
        for t in comp:
            if t.shift == keep_s and abs(t.halffreq - keep_f) <= 1e-12:
                continue
            mag = abs(t.amp)
            dropped.append(
                TruncatedTerm(
                    component=_COMPONENT_NAMES[idx],
                    halffreq=t.halffreq,
                    shift=t.shift,
                    magnitude=mag,
                    relative=mag / chi_mag if chi_mag else math.inf,
                )
            )
    return CascadeResult(
        config=cfg,
        stages=tuple(stages),
        v_final=v,
        truncation_report=tuple(dropped),
    )
