"""Explicit closed-form propagators.

Three independent evaluators that double as cross-checks of the cascade
engine: the exact two-mode lab-frame propagator, the weak-field amplitude
for a uniformly spaced comb (second order in coupling over spacing), and
the textbook single-mode Rabi probability.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .cascade import ModeConfig
from .propagator import PeSeries, PropagatorComponents
from .terms import TermSum

__all__ = [
    "WeakFieldConfig",
    "WeakFieldWarning",
    "two_mode_u0",
    "weak_field_uge",
    "single_mode_rabi",
]


class WeakFieldWarning(UserWarning):
    """Couplings are large relative to the comb spacing for the weak-field form."""


@dataclass(frozen=True)
class WeakFieldConfig:
    """Uniformly spaced comb for the weak-field amplitude.

    ``spacing`` is the (integer) offset between neighbouring modes, so the
    offsets are ``m_k = (k-1)*spacing``; ``delta0`` is the bare detuning from
    the lowest mode, in comb units.
    """

    delta0: float
    omega: tuple[complex, ...]
    spacing: int = 1

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(complex(x) for x in self.omega))
        object.__setattr__(self, "delta0", float(self.delta0))
        object.__setattr__(self, "spacing", int(self.spacing))
        if self.spacing < 1:
            raise ValueError("spacing must be a positive integer")
        if len(self.omega) < 1:
            raise ValueError("need at least one mode")
        biggest = max(abs(x) for x in self.omega)
        if biggest > 0.3 * self.spacing:
            warnings.warn(
                "mode couplings exceed 0.3x the comb spacing; the weak-field "
                "amplitude is only second-order accurate",
                WeakFieldWarning,
                stacklevel=2,
            )

    @property
    def n_modes(self) -> int:
        return len(self.omega)

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(k * self.spacing for k in range(self.n_modes))

    @classmethod
    def from_mode_config(cls, cfg: ModeConfig) -> WeakFieldConfig:
        """Adopt a generic config; requires uniform mode spacing."""
        if cfg.n_modes >= 2:
            gaps = {b - a for a, b in zip(cfg.m, cfg.m[1:])}
            if len(gaps) != 1:
                raise ValueError("weak-field form needs a uniformly spaced comb")
            spacing = gaps.pop()
        else:
            spacing = 1
        return cls(delta0=cfg.delta0, omega=cfg.omega, spacing=spacing)


def two_mode_u0(cfg: ModeConfig) -> PropagatorComponents:
    """Exact lab-frame propagator components for a two-mode drive.

    Built directly from the explicit two-mode solution (one dressing stage,
    one frame rotation, one undressing), with every trigonometric factor
    expanded into exponential term pairs.  Agrees termwise with
    :func:`polyrabi.propagator.undress` on two-mode configs; the two code
    paths share only the term algebra.
    """
    if cfg.n_modes != 2:
        raise ValueError("two_mode_u0 requires exactly two modes")
    j = cfg.j
    m2 = cfg.m[1]
    om1, om2 = cfg.omega

    d1 = cfg.delta0
    x1 = om1
    r1 = math.hypot(d1, abs(x1))
    if r1 == 0.0:
        raise ValueError("first stage is degenerate (zero detuning and coupling)")
    dn1 = d1 / r1
    xn1 = x1 / r1
    sp1 = 0.5 * (d1 + r1) / r1
    sm1 = 0.5 * (d1 - r1) / r1
    ph1 = x1 / x1.conjugate() if x1 != 0 else 1.0 + 0.0j

    d2 = r1 - m2
    x2 = om2 * sp1
    r2 = math.hypot(d2, abs(x2))
    dn2 = d2 / r2 if r2 else 0.0
    xn2 = x2 / r2 if r2 else 0.0j

    cos_m = TermSum.cosine(m2)   # cos(m2*tau/2)
    sin_m = TermSum.sine(m2)
    cos_x = TermSum.cosine(r2)   # cos(rabi2*tau/2)
    sin_x = TermSum.sine(r2)
    e_m = TermSum.single(1.0, -float(m2), 0)  # exp(-i*m2*tau/2)
    e_p = TermSum.single(1.0, +float(m2), 0)

    f = sin_m * cos_x + dn2 * (cos_m * sin_x)
    u_id = cos_m * cos_x - dn2 * (sin_m * sin_x)

    f_z = (xn1.conjugate() * xn2) * e_m * TermSum.ladder(m2) + (
        xn1 * xn2.conjugate()
    ) * e_p * TermSum.ladder(-m2)
    u_z = -1j * (dn1 * f - 0.5 * (f_z * sin_x))

    f_plus = (sp1 * xn2) * e_m * TermSum.ladder(j + m2) + (
        sm1 * ph1 * xn2.conjugate()
    ) * e_p * TermSum.ladder(j - m2)
    u_plus = -1j * (xn1 * (TermSum.ladder(j) * f) + f_plus * sin_x)

    f_minus = f_plus.conjugate_mirror()
    u_minus = -1j * (
        xn1.conjugate() * (TermSum.ladder(-j) * f) + f_minus * sin_x
    )
    return PropagatorComponents(u=(u_id, u_z, u_plus, u_minus))


def weak_field_uge(wcfg: WeakFieldConfig, taugrid: np.ndarray) -> np.ndarray:
    """Up-down transition amplitude for a weak uniformly spaced comb.

    Keeps the full two-level rotation on the last mode (detuning
    ``delta0 - m_N``, coupling ``omega_N``) and the comb sidebands of the
    other modes to first order in coupling/spacing, so the probability is
    accurate to second order.  The sideband phases advance in half-units of
    ``spacing*tau``; their relative exponents reduce exactly to the two-mode
    solution at N=2.
    """
    taugrid = np.asarray(taugrid, dtype=float)
    n = wcfg.n_modes
    offsets = wcfg.offsets
    d_last = wcfg.delta0 - offsets[-1]
    chi_last = wcfg.omega[-1]
    r = math.hypot(d_last, abs(chi_last))
    dn = d_last / r if r else 0.0
    xn = chi_last / r if r else 0.0j

    half = 0.5 * r * taugrid
    s = np.sin(half)
    c = np.cos(half)
    f_plus = c - 1j * dn * s
    f_minus = -c - 1j * dn * s
    theta_h = 0.5 * wcfg.spacing * taugrid  # half of the comb rotation angle

    out = (-1j * xn) * np.exp(-1j * (n - 1) * theta_h) * s
    for p in range(1, n):
        d_p = wcfg.delta0 - offsets[p - 1]
        if abs(d_p) < 1e-9 * wcfg.spacing:
            raise ValueError(
                f"mode {p} is resonant (detuning {d_p:g}); the weak-field "
                "expansion requires off-resonant lower modes"
            )
        xn_p = wcfg.omega[p - 1] / d_p
        out = out + (0.5 * xn_p) * (
            np.exp(1j * (n - 2 * p + 1) * theta_h) * f_minus
            + np.exp(-1j * (n - 1) * theta_h) * f_plus
        )
    return out


def single_mode_rabi(delta: float, omega: complex, taugrid: np.ndarray) -> PeSeries:
    """Textbook Rabi flopping P_e = (|w|^2/(d^2+|w|^2)) sin^2(sqrt(d^2+|w|^2) tau/2)."""
    taugrid = np.asarray(taugrid, dtype=float)
    r2 = delta * delta + abs(omega) ** 2
    if r2 == 0.0:
        return PeSeries(tau=taugrid, values=np.zeros(taugrid.shape))
    values = (abs(omega) ** 2 / r2) * np.sin(0.5 * math.sqrt(r2) * taugrid) ** 2
    return PeSeries(tau=taugrid, values=values)
