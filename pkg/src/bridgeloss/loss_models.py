"""Quality-factor and frequency-shift models built on the conductivity core."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conductivity import (
    DomainError,
    SuperconductorParams,
    kinetic_inductance,
    penetration_depth,
    sigma1_ratio,
    sigma2_ratio,
)

REFERENCE_T = 10e-3  # K, base temperature defining f_r0


def thickness_factor(d, lam):
    """1 + x/sinh(x) with x = 2d/lambda; 2 for thin films, 1 for thick."""
    x = 2.0 * d / lam
    if x == 0.0:
        return 2.0
    if x > 20.0:
        return 1.0 + 2.0 * x * math.exp(-x) / (1.0 - math.exp(-2.0 * x))
    return 1.0 + x / math.sinh(x)


def quasiparticle_loss(params: SuperconductorParams, T, f, gap_model="interpolation"):
    """Thermal-quasiparticle loss Q^-1 of a resonator made of ``params``."""
    s1 = sigma1_ratio(params, T, f, gap_model)
    s2 = sigma2_ratio(params, T, f, gap_model)
    lam = penetration_depth(params, T, f, gap_model)
    return 0.5 * params.alpha * s1 / s2 * thickness_factor(params.thickness, lam)


@dataclass(frozen=True)
class CompositeLossModel:
    """Bridge participation ``p`` plus a temperature-independent loss floor."""

    p: float
    q_other_inv: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")
        if self.q_other_inv < 0.0:
            raise ValueError(f"q_other_inv must be non-negative, got {self.q_other_inv!r}")


def composite_loss(model: CompositeLossModel, T, f, trace, bridge, gap_model="interpolation"):
    """Q_i^-1 = p Q_bridge^-1 + (1-p) Q_trace^-1 + Q_other^-1."""
    q_trace = quasiparticle_loss(trace, T, f, gap_model)
    if model.p == 0.0:
        return q_trace + model.q_other_inv
    q_bridge = quasiparticle_loss(bridge, T, f, gap_model)
    return model.p * q_bridge + (1.0 - model.p) * q_trace + model.q_other_inv


def expected_qi_scaling(p_a, p_b, q_const_inv, residual_inv):
    """Q_i expected for a device with participation ``p_a`` if the constant
    loss ``q_const_inv`` seen at participation ``p_b`` scales with p."""
    if p_b <= 0:
        raise DomainError(f"p_b must be positive, got {p_b!r}")
    denom = p_a / p_b * q_const_inv + residual_inv
    if denom == 0.0:
        raise DomainError("total loss is zero; Q_i is unbounded")
    return 1.0 / denom


@dataclass(frozen=True)
class ResonatorGeometry:
    """Quarter-wave CPW resonator: length, per-unit inductance and capacitance.

    ``l_g`` and the kinetic inductance share the same per-unit convention
    (mu0 * lambda per square). Use :meth:`calibrated` to derive the
    capacitance from a measured base-temperature frequency.
    """

    f_r0: float
    length_l: float
    l_g: float
    capacitance_c: float
    film: SuperconductorParams
    bridge: SuperconductorParams | None = None

    def __post_init__(self):
        if not 1e9 <= self.f_r0 <= 20e9:
            raise ValueError(f"f_r0 = {self.f_r0!r} Hz outside the [1, 20] GHz sanity band")
        for name in ("length_l", "l_g", "capacitance_c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def calibrated(cls, f_r0, l_g, film, bridge=None, length_l=5e-3, gap_model="interpolation"):
        """Choose C so that the film-only resonator sits at ``f_r0`` at 10 mK."""
        lk0 = kinetic_inductance(film, REFERENCE_T, f_r0, gap_model)
        c = 1.0 / ((4.0 * length_l * f_r0) ** 2 * (l_g + lk0))
        return cls(f_r0=f_r0, length_l=length_l, l_g=l_g, capacitance_c=c, film=film, bridge=bridge)


def resonance_frequency(geom: ResonatorGeometry, l_k):
    """f_r = 1 / (4 l sqrt((L_g + L_k) C))."""
    if l_k < 0:
        raise ValueError("l_k must be non-negative")
    return 1.0 / (4.0 * geom.length_l * math.sqrt((geom.l_g + l_k) * geom.capacitance_c))


def fractional_frequency_shift(geom: ResonatorGeometry, p, T, gap_model="interpolation",
                               reference_includes_bridge=True):
    """(f_r(T) - f_r0) / f_r0 with a fraction ``p`` of the current in the bridges.

    The bridge kinetic inductance is included at the 10 mK reference too, so
    the shift is exactly zero there. ``reference_includes_bridge=False``
    drops it from the reference, leaving a small offset at base temperature.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    f = geom.f_r0
    lk_film_0 = kinetic_inductance(geom.film, REFERENCE_T, f, gap_model)
    lk_film = kinetic_inductance(geom.film, T, f, gap_model)
    lk_bridge = lk_bridge_0 = 0.0
    if p > 0.0:
        if geom.bridge is None:
            raise ValueError("p > 0 requires a bridge material")
        lk_bridge = kinetic_inductance(geom.bridge, T, f, gap_model)
        if reference_includes_bridge:
            lk_bridge_0 = kinetic_inductance(geom.bridge, REFERENCE_T, f, gap_model)
    ref = geom.l_g + lk_film_0 + p * lk_bridge_0
    now = geom.l_g + lk_film + p * lk_bridge
    return math.sqrt(ref / now) - 1.0


@dataclass(frozen=True)
class PowerLossModel:
    """Saturable TLS loss plus a power-independent floor."""

    q_tls0_inv: float
    n_c: float
    beta: float = 1.0
    q_const_inv: float = 0.0

    def __post_init__(self):
        if min(self.q_tls0_inv, self.q_const_inv) < 0 or self.n_c <= 0:
            raise ValueError("loss terms must be non-negative and n_c positive")
        if not 0.0 < self.beta <= 2.0:
            raise ValueError(f"beta must lie in (0, 2], got {self.beta!r}")


def power_dependent_loss(model: PowerLossModel, n_p):
    """Q_i^-1(n) = q_tls0 / (1 + n/n_c)^(beta/2) + q_const. Accepts arrays."""
    n = np.asarray(n_p, dtype=float)
    if np.any(n < 0):
        raise ValueError("photon number must be non-negative")
    out = model.q_tls0_inv / (1.0 + n / model.n_c) ** (0.5 * model.beta) + model.q_const_inv
    return float(out) if out.ndim == 0 else out
