"""Mattis-Bardeen complex conductivity and derived surface quantities.

All inputs and outputs are SI: energies in joules, temperatures in kelvin,
frequencies in hertz. Material parameters live in
:class:`SuperconductorParams`; the Al and Ta presets carry the values used
for the Ta resonator / Al air-bridge devices.

Notes
-----
The default Al normal-state conductivity (3.8e7 S/m) is lower than what
rho = 4.4 uOhm.cm with RRR = 3.85 implies (about 8.7e7 S/m just above Tc).
The quoted 3.8e7 is kept as the preset; override ``sigma_n`` to explore the
alternative.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from dataclasses import dataclass, field

from scipy import integrate, optimize

from . import kernels
from .constants import BCS_RATIO, EV, H, K_B, MU0

GAP_MODELS = ("interpolation", "self_consistent", "constant")
DEFAULT_RTOL = 1e-10


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved relative error {achieved:.3g})")
        self.achieved = achieved


class DomainError(ValueError):
    """Input lies outside the physical domain of the model."""


@dataclass(frozen=True)
class SuperconductorParams:
    """Material description for one superconducting film.

    ``tc`` defaults to ``gap0 / (1.764 k_B)``. A measured transition
    temperature that should not drive the gap law belongs in ``tc_measured``.
    """

    name: str
    gap0: float
    sigma_n: float
    thickness: float
    alpha: float
    tc: float | None = None
    tc_measured: float | None = field(default=None, compare=False)

    def __post_init__(self):
        for attr in ("gap0", "sigma_n", "thickness"):
            v = getattr(self, attr)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{attr} must be positive and finite, got {v!r}")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if self.tc is None:
            object.__setattr__(self, "tc", self.gap0 / (BCS_RATIO * K_B))
        elif not (math.isfinite(self.tc) and self.tc > 0):
            raise ValueError(f"tc must be positive and finite, got {self.tc!r}")

    def replace(self, **changes):
        if "gap0" in changes and "tc" not in changes:
            changes["tc"] = None
        return dataclasses.replace(self, **changes)


AL = SuperconductorParams(
    name="al",
    gap0=182e-6 * EV,
    sigma_n=3.8e7,
    thickness=475e-9,  # midpoint of the 400-550 nm deposition range
    alpha=0.022,
    tc_measured=1.08,
)

TA = SuperconductorParams(
    name="ta",
    gap0=607e-6 * EV,
    sigma_n=7.7e6,
    thickness=200e-9,
    alpha=0.018,
)

PRESETS = {"al": AL, "ta": TA}


def material(name):
    """Look up a preset by (case-insensitive) name."""
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown material {name!r}; known: {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class ComplexConductivityRatio:
    s1: float
    s2: float
    temperature: float
    frequency: float


def _check_finite(*values):
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite argument {v!r}")


def fermi(eps, T):
    """Fermi-Dirac occupation at energy ``eps`` (J) and temperature ``T`` (K)."""
    _check_finite(eps, T)
    if T <= 0:
        raise ValueError(f"temperature must be positive, got {T!r}")
    return kernels.fermi(eps / (K_B * T))


# -- gap temperature dependence ------------------------------------------------


@functools.lru_cache(maxsize=4096)
def _bcs_reduced_gap(t):
    """Solve the weak-coupling BCS gap equation for Delta(T)/Delta(0) at t = T/Tc.

    Uses ln(Delta0/Delta) = 2 * int_0^inf f(Delta cosh u) du with the
    zero-temperature gap Delta0 = 1.764 k_B Tc in reduced units.
    """
    if t <= 0.0:
        return 1.0
    if t >= 1.0:
        return 0.0
    kt = t / BCS_RATIO  # k_B T in units of Delta0

    def residual(delta):
        umax = math.acosh(1.0 + 60.0 * kt / delta) if delta > 0 else 60.0
        tail, _ = integrate.quad(
            lambda u: kernels.fermi(delta * math.cosh(u) / kt),
            0.0, umax, epsabs=1e-15, epsrel=1e-13, limit=200,
        )
        return math.log(1.0 / delta) - 2.0 * tail

    lo = 1e-12
    if residual(lo) <= 0.0:
        return 0.0
    return optimize.brentq(residual, lo, 1.0, xtol=1e-15, rtol=1e-14, maxiter=200)


def gap_at_temperature(params, T, gap_model="interpolation"):
    """Superconducting gap Delta(T) in joules.

    ``gap_model`` is one of ``"interpolation"`` (tanh form), ``"self_consistent"``
    (BCS gap equation scaled to ``params.gap0``) or ``"constant"``.
    """
    _check_finite(T)
    if T < 0:
        raise ValueError(f"temperature must be non-negative, got {T!r}")
    if gap_model not in GAP_MODELS:
        raise ValueError(f"unknown gap model {gap_model!r}")
    tc = params.tc
    if T >= tc:
        return 0.0
    if T == 0.0 or gap_model == "constant":
        return params.gap0
    if gap_model == "interpolation":
        return params.gap0 * math.tanh(1.74 * math.sqrt(tc / T - 1.0))
    return params.gap0 * _bcs_reduced_gap(T / tc)


# -- conductivity ----------------------------------------------------------------


@functools.lru_cache(maxsize=65536)
def _ratios(params, T, f, gap_model, rtol):
    # Cache keyed on exact float inputs; lru_cache is thread-safe.
    gap = gap_at_temperature(params, T, gap_model)
    hf = H * f
    if not hf < 2.0 * gap:
        raise DomainError(
            f"h*f = {hf / EV * 1e6:.3g} ueV is not below 2*Delta(T) = "
            f"{2 * gap / EV * 1e6:.3g} ueV for {params.name} at T = {T} K"
        )
    kt = K_B * T
    s1, e1, ok1 = kernels.sigma1_integral(gap, kt, hf, rtol)
    if not ok1:
        raise QuadratureError("sigma1 quadrature did not converge", e1 / abs(s1) if s1 else math.inf)
    s2, e2, ok2 = kernels.sigma2_integral(gap, kt, hf, rtol)
    if not ok2:
        raise QuadratureError("sigma2 quadrature did not converge", e2 / abs(s2))
    return s1, s2


def _validate(T, f):
    _check_finite(T, f)
    if T < 0:
        raise ValueError(f"temperature must be non-negative, got {T!r}")
    if f <= 0:
        raise ValueError(f"frequency must be positive, got {f!r}")


def complex_conductivity(params, T, f, gap_model="interpolation", rtol=DEFAULT_RTOL):
    """sigma1/sigma_n and sigma2/sigma_n as a :class:`ComplexConductivityRatio`."""
    _validate(T, f)
    s1, s2 = _ratios(params, float(T), float(f), gap_model, rtol)
    return ComplexConductivityRatio(s1=s1, s2=s2, temperature=T, frequency=f)


def sigma1_ratio(params, T, f, gap_model="interpolation", rtol=DEFAULT_RTOL):
    """Real (dissipative) conductivity relative to the normal state."""
    _validate(T, f)
    return _ratios(params, float(T), float(f), gap_model, rtol)[0]


def sigma2_ratio(params, T, f, gap_model="interpolation", rtol=DEFAULT_RTOL):
    """Imaginary (superfluid) conductivity relative to the normal state."""
    _validate(T, f)
    return _ratios(params, float(T), float(f), gap_model, rtol)[1]


def penetration_depth(params, T, f, gap_model="interpolation"):
    """Penetration depth lambda = 1/sqrt(2 pi mu0 f sigma2) in metres."""
    _validate(T, f)
    if T >= params.tc:
        raise DomainError(f"T = {T} K is not below Tc = {params.tc:.4g} K for {params.name}")
    s2 = sigma2_ratio(params, T, f, gap_model) * params.sigma_n
    return 1.0 / math.sqrt(2.0 * math.pi * MU0 * f * s2)


def surface_resistance(params, T, f, gap_model="interpolation"):
    """Bulk-limit surface resistance R_s = 2 pi f mu0 lambda sigma1/(2 sigma2), ohms."""
    lam = penetration_depth(params, T, f, gap_model)
    s1, s2 = _ratios(params, float(T), float(f), gap_model, DEFAULT_RTOL)
    return 2.0 * math.pi * f * MU0 * lam * s1 / (2.0 * s2)


def kinetic_inductance(params, T, f, gap_model="interpolation"):
    """Bulk kinetic inductance per square, L_k = mu0 * lambda (H)."""
    return MU0 * penetration_depth(params, T, f, gap_model)


def clear_cache():
    _ratios.cache_clear()
    _bcs_reduced_gap.cache_clear()
