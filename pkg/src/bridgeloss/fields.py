"""Participation and surface loss from exported magnetic-field samples.

Inputs are weighted |H|^2 samples already exported from an EM solver:
surface samples tagged ``chip`` or ``bridge`` (weights in m^2) and volume
samples (weights in m^3). All reductions use :func:`math.fsum`, so results
are correctly rounded and independent of sample order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import MU0
from .conductivity import DomainError, surface_resistance

SURFACE_REGIONS = ("chip", "bridge")


class IncompleteDataError(ValueError):
    """A region required by the calculation has no samples."""


def _as_array(v):
    return np.asarray(v, dtype=float).reshape(-1)


@dataclass(frozen=True)
class FieldSampleSet:
    """Region-tagged |H|^2 samples with integration weights.

    ``surface_region`` holds ``"chip"`` or ``"bridge"`` per surface sample.
    """

    surface_region: tuple
    surface_h2: np.ndarray
    surface_weight: np.ndarray
    volume_h2: np.ndarray = field(default_factory=lambda: np.empty(0))
    volume_weight: np.ndarray = field(default_factory=lambda: np.empty(0))
    f_r: float = 6e9

    def __post_init__(self):
        regions = tuple(str(r).lower() for r in self.surface_region)
        bad = set(regions) - set(SURFACE_REGIONS)
        if bad:
            raise ValueError(f"unknown surface regions {sorted(bad)}")
        sh, sw = _as_array(self.surface_h2), _as_array(self.surface_weight)
        vh, vw = _as_array(self.volume_h2), _as_array(self.volume_weight)
        if not (len(regions) == len(sh) == len(sw)) or len(vh) != len(vw):
            raise ValueError("sample arrays have mismatched lengths")
        if np.any(sw <= 0) or np.any(vw <= 0):
            raise ValueError("integration weights must be positive")
        if np.any(sh < 0) or np.any(vh < 0):
            raise ValueError("|H|^2 must be non-negative")
        object.__setattr__(self, "surface_region", regions)
        object.__setattr__(self, "surface_h2", sh)
        object.__setattr__(self, "surface_weight", sw)
        object.__setattr__(self, "volume_h2", vh)
        object.__setattr__(self, "volume_weight", vw)

    @classmethod
    def from_rows(cls, rows, f_r):
        """Build from ``(region, h_mag_sq, weight)`` rows; region ``volume``
        marks a volume sample."""
        sr, sh, sw, vh, vw = [], [], [], [], []
        for region, h2, w in rows:
            region = str(region).strip().lower()
            if region == "volume":
                vh.append(float(h2))
                vw.append(float(w))
            else:
                sr.append(region)
                sh.append(float(h2))
                sw.append(float(w))
        return cls(tuple(sr), np.array(sh), np.array(sw), np.array(vh), np.array(vw), f_r)

    def rows(self):
        out = [(r, h, w) for r, h, w in zip(self.surface_region, self.surface_h2, self.surface_weight)]
        out += [("volume", h, w) for h, w in zip(self.volume_h2, self.volume_weight)]
        return out

    def scaled(self, c):
        """Copy with every |H|^2 multiplied by ``c``."""
        return FieldSampleSet(self.surface_region, self.surface_h2 * c, self.surface_weight,
                              self.volume_h2 * c, self.volume_weight, self.f_r)

    def merged(self, other):
        """Region-wise union of two sample sets at the same frequency."""
        if other.f_r != self.f_r:
            raise ValueError("cannot merge sample sets at different frequencies")
        return FieldSampleSet(
            self.surface_region + other.surface_region,
            np.concatenate([self.surface_h2, other.surface_h2]),
            np.concatenate([self.surface_weight, other.surface_weight]),
            np.concatenate([self.volume_h2, other.volume_h2]),
            np.concatenate([self.volume_weight, other.volume_weight]),
            self.f_r,
        )

    def surface_integral(self, region):
        mask = np.array([r == region for r in self.surface_region], dtype=bool)
        if not mask.any():
            raise IncompleteDataError(f"no samples for region {region!r}")
        return math.fsum(self.surface_h2[mask] * self.surface_weight[mask])

    def volume_integral(self):
        if len(self.volume_h2) == 0:
            raise IncompleteDataError("no volume samples")
        return math.fsum(self.volume_h2 * self.volume_weight)


@dataclass(frozen=True)
class ParticipationReport:
    p: float
    surface_integral_chip: float
    surface_integral_bridge: float
    volume_integral: float | None = None
    q_s_inv: float | None = None
    p_s: float | None = None

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def participation_from_fields(samples: FieldSampleSet) -> ParticipationReport:
    """Bridge share of the surface |H|^2 integral."""
    chip = samples.surface_integral("chip")
    bridge = samples.surface_integral("bridge")
    total = chip + bridge
    if total == 0.0:
        raise DomainError("surface field integrals are all zero")
    vol = samples.volume_integral() if len(samples.volume_h2) else None
    return ParticipationReport(bridge / total, chip, bridge, vol)


def dissipated_power(r_s, samples: FieldSampleSet):
    """P_s = (R_s / 2) * integral over the bridge surface of |H|^2 (W)."""
    if r_s < 0:
        raise ValueError("surface resistance must be non-negative")
    return 0.5 * r_s * samples.surface_integral("bridge")


def limiting_q_from_rs(r_s, samples: FieldSampleSet):
    """Q_s^-1 = R_s * int_bridge |H|^2 ds / (2 pi f_r mu0 * int_volume |H|^2 dv)."""
    vol = samples.volume_integral()
    if vol == 0.0:
        raise DomainError("volume field integral is zero")
    return r_s * samples.surface_integral("bridge") / (2.0 * math.pi * samples.f_r * MU0 * vol)


def limiting_q(params, T, samples: FieldSampleSet, gap_model="interpolation"):
    """Bridge-limited loss Q_s^-1 with R_s from the Mattis-Bardeen core."""
    return limiting_q_from_rs(surface_resistance(params, T, samples.f_r, gap_model), samples)


def field_report(samples: FieldSampleSet, params=None, T=None, gap_model="interpolation"):
    """Participation plus, when a bridge material and T are given, R_s-based
    dissipated power and limiting loss."""
    rep = participation_from_fields(samples)
    if params is None or T is None:
        return rep
    r_s = surface_resistance(params, T, samples.f_r, gap_model)
    return ParticipationReport(rep.p, rep.surface_integral_chip, rep.surface_integral_bridge,
                               rep.volume_integral, limiting_q_from_rs(r_s, samples),
                               dissipated_power(r_s, samples))
