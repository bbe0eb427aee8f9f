"""Physical constants (CODATA 2018, exact SI definitions where available)."""

from dataclasses import dataclass

from scipy import constants as _c


@dataclass(frozen=True)
class PhysicalConstants:
    h: float = _c.h
    hbar: float = _c.hbar
    k_B: float = _c.k
    mu0: float = _c.mu_0
    e: float = _c.e


CONST = PhysicalConstants()

H = CONST.h
HBAR = CONST.hbar
K_B = CONST.k_B
MU0 = CONST.mu0
EV = CONST.e

# Weak-coupling BCS ratio Delta(0) / (k_B Tc).
BCS_RATIO = 1.764

# Fermi factors below exp(-45) are dropped from the sigma1 tail.
TAIL_KT = 45.0
