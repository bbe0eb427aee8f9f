"""Deterministic synthetic datasets mirroring the Ta-resonator / Al-bridge device.

Default parameters follow the measured regime: four resonators with 0, 8,
20 and 35 bridges, bridge participations 0.85 %, 2 % and 4.2 %, Q_i about
7.5e5 at single-photon power (4.5e5 for 35 bridges), and for the 35-bridge
device a power sweep from Q_i = 4.5e5 at <n_p> = 1 to 1.5e6 at 1e8.
"""

from __future__ import annotations

import numpy as np

from .conductivity import AL, TA
from .loss_models import CompositeLossModel, PowerLossModel, composite_loss, power_dependent_loss
from .resonance import DcmParams, synthesize_trace
from .sweeps import LossSweep

N_AB = (0, 8, 20, 35)
PARTICIPATION = {0: 0.0, 8: 0.0085, 20: 0.02, 35: 0.042}
Q_OTHER = {0: 1 / 7.5e5, 8: 1 / 7.5e5, 20: 1 / 7.5e5, 35: 1 / 4.5e5}
F_R = {0: 5.38e9, 8: 5.62e9, 20: 5.87e9, 35: 6.15e9}
SWEEP_T = np.linspace(0.4, 1.15, 20)

# N=35 power dependence: TLS term plus 5e-7 constant loss
POWER_MODEL_35 = PowerLossModel(q_tls0_inv=1.72e-6, n_c=10.0, beta=0.3, q_const_inv=5e-7)
POWER_N = np.logspace(0, 8, 33)


def temperature_sweep(p, q_other_inv, temps=SWEEP_T, f_r=6.15e9, noise=0.0, rng=None,
                      n_ab=None, trace=TA, bridge=AL, gap_model="interpolation"):
    """Q_i^-1(T) from the composite model with relative Gaussian noise.

    Noisy sweeps carry the injected noise level as per-point ``sigma``.
    """
    model = CompositeLossModel(p, q_other_inv)
    q = np.array([composite_loss(model, T, f_r, trace, bridge, gap_model) for T in temps])
    q, sigma = _add_noise(q, noise, rng)
    return LossSweep("temperature", np.asarray(temps, float), q, sigma=sigma, n_ab=n_ab, f_r=f_r,
                     meta={"materials": {"trace": trace.name, "bridge": bridge.name}})


def _add_noise(q, noise, rng):
    if noise <= 0:
        return q, None
    rng = rng if rng is not None else np.random.default_rng(0)
    return q * (1.0 + noise * rng.standard_normal(len(q))), noise * q


def power_sweep(model=POWER_MODEL_35, n_p=POWER_N, noise=0.0, rng=None, n_ab=35, f_r=6.15e9):
    """Q_i^-1 against photon number with relative Gaussian noise."""
    q, sigma = _add_noise(power_dependent_loss(model, n_p), noise, rng)
    return LossSweep("photon_number", np.asarray(n_p, float), q, sigma=sigma, n_ab=n_ab, f_r=f_r)


def device_sweeps(noise=0.02, seed=0):
    """Temperature sweeps for every bridge count, seeded once for the set."""
    rng = np.random.default_rng(seed)
    return {n: temperature_sweep(PARTICIPATION[n], Q_OTHER[n], f_r=F_R[n], noise=noise,
                                 rng=rng, n_ab=n) for n in N_AB}


def device_traces(noise=0.01, seed=0, n_points=401):
    """One S21 trace per bridge count at single-photon drive.

    Applied power is chosen so that <n_p> is about 1 after 70 dB attenuation.
    """
    out = {}
    for i, n in enumerate(N_AB):
        q_i = 1.0 / (Q_OTHER[n])
        params = DcmParams.from_qi(F_R[n], q_i, 3e5, phi=0.05 * (i - 1.5), baseline=0.8 - 0.3j)
        out[n] = synthesize_trace(params, n_points=n_points, noise_sigma=noise, seed=seed + i,
                                  applied_power=-83.0, line_attenuation=70.0, temperature=0.01,
                                  label={"resonator": f"r{i}", "n_ab": n})
    return out
