"""Complex S21 notch-resonator model and diameter-correction fitting.

The transmission model is

    S21(f) = (S_x + i S_y) * (1 - (Q_L/|Qc|) cos(phi) e^{i phi} / (1 + i x)),
    x = (Q_L / (f f_r)) (f^2 - f_r^2),

fitted to the real and imaginary parts simultaneously with a damped
least-squares (Levenberg-Marquardt) iteration using the analytic Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR
from .conductivity import DomainError

PARAM_NAMES = ("s_x", "s_y", "f_r", "q_l", "q_c_mag", "phi")


class FitInitError(ValueError):
    """No resonance dip could be located in the trace."""


class FitConvergenceError(RuntimeError):
    """The least-squares iteration hit its iteration limit."""

    def __init__(self, message, last):
        super().__init__(message)
        self.last = last


@dataclass(frozen=True)
class DcmParams:
    s_x: float
    s_y: float
    f_r: float
    q_l: float
    q_c_mag: float
    phi: float

    def __post_init__(self):
        if not (self.q_l > 0 and self.q_c_mag > 0):
            raise ValueError("q_l and q_c_mag must be positive")
        if not abs(self.phi) < math.pi / 2:
            raise ValueError(f"|phi| must be below pi/2, got {self.phi!r}")

    @property
    def baseline(self):
        return complex(self.s_x, self.s_y)

    @property
    def q_i(self):
        return qi_from_fit(self.q_l, self.q_c_mag)

    def as_array(self):
        return np.array([self.s_x, self.s_y, self.f_r, self.q_l, self.q_c_mag, self.phi])

    @classmethod
    def from_array(cls, x):
        return cls(*(float(v) for v in x))

    @classmethod
    def from_qi(cls, f_r, q_i, q_c_mag, phi=0.0, baseline=1.0 + 0.0j):
        """Build parameters from internal and coupling Q instead of loaded Q."""
        q_l = 1.0 / (1.0 / q_i + 1.0 / q_c_mag)
        b = complex(baseline)
        return cls(b.real, b.imag, f_r, q_l, q_c_mag, phi)


@dataclass(frozen=True)
class S21Trace:
    """Frequency-ordered complex transmission with acquisition metadata.

    ``applied_power`` is the instrument output in dBm; ``line_attenuation``
    the total input-line attenuation in dB.
    """

    freqs: np.ndarray
    values: np.ndarray
    applied_power: float | None = None
    line_attenuation: float = 70.0
    temperature: float | None = None
    label: dict = field(default_factory=dict)

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if freqs.ndim != 1 or freqs.shape != values.shape:
            raise ValueError("freqs and values must be 1-D and of equal length")
        if len(freqs) < 8:
            raise ValueError(f"a trace needs at least 8 samples, got {len(freqs)}")
        if not np.all(np.diff(freqs) > 0):
            raise ValueError("freqs must be strictly increasing")
        if not (np.all(np.isfinite(freqs)) and np.all(np.isfinite(values))):
            raise ValueError("trace contains non-finite samples")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "values", values)

    def scaled(self, factor):
        return S21Trace(self.freqs, self.values * factor, self.applied_power,
                        self.line_attenuation, self.temperature, dict(self.label))


@dataclass
class ResonanceFit:
    """Fit result; ``residual_rms`` is the complex RMS residual divided by
    |baseline|, so it compares directly with a relative noise level."""

    params: DcmParams
    q_i: float
    covariance: np.ndarray
    residual_rms: float
    n_p: float
    converged: bool
    iterations: int

    @property
    def stderr(self):
        return dict(zip(PARAM_NAMES, np.sqrt(np.clip(np.diag(self.covariance), 0, None))))

    def as_row(self):
        row = {name: getattr(self.params, name) for name in PARAM_NAMES}
        row.update({f"{k}_err": v for k, v in self.stderr.items()})
        row.update(q_i=self.q_i, residual_rms=self.residual_rms, n_p=self.n_p,
                   converged=self.converged, iterations=self.iterations)
        return row


def _detuning(q_l, f_r, f):
    # f - f_r is exact near resonance, avoiding cancellation in f^2 - f_r^2
    return q_l * (f - f_r) * (f + f_r) / (f * f_r)


def evaluate_s21(params: DcmParams, f):
    """Model transmission at frequency ``f`` (scalar or array)."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ValueError("frequencies must be positive")
    p = params
    a = p.q_l / p.q_c_mag * math.cos(p.phi) * complex(math.cos(p.phi), math.sin(p.phi))
    out = p.baseline * (1.0 - a / (1.0 + 1j * _detuning(p.q_l, p.f_r, f)))
    return complex(out) if np.ndim(out) == 0 else out


def s21_jacobian(x, f):
    """Complex derivatives of the model with respect to the 6 parameters.

    Returns an array of shape (len(f), 6) in ``PARAM_NAMES`` order.
    """
    s_x, s_y, f_r, q_l, q_c, phi = x
    s = complex(s_x, s_y)
    eip = complex(math.cos(phi), math.sin(phi))
    a = q_l / q_c * math.cos(phi) * eip
    xd = _detuning(q_l, f_r, f)
    den = 1.0 + 1j * xd
    g = a / den
    jac = np.empty((len(f), 6), dtype=complex)
    jac[:, 0] = 1.0 - g
    jac[:, 1] = 1j * (1.0 - g)
    dx_dfr = -q_l * (f / f_r**2 + 1.0 / f)
    jac[:, 2] = s * g * 1j * dx_dfr / den
    # d/dQ_L: both a and x are proportional to Q_L
    jac[:, 3] = -s * (g / q_l - g * 1j * (xd / q_l) / den)
    jac[:, 4] = s * g / q_c
    jac[:, 5] = -s * (q_l / q_c) * 1j * eip * eip / den
    return jac


def qi_from_fit(q_l, q_c_mag):
    """Internal Q from 1/Q_i = 1/Q_L - 1/|Qc|."""
    if not q_l < q_c_mag:
        raise DomainError(f"Q_L = {q_l:.6g} >= |Qc| = {q_c_mag:.6g} gives non-positive internal loss")
    return 1.0 / (1.0 / q_l - 1.0 / q_c_mag)


def dbm_to_watt(p_dbm):
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def photon_number(fit: DcmParams, applied_power, attenuation=70.0):
    """Mean stored photon number from the drive power at the instrument.

    The power reaching the device is ``applied_power - attenuation`` (dBm).
    For a side-coupled resonator the stored energy balance gives
    ``n = 2 Q_L^2 P / (hbar w_r^2 |Qc|)`` with ``w_r = 2 pi f_r``.
    """
    p_dev = dbm_to_watt(applied_power - attenuation)
    w = 2.0 * math.pi * fit.f_r
    return 2.0 * fit.q_l**2 * p_dev / (HBAR * w * w * fit.q_c_mag)


def synthesize_trace(params: DcmParams, n_points=401, span=None, noise_sigma=0.0, seed=0,
                     applied_power=None, line_attenuation=70.0, temperature=None, label=None):
    """Model trace on a uniform grid centred on ``f_r``, optionally noisy.

    ``span`` defaults to ten loaded linewidths. Noise is circular complex
    Gaussian with total RMS ``noise_sigma * |S_x + i S_y|``.
    """
    if n_points < 8:
        raise ValueError("n_points must be at least 8")
    if span is None:
        span = 10.0 * params.f_r / params.q_l
    freqs = np.linspace(params.f_r - span / 2, params.f_r + span / 2, n_points)
    values = evaluate_s21(params, freqs)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        scale = noise_sigma * abs(params.baseline) / math.sqrt(2.0)
        values = values + scale * (rng.standard_normal(n_points) + 1j * rng.standard_normal(n_points))
    return S21Trace(freqs, values, applied_power, line_attenuation, temperature, dict(label or {}))


# -- initialization ---------------------------------------------------------------


def _fit_circle(z):
    # Algebraic (Kasa) fit: x^2 + y^2 + D x + E y + F = 0
    x, y = z.real, z.imag
    a = np.column_stack([x, y, np.ones_like(x)])
    b = -(x * x + y * y)
    (d, e, f), *_ = np.linalg.lstsq(a, b, rcond=None)
    center = complex(-d / 2, -e / 2)
    radius = math.sqrt(max(abs(center) ** 2 - f, 0.0))
    return center, radius


def initial_guess(freqs, values):
    """Seed parameters from the baseline, the resonance circle and the
    detuning slope near the dip."""
    freqs = np.asarray(freqs, dtype=float)
    values = np.asarray(values, dtype=complex)
    n = len(freqs)
    k = max(2, int(round(0.05 * n)))
    edge = np.concatenate([values[:k], values[-k:]])
    base = complex(np.mean(edge))
    if base == 0:
        raise FitInitError("baseline is zero")
    w = values / base
    dev = np.abs(1.0 - w)
    edge_w = [w[:k], w[-k:]]
    noise = math.sqrt(np.mean(np.concatenate([np.abs(np.diff(seg)) ** 2 for seg in edge_w])) / 2.0)
    peak = float(dev.max())
    if peak < max(6.0 * noise, 1e-9):
        raise FitInitError(f"no resonance dip found (peak deviation {peak:.3g}, noise {noise:.3g})")

    center, _ = _fit_circle(w)
    a = 1.0 - center
    diameter = 2.0 * abs(a)
    phi = math.atan2(a.imag, a.real)
    phi = max(min(phi, 1.4), -1.4)
    a = diameter * complex(math.cos(phi), math.sin(phi))

    # 1 + i x = a / (1 - w) near resonance; fit x linearly in frequency.
    sel = dev > 0.4 * diameter
    if sel.sum() < 3:
        sel = np.argsort(dev)[-3:]
    xs = (a / (1.0 - w[sel])).imag
    wts = dev[sel] ** 2
    fs = freqs[sel]
    f_ref = freqs[int(np.argmax(dev))]
    slope, intercept = np.polyfit(fs - f_ref, xs, 1, w=wts)
    if slope > 0:
        f_r = f_ref - intercept / slope
        q_l = slope * f_r / 2.0
    else:
        f_r = f_ref
        q_l = 0.0
    if not (freqs[0] <= f_r <= freqs[-1]) or q_l <= 0:
        # fall back to full width at half depth
        half = dev**2 >= 0.5 * peak**2
        width = freqs[half][-1] - freqs[half][0] if half.sum() > 1 else (freqs[-1] - freqs[0]) / n
        f_r = f_ref
        q_l = f_r / max(width, freqs[1] - freqs[0])
    q_c = q_l * math.cos(phi) / diameter
    return DcmParams(base.real, base.imag, float(f_r), float(q_l), float(q_c), float(phi))


# -- least squares ----------------------------------------------------------------


def levenberg_marquardt(residual, jacobian, x0, typical, max_iter=200, ftol=1e-12, xtol=1e-15):
    """Minimize 0.5*|r(x)|^2 by damped Gauss-Newton steps.

    Columns are scaled by their Jacobian norms (Marquardt scaling). Returns
    ``(x, cost, iterations, converged)``.
    """
    x = np.array(x0, dtype=float)
    r = residual(x)
    cost = 0.5 * float(r @ r)
    lam = 1e-3
    npar = len(x)
    for it in range(1, max_iter + 1):
        jac = jacobian(x)
        d = np.linalg.norm(jac, axis=0)
        d[d == 0] = 1.0
        js = jac / d
        while True:
            aug = np.vstack([js, math.sqrt(lam) * np.eye(npar)])
            rhs = np.concatenate([-r, np.zeros(npar)])
            step = np.linalg.lstsq(aug, rhs, rcond=None)[0] / d
            x_new = x + step
            small = np.all(np.abs(step) <= xtol * (np.abs(x) + typical))
            try:
                r_new = residual(x_new)
                cost_new = 0.5 * float(r_new @ r_new)
            except (ValueError, FloatingPointError):
                cost_new = math.inf
            if cost_new < cost:
                rel = (cost - cost_new) / cost
                x, r, cost = x_new, r_new, cost_new
                lam = max(lam / 10.0, 1e-15)
                if rel < ftol or small or cost == 0.0:
                    return x, cost, it, True
                break
            if small or lam > 1e16:
                return x, cost, it, True
            lam *= 10.0
    return x, cost, max_iter, False


def _stack(zc):
    return np.concatenate([zc.real, zc.imag])


def fit_s21(trace: S21Trace, init: DcmParams | None = None, max_iter=200, ftol=1e-12,
            bootstrap=0, seed=0):
    """Fit the diameter-correction model to ``trace``.

    Raises
    ------
    FitInitError
        No dip was found to seed the fit.
    FitConvergenceError
        The iteration limit was reached; ``.last`` holds the last iterate.
    """
    f = trace.freqs
    data = trace.values
    if init is None:
        init = initial_guess(f, data)
    x0 = init.as_array()
    typical = np.array([abs(init.baseline)] * 2 + [init.f_r, init.q_l, init.q_c_mag, 1.0])

    def residual(x):
        if x[3] <= 0 or x[4] <= 0 or abs(x[5]) >= math.pi / 2:
            raise ValueError("out of domain")
        return _stack(evaluate_s21(DcmParams.from_array(x), f) - data)

    def jacobian(x):
        return _stack(s21_jacobian(x, f))

    x, cost, iters, ok = levenberg_marquardt(residual, jacobian, x0, typical, max_iter, ftol)
    params = DcmParams.from_array(x)
    if not ok:
        raise FitConvergenceError(f"no convergence after {max_iter} iterations", params)

    m = 2 * len(f)
    jac = jacobian(x)
    dof = max(m - 6, 1)
    s2 = 2.0 * cost / dof
    cov = s2 * np.linalg.pinv(jac.T @ jac)
    if bootstrap:
        cov = _bootstrap_cov(trace, params, bootstrap, seed, max_iter, ftol)
    rms = math.sqrt(2.0 * cost / len(f)) / abs(params.baseline)
    if trace.applied_power is not None:
        n_p = photon_number(params, trace.applied_power, trace.line_attenuation)
    else:
        n_p = math.nan
    return ResonanceFit(params, qi_from_fit(params.q_l, params.q_c_mag), cov, rms, n_p, ok, iters)


def _bootstrap_cov(trace, params, n_boot, seed, max_iter, ftol):
    rng = np.random.default_rng(seed)
    model = evaluate_s21(params, trace.freqs)
    resid = trace.values - model
    draws = []
    for _ in range(n_boot):
        sample = model + resid[rng.integers(0, len(resid), len(resid))]
        t = S21Trace(trace.freqs, sample)
        try:
            fit = fit_s21(t, init=params, max_iter=max_iter, ftol=ftol)
        except (FitConvergenceError, FitInitError, DomainError):
            continue
        draws.append(fit.params.as_array())
    if len(draws) < 2:
        return np.full((6, 6), np.nan)
    return np.cov(np.array(draws).T)
