"""Loss-vs-temperature and loss-vs-power sweep analysis.

Temperature sweeps are fitted with the two-material participation model
(linear in ``p`` and ``q_other_inv``, solved as bounded linear least
squares). Power sweeps are decomposed into a saturable TLS term and a
power-independent floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .conductivity import SuperconductorParams
from .loss_models import PowerLossModel, quasiparticle_loss

AXES = ("temperature", "photon_number")
FIT_T_MIN = 0.4  # K; below this TLS temperature dependence dominates


class AlignmentError(ValueError):
    """Two sweeps share no common abscissa range."""


class InsufficientDataError(ValueError):
    """Too few points (or too narrow a span) to constrain the fit."""


@dataclass(frozen=True)
class LossSweep:
    """A Q_i^-1 series against temperature (K) or mean photon number.

    Difference sweeps (from :func:`delta_qi`) may contain zero or negative
    values; ordinary sweeps must be strictly positive.
    """

    axis: str
    x: np.ndarray
    q_inv: np.ndarray
    sigma: np.ndarray | None = None
    n_ab: int | None = None
    f_r: float = 6e9
    is_difference: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        x = np.asarray(self.x, dtype=float)
        q = np.asarray(self.q_inv, dtype=float)
        if x.shape != q.shape or x.ndim != 1:
            raise ValueError("x and q_inv must be 1-D arrays of equal length")
        if len(x) > 1 and not np.all(np.diff(x) > 0):
            raise ValueError("x values must be strictly increasing")
        if not self.is_difference and np.any(q <= 0):
            raise ValueError("q_inv values must be positive")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "q_inv", q)
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float)
            if s.shape != x.shape or np.any(s <= 0):
                raise ValueError("sigma must be positive and match x")
            object.__setattr__(self, "sigma", s)

    def __len__(self):
        return len(self.x)


@dataclass
class ParticipationFit:
    p: float
    q_other_inv: float
    residual_rms: float
    covariance: np.ndarray
    n_points: int
    n_ab: int | None = None

    @property
    def p_err(self):
        return math.sqrt(max(self.covariance[0, 0], 0.0))

    @property
    def q_other_err(self):
        return math.sqrt(max(self.covariance[1, 1], 0.0))

    def as_row(self):
        return dict(n_ab=self.n_ab, p=self.p, p_err=self.p_err, q_other_inv=self.q_other_inv,
                    q_other_err=self.q_other_err, residual_rms=self.residual_rms,
                    n_points=self.n_points)


def delta_qi(sweep_n: LossSweep, sweep_0: LossSweep) -> LossSweep:
    """Subtract the bridge-free baseline from ``sweep_n``.

    The baseline is interpolated linearly in log10(Q^-1) against T onto the
    points of ``sweep_n`` that fall inside the baseline's range.
    """
    if sweep_n.axis != "temperature" or sweep_0.axis != "temperature":
        raise ValueError("delta_qi needs temperature-axis sweeps")
    if sweep_0.is_difference:
        raise ValueError("baseline sweep must not itself be a difference")
    lo = max(sweep_n.x[0], sweep_0.x[0])
    hi = min(sweep_n.x[-1], sweep_0.x[-1])
    keep = (sweep_n.x >= lo) & (sweep_n.x <= hi)
    if hi < lo or not keep.any():
        raise AlignmentError("sweeps have no overlapping temperature range")
    t = sweep_n.x[keep]
    base = 10.0 ** np.interp(t, sweep_0.x, np.log10(sweep_0.q_inv))
    # grid points shared with the baseline are taken exactly
    idx = np.searchsorted(sweep_0.x, t)
    idx = np.minimum(idx, len(sweep_0.x) - 1)
    exact = sweep_0.x[idx] == t
    base[exact] = sweep_0.q_inv[idx[exact]]
    sigma = None
    if sweep_n.sigma is not None:
        sigma = sweep_n.sigma[keep]
        if sweep_0.sigma is not None:
            sigma = np.hypot(sigma, np.interp(t, sweep_0.x, sweep_0.sigma))
    return LossSweep("temperature", t, sweep_n.q_inv[keep] - base, sigma, sweep_n.n_ab,
                     sweep_n.f_r, is_difference=True, meta=dict(sweep_n.meta))


def _fit_window(sweep, trace_mat, bridge_mat, t_min):
    if sweep.axis != "temperature":
        raise ValueError("participation fits need a temperature-axis sweep")
    t_max = min(trace_mat.tc, bridge_mat.tc)
    keep = (sweep.x >= t_min) & (sweep.x < t_max)
    if keep.sum() < 3:
        raise InsufficientDataError(
            f"need at least 3 points in [{t_min}, {t_max:.3g}) K, got {int(keep.sum())}")
    return keep


def _design(sweep, keep, trace_mat, bridge_mat, gap_model):
    t = sweep.x[keep]
    q_tr = np.array([quasiparticle_loss(trace_mat, T, sweep.f_r, gap_model) for T in t])
    q_br = np.array([quasiparticle_loss(bridge_mat, T, sweep.f_r, gap_model) for T in t])
    y = sweep.q_inv[keep] if sweep.is_difference else sweep.q_inv[keep] - q_tr
    return q_br - q_tr, y


def fit_participation(sweep: LossSweep, trace_mat: SuperconductorParams,
                      bridge_mat: SuperconductorParams, t_min=FIT_T_MIN,
                      gap_model="interpolation") -> ParticipationFit:
    """Fit bridge participation ``p`` and constant loss to a temperature sweep.

    For a difference sweep the trace-material term is already removed, so
    the model is ``p (Q_bridge^-1 - Q_trace^-1) + c`` with ``c`` unbounded.
    """
    keep = _fit_window(sweep, trace_mat, bridge_mat, t_min)
    col, y = _design(sweep, keep, trace_mat, bridge_mat, gap_model)
    a = np.column_stack([col, np.ones_like(col)])
    w = 1.0 / sweep.sigma[keep] if sweep.sigma is not None else np.ones_like(y)
    lower = [0.0, -np.inf if sweep.is_difference else 0.0]
    upper = [1.0, np.inf]
    coef, aw = _solve(a, y, w, lower, upper)
    return _report(coef, a, aw, y, w, sweep.sigma is not None, sweep.n_ab)


def _solve(a, y, w, lower, upper):
    aw = a * w[:, None]
    yw = y * w
    # normalise columns and target so the solver works on O(1) numbers
    cs = np.linalg.norm(aw, axis=0)
    cs[cs == 0] = 1.0
    ys = np.abs(yw).max() or 1.0
    lo = np.asarray(lower, float) * cs / ys
    hi = np.asarray(upper, float) * cs / ys
    res = optimize.lsq_linear(aw / cs, yw / ys, bounds=(lo, hi), method="bvls", tol=1e-15)
    return res.x / cs * ys, aw


def _report(coef, a, aw, y, w, weighted, n_ab, n_groups=1):
    model = a @ coef
    resid = model - y
    n = len(y)
    rms = math.sqrt(float(np.mean(resid**2)))
    info = aw.T @ aw
    cov = np.linalg.pinv(info)
    if not weighted:
        dof = max(n - len(coef), 1)
        cov = cov * float(np.sum((resid * w) ** 2)) / dof
    return ParticipationFit(float(coef[0]), float(coef[1]), rms, cov, n, n_ab)


def fit_participation_shared(sweeps, trace_mat, bridge_mat, t_min=FIT_T_MIN,
                             gap_model="interpolation"):
    """Joint fit with one ``p`` per sweep and a single shared constant loss.

    Returns one :class:`ParticipationFit` per input sweep; all carry the same
    ``q_other_inv``.
    """
    blocks = []
    for s in sweeps:
        keep = _fit_window(s, trace_mat, bridge_mat, t_min)
        col, y = _design(s, keep, trace_mat, bridge_mat, gap_model)
        w = 1.0 / s.sigma[keep] if s.sigma is not None else np.ones_like(y)
        blocks.append((col, y, w))
    k = len(blocks)
    rows = sum(len(b[1]) for b in blocks)
    a = np.zeros((rows, k + 1))
    y = np.empty(rows)
    w = np.empty(rows)
    r0 = 0
    for i, (col, yi, wi) in enumerate(blocks):
        r1 = r0 + len(yi)
        a[r0:r1, i] = col
        a[r0:r1, k] = 1.0
        y[r0:r1] = yi
        w[r0:r1] = wi
        r0 = r1
    diff = any(s.is_difference for s in sweeps)
    lower = [0.0] * k + [-np.inf if diff else 0.0]
    upper = [1.0] * k + [np.inf]
    coef, aw = _solve(a, y, w, lower, upper)
    weighted = all(s.sigma is not None for s in sweeps)
    resid = a @ coef - y
    info_cov = np.linalg.pinv(aw.T @ aw)
    if not weighted:
        info_cov *= float(np.sum((resid * w) ** 2)) / max(rows - k - 1, 1)
    out = []
    r0 = 0
    for i, (s, (col, yi, wi)) in enumerate(zip(sweeps, blocks)):
        r1 = r0 + len(yi)
        rms = math.sqrt(float(np.mean(resid[r0:r1] ** 2)))
        idx = [i, k]
        out.append(ParticipationFit(float(coef[i]), float(coef[k]), rms,
                                    info_cov[np.ix_(idx, idx)], len(yi), s.n_ab))
        r0 = r1
    return out


def predicted_curve(fit: ParticipationFit, sweep: LossSweep, trace_mat, bridge_mat,
                    gap_model="interpolation"):
    """Model Q_i^-1 on the sweep's temperature grid (points below both Tc)."""
    t_max = min(trace_mat.tc, bridge_mat.tc)
    t = sweep.x[sweep.x < t_max]
    q_tr = np.array([quasiparticle_loss(trace_mat, T, sweep.f_r, gap_model) for T in t])
    q_br = np.array([quasiparticle_loss(bridge_mat, T, sweep.f_r, gap_model) for T in t])
    q = fit.p * (q_br - q_tr) + fit.q_other_inv
    if not sweep.is_difference:
        q = q + q_tr
    return t, q


# -- power sweeps -----------------------------------------------------------------


def _power_model(theta, n):
    q0, log_nc, beta, qc = theta
    return q0 / (1.0 + n / 10.0**log_nc) ** (0.5 * beta) + qc


def fit_power_sweep(sweep: LossSweep, min_decades=4.0) -> PowerLossModel:
    """Decompose a loss-vs-photon-number sweep into TLS and constant parts.

    Bounded nonlinear least squares over ``(q_tls0_inv, log10 n_c, beta,
    q_const_inv)`` from a fixed grid of starting points; relative residuals
    unless per-point uncertainties are given.
    """
    if sweep.axis != "photon_number":
        raise ValueError("power-sweep fits need a photon_number-axis sweep")
    n = sweep.x
    y = sweep.q_inv
    pos = n[n > 0]
    if len(n) < 5 or len(pos) < 2 or math.log10(pos[-1] / pos[0]) < min_decades:
        raise InsufficientDataError(f"power sweep must span at least {min_decades:g} decades "
                                    f"with 5 or more points")
    ys = float(np.max(y))
    yn = y / ys
    wt = ys / sweep.sigma if sweep.sigma is not None else 1.0 / yn

    def resid(th):
        return (_power_model(th, n) - yn) * wt

    lo_nc = math.log10(pos[0]) - 3.0
    hi_nc = math.log10(pos[-1]) + 1.0
    lower = [0.0, lo_nc, 1e-3, 0.0]
    upper = [np.inf, hi_nc, 2.0, np.inf]
    best = None
    floor = float(yn.min())
    for log_nc in np.linspace(lo_nc + 1.0, hi_nc - 1.0, 5):
        for beta in (0.3, 1.0):
            for qc_frac in (0.1, 0.9):
                th0 = [max(yn[0] - qc_frac * floor, 1e-6), log_nc, beta, qc_frac * floor]
                th0 = np.clip(th0, lower, [1e6, hi_nc, 2.0, 1e6])
                res = optimize.least_squares(resid, th0, bounds=(lower, upper), method="trf",
                                             xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=500)
                if best is None or res.cost < best.cost - 1e-15 * max(best.cost, 1e-300):
                    best = res
    q0, log_nc, beta, qc = best.x
    return PowerLossModel(q_tls0_inv=float(q0 * ys), n_c=float(10.0**log_nc),
                          beta=float(beta), q_const_inv=float(qc * ys))
