"""Pure-Python Mattis-Bardeen quadrature kernels.

Reference backend, and the fallback used when the compiled extension
``_mbkernel`` is unavailable. The algorithm (integrand transforms, the
15-point Gauss-Kronrod rule, panel bisection order) is identical to the
Cython source so both backends agree to rounding.
"""

import math

_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)

_LN2 = math.log(2.0)
TAIL_KT = 45.0
MAX_PANELS = 400


def _log_cosh(x):
    x = abs(x)
    return x + math.log1p(math.exp(-2.0 * x)) - _LN2


def _log_sinh(x):
    # x > 0
    return x + math.log(-math.expm1(-2.0 * x)) - _LN2


def fermi(x):
    """Occupation 1/(1+exp(x)) with x = eps/(k_B T), clamped beyond |x|>700."""
    if x > 700.0:
        return 0.0
    if x < -700.0:
        return 1.0
    if x >= 0.0:
        t = math.exp(-x)
        return t / (1.0 + t)
    return 1.0 / (1.0 + math.exp(x))


def fermi_diff(a, b, kt):
    """f(a) - f(b) for 0 < a < b, evaluated in log space."""
    if kt <= 0.0:
        return 0.0
    x = a / kt
    y = b / kt
    lv = _log_sinh(0.5 * (y - x)) - _log_cosh(0.5 * x) - _log_cosh(0.5 * y)
    if lv < -745.0:
        return 0.0
    return 0.5 * math.exp(lv)


def _sigma1_integrand(u, gap, kt, hf):
    eps = gap * math.cosh(u)
    e2 = eps + hf
    s = math.sinh(0.5 * u)
    lower = 2.0 * gap * s * s + hf
    root = math.sqrt(lower * (e2 + gap))
    df = fermi_diff(eps, e2, kt)
    return df * (1.0 + gap * gap / (eps * e2)) * eps * e2 / root


def _sigma2_integrand(theta, gap, kt, hf):
    c = math.cos(theta)
    eps = gap - 0.5 * hf - 0.5 * hf * c
    e2 = eps + hf
    if kt > 0.0:
        occ = math.tanh(0.5 * e2 / kt)
    else:
        occ = 1.0
    return occ * (eps * e2 + gap * gap) / (math.sqrt(gap + eps) * math.sqrt(e2 + gap))


def _gk15(func, a, b, gap, kt, hf):
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = func(center, gap, kt, hf)
    res_k = fc * _WGK[7]
    res_g = fc * _WG[3]
    for j in range(7):
        dx = half * _XGK[j]
        fsum = func(center - dx, gap, kt, hf) + func(center + dx, gap, kt, hf)
        res_k += _WGK[j] * fsum
        if j % 2 == 1:
            res_g += _WG[j // 2] * fsum
    res_k *= half
    res_g *= half
    return res_k, abs(res_k - res_g)


def _adaptive(func, a, b, n_init, gap, kt, hf, rtol):
    panels = []
    width = (b - a) / n_init
    for i in range(n_init):
        lo = a + i * width
        hi = b if i == n_init - 1 else lo + width
        val, err = _gk15(func, lo, hi, gap, kt, hf)
        panels.append([lo, hi, val, err])
    while True:
        total = 0.0
        total_err = 0.0
        worst = 0
        for i, p in enumerate(panels):
            total += p[2]
            total_err += p[3]
            if p[3] > panels[worst][3]:
                worst = i
        if total_err <= rtol * abs(total) or total_err == 0.0:
            return total, total_err, True
        if len(panels) >= MAX_PANELS:
            return total, total_err, False
        lo, hi = panels[worst][0], panels[worst][1]
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            return total, total_err, False
        v1, e1 = _gk15(func, lo, mid, gap, kt, hf)
        v2, e2 = _gk15(func, mid, hi, gap, kt, hf)
        panels[worst] = [lo, mid, v1, e1]
        panels.insert(worst + 1, [mid, hi, v2, e2])


def sigma1_integral(gap, kt, hf, rtol):
    """sigma1/sigma_n for gap, k_B*T, h*f in joules.

    Returns ``(value, error_estimate, converged)``.
    """
    if kt <= 0.0:
        return 0.0, 0.0, True
    umax = math.acosh(1.0 + TAIL_KT * kt / gap)
    val, err, ok = _adaptive(_sigma1_integrand, 0.0, umax, 4, gap, kt, hf, rtol)
    scale = 2.0 / hf
    return val * scale, err * scale, ok


def sigma2_integral(gap, kt, hf, rtol):
    """sigma2/sigma_n for gap, k_B*T, h*f in joules (requires hf < 2*gap).

    Returns ``(value, error_estimate, converged)``.
    """
    val, err, ok = _adaptive(_sigma2_integrand, 0.0, math.pi, 2, gap, kt, hf, rtol)
    return val / hf, err / hf, ok
