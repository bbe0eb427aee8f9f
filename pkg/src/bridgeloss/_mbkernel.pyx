# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Mattis-Bardeen quadrature kernels.

Same algorithm as ``_mbkernel_py``: transformed integrands, 15-point
Gauss-Kronrod panels, bisection of the worst panel until the summed
|K15 - G7| estimate drops below ``rtol * |I|``.
"""

from libc.math cimport acosh, cos, cosh, exp, expm1, fabs, log, log1p, sinh, sqrt, tanh

cdef double[8] XGK = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
]
cdef double[8] WGK = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
]
cdef double[4] WG = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
]

cdef enum:
    MAX_PANELS = 400
cdef double LN2 = log(2.0)
cdef double PI = 3.14159265358979323846
TAIL_KT = 45.0
cdef double _TAIL_KT = 45.0


cdef inline double _log_cosh(double x) nogil:
    x = fabs(x)
    return x + log1p(exp(-2.0 * x)) - LN2


cdef inline double _log_sinh(double x) nogil:
    return x + log(-expm1(-2.0 * x)) - LN2


cpdef double fermi(double x):
    """Occupation 1/(1+exp(x)) with x = eps/(k_B T), clamped beyond |x|>700."""
    cdef double t
    if x > 700.0:
        return 0.0
    if x < -700.0:
        return 1.0
    if x >= 0.0:
        t = exp(-x)
        return t / (1.0 + t)
    return 1.0 / (1.0 + exp(x))


cdef inline double _fermi_diff(double a, double b, double kt) nogil:
    cdef double x, y, lv
    if kt <= 0.0:
        return 0.0
    x = a / kt
    y = b / kt
    lv = _log_sinh(0.5 * (y - x)) - _log_cosh(0.5 * x) - _log_cosh(0.5 * y)
    if lv < -745.0:
        return 0.0
    return 0.5 * exp(lv)


def fermi_diff(double a, double b, double kt):
    """f(a) - f(b) for 0 < a < b, evaluated in log space."""
    return _fermi_diff(a, b, kt)


cdef inline double _integrand(int which, double x, double gap, double kt, double hf) nogil:
    cdef double eps, e2, s, lower, root, c, occ
    if which == 1:
        eps = gap * cosh(x)
        e2 = eps + hf
        s = sinh(0.5 * x)
        lower = 2.0 * gap * s * s + hf
        root = sqrt(lower * (e2 + gap))
        return _fermi_diff(eps, e2, kt) * (1.0 + gap * gap / (eps * e2)) * eps * e2 / root
    c = cos(x)
    eps = gap - 0.5 * hf - 0.5 * hf * c
    e2 = eps + hf
    if kt > 0.0:
        occ = tanh(0.5 * e2 / kt)
    else:
        occ = 1.0
    return occ * (eps * e2 + gap * gap) / (sqrt(gap + eps) * sqrt(e2 + gap))


cdef void _gk15(int which, double a, double b, double gap, double kt, double hf,
                double* val, double* err) nogil:
    cdef double center = 0.5 * (a + b)
    cdef double half = 0.5 * (b - a)
    cdef double fc = _integrand(which, center, gap, kt, hf)
    cdef double res_k = fc * WGK[7]
    cdef double res_g = fc * WG[3]
    cdef double dx, fsum
    cdef int j
    for j in range(7):
        dx = half * XGK[j]
        fsum = _integrand(which, center - dx, gap, kt, hf) + _integrand(which, center + dx, gap, kt, hf)
        res_k += WGK[j] * fsum
        if j % 2 == 1:
            res_g += WG[j // 2] * fsum
    res_k *= half
    res_g *= half
    val[0] = res_k
    err[0] = fabs(res_k - res_g)


cdef int _adaptive(int which, double a, double b, int n_init, double gap, double kt,
                   double hf, double rtol, double* total_out, double* err_out) nogil:
    # Panels kept in left-to-right order, matching the list-based Python version.
    cdef double lo[MAX_PANELS]
    cdef double hi[MAX_PANELS]
    cdef double vals[MAX_PANELS]
    cdef double errs[MAX_PANELS]
    cdef int n = 0
    cdef int i, worst
    cdef double width = (b - a) / n_init
    cdef double total, total_err, mid, v1, e1, v2, e2
    for i in range(n_init):
        lo[i] = a + i * width
        hi[i] = b if i == n_init - 1 else lo[i] + width
        _gk15(which, lo[i], hi[i], gap, kt, hf, &vals[i], &errs[i])
    n = n_init
    while True:
        total = 0.0
        total_err = 0.0
        worst = 0
        for i in range(n):
            total += vals[i]
            total_err += errs[i]
            if errs[i] > errs[worst]:
                worst = i
        total_out[0] = total
        err_out[0] = total_err
        if total_err <= rtol * fabs(total) or total_err == 0.0:
            return 1
        if n >= MAX_PANELS:
            return 0
        mid = 0.5 * (lo[worst] + hi[worst])
        if not (lo[worst] < mid < hi[worst]):
            return 0
        _gk15(which, lo[worst], mid, gap, kt, hf, &v1, &e1)
        _gk15(which, mid, hi[worst], gap, kt, hf, &v2, &e2)
        for i in range(n, worst + 1, -1):
            lo[i] = lo[i - 1]
            hi[i] = hi[i - 1]
            vals[i] = vals[i - 1]
            errs[i] = errs[i - 1]
        lo[worst + 1] = mid
        hi[worst + 1] = hi[worst]
        vals[worst + 1] = v2
        errs[worst + 1] = e2
        hi[worst] = mid
        vals[worst] = v1
        errs[worst] = e1
        n += 1


def sigma1_integral(double gap, double kt, double hf, double rtol):
    """sigma1/sigma_n for gap, k_B*T, h*f in joules.

    Returns ``(value, error_estimate, converged)``.
    """
    cdef double val, err, umax, scale
    cdef int ok
    if kt <= 0.0:
        return 0.0, 0.0, True
    umax = acosh(1.0 + _TAIL_KT * kt / gap)
    with nogil:
        ok = _adaptive(1, 0.0, umax, 4, gap, kt, hf, rtol, &val, &err)
    scale = 2.0 / hf
    return val * scale, err * scale, bool(ok)


def sigma2_integral(double gap, double kt, double hf, double rtol):
    """sigma2/sigma_n for gap, k_B*T, h*f in joules (requires hf < 2*gap).

    Returns ``(value, error_estimate, converged)``.
    """
    cdef double val, err
    cdef int ok
    with nogil:
        ok = _adaptive(2, 0.0, PI, 2, gap, kt, hf, rtol, &val, &err)
    return val / hf, err / hf, bool(ok)
