"""Backend selection for the Mattis-Bardeen quadrature kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module with the same algorithm takes over. Set ``BRIDGELOSS_PURE_PYTHON=1``
to force the fallback.
"""

import os

from . import _mbkernel_py

if os.environ.get("BRIDGELOSS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _mbkernel_py
else:
    try:
        from . import _mbkernel as _impl
    except ImportError:  # extension not built
        _impl = _mbkernel_py

BACKEND = "cython" if _impl is not _mbkernel_py else "python"

fermi = _impl.fermi
fermi_diff = _impl.fermi_diff
sigma1_integral = _impl.sigma1_integral
sigma2_integral = _impl.sigma2_integral
