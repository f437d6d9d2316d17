"""Hot numeric kernels: numba-compiled with a pure-numpy fallback.

The dual coordinate descent epoch is sequential per example (each update feeds
the next through ``w``), so it cannot be vectorized; numba compiles the loop.
Set ``SNOWSUM_PURE_NUMPY=1`` before import to force the numpy path, or call
``set_backend`` at runtime (used by the benchmark and the backend-agreement
test). Both paths implement identical update order, so they agree to floating
point rounding of the dot products.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only in numba-less installs
    HAVE_NUMBA = False

_ENV_FLAG = "SNOWSUM_PURE_NUMPY"

# Below this the projected gradient is treated as zero and no update is made;
# well under every supported tolerance.
_PG_EPS = 1e-12


def _dcd_epoch_numpy(X, y, alpha, w, qdiag, dii, order):
    max_viol = 0.0
    for i in order:
        g = y[i] * float(X[i] @ w) - 1.0 + dii * alpha[i]
        if alpha[i] == 0.0:
            pg = g if g < 0.0 else 0.0
        else:
            pg = g
        v = abs(pg)
        if v > max_viol:
            max_viol = v
        if v > _PG_EPS:
            a_new = alpha[i] - g / qdiag[i]
            if a_new < 0.0:
                a_new = 0.0
            w += ((a_new - alpha[i]) * y[i]) * X[i]
            alpha[i] = a_new
    return max_viol


if HAVE_NUMBA:

    @njit(cache=True)
    def _dcd_epoch_numba(X, y, alpha, w, qdiag, dii, order):  # pragma: no cover - compiled
        dim = X.shape[1]
        max_viol = 0.0
        for t in range(order.shape[0]):
            i = order[t]
            g = 0.0
            for j in range(dim):
                g += X[i, j] * w[j]
            g = y[i] * g - 1.0 + dii * alpha[i]
            if alpha[i] == 0.0:
                pg = g if g < 0.0 else 0.0
            else:
                pg = g
            v = abs(pg)
            if v > max_viol:
                max_viol = v
            if v > 1e-12:
                a_new = alpha[i] - g / qdiag[i]
                if a_new < 0.0:
                    a_new = 0.0
                scale = (a_new - alpha[i]) * y[i]
                for j in range(dim):
                    w[j] += scale * X[i, j]
                alpha[i] = a_new
        return max_viol

else:
    _dcd_epoch_numba = None


def _default_backend() -> str:
    if not HAVE_NUMBA:
        return "numpy"
    if os.environ.get(_ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on"):
        return "numpy"
    return "numba"


_BACKENDS = {"numpy": _dcd_epoch_numpy}
if HAVE_NUMBA:
    _BACKENDS["numba"] = _dcd_epoch_numba

_active_name = _default_backend()
_active = _BACKENDS[_active_name]


def set_backend(name: str):
    """Select the kernel implementation ("numba" or "numpy")."""
    global _active, _active_name
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {sorted(_BACKENDS)}")
    _active_name = name
    _active = _BACKENDS[name]


def active_backend() -> str:
    return _active_name


def dcd_epoch(X, y, alpha, w, qdiag, dii, order) -> float:
    """Run one seeded-shuffle epoch of dual coordinate descent in place.

    Arguments are float64 arrays (``order`` is int64 permutation indices);
    ``alpha`` and ``w`` are updated in place. Returns the maximal absolute
    projected-gradient violation seen this epoch.
    """
    return _active(X, y, alpha, w, qdiag, dii, order)
