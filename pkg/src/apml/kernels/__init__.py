"""Hot numerical kernels with a compiled backend and a NumPy fallback.

The compiled extension is used when it imports; otherwise the pure NumPy
module is selected. ``use_backend`` switches temporarily, which the
benchmarks and parity tests rely on.
"""

from contextlib import contextmanager

import numpy as np

from . import _pure

try:
    from . import _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _pure}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = _compiled if _compiled is not None else _pure


def available_backends():
    return sorted(_BACKENDS)


def backend_name():
    return "compiled" if _active is _compiled and _compiled is not None else "python"


def set_backend(name):
    global _active
    try:
        _active = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available_backends()}") from None


@contextmanager
def use_backend(name):
    previous = backend_name()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def _float(a):
    a = np.asarray(a)
    if a.dtype not in (np.float32, np.float64):
        a = a.astype(np.float64)
    return np.ascontiguousarray(a)


def pairwise_distances(x, y, squared=False):
    x = _float(x)
    y = _float(y).astype(x.dtype, copy=False)
    return _active.pairwise_distances(x, y, bool(squared))


def adaptive_softmax_rows(c, p_min, delta, eps_gap):
    return _active.adaptive_softmax_rows(_float(c), float(p_min), float(delta), float(eps_gap))


def adaptive_softmax_cols(c, p_min, delta, eps_gap):
    return _active.adaptive_softmax_cols(_float(c), float(p_min), float(delta), float(eps_gap))


def sinkhorn(p, n_iter, eps_stab, keep_iterates=False):
    return _active.sinkhorn(_float(p), int(n_iter), float(eps_stab), bool(keep_iterates))
