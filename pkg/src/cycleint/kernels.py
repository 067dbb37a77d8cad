"""Backend selection for the hot loops.

The compiled extension is used when importable, otherwise the numpy
fallback.  ``use_backend`` switches explicitly (tests and benchmarks).
"""

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

_active = _BACKENDS.get("compiled", _pykernels)


def available_backends():
    return sorted(_BACKENDS)


def backend_name():
    return "compiled" if _active is _ckernels and _ckernels is not None else "python"


def use_backend(name):
    """Select ``"compiled"`` or ``"python"``; returns the previous name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    prev = backend_name()
    _active = _BACKENDS[name]
    return prev


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def _f(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def eval_atoms(coeff, ypow, alpha, beta, z):
    z = np.asarray(z, dtype=np.complex128)
    return _active.eval_atoms(_c(coeff), _f(ypow), _c(alpha), _c(beta), z)


def lattice_block(z, weight, coeff, ypow, cmax, dmax):
    z = np.asarray(z, dtype=np.complex128)
    return _active.lattice_block(z, int(weight), _c(coeff), _f(ypow), int(cmax), int(dmax))


def coset_sum(z, weight, coeff, ypow, alpha, beta, pairs):
    z = np.asarray(z, dtype=np.complex128)
    pairs = np.ascontiguousarray(pairs, dtype=np.int64)
    return _active.coset_sum(z, int(weight), _c(coeff), _f(ypow), _c(alpha), _c(beta), pairs)
