"""Backend selection for the PDHG loop.

The compiled ``_pdhg_ext`` is used when it imports and every operator is a
coded spec; a Python callable operator, a missing extension, or
``PENCON_FORCE_PYTHON=1`` selects the pure-Python loop.
"""
from __future__ import annotations

import os

from . import _pdhg_py

try:  # pragma: no cover - depends on the build
    from . import _pdhg_ext
except ImportError:  # pragma: no cover
    _pdhg_ext = None

FORCE_PYTHON = os.environ.get("PENCON_FORCE_PYTHON") == "1"


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _pdhg_ext is not None else [])


def default_backend() -> str:
    return "cython" if (_pdhg_ext is not None and not FORCE_PYTHON) else "python"


def run_pdhg(K, u, v, sigma, s, op_a, op_b, max_iter, tol, check_every=25, backend=None):
    """Dispatch to a backend; see ``pencon._pdhg_py`` for the contract."""
    backend = backend or default_backend()
    coded = not (callable(op_a[0]) or callable(op_b[0]))
    if backend == "cython" and coded:
        if _pdhg_ext is None:
            raise RuntimeError("compiled backend not built")
        return _pdhg_ext.run_pdhg(K, u, v, float(sigma), float(s), op_a, op_b,
                                  int(max_iter), float(tol), int(check_every))
    return _pdhg_py.run_pdhg(K, u, v, sigma, s, op_a, op_b, max_iter, tol, check_every)
