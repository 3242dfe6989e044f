"""Kernel backend selection.

The compiled extension is used when it imports; set ``FAIRSHARE_PURE_PYTHON=1`` to
force the numpy fallback. Both backends expose the same functions.
"""

import os

from . import _pykernels as python_backend
from .errors import ProxConvergenceError  # noqa: F401

compiled_backend = None
if os.environ.get("FAIRSHARE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

positive_root = backend.positive_root
positive_roots = backend.positive_roots
project_simplex = backend.project_simplex
project_segments = backend.project_segments
prox_segments = backend.prox_segments
prox_l1 = backend.prox_l1
prox_l1_segments = backend.prox_l1_segments

