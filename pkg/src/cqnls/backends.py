"""Backend selection for the shooting classifier.

The compiled extension is preferred when importable; set CQNLS_PURE_PYTHON=1
to force the pure-Python twin (useful for benchmarking and for environments
without a compiler). Both backends implement the identical algorithm; see
benchmarks/bench_shooting.py for the speed comparison.
"""

import os

if os.environ.get("CQNLS_PURE_PYTHON"):
    from . import _shoot as _impl
    BACKEND = "python"
else:
    try:
        from . import _shootfast as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        from . import _shoot as _impl
        BACKEND = "python"

classify = _impl.classify
OVERSHOOT = _impl.OVERSHOOT
UNDERSHOOT = _impl.UNDERSHOOT
DECAYED = _impl.DECAYED
