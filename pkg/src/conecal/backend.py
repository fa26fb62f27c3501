"""Kernel backend selection.

At import time the compiled extension (``conecal._speedups``) is preferred;
the pure-Python twin (``conecal._pykernels``) is the fallback.  Set the
environment variable ``CONECAL_BACKEND`` to ``python`` or ``compiled`` to
force a choice (forcing ``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _pykernels

_forced = os.environ.get("CONECAL_BACKEND", "").strip().lower()

if _forced in ("python", "pure"):
    _impl = _pykernels
elif _forced in ("", "compiled"):
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        if _forced == "compiled":
            raise
        _impl = _pykernels
else:
    raise RuntimeError(f"unknown CONECAL_BACKEND value {_forced!r}")

NAME: str = _impl.BACKEND_NAME

field_batch = _impl.field_batch
field_divergence_fd = _impl.field_divergence_fd
maxflow_dinic = _impl.maxflow_dinic
maxflow_shortest_aug = _impl.maxflow_shortest_aug
residual_reachable = _impl.residual_reachable


def available_backends() -> dict[str, object]:
    """Importable kernel modules keyed by name (for benchmarks and tests)."""
    impls: dict[str, object] = {"python": _pykernels}
    try:
        from . import _speedups

        impls["compiled"] = _speedups
    except ImportError:
        pass
    return impls
