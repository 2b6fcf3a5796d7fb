"""Kernel backend selection.

``MEANINEQ_BACKEND=numpy`` forces the pure-numpy kernels, ``=numba`` requires
the jitted ones, unset (or ``auto``) prefers numba when it imports.  The
chosen module is exposed as ``kernels``; both backends share signatures.
"""

import os
import warnings

_choice = os.environ.get("MEANINEQ_BACKEND", "auto").strip().lower() or "auto"
if _choice not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"MEANINEQ_BACKEND={_choice!r} not understood (use 'numba', 'numpy' or unset)"
    )

if _choice == "numpy":
    from . import _kernels_numpy as kernels
else:
    try:
        from . import _kernels_numba as kernels
    except ImportError as exc:
        if _choice == "numba":
            raise RuntimeError("MEANINEQ_BACKEND=numba but numba is not importable") from exc
        warnings.warn("numba unavailable, falling back to pure-numpy kernels", stacklevel=1)
        from . import _kernels_numpy as kernels

BACKEND = kernels.NAME


def backend_name() -> str:
    return BACKEND


def warmup() -> None:
    """Run every kernel once on tiny inputs (triggers JIT compilation)."""
    import numpy as np

    lam = np.array([0.5, 0.5])
    x = np.array([[1.0, 2.0]])
    kernels.gini_mean_batch(2.0, 1.0, lam, x)
    kernels.gini_mean_batch(1.0, 1.0, lam, x)
    kernels.power_mean_batch(2.0, lam, x)
    kernels.power_mean_batch(0.0, lam, x)
    kernels.chi_batch(2.0, 1.0, np.array([1.5]))
    kernels.chi_batch(1.0, 1.0, np.array([1.5]))
    kernels.eigvals_sym_batch(np.array([[[2.0, -1.0], [-1.0, 2.0]]]))
    rs = np.array([[1.0, 0.0], [2.0, 0.0], [2.0, 0.0]])
    lams = np.vstack([lam, lam, lam])
    xx = np.array([[[1.0, 2.0], [3.0, 4.0]]])
    kernels.deficiency_gini_batch(0, rs, lams, xx)
    kernels.deficiency_gini_batch(1, rs, lams, xx)
    kernels.classify_shifted_batch(
        np.array([-1.0]), np.array([[3.0, 3.0]]), 1e-12, 1e-12
    )


def worker_cap() -> int | None:
    """Parallelism cap requested through MEANINEQ_THREADS, if any."""
    raw = os.environ.get("MEANINEQ_THREADS")
    if not raw:
        return None
    try:
        cap = int(raw)
    except ValueError:
        return None
    return cap if cap >= 1 else None


def apply_thread_cap() -> None:
    """Bound the numba threading layer by MEANINEQ_THREADS when applicable."""
    cap = worker_cap()
    if cap is None or BACKEND != "numba":
        return
    try:
        import numba

        numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))
    except Exception:  # pragma: no cover - threading layer quirks
        pass
