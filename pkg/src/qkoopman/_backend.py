"""Kernel backend selection.

Hot loops are compiled with numba unless the environment variable
``QKM_BACKEND`` is set to ``numpy`` (or ``QKM_NUMBA=0``), in which case the
pure-numpy fallbacks in :mod:`qkoopman.kernels` are used.  ``QKM_THREADS``
caps the numba thread pool.
"""

import os


def _numba_requested() -> bool:
    backend = os.environ.get("QKM_BACKEND", "").strip().lower()
    if backend in ("numpy", "python", "fallback"):
        return False
    if os.environ.get("QKM_NUMBA", "").strip().lower() in ("0", "off", "false"):
        return False
    return True


NUMBA_ENABLED = False
if _numba_requested():
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    threads = os.environ.get("QKM_THREADS")
    if threads:
        try:
            import numba

            numba.set_num_threads(max(1, int(threads)))
        except (ValueError, RuntimeError):
            pass


def jit_kernel(func):
    """Compile ``func`` with numba when enabled, else return it unchanged."""
    if NUMBA_ENABLED:
        from numba import njit

        return njit(cache=True)(func)
    return func
