"""Backend selection for the hot kernels.

The compiled extension is used when it imports; setting the environment
variable ``THREEWAVE_PURE_PYTHON=1`` forces the numpy fallback.  Both expose
``sncndn``, ``sturm_count``, ``bisect_eigenvalues`` and ``threewave_dopri5``.
The generic callback integrator ``dopri5`` always comes from the fallback.
"""
import os

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("THREEWAVE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_backend  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend

BACKEND: str = _impl.BACKEND
sncndn = _impl.sncndn
sturm_count = _impl.sturm_count
bisect_eigenvalues = _impl.bisect_eigenvalues
threewave_dopri5 = _impl.threewave_dopri5
dopri5 = python_backend.dopri5

__all__ = ["BACKEND", "sncndn", "sturm_count", "bisect_eigenvalues",
           "threewave_dopri5", "dopri5", "python_backend", "compiled_backend"]
