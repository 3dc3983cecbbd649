"""Select the compiled kernels when available, else the numpy fallback."""
import os

from . import _pykernels

if os.environ.get("ADAPTIVE_CP_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

dft_direct = _impl.dft_direct
polyphase = _impl.polyphase
farrow = _impl.farrow
