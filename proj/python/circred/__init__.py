"""Stochastic-correlation structural credit model."""

try:
    from ._circred import *  # noqa: F401,F403  (installed layout)
    from ._circred import __doc__ as _doc
except ImportError:  # in-tree build: extension on PYTHONPATH
    from _circred import *  # noqa: F401,F403
    from _circred import __doc__ as _doc

__doc__ = _doc
__version__ = "0.1.0"
