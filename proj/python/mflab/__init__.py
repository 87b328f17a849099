"""Mean-field jump process laboratory: python surface of the C++ core."""

try:
    from ._mflab import *  # noqa: F401,F403
    from . import _mflab as _impl  # noqa: F401
except ImportError:  # build-tree layout: extension sits next to the package dir
    from _mflab import *  # noqa: F401,F403
    import _mflab as _impl  # noqa: F401

__version__ = "0.1.0"
