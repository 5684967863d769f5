"""Directional force-interaction analysis for dyadic recordings.

Thin wrapper around the compiled extension.  Installed wheels carry the
extension inside this package; in-tree builds leave it at the top of the
CMake build directory, which callers put on PYTHONPATH.
"""

try:
    from ._dyadflow import *  # noqa: F401,F403
    from ._dyadflow import __doc__ as __doc__  # noqa: F401
except ImportError:  # in-tree build: extension is a top-level module
    from _dyadflow import *  # type: ignore # noqa: F401,F403

__version__ = version()  # noqa: F405
