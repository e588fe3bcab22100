"""Online control of unknown time-varying linear systems."""

try:
    # Wheel layout: the extension module is installed inside the package.
    from ._tvdac import *  # noqa: F401,F403
except ImportError:
    # In-tree build: the extension sits on sys.path next to the build dir.
    from _tvdac import *  # noqa: F401,F403

__version__ = "0.1.0"
