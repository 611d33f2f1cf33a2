import sys

# When running from the build tree only the extension module is on the path;
# alias it so the tests read the same as against the installed package.
try:
    import oulc  # noqa: F401
except ImportError:
    import _oulc

    sys.modules["oulc"] = _oulc
