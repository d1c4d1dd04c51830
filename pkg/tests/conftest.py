import pathlib
import sys

try:
    import signet  # noqa: F401
except ImportError:
    # Running from a source checkout without an install.
    sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))
