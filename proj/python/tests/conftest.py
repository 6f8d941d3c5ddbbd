import pytest

try:
    import oambackhaul  # noqa: F401
except ImportError:
    pytest.exit("oambackhaul is not installed (pip install --no-build-isolation -e .)", returncode=77)
