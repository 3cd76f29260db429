import pytest

from qasfg import build_design


@pytest.fixture(scope="session")
def design_dk():
    """Mismatch-error-optimal 1 mm design (shared; building is deterministic)."""
    return build_design(1e-3, target="deltak")


@pytest.fixture(scope="session")
def design_k():
    """Coupling-error-optimal 1 mm design."""
    return build_design(1e-3, target="kappa")
