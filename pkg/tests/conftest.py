import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE: dict = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record_criterion(request):
    """Register a criterion's outcome for the end-of-run PASS/FAIL listing."""

    def record(number: int, title: str, residual: float, tol: float) -> bool:
        ok = bool(np.isfinite(residual) and residual <= tol)
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}  {title:<44s} residual={residual:.3e}  tol={tol:.1e}"
        _ACCEPTANCE.setdefault(number, []).append((ok, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        for _, line in _ACCEPTANCE[number]:
            terminalreporter.write_line(line)
    n_ok = sum(all(ok for ok, _ in v) for v in _ACCEPTANCE.values())
    terminalreporter.write_line(f"{n_ok}/{len(_ACCEPTANCE)} criteria passed")
