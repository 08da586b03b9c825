import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def brute_dft(z):
    """O(n^2) direct-sum DFT along the last axis."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    k = np.arange(n)
    return z @ np.exp(-2j * np.pi * np.outer(k, k) / n)


def finite_diff(f, x, step=1e-6):
    """Central differences of a scalar numpy function."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + step
        hi = f(x)
        x[i] = old - step
        lo = f(x)
        x[i] = old
        g[i] = (hi - lo) / (2 * step)
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- acceptance criteria reporting ------------------------------------------

_CRITERIA: dict[str, dict] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    entry = _CRITERIA.setdefault(report.nodeid, {"passed": True})
    entry.update(props)
    if report.failed:
        entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for entry in sorted(_CRITERIA.values(), key=lambda e: e["criterion"]):
        status = "PASS" if entry["passed"] else "FAIL"
        detail = entry.get("detail", "")
        terminalreporter.write_line(f"criterion {entry['criterion']:>2} {status}: {entry['title']}"
                                    + (f" | {detail}" if detail else ""))
