import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wignerlim.quadform import QuadForm, make_form

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_pd(d: int, rng: np.random.Generator, cond_max: float = 20.0) -> QuadForm:
    """Random positive definite form, unit determinant, bounded condition number."""
    while True:
        m = rng.normal(size=(d, d))
        a = m @ m.T + 0.5 * np.eye(d)
        w = np.linalg.eigvalsh(a)
        if w[-1] / w[0] <= cond_max:
            return make_form(a / np.exp(np.mean(np.log(w))))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_criteria: dict[int, list] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    rep = outcome.get_result()
    number, title = mark.args[0], mark.args[1]
    entry = _criteria.setdefault(number, [title, "PASS", 0.0])
    if rep.when == "call":
        entry[2] += rep.duration
    if rep.failed:
        entry[1] = "FAIL"
    elif rep.skipped and entry[1] == "PASS":
        entry[1] = "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status, secs = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d}  {status}  {title}  ({secs:.1f} s)")
