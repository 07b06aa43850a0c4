import pytest

from lindiseq.ring import GroupParams


@pytest.fixture
def z2sq():
    return GroupParams(2, 1, 2)


_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: one of the ten acceptance criteria")


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    title = props["criterion"]
    failed = report.failed or (report.when == "call" and report.skipped)
    if failed or title not in _criteria:
        _criteria[title] = "FAIL" if failed else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for title in sorted(_criteria, key=lambda t: int(t.split()[0])):
        terminalreporter.write_line(f"{_criteria[title]}  criterion {title}")
