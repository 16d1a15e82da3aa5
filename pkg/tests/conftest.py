import pytest

from otterlab import toy

_acceptance_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): exit criterion number n")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is not None:
        _acceptance_results[crit] = _acceptance_results.get(crit, True) and report.passed


@pytest.fixture(autouse=True)
def _record_criterion(request):
    mark = request.node.get_closest_marker("acceptance")
    if mark:
        request.node.user_properties.append(("criterion", mark.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_acceptance_results):
        status = "PASS" if _acceptance_results[crit] else "FAIL"
        terminalreporter.write_line(f"criterion {crit}: {status}")


@pytest.fixture(scope="session")
def de_en():
    return toy.toy_de_en(200)


@pytest.fixture(scope="session")
def en_ar():
    return toy.toy_en_ar(200)


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        if isinstance(text, bytes):
            path.write_bytes(text)
        else:
            path.write_text(text, encoding="utf-8")
        return path
    return _write
