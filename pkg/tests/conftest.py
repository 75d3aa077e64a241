import pytest

from storeroute.synthgen import GeneratorConfig, generate_dataset

_criteria: dict[str, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def default_ds():
    return generate_dataset(GeneratorConfig(n_queries=1000, seed=42))


@pytest.fixture(scope="session")
def default_test_ds(default_ds):
    return default_ds.select("test")


@pytest.fixture(scope="session")
def equal_ds():
    # 100 queries of each type: the equal mix with no rounding
    return generate_dataset(GeneratorConfig(n_queries=700, seed=7))


@pytest.fixture(scope="session")
def long_ds():
    return generate_dataset(GeneratorConfig(n_queries=70, seed=3, regime="long"))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    outcome = "PASS" if call.excinfo is None else "FAIL"
    _criteria[f"{number:>2}"] = (title, outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria, key=int):
        title, outcome = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {outcome}  {title}")
