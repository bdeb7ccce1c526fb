import pytest

from wmavmd import NoiseSpec, generate, inter_station_profile, train_model

HOUR = 3600.0


@pytest.fixture(scope="session")
def hour_profile():
    return inter_station_profile(HOUR, 0.1)


@pytest.fixture(scope="session")
def training_trace(hour_profile):
    return generate(hour_profile, NoiseSpec(0.3, 0.8, 0.5, seed=1))


@pytest.fixture(scope="session")
def validation_trace(hour_profile):
    return generate(hour_profile, NoiseSpec(0.3, 0.8, 0.5, seed=2))


@pytest.fixture(scope="session")
def model_w13(training_trace):
    return train_model(training_trace, [1, 2, 3])


_ACCEPTANCE = {}


class AcceptanceRecorder:
    """Collects one pass/fail line per acceptance criterion."""

    def __init__(self, capsys_manager):
        self._capture = capsys_manager

    def __call__(self, number, ok, detail):
        line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}: {detail}"
        _ACCEPTANCE[number] = line
        with self._capture.global_and_fixture_disabled():
            print("\n" + line)
        return ok


@pytest.fixture
def acceptance(request):
    return AcceptanceRecorder(request.config.pluginmanager.getplugin("capturemanager"))


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
