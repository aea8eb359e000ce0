import pytest

from sodp_chf.synth import SynthSpec, generate_cohort

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record a named acceptance check; lines are printed in the terminal summary."""

    def check(name, ok, detail=""):
        _CRITERIA.append((name, "PASS" if ok else "FAIL", detail))
        assert ok, f"{name}: {detail}"

    def skip(name, reason):
        _CRITERIA.append((name, "SKIP", reason))
        pytest.skip(reason)

    check.skip = skip
    return check


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in _CRITERIA:
        terminalreporter.write_line(f"[{status}] {name}" + (f" ({detail})" if detail else ""))


@pytest.fixture(scope="session")
def small_cohort(tmp_path_factory):
    """3 + 3 subjects, 2-minute records; cheap end-to-end fixture."""
    out = tmp_path_factory.mktemp("small_cohort")
    spec = SynthSpec(n_normal=3, n_chf=3, duration_s=120.0)
    manifest = generate_cohort(spec, out)
    return out, manifest
