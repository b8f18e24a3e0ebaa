import pytest

import recorder
from landauer_ann import dissipation


@pytest.fixture(autouse=True, scope="session")
def _watch_transition_records():
    original = dissipation._record

    def watched(*args, **kwargs):
        rec = original(*args, **kwargs)
        recorder.records_seen["count"] += 1
        gap = abs(rec.h_x_given_y - (rec.h_x - rec.h_y))
        recorder.records_seen["worst"] = max(recorder.records_seen["worst"], gap)
        return rec

    dissipation._record = watched
    yield
    dissipation._record = original


def pytest_terminal_summary(terminalreporter):
    if not recorder.results:
        return
    seen = recorder.records_seen
    if 2 in recorder.results and seen["count"]:
        ok = recorder.results[2][0] and seen["worst"] <= 1e-9
        recorder.results[2] = (ok, f"{seen['count']} records over the session, worst |gap| {seen['worst']:.3g}")
    terminalreporter.section("acceptance criteria")
    for n, name in recorder.CRITERIA.items():
        if n not in recorder.results:
            terminalreporter.write_line(f"criterion {n:2d} NOT RUN  {name}")
            continue
        passed, detail = recorder.results[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if passed else 'FAIL'}  {name}: {detail}")
