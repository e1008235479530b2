"""Prints one PASS/FAIL line per acceptance criterion at the end of a run."""

_criteria: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    n = props["criterion"]
    if report.failed:
        crash = getattr(report.longrepr, "reprcrash", None)
        msg = crash.message.splitlines()[0] if crash is not None else str(report.longrepr)
        _criteria[n] = ("FAIL", msg)
    elif report.when == "call":
        _criteria[n] = ("PASS", props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        status, detail = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {detail}")
