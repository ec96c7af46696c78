ACCEPTANCE: dict[int, str] = {}


def record(num: int, name: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[num] = f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[num])
