import pytest

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


class _Recorder:
    def __call__(self, number: int, title: str, ok: bool, detail: str = "") -> bool:
        _ACCEPTANCE[number] = (title, bool(ok), detail)
        print(f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}  {detail}")
        return ok


@pytest.fixture(scope="session")
def criterion():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(
            f"{number:2d}. {'PASS' if ok else 'FAIL'}  {title}  {detail}")
