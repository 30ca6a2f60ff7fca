"""Collects acceptance verdicts and prints one line per criterion at the end of the run."""

ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def record(criterion: int, clause: str, ok: bool, detail: str = "") -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((clause, bool(ok), detail))
    print(f"criterion {criterion} [{clause}]: {'PASS' if ok else 'FAIL'} {detail}")
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        clauses = ACCEPTANCE[c]
        verdict = "PASS" if all(ok for _, ok, _ in clauses) else "FAIL"
        parts = "; ".join(f"{name}={'ok' if ok else 'FAIL'}{f' ({d})' if d else ''}" for name, ok, d in clauses)
        tr.write_line(f"criterion {c:>2}: {verdict}  {parts}")
