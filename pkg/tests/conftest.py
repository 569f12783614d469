"""Shared test configuration and the acceptance-criteria report.

Acceptance tests register one or more verdicts per criterion via
:func:`record`; a per-criterion pass/fail line is printed in the terminal
summary so the acceptance state is visible at a glance.
"""

import collections

_VERDICTS = collections.defaultdict(list)  # criterion number -> [(ok, detail)]
_LABELS = {}


def record(criterion: int, label: str, ok: bool, detail: str = "") -> bool:
    """Register one verdict for an acceptance criterion; returns ok."""
    _LABELS[criterion] = label
    _VERDICTS[criterion].append((bool(ok), detail))
    return ok


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _VERDICTS:
        return
    tr = terminalreporter
    tr.write_sep("=", "acceptance criteria")
    for num in sorted(_VERDICTS):
        verdicts = _VERDICTS[num]
        ok = all(v for v, _ in verdicts)
        status = "PASS" if ok else "FAIL"
        details = [d for v, d in verdicts if d and not v] or [d for v, d in verdicts if d]
        head = details[0] if details else ""
        if len(verdicts) > 1:
            head = f"{sum(v for v, _ in verdicts)}/{len(verdicts)} checks passed; {head}"
        tr.write_line(f"criterion {num:>2} [{status}] {_LABELS[num]}: {head}")
