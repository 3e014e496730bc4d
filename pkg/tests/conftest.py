import re

CRITERIA = {
    1: "werner closed-form suite",
    2: "pure-state suite",
    3: "discord equals eof identity",
    4: "qubit-qutrit family suite",
    5: "dominance and shared monotonicity",
    6: "gap curve peak and endpoint",
    7: "product-structure remapping suite",
    8: "multipartite suite",
    9: "optimizer soundness and oracle bound",
}

_PATTERN = re.compile(r"test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    outcomes = {}
    for key, ok in (("passed", True), ("failed", False), ("error", False)):
        for rep in terminalreporter.stats.get(key, []):
            m = _PATTERN.search(getattr(rep, "nodeid", "") or "")
            if m:
                n = int(m.group(1))
                outcomes[n] = outcomes.get(n, True) and ok
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for n in sorted(outcomes):
        label = CRITERIA.get(n, "unnamed")
        word = "PASS" if outcomes[n] else "FAIL"
        terminalreporter.write_line(f"criterion {n} ({label}): {word}")
