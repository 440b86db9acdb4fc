import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# filled by test_acceptance: criterion number -> (passed, seconds, limit, summary)
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, secs, limit, text = ACCEPTANCE[k]
        limit_s = "" if limit is None else " / limit %ds" % limit
        terminalreporter.write_line("%s criterion %d: %s (%.1fs%s)"
                                    % ("PASS" if ok else "FAIL", k, text, secs, limit_s))
