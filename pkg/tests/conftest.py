from helpers import ACCEPTANCE

CRITERIA = {
    1: "feasibility over 500 runs",
    2: "LP vs vertex oracle",
    3: "splitting invariants",
    4: "Chernoff tail",
    5: "cutting invariants",
    6: "greedy completion bound",
    7: "geometric pipeline scaling",
    8: "VC pipeline vs exact",
    9: "repetition variant",
    10: "determinism",
}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k, name in CRITERIA.items():
        if k in ACCEPTANCE:
            ok, detail = ACCEPTANCE[k]
            tr.write_line(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}")
        else:
            tr.write_line(f"criterion {k:2d} FAIL  {name}: no result (not run or errored)")
