"""Acceptance criteria, one test per criterion.

Each test runs the matching verification suite (the same checks behind
``levyexp verify``) and records a single PASS/FAIL line.  The lines are
printed in the pytest terminal summary, or directly when this file is run as
a script.
"""

import sys
import time

import pytest

from levyexp.verification import run_suite

CRITERIA = [
    (1, "double-gamma", "double gamma shift and modular identities, residual <= 1e-9, < 5 s"),
    (2, "mellin", "Mellin shift-by-1, shift-by-delta and alpha-exchange identities, residual <= 1e-9, < 10 s"),
    (3, "psi", "killed-stable exponent closed form <= 1e-10, Wiener-Hopf product <= 1e-11"),
    (4, "residues", "contour residues match a, b, -c coefficients to 1e-6, < 30 s"),
    (5, "inversion", "series density matches Mellin inversion to 1e-6 on [0.05, 20], < 60 s"),
    (6, "monte-carlo", "simulated moments within 3 standard errors, chi-square p > 0.001, < 5 min"),
    (7, "normalization", "every exposed density integrates to 1 +- 1e-5, < 60 s"),
    (8, "radial", "radial gamma ratio vs double gamma <= 1e-10, radial series vs inversion <= 1e-8"),
    (9, "asymptotics", "small-x slope within 10%, large-x constant within 1%"),
    (10, "reflection", "reflection identity residual <= 1e-7"),
]

RESULTS = {}


def evaluate(number, suite, description):
    start = time.perf_counter()
    checks = run_suite(suite)
    elapsed = time.perf_counter() - start
    failed = [c for c in checks if not c.passed]
    status = "PASS" if not failed else "FAIL"
    worst = "; ".join(f"{c.name}: {c.value:.3g} vs {c.tolerance:.3g}" for c in failed[:3])
    line = f"{status} criterion {number:2d} [{suite}] {description} ({len(checks)} checks, {elapsed:.1f} s)"
    if failed:
        line += f" failing: {worst}"
    RESULTS[number] = line
    return failed, line


@pytest.mark.parametrize("number,suite,description", CRITERIA, ids=[c[1] for c in CRITERIA])
def test_criterion(number, suite, description):
    failed, line = evaluate(number, suite, description)
    print(line)
    assert not failed, line


if __name__ == "__main__":
    ok = True
    for criterion in CRITERIA:
        failed, line = evaluate(*criterion)
        print(line, flush=True)
        ok = ok and not failed
    sys.exit(0 if ok else 1)
