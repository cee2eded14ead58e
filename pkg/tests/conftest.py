import sys

from online_subsidy import oracles
from online_subsidy.model import Transcript


def every_prefix_le(valuation, transcript: Transcript) -> bool:
    """Permutation-oracle check of each prefix, independent of the envy graph."""
    return all(oracles.brute_force_le(valuation, transcript.allocation(t)) is None for t in range(len(transcript) + 1))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {module.TITLES[number]} [{detail}]")
