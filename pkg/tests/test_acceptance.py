"""Acceptance gate: runs the full numbered self-check suite once and reports
one pass/fail line per criterion.

The suite is expensive (it trains the 25-run learning matrix), so a single
session-scoped run is shared by every assertion; each criterion still gets
its own test so the -v output carries one verdict per numbered check.
"""
import pytest

from uavsched.acceptance import run_all

N_CRITERIA = 12


@pytest.fixture(scope="session")
def gate(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("verify_out")
    results, artifacts = run_all(out_dir=out_dir)
    return {r.number: r for r in results}, artifacts, out_dir


@pytest.mark.parametrize("number", range(1, N_CRITERIA + 1))
def test_criterion(gate, number):
    results, _, _ = gate
    r = results[number]
    if r.passed is None:
        pytest.skip(f"criterion {r.number} ({r.name}): {r.detail}")
    assert r.passed is True, f"criterion {r.number} ({r.name}) failed: {r.detail}"


def test_every_criterion_reported_exactly_once(gate):
    results, _, _ = gate
    assert sorted(results) == list(range(1, N_CRITERIA + 1))


def test_benchmark_artifacts_written(gate):
    _, artifacts, out_dir = gate
    names = sorted(p.rsplit("/", 1)[-1] for p in artifacts)
    assert names == [
        "energy_vs_K.csv",
        "energy_vs_T_max.csv",
        "learning_curve.csv",
        "timing_vs_K.csv",
        "timing_vs_T_max.csv",
    ]
    for name in names:
        text = (out_dir / name).read_text()
        assert text.endswith("\n") and len(text.splitlines()) > 1
