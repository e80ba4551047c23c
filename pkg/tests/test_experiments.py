import hashlib
import math

import numpy as np
import pytest

from latgauge.experiments import (
    DecayRow,
    emit_report,
    fit_exponential,
    run_decay,
    run_suites,
    sec2_suite,
)


def rows_from(cov_by_L, se=1e-6, beta=1.0):
    return [DecayRow(L, c, se, 1000, beta) for L, c in cov_by_L]


def test_fit_exact_log_linear():
    rows = rows_from([(L, math.exp(-2.0 * L)) for L in range(1, 6)])
    (rate, intercept, r2), excluded = fit_exponential(rows)
    assert rate == pytest.approx(-2.0, abs=1e-9)
    assert intercept == pytest.approx(0.0, abs=1e-9)
    assert r2 == pytest.approx(1.0, abs=1e-12)
    assert excluded == []


def test_fit_excludes_nonpositive_rows():
    rows = rows_from(
        [(1, math.exp(-1.0)), (2, math.exp(-2.0)), (3, 0.0), (4, math.exp(-4.0)), (5, -1e-9)]
    )
    fit, excluded = fit_exponential(rows)
    assert excluded == [3, 5]
    rate, _, r2 = fit
    assert rate == pytest.approx(-1.0, abs=1e-9)
    assert r2 == pytest.approx(1.0, abs=1e-9)


def test_fit_degenerate():
    rows = rows_from([(1, -1.0), (2, -0.5), (3, 0.0), (4, 1.0), (5, 2.0)])
    fit, excluded = fit_exponential(rows)
    assert fit is None
    assert excluded == [1, 2, 3]


def test_fit_recovers_noisy_rate():
    rng = np.random.default_rng(12)
    rows = rows_from(
        [(L, math.exp(-1.0 * L) * (1 + 0.01 * rng.standard_normal())) for L in range(1, 8)]
    )
    (rate, _, r2), _ = fit_exponential(rows)
    assert abs(rate + 1.0) < 0.05
    assert r2 > 0.99


def test_emit_report_deterministic(tmp_path):
    rows = rows_from([(1, 1e-2), (2, 1e-3), (3, 1e-4)])
    checks = sec2_suite()[:2]
    d1 = tmp_path / "a"
    d2 = tmp_path / "b"
    p1 = emit_report(rows, checks, d1, delta=2.0, beta=1.0)
    p2 = emit_report(rows, checks, d2, delta=2.0, beta=1.0)
    for key in ("decay", "checks", "svg"):
        h1 = hashlib.sha256(open(p1[key], "rb").read()).hexdigest()
        h2 = hashlib.sha256(open(p2[key], "rb").read()).hexdigest()
        assert h1 == h2
    header = open(p1["decay"]).readline().strip()
    assert header == "L,cov,stderr,n,beta"
    assert open(p1["decay"]).read().count("\n") == 4  # header + 3 rows


def test_emit_report_empty_rows(tmp_path):
    paths = emit_report([], [], tmp_path / "empty")
    content = open(paths["decay"]).read()
    assert content == "L,cov,stderr,n,beta\n"
    svg = open(paths["svg"]).read()
    assert "<svg" in svg and "polyline" not in svg  # axes only


def test_run_decay_small_constant_observable_structure():
    # tiny smoke run: structure of rows, reproducibility, worker independence
    rows1 = run_decay(
        ((0, 3), (0, 3), (0, 3)),
        beta=0.5,
        Ls=(1, 2, 3),
        chains=2,
        sweeps=400,
        burnin=20,
        batches=10,
        seed=3,
        workers=1,
    )
    rows2 = run_decay(
        ((0, 3), (0, 3), (0, 3)),
        beta=0.5,
        Ls=(1, 2, 3),
        chains=2,
        sweeps=400,
        burnin=20,
        batches=10,
        seed=3,
        workers=2,
    )
    assert [r.L for r in rows1] == [1, 2, 3]
    for a, b in zip(rows1, rows2):
        assert a == b  # ordered reduction: workers never change results
    assert all(r.n == 800 for r in rows1)
    assert all(r.stderr >= 0 for r in rows1)


def test_run_decay_checks_batches():
    with pytest.raises(ValueError):
        run_decay(
            ((0, 3),) * 3, Ls=(1, 2, 3), chains=1, sweeps=100, burnin=0, batches=7, seed=1
        )


def test_run_suites_unknown():
    with pytest.raises(KeyError):
        run_suites(["nonsense"])


def test_fault_injection_detected():
    rows = run_suites(["swap"], inject_fault="theta-swap")
    failed = [r for r in rows if not r.passed]
    assert failed
    assert any(r.check == "swap-involution" for r in failed)
    assert any("pair (" in r.witness for r in failed)
