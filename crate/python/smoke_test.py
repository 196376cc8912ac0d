"""Smoke test for the qotransport extension.

Build and install with `maturin develop -m crates/py/Cargo.toml` (or
`pip install crates/py`), then run `pytest python/`.
"""

import math

import pytest

qot = pytest.importorskip("qotransport")

X = ([(-1.0, 0.0), (1.0, 0.0)], [0.5, 0.5])
Y = ([(-2.0, 0.0), (2.0, 0.0)], [0.5, 0.5])


def test_w2_of_symmetric_pairs():
    assert qot.w2_squared(*X, *Y) == pytest.approx(1.0, abs=1e-12)


def test_mk2_matches_classical_for_equal_masses():
    r = qot.mk2_squared(1.0, *X, *Y)
    assert r.value == pytest.approx(1.0, abs=1e-6)
    assert r.witness_valid
    assert 0.0 <= r.certified_gap <= 1e-6
    assert len(r.coupling) == 4 and len(r.coupling[0]) == 4
    trace = sum(r.coupling[i][i] for i in range(4))
    assert abs(trace - 1.0) < 1e-9
    assert "Mk2Result" in repr(r)


def test_unequal_masses_are_cheaper_quantum():
    cc, cq, gap, eps, perturbed, dual_gap = qot.unequal_mass(1.0, 0.5, 1.0)
    assert cc == pytest.approx(1.0)
    assert gap > 0.3
    assert cq <= perturbed + 1e-6
    assert dual_gap < 1e-6
    lam2 = math.exp(-2.0)
    expected = 1.0 - qot.unequal_mass(1.0, 0.5, 1.0, eps=0.01)[3] * 8 * lam2 / (1 - lam2)
    assert qot.unequal_mass(1.0, 0.5, 1.0, eps=0.01)[4] == pytest.approx(expected, abs=1e-9)
    assert 0 < eps <= 0.01


def test_invalid_input_raises_value_error():
    with pytest.raises(ValueError):
        qot.w2_squared([(0.0, 0.0)], [0.5], [(1.0, 0.0)], [1.0])
    with pytest.raises(ValueError):
        qot.mk2_squared(-1.0, *X, *Y)


def test_solver_limit_raises_runtime_error():
    with pytest.raises(RuntimeError):
        qot.mk2_squared(1.0, *X, [(0.0, 0.0), (2.0, 1.0)], [0.3, 0.7], max_iterations=3)


def test_husimi_bound_holds():
    w2, bound, tol, holds = qot.husimi_bound(1.0, *X, *Y, step=0.2)
    assert holds
    assert w2 <= bound + tol


def test_verify_all_pass():
    checks = qot.verify()
    assert checks
    failed = [name for name, ok, _ in checks if not ok]
    assert not failed
