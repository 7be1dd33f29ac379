"""Tests for rate normalization, orbit iteration and escape classification"""
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from errors import PreconditionError
from escape import (
    EscapeKind,
    RateSequence,
    check_normalized,
    classify_orbit,
    derivative_cauchy_check,
    iterate_orbit,
    iterate_real_log,
    iterated_max_modulus,
    normalize_rate_sequence,
    render_partition,
    trap_certificate,
)
from logtransform import ClassBModel, ExponentialModel
from storage import ArtifactStore, read_ppm

FIXED_POINT = 0.3574030


def translation() -> ClassBModel:
    return ClassBModel(lambda z: z + 1, lambda z: np.ones_like(z), R=1.0, name="z+1")


def test_normalize_identity_rate():
    print("=" * 60)
    print("Escape: rate normalization")
    print("=" * 60)
    p = RateSequence.parse("n")
    q = normalize_rate_sequence(p, 100)
    for n in range(2, 101):
        assert q(n) - q(n - 1) == pytest.approx(1 + 6 / n ** 2, abs=1e-12)
    assert q(1) == pytest.approx(1 + 6 - math.pi ** 2, abs=1e-12)
    assert q.normalized
    assert check_normalized(q, p, 100).ok
    print(f"✓ q_1 = {q(1):.6f}, q_100 = {q(100):.6f}")


def test_normalize_fast_rate():
    identity = normalize_rate_sequence(RateSequence.parse("n"), 50)
    doubling = normalize_rate_sequence(RateSequence.parse("2^n"), 50)
    assert [doubling(n) for n in range(1, 51)] == pytest.approx([identity(n) for n in range(1, 51)], abs=1e-12)


def test_normalize_dipping_rate():
    table = [float(n) for n in range(1, 41)]
    table[4] = 0.5
    p = RateSequence.from_table(table)
    q = normalize_rate_sequence(p, 20)
    assert check_normalized(q, p, 20).ok
    assert q(4) <= 0.5 and q(5) <= 0.5
    assert all(q(n) < q(n + 1) for n in range(1, 20))


def test_normalize_rejects_bounded_rate():
    with pytest.raises(PreconditionError):
        normalize_rate_sequence(RateSequence.from_callable(lambda n: 5.0), 20)
    with pytest.raises(PreconditionError):
        RateSequence.parse("fibonacci")


def test_iterated_max_modulus():
    print("=" * 60)
    print("Escape: iterated maximum modulus")
    print("=" * 60)
    unit = ExponentialModel(1.0)
    assert iterated_max_modulus(unit, 1.0, 2).to_float() == pytest.approx(math.exp(math.e), abs=1e-4)
    assert iterated_max_modulus(unit, 1.0, 2).to_float() == pytest.approx(15.15426, abs=1e-4)
    assert iterated_max_modulus(unit, 3.0, 0).to_float() == pytest.approx(3.0)
    half = ExponentialModel(0.5)
    assert iterated_max_modulus(half, 2.0, 1).to_float() == pytest.approx(3.6945, abs=1e-4)

    tall = iterated_max_modulus(unit, 1.0, 10)
    assert tall.depth >= 6
    print(f"✓ M^2(1) = {iterated_max_modulus(unit, 1.0, 2).to_float():.5f}, M^10(1) = {tall!r}")


def test_log_space_agrees_with_direct():
    direct = [2.0]
    for _ in range(3):
        direct.append(0.9 * math.exp(direct[-1]))
    logs = iterate_real_log(0.9, 2.0, 3)
    for value, tracked in zip(direct, logs):
        assert tracked.to_float() == pytest.approx(value, rel=1e-10)
    with pytest.raises(PreconditionError):
        iterate_real_log(-1.0, 2.0, 3)


def test_orbit_record():
    model = ExponentialModel(1.0)
    record = iterate_orbit(model, 1.0, 12)
    assert record.steps == 12 and not record.overflowed
    assert record.moduli[2].to_float() == pytest.approx(math.exp(math.e), rel=1e-12)
    assert record.moduli[12].depth > 0
    assert record.chain_rule_residual(model) <= 1e-9

    frame = record.to_frame()
    assert list(frame.columns) == ["n", "re", "im", "log_modulus", "log_depth", "log_level", "log_derivative_sum"]
    assert len(frame) == 13

    # z_2 is near -19031 - 48016i, so |z_3| = e^(Re z_2) underflows a float
    spiral = iterate_orbit(model, 3.0 + 1.0j, 50)
    assert spiral.iterates[2].real < -19000
    assert spiral.log_modulus(3) == pytest.approx(spiral.iterates[2].real, rel=1e-12)
    assert all(math.isfinite(v) for v in spiral.log_derivative[:5])
    assert spiral.chain_rule_residual(model) <= 1e-9


def test_classify_bounded():
    print("=" * 60)
    print("Escape: orbit classification")
    print("=" * 60)
    model = ExponentialModel(0.25)
    verdict, record = classify_orbit(model, 0.0, RateSequence.parse("n"), 400)
    assert verdict.kind == EscapeKind.BOUNDED
    assert verdict.fixed_point.real == pytest.approx(FIXED_POINT, abs=1e-6)
    assert abs(verdict.fixed_point.imag) < 1e-12
    assert verdict.count == 0 and verdict.horizon == 400
    print(f"✓ lambda = 1/4: bounded, fixed point {verdict.fixed_point.real:.7f}")


def test_classify_fast_escaping():
    model = ExponentialModel(1.0)
    verdict, record = classify_orbit(model, 1.0, RateSequence.parse("n"), 60, fast_base=1.0)
    assert verdict.kind == EscapeKind.FAST and verdict.lag == 0
    # the same orbit exceeds p_n = n at every step
    assert verdict.count == 60 and verdict.violations == list(range(1, 61))

    shorter, _ = classify_orbit(model, 1.0, RateSequence.parse("n"), 20, fast_base=1.0)
    assert shorter.kind == EscapeKind.FAST and shorter.lag == 0

    for x in (0.5, 2.0, 3.0):
        verdict, _ = classify_orbit(model, x, RateSequence.parse("n"), 40, fast_base=1.0)
        assert verdict.kind == EscapeKind.FAST
    print(f"✓ lambda = 1: orbit of 1 is fast escaping with L = 0")


def test_classify_rate_verdicts():
    model = translation()
    within, _ = classify_orbit(model, 0.0, RateSequence.parse("n^2"), 40, fast_base=5.0)
    assert within.kind == EscapeKind.WITHIN_RATE and within.count == 0

    unb, _ = classify_orbit(model, 0.0, RateSequence.parse("sqrt"), 40, fast_base=5.0)
    assert unb.kind == EscapeKind.UNB_VIOLATION
    assert unb.violations == list(range(2, 41))


def test_trap_certificate():
    model = ExponentialModel(0.25)
    assert trap_certificate(model, FIXED_POINT).ok
    assert not trap_certificate(ExponentialModel(1.0), 0.0).ok


def test_derivative_cauchy_check():
    unit = ExponentialModel(1.0)
    for r in (0.5, 2.0, 5.0):
        report = derivative_cauchy_check(unit, r, r + 1.0)
        assert report.ok
        assert report.max_slack == pytest.approx(1 / math.e, rel=1e-6)

    halving = ClassBModel(lambda z: z / 2, lambda z: 0.5 * np.ones_like(z), R=1.0)
    assert derivative_cauchy_check(halving, 1.0, 3.0).ok
    with pytest.raises(PreconditionError):
        derivative_cauchy_check(unit, 2.0, 1.0)


def test_render_partition(tmp_path):
    print("=" * 60)
    print("Escape: class rasters")
    print("=" * 60)
    model = ExponentialModel(0.25)
    rate = RateSequence.parse("n")
    serial = render_partition(model, (-2, 2, -2, 2), (12, 12), rate, 60, threads=1)
    threaded = render_partition(model, (-2, 2, -2, 2), (12, 12), rate, 60, threads=3)
    assert serial.shape == (12, 12)
    assert np.array_equal(serial, threaded)
    assert np.count_nonzero(serial == 0) > 0

    store = ArtifactStore(tmp_path)
    path = store.write_ppm("partition.ppm", serial)
    assert np.array_equal(read_ppm(path), serial)

    single = render_partition(model, (-1, 1, -1, 1), (1, 1), rate, 60)
    assert single.shape == (1, 1) and single[0, 0] == 0

    with pytest.raises(PreconditionError):
        render_partition(model, (1, -1, -1, 1), (4, 4), rate, 10)
    print(f"✓ {np.count_nonzero(serial == 0)} of 144 pixels bounded, identical across thread counts")


def test_render_real_axis():
    model = ExponentialModel(1.0)
    row = render_partition(model, (0.5, 3.0, -0.01, 0.01), (6, 1), RateSequence.parse("n"), 30, fast_base=1.0)
    assert np.all(row == 3)


if __name__ == "__main__":
    import tempfile

    test_normalize_identity_rate()
    test_normalize_fast_rate()
    test_normalize_dipping_rate()
    test_normalize_rejects_bounded_rate()
    test_iterated_max_modulus()
    test_log_space_agrees_with_direct()
    test_orbit_record()
    test_classify_bounded()
    test_classify_fast_escaping()
    test_classify_rate_verdicts()
    test_trap_certificate()
    test_derivative_cauchy_check()
    with tempfile.TemporaryDirectory() as tmp:
        test_render_partition(Path(tmp))
    test_render_real_axis()
    print("\n" + "=" * 60)
    print("Test Complete!")
    print("=" * 60)
