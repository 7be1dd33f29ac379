"""Tests for level-index LogValue arithmetic"""
import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from logspace import LogValue, LN_BIG


def test_float_range_arithmetic():
    """Values inside float range behave like floats"""
    print("=" * 60)
    print("LogValue: float range")
    print("=" * 60)
    two, three = LogValue.from_float(2.0), LogValue.from_float(3.0)
    assert (two + three).to_float() == pytest.approx(5.0, rel=1e-12)
    assert (three - two).to_float() == pytest.approx(1.0, rel=1e-12)
    assert (two * three).to_float() == pytest.approx(6.0, rel=1e-12)
    assert (three / two).to_float() == pytest.approx(1.5, rel=1e-12)
    assert (two ** 10).to_float() == pytest.approx(1024.0, rel=1e-12)
    assert two < three and three > 2.5 and two == 2.0
    assert LogValue.zero() + two == two
    print("✓ +, -, *, /, ** and comparisons match floats")


def test_towers():
    """exp(exp(1000)) is representable and multiplies exactly at its lowest level"""
    print("\n" + "=" * 60)
    print("LogValue: towers")
    print("=" * 60)
    inner = LogValue.exp(1000.0)
    assert inner.depth == 0 and inner.level == 1000.0
    tower = LogValue.exp(inner)
    assert tower.depth == 1 and tower.level == pytest.approx(1000.0)
    assert tower > LogValue.from_float(1e308)
    assert tower.to_float() == math.inf

    squared = tower * tower
    assert squared.depth == 1
    assert squared.level == pytest.approx(1000.0 + math.log(2.0), rel=1e-14)
    root = tower ** 0.5
    assert root.level == pytest.approx(1000.0 - math.log(2.0), rel=1e-14)
    assert tower / tower == LogValue.one()
    print(f"✓ exp(exp(1000)) = {tower!r}")

    tiny = tower.reciprocal()
    assert tiny < LogValue.from_float(1e-300) and not tiny.is_zero()
    assert tiny.to_float() == 0.0
    assert (tiny * tower).approx_le(LogValue.one())
    print("✓ reciprocal of a tower stays positive")


def test_deep_sums_keep_dominant_term():
    """Out of float range a sum keeps the larger summand"""
    big = LogValue.exp(LogValue.exp(800.0))
    small = LogValue.exp(LogValue.exp(700.0))
    assert big + small == big
    assert big - small == big
    assert LogValue.exp(-1e5).log() == -1e5
    assert LogValue.exp(-1e5).to_float() == 0.0
    assert LogValue.from_log(2 * LN_BIG * 1e300).depth == 1


def test_rejections():
    with pytest.raises(ValueError):
        LogValue.from_float(-1.0)
    with pytest.raises(ValueError):
        LogValue.from_float(1.0) - LogValue.from_float(2.0)
    with pytest.raises(ZeroDivisionError):
        LogValue.zero().reciprocal()


def test_tolerant_comparison():
    a = LogValue.from_log(100.0)
    b = LogValue.from_log(100.0 * (1 + 1e-14))
    assert b.approx_le(a)
    assert not LogValue.from_log(101.0).approx_le(a)
    assert a.approx_ge(b)


if __name__ == "__main__":
    test_float_range_arithmetic()
    test_towers()
    test_deep_sums_keep_dominant_term()
    test_rejections()
    test_tolerant_comparison()
    print("\n" + "=" * 60)
    print("Test Complete!")
    print("=" * 60)
