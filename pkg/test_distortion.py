"""Tests for Koebe bounds and branch contraction certificates"""
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import config
from distortion import (
    certify_branch_contraction,
    chord_ratio_check,
    koebe_derivative_bounds,
    koebe_distortion_constant,
    koebe_quarter,
    koebe_ratio_bounds,
    koebe_rotation_bound,
    verify_quarter_containment,
)
from errors import PreconditionError


def koebe(z):
    z = np.asarray(z, dtype=complex)
    return z / (1 - z) ** 2


def test_ratio_bounds():
    """Koebe ratio bounds, attained by the Koebe function"""
    print("=" * 60)
    print("Distortion: Koebe ratio bounds")
    print("=" * 60)
    lo, hi = koebe_ratio_bounds(1.0, 0.5)
    assert lo == pytest.approx(4 / 9, abs=1e-15)
    assert hi == pytest.approx(4.0, abs=1e-15)
    for lam in (0.1, 0.5, 0.9):
        lo, hi = koebe_ratio_bounds(1.0, lam)
        assert lo <= 1.0 <= hi
        assert abs(koebe(lam)) / lam == pytest.approx(hi, rel=1e-12)
    print("✓ (4/9, 4) at lambda = 1/2; the Koebe function attains the upper bound")

    with pytest.raises(PreconditionError):
        koebe_ratio_bounds(1.0, 1.0)
    with pytest.raises(PreconditionError):
        koebe_ratio_bounds(0.0, 0.5)


def test_derivative_bounds_and_constant():
    lo, hi = koebe_derivative_bounds(1.0, 0.5)
    assert lo == pytest.approx(0.5 / 1.5 ** 3)
    assert hi == pytest.approx(1.5 / 0.5 ** 3)
    assert koebe_distortion_constant(0.5) == pytest.approx(81.0)
    assert hi / lo == pytest.approx(koebe_distortion_constant(0.5))
    # the Koebe function has |k'(-lam)| = (1 - lam)/(1 + lam)^3
    lam = 0.3
    derivative = abs((1 + (-lam)) / (1 - (-lam)) ** 3)
    assert derivative == pytest.approx(koebe_derivative_bounds(1.0, lam)[0], rel=1e-12)


def test_quarter_disk():
    """D(g(a), |g'(a)| r/4) lies inside g(D(a, r)), sharply for the Koebe function"""
    print("\n" + "=" * 60)
    print("Distortion: quarter disk")
    print("=" * 60)
    disk = koebe_quarter(0.0, 1.0, 1.0)
    assert disk.radius == 0.25
    assert verify_quarter_containment(lambda z: z, 0.0, 1.0, disk).ok
    assert koebe_quarter(0.0, 2.0, 1.0).radius == 0.5

    report = verify_quarter_containment(koebe, 0.0, 1.0, disk)
    assert report.ok
    assert report.max_slack == pytest.approx(1.0, abs=1e-6)
    assert complex(report.witness).real == pytest.approx(-0.25, abs=1e-6)
    print(f"✓ Koebe function: nearest image point {report.witness}")

    too_big = koebe_quarter(0.0, 1.0, 1.2)
    assert not verify_quarter_containment(koebe, 0.0, 1.0, too_big).ok


def test_certify_affine():
    """Affine branches: the certified interval brackets the exact ratio"""
    print("\n" + "=" * 60)
    print("Distortion: contraction certificates")
    print("=" * 60)
    offset = 0.2 + 0.1j

    def affine(z):
        return 0.3 * np.asarray(z) + offset

    previous = None
    for padding in (0.25, 0.5, 0.75):
        cert = certify_branch_contraction(affine, lambda z: np.full(np.shape(z), 0.3 + 0j), padding=padding)
        assert 0.24 < cert.b_lower <= 0.3 <= cert.c_upper < 0.37
        assert cert.koebe_k == pytest.approx(koebe_distortion_constant(padding))
        assert chord_ratio_check(affine, cert).ok
        if previous is not None:
            assert cert.b_lower < previous
        previous = cert.b_lower

    # mesh points sit 1/63 of their univalence radius apart at padding 1/2
    numeric = certify_branch_contraction(affine)
    local = 1 / 63
    lo, _ = koebe_derivative_bounds(1.0, local)
    assert numeric.b_lower == pytest.approx(0.3 * lo * math.cos(koebe_rotation_bound(local)), rel=1e-6)
    assert numeric.koebe_k == pytest.approx(81.0)
    print(f"✓ z -> 0.3z + c gives b = {numeric.b_lower:.4f} <= 0.3 <= c = {numeric.c_upper:.4f}")


def test_certify_padding_range():
    def affine(z):
        return 0.3 * np.asarray(z)

    for padding in (0.0, 1.0, 1.5):
        with pytest.raises(PreconditionError):
            certify_branch_contraction(affine, padding=padding)


def test_certify_moebius():
    """Bounds sandwich sampled chord ratios of z/(2+z) on the unit square"""
    def branch(z):
        z = np.asarray(z, dtype=complex)
        return z / (2 + z)

    def derivative(z):
        z = np.asarray(z, dtype=complex)
        return 2 / (2 + z) ** 2

    cert = certify_branch_contraction(branch, derivative)
    assert cert.b_lower <= 0.2 and cert.c_upper >= 0.5
    assert cert.b_lower > 0.15 and cert.c_upper < 0.55
    report = chord_ratio_check(branch, cert)
    assert report.ok
    assert cert.koebe_k * cert.b_lower >= cert.derivative_max

    # a fine mesh stays inside the inflated derivative range
    axis = np.linspace(0.0, 1.0, 301)
    fine = np.abs(derivative(axis[:, None] + 1j * axis[None, :]))
    assert fine.min() >= cert.b_lower and fine.max() <= cert.c_upper

    other = certify_branch_contraction(lambda z: 0.1 * np.asarray(z))
    assert other.koebe_k == cert.koebe_k
    print(f"✓ z/(2+z): b = {cert.b_lower:.4f}, c = {cert.c_upper:.4f}, K = {cert.koebe_k:.0f}")


def test_certify_rejects_critical_points():
    with pytest.raises(PreconditionError):
        certify_branch_contraction(lambda z: np.asarray(z) ** 2, lambda z: 2 * np.asarray(z), center=0.0)
    # a pole inside the univalence disk
    with pytest.raises(PreconditionError):
        certify_branch_contraction(lambda z: np.log(np.asarray(z) + 1.2), lambda z: 1 / (np.asarray(z) + 1.2),
                                   center=0.0, half_side=0.5)


def test_certify_reads_current_settings(monkeypatch):
    monkeypatch.setattr(config, "KOEBE_PADDING", 0.25)
    monkeypatch.setattr(config, "DERIVATIVE_GRID", 32)
    cert = certify_branch_contraction(lambda z: 0.3 * np.asarray(z))
    assert cert.padding == 0.25 and cert.samples == 32 * 32
    assert cert.koebe_k == pytest.approx(koebe_distortion_constant(0.25))


if __name__ == "__main__":
    test_ratio_bounds()
    test_derivative_bounds_and_constant()
    test_quarter_disk()
    test_certify_affine()
    test_certify_padding_range()
    test_certify_moebius()
    test_certify_rejects_critical_points()
    print("\n" + "=" * 60)
    print("Test Complete!")
    print("=" * 60)
