"""Tests for pre-measure estimates, Besicovitch covers and cover ledgers"""
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cover import (
    assembled_mass,
    besicovitch_cover,
    box_dimension,
    find_qualifying_indices,
    lipschitz_image_check,
    orbit_cover_recipe,
    premeasure_profile,
    premeasure_upper,
    grid_multiplicity,
    zero_measure_certificate,
)
from errors import PreconditionError
from gauge import GaugeFactor, GaugeFn
from logspace import LogValue
from strip import build_phi_for_gauge


def normalized_rate(n):
    return n + 6 * sum(1.0 / k ** 2 for k in range(1, n + 1)) - math.pi ** 2


def middle_thirds_endpoints(depth: int) -> np.ndarray:
    intervals = [(0.0, 1.0)]
    for _ in range(depth):
        intervals = [piece for a, b in intervals
                     for piece in ((a, a + (b - a) / 3), (b - (b - a) / 3, b))]
    return np.array(sorted({x for pair in intervals for x in pair}))


def test_premeasure_segment():
    print("=" * 60)
    print("Cover: pre-measure upper estimates")
    print("=" * 60)
    segment = np.linspace(0.0, 1.0, 1001)
    identity = GaugeFn.power_law(1.0)
    estimate = premeasure_upper(segment, identity, 0.1)
    assert 1.0 <= estimate <= 1.2
    assert premeasure_upper(np.array([]), identity, 0.1) == 0.0

    greedy = premeasure_upper(segment, identity, 0.1, strategy="greedy-merge")
    assert 0.9 <= greedy <= estimate
    with pytest.raises(PreconditionError):
        premeasure_upper(segment, identity, 0.1, strategy="hexagons")
    with pytest.raises(PreconditionError):
        premeasure_upper(segment, identity, 0.0)
    print(f"✓ unit segment at delta=0.1: grid {estimate:.4f}, greedy {greedy:.4f}")


def test_premeasure_cantor_sample():
    sample = middle_thirds_endpoints(6)
    gauge = GaugeFn.power_law(math.log(2) / math.log(3))
    for k in range(3, 7):
        estimate = premeasure_upper(sample, gauge, 3.0 ** -k)
        assert estimate <= 2.0 + 1e-9
        print(f"✓ delta=3^-{k}: {estimate:.6f}")


def test_premeasure_profile_monotone():
    rng = np.random.default_rng(0)
    points = rng.random(2000) + 1j * rng.random(2000)
    deltas = [0.4, 0.05, 0.2, 0.1, 0.025]
    values = premeasure_profile(points, GaugeFn.power_law(1.5), deltas)
    by_delta = sorted(zip(deltas, values))
    assert all(a[1] >= b[1] for a, b in zip(by_delta, by_delta[1:]))


def test_box_dimension():
    print("=" * 60)
    print("Cover: box counting")
    print("=" * 60)
    segment = box_dimension(np.linspace(0.0, 1.0, 10 ** 4))
    assert 0.93 <= segment.slope <= 1.05

    axis = np.linspace(0.0, 1.0, 200)
    xx, yy = np.meshgrid(axis, axis)
    square = box_dimension(np.column_stack([xx.ravel(), yy.ravel()]))
    assert 1.9 <= square.slope <= 2.0 + 1e-9

    assert box_dimension(np.array([0.3 + 0.1j])).slope == 0.0
    with pytest.raises(PreconditionError):
        box_dimension(np.full(5, 0.7))
    with pytest.raises(PreconditionError):
        box_dimension(np.linspace(0, 1, 100), scales=[0.5, 0.25, 0.125])
    print(f"✓ segment {segment.slope:.4f}, square {square.slope:.4f}")


def test_besicovitch_single_point():
    cover = besicovitch_cover(np.array([1.0 + 2.0j]), 0.3)
    assert cover.selected == [0] and cover.covered and cover.multiplicity == 1


def test_besicovitch_collinear():
    print("=" * 60)
    print("Cover: Besicovitch selection")
    print("=" * 60)
    points = np.linspace(0.0, 10.0, 100) + 0j
    cover = besicovitch_cover(points, 0.5)
    assert cover.covered
    assert cover.multiplicity <= 2
    print(f"✓ {len(cover.selected)} of 100 collinear balls, multiplicity {cover.multiplicity}")


def test_besicovitch_random():
    rng = np.random.default_rng(1)
    points = rng.random(1000) + 1j * rng.random(1000)
    radii = rng.uniform(0.01, 0.1, 1000)
    cover = besicovitch_cover(points, radii)
    assert cover.covered
    assert cover.multiplicity <= 256
    print(f"✓ {len(cover.selected)} balls, multiplicity {cover.multiplicity} on {cover.grid_points} grid points")

    with pytest.raises(PreconditionError):
        besicovitch_cover(points, 0.0)


def test_grid_multiplicity():
    # three nested disks around the origin
    assert grid_multiplicity(np.zeros(3, dtype=complex), [1.0, 2.0, 3.0])[0] == 3
    assert grid_multiplicity(np.array([0.0, 5.0]) + 0j, 1.0)[0] == 1


def test_zero_measure_certificate():
    print("=" * 60)
    print("Cover: zero-measure certificates")
    print("=" * 60)
    points = np.array([complex(i, j) for i in range(4) for j in range(4)])
    cubic = GaugeFn.power_law(3.0, eta=10.0)

    def single_ball(x, eps):
        return eps, [x], [eps]

    report = zero_measure_certificate(points, cubic, single_ball, [0.5, 0.1, 0.01])
    assert report.certified and report.checks == 48
    assert report.worst_ratio == pytest.approx(1.0, rel=1e-12)

    def too_big(x, eps):
        return eps, [x], [2 * eps]

    failed = zero_measure_certificate(points, GaugeFn.power_law(1.0, eta=10.0), too_big, [0.5])
    assert not failed.certified and failed.witness

    def broken(x, eps):
        raise PreconditionError("no cover here")

    failed = zero_measure_certificate(points, cubic, broken, [0.5])
    assert not failed.certified and "locator failed" in failed.witness
    print(f"✓ {report.checks} checks, worst ratio {report.worst_ratio:.6f}")


def test_zero_measure_certificate_segment():
    """Intervals of length 2 delta / m with m >= 8/eps cover K within delta for h(t) = t^1.5"""
    segment = np.linspace(0.0, 1.0, 201)
    gauge = GaugeFn.power_law(1.5)

    def intervals(x, eps):
        delta = eps
        m = math.ceil(8 / eps) + 1
        centers = float(x[0]) - delta + (2 * np.arange(m) + 1) * delta / m
        return delta, centers, np.full(m, 2 * delta / m)

    report = zero_measure_certificate(segment, gauge, intervals, [0.5, 0.2, 0.1], dim=1)
    assert report.certified, report.witness
    assert report.worst_ratio <= 1.0

    mass = assembled_mass(segment, gauge, intervals, 0.1, dim=1)
    assert 0 < mass <= 4 ** 2 * 0.1 * 2.0


def test_lipschitz_image():
    axis_x = np.linspace(0.0, 1.0, 41)
    axis_y = np.linspace(-1.0, 1.0, 81)
    xx, yy = np.meshgrid(axis_x, axis_y)
    points = (xx + 1j * yy).ravel()
    report = lipschitz_image_check(points, np.exp, math.e, GaugeFn.power_law(1.0, eta=10.0), 0.2)
    assert report.ok
    assert report.max_slack <= 1.0
    with pytest.raises(PreconditionError):
        lipschitz_image_check(points, np.exp, 0.5, GaugeFn.power_law(1.0, eta=10.0), 0.2)


@pytest.fixture(scope="module")
def profile():
    return build_phi_for_gauge(GaugeFactor(1.0, 1.0), normalized_rate, n_max=8)


def surrogate_orbit(profile, n):
    """Moduli that qualify at n, with derivative products of the exponential model"""
    earlier = list(np.linspace(1.5, 2.2, n - 1))
    last = max(profile.p_n(n), earlier[-1] + 6.0 / n ** 2) + 0.1
    moduli = [0.0] + earlier + [last]
    rho_log = -sum(math.log(moduli[k + 1]) for k in range(n))
    return moduli, rho_log


def test_recipe_arithmetic(profile):
    print("=" * 60)
    print("Cover: orbit cover recipe")
    print("=" * 60)
    moduli, _ = surrogate_orbit(profile, 4)
    recipe = orbit_cover_recipe(profile, moduli, 4, eps=0.1)
    assert recipe.t - recipe.s == pytest.approx(2 / 16, abs=1e-12)
    assert recipe.s - recipe.r == pytest.approx(2 / 16, abs=1e-12)
    assert recipe.l == pytest.approx(2 / 16)
    assert min(recipe.t, recipe.s, recipe.r) > profile.p_n(3)

    rows = {row.name: row for row in recipe.rows}
    assert rows["level_curve_inside"].passed
    assert profile.value_log(recipe.r) * 8.0 <= LogValue.from_float(0.125)
    assert rows["chain_at_t"].passed and rows["rho_vs_tau"].passed
    assert recipe.ok, recipe.failed()


@pytest.mark.parametrize("n", [4, 5, 6, 7, 8])
def test_recipe_ledger(profile, n):
    moduli, rho_log = surrogate_orbit(profile, n)
    measured = orbit_cover_recipe(profile, moduli, n, eps=0.01, rho_log=rho_log)
    assert measured.ok, measured.failed()
    assert "rho_measured_vs_bound" in [row.name for row in measured.rows]

    bound = orbit_cover_recipe(profile, moduli, n, eps=0.01)
    assert bound.ok, bound.failed()
    assert bound.delta < measured.delta

    frame = measured.to_frame()
    assert list(frame.columns) == ["name", "lhs_log", "rhs_log", "slack", "passed", "note"]
    assert len(frame) == len(measured.rows)
    print(f"✓ n={n}: {len(frame)} ledger rows pass")


def test_recipe_failures(profile):
    moduli, rho_log = surrogate_orbit(profile, 4)
    low = list(moduli)
    low[4] = profile.p_n(4) - 0.5
    with pytest.raises(PreconditionError):
        orbit_cover_recipe(profile, low, 4, eps=0.1)
    with pytest.raises(PreconditionError):
        orbit_cover_recipe(profile, moduli, 9, eps=0.1)

    # rho_n > 1/c2 breaks the step that replaces c2 rho phi(t) by phi(t)
    recipe = orbit_cover_recipe(profile, moduli, 4, eps=0.1, rho_log=10.0)
    assert not recipe.ok
    assert "c2_rho_small" in recipe.failed()


def test_find_qualifying_indices(profile):
    moduli, _ = surrogate_orbit(profile, 5)
    assert 5 in find_qualifying_indices(moduli, profile)
    assert 3 not in find_qualifying_indices(moduli, profile)


if __name__ == "__main__":
    test_premeasure_segment()
    test_premeasure_cantor_sample()
    test_premeasure_profile_monotone()
    test_box_dimension()
    test_besicovitch_single_point()
    test_besicovitch_collinear()
    test_besicovitch_random()
    test_grid_multiplicity()
    test_zero_measure_certificate()
    test_zero_measure_certificate_segment()
    test_lipschitz_image()
    gauge_profile = build_phi_for_gauge(GaugeFactor(1.0, 1.0), normalized_rate, n_max=8)
    test_recipe_arithmetic(gauge_profile)
    for index in range(4, 9):
        test_recipe_ledger(gauge_profile, index)
    test_recipe_failures(gauge_profile)
    test_find_qualifying_indices(gauge_profile)
    print("\n" + "=" * 60)
    print("Test Complete!")
    print("=" * 60)
