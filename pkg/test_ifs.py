"""Tests for iterated function schemes, cylinder masses and schedules"""
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import config
from errors import PreconditionError
from gauge import GaugeFn
from ifs import (
    BaseScheme,
    ContractionMap,
    Scheme,
    SchemeSequence,
    StageStats,
    cylinder_masses,
    cylinder_measure,
    interleave_schemes,
    limit_set_points,
    mass_distribution_check,
    power_scheme_check,
    prefix_stats,
    ratio_trend,
    schedule_indices,
    schedule_margin,
    similarity_dimension,
    similarity_scheme,
)

CORNERS = [0.0, 2 / 3, 2j / 3, 2 / 3 + 2j / 3]


def middle_thirds() -> SchemeSequence:
    return SchemeSequence.constant(similarity_scheme([1 / 3, 1 / 3], [0.0, 2 / 3]))


def test_similarity_dimension():
    """sum b**s = 1, with closed forms for equal ratios"""
    print("=" * 60)
    print("IFS: similarity dimension")
    print("=" * 60)
    assert similarity_dimension([0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)
    assert similarity_dimension([1 / 3, 1 / 3]) == pytest.approx(0.63092975, abs=1e-8)
    assert similarity_dimension([0.9, 0.9]) == pytest.approx(6.57881, abs=1e-5)
    for m in (2, 3, 5):
        for b in (0.1, 0.3, 0.45):
            s = similarity_dimension([b] * m)
            assert s == pytest.approx(math.log(m) / math.log(1 / b), abs=1e-10)
    ratios = [0.2, 0.35, 0.4]
    s = similarity_dimension(ratios)
    assert abs(sum(b ** s for b in ratios) - 1) <= 1e-12
    assert similarity_dimension([0.2, 0.3, 0.4]) < s
    print(f"✓ {{1/3, 1/3}} -> {similarity_dimension([1 / 3, 1 / 3]):.10f}")

    with pytest.raises(PreconditionError):
        similarity_dimension([])
    with pytest.raises(PreconditionError):
        similarity_dimension([0.5, 1.0])


def test_contraction_map_bounds():
    with pytest.raises(PreconditionError):
        ContractionMap(lambda z: z, 0.5, 0.4)
    sim = ContractionMap.similarity(0.25, 0.5 + 0.5j, rotation=1j)
    assert sim.maps_square_into_square()
    composed = sim.compose(ContractionMap.similarity(0.5, 0.0))
    assert composed.b_lower == pytest.approx(0.125)
    assert composed(0.0) == pytest.approx(0.5 + 0.5j)
    assert composed.derivative(np.array([0.3]))[0] == pytest.approx(0.125j)


def test_limit_set_points():
    """Representative points of depth-k cylinders in lexicographic order"""
    print("\n" + "=" * 60)
    print("IFS: limit set points")
    print("=" * 60)
    dust = SchemeSequence.constant(similarity_scheme([1 / 3] * 4, CORNERS))
    sample = limit_set_points(dust, 0)
    assert len(sample) == 1 and sample.codes.shape == (1, 0)
    assert sample.points[0] == 0.5 + 0.5j

    sample = limit_set_points(dust, 3, seed=0.0)
    assert len(sample) == 64
    offsets = np.array(CORNERS)
    expected = offsets[sample.codes[:, 0]] + offsets[sample.codes[:, 1]] / 3 + offsets[sample.codes[:, 2]] / 9
    np.testing.assert_allclose(sample.points, expected, atol=1e-15)
    assert tuple(sample.codes[5]) == (0, 1, 1)
    print("✓ Cantor dust depth 3 matches corner addresses")

    halving = SchemeSequence.constant(Scheme([ContractionMap.similarity(0.5)]))
    sample = limit_set_points(halving, 20)
    assert abs(sample.points[0]) <= 2 ** -20 * math.sqrt(2)
    assert sample.radius == pytest.approx(2 ** -20 * math.sqrt(2))
    print("✓ z/2 at depth 20 sits next to its fixed point")

    with pytest.raises(PreconditionError):
        limit_set_points(dust, 13)


def test_cylinder_masses():
    """Masses of all depth-k cylinders sum to one"""
    print("\n" + "=" * 60)
    print("IFS: cylinder masses")
    print("=" * 60)
    three = SchemeSequence.constant(similarity_scheme([0.2, 0.3, 0.25], [0.0, 0.5, 0.7j]))
    masses = cylinder_masses(three, 10)
    assert len(masses) == 3 ** 10
    assert abs(masses.sum() - 1) <= 1e-11
    print(f"✓ depth 10: sum = {masses.sum():.15f}")

    dust = SchemeSequence.constant(similarity_scheme([1 / 3] * 4, CORNERS))
    assert cylinder_measure(dust, (3, 1, 2)) == pytest.approx(4.0 ** -3, rel=1e-12)
    assert cylinder_measure(dust, ()) == 1.0

    mixed = SchemeSequence([
        similarity_scheme([1 / 3, 1 / 3], [0.0, 2 / 3]),
        similarity_scheme([0.5, 0.5], [0.0, 0.5]),
    ])
    assert cylinder_measure(mixed, (0, 1)) == pytest.approx(0.25, abs=1e-12)
    with pytest.raises(PreconditionError):
        cylinder_measure(mixed, (0, 2))
    print("✓ mixed stages give (1/2)(1/2)")


def test_separation_and_stats():
    dust = similarity_scheme([1 / 3] * 4, CORNERS)
    assert 0.3 < dust.separation < 1 / 3 + 1e-12
    assert dust.images_disjoint()
    touching = similarity_scheme([0.5] * 4, [0.0, 0.5, 0.5j, 0.5 + 0.5j])
    assert touching.separation == 0.0

    seq = SchemeSequence([
        similarity_scheme([0.3] * 4, CORNERS),
        similarity_scheme([0.2, 0.25, 0.3], [0.0, 0.6, 0.6j]),
        similarity_scheme([0.1] * 2, [0.0, 0.8]),
    ])
    stats = seq.stage_stats()
    assert all(b.log_alpha <= a.log_alpha for a, b in zip(stats, stats[1:]))
    assert all(b.log_beta >= a.log_beta for a, b in zip(stats, stats[1:]))
    assert all(b.gamma <= a.gamma and b.delta >= a.delta for a, b in zip(stats, stats[1:]))
    assert all(b.log_d <= a.log_d for a, b in zip(stats, stats[1:]))


def test_scheme_base_class():
    """Explicit and composed schemes share the exported base"""
    dust = similarity_scheme([1 / 3] * 4, CORNERS)
    power, composed = interleave_schemes(dust, similarity_scheme([0.1] * 2, [0.0, 0.8]))
    assert power == 6
    assert isinstance(dust, BaseScheme) and isinstance(composed, BaseScheme)
    assert composed.lower_sum > 1


def test_separation_reads_current_grid(monkeypatch):
    fine = similarity_scheme([1 / 3] * 4, CORNERS).separation
    monkeypatch.setattr(config, "SEPARATION_GRID", 8)
    coarse = similarity_scheme([1 / 3] * 4, CORNERS).separation
    assert coarse < 0.3 < fine


def test_mass_distribution():
    """Ball mass over h(r) falls for a gauge below the dimension and blows up for a point mass"""
    print("\n" + "=" * 60)
    print("IFS: mass distribution")
    print("=" * 60)
    seq = middle_thirds()
    rng = np.random.default_rng(7)
    sample = limit_set_points(seq, 12, seed=0.0)
    centers = rng.choice(sample.points, size=100, replace=False)

    radii = [3.0 ** -j for j in (2, 8, 16, 24)]
    table = mass_distribution_check(seq, GaugeFn.power_law(0.5), centers, radii)
    assert len(table) == 400
    trend = ratio_trend(table)
    assert trend < 0.1
    print(f"✓ h(t) = t^0.5: ratio trend {trend:.4f}")

    s = math.log(2) / math.log(3)
    table = mass_distribution_check(seq, GaugeFn.power_law(s), centers[:20], [3.0 ** -j for j in range(1, 11)])
    assert table["ratio"].max() <= 4.0
    print(f"✓ h(t) = t^s: ratios bounded by {table['ratio'].max():.3f}")

    point = SchemeSequence.constant(Scheme([ContractionMap.similarity(0.5)]))
    table = mass_distribution_check(point, GaugeFn.power_law(1.0), [0.0], [2.0 ** -j for j in range(1, 11)])
    np.testing.assert_allclose(table["mass"], 1.0)
    assert ratio_trend(table) > 100
    print("✓ point mass detected")

    with pytest.raises(PreconditionError):
        mass_distribution_check(seq, GaugeFn.power_law(s), centers, [0.1, 0.2])


def _stats(rng) -> StageStats:
    return StageStats(
        log_min_b=math.log(rng.uniform(0.05, 0.3)),
        log_max_b=math.log(rng.uniform(0.3, 0.7)),
        s=rng.uniform(1.3, 2.5),
        log_separation=math.log(rng.uniform(0.01, 0.2)),
        log_lower_sum=math.log(2.0),
        log_arity=math.log(4.0),
    )


def test_schedule_indices():
    """Least n satisfying the schedule inequality, and every later n too"""
    print("\n" + "=" * 60)
    print("IFS: schedules")
    print("=" * 60)
    fixed = StageStats(log_min_b=math.log(0.1), log_max_b=math.log(0.5), s=1.5,
                       log_separation=math.log(0.1), log_lower_sum=0.5, log_arity=math.log(8))
    assert schedule_indices([fixed, fixed]) == [17]
    margins = [1.5 - 1.5 * math.log(0.01) / math.log(0.1 * 0.5 ** n) - 1 for n in range(1, 30)]
    assert next(n for n, m in zip(range(1, 30), margins) if m >= 0) == 17
    print("✓ gamma=delta=1.5, alpha=d=0.1, beta=0.5 -> n = 17")

    flat = StageStats(log_min_b=0.0, log_max_b=math.log(0.5), s=1.5,
                      log_separation=0.0, log_lower_sum=0.5, log_arity=math.log(2))
    assert schedule_indices([flat, flat, flat], start=4) == [5, 6]

    rng = np.random.default_rng(2024)
    eps = GaugeFn.exponent_form(lambda t: np.full(np.shape(t), 0.05))
    for _ in range(20):
        pool = [_stats(rng) for _ in range(3)]
        indices = schedule_indices(pool, eps)
        assert all(b > a for a, b in zip(indices, indices[1:]))
        running = prefix_stats(pool)
        for i, n in enumerate(indices):
            margin = schedule_margin(running[i], running[i + 1], eps, [n, n + 1, n + 50])
            assert np.all(margin >= 0)
            if n > (indices[i - 1] if i else 0) + 1:
                assert schedule_margin(running[i], running[i + 1], eps, n - 1) < 0
    print("✓ 20 random pools: n_i and later indices satisfy the inequality")

    low = schedule_indices([fixed, fixed], 0.02)
    high = schedule_indices([fixed, fixed], 0.04)
    assert high[0] >= low[0]

    with pytest.raises(PreconditionError):
        schedule_indices([fixed])
    weak = fixed.model_copy(update={"s": 0.9})
    with pytest.raises(PreconditionError):
        schedule_indices([fixed, weak])


def test_interleave_schemes():
    """Least p with m_Q min b(Q) (sum b(P))^p > 1"""
    print("\n" + "=" * 60)
    print("IFS: interleaving")
    print("=" * 60)
    outer = similarity_scheme([0.5] * 4, [0.0, 0.5, 0.5j, 0.5 + 0.5j])
    inner = Scheme([ContractionMap.similarity(0.1, 0.45 + 0.45j)])
    p, composed = interleave_schemes(outer, inner)
    assert p == 4
    assert isinstance(composed, Scheme) and composed.arity == 256
    assert composed.lower_sum == pytest.approx(1.6, rel=1e-12)
    assert composed.maps[0](0.0) == pytest.approx((0.45 + 0.45j) * 0.5 ** 4)
    print(f"✓ b = 0.1, sum = 2: p = {p}, composed sum = {composed.lower_sum:.3f}")

    slow = similarity_scheme([0.55, 0.55], [0.0, 0.45])
    p, composed = interleave_schemes(slow, Scheme([ContractionMap.similarity(0.5)]))
    assert p == 8
    assert composed.lower_sum > 1

    big = similarity_scheme([0.6, 0.6], [0.0, 0.4])
    p, _ = interleave_schemes(outer, big)
    assert p == 0

    with pytest.raises(PreconditionError):
        interleave_schemes(similarity_scheme([0.3, 0.3], [0.0, 0.7]), inner)


def test_power_scheme_check():
    """Some power of a scheme beats any exponent below its dimension"""
    scheme = similarity_scheme([0.4, 0.4], [0.0, 0.6])
    below = power_scheme_check(scheme, 0.7)
    assert below.power == 1 and below.sums[0] > 1
    above = power_scheme_check(scheme, 0.8, max_power=4)
    assert above.power is None
    assert all(total < 1 for total in above.sums)


if __name__ == "__main__":
    test_similarity_dimension()
    test_contraction_map_bounds()
    test_limit_set_points()
    test_cylinder_masses()
    test_separation_and_stats()
    test_scheme_base_class()
    test_mass_distribution()
    test_schedule_indices()
    test_interleave_schemes()
    test_power_scheme_check()
    print("\n" + "=" * 60)
    print("Test Complete!")
    print("=" * 60)
