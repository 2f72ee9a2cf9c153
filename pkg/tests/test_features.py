import math
import random

import numpy as np
import pytest

from flocksim.agents import AgentKind, AgentState, BoundaryRegion
from flocksim.features import (
    FeatureVector,
    best_fit_cubic,
    build_feature_vector,
    measure_of_spread,
    regional_density,
)
from flocksim.geometry import Vec2

from .oracles import (
    oracle_cubic,
    oracle_cubic_lstsq,
    oracle_regional_density,
    oracle_spread,
    random_agents,
)

BOX10 = BoundaryRegion(0, 10, 0, 10, margin_m=1.0)


def robot(i, x, y):
    return AgentState(i, AgentKind.ROBOT, Vec2(x, y))


def points(*coords):
    return [robot(i, x, y) for i, (x, y) in enumerate(coords)]


class TestRegionalDensity:
    def test_two_agents(self):
        rho = regional_density(points((2, 2), (4, 6)), BOX10)
        assert rho.x == pytest.approx(0.3)
        assert rho.y == pytest.approx(0.4)

    def test_agent_at_maxima(self):
        rho = regional_density(points((10, 10)), BOX10)
        assert (rho.x, rho.y) == (1.0, 1.0)

    def test_all_at_origin(self):
        rho = regional_density(points((0, 0), (0, 0)), BOX10)
        assert (rho.x, rho.y) == (0.0, 0.0)

    def test_empty_error(self):
        with pytest.raises(ValueError):
            regional_density([], BOX10)


class TestMeasureOfSpread:
    def test_symmetric_cancellation(self):
        agents = points((0, 0), (1, 0), (-1, 0))
        assert measure_of_spread(agents, 0) == 0.0

    def test_worked_example(self):
        agents = points((0, 0), (2, 0), (2, 2))
        assert measure_of_spread(agents, 0) == pytest.approx(1.49071, abs=1e-4)
        assert measure_of_spread(agents, 0) == pytest.approx(math.sqrt(20) / 3)

    def test_alone(self):
        assert measure_of_spread(points((5, 5)), 0) == 0.0

    def test_unknown_id(self):
        with pytest.raises(KeyError):
            measure_of_spread(points((0, 0)), 9)

    def test_permutation_invariant(self):
        rng = random.Random(3)
        for _ in range(50):
            agents = random_agents(rng, rng.randint(2, 6), BOX10)
            shuffled = agents[:]
            rng.shuffle(shuffled)
            assert measure_of_spread(agents, 0) == pytest.approx(
                measure_of_spread(shuffled, 0), abs=1e-12
            )


class TestBestFitCubic:
    def test_constant_data(self):
        alpha = best_fit_cubic(points((0, 1), (1, 1), (2, 1), (3, 1)))
        assert alpha == pytest.approx((1, 0, 0, 0), abs=1e-9)

    def test_exact_line(self):
        alpha = best_fit_cubic(points((0, 0), (1, 2), (2, 4), (3, 6)))
        assert alpha == pytest.approx((0, 2, 0, 0), abs=1e-9)

    def test_recovers_noiseless_cubic(self):
        pts = [(x, 1 + x - 0.5 * x**3) for x in range(5)]
        alpha = best_fit_cubic(points(*pts))
        assert alpha == pytest.approx((1, 1, 0, -0.5), abs=1e-6)

    def test_empty_error(self):
        with pytest.raises(ValueError):
            best_fit_cubic([])

    def test_singular_falls_back_to_ridge(self):
        alpha = best_fit_cubic(points((5, 5)))
        expected = oracle_cubic(points((5, 5)))
        assert alpha == pytest.approx(tuple(expected), rel=1e-6)

    def test_repeated_x_uses_ridge(self):
        agents = points((1, 0), (1, 2), (2, 5), (3, 1), (3, 3))
        alpha = best_fit_cubic(agents)
        expected = oracle_cubic(agents)
        assert alpha == pytest.approx(tuple(expected), rel=1e-5, abs=1e-8)

    def test_residual_local_optimality(self):
        rng = random.Random(11)
        for _ in range(30):
            agents = random_agents(rng, 6, BOX10, min_x_gap=0.4)
            alpha = best_fit_cubic(agents)
            xs = np.array([a.position.x for a in agents])
            ys = np.array([a.position.y for a in agents])
            X = np.vander(xs, 4, increasing=True)

            def ssr(a):
                return float(np.sum((ys - X @ np.asarray(a)) ** 2))

            base = ssr(alpha)
            for k in range(4):
                for delta in (1e-3, -1e-3):
                    bumped = list(alpha)
                    bumped[k] += delta
                    assert ssr(bumped) >= base - 1e-12

    def test_agrees_with_svd_least_squares(self):
        # different algorithm family entirely; float-level tolerance
        rng = random.Random(23)
        for _ in range(50):
            agents = random_agents(rng, rng.randint(4, 6), BOX10, min_x_gap=0.5)
            alpha = best_fit_cubic(agents)
            expected = oracle_cubic_lstsq(agents)
            assert max(abs(m - o) for m, o in zip(alpha, expected)) < 1e-6


def test_feature_oracle_equivalence():
    rng = random.Random(17)
    for _ in range(300):
        n = rng.randint(1, 6)
        agents = random_agents(rng, n, BOX10, min_x_gap=0.3)
        rho = regional_density(agents, BOX10)
        orho = oracle_regional_density(agents, BOX10)
        assert abs(rho.x - orho[0]) < 1e-10 and abs(rho.y - orho[1]) < 1e-10
        for a in agents:
            assert abs(measure_of_spread(agents, a.id) - oracle_spread(agents, a.id)) < 1e-10
        alpha = best_fit_cubic(agents)
        oalpha = oracle_cubic(agents)
        assert max(abs(m - o) for m, o in zip(alpha, oalpha)) < 1e-10


class TestBuildFeatureVector:
    def test_single_robot_at_center(self):
        fv = build_feature_vector(points((5, 5)), BOX10)
        assert (fv.rho.x, fv.rho.y) == (0.5, 0.5)
        assert fv.sigma_mean == 0.0 and fv.sigma_std == 0.0
        assert fv.alpha == pytest.approx(tuple(oracle_cubic(points((5, 5)))), rel=1e-6)

    def test_three_robot_line(self):
        # 3 collinear points: underdetermined, so the ridge picks the
        # minimum-norm interpolant (not (1,0,0,0)); it still fits exactly.
        agents = points((1, 1), (2, 1), (3, 1))
        fv = build_feature_vector(agents, BOX10)
        expected_sigmas = [oracle_spread(agents, a.id) for a in agents]
        mean = sum(expected_sigmas) / 3
        std = math.sqrt(sum((s - mean) ** 2 for s in expected_sigmas) / 3)
        assert fv.sigma_mean == pytest.approx(mean, abs=1e-12)
        assert fv.sigma_std == pytest.approx(std, abs=1e-12)
        assert fv.alpha == pytest.approx(tuple(oracle_cubic(agents)), abs=1e-10)
        for x in (1, 2, 3):
            fitted = sum(fv.alpha[k] * x**k for k in range(4))
            assert fitted == pytest.approx(1.0, abs=1e-6)

    def test_four_robot_line_recovers_constant(self):
        fv = build_feature_vector(points((1, 1), (2, 1), (3, 1), (4, 1)), BOX10)
        assert fv.alpha == pytest.approx((1, 0, 0, 0), abs=1e-9)

    def test_empty_error(self):
        with pytest.raises(ValueError):
            build_feature_vector([], BOX10)

    def test_sigma_aggregates_robots_only(self):
        mixed = [
            robot(0, 1, 1),
            AgentState(1, AgentKind.HUMAN, Vec2(9, 9)),
        ]
        fv = build_feature_vector(mixed, BOX10)
        # single robot: zero spread aggregate, but rho includes the human
        assert fv.sigma_mean == pytest.approx(oracle_spread(mixed, 0))
        assert fv.sigma_std == 0.0
        assert fv.rho.x == pytest.approx(0.5)

    def test_roundtrip_dict(self):
        fv = build_feature_vector(points((1, 2), (3, 4), (5, 9)), BOX10)
        assert FeatureVector.from_dict(fv.to_dict()) == fv
        assert len(fv.as_tuple()) == 8
