"""
Testes do envelope côncavo, do simplexo e da subida projetada
"""

import numpy as np
import pytest

from app.services.ascent import projected_gradient_ascent
from app.services.envelope import concave_envelope, staircase, upper_hull
from app.utils.errors import NumericalFailureError, QueryOutOfRangeError
from app.utils.simplex import (
    all_maps, balanced_map, canonical_maps,
    project_simplex, sample_canonical_maps, simplex_lattice
)


class TestConcaveEnvelope:
    """Testes de concave_envelope"""

    def test_interior_chord(self):
        points = [(0, 0), (1, 1), (2, 0)]
        env = concave_envelope(points, 0.5)
        assert env.value_at == pytest.approx(0.5)
        assert [p.index for p in env.support] == [0, 1]
        assert sum(env.weights) == pytest.approx(1.0)

    def test_below_point_is_dropped(self):
        env = concave_envelope([(0, 0), (1, 0.2), (2, 1)], 1.0)
        assert env.value_at == pytest.approx(0.5)
        assert len(env.support) == 2

    def test_vertex_query(self):
        env = concave_envelope([(0, 0), (1, 1), (2, 0)], 1.0)
        assert env.value_at == pytest.approx(1.0)
        assert len(env.support) == 1
        assert env.support[0].weight == 1.0

    def test_single_point(self):
        env = concave_envelope([(0.3, 0.7)], 0.3)
        assert env.value_at == 0.7

    def test_out_of_range(self):
        with pytest.raises(QueryOutOfRangeError):
            concave_envelope([(0, 0), (1, 1)], 1.5)
        with pytest.raises(QueryOutOfRangeError):
            concave_envelope([], 0.0)

    def test_dominates_points_and_is_concave(self):
        rng = np.random.default_rng(3)
        points = [(float(r), float(g)) for r, g in zip(rng.random(30), rng.normal(size=30))]
        r_min = min(p[0] for p in points)
        r_max = max(p[0] for p in points)
        for r, g in points:
            assert concave_envelope(points, r).value_at >= g - 1e-12
        grid = np.linspace(r_min, r_max, 41)
        values = np.array([concave_envelope(points, q).value_at for q in grid])
        assert np.all(np.diff(values, 2) <= 1e-9)

    def test_upper_hull_ties_and_collinear(self):
        points = [(0, 0), (0, 1), (1, 2), (2, 3), (3, 1)]
        hull = upper_hull(points)
        assert hull == [1, 3, 4]


class TestStaircase:
    """Testes de staircase"""

    def test_running_maximum(self):
        points = staircase([0.0, 0.5, 0.2], [0.1, 0.3, 0.05])
        assert [(r, g) for r, g, _ in points] == [(0.0, 0.1), (0.2, 0.1), (0.5, 0.3)]
        assert [j for _, _, j in points] == [0, 0, 1]

    def test_budgets_with_slack(self):
        points = staircase([0.0, 0.5 + 1e-10], [0.1, 0.3], budgets=[0.5], slack=1e-9)
        budget_point = [p for p in points if p[0] == 0.5][0]
        assert budget_point[1] == 0.3


class TestSimplex:
    """Projeção e reticulados sobre o simplexo"""

    def test_projection_properties(self):
        rng = np.random.default_rng(0)
        v = rng.normal(size=(50, 4)) * 3
        x = project_simplex(v)
        assert np.all(x >= 0)
        np.testing.assert_allclose(x.sum(axis=1), 1.0)
        p = rng.dirichlet(np.ones(4), size=10)
        np.testing.assert_allclose(project_simplex(p), p, atol=1e-12)

    def test_projection_keeps_shape(self):
        v = np.random.default_rng(1).normal(size=(3, 2, 5))
        assert project_simplex(v).shape == (3, 2, 5)

    def test_lattice(self):
        lattice = simplex_lattice(3, 7)
        assert lattice.shape == (28, 3)
        np.testing.assert_allclose(lattice.sum(axis=1), 1.0)
        assert np.allclose(lattice * 6, np.round(lattice * 6))

    def test_maps(self):
        assert len(list(canonical_maps(2, 5))) == 6
        assert len(list(all_maps(2, 3))) == 8
        assert balanced_map(2, 5) == (0, 0, 0, 1, 1)
        sampled = sample_canonical_maps(3, 7, 5, np.random.default_rng(0))
        assert balanced_map(3, 7) in sampled
        assert sampled == sorted(sampled)
        assert all(list(m) == sorted(m) for m in sampled)


class TestProjectedGradientAscent:
    """Testes de projected_gradient_ascent"""

    def test_concave_quadratic(self):
        target = np.array([[0.2, 0.3, 0.5], [0.6, 0.4, 0.0]])

        def fun(x, idx):
            diff = x - target[idx]
            return -(diff ** 2).sum(axis=1), -2.0 * diff

        x0 = np.full((2, 3), 1.0 / 3)
        x, values, iterations = projected_gradient_ascent(fun, x0, 0.1, 500, 1e-14)
        np.testing.assert_allclose(x, target, atol=1e-6)
        assert np.all(values <= 0)
        assert iterations >= 1

    def test_non_finite(self):
        def fun(x, idx):
            return np.full(len(idx), np.nan), np.zeros_like(x)

        with pytest.raises(NumericalFailureError):
            projected_gradient_ascent(fun, np.full((1, 2), 0.5), 0.1, 10, 1e-12)
