import numpy as np
import pytest
from scipy.special import expit

from imo3.elicitation import (
    AwaitingAnswer,
    QueryRecord,
    ScriptedDesigner,
    SimulatedDesigner,
    logistic_mle,
    loglik_gradient,
    min_sigmoid_derivative,
    penalized_loglik,
    response_probability,
)


class TestResponseProbability:
    def test_orthogonal_vector_is_coin_flip(self):
        assert response_probability(np.array([1.0, 0.0]), np.array([0.0, 3.0])) == 0.5

    def test_forced_arithmetic(self):
        # theta . v = 2 so p = sigmoid(2).
        p = response_probability(np.array([2.0, 0.0]), np.array([1.0, 5.0]))
        assert p == pytest.approx(1.0 / (1.0 + np.exp(-2.0)))

    def test_antisymmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            theta, v = rng.normal(size=(2, 3))
            assert response_probability(theta, v) + response_probability(theta, -v) == pytest.approx(1.0)

    def test_extreme_scores_stay_in_unit_interval(self):
        assert response_probability(np.array([1e4]), np.array([1e4])) == 1.0
        assert response_probability(np.array([1e4]), np.array([-1e4])) == 0.0


class TestDesigners:
    def test_simulated_answer_frequency(self):
        theta = np.array([1.0, -0.5])
        v = np.array([0.8, 0.2])
        p = response_probability(theta, v)
        rng = np.random.default_rng(1)
        designer = SimulatedDesigner(theta, rng)
        n = 20_000
        freq = np.mean([designer.ask(v) for _ in range(n)])
        assert abs(freq - p) <= 3.5 * np.sqrt(p * (1 - p) / n)

    def test_simulated_deterministic_given_seed(self):
        theta = np.array([0.3, 0.3])
        vs = np.random.default_rng(2).normal(size=(30, 2))
        a = [SimulatedDesigner(theta, np.random.default_rng(3)).ask(v) for v in vs]
        b = [SimulatedDesigner(theta, np.random.default_rng(3)).ask(v) for v in vs]
        assert a == b

    def test_scripted_replays_in_order(self):
        designer = ScriptedDesigner([1, 0, 1])
        assert [designer.ask(np.zeros(2)) for _ in range(3)] == [1, 0, 1]

    def test_scripted_raises_when_exhausted(self):
        designer = ScriptedDesigner([1])
        designer.ask(np.zeros(2))
        v = np.array([0.4, 0.6])
        with pytest.raises(AwaitingAnswer) as exc:
            designer.ask(v)
        assert exc.value.round_index == 2
        assert exc.value.completed == 1
        np.testing.assert_array_equal(exc.value.value_vector, v)

    def test_query_record_validates_answer(self):
        with pytest.raises(ValueError):
            QueryRecord(value_vector=np.zeros(2), answer=2, round=1)


class TestLoglik:
    def test_zero_theta_is_bernoulli_half(self):
        values = np.random.default_rng(4).normal(size=(7, 2))
        answers = np.array([1, 0, 1, 1, 0, 0, 1], dtype=float)
        ll = penalized_loglik(np.zeros(2), values, answers, ridge=0.0)
        assert ll == pytest.approx(7 * np.log(0.5))

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        values = rng.normal(size=(40, 3))
        answers = (rng.random(40) < 0.5).astype(float)
        theta = rng.normal(size=3)
        ridge = 0.01
        grad = loglik_gradient(theta, values, answers, ridge)
        eps = 1e-6
        for j in range(3):
            e = np.zeros(3)
            e[j] = eps
            fd = (
                penalized_loglik(theta + e, values, answers, ridge)
                - penalized_loglik(theta - e, values, answers, ridge)
            ) / (2 * eps)
            assert grad[j] == pytest.approx(fd, rel=1e-4, abs=1e-8)


class TestLogisticMle:
    def test_mle_at_least_as_good_as_zero_and_truth(self):
        rng = np.random.default_rng(6)
        theta_star = np.array([0.8, -0.4])
        values = rng.normal(size=(50, 2))
        answers = (rng.random(50) < expit(values @ theta_star)).astype(float)
        theta_hat = logistic_mle((values, answers), ridge=1e-6)
        ll_hat = penalized_loglik(theta_hat, values, answers, 1e-6)
        assert ll_hat >= penalized_loglik(np.zeros(2), values, answers, 1e-6) - 1e-10
        assert ll_hat >= penalized_loglik(theta_star, values, answers, 1e-6) - 1e-10

    def test_stationarity_at_optimum(self):
        rng = np.random.default_rng(7)
        values = rng.normal(size=(60, 3))
        answers = (rng.random(60) < 0.6).astype(float)
        theta_hat = logistic_mle((values, answers), ridge=1e-4)
        grad = loglik_gradient(theta_hat, values, answers, 1e-4)
        assert np.max(np.abs(grad)) <= 1e-8

    def test_consistency_with_many_queries(self):
        rng = np.random.default_rng(8)
        theta_star = np.array([0.6, -0.3, 0.2])
        values = rng.normal(size=(20_000, 3))
        answers = (rng.random(20_000) < expit(values @ theta_star)).astype(float)
        theta_hat = logistic_mle((values, answers))
        assert np.linalg.norm(theta_hat - theta_star) <= 0.05

    def test_separable_answers_stay_finite(self):
        values = np.array([[1.0, 0.0], [2.0, 0.0], [0.5, 0.0]])
        theta_hat = logistic_mle((values, np.ones(3)), ridge=1e-6)
        assert np.all(np.isfinite(theta_hat))
        assert theta_hat[0] > 0

    def test_accepts_query_records(self):
        queries = [
            QueryRecord(value_vector=np.array([1.0, 0.0]), answer=1, round=1),
            QueryRecord(value_vector=np.array([-1.0, 0.0]), answer=0, round=2),
            QueryRecord(value_vector=np.array([0.0, 1.0]), answer=1, round=3),
        ]
        theta_hat = logistic_mle(queries)
        values = np.array([q.value_vector for q in queries])
        answers = np.array([q.answer for q in queries], dtype=float)
        np.testing.assert_allclose(theta_hat, logistic_mle((values, answers)))

    def test_empty_queries_rejected(self):
        with pytest.raises(ValueError):
            logistic_mle([])

    def test_negative_ridge_rejected(self):
        with pytest.raises(ValueError):
            logistic_mle((np.ones((2, 1)), np.array([1.0, 0.0])), ridge=-1.0)

    def test_nonfinite_values_rejected(self):
        with pytest.raises(ValueError):
            logistic_mle((np.array([[np.nan]]), np.array([1.0])))


class TestMinSigmoidDerivative:
    def test_zero_score_gives_quarter(self):
        assert min_sigmoid_derivative(np.zeros(2), np.ones((3, 2))) == pytest.approx(0.25)

    def test_extreme_score_dominates(self):
        values = np.array([[0.0, 0.0], [10.0, 0.0]])
        out = min_sigmoid_derivative(np.array([1.0, 0.0]), values)
        p = expit(10.0)
        assert out == pytest.approx(p * (1 - p))
