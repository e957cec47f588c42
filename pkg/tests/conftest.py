import numpy as np
import pytest

from imo3.core import Policy, ProblemSpec
from imo3.problems import LogDataset, build_zdt1_problem, generate_log, make_dirichlet_logging_policy


def make_known_problem(num_contexts=2, num_actions=3, noise_sd=0.0, seed=0):
    """Small instance with explicit mean rewards, for exact-arithmetic tests."""
    rng = np.random.default_rng(seed)
    means = rng.uniform(0.1, 0.9, size=(num_contexts, num_actions, 2))
    px = rng.dirichlet(np.ones(num_contexts) * 5)

    def sampler(x, a, r):
        return means[x, a] + r.normal(0.0, noise_sd, size=2)

    return ProblemSpec(
        num_contexts=num_contexts,
        num_actions=num_actions,
        num_objectives=2,
        context_distribution=px,
        reward_sampler=sampler,
        true_mean_rewards=means,
        problem_id="known-small",
    )


@pytest.fixture(scope="session")
def zdt1_problem():
    return build_zdt1_problem(seed=3)


@pytest.fixture(scope="session")
def zdt1_log(zdt1_problem):
    pi0 = make_dirichlet_logging_policy(zdt1_problem, 10.0, seed=1)
    return generate_log(zdt1_problem, pi0, 5000, seed=2)


@pytest.fixture(scope="session")
def small_problem():
    return make_known_problem()


@pytest.fixture(scope="session")
def small_log(small_problem):
    pi0 = make_dirichlet_logging_policy(small_problem, 10.0, seed=4)
    return generate_log(small_problem, pi0, 2000, seed=5)


def random_policy(rng, num_contexts, num_actions):
    return Policy(rng.dirichlet(np.ones(num_actions), size=num_contexts))
