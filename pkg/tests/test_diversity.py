import numpy as np
import pytest

from policyspace.distributions import Categorical, Gaussian
from policyspace.diversity import (DiversityConfig, diversity_loss,
                                   estimate_for_generator, kl, pair_indices,
                                   smooth)
from policyspace.errors import ConfigError
from policyspace.generator import PolicyGenerator, sample_latents

from helpers import check_gradients


def test_smooth_with_zero_is_identity():
    cat = Categorical([0.2, 0.8])
    assert np.array_equal(smooth(cat, 0.0).probs.data, [0.2, 0.8])
    gauss = Gaussian([0.0], [0.3])
    assert np.array_equal(smooth(gauss, 0.0).sigma.data, [0.3])


def test_smooth_gaussian_adds_to_sigma():
    gauss = Gaussian([1.0], [0.1])
    assert smooth(gauss, 0.05).sigma.data[0] == pytest.approx(0.15, abs=1e-15)


def test_smooth_categorical_direct_formula():
    cat = Categorical([1.0, 0.0])
    out = smooth(cat, 0.05).probs.data
    assert out == pytest.approx([1.05 / 1.1, 0.05 / 1.1], abs=1e-12)
    assert out.sum() == pytest.approx(1.0, abs=1e-12)


def test_smooth_keeps_distribution_valid():
    rng = np.random.default_rng(0)
    for _ in range(10):
        p = rng.random(5)
        p /= p.sum()
        out = smooth(Categorical(p), rng.random() * 2).probs.data
        assert np.all(out > 0)
        assert out.sum() == pytest.approx(1.0, abs=1e-9)


def test_kl_of_identical_distributions_is_zero():
    cat = Categorical([0.3, 0.7])
    assert float(kl(cat, cat).data) == 0.0
    gauss = Gaussian([0.5, -0.5], [0.2, 0.4])
    assert float(kl(gauss, gauss).data) == pytest.approx(0.0, abs=1e-15)


def test_kl_categorical_direct_value():
    p = Categorical([0.5, 0.5])
    q = Categorical([0.25, 0.75])
    expected = 0.5 * np.log(2.0) + 0.5 * np.log(2.0 / 3.0)
    assert float(kl(p, q).data) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.14384, abs=1e-5)


def test_kl_rejects_mismatched_distributions():
    with pytest.raises(ConfigError):
        kl(Categorical([0.5, 0.5]), Gaussian([0.0], [1.0]))
    with pytest.raises(ConfigError):
        kl(Categorical([0.5, 0.5]), Categorical([0.2, 0.3, 0.5]))


def test_kl_gaussian_known_value():
    # KL(N(0,1) || N(1,1)) = 0.5
    p = Gaussian([0.0], [1.0])
    q = Gaussian([1.0], [1.0])
    assert float(kl(p, q).data) == pytest.approx(0.5, abs=1e-12)


def test_config_validation():
    DiversityConfig().validate()
    with pytest.raises(ConfigError):
        DiversityConfig(num_latents=1).validate()
    with pytest.raises(ConfigError):
        DiversityConfig(smoothing=-0.1).validate()
    with pytest.raises(ConfigError):
        DiversityConfig(mode="nonsense").validate()


def brute_force_estimate(gen, states, latents, b):
    """Exhaustive loop over ordered distinct pairs and states, plain formulas."""
    m, n = latents.shape[0], states.shape[0]
    num_actions = gen.num_actions
    total, count = 0.0, 0
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            for s in range(n):
                p = gen.probs_np(states[s:s + 1], latents[i:i + 1])[0]
                q = gen.probs_np(states[s:s + 1], latents[j:j + 1])[0]
                p = (p + b) / (1.0 + b * num_actions)
                q = (q + b) / (1.0 + b * num_actions)
                total += np.exp(-np.sum(p * (np.log(p) - np.log(q))))
                count += 1
    return total / count


def small_generator(seed=0):
    return PolicyGenerator(4, 3, np.random.default_rng(seed),
                           architecture="concat", hidden_dim=6)


def test_estimator_matches_brute_force_enumeration():
    gen = small_generator(7)
    rng = np.random.default_rng(8)
    states = rng.random((2, 4))
    latents = sample_latents(rng, 3)
    est = float(estimate_for_generator(gen, states, latents, smoothing=0.05).data)
    oracle = brute_force_estimate(gen, states, latents, b=0.05)
    assert est == pytest.approx(oracle, abs=1e-12)


def test_identical_latents_give_maximum_one():
    gen = small_generator(9)
    rng = np.random.default_rng(10)
    states = rng.random((3, 4))
    z = sample_latents(rng, 1)
    latents = np.repeat(z, 4, axis=0)
    est = float(estimate_for_generator(gen, states, latents, smoothing=0.05).data)
    assert est == pytest.approx(1.0, abs=1e-12)


def test_estimate_approaches_zero_for_distant_distributions():
    # two nearly-deterministic opposite categoricals: exp(-KL) ~ 0
    probs = np.array([[1e-9, 1.0 - 1e-9], [1.0 - 1e-9, 1e-9]])
    from policyspace.autodiff import constant
    val = float(diversity_loss(constant(probs), num_latents=2, num_states=1,
                               smoothing=0.0).data)
    assert 0.0 < val < 1e-6


def test_estimator_range_and_pair_count():
    gen = small_generator(11)
    rng = np.random.default_rng(12)
    for m in (2, 3, 5):
        latents = sample_latents(rng, m)
        states = rng.random((4, 4))
        est = float(estimate_for_generator(gen, states, latents, smoothing=0.05).data)
        assert 0.0 < est <= 1.0
    left, right = pair_indices(5)
    assert len(left) == 10
    assert np.all(left < right)


def test_estimator_symmetric_under_permutations():
    gen = small_generator(13)
    rng = np.random.default_rng(14)
    states = rng.random((4, 4))
    latents = sample_latents(rng, 4)
    base = float(estimate_for_generator(gen, states, latents, smoothing=0.05).data)
    perm_latents = float(estimate_for_generator(gen, states, latents[::-1].copy(), 0.05).data)
    perm_states = float(estimate_for_generator(gen, states[::-1].copy(), latents, 0.05).data)
    assert base == pytest.approx(perm_latents, abs=1e-12)
    assert base == pytest.approx(perm_states, abs=1e-12)


def test_exp_neg_kl_increases_as_distributions_converge():
    p = np.array([0.9, 0.1])
    q = np.array([0.1, 0.9])
    from policyspace.autodiff import constant
    values = []
    for t in np.linspace(0.0, 1.0, 5):
        mid = (1 - t) * q + t * p
        stacked = constant(np.stack([p, mid]))
        values.append(float(diversity_loss(stacked, 2, 1, smoothing=0.0).data))
    assert all(a < b for a, b in zip(values, values[1:]))


def test_requires_at_least_two_latents():
    gen = small_generator(15)
    rng = np.random.default_rng(16)
    with pytest.raises(ConfigError):
        estimate_for_generator(gen, rng.random((2, 4)), sample_latents(rng, 1), 0.05)


@pytest.mark.parametrize("arch", ["concat", "multiplicative"])
def test_estimator_gradient_matches_finite_differences(arch):
    gen = PolicyGenerator(4, 3, np.random.default_rng(17), architecture=arch, hidden_dim=5)
    rng = np.random.default_rng(18)
    states = rng.random((2, 4))
    latents = sample_latents(rng, 3)

    def loss():
        return estimate_for_generator(gen, states, latents, smoothing=0.05)

    check_gradients(loss, gen.policy_parameters())


def test_raw_kl_mode_matches_mean_pairwise_kl():
    gen = small_generator(19)
    rng = np.random.default_rng(20)
    states = rng.random((2, 4))
    latents = sample_latents(rng, 3)
    raw = float(estimate_for_generator(gen, states, latents, 0.05, mode="raw_kl").data)
    # oracle: mean KL over ordered distinct pairs and states
    m, n = 3, 2
    total, count = 0.0, 0
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            for s in range(n):
                p = gen.probs_np(states[s:s + 1], latents[i:i + 1])[0]
                q = gen.probs_np(states[s:s + 1], latents[j:j + 1])[0]
                p = (p + 0.05) / (1.0 + 0.05 * 3)
                q = (q + 0.05) / (1.0 + 0.05 * 3)
                total += np.sum(p * (np.log(p) - np.log(q)))
                count += 1
    assert raw == pytest.approx(total / count, abs=1e-12)
