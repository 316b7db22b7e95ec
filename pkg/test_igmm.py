"""Incremental mixture: closed-form cases, scalar oracles and stream invariants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st
from scipy.integrate import trapezoid
from scipy.special import ndtri

from src.config import SortOrder
from src.igmm import IgmmModel, chi2_quantile_1dof, gaussian_pdf
from src.models import IgmmConfig
from src.utils import ContractViolation, DomainError, StateError, density_frame


def make_model(weights, means, variances, mass=None, age=None, config=None) -> IgmmModel:
    return IgmmModel(config).set_components(weights, means, variances, mass=mass, age=age)


# --- Gaussian helpers ---

def test_gaussian_pdf_values():
    assert gaussian_pdf(0.0, 0.0, 1.0) == pytest.approx(0.3989422804, rel=1e-9)
    assert gaussian_pdf(0.7, 0.7, 0.005) == pytest.approx(5.641895835, rel=1e-9)
    assert gaussian_pdf(1.0, 0.0, 1.0) == pytest.approx(0.2419707245, rel=1e-9)


def test_gaussian_pdf_integrates_to_one():
    x = np.linspace(0.7 - 10 * math.sqrt(0.005), 0.7 + 10 * math.sqrt(0.005), 20001)
    assert trapezoid(gaussian_pdf(x, 0.7, 0.005), x) == pytest.approx(1.0, abs=1e-6)


def test_gaussian_pdf_rejects_non_finite():
    with pytest.raises(DomainError):
        gaussian_pdf(float("nan"), 0.0, 1.0)
    with pytest.raises(DomainError):
        gaussian_pdf(0.0, 0.0, float("inf"))


def test_update_gate_quantile():
    assert chi2_quantile_1dof(0.99) == pytest.approx(6.634896601021214, rel=1e-10)
    assert IgmmConfig().update_gate == pytest.approx(6.634896601021214, rel=1e-10)


# --- Posterior ---

def test_posterior_single_component():
    model = make_model([1.0], [0.7], [0.005])
    assert model.posterior(0.2).tolist() == [1.0]


def test_posterior_symmetric_pair():
    model = make_model([0.5, 0.5], [0.4, 0.8], [0.01, 0.01])
    np.testing.assert_allclose(model.posterior(0.6), [0.5, 0.5], rtol=1e-12)


def test_posterior_matches_scalar_evaluation():
    model = make_model([0.9, 0.1], [0.5, 0.9], [0.005, 0.005])
    d = 0.52
    terms = [w * math.exp(-((d - m) ** 2) / (2 * v)) / math.sqrt(2 * math.pi * v) for w, m, v in zip([0.9, 0.1], [0.5, 0.9], [0.005, 0.005])]
    expected = [t / sum(terms) for t in terms]
    np.testing.assert_allclose(model.posterior(d), expected, rtol=1e-12)


def test_posterior_underflow_falls_back_to_nearest_mean():
    model = make_model([0.5, 0.5], [0.1, 0.3], [1e-8, 1e-8])
    assert model.posterior(5.0).tolist() == [0.0, 1.0]


def test_posterior_on_empty_model():
    with pytest.raises(StateError):
        IgmmModel().posterior(0.5)


@given(st.floats(min_value=0.0, max_value=2.0))
def test_posterior_is_normalized(d):
    model = make_model([0.6, 0.3, 0.1], [0.5, 0.7, 0.95], [0.002, 0.005, 0.01])
    assert float(np.sum(model.posterior(d))) == pytest.approx(1.0, abs=1e-9)


# --- Create / update / prune ---

def test_create_on_empty_model():
    model = IgmmModel().create_component(0.75)
    (c,) = model.components
    assert (c.weight, c.mean, c.variance, c.mass, c.age) == (1.0, 0.75, 0.005, 1.0, 1)


def test_create_weight_is_inverse_total_mass():
    model = make_model([1.0], [0.6], [0.005], mass=[3.0], age=[3])
    model.create_component(0.9)
    # new weight 1/(3+1) = 0.25 next to 1.0, renormalized
    np.testing.assert_allclose(model.weights, [0.8, 0.2], rtol=1e-12)
    assert model.means.tolist() == [0.6, 0.9]


def test_create_discards_lightest_when_full():
    model = make_model(
        [0.4, 0.3, 0.15, 0.1, 0.05],
        [0.5, 0.6, 0.7, 0.8, 0.9],
        [0.005] * 5,
        mass=[8.0, 6.0, 3.0, 2.0, 1.0],
    )
    model.create_component(1.2)
    assert len(model) == 5
    assert model.means.tolist() == [0.5, 0.6, 0.7, 0.8, 1.2]
    assert float(np.sum(model.weights)) == pytest.approx(1.0, abs=1e-12)


def test_update_at_the_mean_halves_variance():
    model = make_model([1.0], [0.7], [0.005], mass=[1.0], age=[1])
    model.update_components(0.7)
    (c,) = model.components
    assert c.mean == pytest.approx(0.7, abs=1e-15)
    assert c.variance == pytest.approx(0.0025, rel=1e-12)
    assert (c.age, c.mass, c.weight) == (2, 2.0, 1.0)


def test_update_moves_mean_and_variance():
    model = make_model([1.0], [0.6], [0.01], mass=[4.0], age=[4])
    model.update_components(0.65)
    (c,) = model.components
    assert c.mean == pytest.approx(0.61, rel=1e-12)
    assert c.variance == pytest.approx(0.00822, rel=1e-12)


def test_update_leaves_unresponsible_component_frozen():
    model = make_model([0.5, 0.5], [0.5, 0.95], [0.001, 0.001], mass=[5.0, 5.0], age=[5, 5])
    model.update_components(0.5)
    assert model.means[1] == pytest.approx(0.95, abs=1e-12)
    assert model.variances[1] == pytest.approx(0.001, abs=1e-12)
    assert model.age.tolist() == [6, 6]


def test_update_outside_gate_is_a_contract_violation():
    model = make_model([1.0], [0.7], [0.005])
    with pytest.raises(ContractViolation):
        model.update_components(1.4)


def test_remove_spurious_conjunction():
    model = make_model(
        [0.2, 0.3, 0.5],
        [0.5, 0.6, 0.7],
        [0.005] * 3,
        mass=[2.5, 0.5, 3.5],
        age=[6, 4, 10],
    )
    model.remove_spurious()
    assert model.means.tolist() == [0.6, 0.7]
    np.testing.assert_allclose(model.weights, [0.375, 0.625], rtol=1e-12)


def test_remove_spurious_can_empty_the_model():
    model = make_model([1.0], [0.5], [0.005], mass=[1.0], age=[9])
    assert model.remove_spurious().is_empty


def test_pruning_light_component_keeps_dominant():
    model = make_model([0.9, 0.1], [0.6, 0.9], [0.005, 0.005], mass=[20.0, 1.0], age=[25, 6])
    before = model.dominant_component().mean
    model.remove_spurious()
    assert model.dominant_component().mean == before


# --- Observe ---

def test_observe_routes_update_and_create():
    model = IgmmModel().observe(0.8)
    assert len(model) == 1 and model.means[0] == 0.8

    model = make_model([1.0], [0.7], [0.005])
    model.observe(0.71)  # squared Mahalanobis 0.02
    assert len(model) == 1 and model.mass[0] == pytest.approx(2.0)

    model = make_model([1.0], [0.7], [0.005])
    model.observe(1.4)  # squared Mahalanobis 98
    assert model.means.tolist() == [0.7, 1.4]
    assert model.observation_count == 1


def test_observe_rejects_non_finite():
    with pytest.raises(DomainError):
        IgmmModel().observe(float("inf"))


def test_random_streams_keep_invariants():
    rng = np.random.default_rng(7)
    config = IgmmConfig()
    for _ in range(10_000):
        model = IgmmModel(config)
        centers = rng.uniform(0.2, 1.1, size=rng.integers(1, 4))
        for d in rng.choice(centers, size=10) + rng.normal(0.0, 0.05, size=10):
            model.observe(abs(float(d)))
            assert len(model) <= config.max_components
            if not model.is_empty:
                assert abs(float(np.sum(model.weights)) - 1.0) <= 1e-9
            assert np.all(model.variances >= config.variance_floor)


def test_recovers_single_gaussian():
    rng = np.random.default_rng(0)
    samples = np.clip(rng.normal(0.7, 0.03, 500), 1e-6, 1 - 1e-6)
    model = IgmmModel()
    for d in samples:
        model.observe(float(d))

    dominant = model.dominant_component()
    assert abs(dominant.mean - 0.7) < 0.01
    assert dominant.weight > 0.9
    # batch maximum likelihood for one Gaussian is the sample mean
    assert abs(dominant.mean - samples.mean()) < 0.01


def _scalar_update(weights, means, variances, mass, d, floor):
    """Plain-float evaluation of the update rule with omega equal to xi."""
    terms = [w * math.exp(-((d - m) ** 2) / (2 * v)) / math.sqrt(2 * math.pi * v) for w, m, v in zip(weights, means, variances)]
    total = sum(terms)
    out_means, out_vars, out_mass = [], [], []
    for t, m, v, n in zip(terms, means, variances, mass):
        post = t / total
        n_new = n + post
        xi = post / n_new
        m_new = m + xi * (d - m)
        v_new = v - xi * (v - (d - m_new) ** 2) - xi ** 2 * (d - m) ** 2
        out_means.append(m_new)
        out_vars.append(max(v_new, floor))
        out_mass.append(n_new)
    out_weights = [n / sum(out_mass) for n in out_mass]
    return out_weights, out_means, out_vars, out_mass


def test_update_rule_matches_scalar_oracle():
    rng = np.random.default_rng(42)
    for _ in range(1_000):
        k = int(rng.integers(1, 6))
        means = rng.uniform(0.3, 1.1, k)
        variances = rng.uniform(0.001, 0.01, k)
        mass = rng.uniform(2.0, 30.0, k)
        weights = mass / mass.sum()
        j = int(rng.integers(k))
        d = float(means[j] + rng.uniform(-1.0, 1.0) * math.sqrt(variances[j]))

        model = make_model(weights, means, variances, mass=mass, age=[3] * k)
        model.update_components(d)
        w, m, v, n = _scalar_update(weights.tolist(), means.tolist(), variances.tolist(), mass.tolist(), d, 1e-8)

        np.testing.assert_allclose(model.means, m, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(model.variances, v, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(model.mass, n, rtol=1e-12)
        np.testing.assert_allclose(model.weights, w, rtol=1e-12)


# --- Inlier selection and truncated CDF ---

def test_single_component_is_its_own_inlier_set():
    model = make_model([1.0], [0.7], [0.005])
    assert model.select_inlier_components(0.5).tolist() == [0]


def test_inlier_prefix_by_ascending_mean():
    model = make_model([0.3, 0.7], [0.9, 0.6], [0.005, 0.005])
    assert sorted(model.select_inlier_components(0.8).tolist()) == [0, 1]

    model = make_model([0.15, 0.85], [0.9, 0.6], [0.005, 0.005])
    assert model.select_inlier_components(0.8).tolist() == [1]


def test_descending_sort_order_switch():
    config = IgmmConfig(sort_order=SortOrder.DESCENDING)
    model = make_model([0.15, 0.85], [0.9, 0.6], [0.005, 0.005], config=config)
    assert model.select_inlier_components(0.1).tolist() == [0]


def test_inlier_selection_on_empty_model():
    with pytest.raises(StateError):
        IgmmModel().select_inlier_components(0.8)


def test_truncated_cdf_values():
    model = make_model([1.0], [0.7], [0.005])
    assert model.truncated_cdf([0], 0.7) == pytest.approx(0.5)
    assert model.truncated_cdf([0], -1e3) == 0.0
    assert model.truncated_cdf([0], 1e3) == 1.0

    pair = make_model([0.5, 0.5], [0.4, 0.8], [0.01, 0.01])
    assert pair.truncated_cdf([0, 1], 0.6) == pytest.approx(0.5, abs=1e-12)


def test_truncated_cdf_renormalizes_subset():
    model = make_model([0.2, 0.8], [0.6, 1.2], [0.005, 0.005])
    # only the first component: its own median
    assert model.truncated_cdf([0], 0.6) == pytest.approx(0.5)


def test_truncated_cdf_monotone_and_tails():
    model = make_model([0.6, 0.4], [0.55, 0.75], [0.002, 0.004])
    grid = np.linspace(0.0, 1.5, 2001)
    values = model.truncated_cdf([0, 1], grid)
    assert np.all(np.diff(values) >= 0)

    single = make_model([1.0], [0.7], [0.005])
    sd = math.sqrt(0.005)
    assert single.truncated_cdf([0], 0.7 + sd * ndtri(0.0001)) < 0.01
    assert single.truncated_cdf([0], 0.7 + sd * ndtri(0.9999)) > 0.99


def test_truncated_cdf_errors():
    model = make_model([1.0], [0.7], [0.005])
    with pytest.raises(StateError):
        model.truncated_cdf([], 0.5)
    with pytest.raises(DomainError):
        model.truncated_cdf([0], float("nan"))


# --- Plot data / serialization ---

def test_density_curve_integrates_to_one():
    rng = np.random.default_rng(3)
    model = IgmmModel()
    for d in rng.normal(0.65, 0.03, 200):
        model.observe(float(d))
    frame = density_frame(model, upsilon=0.8)
    assert trapezoid(frame["mixture_density"], frame["x"]) == pytest.approx(1.0, abs=1e-3)
    assert trapezoid(frame["inlier_density"], frame["x"]) == pytest.approx(1.0, abs=1e-3)


def test_density_frame_empty_without_components():
    assert density_frame(IgmmModel(), upsilon=0.8).empty


def test_from_dict_rejects_bad_variance():
    document = make_model([1.0], [0.7], [0.005]).to_dict()
    document["components"][0]["variance"] = 0.0
    with pytest.raises(DomainError):
        IgmmModel.from_dict(document)


@hyp_settings(max_examples=50)
@given(st.lists(st.floats(min_value=0.05, max_value=1.3), min_size=1, max_size=40))
def test_copy_is_independent(stream):
    model = IgmmModel()
    for d in stream:
        model.observe(d)
    clone = model.copy()
    clone.observe(0.5)
    assert model.observation_count == len(stream)
    assert clone.observation_count == len(stream) + 1


def test_stream_reuses_component_buffers():
    config = IgmmConfig()
    model = IgmmModel(config)
    buffers = [model._weights, model._means, model._variances, model._mass, model._age]
    rng = np.random.default_rng(3)
    for d in np.abs(rng.choice([0.3, 0.6, 0.9, 1.2], size=500) + rng.normal(0.0, 0.03, size=500)):
        model.observe(float(d))
    for before, after in zip(buffers, [model._weights, model._means, model._variances, model._mass, model._age]):
        assert after is before
        assert after.size == config.max_components
    assert model.weights.base is model._weights


def test_set_components_validation():
    with pytest.raises(DomainError):
        make_model([0.5, 0.5], [0.4], [0.01, 0.01])
    with pytest.raises(DomainError):
        make_model([1.0 / 6] * 6, [0.1 * i for i in range(6)], [0.01] * 6)
    with pytest.raises(DomainError):
        make_model([1.0], [0.4], [-0.01])
