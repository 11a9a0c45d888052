import pytest

from bic_explore.errors import (
    ActionIndexError,
    DegenerateK,
    NonStrictOrdering,
    PositiveTailMean,
    PriorShapeError,
    ProbabilityOutOfRange,
    ZeroSupport,
)
from bic_explore.prior_model import (
    ContinuousSetting,
    DiscretePrior,
    PiecewiseLinearPrior,
    QuadraturePrior,
    UniformPrior,
    mu,
    validate,
    validate_setting,
)


def test_means_of_reference_prior(prior_a):
    assert mu(prior_a, 1) == pytest.approx(0.1)
    assert mu(prior_a, 2) == pytest.approx(-0.8)
    assert mu(prior_a, 3) == pytest.approx(-0.9)
    assert prior_a.means == pytest.approx((0.1, -0.8, -0.9))
    assert prior_a.positive_tail is False


def test_mu_rejects_action_outside_range(prior_a):
    with pytest.raises(ActionIndexError):
        mu(prior_a, 0)
    with pytest.raises(ActionIndexError):
        mu(prior_a, 4)


def test_exploration_mass_is_zero_state_times_tail_minus_product(prior_a):
    assert prior_a.exploration_mass(2) == pytest.approx(0.3)
    assert prior_a.exploration_mass(3) == pytest.approx(0.27)
    assert prior_a.minus_product(3) == pytest.approx(0.3 * 0.9)


def test_exploration_mass_vanishes_without_minus_one_on_first_action():
    vp = validate(DiscretePrior.from_lists((0.5, 0.5, 0.0), (0.2, 0.1)))
    assert vp.exploration_mass(2) == 0.0
    assert vp.exploration_mass(3) == 0.0


def test_validate_rejects_single_action():
    with pytest.raises(DegenerateK):
        validate(DiscretePrior(k=1, p1_plus=0.4, p1_zero=0.3, p1_minus=0.3, p_plus=()))


def test_validate_rejects_tail_length_mismatch():
    with pytest.raises(PriorShapeError):
        validate(DiscretePrior(k=3, p1_plus=0.4, p1_zero=0.3, p1_minus=0.3, p_plus=(0.1,)))


def test_validate_rejects_bad_probabilities():
    with pytest.raises(ProbabilityOutOfRange):
        validate(DiscretePrior.from_lists((0.4, 0.4, 0.4), (0.1,)))
    with pytest.raises(ProbabilityOutOfRange):
        validate(DiscretePrior.from_lists((0.4, 0.3, 0.3), (1.5,)))
    with pytest.raises(ProbabilityOutOfRange):
        validate(DiscretePrior.from_lists((0.4, 0.3, 0.3), (float("nan"),)))


def test_validate_requires_zero_state_and_plus_one_on_tails():
    with pytest.raises(ZeroSupport):
        validate(DiscretePrior.from_lists((0.6, 0.0, 0.4), (0.1,)))
    with pytest.raises(ZeroSupport):
        validate(DiscretePrior.from_lists((0.4, 0.3, 0.3), (0.1, 0.0)))


def test_validate_rejects_nonnegative_tail_mean_unless_allowed():
    prior = DiscretePrior.from_lists((0.6, 0.3, 0.1), (0.6, 0.1))
    with pytest.raises(PositiveTailMean):
        validate(prior)

    vp = validate(prior, allow_positive_tail=True)
    assert vp.positive_tail is True
    assert vp.mean(2) == pytest.approx(0.2)


def test_validate_rejects_tied_means():
    with pytest.raises(NonStrictOrdering):
        validate(DiscretePrior.from_lists((0.4, 0.3, 0.3), (0.1, 0.1)))


def test_validate_passes_validated_prior_through(prior_a):
    assert validate(prior_a) is prior_a


def test_uniform_partial_expectation_matches_closed_form():
    first = UniformPrior()
    assert first.cdf(0.0) == pytest.approx(0.5)
    assert first.mean == 0.0
    assert first.partial_expectation(-1.0, -0.2, -0.2) == pytest.approx(-0.16)
    assert first.partial_expectation(-0.2, 0.6, -0.2) == pytest.approx(0.16)
    assert first.partial_expectation(0.5, 0.5, 0.0) == 0.0
    assert first.mass(-1.0, 1.0) == pytest.approx(1.0)


def test_piecewise_linear_and_quadrature_agree():
    knots = (-1.0, 0.0, 1.0)
    values = (0.0, 0.7, 1.0)
    linear = PiecewiseLinearPrior(knots, values)
    quadrature = QuadraturePrior.from_table(knots, values)

    assert linear.mean == pytest.approx(-0.2)
    for a, b, c in [(-1.0, 1.0, 0.0), (-0.5, 0.4, -0.2), (0.1, 0.9, 0.3)]:
        assert quadrature.partial_expectation(a, b, c) == pytest.approx(linear.partial_expectation(a, b, c), abs=1e-9)
    assert quadrature.breakpoints() == (0.0,)


def test_piecewise_linear_rejects_flat_or_short_tables():
    with pytest.raises(ZeroSupport):
        PiecewiseLinearPrior((-1.0, 0.0, 1.0), (0.0, 0.0, 1.0))
    with pytest.raises(ProbabilityOutOfRange):
        PiecewiseLinearPrior((-1.0,), (0.0,))
    with pytest.raises(ProbabilityOutOfRange):
        PiecewiseLinearPrior((-0.5, 1.0), (0.0, 1.0))


def test_quadrature_prior_rejects_cdf_with_wrong_ends():
    with pytest.raises(ProbabilityOutOfRange):
        QuadraturePrior(lambda x: (x + 1.0) / 4.0)


def test_continuous_setting_means_and_ordering(uniform_setting):
    assert uniform_setting.k == 2
    assert uniform_setting.mean(2) == pytest.approx(-0.2)
    assert uniform_setting.minus(2) == pytest.approx(0.6)
    assert validate_setting(uniform_setting) is uniform_setting

    with pytest.raises(NonStrictOrdering):
        validate_setting(ContinuousSetting(UniformPrior(), (0.6,)))
    with pytest.raises(ProbabilityOutOfRange):
        validate_setting(ContinuousSetting(UniformPrior(), (1.0,)))
    with pytest.raises(ActionIndexError):
        uniform_setting.plus(1)
