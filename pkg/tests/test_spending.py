import math

import pytest

from sure_omt.spending import (SUM_SLACK, make_explicit, make_greedy, make_jm_family,
                               make_kernel, make_log_family, make_power_law,
                               parse_sequence_spec, validate_sequence)

# Normalizing constants frozen from an independent high-precision computation
# (truncated series at two different lengths plus the analytic tail integral
# and Euler-Maclaurin correction, agreeing to > 20 digits).
ZETA_1_6 = 2.28576566568012963583465513038
LOG_NORM_Q2 = 2.109742801236891974479
JM_NORM = 11.9519606923118057378656659779


def test_power_law_normalization():
    g = make_power_law(1.6)
    assert math.isclose(g.norm, ZETA_1_6, rel_tol=1e-13)
    # ratio of consecutive values is exactly (t+1)^q / t^q
    assert math.isclose(g.gamma(1) / g.gamma(2), 2.0 ** 1.6, rel_tol=1e-12)
    assert math.isclose(g.gamma(3) / g.gamma(6), 2.0 ** 1.6, rel_tol=1e-12)


def test_log_family_normalization():
    g = make_log_family(2.0)
    assert math.isclose(g.norm, LOG_NORM_Q2, rel_tol=1e-12)
    # unnormalized ratio gamma_1/gamma_2 = (3 ln^2 3) / (2 ln^2 2)
    want = (3.0 * math.log(3.0) ** 2) / (2.0 * math.log(2.0) ** 2)
    assert math.isclose(g.gamma(1) / g.gamma(2), want, rel_tol=1e-12)


def test_jm_family_normalization():
    g = make_jm_family()
    assert math.isclose(g.norm, JM_NORM, rel_tol=1e-12)
    t = 5.0
    want = math.log(t + 1) / ((t + 1) * math.exp(math.sqrt(math.log(t + 1)))) / JM_NORM
    assert math.isclose(g.gamma(5), want, rel_tol=1e-12)


def test_gamma_zero_for_nonpositive_t():
    for g in (make_power_law(1.6), make_kernel(3), make_greedy()):
        assert g.gamma(0) == 0.0
        assert g.gamma(-4) == 0.0
        assert g.prefix(0) == 0.0


def test_kernel_values_and_mass():
    g = make_kernel(4)
    assert [g.gamma(t) for t in range(1, 7)] == [0.25, 0.25, 0.25, 0.25, 0.0, 0.0]
    assert g.prefix(4) == 1.0
    assert g.tail_bound(4) == 0.0


def test_greedy_is_unit_mass_at_one():
    g = make_greedy()
    assert g.gamma(1) == 1.0
    assert g.gamma(2) == 0.0
    assert g.prefix(100) == 1.0


def test_explicit_sequence():
    g = make_explicit([0.5, 0.3])
    assert g.gamma(1) == 0.5 and g.gamma(2) == 0.3 and g.gamma(3) == 0.0
    assert g.prefix(2) == 0.8
    with pytest.raises(ValueError):
        make_explicit([0.5, -0.1])


def test_prefix_matches_direct_sum():
    for g in (make_power_law(2.0), make_log_family(1.5), make_jm_family()):
        direct = 0.0
        for t in range(1, 200):
            direct += g.gamma(t)
            assert g.prefix(t) == pytest.approx(direct, rel=1e-15)


@pytest.mark.parametrize("factory", [
    lambda: make_power_law(1.6),
    lambda: make_power_law(3.0),
    lambda: make_log_family(2.0),
    lambda: make_jm_family(),
    lambda: make_kernel(100),
    lambda: make_greedy(),
])
def test_total_mass_at_most_one(factory):
    v = validate_sequence(factory(), horizon=5000)
    assert v.ok, v.message
    assert v.total_at_horizon <= 1.0 + SUM_SLACK
    # the upper tail bound may overshoot by about half the next term
    assert v.total_at_horizon + v.tail_bound <= 1.0 + 1e-5


def test_mass_detects_violation():
    v = validate_sequence(make_explicit([0.9, 0.3]), horizon=10)
    assert not v.ok


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        make_power_law(1.0)
    with pytest.raises(ValueError):
        make_log_family(0.9)
    with pytest.raises(ValueError):
        make_kernel(0)


def test_parse_sequence_spec():
    g = parse_sequence_spec({"family": "power", "q": 1.6})
    assert g.kind == "power" and g.q == 1.6
    assert parse_sequence_spec({"family": "kernel", "h": 7}).h == 7
    assert parse_sequence_spec({"family": "greedy"}).values == (1.0,)
    assert parse_sequence_spec({"family": "jm"}).kind == "jm"
    assert parse_sequence_spec({"family": "log", "q": 2.0}).kind == "log"
    assert parse_sequence_spec({"family": "explicit", "values": [0.25, 0.25]}).gamma(2) == 0.25
    with pytest.raises(ValueError):
        parse_sequence_spec({"family": "nope"})


def test_tail_bound_dominates_remaining_mass():
    for g in (make_power_law(1.6), make_log_family(2.0), make_jm_family()):
        tail_sum = sum(g.gamma(t) for t in range(101, 3000))
        assert g.tail_bound(100) >= tail_sum
