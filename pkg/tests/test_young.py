import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degree_lab.errors import ConfigurationError, DomainError, InvariantViolation
from degree_lab.young import (
    ConditionVerdict,
    Power,
    PowerLog,
    Status,
    Tabulated,
    check_divergence,
    check_doubling,
    check_growth_alpha,
    check_small_o,
    check_young_invariants,
    luxemburg_norm,
    orlicz_mean,
    parse_young,
    radial_projection_energy,
)

BUILTINS = [Power(1), Power(1.5), Power(2), Power(3), PowerLog(2, 1), PowerLog(3, 1.5), PowerLog(4, 1)]


# -- evaluation -------------------------------------------------------------------

def test_power_values():
    assert Power(2)(0.0) == 0.0
    assert Power(3)(2.0) == 8.0


def test_powerlog_value_at_e_minus_one():
    t = math.e - 1
    # t^2 = 2.9524924..., log(e + t) = log(4.4365637...) = 1.4898801... (50-digit check)
    assert PowerLog(2, 1)(t) == pytest.approx(1.9816979844166053, rel=1e-13)
    assert PowerLog(2, 1)(t) == pytest.approx(t * t / math.log(math.e + t), rel=1e-15)


@pytest.mark.parametrize("P", BUILTINS, ids=repr)
def test_negative_argument_is_a_domain_error(P):
    with pytest.raises(DomainError):
        P(-1e-3)


@pytest.mark.parametrize("P", BUILTINS, ids=repr)
def test_log_value_matches_direct_evaluation(P):
    t = np.geomspace(1e-3, 1e8, 50)
    np.testing.assert_allclose(P.log_value(np.log(t)), np.log(P(t)), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("text, expected", [
    ("power:p=1.5", Power(1.5)),
    ("powlog:n=2,a=1", PowerLog(2, 1)),
    ("POWLOG: n=3, a=1.5", PowerLog(3, 1.5)),
])
def test_parse_young(text, expected):
    assert parse_young(text) == expected


@pytest.mark.parametrize("text", ["power", "power:q=2", "powlog:a=1", "cubic:p=3", "power:p=0.5", ""])
def test_parse_young_rejects(text):
    with pytest.raises(ConfigurationError):
        parse_young(text)


def test_tabulated_from_csv_and_extrapolation(tmp_path):
    t = np.geomspace(0.01, 100, 40)
    path = tmp_path / "p.csv"
    path.write_text("t,P\n" + "".join(f"{a:.17g},{b:.17g}\n" for a, b in zip(t, t ** 2)))
    P = parse_young(f"table:{path}")
    assert isinstance(P, Tabulated)
    probe = np.geomspace(0.02, 90, 17)
    np.testing.assert_allclose(P(probe), probe ** 2, rtol=1e-10)
    # beyond the table the end slope (2 in log-log) continues
    assert P(1000.0) == pytest.approx(1e6, rel=1e-9)
    assert P.extrapolated(np.array([1.0, 1000.0])).tolist() == [False, True]
    verdict = check_growth_alpha(P, 1.5, t_range=(1.0, 1e4))
    assert "extrapolation" in verdict.diagnostic


def test_tabulated_rejects_non_monotone():
    with pytest.raises(ConfigurationError):
        Tabulated(np.array([1.0, 2.0, 3.0]), np.array([1.0, 3.0, 2.0]))


# -- invariants -------------------------------------------------------------------

@pytest.mark.parametrize("P", BUILTINS, ids=repr)
def test_builtin_invariants_hold(P):
    v = check_young_invariants(P)
    assert v.status is Status.HOLDS, v.diagnostic
    assert v.parameters["samples"] >= 1000


def test_concave_table_breaks_convexity():
    t = np.geomspace(1e-6, 1e6, 60)
    v = check_young_invariants(Tabulated(t, np.sqrt(t)))
    assert v.status is Status.FAILS


def test_inconclusive_needs_a_diagnostic():
    with pytest.raises(ValueError):
        ConditionVerdict("x", Status.INCONCLUSIVE)


# -- divergence and the radial projection ------------------------------------------

DIVERGENCE_CASES = [
    # (gauge as a function of n, diverges?)
    (lambda n: Power(n), True),
    (lambda n: PowerLog(n, 1), True),
    (lambda n: PowerLog(n, 1.5), False),
    (lambda n: Power(n - 1), False),
]


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("make, diverges", DIVERGENCE_CASES, ids=["t^n", "t^n/log", "t^n/log^1.5", "t^(n-1)"])
def test_divergence_and_radial_energy_are_complementary(make, diverges, n):
    P = make(n)
    div = check_divergence(P, n)
    radial = radial_projection_energy(P, n)
    assert div.status is (Status.HOLDS if diverges else Status.FAILS), div.diagnostic
    assert radial.verdict == ("Infinite" if diverges else "Finite")
    assert len(div.witness["partial_sums"]) == 41


def test_convergent_tail_value_for_power_n_minus_one():
    # int_1^inf t^(p-n-1) dt = 1/(n-p) = 1 for p = n - 1
    v = check_divergence(Power(1), 2)
    assert v.witness["partial_sums"][-1] == pytest.approx(1.0, rel=1e-9)


def test_radial_energy_of_power_one_and_a_half():
    # 2 pi int_0^1 r^-1.5 r dr = 4 pi
    e = radial_projection_energy(Power(1.5), 2)
    assert e.verdict == "Finite"
    assert e.value == pytest.approx(4 * math.pi, rel=1e-6)


def test_divergence_needs_n_at_least_two():
    with pytest.raises(DomainError):
        check_divergence(Power(2), 1)


# -- small-o, doubling, growth ----------------------------------------------------

@pytest.mark.parametrize("P, n, status", [
    (PowerLog(2, 1), 2, Status.HOLDS),
    (Power(2), 2, Status.FAILS),
    (Power(1.5), 2, Status.HOLDS),
    (PowerLog(3, 1), 3, Status.HOLDS),
])
def test_small_o(P, n, status):
    assert check_small_o(P, n).status is status


@pytest.mark.parametrize("p", [1, 1.5, 2, 3, 4.25])
def test_doubling_constant_of_a_power(p):
    v = check_doubling(Power(p))
    assert v.status is Status.HOLDS
    assert v.witness["K"] == pytest.approx(2 ** p, rel=1e-12)


def test_doubling_constant_of_the_log_gauge():
    K = check_doubling(PowerLog(2, 1)).witness["K"]
    assert 2 <= K <= 4


def test_doubling_fails_for_exponential_table():
    t = np.linspace(0.5, 60, 400)
    v = check_doubling(Tabulated(t, np.expm1(t)), t_range=(0.5, 30))
    assert v.status in (Status.FAILS, Status.INCONCLUSIVE)
    assert v.witness
    assert v.diagnostic


def test_doubling_rejects_vanishing_gauge():
    # t^60 extrapolated down to t = 1e-6 underflows to exactly zero
    t = np.linspace(1.0, 2.0, 20)
    with pytest.raises(InvariantViolation):
        check_doubling(Tabulated(t, t ** 60), t_range=(1e-6, 1e6))


@pytest.mark.parametrize("P, alpha, status", [
    (Power(2), 1, Status.HOLDS),
    (Power(3), 2, Status.HOLDS),
    (PowerLog(4, 1), 3.5, Status.HOLDS),
    (PowerLog(2, 1), 1.5, Status.HOLDS),
    (Power(1), 1.5, Status.FAILS),
])
def test_growth_alpha(P, alpha, status):
    assert check_growth_alpha(P, alpha).status is status


def test_growth_alpha_needs_positive_alpha():
    with pytest.raises(DomainError):
        check_growth_alpha(Power(2), 0.0)


# -- Orlicz mean and Luxemburg norm ---------------------------------------------

def test_luxemburg_small_fields():
    assert luxemburg_norm([1.0], [1.0], Power(2)) == pytest.approx(1.0, rel=1e-8)
    assert luxemburg_norm([2.0, 0.0], [0.5, 0.5], Power(2)) == pytest.approx(math.sqrt(2), rel=1e-8)
    assert luxemburg_norm([0.0, 0.0], [1.0, 2.0], PowerLog(2, 1)) == 0.0


def test_orlicz_mean_small_fields():
    assert orlicz_mean([0.0, 0.0], [1.0, 1.0], Power(2)) == 0.0
    assert orlicz_mean([1.0], [4 * math.pi], Power(2)) == pytest.approx(4 * math.pi)


def test_field_validation():
    with pytest.raises(DomainError):
        luxemburg_norm([1.0], [0.0], Power(2))
    with pytest.raises(DomainError):
        orlicz_mean([-1.0], [1.0], Power(2))


fields = st.lists(
    st.tuples(st.floats(0.0, 50.0), st.floats(1e-3, 5.0)), min_size=1, max_size=30,
).filter(lambda rows: any(v > 1e-6 for v, _ in rows))


@settings(max_examples=60, deadline=None)
@given(rows=fields, p=st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_luxemburg_matches_weighted_p_norm(rows, p):
    v, w = map(np.array, zip(*rows))
    expected = np.sum(w * v ** p) ** (1 / p)
    assert luxemburg_norm(v, w, Power(p)) == pytest.approx(expected, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(rows=fields, lam=st.floats(1e-3, 1e3),
       P=st.sampled_from([Power(1.5), PowerLog(2, 1), PowerLog(3, 1.5)]))
def test_luxemburg_is_homogeneous(rows, lam, P):
    v, w = map(np.array, zip(*rows))
    base = luxemburg_norm(v, w, P)
    assert luxemburg_norm(lam * v, w, P) == pytest.approx(lam * base, rel=1e-6)


@settings(max_examples=60, deadline=None)
@given(rows=fields, P=st.sampled_from(BUILTINS))
def test_unit_ball_property(rows, P):
    v, w = map(np.array, zip(*rows))
    if orlicz_mean(v, w, P) <= 1.0:
        assert luxemburg_norm(v, w, P) <= 1.0 + 1e-8
