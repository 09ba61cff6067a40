from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from riesz_lab import ContractionSchedule, RieszSpec, lebesgue_ft
from riesz_lab.errors import CertificationError
from riesz_lab.schedules import (
    RATE_PROOF_CONSTANT,
    dilated_cloud_disjointness,
    dilated_clouds,
    disjointness_check,
    dyadic_construct,
    intertwine_construct,
    intertwine_orderings,
    rate_budget,
    rate_scheduler,
    two_adic_valuation,
)


def inv_t():
    return (lambda t: 1 / t), (lambda y: 1 / Fraction(y))


# -- rate ----------------------------------------------------------------------


def test_rate_example():
    sched = rate_scheduler(*inv_t(), 4)
    assert sched.scales == (Fraction(1), Fraction(1, 4), Fraction(1, 64), Fraction(1, 4096))
    assert sched.provenance == "rate"
    assert sched.meta["T"] == ["2/1", "4/1", "8/1"]


@pytest.mark.parametrize("power", [0.5, 1.0, 2.0])
def test_rate_step_bounds(power):
    sched = rate_scheduler(lambda t: t**-power, lambda y: Fraction(y) ** Fraction(-1) if power == 1
                           else Fraction(float(y) ** (-1 / power)), 6)
    T = [Fraction(x) for x in sched.meta["T"]]
    for n, Tn in enumerate(T, start=1):
        assert Tn >= 2**n
    for n, (a, b) in enumerate(zip(sched.scales, sched.scales[1:]), start=1):
        assert b / a <= Fraction(1, 4**n)


def test_rate_rejects_increasing_majorant():
    with pytest.raises(ValueError):
        rate_scheduler(lambda t: t, lambda y: Fraction(y), 3)
    with pytest.raises(ValueError):
        rate_scheduler(lambda t: 1.0, lambda y: Fraction(1), 3)


def test_rate_checks_transform_against_majorant():
    # |lebesgue_ft(t)| <= 1/(pi t) <= 1/sqrt(t) on t >= 1, but not <= 1/t^2
    rate_scheduler(lambda t: t**-0.5, lambda y: 1 / Fraction(y) ** 2, 3, transform=lebesgue_ft)
    with pytest.raises(ValueError):
        rate_scheduler(lambda t: t**-2.0, lambda y: Fraction(float(y) ** -0.5), 3,
                       transform=lambda s: 0.9 * np.ones_like(s))


def test_rate_budget_value():
    assert rate_budget() == pytest.approx(4 * RATE_PROOF_CONSTANT / 9)
    assert rate_budget(1.0) == pytest.approx(sum(k / 4**k for k in range(1, 200)))


# -- intertwining ---------------------------------------------------------------


def test_intertwine_two_steps():
    spec, sched = intertwine_construct(4, 2)
    assert spec.frequencies == (4, 256)
    assert sched.scales == (Fraction(1, 16), Fraction(1, 16384))
    orderings = intertwine_orderings(spec, sched)
    assert len(orderings) == 8
    assert all(o.holds for o in orderings)
    assert str(orderings[0]) == "rho_0 C_0 < rho_0 C_1"


def test_intertwine_single_step():
    spec, sched = intertwine_construct(4, 1)
    assert len(spec) == 1 and len(sched) == 1
    assert dilated_cloud_disjointness(spec, sched) == (True, None)


@pytest.mark.parametrize("K,count", [(3, 15), (4, 24), (5, 35)])
def test_intertwine_disjoint_up_to_five(K, count):
    spec, sched = intertwine_construct(4, K)
    assert len(intertwine_orderings(spec, sched)) == count
    ok, pair = dilated_cloud_disjointness(spec, sched)
    assert ok and pair is None
    assert all(b < a for a, b in zip(sched.scales, sched.scales[1:]))
    assert spec.lacunarity_floor == 4
    assert all(b >= 4 * a for a, b in zip(spec.frequencies, spec.frequencies[1:]))


@pytest.mark.parametrize("delta", [5, Fraction(9, 2), 16])
def test_intertwine_other_ratios(delta):
    spec, sched = intertwine_construct(delta, 3)
    assert all(b >= delta * a for a, b in zip(spec.frequencies, spec.frequencies[1:]))
    assert dilated_cloud_disjointness(spec, sched)[0]


@given(st.floats(1e-3, 1e12, allow_nan=False))
def test_scaled_point_lies_in_at_most_one_cloud(s):
    spec, sched = intertwine_construct(4, 4)
    x = Fraction(s)
    hits = [km for km, (lo, hi) in dilated_clouds(spec, sched).items() if lo <= x <= hi]
    assert len(hits) <= 1


def test_intertwine_rejects_bad_parameters():
    with pytest.raises(ValueError):
        intertwine_construct(3, 2)
    with pytest.raises(ValueError):
        intertwine_construct(4, 0)


def test_overlapping_schedule_is_reported():
    spec = RieszSpec((4, 16), None, 4)
    sched = ContractionSchedule((Fraction(1, 2), Fraction(1, 4)), "manual")
    ok, pair = dilated_cloud_disjointness(spec, sched)
    assert not ok and pair is not None
    assert not all(o.holds for o in intertwine_orderings(spec, sched))


def test_certification_error_type():
    assert issubclass(CertificationError, Exception)


# -- dyadic --------------------------------------------------------------------


def test_dyadic_examples():
    spec, sched = dyadic_construct(3, 3)
    assert sched.meta == {"a": ["4", "16", "64"], "b": ["8", "32", "128"]}
    assert spec.frequencies[0] == 16
    assert sched.scales[0] == Fraction(1, 256)
    assert spec.frequencies[2] == 2**64
    assert sched.scales[2] == Fraction(1, 2**128)
    assert sched.provenance == "dyadic"
    with pytest.raises(ValueError):
        dyadic_construct(0, 1)


def test_valuation():
    assert [two_adic_valuation(x) for x in (12, 48, 60, 24, 96, 120, -8, 1)] == [2, 4, 2, 3, 5, 3, 3, 0]
    with pytest.raises(ValueError):
        two_adic_valuation(0)


@pytest.mark.parametrize("M", range(1, 7))
@pytest.mark.parametrize("K", range(1, 7))
def test_dyadic_parity(M, K):
    _, sched = dyadic_construct(M, K)
    a = [int(x) for x in sched.meta["a"]]
    b = [int(x) for x in sched.meta["b"]]
    verdict = disjointness_check(a, b)
    assert verdict
    assert verdict.method == ("vacuous" if K == 1 else "valuation-parity")


def test_engineered_counterexample():
    verdict = disjointness_check((4, 16), (8, 20))
    assert not verdict
    assert verdict.witness == ((1, 2), (2, 1))
    assert verdict.method == "exhaustive"


def test_single_scale_is_vacuous():
    assert disjointness_check((4, 16, 64), (8,)).method == "vacuous"


def test_slack_semantics():
    a, b = (4, 16, 64), (8, 32, 128)
    assert disjointness_check(a, b, slack=1)
    # a-difference 12 vs b-difference 24: off by exactly 12
    v = disjointness_check(a, b, slack=12)
    assert not v and v.witness is not None
    (m1, m2), (k1, k2) = v.witness
    assert abs(a[m2 - 1] - a[m1 - 1] - (b[k1 - 1] - b[k2 - 1])) <= 12


@given(st.lists(st.integers(-200, 200), min_size=1, max_size=5, unique=True),
       st.lists(st.integers(-200, 200), min_size=1, max_size=5, unique=True))
def test_check_matches_brute_force(a, b):
    collide = any(a[m2] - a[m1] == b[k1] - b[k2]
                  for m1 in range(len(a)) for m2 in range(len(a))
                  for k1 in range(len(b)) for k2 in range(len(b)) if k1 != k2)
    assert bool(disjointness_check(a, b)) == (not collide)
