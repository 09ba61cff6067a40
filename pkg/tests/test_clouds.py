from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riesz_lab import RieszSpec, build_clouds, ft_real, locate, partial_product
from riesz_lab.clouds import (
    bound_ratios,
    closed_form_bound,
    edge_term,
    gap_bound_table,
    gap_grid,
    gap_table_csv,
    off_cloud_bound,
    tail_constant,
)
from riesz_lab.core import representable_frequencies
from riesz_lab.errors import CertificationError
from strategies import lacunary_specs


@pytest.fixture(scope="module")
def spec4():
    return RieszSpec((4, 16, 64), None, 4)


def test_cloud_examples(spec4):
    system = build_clouds(spec4)
    c2 = system.cloud(2)
    assert c2.support == (12, 20)
    assert c2.inner == (Fraction(32, 3), Fraction(64, 3))
    assert c2.widened == (8, 24)
    g2 = system.gap(2)
    assert (g2.lo, g2.hi) == (24, 32)
    assert system.width_ratio == 3


def test_count_in_third_cloud(spec4):
    lo, hi = build_clouds(spec4).cloud(3).widened
    assert sum(1 for j in representable_frequencies(spec4) if lo <= j <= hi) == 9


def test_rejects_floor_below_four():
    with pytest.raises(CertificationError):
        build_clouds(RieszSpec((4, 16, 64)))


def test_locate_examples(spec4):
    system = build_clouds(spec4)
    assert locate(system, 16) == ("cloud", 2)
    assert locate(system, 25) == ("gap", 2)
    assert locate(system, 1) == ("below", None)
    assert locate(system, 1000) == ("above", None)
    # closed clouds, open gaps
    assert locate(system, 24) == ("cloud", 2)
    assert locate(system, 32) == ("cloud", 3)
    assert locate(system, Fraction(49, 2)) == ("gap", 2)
    with pytest.raises(ValueError):
        locate(system, -1)


@given(lacunary_specs(min_len=2, max_len=5, floor=4), st.floats(0, 5e4, allow_nan=False))
def test_locate_partition(spec, s):
    system = build_clouds(spec)
    kind, idx = locate(system, s)
    x = Fraction(s)
    inside_clouds = [c.index for c in system.clouds if c.widened[0] <= x <= c.widened[1]]
    inside_gaps = [g.index for g in system.gaps if g.lo < x < g.hi]
    assert len(inside_clouds) + len(inside_gaps) <= 1
    if kind == "cloud":
        assert inside_clouds == [idx]
    elif kind == "gap":
        assert inside_gaps == [idx]
    else:
        assert not inside_clouds and not inside_gaps


@given(lacunary_specs(min_len=1, max_len=6, floor=4))
@settings(max_examples=40)
def test_containment_and_counts(spec):
    system = build_clouds(spec)
    js = representable_frequencies(spec)
    for c in system.clouds:
        assert c.widened[0] <= c.inner[0] <= c.support[0]
        assert c.support[1] <= c.inner[1] <= c.widened[1]
        assert sum(1 for j in js if c.widened[0] <= j <= c.widened[1]) == 3 ** (c.index - 1)
    for g in system.gaps:
        assert g.lo < g.hi


def test_off_cloud_bound_example(spec4):
    p = partial_product(spec4)
    b = off_cloud_bound(spec4, 3, 25.0)
    assert b > 0
    assert abs(ft_real(p, 25.0)) - edge_term(25.0) <= b
    with pytest.raises(ValueError):
        off_cloud_bound(spec4, 3, 52.0)
    assert off_cloud_bound(spec4, 3, -25.0) == b


@given(lacunary_specs(min_len=2, max_len=5, floor=4), st.data())
@settings(max_examples=30)
def test_domination_at_random_gap_points(spec, data):
    p = partial_product(spec)
    system = build_clouds(spec)
    for _ in range(200 // max(len(system.gaps), 1)):
        g = data.draw(st.sampled_from(system.gaps))
        s = data.draw(st.floats(float(g.lo), float(g.hi), exclude_min=True, exclude_max=True))
        if not float(g.lo) < s < float(g.hi):
            continue
        bound = off_cloud_bound(spec, None, s, two_sided=True) + edge_term(s)
        assert abs(ft_real(p, s)) <= bound + 1e-12


def test_one_sided_sum_can_fall_short_next_to_a_cloud():
    # the printed sum omits the negative-frequency halves of the cosines
    spec = RieszSpec((3, 12, 48, 192, 960), None, 4)
    s = 288.5  # just above C_4 = [96, 288]
    value = abs(ft_real(partial_product(spec), s))
    assert value > off_cloud_bound(spec, None, s) + edge_term(s)
    assert value <= off_cloud_bound(spec, None, s, two_sided=True) + edge_term(s)


def test_tail_constant_and_closed_form():
    spec = RieszSpec(tuple(4**k for k in range(1, 9)), None, 4)
    C = tail_constant(spec)
    # the tail of sum 3^{k-1}/4^k is geometric with ratio 3/4, so C < 3
    assert 0 < C < 3
    assert closed_form_bound(spec, 1, C) == 6 * (1 + C) * Fraction(1, 4)


def test_gap_table_for_powers_of_four():
    spec = RieszSpec(tuple(4**k for k in range(1, 9)), None, 4)
    rows = gap_bound_table(spec, 8, with_transform=True)
    assert len(rows) == 7
    assert all(r.holds for r in rows)
    assert all(r.ft_sup <= r.grid_sup + 1.0 for r in rows)
    assert all(r < 1 for r in bound_ratios(rows))
    csv_text = gap_table_csv(rows, ["K: 8"])
    assert csv_text.splitlines()[0] == "# K: 8"
    assert csv_text.splitlines()[1] == "m,gap_lo,gap_hi,grid_sup,B_m,C_used"


def test_gap_table_smallest_case():
    rows = gap_bound_table(RieszSpec((4, 16), None, 4), 2)
    assert len(rows) == 1 and np.isfinite(rows[0].grid_sup)


def test_gap_grid_strictly_inside():
    from riesz_lab.clouds import Gap

    pts = gap_grid(Gap(1, Fraction(6), Fraction(8)))
    assert len(pts) >= 16
    assert np.all(pts > 6) and np.all(pts < 8)
    assert np.all(np.diff(pts) > 0)


def test_gap_values_decrease_along_gaps():
    spec = RieszSpec(tuple(4**k for k in range(1, 8)), None, 4)
    rows = gap_bound_table(spec)
    sups = [r.grid_sup for r in rows]
    assert all(b < a for a, b in zip(sups, sups[1:]))
