"""
Clouds, gaps, and off-cloud transform bounds for lacunary Riesz products.

The nonzero coefficients of ``p_K`` cluster around each ``n_k``.  With
``Delta >= 4`` the cluster sits inside ``[2n_k/3, 4n_k/3]`` and hence inside
the widened cloud ``C_k = [n_k/2, 3n_k/2]``; between consecutive widened
clouds lies the open gap ``G_k = (3n_k/2, n_{k+1}/2)`` where the transform is
small.  All interval endpoints are exact rationals.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .core import RieszSpec, _cosine_table, _fraction_str, lebesgue_ft
from .errors import CertificationError

__all__ = [
    "Cloud",
    "Gap",
    "CloudSystem",
    "GapBoundReport",
    "build_clouds",
    "locate",
    "off_cloud_bound",
    "edge_term",
    "bound_ratios",
    "tail_constant",
    "closed_form_bound",
    "gap_grid",
    "gap_bound_table",
    "gap_table_csv",
]

GRID_PER_OCTAVE = 64


class Cloud(NamedTuple):
    index: int
    center: int
    support: tuple[int, int]
    inner: tuple[Fraction, Fraction]
    widened: tuple[Fraction, Fraction]


class Gap(NamedTuple):
    index: int
    lo: Fraction
    hi: Fraction


@dataclass(frozen=True)
class CloudSystem:
    spec: RieszSpec
    clouds: tuple[Cloud, ...]
    gaps: tuple[Gap, ...]

    @property
    def width_ratio(self) -> Fraction:
        """``b_m / a_m`` for every widened cloud ``[a_m, b_m]`` (always 3)."""
        lo, hi = self.clouds[0].widened
        return hi / lo

    def cloud(self, k: int) -> Cloud:
        return self.clouds[k - 1]

    def gap(self, m: int) -> Gap:
        return self.gaps[m - 1]


def build_clouds(spec: RieszSpec) -> CloudSystem:
    """Construct and certify the cloud system of ``spec``.

    Raises
    ------
    CertificationError
        If ``Delta < 4`` or any containment fails under exact comparison.
    """
    if spec.lacunarity_floor < 4:
        raise CertificationError(
            f"lacunarity floor {spec.lacunarity_floor} < 4: off-cloud bounds do not apply"
        )
    clouds = []
    below = 0
    for k, n in enumerate(spec.frequencies, start=1):
        support = (n - below, n + below)
        inner = (Fraction(2 * n, 3), Fraction(4 * n, 3))
        widened = (Fraction(n, 2), Fraction(3 * n, 2))
        if not (widened[0] <= inner[0] <= support[0] and support[1] <= inner[1] <= widened[1]):
            raise CertificationError(f"containment chain fails for cloud {k}")
        clouds.append(Cloud(k, n, support, inner, widened))
        below += n
    gaps = []
    for k, (left, right) in enumerate(zip(clouds, clouds[1:]), start=1):
        lo, hi = left.widened[1], right.widened[0]
        if not lo < hi:
            raise CertificationError(f"gap {k} is empty")
        gaps.append(Gap(k, lo, hi))
    return CloudSystem(spec, tuple(clouds), tuple(gaps))


def locate(system: CloudSystem, s) -> tuple[str, int | None]:
    """Region of a nonnegative ``s``.

    Returns ``("cloud", k)``, ``("gap", m)``, ``("below", None)`` or
    ``("above", None)``.  Clouds are closed and gaps open, so boundary
    points belong to clouds.
    """
    x = Fraction(s)
    if x < 0:
        raise ValueError("locate expects s >= 0")
    clouds = system.clouds
    if x < clouds[0].widened[0]:
        return ("below", None)
    if x > clouds[-1].widened[1]:
        return ("above", None)
    for cloud in clouds:
        lo, hi = cloud.widened
        if lo <= x <= hi:
            return ("cloud", cloud.index)
        if x < lo:
            return ("gap", cloud.index - 1)
    raise AssertionError("unreachable: clouds and gaps cover the range")


@lru_cache(maxsize=32)
def _bound_terms(spec: RieszSpec, order: int):
    if spec.degree(order) >= 2**1000:
        raise ValueError("degree beyond double range: off-cloud bounds need a lower order")
    table = _cosine_table(spec, order)
    js = [j for j, _ in table]
    hi = np.array([float(j) for j in js])
    lo = np.array([float(j - int(h)) for j, h in zip(js, hi)])
    c = np.array([float(cj) for _, cj in table])
    return frozenset(js), hi, lo, c


def off_cloud_bound(spec: RieszSpec, order: int | None, s, two_sided: bool = False) -> float:
    """The finite sum ``sum_j c_j / (2 pi |j - |s||)`` over coefficients of ``p_K``.

    The sum leaves out the constant term of ``p_K``; add
    ``abs(lebesgue_ft(s))`` to bound ``|ft_real(p_K, s)|``.  Each cosine also
    contributes a ``c_j / (2 pi (|s| + j))`` term from its negative frequency;
    ``two_sided=True`` includes it, which makes the bound provable everywhere
    off the support.  Without it the sum can fall short next to a cloud.

    Raises
    ------
    ValueError
        If ``|s|`` is a frequency with nonzero coefficient.
    """
    order = spec._order(order)
    support, hi, lo, c = _bound_terms(spec, order)
    x = abs(float(s))
    if x == int(x) and int(x) in support:
        raise ValueError(f"bound is singular at the coefficient frequency {int(x)}")
    d = np.abs((x - hi) - lo)
    terms = c / (2 * math.pi * d)
    if two_sided:
        terms = np.concatenate([terms, c / (2 * math.pi * ((x + hi) + lo))])
    return math.fsum(terms)


def edge_term(s) -> float:
    """``|(1 - exp(-2 pi i s)) / (2 pi i s)|``, the constant-term contribution."""
    return float(abs(lebesgue_ft(s)))


def tail_constant(spec: RieszSpec, order: int | None = None) -> Fraction:
    """Smallest ``C`` making the tail estimate hold for every gap.

    For each gap ``m < K`` the tail ``sum_{m<k<=K} 3^{k-1} / n_k`` must not
    exceed ``C * 3^{m-1} / n_m``; the maximum ratio over ``m`` is returned.
    """
    order = spec._order(order)
    n = spec.frequencies[:order]
    best = Fraction(0)
    for m in range(1, order):
        tail = sum(Fraction(3 ** (k - 1), n[k - 1]) for k in range(m + 1, order + 1))
        best = max(best, tail / Fraction(3 ** (m - 1), n[m - 1]))
    return best


def closed_form_bound(spec: RieszSpec, m: int, constant: Fraction) -> Fraction:
    """``B_m = 6 (m + C) 3^{m-1} / n_m``."""
    return 6 * (m + constant) * Fraction(3 ** (m - 1), spec.frequencies[m - 1])


def gap_grid(gap: Gap, per_octave: int = GRID_PER_OCTAVE, minimum: int = 16) -> np.ndarray:
    """Log-spaced points strictly inside an open gap."""
    lo, hi = float(gap.lo), float(gap.hi)
    octaves = math.log2(hi / lo)
    count = max(minimum, int(math.ceil(per_octave * octaves)))
    pts = np.exp(np.linspace(math.log(lo), math.log(hi), count + 2))[1:-1]
    return pts


@dataclass(frozen=True)
class GapBoundReport:
    m: int
    gap_lo: Fraction
    gap_hi: Fraction
    grid_sup: float
    B_m: Fraction
    C_used: Fraction
    ft_sup: float = float("nan")

    @property
    def holds(self) -> bool:
        return self.grid_sup <= float(self.B_m)


def gap_bound_table(spec: RieszSpec, order: int | None = None, per_octave: int = GRID_PER_OCTAVE,
                    with_transform: bool = False) -> list[GapBoundReport]:
    """Grid suprema of the off-cloud bound on each gap, against ``B_m``.

    With ``with_transform`` the grid supremum of ``|ft_real(p_K, s)|`` is
    recorded too.
    """
    from .core import ft_real, partial_product

    order = spec._order(order)
    sub = RieszSpec(spec.frequencies[:order], spec.coefficients[:order], spec.lacunarity_floor)
    system = build_clouds(sub)
    constant = tail_constant(spec, order)
    poly = partial_product(spec, order) if with_transform else None
    rows = []
    for gap in system.gaps:
        pts = gap_grid(gap, per_octave)
        sup = max(off_cloud_bound(spec, order, s) for s in pts)
        ft_sup = float(np.max(np.abs(ft_real(poly, pts)))) if poly is not None else float("nan")
        rows.append(GapBoundReport(gap.index, gap.lo, gap.hi, sup,
                                   closed_form_bound(spec, gap.index, constant), constant, ft_sup))
    partial = 0.0
    for row in rows:
        partial += float(row.B_m)
        if not math.isfinite(partial):
            raise CertificationError("partial sums of B_m diverge")
    return rows


def bound_ratios(rows: list[GapBoundReport]) -> list[float]:
    """Successive ratios ``B_{m+1} / B_m``; all below 1 means the series converges."""
    return [float(b.B_m / a.B_m) for a, b in zip(rows, rows[1:])]


def _num(x) -> str:
    return format(float(x), ".17g")


def gap_table_csv(rows: list[GapBoundReport], header: list[str] | None = None) -> str:
    buf = io.StringIO()
    for line in header or ():
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["m", "gap_lo", "gap_hi", "grid_sup", "B_m", "C_used"])
    for r in rows:
        writer.writerow([r.m, _fraction_str(r.gap_lo), _fraction_str(r.gap_hi), _num(r.grid_sup),
                         _num(r.B_m), _num(r.C_used)])
    return buf.getvalue()
