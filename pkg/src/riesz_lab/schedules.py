"""
Contraction schedules built by rate formulas, cloud intertwining, and dyadic
exponents, plus the exact certificates that go with them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .core import ContractionSchedule, RieszSpec
from .errors import CertificationError

__all__ = [
    "rate_scheduler",
    "RATE_PROOF_CONSTANT",
    "rate_budget",
    "Ordering",
    "intertwine_construct",
    "intertwine_orderings",
    "dilated_clouds",
    "dilated_cloud_disjointness",
    "dyadic_construct",
    "DisjointnessVerdict",
    "disjointness_check",
    "two_adic_valuation",
]

#: Constant of the explicit-rate argument: probability measures on [0, 1]
#: satisfy |nu_hat(u) - 1| <= 2 pi |u|, so squared differences of two of
#: them are at most (4 pi)^2 u^2; the far-field part needs only 10.
RATE_PROOF_CONSTANT = 16 * math.pi**2


def rate_budget(constant: float = RATE_PROOF_CONSTANT) -> float:
    """``C * sum_k k / 4^k = 4C/9``."""
    return constant * 4 / 9


def _check_decreasing(h: Callable, samples: np.ndarray) -> None:
    values = np.array([float(h(float(t))) for t in samples])
    if not np.all(np.diff(values) < 0):
        raise ValueError("majorant h must be strictly decreasing on its sample grid")
    if values[-1] < 0:
        raise ValueError("majorant h must be positive")


def rate_scheduler(h: Callable, h_inverse: Callable, N: int, t1=1, transform: Callable | None = None,
                   samples: np.ndarray | None = None) -> ContractionSchedule:
    """Schedule with ``t_{n+1} = t_n / (2^n T_n)``, ``T_n = max(2^n, h^{-1}(2^-n))``.

    Parameters
    ----------
    h, h_inverse : callable
        Decreasing majorant of ``|mu_hat|`` on ``|t| >= 1`` and its inverse.
        ``h_inverse`` receives an exact :class:`Fraction`.
    N : int
        Number of scales.
    t1 : rational
        First scale.
    transform : callable, optional
        When given, ``|transform(t)| <= h(t)`` is checked on the sample grid.
    """
    if N < 1:
        raise ValueError("need at least one scale")
    samples = np.geomspace(1.0, 1e6, 241) if samples is None else np.asarray(samples, float)
    _check_decreasing(h, samples)
    if transform is not None:
        mags = np.abs(np.asarray(transform(samples)))
        bounds = np.array([float(h(float(t))) for t in samples])
        if np.any(mags > bounds * (1 + 1e-12)):
            bad = samples[int(np.argmax(mags - bounds))]
            raise ValueError(f"|mu_hat({bad:.6g})| exceeds the majorant h")
    t = Fraction(t1)
    scales = [t]
    T_values = []
    for n in range(1, N):
        inv = h_inverse(Fraction(1, 2**n))
        T = max(Fraction(2**n), Fraction(inv))
        T_values.append(T)
        t = t / (2**n * T)
        scales.append(t)
    return ContractionSchedule(tuple(scales), "rate",
                               {"T": [f"{T.numerator}/{T.denominator}" for T in T_values]})


def _widened(n) -> tuple[Fraction, Fraction]:
    return (Fraction(n, 2), Fraction(3 * n, 2))


def _scale(rho: Fraction, interval):
    return (rho * interval[0], rho * interval[1])


def _least_power_of_two_above(x: Fraction, floor: Fraction = Fraction(0)) -> int:
    """Smallest ``2^e`` (``e >= 0``) strictly above ``x`` and at least ``floor``."""
    p = 1
    while p <= x or p < floor:
        p *= 2
    return p


@dataclass(frozen=True)
class Ordering:
    """One certified strict ordering ``left < right`` of dilated clouds."""

    left: tuple[int, int]  # (k, m): rho_k C_m
    right: tuple[int, int]
    holds: bool

    def __str__(self) -> str:
        (k1, m1), (k2, m2) = self.left, self.right
        return f"rho_{k1} C_{m1} < rho_{k2} C_{m2}"


def dilated_clouds(spec: RieszSpec, schedule: ContractionSchedule) -> dict[tuple[int, int], tuple[Fraction, Fraction]]:
    """``rho_k C_m`` for ``0 <= k <= len(schedule)`` and ``0 <= m <= len(spec)``.

    ``rho_0 = 1`` and ``C_0 = [1/2, 3/2]`` is the unit-frequency interval where
    a contracted uniform kernel is in transition.
    """
    rhos = [Fraction(1)] + list(schedule.dilations)
    clouds = [_widened(1)] + [_widened(n) for n in spec.frequencies]
    return {(k, m): _scale(rho, c) for k, rho in enumerate(rhos) for m, c in enumerate(clouds)}


def intertwine_orderings(spec: RieszSpec, schedule: ContractionSchedule) -> list[Ordering]:
    """Every strict ordering the intertwining induction promises.

    ``C_0 < C_1``; for each ``1 <= k < K`` the chain
    ``rho_{k-1}C_k < rho_kC_0 < ... < rho_kC_k < rho_0C_{k+1} < ... < rho_kC_{k+1}``;
    and the closing chain ``rho_{K-1}C_K < rho_KC_0 < ... < rho_KC_K``.
    """
    K = len(schedule)
    if len(spec) < K:
        raise ValueError("need at least as many frequencies as scales")
    box = dilated_clouds(spec, schedule)
    chains = [[(0, 0), (0, 1)]]
    for k in range(1, K + 1):
        chain = [(k - 1, k)] + [(k, m) for m in range(k + 1)]
        if k < K:
            chain += [(i, k + 1) for i in range(k + 1)]
        chains.append(chain)
    out = []
    for chain in chains:
        for a, b in zip(chain, chain[1:]):
            out.append(Ordering(a, b, box[a][1] < box[b][0]))
    return out


def dilated_cloud_disjointness(spec: RieszSpec, schedule: ContractionSchedule,
                               include_base: bool = True) -> tuple[bool, tuple | None]:
    """Exhaustive pairwise disjointness of all ``rho_k C_m``.

    Returns ``(True, None)`` or ``(False, ((k1, m1), (k2, m2)))`` for the first
    overlapping pair.  ``include_base`` adds ``k = 0`` and ``m = 0``.
    """
    box = dilated_clouds(spec, schedule)
    keys = sorted(k for k in box if include_base or (k[0] > 0 and k[1] > 0))
    for a, b in itertools.combinations(keys, 2):
        (lo1, hi1), (lo2, hi2) = box[a], box[b]
        if not (hi1 < lo2 or hi2 < lo1):
            return False, (a, b)
    return True, None


def intertwine_construct(delta=4, K: int = 2) -> tuple[RieszSpec, ContractionSchedule]:
    """Alternately choose frequencies and scales so dilated clouds interleave.

    Each ``n_{k+1}`` and each ``rho_{k+1} = 1/t_{k+1}`` is the least power of
    two satisfying its strict inequalities (and ``n_{k+1} >= Delta n_k``).

    Raises
    ------
    CertificationError
        If the exact ordering or disjointness check fails.
    """
    delta = Fraction(delta)
    if delta < 4:
        raise ValueError("intertwining needs Delta >= 4")
    if K < 1:
        raise ValueError("K must be at least 1")
    base = _widened(1)
    n = [_least_power_of_two_above(2 * base[1])]  # C_0 < C_1
    rho = [Fraction(1), Fraction(_least_power_of_two_above(3 * n[0]))]  # C_1 < rho_1 C_0
    for k in range(1, K):
        # rho_k C_k < rho_0 C_{k+1}
        n.append(_least_power_of_two_above(3 * rho[k] * n[k - 1], delta * n[k - 1]))
        # rho_k C_{k+1} < rho_{k+1} C_0
        rho.append(Fraction(_least_power_of_two_above(3 * rho[k] * n[k])))
    spec = RieszSpec(tuple(n), None, delta)
    schedule = ContractionSchedule(tuple(1 / r for r in rho[1:]), "intertwined")
    bad = [o for o in intertwine_orderings(spec, schedule) if not o.holds]
    if bad:
        raise CertificationError(f"ordering fails: {bad[0]}")
    ok, pair = dilated_cloud_disjointness(spec, schedule)
    if not ok:
        raise CertificationError(f"dilated clouds overlap: {pair}")
    return spec, schedule


def dyadic_construct(M: int, K: int) -> tuple[RieszSpec, ContractionSchedule]:
    """``n_m = 2^(a_m)``, ``a_m = 4^m`` and ``t_k = 2^(-b_k)``, ``b_k = 2 * 4^k``."""
    if M < 1 or K < 1:
        raise ValueError("M and K must be at least 1")
    a = [2 ** (2 * m) for m in range(1, M + 1)]
    b = [2 ** (2 * k + 1) for k in range(1, K + 1)]
    spec = RieszSpec(tuple(2**e for e in a), None, Fraction(4))
    schedule = ContractionSchedule(tuple(Fraction(1, 2**e) for e in b), "dyadic",
                                   {"a": [str(e) for e in a], "b": [str(e) for e in b]})
    return spec, schedule


def two_adic_valuation(x: int) -> int:
    x = abs(int(x))
    if x == 0:
        raise ValueError("valuation of 0 is infinite")
    return (x & -x).bit_length() - 1


@dataclass(frozen=True)
class DisjointnessVerdict:
    disjoint: bool
    method: str
    witness: tuple[tuple[int, int], tuple[int, int]] | None = None  # ((m1, m2), (k1, k2)), 1-based

    def __bool__(self) -> bool:
        return self.disjoint


def disjointness_check(a: Sequence[int], b: Sequence[int], slack: int = 0) -> DisjointnessVerdict:
    """Certify ``a_{m2} - a_{m1} != b_{k1} - b_{k2}`` for ``k1 != k2``.

    The fast route uses 2-adic valuations: every difference of ``a`` with even
    valuation and every difference of ``b`` with odd valuation rules equality
    out.  Otherwise (or with ``slack > 0``, which asks for
    ``|a_{m2} - a_{m1} - (b_{k1} - b_{k2})| > slack``) the difference sets are
    compared exhaustively and the first offending quadruple is returned.
    """
    a = [int(x) for x in a]
    b = [int(x) for x in b]
    if len(b) < 2:
        return DisjointnessVerdict(True, "vacuous")
    if len(set(b)) != len(b):
        k1 = next(i for i, x in enumerate(b) if b.count(x) > 1)
        k2 = b.index(b[k1], k1 + 1)
        return DisjointnessVerdict(False, "exhaustive", ((1, 1), (k1 + 1, k2 + 1)))
    a_pairs = [(i, j) for i in range(len(a)) for j in range(len(a)) if i != j]
    b_pairs = [(i, j) for i in range(len(b)) for j in range(len(b)) if i != j]
    if slack == 0:
        a_even = all(two_adic_valuation(a[j] - a[i]) % 2 == 0 for i, j in a_pairs if a[j] != a[i])
        b_odd = all(two_adic_valuation(b[i] - b[j]) % 2 == 1 for i, j in b_pairs)
        if a_even and b_odd and len(set(a)) == len(a):
            return DisjointnessVerdict(True, "valuation-parity")
    for m1, m2 in a_pairs:
        da = a[m2] - a[m1]
        for k1, k2 in b_pairs:
            if abs(da - (b[k1] - b[k2])) <= slack:
                return DisjointnessVerdict(False, "exhaustive", ((m1 + 1, m2 + 1), (k1 + 1, k2 + 1)))
    return DisjointnessVerdict(True, "exhaustive")
