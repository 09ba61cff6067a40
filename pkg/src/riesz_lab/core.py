"""
Riesz product partial products and their Fourier transforms.

A Riesz product is built from a lacunary list of integer frequencies
``n_1 < n_2 < ...`` and coefficients ``0 < a_m <= 1``.  Everything here works
with a truncated partial product

    p_K(x) = prod_{m <= K} (1 + a_m cos(2 pi n_m x))

whose Fourier coefficients are exact rationals.  Frequencies are Python
integers, so constructions with astronomically large frequencies stay exact.
"""

from __future__ import annotations

import bisect
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "RieszSpec",
    "SignVector",
    "TrigPolynomial",
    "ContractionSchedule",
    "decompose_frequency",
    "fourier_coefficient",
    "partial_product",
    "ft_real",
    "lebesgue_ft",
    "contraction_ft",
    "interpolated_ft",
    "SWITCH_WINDOW",
]

#: Distance from a node (s = +-j) inside which the Taylor branch is used.
SWITCH_WINDOW = 1e-6

# Terms with frequency above this are dropped from float evaluation; their
# contribution is below 2**-990 for any representable argument we accept.
_FLOAT_FREQ_CUTOFF = 2**1000
_MAX_ARGUMENT = 2.0**999

_PROVENANCES = ("rate", "intertwined", "dyadic", "manual", "greedy")


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    return Fraction(value)


def _fraction_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class RieszSpec:
    """Lacunary frequencies and coefficients of a truncated Riesz product.

    Parameters
    ----------
    frequencies : sequence of int
        Strictly increasing positive integers ``n_1 < ... < n_K``.
    coefficients : sequence of rationals, optional
        ``a_m`` with ``0 < a_m <= 1``.  Defaults to all ones.
    lacunarity_floor : rational
        Declared ``Delta`` with ``n_{m+1}/n_m >= Delta`` for every ``m``.  Must
        be at least 3 so that sign representations are unique.
    """

    frequencies: tuple[int, ...]
    coefficients: tuple[Fraction, ...] | None = None
    lacunarity_floor: Fraction = Fraction(3)

    def __post_init__(self):
        freqs = tuple(int(n) for n in self.frequencies)
        if not freqs:
            raise ValueError("a RieszSpec needs at least one frequency")
        if any(n <= 0 for n in freqs):
            raise ValueError("frequencies must be positive integers")
        coeffs = self.coefficients
        if coeffs is None:
            coeffs = (Fraction(1),) * len(freqs)
        coeffs = tuple(_as_fraction(a) for a in coeffs)
        if len(coeffs) != len(freqs):
            raise ValueError("need exactly one coefficient per frequency")
        for a in coeffs:
            if not 0 < a <= 1:
                raise ValueError(f"coefficient {a} outside (0, 1]")
        delta = _as_fraction(self.lacunarity_floor)
        if delta < 3:
            raise ValueError(f"lacunarity floor {delta} < 3: sign representations are not unique")
        for m, (lo, hi) in enumerate(zip(freqs, freqs[1:]), start=1):
            if hi <= lo:
                raise ValueError("frequencies must be strictly increasing")
            if Fraction(hi, lo) < delta:
                raise ValueError(f"n_{m + 1}/n_{m} = {Fraction(hi, lo)} is below the floor {delta}")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "lacunarity_floor", delta)

    def __len__(self) -> int:
        return len(self.frequencies)

    @property
    def order(self) -> int:
        return len(self.frequencies)

    def degree(self, order: int | None = None) -> int:
        """``ell_K``, the sum of the first ``order`` frequencies."""
        return sum(self.frequencies[: self._order(order)])

    def _order(self, order: int | None) -> int:
        if order is None:
            return len(self.frequencies)
        order = int(order)
        if not 0 <= order <= len(self.frequencies):
            raise ValueError(f"order {order} outside 0..{len(self.frequencies)}")
        return order

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_dict(self) -> dict:
        # strings keep arbitrary precision bit-exact
        return {
            "frequencies": [str(n) for n in self.frequencies],
            "coefficients": [_fraction_str(a) for a in self.coefficients],
            "lacunarity_floor": str(self.lacunarity_floor),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "RieszSpec":
        try:
            freqs = [int(str(n)) for n in data["frequencies"]]
        except KeyError as exc:
            raise ValueError("spec JSON lacks 'frequencies'") from exc
        coeffs = data.get("coefficients")
        if coeffs is not None:
            coeffs = [Fraction(str(a)) for a in coeffs]
        delta = Fraction(str(data.get("lacunarity_floor", "3")))
        return cls(tuple(freqs), coeffs, delta)

    @classmethod
    def from_json(cls, text: str) -> "RieszSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SignVector:
    """Representation ``j = n_k + sum_{i<k} s_i n_i`` with ``s_i in {-1,0,1}``."""

    top_index: int
    signs: tuple[int, ...]

    def __post_init__(self):
        if self.top_index < 1:
            raise ValueError("top index starts at 1")
        if len(self.signs) != self.top_index - 1:
            raise ValueError("need one sign per lower frequency")
        if any(s not in (-1, 0, 1) for s in self.signs):
            raise ValueError("signs must be -1, 0 or +1")

    def value(self, spec: RieszSpec) -> int:
        n = spec.frequencies
        return n[self.top_index - 1] + sum(s * n[i] for i, s in enumerate(self.signs))

    @property
    def active(self) -> int:
        """Number of factors of the product that contribute (top one included)."""
        return 1 + sum(1 for s in self.signs if s)


class _Clouds:
    """Cached per-(spec, order) lookup tables for cloud membership."""

    def __init__(self, spec: RieszSpec, order: int):
        self.freqs = spec.frequencies[:order]
        sums = [0]
        for n in self.freqs:
            sums.append(sums[-1] + n)
        self.below = sums  # below[k] = n_1 + ... + n_k
        self.lows = [n - sums[i] for i, n in enumerate(self.freqs)]

    def index_of(self, a: int, limit: int) -> int | None:
        """1-based index m <= limit whose cloud contains the positive integer a."""
        pos = bisect.bisect_right(self.lows, a, 0, limit)
        if pos == 0:
            return None
        m = pos
        if a <= self.freqs[m - 1] + self.below[m - 1]:
            return m
        return None


@lru_cache(maxsize=256)
def _clouds(spec: RieszSpec, order: int) -> _Clouds:
    return _Clouds(spec, order)


@lru_cache(maxsize=64)
def _assert_unique(spec: RieszSpec, order: int) -> bool:
    seen = set()
    n = spec.frequencies
    for k in range(1, order + 1):
        for signs in itertools.product((-1, 0, 1), repeat=k - 1):
            j = n[k - 1] + sum(s * n[i] for i, s in enumerate(signs))
            assert j > 0 and j not in seen, f"representation of {j} is not unique"
            seen.add(j)
    return True


def decompose_frequency(spec: RieszSpec, j: int, order: int | None = None) -> SignVector | None:
    """Return the sign representation of ``j``, or None if it has none.

    Parameters
    ----------
    spec : RieszSpec
    j : int
        Positive integer frequency.
    order : int, optional
        Use only the first ``order`` frequencies (default: all).
    """
    j = int(j)
    if j <= 0:
        raise ValueError("only positive frequencies have sign representations")
    order = spec._order(order)
    if order == 0:
        return None
    if __debug__ and order <= 8:
        _assert_unique(spec, order)
    clouds = _clouds(spec, order)
    k = clouds.index_of(j, order)
    if k is None:
        return None
    signs = [0] * (k - 1)
    residual = j - clouds.freqs[k - 1]
    limit = k - 1
    while residual:
        i = clouds.index_of(abs(residual), limit)
        if i is None:
            return None
        sign = 1 if residual > 0 else -1
        signs[i - 1] = sign
        residual -= sign * clouds.freqs[i - 1]
        limit = i - 1
    return SignVector(k, tuple(signs))


def fourier_coefficient(spec: RieszSpec, j: int, order: int | None = None) -> Fraction:
    """Exact exponential Fourier coefficient of ``p_K`` at the integer ``j``."""
    j = int(j)
    if j == 0:
        return Fraction(1)
    rep = decompose_frequency(spec, abs(j), order)
    if rep is None:
        return Fraction(0)
    a = spec.coefficients
    value = a[rep.top_index - 1] / 2
    for i, s in enumerate(rep.signs):
        if s:
            value *= a[i] / 2
    return value


@lru_cache(maxsize=64)
def _cosine_table(spec: RieszSpec, order: int) -> tuple[tuple[int, Fraction], ...]:
    n, a = spec.frequencies, spec.coefficients
    offsets: dict[int, Fraction] = {0: Fraction(1)}
    table = []
    for k in range(order):
        half = a[k] / 2
        for off, w in offsets.items():
            table.append((n[k] + off, a[k] * w))
        grown: dict[int, Fraction] = {}
        for off, w in offsets.items():
            grown[off] = w
            grown[off + n[k]] = w * half
            grown[off - n[k]] = w * half
        offsets = grown
    table.sort()
    return tuple(table)


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """Cosine polynomial ``1 + sum_j c_j cos(2 pi j x)`` with exact coefficients."""

    cosine_coeffs: Mapping[int, Fraction]
    constant_term: Fraction = Fraction(1)
    order: int = 0

    def __post_init__(self):
        object.__setattr__(self, "cosine_coeffs", MappingProxyType(dict(self.cosine_coeffs)))

    @property
    def degree(self) -> int:
        return max(self.cosine_coeffs, default=0)

    def exponential_coefficient(self, j: int) -> Fraction:
        j = abs(int(j))
        if j == 0:
            return self.constant_term
        return self.cosine_coeffs.get(j, Fraction(0)) / 2

    def integral(self) -> Fraction:
        """Integral over one period; only the constant term survives."""
        return self.constant_term

    @cached_property
    def _float_terms(self):
        js = sorted(j for j in self.cosine_coeffs if j < _FLOAT_FREQ_CUTOFF)
        hi = np.array([float(j) for j in js], dtype=float)
        lo = np.array([float(j - int(h)) for j, h in zip(js, hi)], dtype=float)
        half = np.array([float(self.cosine_coeffs[j]) / 2 for j in js], dtype=float)
        dropped = len(js) != len(self.cosine_coeffs)
        return hi, lo, half, dropped

    def __call__(self, x):
        """Evaluate the polynomial at points of the circle."""
        x = np.asarray(x, dtype=float)
        hi, _, half, _ = self._float_terms
        out = np.full(x.shape, float(self.constant_term))
        flat = x.reshape(-1)
        res = out.reshape(-1)
        for start in range(0, hi.size, 512):
            j = hi[start : start + 512]
            res += (np.cos(2 * np.pi * np.outer(flat, j)) * (2 * half[start : start + 512])).sum(axis=1)
        return out


def partial_product(spec: RieszSpec, order: int | None = None) -> TrigPolynomial:
    """Exact expansion of ``prod_{m <= K} (1 + a_m cos(2 pi n_m x))``.

    ``order=0`` gives the constant polynomial 1.
    """
    order = spec._order(order)
    return TrigPolynomial(dict(_cosine_table(spec, order)), Fraction(1), order)


def _taylor_unit(u):
    # (1 - exp(-2 pi i u)) / (2 pi i u) = sum_n z^n/(n+1)!, z = -2 pi i u
    z = -2j * np.pi * u
    return 1 + z / 2 + z * z / 6 + z * z * z / 24


def _numerator(s):
    # (1 - exp(-2 pi i s)) / (2 pi i) written through the reduced phase f
    f = s - np.rint(s)
    return np.exp(-1j * np.pi * f) * np.sin(np.pi * f) / np.pi


def lebesgue_ft(s):
    """Fourier transform of the uniform probability density on [0, 1].

    Equals 1 at 0 and ``(1 - exp(-2 pi i s)) / (2 pi i s)`` elsewhere.
    Accepts scalars or arrays.
    """
    arr = np.asarray(s, dtype=float)
    near = np.abs(arr) < SWITCH_WINDOW
    safe = np.where(near, 1.0, arr)
    out = np.where(near, _taylor_unit(arr), _numerator(arr) / safe)
    return out[()] if out.ndim == 0 else out


def _poly_ft(poly: TrigPolynomial, s: np.ndarray) -> np.ndarray:
    hi, lo, half, dropped = poly._float_terms
    if dropped and np.any(np.abs(s) >= _MAX_ARGUMENT):
        raise ValueError("argument too large for a polynomial with dropped huge frequencies")
    s = s.reshape(-1)
    numer = _numerator(s)
    c0 = float(poly.constant_term)
    near0 = np.abs(s) < SWITCH_WINDOW
    acc = np.where(near0, 0.0, c0 / np.where(near0, 1.0, s))
    extra = np.where(near0, c0 * _taylor_unit(s), 0.0).astype(complex)
    if hi.size:
        rows = max(1, 2_000_000 // hi.size)
        for start in range(0, s.size, rows):
            sl = slice(start, start + rows)
            x = s[sl, None]
            dm = (x - hi) - lo
            dp = (x + hi) + lo
            nm = np.abs(dm) < SWITCH_WINDOW
            np_ = np.abs(dp) < SWITCH_WINDOW
            with np.errstate(divide="ignore", invalid="ignore"):
                inv = np.where(nm, 0.0, 1.0 / dm) + np.where(np_, 0.0, 1.0 / dp)
            acc[sl] += inv @ half
            for mask, d in ((nm, dm), (np_, dp)):
                if mask.any():
                    r, c = np.nonzero(mask)
                    np.add.at(extra[sl], r, half[c] * _taylor_unit(d[r, c]))
    return numer * acc + extra


def ft_real(poly: TrigPolynomial, s):
    """Fourier transform on the real line of ``1_[0,1] p``.

    Computes ``int_0^1 exp(-2 pi i s x) p(x) dx`` term by term in closed form.
    Within :data:`SWITCH_WINDOW` of a node ``s = +-j`` the node term switches
    to its Taylor expansion, so at integer ``s`` the value is the exponential
    coefficient of ``p``.
    """
    arr = np.asarray(s, dtype=float)
    out = _poly_ft(poly, arr).reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def contraction_ft(base_ft: Callable, t, s):
    """Transform of the contraction ``C_t mu``: ``base_ft(t * s)``."""
    if not t > 0:
        raise ValueError(f"contraction scale must be positive, got {t}")
    return base_ft(float(t) * np.asarray(s, dtype=float))


@lru_cache(maxsize=64)
def _exponential_lookup(spec: RieszSpec, order: int) -> dict[int, float]:
    return {j: float(c) / 2 for j, c in _cosine_table(spec, order)}


def interpolated_ft(spec: RieszSpec, s, order: int | None = None):
    """Piecewise-linear interpolation of the integer coefficients ``mu_hat(j)``.

    This is the transform of the periodised Riesz product multiplied by a
    Fejer-type kernel: it agrees with :func:`fourier_coefficient` on the
    integers and vanishes on every ``[k, k+1]`` whose endpoints carry zero
    coefficients.
    """
    order = spec._order(order)
    table = _exponential_lookup(spec, order)

    def coeff(j: int) -> float:
        j = abs(j)
        return 1.0 if j == 0 else table.get(j, 0.0)

    arr = np.asarray(s, dtype=float)
    flat = arr.reshape(-1)
    out = np.empty(flat.shape)
    for i, x in enumerate(flat):
        k = math.floor(x)
        theta = x - k
        out[i] = (1 - theta) * coeff(k) + (theta * coeff(k + 1) if theta else 0.0)
    out = out.reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class ContractionSchedule:
    """Strictly decreasing positive scales ``t_1 > t_2 > ...``.

    ``provenance`` records which mechanism produced the scales.  Manual
    schedules need only be nonincreasing.
    """

    scales: tuple[Fraction, ...]
    provenance: str = "manual"
    meta: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        scales = tuple(_as_fraction(t) for t in self.scales)
        if any(t <= 0 for t in scales):
            raise ValueError("contraction scales must be positive")
        # manual schedules may repeat a scale (adversarial experiments)
        strict = self.provenance != "manual"
        if any(b > a or (strict and b == a) for a, b in zip(scales, scales[1:])):
            raise ValueError("contraction scales must be strictly decreasing" if strict
                             else "contraction scales must be nonincreasing")
        if self.provenance not in _PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    def __len__(self) -> int:
        return len(self.scales)

    @property
    def dilations(self) -> tuple[Fraction, ...]:
        return tuple(1 / t for t in self.scales)

    @property
    def dyadic_exponents(self) -> tuple[int, ...] | None:
        """Exponents ``b_k`` with ``t_k = 2**-b_k`` when every scale is dyadic."""
        out = []
        for t in self.scales:
            if t.numerator != 1 or t.denominator & (t.denominator - 1):
                return None
            out.append(t.denominator.bit_length() - 1)
        return tuple(out)

    def as_floats(self) -> np.ndarray:
        return np.array([float(t) for t in self.scales], dtype=float)

    def head(self, count: int) -> "ContractionSchedule":
        return ContractionSchedule(self.scales[:count], self.provenance, self.meta)

    def to_dict(self) -> dict:
        return {
            "scales": [_fraction_str(t) for t in self.scales],
            "provenance": self.provenance,
            "dyadic_exponents": list(self.dyadic_exponents) if self.dyadic_exponents else None,
            "meta": dict(self.meta),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: Mapping) -> "ContractionSchedule":
        scales = [Fraction(str(t)) for t in data.get("scales", [])]
        return cls(tuple(scales), data.get("provenance", "manual"), data.get("meta") or {})

    @classmethod
    def from_json(cls, text: str) -> "ContractionSchedule":
        return cls.from_dict(json.loads(text))


def representable_frequencies(spec: RieszSpec, order: int | None = None) -> list[int]:
    """All positive ``j`` with a nonzero coefficient, in increasing order."""
    return [j for j, _ in _cosine_table(spec, spec._order(order))]


def spec_from_frequencies(frequencies: Iterable[int], floor=3, coefficients: Sequence | None = None) -> RieszSpec:
    return RieszSpec(tuple(frequencies), coefficients, Fraction(floor))
