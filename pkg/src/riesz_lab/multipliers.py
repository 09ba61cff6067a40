"""
Square-function multipliers: evaluation, grid scans and greedy selection.

For a contraction schedule ``t_1 > t_2 > ...`` and a probability measure
``mu`` on [0, 1] the square function against the Lebesgue averages has the
multiplier

    Sigma_K(s) = sum_{k <= K} |lambda_hat(t_k s) - mu_hat(t_k s)|^2

where ``lambda`` is the uniform density on [0, 1].  A uniform bound on
``Sigma_K`` gives an L^2 bound for the square function by Plancherel.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ._parallel import chunked_map
from .clouds import CloudSystem
from .core import (
    ContractionSchedule,
    RieszSpec,
    ft_real,
    interpolated_ft,
    lebesgue_ft,
    partial_product,
)
from .errors import SelectionExhausted

__all__ = [
    "MultiplierFunction",
    "ContractionFamily",
    "SigmaScan",
    "GreedySelection",
    "triangle_ft",
    "uniform_multiplier",
    "triangle_multiplier",
    "riesz_multiplier",
    "sigma_values",
    "sigma_K",
    "default_scan_grid",
    "scan_sup",
    "scan_csv",
    "greedy_subsequence",
    "square_norm_bound",
    "DEFAULT_BUDGET",
]

#: Budget for Sigma from the greedy construction: C_K^2 < 5.
DEFAULT_BUDGET = 5.0


def triangle_ft(s):
    """Transform of the density ``2(1 - x)`` on [0, 1].

    With ``z = -2 pi i s`` this is ``2 (e^z - 1 - z) / z^2``.
    """
    arr = np.asarray(s, dtype=float)
    z = -2j * np.pi * arr
    small = np.abs(z) < 0.5
    zs = np.where(small, 1.0, z)
    direct = 2 * (np.exp(zs) - 1 - zs) / (zs * zs)
    series = np.zeros_like(z)
    term = np.full_like(z, 2.0 / 2)  # 2 z^n / (n+2)!, n = 0
    for n in range(18):
        series = series + term
        term = term * z / (n + 3)
    out = np.where(small, series, direct)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class MultiplierFunction:
    """A transform ``phi: R -> C`` with optional analytic side information.

    Parameters
    ----------
    evaluate : callable
        Vectorised evaluator.
    name : str
    vanishes_at_infinity : bool
    decay : callable, optional
        Majorant of ``|phi(s)|``, nonincreasing in ``|s|``.
    lipschitz_at_zero : float, optional
        ``L`` with ``|phi(s) - 1| <= L |s|`` for all ``s``.
    """

    evaluate: Callable
    name: str = "multiplier"
    vanishes_at_infinity: bool = True
    decay: Callable | None = None
    lipschitz_at_zero: float | None = None

    def __call__(self, s):
        return self.evaluate(np.asarray(s, dtype=float))

    def contracted(self, t) -> "MultiplierFunction":
        if not t > 0:
            raise ValueError("contraction scale must be positive")
        tf = float(t)
        base = self
        decay = None if base.decay is None else (lambda s: base.decay(tf * np.asarray(s, dtype=float)))
        lip = None if base.lipschitz_at_zero is None else base.lipschitz_at_zero * tf
        return MultiplierFunction(lambda s: base.evaluate(tf * np.asarray(s, dtype=float)),
                                  f"{base.name}@{t}", base.vanishes_at_infinity, decay, lip)

    def asymptotic_threshold(self, eps: float, radius: float) -> float:
        """Largest scale ``t`` with ``|phi(t s) - 1| <= eps`` for ``|s| <= radius``."""
        if self.lipschitz_at_zero is None:
            raise ValueError(f"{self.name} carries no modulus at zero")
        return eps / (self.lipschitz_at_zero * radius)


def uniform_multiplier() -> MultiplierFunction:
    return MultiplierFunction(
        lebesgue_ft, "uniform", True,
        decay=lambda s: np.minimum(1.0, 1.0 / (np.pi * np.maximum(np.abs(s), 1e-300))),
        lipschitz_at_zero=math.pi,
    )


def triangle_multiplier() -> MultiplierFunction:
    def decay(s):
        a = np.maximum(np.abs(np.asarray(s, dtype=float)), 1e-300)
        return np.minimum(1.0, (1 + np.pi * a) / (np.pi**2 * a * a))

    return MultiplierFunction(triangle_ft, "triangle", True, decay, 2 * math.pi / 3)


def riesz_multiplier(spec: RieszSpec, order: int | None = None, variant: str = "real") -> MultiplierFunction:
    """Transform of the Riesz partial product of the given order.

    ``variant="real"`` is the transform of ``1_[0,1] p_K`` on the real line;
    ``variant="interpolated"`` is the piecewise-linear interpolation of the
    integer coefficients.
    """
    order = spec._order(order)
    ell = spec.degree(order)
    # beyond float range the decay edge is never reached
    ell_f = float(ell) if ell < 2**1000 else math.inf
    if variant == "real":
        poly = partial_product(spec, order)
        mass = sum(float(c) for c in poly.cosine_coeffs.values())
        edge = 2.0 * max(ell_f, 1.0)

        def decay(s):
            a = np.abs(np.asarray(s, dtype=float))
            tail = (1 + 4 * mass / 3) / (np.pi * np.maximum(a, 1e-300))
            return np.where(a >= edge, np.minimum(1.0, tail), 1.0)

        # p is symmetric about 1/2, so its mean is 1/2
        return MultiplierFunction(lambda s: ft_real(poly, s), f"riesz[K={order}]", True, decay, math.pi)
    if variant == "interpolated":
        def decay(s):
            return np.where(np.abs(np.asarray(s, dtype=float)) > ell_f + 1, 0.0, 1.0)

        return MultiplierFunction(lambda s: interpolated_ft(spec, s, order), f"interpolated[K={order}]",
                                  True, decay, 1.0)
    raise ValueError(f"unknown variant {variant!r}")


def _as_measure(measure, order=None, variant="real") -> MultiplierFunction:
    if isinstance(measure, MultiplierFunction):
        return measure
    if isinstance(measure, RieszSpec):
        return riesz_multiplier(measure, order, variant)
    if callable(measure):
        return MultiplierFunction(measure)
    raise TypeError(f"cannot use {type(measure).__name__} as a measure transform")


def sigma_values(measure: MultiplierFunction, scales: Sequence, t, reference: MultiplierFunction | None = None):
    """``sum_k |reference(t_k t) - measure(t_k t)|^2`` for every ``t``."""
    ref = reference or uniform_multiplier()
    arr = np.asarray(t, dtype=float)
    flat = arr.reshape(-1)
    total = np.zeros(flat.shape)
    for tk in scales:
        x = float(tk) * flat
        total += np.abs(ref(x) - measure(x)) ** 2
    out = total.reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def sigma_K(measure, schedule: ContractionSchedule, K: int | None, t, order: int | None = None,
            variant: str = "real"):
    """Square-function multiplier truncated after ``K`` scales.

    ``measure`` is a :class:`RieszSpec` (transform of its partial product of
    the given ``order``; ``variant`` picks real or interpolated) or a
    :class:`MultiplierFunction`.
    """
    K = len(schedule) if K is None else int(K)
    if K > len(schedule):
        raise ValueError(f"K={K} exceeds the schedule length {len(schedule)}")
    meas = _as_measure(measure, order, variant)
    return sigma_values(meas, schedule.scales[:K], t)


def default_scan_grid(schedule: ContractionSchedule, spec: RieszSpec | None = None, order: int | None = None,
                      t_min: float = 1e-3, t_max: float | None = None, per_octave: int = 64,
                      points: int | None = None) -> np.ndarray:
    """Log grid for sup scans with dilated cloud edges injected.

    Without ``t_max`` the range ends at ``min(ell_K / t_K, 1e9)`` for Riesz
    specs and at ``1e6`` otherwise.  ``points`` overrides ``per_octave``.
    """
    if t_max is None:
        if spec is not None and len(schedule):
            ell = spec.degree(order)
            t_max = float(min(Fraction(ell) / schedule.scales[-1], Fraction(10**9)))
        else:
            t_max = 1e6
    t_max = max(t_max, t_min * 2)
    if points is None:
        points = max(2, int(math.ceil(per_octave * math.log2(t_max / t_min))) + 1)
    grid = np.geomspace(t_min, t_max, points)
    if spec is not None:
        extra = []
        freqs = spec.frequencies[: spec._order(order)]
        lo, hi = Fraction(t_min), Fraction(t_max)
        for rho in schedule.dilations:
            for base in [1] + list(freqs):
                for edge in (Fraction(base, 2), Fraction(base), Fraction(3 * base, 2)):
                    x = rho * edge  # compare exactly; most edges are far outside float range
                    if lo <= x <= hi:
                        extra.append(float(x))
        grid = np.unique(np.concatenate([grid, np.array(extra, dtype=float)]))
    return grid


@dataclass
class SigmaScan:
    """Result of a sup scan of ``Sigma_K`` over a grid."""

    label: str
    schedule: ContractionSchedule
    K: int
    order: int | None
    grid: np.ndarray
    values: np.ndarray
    budget: float
    region_tags: list[str] = field(default_factory=list)
    cloud_counts: np.ndarray | None = None
    partial_sups: tuple[float, ...] = ()  # sup of Sigma_k over the grid for k = 1..K

    @property
    def sup(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0

    @property
    def argmax_t(self) -> float | None:
        return float(self.grid[int(np.argmax(self.values))]) if self.values.size else None

    @property
    def passed(self) -> bool:
        return self.sup <= self.budget

    @property
    def witness(self) -> float | None:
        """First grid point where the budget is exceeded, if any."""
        bad = np.nonzero(self.values > self.budget)[0]
        return float(self.grid[bad[0]]) if bad.size else None

    def _masked_sup(self, on: bool) -> float:
        if self.cloud_counts is None:
            return float("nan") if on else self.sup
        mask = self.cloud_counts > 0 if on else self.cloud_counts == 0
        return float(self.values[mask].max()) if mask.any() else 0.0

    @property
    def on_cloud_sup(self) -> float:
        return self._masked_sup(True)

    @property
    def off_cloud_sup(self) -> float:
        return self._masked_sup(False)

    @property
    def max_cloud_count(self) -> int:
        return int(self.cloud_counts.max()) if self.cloud_counts is not None and self.cloud_counts.size else 0

    def summary(self) -> dict:
        return {
            "label": self.label,
            "K": self.K,
            "order": self.order,
            "grid_points": int(self.grid.size),
            "sup": self.sup,
            "argmax_t": self.argmax_t,
            "budget": self.budget,
            "pass": self.passed,
            "witness_t": self.witness,
            "on_cloud_sup": self.on_cloud_sup if self.cloud_counts is not None else None,
            "off_cloud_sup": self.off_cloud_sup,
            "max_in_dilated_cloud_count": self.max_cloud_count,
            "sup_by_K": list(self.partial_sups),
        }

    def summary_json(self, extra: dict | None = None) -> str:
        data = self.summary()
        data.update(extra or {})
        return json.dumps(data, indent=2, sort_keys=True, default=_json_default)


def _json_default(obj):
    if isinstance(obj, float):
        return float(format(obj, ".17g"))
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(type(obj).__name__)


def _cloud_hits(scales: Sequence[Fraction], system: CloudSystem, grid: np.ndarray):
    counts = np.zeros(grid.size, dtype=int)
    tags = []
    edges = [(c.index, c.widened) for c in system.clouds]
    for i, t in enumerate(grid):
        tq = Fraction(float(t))
        hits = []
        for k, tk in enumerate(scales, start=1):
            x = tk * tq
            for m, (lo, hi) in edges:
                if lo <= x <= hi:
                    hits.append((k, m))
                    break
        counts[i] = len(hits)
        if not hits:
            tags.append("off-cloud")
        elif len(hits) == 1:
            tags.append(f"cloud:k={hits[0][0]}:m={hits[0][1]}")
        else:
            tags.append("multi:" + ";".join(f"k={k}:m={m}" for k, m in hits))
    return counts, tags


def scan_sup(measure, schedule: ContractionSchedule, K: int | None = None, grid=None, budget: float = DEFAULT_BUDGET,
             order: int | None = None, variant: str = "real", label: str | None = None,
             reference: MultiplierFunction | None = None) -> SigmaScan:
    """Evaluate ``Sigma_K`` over a grid and compare its supremum with a budget.

    Budget violations are reported through :attr:`SigmaScan.passed` and
    :attr:`SigmaScan.witness`, not raised.  For Riesz specs with ``Delta >= 4``
    each grid point is tagged with the dilated clouds it hits.
    """
    K = len(schedule) if K is None else int(K)
    if K > len(schedule):
        raise ValueError(f"K={K} exceeds the schedule length {len(schedule)}")
    spec = measure if isinstance(measure, RieszSpec) else None
    if grid is None:
        grid = default_scan_grid(schedule.head(K), spec, order)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("scan grid is empty")
    meas = _as_measure(measure, order, variant)
    scales = schedule.scales[:K]
    ref = reference or uniform_multiplier()

    def running(chunk):
        out = np.zeros((chunk.size, max(K, 1)))
        for i, tk in enumerate(scales):
            x = float(tk) * chunk
            out[:, i] = np.abs(ref(x) - meas(x)) ** 2
        return np.cumsum(out, axis=1)

    cum = chunked_map(running, grid)
    values = cum[:, -1]
    partial = tuple(float(v) for v in cum.max(axis=0)[:K])
    counts, tags = None, []
    if spec is not None and spec.lacunarity_floor >= 4:
        from .clouds import build_clouds

        sub = spec if order is None else RieszSpec(spec.frequencies[:order], spec.coefficients[:order],
                                                   spec.lacunarity_floor)
        counts, tags = _cloud_hits(scales, build_clouds(sub), grid)
    else:
        tags = ["rajchman"] * grid.size
    return SigmaScan(label or meas.name, schedule.head(K), K, order, grid, np.asarray(values, dtype=float),
                     float(budget), tags, counts, partial)


def scan_csv(scan: SigmaScan, header: Sequence[str] = ()) -> str:
    """Per-point rows ``t, sigma_K, region_tag, in_dilated_cloud_count``."""
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "sigma_K", "region_tag", "in_dilated_cloud_count"])
    counts = scan.cloud_counts
    for i, (t, v) in enumerate(zip(scan.grid, scan.values)):
        w.writerow([format(float(t), ".17g"), format(float(v), ".17g"), scan.region_tags[i],
                    int(counts[i]) if counts is not None else "NA"])
    return buf.getvalue()


class ContractionFamily:
    """The family ``C_{1/n} phi`` for ``n = 1, ..., length``."""

    def __init__(self, base: MultiplierFunction, length: int):
        self.base = base
        self.length = int(length)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, n: int) -> MultiplierFunction:
        if not 1 <= n <= self.length:
            raise IndexError(n)
        return self.base.contracted(Fraction(1, n))

    def scale(self, n: int) -> Fraction:
        return Fraction(1, n)

    def threshold_index(self, eps: float, radius: float) -> int | None:
        """Smallest ``n`` with ``|phi(s/n) - 1| <= eps`` for ``|s| <= radius``."""
        if self.base.lipschitz_at_zero is None:
            return None
        return max(1, math.ceil(self.base.lipschitz_at_zero * radius / eps))


@dataclass
class GreedySelection:
    indices: list[int]
    schedule: ContractionSchedule
    thresholds: list[float]
    epsilons: list[float]
    scan: SigmaScan | None = None

    @property
    def passed(self) -> bool:
        return self.scan is None or self.scan.passed


def _pair_gap(cands: ContractionFamily, refs: ContractionFamily, n: int, s: np.ndarray) -> float:
    t = 1.0 / n
    return float(np.max(np.abs(refs.base(t * s) - cands.base(t * s)) ** 2))


def _vanishing_threshold(cands, refs, chosen, eps, grid) -> float:
    if cands.base.decay is not None and refs.base.decay is not None:
        def majorant(s):
            return sum((refs.base.decay(s / n) + cands.base.decay(s / n)) ** 2 for n in chosen)

        hi = 1.0
        while majorant(hi) > eps:
            hi *= 2
            if hi > 1e300:
                raise SelectionExhausted("decay majorant never drops below epsilon")
        lo = hi / 2 if hi > 1 else 0.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if majorant(mid) > eps:
                lo = mid
            else:
                hi = mid
        return hi
    values = sum(np.abs(refs.base(grid / n) - cands.base(grid / n)) ** 2 for n in chosen)
    bad = np.nonzero(values > eps)[0]
    if bad.size and bad[-1] == grid.size - 1:
        raise SelectionExhausted("Sigma_K exceeds epsilon at the end of the grid; not vanishing at infinity?")
    return float(grid[bad[-1] + 1]) if bad.size else float(grid[0])


def _window_index(cands, refs, prev: int, radius: float, eps: float, window_points: int) -> int:
    s = np.linspace(0.0, radius, window_points)
    ok = lambda n: _pair_gap(cands, refs, n, s) <= eps  # noqa: E731
    lo = prev + 1
    if lo > len(cands):
        raise SelectionExhausted(f"candidate family exhausted after index {prev}")
    if ok(lo):
        return lo
    root = math.sqrt(eps)
    bounds = [b for b in (cands.threshold_index(root / 2, radius), refs.threshold_index(root / 2, radius)) if b]
    hi = max(bounds) if len(bounds) == 2 else None
    if hi is None:
        hi = lo
        while not ok(hi):
            hi *= 2
            if hi > len(cands):
                raise SelectionExhausted(f"no candidate up to {len(cands)} meets the window on [0, {radius:.6g}]")
    hi = max(hi, lo)
    if hi > len(cands):
        hi = len(cands)
        if not ok(hi):
            raise SelectionExhausted(
                f"candidate family (length {len(cands)}) exhausted before the window condition held on "
                f"[0, {radius:.6g}] with eps={eps:.3g}"
            )
    # lo fails, hi passes
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def greedy_subsequence(candidates: ContractionFamily, references: ContractionFamily | None = None,
                       eps_schedule: Callable[[int], float] | None = None, steps: int = 3,
                       verification_grid=None, budget: float = DEFAULT_BUDGET,
                       window_points: int = 257) -> GreedySelection:
    """Select a subsequence with a uniformly bounded square-function multiplier.

    Step 0 takes the first candidate.  At step ``K`` a threshold ``S`` is found
    with ``Sigma_K(s) <= eps_K`` for ``|s| >= S``, and the next index is the
    smallest one whose candidate and reference transforms differ by at most
    ``sqrt(eps_K)`` on ``[-S, S]``.  Both families are real measures, so only
    ``s >= 0`` is checked.

    Raises
    ------
    SelectionExhausted
        When the family runs out before a window condition holds.
    """
    refs = references or ContractionFamily(uniform_multiplier(), len(candidates))
    eps_schedule = eps_schedule or (lambda K: 4.0 ** (-K))
    grid = np.geomspace(1e-3, 1e6, 10_000) if verification_grid is None else np.asarray(verification_grid, float)
    chosen = [1]
    thresholds, epsilons = [], []
    for K in range(1, steps):
        eps = float(eps_schedule(K))
        radius = _vanishing_threshold(candidates, refs, chosen, eps, grid)
        n = _window_index(candidates, refs, chosen[-1], radius, eps, window_points)
        chosen.append(n)
        thresholds.append(radius)
        epsilons.append(eps)
    schedule = ContractionSchedule(tuple(Fraction(1, n) for n in chosen), "greedy",
                                   {"indices": [str(n) for n in chosen]})
    scan = scan_sup(candidates.base, schedule, grid=grid, budget=budget, reference=refs.base,
                    label=f"greedy[{candidates.base.name}]")
    return GreedySelection(chosen, schedule, thresholds, epsilons, scan)


def square_norm_bound(measure, schedule: ContractionSchedule, signal, K: int | None = None,
                      budget: float = DEFAULT_BUDGET, order: int | None = None, variant: str = "real"):
    """Parseval value of ``||S_K f||_2^2`` and whether it is within ``budget * ||f||_2^2``.

    Returns
    -------
    value : float
        ``sum_j |f_hat(j)|^2 Sigma_K(j)``.
    ok : bool
    """
    K = len(schedule) if K is None else int(K)
    meas = _as_measure(measure, order, variant)
    freqs = signal.frequencies
    weights = np.abs(signal.coeffs) ** 2
    live = weights > 0
    if not live.any():
        return 0.0, True
    sig = sigma_values(meas, schedule.scales[:K], freqs[live].astype(float))
    value = float(np.sum(weights[live] * sig))
    return value, value <= budget * signal.norm2() + 1e-15
