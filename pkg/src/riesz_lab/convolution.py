"""
Convolution of periodic test signals with contracted kernels.

Signals live on the circle ``R/Z`` and have finite spectra ``|j| <= J``.  A
kernel enters only through its real-line transform, sampled at ``t * j``:
the contracted convolution has coefficients ``phi(t j) * f_hat(j)``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .core import ContractionSchedule, RieszSpec
from .multipliers import MultiplierFunction, _as_measure, triangle_multiplier, uniform_multiplier

__all__ = [
    "PeriodicSignal",
    "SubNyquistWarning",
    "constant",
    "single_mode",
    "indicator",
    "fejer_indicator",
    "random_bandlimited",
    "kernel_transform",
    "convolve",
    "ConvergenceReport",
    "convergence_experiment",
    "trend_verdict",
    "interval_average",
    "square_function_spatial",
    "convergence_csv",
    "DEFAULT_TRUNCATION",
    "DEFAULT_GRID",
]

DEFAULT_TRUNCATION = 512
DEFAULT_GRID = 4096


class SubNyquistWarning(RuntimeWarning):
    """The sample grid is too coarse to resolve the signal's bandwidth."""


@dataclass(frozen=True, eq=False)
class PeriodicSignal:
    """Trigonometric polynomial ``sum_{|j|<=J} f_hat(j) e(jx)``.

    Parameters
    ----------
    coeffs : ndarray of complex, shape (2J+1,)
        ``coeffs[j + J] = f_hat(j)``.
    name : str
    closed_form : callable, optional
        Spatial evaluator of the function the spectrum approximates (for
        instance the untruncated indicator).
    """

    coeffs: np.ndarray
    name: str = "signal"
    closed_form: Callable | None = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("coefficient array must have odd length 2J+1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def J(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.J, self.J + 1)

    def coefficient(self, j: int) -> complex:
        if abs(j) > self.J:
            return 0j
        return complex(self.coeffs[j + self.J])

    @property
    def bandwidth(self) -> int:
        """Largest ``|j|`` with a nonzero coefficient (0 for constants and zero)."""
        nz = np.flatnonzero(self.coeffs)
        if nz.size == 0:
            return 0
        return int(np.max(np.abs(nz - self.J)))

    @property
    def is_real(self) -> bool:
        return bool(np.allclose(self.coeffs, np.conj(self.coeffs[::-1]), rtol=0, atol=1e-15))

    def norm2(self) -> float:
        """``||f||_2^2 = sum |f_hat(j)|^2``."""
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def synthesize(self, N: int = DEFAULT_GRID) -> np.ndarray:
        """Values at ``x = n/N``, ``n = 0..N-1``, by folding the spectrum mod ``N``."""
        N = int(N)
        if N < 1:
            raise ValueError("grid size must be positive")
        bins = np.zeros(N, dtype=complex)
        np.add.at(bins, self.frequencies % N, self.coeffs)
        return N * np.fft.ifft(bins)

    def evaluate(self, x) -> np.ndarray:
        """Direct evaluation at arbitrary points."""
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        out = np.empty(flat.size, dtype=complex)
        step = max(1, 2**22 // max(self.coeffs.size, 1))
        for i in range(0, flat.size, step):
            phase = np.exp(2j * np.pi * np.outer(flat[i:i + step], self.frequencies))
            out[i:i + step] = phase @ self.coeffs
        return out.reshape(x.shape)

    def with_coeffs(self, coeffs, name: str | None = None) -> "PeriodicSignal":
        return PeriodicSignal(coeffs, name or self.name)


def constant(value: float = 1.0, J: int = 0) -> PeriodicSignal:
    c = np.zeros(2 * J + 1, dtype=complex)
    c[J] = value
    return PeriodicSignal(c, "constant", lambda x: np.full(np.shape(x), value, dtype=float))


def single_mode(j: int, J: int | None = None) -> PeriodicSignal:
    """``e_j(x) = exp(2 pi i j x)``."""
    J = abs(j) if J is None else max(J, abs(j))
    c = np.zeros(2 * J + 1, dtype=complex)
    c[j + J] = 1
    return PeriodicSignal(c, f"mode[{j}]", lambda x: np.exp(2j * np.pi * j * np.asarray(x, dtype=float)))


def _interval_coeffs(a: float, b: float, J: int) -> np.ndarray:
    j = np.arange(-J, J + 1)
    c = np.empty(j.size, dtype=complex)
    nz = j != 0
    jj = j[nz]
    c[nz] = (np.exp(-2j * np.pi * jj * a) - np.exp(-2j * np.pi * jj * b)) / (2j * np.pi * jj)
    c[J] = b - a
    return c


def _indicator_closed_form(a: float, b: float):
    def f(x):
        y = np.mod(np.asarray(x, dtype=float) - a, 1.0)
        return (y < b - a).astype(float)

    return f


def indicator(a: float = 0.0, b: float = 0.5, J: int = DEFAULT_TRUNCATION) -> PeriodicSignal:
    """Indicator of ``[a, b]`` (mod 1), spectrum truncated at ``J``."""
    if not 0 < b - a <= 1:
        raise ValueError("need 0 < b - a <= 1")
    return PeriodicSignal(_interval_coeffs(a, b, J), f"indicator[{a:g},{b:g}]", _indicator_closed_form(a, b))


def fejer_indicator(a: float = 0.0, b: float = 0.5, J: int = 32) -> PeriodicSignal:
    """Indicator of ``[a, b]`` smoothed by the Fejer kernel of order ``J``."""
    c = _interval_coeffs(a, b, J) * (1 - np.abs(np.arange(-J, J + 1)) / (J + 1))
    return PeriodicSignal(c, f"fejer_indicator[{a:g},{b:g};J={J}]")


def random_bandlimited(modes: int = 64, seed: int = 0, real: bool = True) -> PeriodicSignal:
    """Gaussian coefficients on ``|j| <= modes``, unit ``L^2`` norm."""
    rng = np.random.default_rng(seed)
    J = int(modes)
    c = (rng.standard_normal(2 * J + 1) + 1j * rng.standard_normal(2 * J + 1)) / math.sqrt(2)
    if real:
        c[J] = c[J].real
        c[:J] = np.conj(c[J + 1:][::-1])
    c /= math.sqrt(np.sum(np.abs(c) ** 2))
    return PeriodicSignal(c, f"random[modes={J},seed={seed}]")


_NAMED_KERNELS = {"uniform": uniform_multiplier, "triangle": triangle_multiplier}


def kernel_transform(kernel, order: int | None = None, variant: str = "real") -> MultiplierFunction:
    """Resolve ``"uniform"``, ``"triangle"``, a :class:`RieszSpec` or a multiplier."""
    if isinstance(kernel, str):
        try:
            return _NAMED_KERNELS[kernel]()
        except KeyError:
            raise ValueError(f"unknown kernel {kernel!r}") from None
    return _as_measure(kernel, order, variant)


def _scaled_frequencies(t, freqs: np.ndarray) -> np.ndarray:
    tf = float(Fraction(t)) if not isinstance(t, float) else t
    return tf * freqs.astype(float)


def convolve(kernel, t, signal: PeriodicSignal, order: int | None = None, variant: str = "real") -> PeriodicSignal:
    """``C_t mu * f`` as a periodic signal.

    ``kernel`` is ``"uniform"``, ``"triangle"``, a :class:`RieszSpec` (partial
    product of the given ``order``; ``variant`` selects the real-line or the
    interpolated transform) or a :class:`MultiplierFunction`.
    """
    if t <= 0:
        raise ValueError("scale t must be positive")
    phi = kernel_transform(kernel, order, variant)
    mult = np.asarray(phi(_scaled_frequencies(t, signal.frequencies)), dtype=complex)
    return signal.with_coeffs(mult * signal.coeffs, f"{phi.name}*{signal.name}")


def interval_average(a: float, b: float, eps: float, x) -> np.ndarray:
    """Closed form of ``(1/eps) int_0^eps 1_[a,b](x - y) dy`` on the circle.

    The uniform probability measure on ``[0, eps]`` averages the indicator
    over ``[x - eps, x]``; the result is the length of that window's overlap
    with ``[a, b]`` (mod 1) divided by ``eps``.
    """
    x = np.asarray(x, dtype=float)
    total = np.zeros(x.shape)
    for shift in (-2, -1, 0, 1, 2):
        lo = np.maximum(x - eps, a + shift)
        hi = np.minimum(x, b + shift)
        total += np.clip(hi - lo, 0.0, None)
    return total / eps


@dataclass(frozen=True)
class ConvergenceReport:
    k: int
    t_k: Fraction
    sup_err: float
    l2_err: float
    verdict: str


def trend_verdict(l2_errors: Sequence[float], final_sup: float, threshold: float = 1e-2,
                  tolerance: float = 0.1, floor: float = 1e-14) -> str:
    """``"passing"`` when the ``L^2`` error is nonincreasing within ``tolerance``
    over the last half and the final sup error is below ``threshold``.

    Errors below ``floor`` count as zero so rounding noise cannot fail a trend.
    """
    errs = list(l2_errors)
    tail = errs[len(errs) // 2:] if len(errs) > 1 else errs
    steady = all(b <= (1 + tolerance) * a or b <= floor for a, b in zip(tail, tail[1:]))
    return "passing" if steady and final_sup < threshold else "failing"


def _grid_values(signal: PeriodicSignal, grid) -> tuple[np.ndarray, bool]:
    if np.isscalar(grid):
        return signal.synthesize(int(grid)), True
    return signal.evaluate(np.asarray(grid, dtype=float)), False


def convergence_experiment(kernel, schedule: ContractionSchedule, signal: PeriodicSignal, grid=DEFAULT_GRID,
                           order: int | None = None, variant: str = "real", threshold: float = 1e-2,
                           tolerance: float = 0.1) -> list[ConvergenceReport]:
    """Errors of ``C_{t_k} mu * f - f`` for every scale of the schedule.

    ``grid`` is a point count (equispaced, FFT synthesis) or an array of
    sample points.  On an equispaced grid the ``L^2`` error is the root mean
    square, which equals the true norm once the grid resolves the spectrum.
    Every row carries the verdict of the whole run.
    """
    if not len(schedule):
        raise ValueError("schedule is empty")
    phi = kernel_transform(kernel, order, variant)
    freqs = signal.frequencies
    errs = []
    for tk in schedule.scales:
        mult = np.asarray(phi(_scaled_frequencies(tk, freqs)), dtype=complex)
        diff = signal.with_coeffs((mult - 1) * signal.coeffs)
        vals, _ = _grid_values(diff, grid)
        mag = np.abs(vals)
        errs.append((float(np.max(mag)), float(np.sqrt(np.mean(mag**2)))))
    verdict = trend_verdict([e[1] for e in errs], errs[-1][0], threshold, tolerance)
    return [ConvergenceReport(k, tk, s, l2, verdict)
            for k, (tk, (s, l2)) in enumerate(zip(schedule.scales, errs), start=1)]


def square_function_spatial(kernel, schedule: ContractionSchedule, signal: PeriodicSignal, K: int | None = None,
                            grid: int = DEFAULT_GRID, order: int | None = None, variant: str = "real",
                            reference=None) -> float:
    """Grid ``L^2`` norm of ``S_K f = (sum_k |C_{t_k} lambda * f - C_{t_k} mu * f|^2)^{1/2}``.

    ``reference`` (default the uniform kernel) plays the role of ``lambda``.
    Exact on equispaced grids with more than ``2J`` points.
    """
    K = len(schedule) if K is None else int(K)
    if K > len(schedule):
        raise ValueError(f"K={K} exceeds the schedule length {len(schedule)}")
    N = int(grid)
    if N <= 2 * signal.bandwidth:
        warnings.warn(f"grid of {N} points is sub-Nyquist for bandwidth {signal.bandwidth}",
                      SubNyquistWarning, stacklevel=2)
    total = np.zeros(N)
    ref = kernel_transform(reference or "uniform")
    for tk in schedule.scales[:K]:
        g = convolve(ref, tk, signal).coeffs - convolve(kernel, tk, signal, order, variant).coeffs
        total += np.abs(signal.with_coeffs(g).synthesize(N)) ** 2
    return float(math.sqrt(np.mean(total)))


def _num(x) -> str:
    return format(float(x), ".17g")


def convergence_csv(reports: Sequence[ConvergenceReport], header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "t_k", "sup_err", "l2_err", "verdict"])
    for r in reports:
        w.writerow([r.k, f"{r.t_k.numerator}/{r.t_k.denominator}", _num(r.sup_err), _num(r.l2_err), r.verdict])
    return buf.getvalue()
