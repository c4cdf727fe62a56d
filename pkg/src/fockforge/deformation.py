"""Deformation functions f(n), deformed factorials, q-numbers and radii.

Everything downstream reads the tables materialized here:

* ``f[n]``            the deformation function, n = 1..n_max (``f[0]`` is NaN)
* ``t[n]``            f(n)! = f(n) f(n-1) ... f(1), with ``t[0] = 1``
* ``numbers[n]``      {n} = n f(n)^2 (primal) and n / f(n)^2 (dual)
* ``inv_factorials``  1/{n}! and 1/{n}_d!, which underflow gracefully

The deformed exponential  E_f(w) = sum_n w^n / {n}!  (the normalization
function of the coherent states) is also evaluated here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import IndexOutOfRange, NonConvergentTail, SeriesNotConverged

PRIMAL = "primal"
DUAL = "dual"

# Radius estimation policy.
RADIUS_SPREAD_GATE = 1e-3
RADIUS_FLOOR = 1e-12
RADIUS_DECAY_SLOPE = -0.5
MIN_RADIUS_TAIL = 16

SERIES_TAIL_TOL = 1e-13


def _check_variant(variant: str) -> str:
    if variant not in (PRIMAL, DUAL):
        raise ValueError(f"variant must be 'primal' or 'dual', got {variant!r}")
    return variant


@dataclass(frozen=True)
class QNumberContext:
    q: float

    def __post_init__(self):
        if not 0.0 < self.q <= 1.0:
            raise ValueError(f"q must lie in (0, 1], got {self.q}")


def q_number(ctx: QNumberContext | float, n: int) -> float:
    """[n]_q = 1 + q + ... + q^(n-1), via [n+1]_q = 1 + q [n]_q.

    The recurrence avoids the cancellation in (q^n - 1)/(q - 1) and returns
    exactly ``n`` at q = 1.
    """
    q = ctx.q if isinstance(ctx, QNumberContext) else float(ctx)
    if n < 0:
        raise ValueError("q_number needs n >= 0")
    value = 0.0
    for _ in range(n):
        value = 1.0 + q * value
    return value


def q_numbers(q: float, n_max: int) -> np.ndarray:
    """Vector of [n]_q for n = 0..n_max."""
    out = np.empty(n_max + 1)
    out[0] = 0.0
    for n in range(1, n_max + 1):
        out[n] = 1.0 + q * out[n - 1]
    return out


@dataclass(frozen=True)
class Radius:
    """Convergence radius of a coherent-state series; ``value=None`` is unbounded."""

    value: float | None

    @property
    def unbounded(self) -> bool:
        return self.value is None

    def limit(self, fraction: float = 1.0) -> float:
        return math.inf if self.value is None else fraction * self.value

    def __str__(self):
        return "unbounded" if self.value is None else f"{self.value:.12g}"


@dataclass(frozen=True, eq=False)
class DeformationSpec:
    """A deformation f(n) materialized up to ``n_max``.

    Build with :meth:`identity`, :meth:`q_deformed` or :meth:`tabulated`.
    """

    kind: str
    n_max: int
    f: np.ndarray = field(repr=False)
    q: float | None = None

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        if f.shape != (self.n_max + 1,):
            raise ValueError("f table must have length n_max + 1")
        if not np.all(np.isfinite(f[1:])) or np.any(f[1:] <= 0):
            raise ValueError("deformation values must be finite and positive")
        f.setflags(write=False)
        object.__setattr__(self, "f", f)

        n = np.arange(self.n_max + 1, dtype=float)
        t = np.ones(self.n_max + 1)
        for k in range(1, self.n_max + 1):
            t[k] = f[k] * t[k - 1]
        if not np.all(np.isfinite(t)) or np.any(t <= 0):
            raise ValueError("t(n) = f(n)! left (0, inf); shorten the table")

        numbers = np.zeros(self.n_max + 1)
        numbers_dual = np.zeros(self.n_max + 1)
        if self.kind == "q_deformed":
            # f(n)^2 = [n]_q / n, so {n} = [n]_q without a square-root round trip
            numbers[1:] = q_numbers(self.q, self.n_max)[1:]
            numbers_dual[1:] = n[1:] ** 2 / numbers[1:]
        else:
            numbers[1:] = n[1:] * f[1:] ** 2
            numbers_dual[1:] = n[1:] / f[1:] ** 2

        tables = {"t": t, "numbers": numbers, "numbers_dual": numbers_dual}
        tables["log_factorials"] = np.concatenate(([0.0], np.cumsum(np.log(numbers[1:]))))
        tables["log_factorials_dual"] = np.concatenate(([0.0], np.cumsum(np.log(numbers_dual[1:]))))
        for name, numb in (("", numbers), ("_dual", numbers_dual)):
            with np.errstate(over="ignore", under="ignore"):
                fact = np.cumprod(np.concatenate(([1.0], numb[1:])))
                inv = np.cumprod(np.concatenate(([1.0], 1.0 / numb[1:])))
            tables["factorials" + name] = fact
            tables["inv_factorials" + name] = inv
        for name, arr in tables.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    # constructors

    @classmethod
    def identity(cls, n_max: int = 256) -> "DeformationSpec":
        return cls("identity", n_max, np.concatenate(([np.nan], np.ones(n_max))))

    @classmethod
    def q_deformed(cls, q: float, n_max: int = 256) -> "DeformationSpec":
        """q-deformation f(n) = sqrt([n]_q / n), 0 < q < 1."""
        if not 0.0 < q < 1.0:
            raise ValueError(f"q-deformation needs 0 < q < 1, got {q}")
        qn = q_numbers(q, n_max)
        n = np.arange(n_max + 1, dtype=float)
        f = np.full(n_max + 1, np.nan)
        f[1:] = np.sqrt(qn[1:] / n[1:])
        return cls("q_deformed", n_max, f, q=float(q))

    @classmethod
    def tabulated(cls, values: Sequence[float]) -> "DeformationSpec":
        """f(1), f(2), ... given explicitly."""
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("tabulated deformation needs a non-empty 1-d sequence")
        return cls("tabulated", values.size, np.concatenate(([np.nan], values)))

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity" or bool(np.all(self.f[1:] == 1.0))

    def describe(self) -> dict:
        out = {"kind": self.kind, "n_max": self.n_max}
        if self.kind == "q_deformed":
            out["q"] = self.q
        if self.kind == "tabulated":
            out["values"] = [float(v) for v in self.f[1:]]
        return out

    def deformed_numbers(self, variant: str = PRIMAL) -> np.ndarray:
        return self.numbers if _check_variant(variant) == PRIMAL else self.numbers_dual

    def reciprocal_factorials(self, variant: str = PRIMAL) -> np.ndarray:
        if _check_variant(variant) == PRIMAL:
            return self.inv_factorials
        return self.inv_factorials_dual

    @cached_property
    def radius_primal(self) -> Radius:
        return convergence_radius(self, PRIMAL)

    @cached_property
    def radius_dual(self) -> Radius:
        return convergence_radius(self, DUAL)

    def radius(self, variant: str = PRIMAL) -> Radius:
        return self.radius_primal if _check_variant(variant) == PRIMAL else self.radius_dual

    def injectivity_lint(self) -> bool:
        """True when t(n) takes no repeated value (optional lint, not an invariant)."""
        return np.unique(self.t).size == self.t.size


def f_value(spec: DeformationSpec, n: int) -> float:
    if n < 1 or n > spec.n_max:
        raise IndexOutOfRange(f"f(n) is defined for 1 <= n <= {spec.n_max}, got {n}")
    return float(spec.f[n])


def deformed_factorial(spec: DeformationSpec, n: int, variant: str = "braced") -> float:
    """{n}! = n! t(n)^2 (``braced``) or {n}_d! = n! / t(n)^2 (``braced_dual``)."""
    if variant not in ("braced", "braced_dual"):
        raise ValueError("variant must be 'braced' or 'braced_dual'")
    if n < 0 or n > spec.n_max:
        raise IndexOutOfRange(f"factorial index must lie in 0..{spec.n_max}, got {n}")
    if spec.kind == "identity":
        try:
            return float(math.factorial(n))
        except OverflowError:
            return math.inf
    if variant == "braced":
        return float(spec.factorials[n])
    return float(spec.factorials_dual[n])


def log_deformed_factorial(spec: DeformationSpec, n: int, variant: str = "braced") -> float:
    """log {n}! (or log {n}_d!), finite where the factorial itself overflows."""
    if variant not in ("braced", "braced_dual"):
        raise ValueError("variant must be 'braced' or 'braced_dual'")
    if n < 0 or n > spec.n_max:
        raise IndexOutOfRange(f"factorial index must lie in 0..{spec.n_max}, got {n}")
    table = spec.log_factorials if variant == "braced" else spec.log_factorials_dual
    return float(table[n])


def convergence_radius(spec: DeformationSpec, variant: str = PRIMAL) -> Radius:
    """Estimate L = 1/sqrt(rho) from the tail of the ratio sequence.

    primal: rho_n = [t(n)/t(n+1)]^2 / (n+1);  dual: rho_n = [t(n+1)/t(n)]^2 / (n+1).
    The estimate is the median over the last quartile of indices.  A tail that
    decays like a power of n (log-log slope below -0.5) or a median below
    ``RADIUS_FLOOR`` means rho = 0, i.e. an unbounded radius.
    """
    _check_variant(variant)
    if spec.n_max < MIN_RADIUS_TAIL:
        raise NonConvergentTail(
            f"need n_max >= {MIN_RADIUS_TAIL} to estimate a radius, have {spec.n_max}"
        )
    n = np.arange(1, spec.n_max, dtype=float)  # n = 1 .. n_max - 1
    ratio = spec.f[2:] ** 2  # f(n+1)^2
    rho = 1.0 / (ratio * (n + 1)) if variant == PRIMAL else ratio / (n + 1)

    start = (3 * rho.size) // 4
    tail_n, tail = n[start:], rho[start:]
    median = float(np.median(tail))
    if median < RADIUS_FLOOR:
        return Radius(None)
    slope = np.polyfit(np.log(tail_n), np.log(tail), 1)[0]
    if slope < RADIUS_DECAY_SLOPE:
        return Radius(None)
    spread = float((tail.max() - tail.min()) / median)
    if spread > RADIUS_SPREAD_GATE:
        raise NonConvergentTail(
            f"{variant} ratio tail spread {spread:.3g} exceeds {RADIUS_SPREAD_GATE}"
        )
    return Radius(1.0 / math.sqrt(median))


def magnitude_terms(spec: DeformationSpec, x, variant: str = PRIMAL,
                    n_terms: int | None = None, tail_tol: float = SERIES_TAIL_TOL) -> np.ndarray:
    """x^n / {n}! for n = 0..n_terms-1, x >= 0 (broadcast over the leading axes).

    Terms are built by the running product of x/{n}, which neither overflows
    nor loses precision the way x**n * (1/{n}!) does for large n.  When the
    full table is used the truncation tail is bounded geometrically and
    :class:`SeriesNotConverged` is raised if it exceeds ``tail_tol`` relative
    to the partial sum.
    """
    x = np.asarray(x, dtype=float)
    full = n_terms is None
    n_terms = spec.n_max + 1 if full else n_terms
    if n_terms > spec.n_max + 1:
        raise IndexOutOfRange(f"series needs {n_terms} terms, table has {spec.n_max + 1}")
    numbers = spec.deformed_numbers(variant)[1:n_terms]
    with np.errstate(under="ignore"):
        steps = x[..., None] / numbers
        terms = np.concatenate([np.ones(x.shape + (1,)), np.cumprod(steps, axis=-1)], axis=-1)
    if full:
        _check_tail(terms, x, spec.deformed_numbers(variant), tail_tol)
    return terms


def _check_tail(terms: np.ndarray, x: np.ndarray, numbers: np.ndarray, tol: float):
    last = terms[..., -1]
    # next ratio x/{N+1} is bounded by the last available ratio when {n} grows
    r = x / numbers[-1]
    total = terms.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = np.where(r < 1.0, last * r / (1.0 - r), np.inf)
        bad = (bound > tol * total) & (last > 0)
    if np.any(bad):
        worst = float(np.max(np.where(bad, x, -np.inf)))
        raise SeriesNotConverged(
            f"deformed exponential tail too large at |w| = {worst:.6g} "
            f"with {numbers.size} terms"
        )


def deformed_exp(spec: DeformationSpec, w, variant: str = PRIMAL,
                 tail_tol: float = SERIES_TAIL_TOL):
    """E_f(w) = sum_n w^n / {n}! for real or complex ``w`` (array-like)."""
    w = np.asarray(w)
    mags = magnitude_terms(spec, np.abs(w), variant, tail_tol=tail_tol)
    if not np.iscomplexobj(w) and np.all(w >= 0):
        return mags.sum(axis=-1)
    n = np.arange(mags.shape[-1])
    phase = np.exp(1j * np.angle(w)[..., None] * n)
    return (mags * phase).sum(axis=-1)
