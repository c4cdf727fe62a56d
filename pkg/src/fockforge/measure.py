"""Moment-matched radial quadratures and the resolution-of-identity checks.

The coherent-state measure is d mu = N(r^2) d lambda(r) d theta, where the
radial part must satisfy 2 pi int r^(2n) d lambda = {n}!.  We realize
d lambda as a Gauss rule in u = r^2: the recurrence coefficients of the
orthogonal polynomials come from the moments mu_n = {n}!/(2 pi) by the
Chebyshev algorithm, and nodes/weights from the Jacobi matrix
(Golub-Welsch).  The map from moments to recurrence coefficients is
violently ill-conditioned, so it runs in mpmath with the working precision
raised until two successive precisions agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import mpmath as mp
import numpy as np

from .deformation import DUAL, PRIMAL, DeformationSpec, _check_variant
from .errors import MomentMatrixNotPositive, OrderTooLarge, QuadratureError
from .states import CoherentParameter, _phases, check_domain, sesquilinear

MOMENT_RTOL = 1e-9
NODE_RTOL = 1e-12
AGREEMENT_DIGITS = 20
MAX_DPS = 1600


@dataclass(frozen=True, eq=False)
class RadialQuadrature:
    nodes: np.ndarray = field(repr=False)      # r_i
    weights: np.ndarray = field(repr=False)    # w_i, so that 2 pi sum w_i r_i^(2n) = {n}!
    order: int
    variant: str
    dps: int = 0

    @property
    def u(self) -> np.ndarray:
        return self.nodes ** 2

    def moment(self, n: int) -> float:
        return float(2 * np.pi * np.sum(self.weights * self.u ** n))


def exact_moments(spec: DeformationSpec, count: int, variant: str = PRIMAL) -> list:
    """{n}! (or {n}_d!) / (2 pi) for n < count, in the current mpmath precision."""
    out = []
    acc_fact = mp.mpf(1)
    acc_t2 = mp.mpf(1)     # t(n)^2, or [n]_q!/n! for the q-case
    for n in range(count):
        if n > 0:
            acc_fact *= n
            if spec.kind == "q_deformed":
                q = mp.mpf(spec.q)
                acc_t2 *= (1 - q ** n) / ((1 - q) * n)
            elif spec.kind == "tabulated":
                acc_t2 *= mp.mpf(float(spec.f[n])) ** 2
        val = acc_fact * acc_t2 if variant == PRIMAL else acc_fact / acc_t2
        out.append(val / (2 * mp.pi))
    return out


def _chebyshev(mu: list) -> tuple[list, list]:
    """Recurrence coefficients (alpha_k, beta_k), k < len(mu)//2, from raw moments."""
    n = len(mu) // 2
    alpha = [mp.mpf(0)] * n
    beta = [mp.mpf(0)] * n
    sig_prev = [mp.mpf(0)] * (2 * n)
    sig = list(mu)
    alpha[0] = mu[1] / mu[0]
    beta[0] = mu[0]
    for k in range(1, n):
        new = [mp.mpf(0)] * (2 * n)
        for l in range(k, 2 * n - k):
            new[l] = sig[l + 1] - alpha[k - 1] * sig[l] - beta[k - 1] * sig_prev[l]
        alpha[k] = new[k + 1] / new[k] - sig[k] / sig[k - 1]
        beta[k] = new[k] / sig[k - 1]
        sig_prev, sig = sig, new
    return alpha, beta


def _golub_welsch(alpha: list, beta: list) -> tuple[list, list]:
    n = len(alpha)
    J = mp.matrix(n, n)
    for i in range(n):
        J[i, i] = alpha[i]
        if i + 1 < n:
            J[i, i + 1] = J[i + 1, i] = mp.sqrt(beta[i + 1])
    E, Q = mp.eigsy(J)
    order = sorted(range(n), key=lambda i: E[i])
    return [E[i] for i in order], [beta[0] * Q[0, i] ** 2 for i in order]


def _attempt(spec, m, variant, dps):
    with mp.workdps(dps):
        mu = exact_moments(spec, 2 * m, variant)
        alpha, beta = _chebyshev(mu)
        bad = [k for k, b in enumerate(beta) if b <= 0]
        if bad:
            return None, bad[0]
        u, w = _golub_welsch(alpha, beta)
        return (u, w), None


def _agree(a, b, dps) -> bool:
    with mp.workdps(dps):
        tol = mp.mpf(10) ** (-AGREEMENT_DIGITS)
        for x, y in zip(a[0] + a[1], b[0] + b[1]):
            if abs(x - y) > tol * abs(y):
                return False
    return True


def _key(spec: DeformationSpec):
    return (spec.kind, spec.q, spec.n_max, spec.f[1:].tobytes())


_SPEC_BY_KEY: dict = {}


def quadrature_from_moments(spec: DeformationSpec, m: int, variant: str = PRIMAL) -> RadialQuadrature:
    """Order-m Gauss rule in u = r^2 reproducing the deformed-factorial moments."""
    _check_variant(variant)
    if m < 1:
        raise ValueError("quadrature order must be >= 1")
    if 2 * m > spec.n_max:
        raise OrderTooLarge(f"2m = {2 * m} exceeds the deformation table n_max = {spec.n_max}")
    key = _key(spec)
    _SPEC_BY_KEY.setdefault(key, spec)
    return _cached_quadrature(key, m, variant)


@lru_cache(maxsize=64)
def _cached_quadrature(key, m: int, variant: str) -> RadialQuadrature:
    spec = _SPEC_BY_KEY[key]
    dps = 40 + 4 * m
    prev = None
    prev_bad = None
    while dps <= MAX_DPS:
        res, bad = _attempt(spec, m, variant, dps)
        if res is None:
            if prev_bad == bad:
                raise MomentMatrixNotPositive(
                    f"moment sequence is not realizable at order {bad + 1} "
                    f"(recurrence coefficient beta_{bad} <= 0 at {dps} digits)"
                )
            prev, prev_bad = None, bad
        else:
            if prev is not None and _agree(res, prev, dps):
                return _finalize(spec, m, variant, res, dps)
            prev, prev_bad = res, None
        dps = int(dps * 1.6)
    raise QuadratureError(f"quadrature of order {m} did not stabilize below {MAX_DPS} digits")


def _finalize(spec, m, variant, res, dps) -> RadialQuadrature:
    u_mp, w_mp = res
    radius = spec.radius(variant)
    with mp.workdps(dps):
        if any(w <= 0 for w in w_mp) or any(u <= 0 for u in u_mp):
            raise MomentMatrixNotPositive("Gauss rule has a non-positive node or weight")
        if not radius.unbounded:
            limit = mp.mpf(radius.value) ** 2 * (1 + mp.mpf(NODE_RTOL))
            if u_mp[-1] >= limit:
                raise QuadratureError(
                    f"largest node u = {mp.nstr(u_mp[-1], 12)} lies outside the disc L^2 = "
                    f"{radius.value ** 2:.12g}"
                )
    u = np.array([float(x) for x in u_mp])
    w = np.array([float(x) for x in w_mp])
    quad = RadialQuadrature(np.sqrt(u), w, m, variant, dps)
    targets = spec.factorials if variant == PRIMAL else spec.factorials_dual
    for n in range(2 * m):
        err = abs(quad.moment(n) / targets[n] - 1.0)
        if err > MOMENT_RTOL:
            raise QuadratureError(f"moment {n} reproduced only to {err:.3g}")
    return quad


@dataclass(frozen=True)
class ResolutionReport:
    max_defect: float
    per_level: np.ndarray


def verify_resolution_identity(spec: DeformationSpec, quad: RadialQuadrature,
                               n_max: int) -> ResolutionReport:
    """Diagonal of the CS resolution of identity after the analytic theta integral."""
    top = min(2 * quad.order - 1, n_max - 1)
    targets = spec.factorials if quad.variant == PRIMAL else spec.factorials_dual
    levels = np.array([quad.moment(n) / targets[n] - 1.0 for n in range(top + 1)])
    return ResolutionReport(float(np.max(np.abs(levels))), levels)


def _powers(spec, param: CoherentParameter, n_terms: int) -> np.ndarray:
    """Single-mode generalized powers z^n = R^n exp(i phi_n)."""
    r = param.radii()[0]
    with np.errstate(under="ignore"):
        mags = r ** np.arange(n_terms, dtype=float)
    return mags * np.exp(1j * _phases(spec, param, 0, n_terms))


def _weighted_square_series(spec, quad, x: np.ndarray) -> np.ndarray:
    """sum_n x_n u^n / ({n}!)^2 at each node (x_n given), summed to the table end."""
    numbers = spec.deformed_numbers(quad.variant)
    n_terms = x.size
    u = quad.u
    with np.errstate(under="ignore"):
        steps = u[:, None] / numbers[1:n_terms] ** 2
        base = np.concatenate([np.ones((u.size, 1)), np.cumprod(steps, axis=1)], axis=1)
    return base @ x


def kernel_idempotence_check(spec: DeformationSpec, quad: RadialQuadrature,
                             params: Sequence[tuple[CoherentParameter, CoherentParameter]]) -> float:
    """max |int d mu(z'') K(z, z'') K(z'', z') - K(z, z')| over the parameter pairs.

    With d mu = N(r^2) d lambda d theta the N(r^2) factor cancels the two
    normalizations at z'', and the theta integral keeps the diagonal of the
    double series:  2 pi sum_i w_i sum_n (z conj z')^n u_i^n / ({n}!)^2.
    """
    variant = quad.variant
    worst = 0.0
    n_terms = spec.n_max + 1
    for a, b in params:
        if a.modes != 1 or b.modes != 1:
            raise ValueError("idempotence check is single-mode")
        check_domain(spec, a, variant)
        check_domain(spec, b, variant)
        coeff = _powers(spec, a, n_terms) * np.conj(_powers(spec, b, n_terms))
        integral = 2 * np.pi * np.sum(quad.weights * _weighted_square_series(spec, quad, coeff))
        na = sesquilinear(spec, a, a, variant).real
        nb = sesquilinear(spec, b, b, variant).real
        integral /= math.sqrt(na * nb)
        kernel = sesquilinear(spec, a, b, variant) / math.sqrt(na * nb)
        worst = max(worst, abs(integral - kernel))
    return float(worst)


def reproducing_defect(spec: DeformationSpec, quad: RadialQuadrature, k: int,
                       probes: Sequence[CoherentParameter]) -> float:
    """max |int d mu(z') <eta_z|eta_z'> Psi(z') - Psi(z)| with Psi(z) = <eta_z|phi_k>.

    Only the n = k term of the kernel series survives the theta integral.
    """
    variant = quad.variant
    fact = (spec.factorials if variant == PRIMAL else spec.factorials_dual)[k]
    level = quad.moment(k) / fact
    worst = 0.0
    for p in probes:
        norm = sesquilinear(spec, p, p, variant).real
        psi = np.conj(_powers(spec, p, k + 1)[k]) / math.sqrt(fact * norm)
        worst = max(worst, abs(psi * level - psi))
    return float(worst)


def jackson_q_measure(q: float, n_atoms: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Atoms u_k = q^k/(1-q) and masses m_k with sum_k m_k u_k^n = [n]_q! / (2 pi).

    This is the discrete (Jackson-integral) measure solving the q-moment
    problem; it is the limit of the Gauss rules built above.
    """
    k = np.arange(n_atoms)
    atoms = q ** k / (1 - q)
    masses = np.empty(n_atoms)
    for j in k:
        x = q ** (j + 1)
        masses[j] = q ** j * np.prod(1 - x * q ** np.arange(400))
    return atoms, masses / (2 * np.pi)
