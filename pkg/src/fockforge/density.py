"""Density matrices, diagonal (P) representations and Husimi functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .deformation import PRIMAL, DeformationSpec, _check_variant, magnitude_terms
from .errors import (
    BlockCountMismatch,
    CapExceeded,
    CrossCheckFailure,
    DimensionMismatch,
    InvalidDensity,
    SeriesNotConverged,
    UnnormalizedP,
)
from .fock_ops import FockBasis, ModeParams, OperatorMatrix, gamma_configs
from .measure import RadialQuadrature
from .states import CoherentParameter, _specs, build_ncs, check_domain

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
P_NORM_TOL = 1e-8
DERIVATIVE_CAP = 12
TWO_ROUTE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray = field(repr=False)
    block_label: tuple = ()

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidDensity("density matrix must be square")
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > HERMITIAN_TOL:
            raise InvalidDensity(f"not Hermitian (defect {herm:.3g})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidDensity(f"trace is {tr:.12g}, not 1")
        low = float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())
        if low < -PSD_TOL:
            raise InvalidDensity(f"negative eigenvalue {low:.3g}")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "block_label", tuple(self.block_label))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def pure(cls, vector, block_label=()) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex)
        return cls(np.outer(v, v.conj()), block_label)

    @classmethod
    def diagonal(cls, probs, block_label=()) -> "DensityMatrix":
        return cls(np.diag(np.asarray(probs, dtype=complex)), block_label)


@dataclass(frozen=True, eq=False)
class PFunction:
    """Radial (or sampled radial-angular) weight of a diagonal representation.

    ``analytic_radial`` takes a callable of u = |z|^2.  ``sampled`` holds one
    value per quadrature node, or a (nodes, angles) array on the uniform
    angle grid theta_j = 2 pi j / n_angles when the weight carries phases.
    """

    representation: str
    weight: Callable | None = None
    values: np.ndarray | None = field(default=None, repr=False)
    normalization_checked: bool = False

    @classmethod
    def analytic_radial(cls, weight: Callable) -> "PFunction":
        return cls("analytic_radial", weight=weight)

    @classmethod
    def sampled(cls, values) -> "PFunction":
        return cls("sampled", values=np.asarray(values))

    @classmethod
    def single_node(cls, quad: RadialQuadrature, index: int) -> "PFunction":
        """All weight on one radial node, normalized as int d lambda d theta P = 1."""
        v = np.zeros(quad.order)
        v[index] = 1.0 / (2 * np.pi * quad.weights[index])
        return cls.sampled(v)

    def grid(self, quad: RadialQuadrature) -> np.ndarray:
        """Values as a (nodes, angles) array."""
        if self.representation == "analytic_radial":
            vals = np.asarray([self.weight(u) for u in quad.u], dtype=complex)
        elif self.representation == "sampled":
            vals = np.asarray(self.values, dtype=complex)
        else:
            raise ValueError(f"unknown P representation {self.representation!r}")
        if vals.shape[0] != quad.order:
            raise DimensionMismatch(f"{vals.shape[0]} P samples for {quad.order} nodes")
        return vals[:, None] if vals.ndim == 1 else vals


def _norm_at_nodes(spec, quad: RadialQuadrature, mask: np.ndarray) -> np.ndarray:
    """N(u_i) where ``mask`` is set; the series must converge there."""
    out = np.ones(quad.order)
    for i in np.nonzero(mask)[0]:
        try:
            out[i] = magnitude_terms(spec, quad.u[i], quad.variant).sum()
        except SeriesNotConverged as exc:
            raise SeriesNotConverged(
                f"P has weight at node u = {quad.u[i]:.6g} where N(u) does not converge"
            ) from exc
    return out


def _node_amplitudes(spec, quad: RadialQuadrature, n_max: int) -> np.ndarray:
    """r_i^n / sqrt({n}!) evaluated in log space, shape (nodes, n_max)."""
    numbers = spec.deformed_numbers(quad.variant)[1:n_max]
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(numbers))))
    n = np.arange(n_max)
    with np.errstate(under="ignore"):
        return np.exp(n * np.log(quad.nodes)[:, None] - 0.5 * log_fact)


def p_to_rho(spec: DeformationSpec, quad: RadialQuadrature, p: PFunction,
             convention: str = "with_N", n_max: int | None = None) -> DensityMatrix:
    """Density matrix of a diagonal representation over the quadrature nodes.

    ``with_N``:     rho = int N(r^2) d lambda d theta  P |eta_z><eta_z|
    ``without_N``:  rho = int d lambda d theta  P |eta_z><eta_z|
    A radial P yields a diagonal rho (the theta integral kills n != m).
    """
    if convention not in ("with_N", "without_N"):
        raise ValueError("convention must be 'with_N' or 'without_N'")
    n_max = spec.n_max + 1 if n_max is None else n_max
    vals = p.grid(quad)
    n_ang = vals.shape[1]
    active = np.any(vals != 0, axis=1)
    norms = _norm_at_nodes(spec, quad, active)

    radial_mass = vals.mean(axis=1)  # theta-average of P
    total = 2 * np.pi * np.sum(quad.weights * radial_mass * (norms if convention == "with_N" else 1.0))
    if abs(total - 1.0) > P_NORM_TOL:
        raise UnnormalizedP(f"P integrates to {total.real:.12g} under the {convention} convention")

    theta = 2 * np.pi * np.arange(n_ang) / n_ang
    scale = quad.weights / (norms if convention == "without_N" else 1.0)
    rho = np.zeros((n_max, n_max), dtype=complex)
    amp = _node_amplitudes(spec, quad, n_max)
    # samples on n_ang angles resolve only |d| <= (n_ang - 1) // 2; higher
    # Fourier components would alias, so P is read as band-limited
    band = min(n_max - 1, (n_ang - 1) // 2)
    for d in range(-band, band + 1):
        # angular Fourier component of P for frequency -(n - m) = -d
        comp = (vals * np.exp(1j * d * theta)).mean(axis=1) * 2 * np.pi
        if not np.any(np.abs(comp) > 0):
            continue
        for k in range(max(0, d), min(n_max, n_max + d)):
            j = k - d
            rho[k, j] = np.sum(scale * comp * amp[:, k] * amp[:, j])
    return DensityMatrix(rho)


def photon_distribution(spec: DeformationSpec, param: CoherentParameter,
                        n_max: int | None = None, variant: str = PRIMAL) -> np.ndarray:
    """f-Poisson law N(|z|^2)^-1 |z|^(2n) / {n}!."""
    check_domain(spec, param, variant)
    r2 = float(param.radii()[0] ** 2)
    terms = magnitude_terms(spec, r2, variant)
    dist = terms / terms.sum()
    return dist if n_max is None else dist[:n_max]


def _state_vectors(spec, params: Sequence[CoherentParameter], dim: int, variant: str) -> np.ndarray:
    """Rows: truncated (unrenormalized) coherent vectors of total dimension ``dim``."""
    rows = []
    for p in params:
        per_mode = round(dim ** (1.0 / p.modes))
        if per_mode ** p.modes != dim:
            raise DimensionMismatch(f"dimension {dim} is not a {p.modes}-mode tensor space")
        rows.append(build_ncs(spec, per_mode, p, variant, tail_tol=np.inf).amplitudes)
    return np.array(rows)


def husimi(spec, rho: DensityMatrix, params: Sequence[CoherentParameter],
           variant: str = PRIMAL) -> np.ndarray:
    """<eta_z|rho|eta_z> at each parameter."""
    vecs = _state_vectors(spec, params, rho.dim, variant)
    vals = np.einsum("pi,ij,pj->p", vecs.conj(), rho.entries, vecs)
    return vals.real


def projector_reconstruct(spec: DeformationSpec, n: int, m: int, n_max: int,
                          variant: str = PRIMAL) -> OperatorMatrix:
    """|Phi_n><Phi_m| from the radial derivative of N(r^2)|eta><eta| at r = 0.

    The integrand is a polynomial in r with operator coefficients; the theta
    integral keeps the (k, l) entries with k - l = n - m and the derivative of
    order n + m reads off the coefficient of r^(n+m).
    """
    _check_variant(variant)
    if n < 0 or m < 0:
        raise ValueError("indices must be non-negative")
    if n + m > DERIVATIVE_CAP:
        raise CapExceeded(f"n + m = {n + m} exceeds the derivative cap {DERIVATIVE_CAP}")
    if max(n, m) >= n_max:
        raise DimensionMismatch(f"index {max(n, m)} does not fit dimension {n_max}")
    fact = spec.factorials if variant == PRIMAL else spec.factorials_dual
    inv_sqrt = 1.0 / np.sqrt(fact[:n_max])

    k, l = np.meshgrid(np.arange(n_max), np.arange(n_max), indexing="ij")
    # coefficients of r^p of the theta-projected operator polynomial
    poly = np.zeros((2 * n_max - 1, n_max, n_max))
    keep = (k - l) == (n - m)
    poly[(k + l)[keep], k[keep], l[keep]] = (inv_sqrt[:, None] * inv_sqrt[None, :])[keep]
    order = n + m
    derivative_at_zero = math.factorial(order) * poly[order]
    prefactor = math.sqrt(fact[n] * fact[m]) / math.factorial(order)
    return OperatorMatrix(prefactor * derivative_at_zero, FockBasis(n_max))


def glauber_sudarshan_rho(spec: DeformationSpec, coefficients, variant: str = PRIMAL,
                          tol: float = TWO_ROUTE_TOL) -> DensityMatrix:
    """Synthesize rho from projector reconstructions and compare with direct assembly."""
    table = np.asarray(coefficients, dtype=complex)
    direct = DensityMatrix(table)
    dim = direct.dim
    synth = np.zeros_like(table)
    for n, m in zip(*np.nonzero(table)):
        synth += table[n, m] * projector_reconstruct(spec, int(n), int(m), dim, variant).entries
    gap = float(np.max(np.abs(synth - direct.entries)))
    if gap > tol:
        raise CrossCheckFailure(f"projector synthesis differs from direct assembly by {gap:.3g}")
    return DensityMatrix(synth)


@dataclass(frozen=True)
class RhoKernelReport:
    herm_defect: float
    min_diag: float
    idem_defect: float


def resolution_diagonal(spec: DeformationSpec, quad: RadialQuadrature, dim: int) -> np.ndarray:
    """Diagonal of the quadrature-realized resolution of identity, 2 pi sum w u^n / {n}!."""
    fact = spec.factorials if quad.variant == PRIMAL else spec.factorials_dual
    return np.array([quad.moment(n) / fact[n] for n in range(dim)])


def rho_kernel_properties(spec: DeformationSpec, quad: RadialQuadrature, rho: DensityMatrix,
                          param_pairs: Sequence[tuple[CoherentParameter, CoherentParameter]]
                          ) -> RhoKernelReport:
    """Hermiticity, diagonal positivity and idempotence of rho(z, z') = <eta_z|rho|eta_z'>.

    The z'' integral in the idempotence test is done with the radial
    quadrature and an analytic theta integral, which leaves
    <eta_z| rho D rho |eta_z'> with D the quadrature resolution diagonal.
    """
    variant = quad.variant
    firsts = [a for a, _ in param_pairs]
    seconds = [b for _, b in param_pairs]
    va = _state_vectors(spec, firsts, rho.dim, variant)
    vb = _state_vectors(spec, seconds, rho.dim, variant)
    R = rho.entries
    kern = lambda x, y: np.einsum("pi,ij,pj->p", x.conj(), R, y)  # noqa: E731

    herm = float(np.max(np.abs(kern(va, vb) - kern(vb, va).conj())))
    diag = np.concatenate([kern(va, va).real, kern(vb, vb).real])
    D = np.diag(resolution_diagonal(spec, quad, rho.dim))
    integral = np.einsum("pi,ij,pj->p", va.conj(), R @ D @ R, vb)
    idem = float(np.max(np.abs(integral - kern(va, vb))))
    return RhoKernelReport(herm, float(diag.min()), idem)


@dataclass(frozen=True)
class BlockReport:
    configs: list
    weights: np.ndarray
    global_trace: float
    energy_shifts: np.ndarray
    husimi: list
    rho_hat: np.ndarray = field(repr=False)


def multimode_blocks(specs, mode_params: Sequence[ModeParams], rho_blocks: Sequence[DensityMatrix],
                     weights: Sequence[float], probes: Sequence[CoherentParameter] = ()) -> BlockReport:
    """Block-diagonal rho over the fermionic configurations Gamma = {0,1}^M.

    ``mode_params`` holds one ModeParams per bosonic mode (their k_config is
    ignored and replaced by each configuration in turn).  Block weights are
    user input and must sum to 1.
    """
    if not mode_params:
        raise ValueError("need at least one bosonic mode")
    M = mode_params[0].M
    if M > 4:
        raise BlockCountMismatch(f"M = {M} exceeds the desk-scale cap of 4")
    configs = gamma_configs(M)
    if len(rho_blocks) != len(configs) or len(weights) != len(configs):
        raise BlockCountMismatch(f"need {len(configs)} blocks and weights for M = {M}")
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0):
        raise InvalidDensity("block weights must be non-negative")
    global_trace = float(sum(w * np.trace(b.entries).real for w, b in zip(weights, rho_blocks)))
    if abs(global_trace - 1.0) > TRACE_TOL:
        raise InvalidDensity(f"weighted block traces sum to {global_trace:.12g}")

    shifts = []
    for cfg in configs:
        total = 0.0
        for p in mode_params:
            pk = p.with_config(cfg)
            total += pk.eps_k / pk.n_modes - pk.g_k ** 2 / pk.omega
        shifts.append(total)

    hus = [husimi(specs, b, probes) if probes else np.empty(0) for b in rho_blocks]
    dims = [b.dim for b in rho_blocks]
    rho_hat = np.zeros((sum(dims), sum(dims)), dtype=complex)
    offset = 0
    for w, b in zip(weights, rho_blocks):
        rho_hat[offset:offset + b.dim, offset:offset + b.dim] = w * b.entries
        offset += b.dim
    return BlockReport(configs, weights, global_trace, np.array(shifts), hus, rho_hat)
