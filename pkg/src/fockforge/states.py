"""Nonlinear coherent states, their overlap kernel and free evolution.

Every coherent-state parameter enters the series only through its n-th
"power", which is always of the form R^n exp(i phi_n):

* plain form:         R = |z|,     phi_n = n arg(z)
* action-angle form:  R = sqrt(J), phi_n = -n f(n) gamma

so normalizations, overlaps and amplitudes share one code path.  The kernel
K(a, b) = <eta_b|eta_a> is evaluated from that single sesquilinear series,
which makes K(z, z) = 1 hold to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .deformation import DUAL, PRIMAL, DeformationSpec, _check_variant, magnitude_terms
from .errors import (
    CrossCheckFailure,
    DimensionMismatch,
    FormMismatch,
    IndexOutOfRange,
    OutsideDomain,
    TailTooHeavy,
)

DOMAIN_FRACTION = 0.9
TAIL_MASS_TOL = 1e-10
MAX_MODES = 3
MAX_DIM_MULTIMODE = 32


@dataclass(frozen=True)
class CoherentParameter:
    form: str
    z: tuple = ()
    J: tuple = ()
    gamma: tuple = ()

    def __post_init__(self):
        if self.form == "plain":
            object.__setattr__(self, "z", tuple(complex(v) for v in self.z))
            if not self.z:
                raise ValueError("plain parameter needs at least one mode")
        elif self.form == "action_angle":
            object.__setattr__(self, "J", tuple(float(v) for v in self.J))
            object.__setattr__(self, "gamma", tuple(float(v) for v in self.gamma))
            if not self.J or len(self.J) != len(self.gamma):
                raise ValueError("J and gamma must be non-empty and of equal length")
            if any(j < 0 for j in self.J):
                raise ValueError("J must be non-negative")
        else:
            raise ValueError(f"unknown parameter form {self.form!r}")

    @classmethod
    def plain(cls, z) -> "CoherentParameter":
        z = (z,) if np.isscalar(z) else tuple(z)
        return cls("plain", z=z)

    @classmethod
    def action_angle(cls, J, gamma) -> "CoherentParameter":
        J = (J,) if np.isscalar(J) else tuple(J)
        gamma = (gamma,) if np.isscalar(gamma) else tuple(gamma)
        return cls("action_angle", J=J, gamma=gamma)

    @property
    def modes(self) -> int:
        return len(self.z) if self.form == "plain" else len(self.J)

    def radii(self) -> np.ndarray:
        if self.form == "plain":
            return np.abs(np.array(self.z))
        return np.sqrt(np.array(self.J))

    def to_action_angle(self) -> "CoherentParameter":
        """J = |z|^2, gamma = -arg z: coefficient-identical only when f = 1."""
        if self.form == "action_angle":
            return self
        z = np.array(self.z)
        return CoherentParameter.action_angle(np.abs(z) ** 2, -np.angle(z))

    def to_plain(self) -> "CoherentParameter":
        if self.form == "plain":
            return self
        r = np.sqrt(np.array(self.J))
        return CoherentParameter.plain(r * np.exp(-1j * np.array(self.gamma)))


def _specs(spec, modes: int) -> list[DeformationSpec]:
    if isinstance(spec, DeformationSpec):
        return [spec] * modes
    specs = list(spec)
    if len(specs) != modes:
        raise DimensionMismatch(f"{len(specs)} deformations for {modes} modes")
    return specs


def check_domain(spec, param: CoherentParameter, variant: str = PRIMAL,
                 fraction: float = DOMAIN_FRACTION) -> None:
    _check_variant(variant)
    for l, (s, r) in enumerate(zip(_specs(spec, param.modes), param.radii())):
        limit = s.radius(variant).limit(fraction)
        if r > limit * (1 + 1e-12):
            raise OutsideDomain(
                f"mode {l}: |z| = {r:.6g} exceeds {fraction} x radius = {limit:.6g}"
            )


def _phases(spec: DeformationSpec, param: CoherentParameter, mode: int, n_terms: int) -> np.ndarray:
    n = np.arange(n_terms)
    if param.form == "plain":
        return n * np.angle(param.z[mode])
    fn = np.ones(n_terms)
    fn[1:] = spec.f[1:n_terms]
    return -n * fn * param.gamma[mode]


def _mode_series(spec: DeformationSpec, a: CoherentParameter, b: CoherentParameter,
                 mode: int, variant: str) -> complex:
    """sum_n conj(b^n) a^n / {n}! for one mode (full materialized series)."""
    ra, rb = a.radii()[mode], b.radii()[mode]
    mags = magnitude_terms(spec, ra * rb, variant)
    n_terms = mags.size
    dphi = _phases(spec, a, mode, n_terms) - _phases(spec, b, mode, n_terms)
    if not np.any(dphi):
        return complex(mags.sum())
    return complex(np.sum(mags * np.exp(1j * dphi)))


def sesquilinear(spec, a: CoherentParameter, b: CoherentParameter,
                 variant: str = PRIMAL) -> complex:
    """Unnormalized overlap; equals N(conj(b) a) for plain parameters."""
    if a.modes != b.modes:
        raise DimensionMismatch("parameters have different mode counts")
    specs = _specs(spec, a.modes)
    out = 1.0 + 0j
    for l, s in enumerate(specs):
        out *= _mode_series(s, a, b, l, variant)
    return out


def normalization(spec, param: CoherentParameter, variant: str = PRIMAL) -> float:
    check_domain(spec, param, variant)
    return float(sesquilinear(spec, param, param, variant).real)


def overlap_kernel(spec, param_a: CoherentParameter, param_b: CoherentParameter,
                   variant: str = PRIMAL) -> complex:
    """K(a, b) = N(conj(b) a) / sqrt(N(|a|^2) N(|b|^2)) = <eta_b|eta_a>."""
    check_domain(spec, param_a, variant)
    check_domain(spec, param_b, variant)
    s_ab = sesquilinear(spec, param_a, param_b, variant)
    s_aa = sesquilinear(spec, param_a, param_a, variant).real
    s_bb = sesquilinear(spec, param_b, param_b, variant).real
    return s_ab / math.sqrt(s_aa * s_bb)


def probability_density(spec, param_probe: CoherentParameter, param_center: CoherentParameter,
                        variant: str = PRIMAL) -> float:
    k = overlap_kernel(spec, param_probe, param_center, variant)
    return float(min(1.0, abs(k) ** 2))


@dataclass(frozen=True, eq=False)
class CoherentState:
    param: CoherentParameter
    variant: str
    amplitudes: np.ndarray = field(repr=False)
    norm_factor: float
    n_max: int

    @property
    def modes(self) -> int:
        return self.param.modes

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tail_mass(self) -> float:
        return float(max(0.0, 1.0 - np.vdot(self.amplitudes, self.amplitudes).real))

    def inner(self, other: "CoherentState") -> complex:
        """<self|other>."""
        if self.amplitudes.shape != other.amplitudes.shape:
            raise DimensionMismatch("states live on different truncations")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _mode_amplitudes(spec: DeformationSpec, param: CoherentParameter, mode: int,
                     n_max: int, variant: str) -> np.ndarray:
    if n_max > spec.n_max + 1:
        raise IndexOutOfRange(f"dimension {n_max} exceeds deformation table n_max + 1")
    r = param.radii()[mode]
    mags = np.sqrt(magnitude_terms(spec, r * r, variant, n_terms=n_max))
    return mags * np.exp(1j * _phases(spec, param, mode, n_max))


def build_ncs(spec, n_max: int, param: CoherentParameter, variant: str = PRIMAL,
              tail_tol: float = TAIL_MASS_TOL) -> CoherentState:
    """Truncated NCS vector, normalized with the full-series normalization."""
    check_domain(spec, param, variant)
    specs = _specs(spec, param.modes)
    if param.modes > 1 and (param.modes > MAX_MODES or n_max > MAX_DIM_MULTIMODE):
        raise DimensionMismatch(
            f"multimode states are capped at {MAX_MODES} modes and dimension "
            f"{MAX_DIM_MULTIMODE} per mode"
        )
    vec = np.ones(1, dtype=complex)
    norm = 1.0
    for l, s in enumerate(specs):
        mode_norm = _mode_series(s, param, param, l, variant).real
        amp = _mode_amplitudes(s, param, l, n_max, variant) / math.sqrt(mode_norm)
        vec = np.kron(vec, amp)
        norm *= mode_norm
    state = CoherentState(param, variant, vec, norm, n_max)
    if state.tail_mass() > tail_tol:
        raise TailTooHeavy(
            f"truncation n_max = {n_max} leaves tail mass {state.tail_mass():.3g} > {tail_tol}"
        )
    return state


def required_dimension(spec, param: CoherentParameter, variant: str = PRIMAL,
                       tol: float = TAIL_MASS_TOL) -> int:
    """Smallest per-mode dimension whose truncated state has tail mass below ``tol``."""
    check_domain(spec, param, variant)
    specs = _specs(spec, param.modes)
    # per-mode tails add (to first order) for a product state
    tol_mode = tol / param.modes
    dims = []
    for s, r in zip(specs, param.radii()):
        probs = magnitude_terms(s, r * r, variant)
        probs = probs / probs.sum()
        # tails[k]: mass beyond level k, summed from the small end to avoid cancellation
        tails = np.append(np.cumsum(probs[::-1])[::-1][1:], 0.0)
        hit = np.nonzero(tails < tol_mode)[0]
        if hit.size == 0:
            raise TailTooHeavy(f"no dimension up to {s.n_max + 1} reaches tail mass {tol}")
        dims.append(int(hit[0]) + 1)
    return max(max(dims), 2)


def _phase_frequencies(param: CoherentParameter, frequencies) -> np.ndarray:
    w = np.atleast_1d(np.asarray(frequencies, dtype=float))
    if w.size != param.modes:
        raise DimensionMismatch(f"{w.size} frequencies for {param.modes} modes")
    if np.any(w <= 0):
        raise ValueError("frequencies must be positive")
    return w


def _as_action_angle(spec, param: CoherentParameter) -> CoherentParameter:
    if param.form == "action_angle":
        return param
    if all(s.is_identity for s in _specs(spec, param.modes)):
        return param.to_action_angle()
    raise FormMismatch("evolution needs action-angle parameters unless f = 1")


def evolve(spec, state: CoherentState, t: float, frequencies) -> CoherentState:
    """Free evolution under the diagonal bosonic Hamiltonian.

    Amplitude n picks up exp(-i sum_l omega_l n_l f_l(n_l) t), which is the
    shift gamma_l -> gamma_l + omega_l t of the action-angle parameter.
    """
    param = _as_action_angle(spec, state.param)
    w = _phase_frequencies(param, frequencies)
    specs = _specs(spec, param.modes)
    energy = np.zeros(1)
    for s, om in zip(specs, w):
        fn = np.ones(state.n_max)
        fn[1:] = s.f[1:state.n_max]
        energy = np.add.outer(energy, om * np.arange(state.n_max) * fn).ravel()
    new_param = CoherentParameter.action_angle(
        param.J, tuple(g + om * t for g, om in zip(param.gamma, w))
    )
    return replace(state, param=new_param, amplitudes=state.amplitudes * np.exp(-1j * energy * t))


@dataclass(frozen=True)
class EvolvedDensity:
    value: float
    inner_product_route: float
    discrepancy: float


def evolved_density(spec, param_probe: CoherentParameter, param_center: CoherentParameter,
                    t: float, frequencies, variant: str = PRIMAL,
                    cross_tol: float = 1e-10) -> EvolvedDensity:
    """|N(conj(z) z0(t))|^2 / (N(|z|^2) N(|z0|^2)), cross-checked by state vectors."""
    center = _as_action_angle(spec, param_center)
    w = _phase_frequencies(center, frequencies)
    moved = CoherentParameter.action_angle(
        center.J, tuple(g + om * t for g, om in zip(center.gamma, w))
    )
    value = abs(overlap_kernel(spec, param_probe, moved, variant)) ** 2

    dim = max(required_dimension(spec, p, variant, 1e-15) for p in (param_probe, center))
    if center.modes > 1:
        dim = min(dim, MAX_DIM_MULTIMODE)
    probe_state = build_ncs(spec, dim, param_probe, variant)
    center_state = build_ncs(spec, dim, center, variant)
    route = abs(probe_state.inner(evolve(spec, center_state, t, w))) ** 2
    gap = abs(value - route)
    if gap > cross_tol:
        raise CrossCheckFailure(f"evolved density routes differ by {gap:.3g}")
    return EvolvedDensity(float(value), float(route), float(gap))
