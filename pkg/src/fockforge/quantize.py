"""Coherent-state quantization of phase-space monomials and optical diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .deformation import DUAL, PRIMAL, DeformationSpec, _check_variant, magnitude_terms
from .errors import CrossCheckFailure, DimensionMismatch, DivisionDegenerate, FormMismatch
from .fock_ops import FockBasis, OperatorMatrix, _check_dim, commutator, ladder_matrices
from .states import CoherentState

SYMBOLS = ("z", "zbar", "z2", "zbar2", "zsq_abs", "Q", "P")
CROSS_TOL = 1e-8
DISPERSION_FLOOR = 1e-14


@dataclass(frozen=True)
class QuantizedObservable:
    symbol: str
    duality: str
    matrix: OperatorMatrix

    @property
    def entries(self) -> np.ndarray:
        return self.matrix.entries


def _raising_weights(spec: DeformationSpec, n_max: int, duality: str) -> np.ndarray:
    """sqrt(n) f(n) (primal) or sqrt(n)/f(n) (dual) for n = 1..n_max."""
    n = np.arange(1, n_max + 1, dtype=float)
    f = spec.f[1:n_max + 1]
    return np.sqrt(n) * (f if duality == PRIMAL else 1.0 / f)


def quantize(spec: DeformationSpec, n_max: int, symbol: str, duality: str = PRIMAL) -> QuantizedObservable:
    _check_variant(duality)
    if symbol not in SYMBOLS:
        raise ValueError(f"unknown symbol {symbol!r}")
    if n_max < 4:
        raise DimensionMismatch("quantization needs n_max >= 4")
    # the |z|^2 symbol reads f(n_max)
    _check_dim(spec, n_max, extra=1 if symbol == "zsq_abs" else 0)
    basis = FockBasis(n_max, "displaced" if duality == PRIMAL else "displaced_dual")
    if symbol == "zsq_abs":
        w = _raising_weights(spec, n_max, duality)
        return QuantizedObservable(symbol, duality, OperatorMatrix(np.diag(w ** 2), basis))
    w = _raising_weights(spec, n_max - 1, duality)
    lower = np.diag(w.astype(complex), 1)
    if symbol == "z":
        m = lower
    elif symbol == "zbar":
        m = lower.conj().T
    elif symbol in ("z2", "zbar2"):
        # <n|A_{z^2}|n+2> = sqrt((n+1)(n+2)) f(n+1) f(n+2)
        m = np.diag((w[:-1] * w[1:]).astype(complex), 2)
        m = m if symbol == "z2" else m.conj().T
    elif symbol == "Q":
        m = (lower + lower.conj().T) / math.sqrt(2)
    else:
        m = (lower - lower.conj().T) / (1j * math.sqrt(2))
    return QuantizedObservable(symbol, duality, OperatorMatrix(m, basis))


def _as_matrix(obs) -> np.ndarray:
    if isinstance(obs, QuantizedObservable):
        return obs.entries
    if isinstance(obs, OperatorMatrix):
        return obs.entries
    if isinstance(obs, np.ndarray):
        return obs
    mats = [_as_matrix(o) for o in obs]
    out = mats[0]
    for m in mats[1:]:
        if m.shape != out.shape:
            raise DimensionMismatch("factors of a product have different shapes")
        out = out @ m
    return out


def expectation(spec, obs, state: CoherentState) -> complex:
    """<state|M|state> for an operator or a product sequence of operators."""
    M = _as_matrix(obs)
    v = state.amplitudes
    if M.shape != (v.size, v.size):
        raise DimensionMismatch(f"operator {M.shape} does not act on a state of size {v.size}")
    return complex(np.vdot(v, M @ v))


def _plain_z(state: CoherentState) -> complex:
    if state.param.form != "plain" or state.modes != 1:
        raise FormMismatch("closed-form optics series need a single-mode plain parameter")
    return state.param.z[0]


def anti_normal_series(spec: DeformationSpec, x: float, variant: str = PRIMAL) -> float:
    """<A_z A_zbar> = N(x)^-1 sum_m {m+1} x^m / {m}!  (equals 2 G(x))."""
    terms = magnitude_terms(spec, x, variant)
    numbers = spec.deformed_numbers(variant)
    return float(np.sum(terms[:-1] * numbers[1:]) / terms.sum())


@dataclass(frozen=True)
class Dispersions:
    dQ2: float
    dP2: float
    G: float
    comm_expect: complex
    matrix_dQ2: float
    matrix_dP2: float
    matrix_comm: complex

    def intelligent_defect(self) -> float:
        return abs(self.dQ2 * self.dP2 - 0.25 * abs(self.comm_expect) ** 2)


def dispersions(spec: DeformationSpec, state: CoherentState, cross_tol: float = CROSS_TOL) -> Dispersions:
    z = _plain_z(state)
    x = abs(z) ** 2
    G = 0.5 * anti_normal_series(spec, x, state.variant)
    dq2 = G - x / 2
    comm = 1j * (2 * G - x)

    # two spare levels so that products of ladder matrices are exact on the state support
    dim = state.n_max + 2
    Q = quantize(spec, dim, "Q", state.variant).entries
    P = quantize(spec, dim, "P", state.variant).entries
    v = np.concatenate([state.amplitudes, np.zeros(2)])

    def ev(M):
        return complex(np.vdot(v, M @ v))

    def var(M):
        return (ev(M @ M) - ev(M) ** 2).real

    mq, mp_ = var(Q), var(P)
    mc = ev(commutator(Q, P))
    gap = max(abs(mq - dq2), abs(mp_ - dq2), abs(mc - comm))
    if gap > cross_tol:
        raise CrossCheckFailure(f"dispersion series and matrix routes differ by {gap:.3g}")
    return Dispersions(dq2, dq2, G, comm, mq, mp_, mc)


def snr(spec: DeformationSpec, state: CoherentState) -> float:
    """<Q>^2 / (Delta Q)^2 = 2 |z|^2 cos^2(phi) / (G - |z|^2/2)."""
    z = _plain_z(state)
    x = abs(z) ** 2
    dq2 = 0.5 * anti_normal_series(spec, x, state.variant) - x / 2
    if dq2 < DISPERSION_FLOOR:
        raise DivisionDegenerate(f"position dispersion {dq2:.3g} is too small")
    return float(2 * z.real ** 2 / dq2)


@dataclass(frozen=True)
class MandelResult:
    Q_mandel: float
    fano: float
    matrix_Q: float | None
    limit: bool = False


def mandel(spec: DeformationSpec, state: CoherentState, cross_tol: float = CROSS_TOL) -> MandelResult:
    """Mandel parameter of the deformed number operator A^dag A (eigenvalues {n})."""
    z = _plain_z(state)
    x = abs(z) ** 2
    numbers = spec.deformed_numbers(state.variant)
    if x == 0.0:
        q0 = float(numbers[1] - 1.0)
        return MandelResult(q0, q0 + 1.0, None, limit=True)
    q_series = anti_normal_series(spec, x, state.variant) - x - 1.0

    probs = np.abs(state.amplitudes) ** 2
    nd = numbers[:state.n_max]
    mean = float(probs @ nd)
    var = float(probs @ nd ** 2) - mean ** 2
    q_matrix = var / mean - 1.0
    if abs(q_matrix - q_series) > cross_tol:
        raise CrossCheckFailure(f"Mandel routes differ by {abs(q_matrix - q_series):.3g}")
    return MandelResult(q_series, q_series + 1.0, q_matrix)


@dataclass(frozen=True, eq=False)
class SUf11:
    Kminus: OperatorMatrix
    Kplus: OperatorMatrix
    K0: OperatorMatrix
    X: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    comm_defects: tuple
    bracket_diagonal: np.ndarray = field(repr=False)
    interior: np.ndarray = field(repr=False)

    def squeezing(self, vector) -> dict:
        """Which quadratures satisfy (Delta X)^2 < |<[K-, K-^dag]>| / 4."""
        v = np.asarray(vector, dtype=complex)
        bound = 0.25 * abs(np.vdot(v, self.bracket_diagonal * v))
        out = {}
        for name, M in (("X", self.X), ("Y", self.Y)):
            mean = np.vdot(v, M @ v)
            var = (np.vdot(v, M @ (M @ v)) - mean ** 2).real
            out[name] = bool(var < bound)
        return out


def su_f11(spec_l: DeformationSpec, spec_k: DeformationSpec, n_max: int) -> SUf11:
    """Two-mode SU_f(1,1) generators on C^n_max (mode l) x C^n_max (mode k)."""
    if n_max < 4:
        raise DimensionMismatch("SU_f(1,1) needs n_max >= 4 per mode")
    Ll, Lk = ladder_matrices(spec_l, n_max), ladder_matrices(spec_k, n_max)
    eye = np.eye(n_max)
    Km = np.kron(Ll.A.entries, Lk.A.entries)
    Kp = np.kron(Ll.Aprime_dag.entries, Lk.Aprime_dag.entries)
    Nl = Ll.Aprime_dag.entries @ Ll.A.entries
    Nk = Lk.Aprime_dag.entries @ Lk.A.entries
    K0 = 0.5 * (np.kron(Nl, eye) + np.kron(eye, Nk) + np.eye(n_max ** 2))

    n = np.arange(n_max)
    idx_l, idx_k = np.meshgrid(n, n, indexing="ij")
    interior = ((idx_l <= n_max - 3) & (idx_k <= n_max - 3)).ravel()
    block = np.ix_(interior, interior)
    d1 = float(np.max(np.abs((commutator(Kp, Km) + 2 * K0)[block])))
    d2 = float(np.max(np.abs((commutator(K0, Kp) - Kp)[block])))

    def deformed_numbers(spec):
        fd = np.ones(n_max + 1)
        fd[1:] = spec.f[1:n_max + 1]
        return np.arange(n_max + 1) * fd ** 2

    el, ek = deformed_numbers(spec_l), deformed_numbers(spec_k)
    bracket = (np.multiply.outer(el[1:], ek[1:]) - np.multiply.outer(el[:-1], ek[:-1])).ravel()

    X = (Km.conj().T + Km) / 2
    Y = 1j * (Km.conj().T - Km) / 2
    basis = FockBasis(n_max ** 2)
    return SUf11(OperatorMatrix(Km, basis), OperatorMatrix(Kp, basis), OperatorMatrix(K0, basis),
                 X, Y, (d1, d2), bracket, interior)
