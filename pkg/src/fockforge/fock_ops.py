"""Dense operator matrices on a truncated Fock space.

Matrices use the usual column convention: ``M[i, j] = <i|M|j>``.  The
annihilation-type operators therefore sit on the first superdiagonal,
``A[n-1, n] = sqrt(n) f(n)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .deformation import DUAL, PRIMAL, DeformationSpec, _check_variant
from .errors import DimensionTooSmall, IndexOutOfRange

BASIS_LABELS = ("bare", "displaced", "displaced_dual")


@dataclass(frozen=True)
class FockBasis:
    n_max: int
    label: str = "bare"

    def __post_init__(self):
        if self.n_max < 2:
            raise DimensionTooSmall(f"Fock dimension must be >= 2, got {self.n_max}")
        if self.label not in BASIS_LABELS:
            raise ValueError(f"unknown basis label {self.label!r}")


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray = field(repr=False)
    basis: FockBasis

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (self.basis.n_max, self.basis.n_max):
            raise ValueError(f"matrix shape {m.shape} does not match basis {self.basis.n_max}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.basis.n_max

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.basis)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.entries @ other.entries, self.basis)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))


def commutator(x, y) -> np.ndarray:
    x = x.entries if isinstance(x, OperatorMatrix) else x
    y = y.entries if isinstance(y, OperatorMatrix) else y
    return x @ y - y @ x


def _check_dim(spec: DeformationSpec, n_max: int, extra: int = 0):
    if n_max < 2:
        raise DimensionTooSmall(f"Fock dimension must be >= 2, got {n_max}")
    if n_max - 1 + extra > spec.n_max:
        raise IndexOutOfRange(
            f"dimension {n_max} needs f up to n = {n_max - 1 + extra}, "
            f"deformation only has n_max = {spec.n_max}"
        )


def f_diagonal(spec: DeformationSpec, n_max: int) -> np.ndarray:
    """f(n) for n = 0..n_max-1 with the never-used f(0) set to 1."""
    _check_dim(spec, n_max)
    fd = np.ones(n_max)
    fd[1:] = spec.f[1:n_max]
    return fd


def _shift(values: np.ndarray) -> np.ndarray:
    return np.diag(values.astype(complex), 1)


@dataclass(frozen=True)
class LadderSet:
    a: OperatorMatrix
    a_dag: OperatorMatrix
    N: OperatorMatrix
    A: OperatorMatrix
    A_dag: OperatorMatrix
    Aprime: OperatorMatrix
    Aprime_dag: OperatorMatrix


def ladder_matrices(spec: DeformationSpec, n_max: int) -> LadderSet:
    _check_dim(spec, n_max)
    basis = FockBasis(n_max)
    n = np.arange(1, n_max, dtype=float)
    fn = spec.f[1:n_max]
    a = _shift(np.sqrt(n))
    A = _shift(np.sqrt(n) * fn)
    Ap = _shift(np.sqrt(n) / fn)
    wrap = lambda m: OperatorMatrix(m, basis)  # noqa: E731
    return LadderSet(
        a=wrap(a), a_dag=wrap(a.conj().T), N=wrap(np.diag(np.arange(n_max, dtype=complex))),
        A=wrap(A), A_dag=wrap(A.conj().T), Aprime=wrap(Ap), Aprime_dag=wrap(Ap.conj().T),
    )


@dataclass(frozen=True)
class RescaleSet:
    T: OperatorMatrix
    T_inv: OperatorMatrix
    S: OperatorMatrix


def rescale_operators(spec: DeformationSpec, n_max: int) -> RescaleSet:
    _check_dim(spec, n_max)
    basis = FockBasis(n_max)
    t = spec.t[:n_max]
    return RescaleSet(
        T=OperatorMatrix(np.diag(t), basis),
        T_inv=OperatorMatrix(np.diag(1.0 / t), basis),
        S=OperatorMatrix(np.diag(t ** 2), basis),
    )


def _generator(spec: DeformationSpec, n_max: int, variant: str) -> np.ndarray:
    """i*sqrt(2)*P: a f - f^-1 a^dag (primal) or a f^-1 - f a^dag (dual)."""
    _check_variant(variant)
    lad = ladder_matrices(spec, n_max)
    fd = f_diagonal(spec, n_max)
    a, ad = lad.a.entries, lad.a_dag.entries
    if variant == PRIMAL:
        return a @ np.diag(fd) - np.diag(1.0 / fd) @ ad
    return a @ np.diag(1.0 / fd) - np.diag(fd) @ ad


def momentum_matrix(spec: DeformationSpec, n_max: int, variant: str = PRIMAL) -> OperatorMatrix:
    return OperatorMatrix(_generator(spec, n_max, variant) / (1j * np.sqrt(2.0)), FockBasis(n_max))


@dataclass(frozen=True)
class ModeParams:
    """Couplings of one bosonic mode to M fermionic levels, for one block [k]."""

    omega: float
    eps: tuple = ()
    g: tuple = ()
    k_config: tuple = ()
    n_modes: int = 1

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        object.__setattr__(self, "g", tuple(float(x) for x in self.g))
        object.__setattr__(self, "k_config", tuple(int(k) for k in self.k_config))
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        m = len(self.k_config)
        if m < 1 or len(self.eps) != m or len(self.g) != m:
            raise ValueError("eps, g and k_config must share a length M >= 1")
        if any(k not in (0, 1) for k in self.k_config):
            raise ValueError("k_config entries must be 0 or 1")
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")

    @property
    def M(self) -> int:
        return len(self.k_config)

    @property
    def g_k(self) -> float:
        return float(sum(k * g for k, g in zip(self.k_config, self.g)))

    @property
    def eps_k(self) -> float:
        return float(sum(k * e for k, e in zip(self.k_config, self.eps)))

    def with_config(self, k_config: Sequence[int]) -> "ModeParams":
        return ModeParams(self.omega, self.eps, self.g, tuple(k_config), self.n_modes)


def gamma_configs(M: int) -> list[tuple[int, ...]]:
    """All fermionic occupation vectors {0,1}^M in lexicographic order."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return list(itertools.product((0, 1), repeat=M))


@dataclass(frozen=True)
class DisplacementResult:
    U: OperatorMatrix
    gram_defect: float


def _gram_defect(U: np.ndarray) -> float:
    k = U.shape[0] - 2
    G = (U.conj().T @ U)[:k, :k]
    return float(np.max(np.abs(G - np.eye(k))))


def displacement_shift(spec: DeformationSpec, n_max: int, params: ModeParams,
                       variant: str = PRIMAL) -> DisplacementResult:
    """U = exp(i sqrt(2) (g_[k]/omega) P), with its Gram defect on the leading block.

    For f != 1 the generator is not anti-Hermitian, so U need not be unitary;
    the defect is reported instead of raised.
    """
    X = (params.g_k / params.omega) * _generator(spec, n_max, variant)
    U = expm(X) if params.g_k != 0.0 else np.eye(n_max, dtype=complex)
    label = "displaced" if variant == PRIMAL else "displaced_dual"
    return DisplacementResult(OperatorMatrix(U, FockBasis(n_max, label)), _gram_defect(U))


@dataclass(frozen=True)
class BkResult:
    B: OperatorMatrix
    spectrum: np.ndarray
    gram_defect: float
    form: str

    def numerical_levels(self) -> np.ndarray:
        ev = np.linalg.eigvals(self.B.entries)
        return np.sort(ev.real)

    def leading_block_defect(self, drop: int = 4) -> float:
        """max |closed form - eigenvalue| over the lowest n_max - drop levels."""
        k = self.B.dim - drop
        num = self.numerical_levels()[:k]
        ref = np.sort(self.spectrum)[:k]
        return float(np.max(np.abs(num - ref)))


def closed_form_spectrum(spec: DeformationSpec, n_max: int, params: ModeParams,
                         variant: str = PRIMAL) -> np.ndarray:
    fd = f_diagonal(spec, n_max)
    n = np.arange(n_max, dtype=float)
    ladder = n * fd ** 2 if variant == PRIMAL else n / fd ** 2
    return params.omega * ladder + params.eps_k / params.n_modes - params.g_k ** 2 / params.omega


def bk_operator(spec: DeformationSpec, n_max: int, params: ModeParams,
                variant: str = PRIMAL, form: str = "similarity") -> BkResult:
    """Displaced block Hamiltonian B_[k] and its closed-form ladder.

    ``form="similarity"`` builds A_[k] = U (a f(N)) U^-1; ``form="additive"``
    builds A_[k] = a f(N) + (g_[k]/omega) I.  They agree when f = 1.
    """
    _check_variant(variant)
    lad = ladder_matrices(spec, n_max)
    base = (lad.A if variant == PRIMAL else lad.Aprime).entries
    disp = displacement_shift(spec, n_max, params, variant)
    if form == "similarity":
        U = disp.U.entries
        X = (params.g_k / params.omega) * _generator(spec, n_max, variant)
        U_inv = expm(-X) if params.g_k != 0.0 else np.eye(n_max)
        Ak = U @ base @ U_inv
    elif form == "additive":
        Ak = base + (params.g_k / params.omega) * np.eye(n_max)
    else:
        raise ValueError("form must be 'similarity' or 'additive'")
    shift = params.eps_k / params.n_modes - params.g_k ** 2 / params.omega
    B = params.omega * Ak.conj().T @ Ak + shift * np.eye(n_max)
    label = "displaced" if variant == PRIMAL else "displaced_dual"
    return BkResult(
        B=OperatorMatrix(B, FockBasis(n_max, label)),
        spectrum=closed_form_spectrum(spec, n_max, params, variant),
        gram_defect=disp.gram_defect,
        form=form,
    )
