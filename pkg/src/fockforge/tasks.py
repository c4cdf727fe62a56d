"""Batch tasks driven by a RunConfig.

Each task returns a :class:`TaskResult` holding a fixed CSV header, its rows
and a set of named assertions.  Grid points are independent, so they may be
evaluated by a thread pool; results are always assembled in grid order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .config import RunConfig
from .deformation import DUAL, PRIMAL, DeformationSpec
from .density import (
    DensityMatrix,
    glauber_sudarshan_rho,
    husimi,
    photon_distribution,
    projector_reconstruct,
    rho_kernel_properties,
)
from .errors import FockForgeError
from .fock_ops import ModeParams, bk_operator, commutator, ladder_matrices
from .measure import kernel_idempotence_check, quadrature_from_moments, verify_resolution_identity
from .quantize import dispersions, expectation, mandel, quantize, snr, su_f11
from .states import (
    CoherentParameter,
    build_ncs,
    evolve,
    evolved_density,
    overlap_kernel,
    probability_density,
    required_dimension,
)

GATE_GRAM = 1e-8
SPECTRUM_TOL = 1e-9
ALGEBRA_TOL = 1e-12
PROJECTOR_TOL = 1e-10
TWO_ROUTE_TOL = 1e-9
SU11_TOL = 1e-12
SU11_DIM = 12


@dataclass
class Assertion:
    name: str
    value: float | None
    tolerance: float | None
    passed: bool | None       # None: gated (not evaluated)
    note: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "status": {True: "pass", False: "fail", None: "gated"}[self.passed],
                "note": self.note}


@dataclass
class TaskResult:
    name: str
    header: list
    rows: list = field(default_factory=list)
    assertions: list = field(default_factory=list)

    def check(self, name, value, tol, note=""):
        ok = bool(value is not None and np.isfinite(value) and value <= tol)
        self.assertions.append(Assertion(name, float(value), tol, ok, note))

    def require(self, name, ok: bool, value, note=""):
        self.assertions.append(Assertion(name, float(value), None, bool(ok), note))

    def gated(self, name, note):
        self.assertions.append(Assertion(name, None, None, None, note))

    def fail(self, name, note):
        self.assertions.append(Assertion(name, None, None, False, note))

    @property
    def passed(self) -> bool:
        return all(a.passed is not False for a in self.assertions)


class TaskContext:
    def __init__(self, cfg: RunConfig, jobs: int = 1):
        self.cfg = cfg
        self.jobs = max(1, int(jobs))
        self.spec: DeformationSpec = cfg.deformation.build()

    def map(self, fn: Callable, items) -> list:
        items = list(items)
        if self.jobs == 1 or len(items) < 2:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(fn, items))

    @cached_property
    def quad(self):
        return quadrature_from_moments(self.spec, self.cfg.quadrature_order, PRIMAL)

    @cached_property
    def grid_radius(self) -> float:
        g = self.cfg.grid
        L = self.spec.radius_primal
        if L.unbounded:
            return g.radius_fraction * g.max_abs_z
        return min(g.radius_fraction, 0.9) * L.value

    @cached_property
    def grid(self) -> list[CoherentParameter]:
        g = self.cfg.grid
        pts = [0j]
        for i in range(1, g.radial + 1):
            r = self.grid_radius * i / g.radial
            for j in range(g.angular):
                pts.append(r * complex(math.cos(2 * math.pi * j / g.angular),
                                       math.sin(2 * math.pi * j / g.angular)))
        return [CoherentParameter.plain(z) for z in pts]

    @cached_property
    def center(self) -> CoherentParameter:
        """Reference coherent parameter: first point of the innermost ring."""
        return self.grid[1] if len(self.grid) > 1 else self.grid[0]

    def dimension(self, param: CoherentParameter, tol: float = 1e-14) -> int:
        return max(4, min(required_dimension(self.spec, param, PRIMAL, tol), self.spec.n_max))


def _z(p: CoherentParameter) -> list:
    z = p.z[0]
    return [z.real, z.imag]


# tasks ----------------------------------------------------------------------

def task_ops(ctx: TaskContext) -> TaskResult:
    spec, n_max = ctx.spec, ctx.cfg.truncation
    res = TaskResult("ops", ["n", "f", "t", "deformed_number", "dual_commutator_diag",
                             "deformed_commutator_diag", "deformed_commutator_expected"])
    lad = ladder_matrices(spec, n_max)
    dual_comm = np.diag(commutator(lad.A, lad.Aprime_dag)).real
    deformed = np.diag(commutator(lad.A, lad.A_dag)).real
    num = spec.numbers
    expected = num[1:n_max + 1] - num[:n_max]
    for n in range(n_max):
        f = float(spec.f[n]) if n >= 1 else float("nan")
        res.rows.append([n, f, float(spec.t[n]), float(num[n]), dual_comm[n], deformed[n], expected[n]])
    inner = slice(0, n_max - 1)
    res.check("dual_commutator_identity", float(np.max(np.abs(dual_comm[inner] - 1.0))), ALGEBRA_TOL)
    res.check("dual_commutator_corner", abs(dual_comm[-1] - (1 - n_max)), ALGEBRA_TOL)
    scale = np.maximum(1.0, np.abs(expected[inner]))
    res.check("deformed_commutator", float(np.max(np.abs(deformed[inner] - expected[inner]) / scale)),
              ALGEBRA_TOL)
    rec = np.abs(spec.t[1:] - spec.f[1:] * spec.t[:-1]) / spec.t[1:]
    res.check("t_recurrence", float(rec.max()), ALGEBRA_TOL)
    return res


def task_spectrum(ctx: TaskContext) -> TaskResult:
    m = ctx.cfg.modes
    n_max = ctx.cfg.truncation
    res = TaskResult("spectrum", ["k_config", "n", "closed_form", "numerical", "abs_diff", "gram_defect"])

    def one(cfg_k):
        params = ModeParams(m.omega[0], m.eps, m.g, cfg_k, m.n_b)
        return params, bk_operator(ctx.spec, n_max, params)

    for params, bk in ctx.map(one, m.configs()):
        label = "".join(str(b) for b in params.k_config)
        keep = n_max - 4
        num = bk.numerical_levels()[:keep]
        ref = np.sort(bk.spectrum)[:keep]
        for n in range(keep):
            res.rows.append([label, n, ref[n], num[n], abs(ref[n] - num[n]), bk.gram_defect])
        name = f"spectrum[{label}]"
        if bk.gram_defect < GATE_GRAM:
            res.check(name, float(np.max(np.abs(ref - num))), SPECTRUM_TOL)
        else:
            res.gated(name, f"displacement Gram defect {bk.gram_defect:.3g} >= {GATE_GRAM}")
    return res


def task_kernel(ctx: TaskContext) -> TaskResult:
    spec, grid = ctx.spec, ctx.grid
    res = TaskResult("kernel", ["z_re", "z_im", "zp_re", "zp_im", "K_re", "K_im"])

    def row(a):
        return [overlap_kernel(spec, a, b) for b in grid]

    K = np.array(ctx.map(row, grid))
    for i, a in enumerate(grid):
        for j, b in enumerate(grid):
            res.rows.append(_z(a) + _z(b) + [K[i, j].real, K[i, j].imag])
    res.check("hermiticity", float(np.max(np.abs(K - K.conj().T))), ALGEBRA_TOL)
    res.check("diagonal_unity", float(np.max(np.abs(np.diag(K) - 1.0))), ALGEBRA_TOL)
    pairs = [(a, b) for a in grid for b in grid]
    chunks = [pairs[i::ctx.jobs] for i in range(ctx.jobs)]
    quad = ctx.quad
    idem = max(ctx.map(lambda c: kernel_idempotence_check(spec, quad, c) if c else 0.0, chunks))
    res.check("idempotence", idem, ctx.cfg.tolerances.idempotence)
    return res


def task_resolve(ctx: TaskContext) -> TaskResult:
    res = TaskResult("resolve", ["variant", "n", "defect"])
    top = 2 * ctx.cfg.quadrature_order
    for variant in (PRIMAL, DUAL):
        quad = ctx.quad if variant == PRIMAL else quadrature_from_moments(
            ctx.spec, ctx.cfg.quadrature_order, DUAL)
        rep = verify_resolution_identity(ctx.spec, quad, top)
        for n, d in enumerate(rep.per_level):
            res.rows.append([variant, n, d])
        res.check(f"resolution[{variant}]", rep.max_defect, ctx.cfg.tolerances.cross_check)
    return res


def task_density(ctx: TaskContext) -> TaskResult:
    spec, grid, tol = ctx.spec, ctx.grid, ctx.cfg.tolerances
    n_max = ctx.cfg.truncation
    res = TaskResult("density", ["z_re", "z_im", "poisson_sum", "husimi", "density_oracle", "abs_diff"])
    center_state = build_ncs(spec, n_max, ctx.center, tail_tol=tol.series_tail)
    rho = DensityMatrix.pure(center_state.amplitudes / center_state.norm())
    hus = husimi(spec, rho, grid)
    oracle = np.array(ctx.map(lambda p: probability_density(spec, p, ctx.center), grid))
    sums = np.array(ctx.map(lambda p: photon_distribution(spec, p).sum(), grid))
    for p, s, h, o in zip(grid, sums, hus, oracle):
        res.rows.append(_z(p) + [s, h, o, abs(h - o)])
    res.check("f_poisson_sum", float(np.max(np.abs(sums - 1.0))), tol.series_tail)
    res.check("husimi_vs_density", float(np.max(np.abs(hus - oracle))), tol.cross_check)
    res.check("husimi_range", float(max(0.0, -hus.min(), hus.max() - 1.0)), ALGEBRA_TOL)
    sub = grid[: min(len(grid), 5)]
    rep = rho_kernel_properties(spec, ctx.quad, rho, [(a, b) for a in sub for b in sub])
    res.check("rho_kernel_hermiticity", rep.herm_defect, ALGEBRA_TOL)
    res.require("rho_kernel_min_diag", rep.min_diag > 0, rep.min_diag, "must be > 0")
    res.check("rho_kernel_idempotence", rep.idem_defect, tol.idempotence)
    return res


def task_projector(ctx: TaskContext) -> TaskResult:
    spec = ctx.spec
    dim = min(ctx.cfg.truncation, 13)
    res = TaskResult("projector", ["n", "m", "defect"])
    worst = 0.0
    for n in range(dim):
        for m in range(dim):
            if n + m > 12:
                continue
            unit = np.zeros((dim, dim))
            unit[n, m] = 1.0
            d = float(np.max(np.abs(projector_reconstruct(spec, n, m, dim).entries - unit)))
            worst = max(worst, d)
            res.rows.append([n, m, d])
    res.check("matrix_units", worst, PROJECTOR_TOL)
    probs = 0.5 ** np.arange(7)
    table = np.diag(probs / probs.sum()).astype(complex)
    table[0, 1] = table[1, 0] = 0.05
    rho = glauber_sudarshan_rho(spec, table, tol=np.inf)
    res.check("two_route_equality", float(np.max(np.abs(rho.entries - table))), TWO_ROUTE_TOL)
    return res


def task_quantize(ctx: TaskContext) -> TaskResult:
    spec, tol = ctx.spec, ctx.cfg.tolerances
    res = TaskResult("quantize", ["z_re", "z_im", "A_z_re", "A_z_im", "AzbarAz", "Q_mean",
                                  "defect_A_z", "defect_AzbarAz", "defect_Q"])

    def one(p):
        dim = ctx.dimension(p)
        st = build_ncs(spec, dim, p, tail_tol=tol.series_tail)
        az = expectation(spec, quantize(spec, dim, "z"), st)
        n_op = expectation(spec, [quantize(spec, dim, "zbar"), quantize(spec, dim, "z")], st).real
        qm = expectation(spec, quantize(spec, dim, "Q"), st).real
        z = p.z[0]
        return _z(p) + [az.real, az.imag, n_op, qm, abs(az - z), abs(n_op - abs(z) ** 2),
                        abs(qm - math.sqrt(2) * z.real)]

    res.rows = ctx.map(one, ctx.grid)
    arr = np.array([r[-3:] for r in res.rows])
    for i, name in enumerate(("A_z_mean", "number_mean", "Q_mean")):
        res.check(name, float(arr[:, i].max()), tol.expectation)
    return res


def task_optics(ctx: TaskContext) -> TaskResult:
    spec, tol = ctx.spec, ctx.cfg.tolerances
    res = TaskResult("optics", ["abs_z2", "phi", "dQ2", "dP2", "G", "comm_im", "intelligent_defect",
                                "mandel_Q", "fano", "mandel_limit", "snr"])
    if ctx.cfg.grid.abs_z_squared is not None:
        params = [CoherentParameter.plain(math.sqrt(x)) for x in ctx.cfg.grid.abs_z_squared]
    else:
        params = ctx.grid

    def one(p):
        st = build_ncs(spec, ctx.dimension(p), p, tail_tol=tol.series_tail)
        d = dispersions(spec, st, tol.cross_check)
        mq = mandel(spec, st, tol.cross_check)
        z = p.z[0]
        return [abs(z) ** 2, math.atan2(z.imag, z.real), d.dQ2, d.dP2, d.G, d.comm_expect.imag,
                d.intelligent_defect(), mq.Q_mandel, mq.fano, int(mq.limit), snr(spec, st)]

    res.rows = ctx.map(one, params)
    res.check("intelligent_identity", max(r[6] for r in res.rows), tol.expectation)
    res.check("dispersion_equality", max(abs(r[2] - r[3]) for r in res.rows), ALGEBRA_TOL)
    return res


def task_su11(ctx: TaskContext) -> TaskResult:
    spec = ctx.spec
    dim = min(ctx.cfg.truncation, SU11_DIM, spec.n_max)
    res = TaskResult("su11", ["quantity", "value"])
    alg = su_f11(spec, spec, dim)
    xy = commutator(alg.X, alg.Y)
    interior = alg.interior
    xy_gap = float(np.max(np.abs(np.diag(xy)[interior] - 0.5j * alg.bracket_diagonal[interior])))
    contraction = float(np.max(np.abs(alg.Kminus.entries.conj().T - alg.Kplus.entries)))
    res.rows = [["comm_Kplus_Kminus", alg.comm_defects[0]], ["comm_K0_Kplus", alg.comm_defects[1]],
                ["XY_bracket_diagonal", xy_gap], ["contraction_gap", contraction]]
    res.check("comm_Kplus_Kminus", alg.comm_defects[0], SU11_TOL)
    res.check("comm_K0_Kplus", alg.comm_defects[1], SU11_TOL)
    res.check("XY_bracket_diagonal", xy_gap, SU11_TOL)
    if spec.is_identity:
        res.require("contraction", contraction == 0.0, contraction, "must vanish exactly")
    return res


def task_evolve(ctx: TaskContext) -> TaskResult:
    spec, tol = ctx.spec, ctx.cfg.tolerances
    omega = ctx.cfg.modes.omega[0]
    center = ctx.center.to_action_angle()
    res = TaskResult("evolve", ["t", "z_re", "z_im", "density", "inner_product_route", "discrepancy"])
    times = list(ctx.cfg.evolution.times)

    def one(item):
        t, p = item
        e = evolved_density(spec, p, center, t, omega, cross_tol=np.inf)
        return [t] + _z(p) + [e.value, e.inner_product_route, e.discrepancy]

    res.rows = ctx.map(one, [(t, p) for t in times for p in ctx.grid])
    res.check("two_routes", max(r[-1] for r in res.rows), tol.expectation)

    state = build_ncs(spec, ctx.dimension(center), center, tail_tol=tol.series_tail)
    drift = max(abs(evolve(spec, state, t, omega).norm() - state.norm()) for t in times)
    res.check("norm_preserved", drift, ALGEBRA_TOL)
    if spec.is_identity:
        period = 2 * math.pi / omega
        gap = max(abs(evolved_density(spec, p, center, period, omega).value
                      - evolved_density(spec, p, center, 0.0, omega).value) for p in ctx.grid)
        res.check("periodicity", gap, tol.expectation)
    return res


TASK_FUNCS = {
    "ops": task_ops,
    "spectrum": task_spectrum,
    "kernel": task_kernel,
    "resolve": task_resolve,
    "density": task_density,
    "projector": task_projector,
    "quantize": task_quantize,
    "optics": task_optics,
    "su11": task_su11,
    "evolve": task_evolve,
}


def run_task(name: str, ctx: TaskContext) -> TaskResult:
    try:
        return TASK_FUNCS[name](ctx)
    except FockForgeError as exc:
        res = TaskResult(name, ["error"])
        res.rows.append([f"{type(exc).__name__}: {exc}"])
        res.fail("completed", f"{type(exc).__name__}: {exc}")
        return res
