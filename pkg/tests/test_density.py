import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from fockforge.deformation import DeformationSpec
from fockforge.density import (
    DensityMatrix,
    PFunction,
    glauber_sudarshan_rho,
    husimi,
    multimode_blocks,
    p_to_rho,
    photon_distribution,
    projector_reconstruct,
    rho_kernel_properties,
)
from fockforge.errors import (
    BlockCountMismatch,
    CapExceeded,
    DimensionMismatch,
    InvalidDensity,
    SeriesNotConverged,
    UnnormalizedP,
)
from fockforge.fock_ops import ModeParams
from fockforge.measure import quadrature_from_moments
from fockforge.states import CoherentParameter, build_ncs

P = CoherentParameter.plain


@pytest.mark.parametrize("bad, msg", [
    (np.array([[0.5, 0.1], [0.2, 0.5]]), "Hermitian"),
    (np.diag([0.5, 0.4]), "trace"),
    (np.diag([1.2, -0.2]), "negative"),
])
def test_invalid_density(bad, msg):
    with pytest.raises(InvalidDensity, match=msg):
        DensityMatrix(bad)


def test_pure_and_diagonal():
    v = np.array([0.6, 0.8j])
    r = DensityMatrix.pure(v)
    np.testing.assert_allclose(r.entries @ r.entries, r.entries, atol=1e-15)
    assert DensityMatrix.diagonal([0.5, 0.3, 0.2]).dim == 3


@pytest.mark.parametrize("x", [0.0, 0.3, 2.5])
def test_photon_distribution_poisson(identity, x):
    dist = photon_distribution(identity, P(math.sqrt(x)), 30)
    np.testing.assert_allclose(dist, stats.poisson.pmf(np.arange(30), x), rtol=1e-12, atol=1e-300)


def test_photon_distribution_q(q_half):
    dist = photon_distribution(q_half, P(1.0))
    assert dist.sum() == pytest.approx(1.0, abs=1e-14)
    s = build_ncs(q_half, 60, P(1.0))
    np.testing.assert_allclose(dist[:60], np.abs(s.amplitudes) ** 2, atol=1e-15)


@pytest.mark.parametrize("name", ["identity", "q_half"])
@pytest.mark.parametrize("i", [0, 5, 10])
def test_single_node_gives_f_poisson(name, i, request):
    spec = request.getfixturevalue(name)
    quad = quadrature_from_moments(spec, 12)
    rho = p_to_rho(spec, quad, PFunction.single_node(quad, i), "without_N", 160)
    expected = photon_distribution(spec, P(quad.nodes[i]), 160)
    np.testing.assert_allclose(np.diag(rho.entries).real, expected, atol=1e-13)
    assert np.count_nonzero(rho.entries - np.diag(np.diag(rho.entries))) == 0


def test_with_n_convention(q_half):
    quad = quadrature_from_moments(q_half, 12)
    i = 7
    N = sum(1.0 * quad.u[i] ** n / q_half.factorials[n] for n in range(200))
    v = np.zeros(12)
    v[i] = 1 / (2 * np.pi * quad.weights[i] * N)
    rho = p_to_rho(q_half, quad, PFunction.sampled(v), "with_N", 40)
    expected = photon_distribution(q_half, P(quad.nodes[i]), 40)
    np.testing.assert_allclose(np.diag(rho.entries).real, expected, atol=1e-13)
    with pytest.raises(UnnormalizedP):
        p_to_rho(q_half, quad, PFunction.sampled(v), "without_N", 40)


def test_unnormalized_p(identity):
    quad = quadrature_from_moments(identity, 8)
    with pytest.raises(UnnormalizedP):
        p_to_rho(identity, quad, PFunction.analytic_radial(lambda u: 2.0), "without_N", 20)


def test_angular_p_matches_direct_integral(identity):
    # oracle: (1/2pi) int dtheta (1 + cos theta) |eta><eta| by brute-force theta sampling
    quad = quadrature_from_moments(identity, 8)
    i, n_ang, dim = 3, 16, 48
    theta = 2 * np.pi * np.arange(n_ang) / n_ang
    vals = np.zeros((8, n_ang))
    vals[i] = (1 + np.cos(theta)) / (2 * np.pi * quad.weights[i])
    rho = p_to_rho(identity, quad, PFunction.sampled(vals), "without_N", dim)
    oracle = np.zeros((dim, dim), dtype=complex)
    for th in np.linspace(0, 2 * np.pi, 400, endpoint=False):
        v = build_ncs(identity, dim, P(cmath.rect(quad.nodes[i], th)), tail_tol=np.inf).amplitudes
        oracle += (1 + math.cos(th)) * np.outer(v, v.conj()) / 400
    np.testing.assert_allclose(rho.entries, oracle, atol=1e-12)


def test_husimi_of_vacuum(q_half):
    rho = DensityMatrix.diagonal(np.eye(30)[0])
    zs = [P(0.0), P(0.5j), P(1.1)]
    vals = husimi(q_half, rho, zs)
    N = [sum(abs(p.z[0]) ** (2 * n) / q_half.factorials[n] for n in range(200)) for p in zs]
    np.testing.assert_allclose(vals, 1 / np.array(N), rtol=1e-12)


@given(st.complex_numbers(max_magnitude=1.27))
def test_husimi_bounded(z):
    spec = DeformationSpec.q_deformed(0.5, 256)
    rho = DensityMatrix.pure(build_ncs(spec, 60, P(0.4 - 0.3j)).amplitudes)
    h = husimi(spec, rho, [P(z)])[0]
    assert -1e-14 <= h <= 1 + 1e-12


@pytest.mark.parametrize("n, m", [(0, 0), (2, 1), (3, 7), (6, 6), (0, 12)])
@pytest.mark.parametrize("name", ["identity", "q_half", "tabulated"])
def test_projector_is_matrix_unit(name, n, m, request):
    spec = request.getfixturevalue(name)
    E = projector_reconstruct(spec, n, m, 16).entries
    unit = np.zeros((16, 16))
    unit[n, m] = 1
    np.testing.assert_allclose(E, unit, atol=1e-12)


def test_projector_caps(q_half):
    with pytest.raises(CapExceeded):
        projector_reconstruct(q_half, 7, 6, 16)
    with pytest.raises(DimensionMismatch):
        projector_reconstruct(q_half, 9, 0, 8)


def test_glauber_sudarshan_two_routes(q_half):
    v = np.array([0.6, 0.0, 0.48j, 0.64])
    table = np.outer(v, v.conj())
    rho = glauber_sudarshan_rho(q_half, table)
    np.testing.assert_allclose(rho.entries, table, atol=1e-12)


@pytest.mark.parametrize("name", ["identity", "q_half"])
def test_rho_kernel_pure_state(name, request):
    spec = request.getfixturevalue(name)
    quad = quadrature_from_moments(spec, 16)
    z0 = P(0.5 + 0.3j)
    rho = DensityMatrix.pure(build_ncs(spec, 32, z0).amplitudes)
    pairs = [(P(0.2), P(-0.4j)), (P(0.7 + 0.1j), P(1.0))]
    rep = rho_kernel_properties(spec, quad, rho, pairs)
    assert rep.herm_defect < 1e-13
    assert rep.min_diag >= 0
    assert rep.idem_defect < 1e-8


def test_rho_kernel_mixture_idempotence_value(identity):
    # for a mixture the kernel square is <eta|rho^2|eta'>, not <eta|rho|eta'>
    quad = quadrature_from_moments(identity, 24)
    rho = DensityMatrix.diagonal([0.5, 0.3, 0.2])
    a, b = P(0.0), P(0.0)
    rep = rho_kernel_properties(identity, quad, rho, [(a, b)])
    assert rep.idem_defect == pytest.approx(abs(0.25 - 0.5), abs=1e-12)


def test_multimode_blocks(identity):
    mp_ = ModeParams(2.0, eps=(0.4,), g=(0.3,), k_config=(0,))
    blocks = [DensityMatrix.diagonal([1.0, 0.0]), DensityMatrix.diagonal([0.5, 0.5])]
    rep = multimode_blocks(identity, [mp_], blocks, [0.25, 0.75], probes=[P(0.1)])
    assert rep.configs == [(0,), (1,)]
    np.testing.assert_allclose(rep.energy_shifts, [0.0, 0.4 - 0.09 / 2.0])
    assert rep.global_trace == pytest.approx(1.0)
    assert np.trace(rep.rho_hat).real == pytest.approx(1.0)
    assert rep.rho_hat.shape == (4, 4)
    with pytest.raises(BlockCountMismatch):
        multimode_blocks(identity, [mp_], blocks[:1], [1.0])
    with pytest.raises(InvalidDensity):
        multimode_blocks(identity, [mp_], blocks, [0.5, 0.6])


def test_weight_on_divergent_node_is_rejected(q_half):
    # the top Gauss node of the q-rule sits on the boundary u = L^2, where N(u) diverges
    quad = quadrature_from_moments(q_half, 12)
    with pytest.raises(SeriesNotConverged):
        p_to_rho(q_half, quad, PFunction.single_node(quad, 11), "without_N", 40)
