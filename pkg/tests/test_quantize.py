import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fockforge.deformation import DeformationSpec
from fockforge.errors import DimensionMismatch, DivisionDegenerate, FormMismatch
from fockforge.fock_ops import commutator, ladder_matrices
from fockforge.quantize import (
    anti_normal_series,
    dispersions,
    expectation,
    mandel,
    quantize,
    snr,
    su_f11,
)
from fockforge.states import CoherentParameter, build_ncs, required_dimension

P = CoherentParameter.plain


def state(spec, z, variant="primal"):
    p = P(z)
    return build_ncs(spec, max(8, required_dimension(spec, p, variant)), p, variant)


def test_symbol_matrices(tabulated):
    n = 10
    f = tabulated.f
    z = quantize(tabulated, n, "z").entries
    for k in range(1, n):
        assert z[k - 1, k] == pytest.approx(math.sqrt(k) * f[k])
    assert np.count_nonzero(z) == n - 1
    zz = quantize(tabulated, n, "zsq_abs").entries
    np.testing.assert_allclose(np.diag(zz), [(k + 1) * f[k + 1] ** 2 for k in range(n)])
    z2 = quantize(tabulated, n, "z2").entries
    np.testing.assert_allclose(z2, z @ z, atol=1e-14)
    np.testing.assert_allclose(quantize(tabulated, n, "zbar").entries, z.conj().T)
    np.testing.assert_allclose(quantize(tabulated, n, "zbar2").entries, z2.conj().T)


def test_symbol_matrices_dual(tabulated):
    z = quantize(tabulated, 8, "z", "dual").entries
    for k in range(1, 8):
        assert z[k - 1, k] == pytest.approx(math.sqrt(k) / tabulated.f[k])


def test_z_is_deformed_lowering(q_half):
    L = ladder_matrices(q_half, 12)
    np.testing.assert_allclose(quantize(q_half, 12, "z").entries, L.A.entries, atol=1e-15)


@pytest.mark.parametrize("sym", ["Q", "P", "zsq_abs"])
def test_hermitian(q_half, sym):
    M = quantize(q_half, 12, sym).entries
    np.testing.assert_allclose(M, M.conj().T, atol=1e-15)


def test_quantize_errors(q_half):
    with pytest.raises(ValueError):
        quantize(q_half, 8, "w")
    with pytest.raises(DimensionMismatch):
        quantize(q_half, 3, "Q")


def test_identity_oscillator(identity):
    s = build_ncs(identity, 60, P(0.8 + 0.6j))
    d = dispersions(identity, s)
    assert d.dQ2 == pytest.approx(0.5, abs=1e-12)
    assert d.comm_expect == pytest.approx(1j, abs=1e-12)
    assert d.intelligent_defect() < 1e-12
    assert abs(mandel(identity, s).Q_mandel) < 1e-12
    assert expectation(identity, quantize(identity, s.n_max, "z"), s) == pytest.approx(0.8 + 0.6j, abs=1e-12)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("x", [0.1, 0.5, 1.0])
def test_q_closed_forms(q, x):
    # oracles: Mandel Q = -(1-q)|z|^2 and dQ^2 = (1 - (1-q)|z|^2)/2 for [n]_q
    spec = DeformationSpec.q_deformed(q, 256)
    if x >= 0.81 / (1 - q):
        pytest.skip("outside the domain policy")
    s = state(spec, cmath.rect(math.sqrt(x), 0.7))
    assert mandel(spec, s).Q_mandel == pytest.approx(-(1 - q) * x, abs=1e-12)
    d = dispersions(spec, s)
    assert d.dQ2 == pytest.approx((1 - (1 - q) * x) / 2, abs=1e-12)
    assert d.dP2 == d.dQ2
    assert d.intelligent_defect() < 1e-12


def test_mandel_reference_value(q_half):
    assert mandel(q_half, state(q_half, 1.0)).Q_mandel == pytest.approx(-0.5, abs=1e-12)


def test_mandel_vacuum_limit(q_half, tabulated):
    r = mandel(q_half, state(q_half, 0.0))
    assert r.limit and r.Q_mandel == 0.0
    r = mandel(tabulated, state(tabulated, 0.0))
    assert r.Q_mandel == pytest.approx(tabulated.f[1] ** 2 - 1)


@given(st.floats(0.01, 1.6), st.floats(-math.pi, math.pi))
def test_mandel_two_routes(x, phi):
    spec = DeformationSpec.q_deformed(0.5, 256)
    s = state(spec, cmath.rect(math.sqrt(x), phi))
    r = mandel(spec, s)
    assert abs(r.Q_mandel - r.matrix_Q) < 1e-8
    assert r.fano == pytest.approx(r.Q_mandel + 1)


def test_anti_normal_is_expectation_of_product(tabulated):
    s = build_ncs(tabulated, 60, P(0.5 - 0.2j))
    n = s.n_max
    z, zb = quantize(tabulated, n + 2, "z").entries, quantize(tabulated, n + 2, "zbar").entries
    # products need room above the state support
    v = np.concatenate([s.amplitudes, [0, 0]])
    val = np.vdot(v, z @ zb @ v).real
    assert anti_normal_series(tabulated, 0.29) == pytest.approx(val, rel=1e-10)


def test_form_mismatch(q_half):
    s = build_ncs(q_half, 40, CoherentParameter.action_angle(0.5, 0.1))
    with pytest.raises(FormMismatch):
        mandel(q_half, s)


def test_snr(identity, q_half):
    z = cmath.rect(0.9, 0.4)
    assert snr(identity, state(identity, z)) == pytest.approx(4 * 0.81 * math.cos(0.4) ** 2, rel=1e-12)
    x = 0.81
    assert snr(q_half, state(q_half, z)) == pytest.approx(
        2 * x * math.cos(0.4) ** 2 / ((1 - 0.5 * x) / 2), rel=1e-10)


def test_snr_degenerate():
    # at z = 0, dQ^2 = f(1)^2 / 2
    spec = DeformationSpec.tabulated([1e-8] + [1.0] * 63)
    with pytest.raises(DivisionDegenerate):
        snr(spec, state(spec, 0.0))


@pytest.mark.parametrize("pair", [("identity", "identity"), ("q_half", "q_half"), ("q_half", "tabulated")])
def test_su11_algebra(pair, request):
    sl, sk = (request.getfixturevalue(p) for p in pair)
    alg = su_f11(sl, sk, 10)
    assert max(alg.comm_defects) < 1e-12
    # [X, Y] = (i/2) [K-, K-^dag] and the latter is diagonal with the bracket entries
    Km = alg.Kminus.entries
    br = commutator(Km, Km.conj().T)
    inner = alg.interior
    np.testing.assert_allclose(np.diag(br)[inner], alg.bracket_diagonal[inner], atol=1e-12)
    xy = commutator(alg.X, alg.Y)
    np.testing.assert_allclose(np.diag(xy)[inner], 0.5j * alg.bracket_diagonal[inner], atol=1e-12)


def test_su11_identity_bracket(identity):
    alg = su_f11(identity, identity, 6)
    n = np.arange(6)
    nl, nk = np.meshgrid(n, n, indexing="ij")
    np.testing.assert_allclose(alg.bracket_diagonal, (nl + nk + 1).ravel())


def test_su11_squeezing_vacuum(identity):
    alg = su_f11(identity, identity, 6)
    vac = np.zeros(36)
    vac[0] = 1
    # vacuum: (dX)^2 = 1/4 equals the bound, so neither quadrature is squeezed
    assert alg.squeezing(vac) == {"X": False, "Y": False}
