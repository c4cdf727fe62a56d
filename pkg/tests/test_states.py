import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fockforge.deformation import DeformationSpec
from fockforge.errors import FormMismatch, OutsideDomain, TailTooHeavy
from fockforge.measure import quadrature_from_moments, reproducing_defect
from fockforge.states import (
    CoherentParameter,
    build_ncs,
    evolve,
    evolved_density,
    normalization,
    overlap_kernel,
    probability_density,
    required_dimension,
)

P = CoherentParameter.plain


def e_q(x, q, terms=400):
    """Independent oracle: sum x^n / [n]_q! with q-numbers from the closed form."""
    total, term = 0.0, 1.0
    for n in range(terms):
        total += term
        term *= x / ((1 - q ** (n + 1)) / (1 - q))
    return total


def gaussian_kernel(z, zp):
    return cmath.exp(zp.conjugate() * z - abs(z) ** 2 / 2 - abs(zp) ** 2 / 2)


def test_normalization_identity(identity):
    partial = sum(1 / math.factorial(k) for k in range(40))
    assert normalization(identity, P(1.0)) == pytest.approx(partial, rel=1e-12)
    assert normalization(identity, P(1.0)) == pytest.approx(2.718281828459045, rel=1e-15)
    assert normalization(identity, P(0.0)) == 1.0


@pytest.mark.parametrize("z", [0.3, 0.9j, 1.0, 0.8 - 0.8j])
def test_normalization_q_is_e_q(q_half, z):
    assert normalization(q_half, P(z)) == pytest.approx(e_q(abs(z) ** 2, 0.5), rel=1e-13)


def test_domain_policy(q_half):
    with pytest.raises(OutsideDomain):
        normalization(q_half, P(0.95 * math.sqrt(2)))
    normalization(q_half, P(0.9 * math.sqrt(2)))


def test_multimode_normalization_is_product(q_half, identity):
    p = P([0.4 + 0.1j, 1.2])
    assert normalization([q_half, identity], p) == pytest.approx(
        normalization(q_half, P(0.4 + 0.1j)) * math.exp(1.44), rel=1e-13)


def test_vacuum_state(q_half):
    s = build_ncs(q_half, 8, P(0))
    np.testing.assert_array_equal(s.amplitudes, np.eye(8)[0])


def test_identity_state_coefficients(identity):
    s = build_ncs(identity, 32, P(1.0))
    oracle = np.array([math.exp(-0.5) / math.sqrt(math.factorial(n)) for n in range(32)])
    np.testing.assert_allclose(s.amplitudes.real, oracle, rtol=1e-13, atol=1e-300)


def test_q_state_coefficients(q_half):
    s = build_ncs(q_half, 48, P(1.0))
    qfact = np.cumprod([1.0] + [(1 - 0.5 ** k) / 0.5 for k in range(1, 48)])
    oracle = 1 / np.sqrt(qfact * e_q(1.0, 0.5))
    np.testing.assert_allclose(s.amplitudes.real, oracle, rtol=1e-12)


def test_tail_too_heavy(identity):
    with pytest.raises(TailTooHeavy):
        build_ncs(identity, 8, P(2.0))


@given(st.floats(0, 0.9 * math.sqrt(2)), st.floats(-math.pi, math.pi))
def test_unit_norm_q(r, phi):
    spec = DeformationSpec.q_deformed(0.5, 256)
    p = P(cmath.rect(r, phi))
    s = build_ncs(spec, required_dimension(spec, p), p)
    assert abs(s.norm() - 1) < 1e-10


def test_kernel_examples(identity):
    assert overlap_kernel(identity, P(1.0), P(0.0)) == pytest.approx(math.exp(-0.5), rel=1e-15)
    assert abs(overlap_kernel(identity, P(1.0), P(0.0)) - 0.606531) < 1e-6


@given(st.complex_numbers(max_magnitude=2.5), st.complex_numbers(max_magnitude=2.5))
def test_kernel_matches_gaussian(z, zp):
    spec = DeformationSpec.identity(256)
    assert overlap_kernel(spec, P(z), P(zp)) == pytest.approx(gaussian_kernel(z, zp), rel=1e-12, abs=1e-15)


@given(st.complex_numbers(max_magnitude=1.27), st.complex_numbers(max_magnitude=1.27))
def test_kernel_properties_q(z, zp):
    spec = DeformationSpec.q_deformed(0.5, 256)
    k = overlap_kernel(spec, P(z), P(zp))
    assert abs(k - overlap_kernel(spec, P(zp), P(z)).conjugate()) <= 1e-12
    assert abs(overlap_kernel(spec, P(z), P(z)) - 1) <= 1e-12
    assert abs(k) <= 1 + 1e-12


def test_kernel_is_state_overlap(q_half):
    a, b = P(0.5 + 0.2j), P(-0.3 + 0.9j)
    sa, sb = build_ncs(q_half, 80, a), build_ncs(q_half, 80, b)
    assert overlap_kernel(q_half, a, b) == pytest.approx(sb.inner(sa), abs=1e-13)


def test_probability_density(identity):
    assert probability_density(identity, P(2.0), P(0.0)) == pytest.approx(math.exp(-4), rel=1e-14)
    assert abs(probability_density(identity, P(2.0), P(0.0)) - 0.0183156) < 1e-7
    assert probability_density(identity, P(0.3j), P(0.3j)) == 1.0


@pytest.mark.parametrize("name", ["identity", "q_half", "tabulated"])
def test_density_in_unit_interval(name, request):
    spec = request.getfixturevalue(name)
    L = spec.radius_primal
    R = 2.0 if L.unbounded else 0.9 * L.value
    grid = [P(cmath.rect(R * i / 4, 2 * math.pi * j / 6)) for i in range(5) for j in range(6)]
    vals = [probability_density(spec, a, b) for a in grid for b in grid]
    assert min(vals) >= 0 and max(vals) <= 1


def test_dual_equals_primal_for_identity(identity):
    a = build_ncs(identity, 40, P(1.1 - 0.4j), "primal")
    b = build_ncs(identity, 40, P(1.1 - 0.4j), "dual")
    np.testing.assert_array_equal(a.amplitudes, b.amplitudes)


def test_dual_state_q(q_half):
    # dual radius is unbounded for the q-case: {n}_d! grows like n!^2 / [n]_q!
    s = build_ncs(q_half, 40, P(2.5), "dual")
    assert abs(s.norm() - 1) < 1e-10


def test_action_angle_matches_plain_for_identity(identity):
    z = 0.7 * cmath.exp(0.4j)
    p = P(z)
    aa = p.to_action_angle()
    a = build_ncs(identity, 30, p)
    b = build_ncs(identity, 30, aa)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-15)


def test_evolve_trivial(q_half):
    s = build_ncs(q_half, 40, CoherentParameter.action_angle(0.8, 0.2))
    e = evolve(q_half, s, 0.0, 1.0)
    np.testing.assert_array_equal(e.amplitudes, s.amplitudes)
    e = evolve(q_half, s, 3.7, 1.3)
    assert abs(e.norm() - s.norm()) < 1e-12


def test_evolve_rejects_plain_general_f(q_half):
    with pytest.raises(FormMismatch):
        evolve(q_half, build_ncs(q_half, 40, P(0.5)), 1.0, 1.0)


def test_evolve_equals_gamma_shift(tabulated):
    aa = CoherentParameter.action_angle(0.9, -0.3)
    s = build_ncs(tabulated, 40, aa)
    moved = build_ncs(tabulated, 40, CoherentParameter.action_angle(0.9, -0.3 + 1.7 * 2.0))
    np.testing.assert_allclose(evolve(tabulated, s, 2.0, 1.7).amplitudes, moved.amplitudes, atol=1e-14)


def test_evolved_density_identity_period(identity):
    # oracle: amplitude n picks up exp(-i n t), so t = 2 pi returns the state
    probe, center = P(0.4 + 1.0j), P(1.2 - 0.1j)
    d0 = evolved_density(identity, probe, center, 0.0, 1.0).value
    d1 = evolved_density(identity, probe, center, 2 * math.pi, 1.0).value
    assert d0 == pytest.approx(probability_density(identity, probe, center), abs=1e-15)
    assert abs(d1 - d0) < 1e-10
    # and for f = 1 the density is the Gaussian |<z|z0 e^{-it}>|^2
    t = 0.77
    moved = center.z[0] * cmath.exp(-1j * t)
    oracle = abs(gaussian_kernel(probe.z[0], moved)) ** 2
    assert evolved_density(identity, probe, center, t, 1.0).value == pytest.approx(oracle, rel=1e-12)


@pytest.mark.parametrize("name", ["q_half", "tabulated"])
@pytest.mark.parametrize("t", [0.3, 1.0, 5.5])
def test_evolved_density_routes(name, t, request):
    spec = request.getfixturevalue(name)
    e = evolved_density(spec, P(0.3 - 0.2j), CoherentParameter.action_angle(0.6, 1.1), t, 0.8)
    assert e.discrepancy < 1e-10


def test_multimode_tensor_layout(q_half, identity):
    p = P([0.3, 0.5j])
    s = build_ncs([q_half, identity], 16, p)
    a = build_ncs(q_half, 16, P(0.3)).amplitudes
    b = build_ncs(identity, 16, P(0.5j)).amplitudes
    np.testing.assert_allclose(s.amplitudes, np.kron(a, b), atol=1e-16)


def test_reproducing_property(identity, q_half):
    for spec in (identity, q_half):
        quad = quadrature_from_moments(spec, 16)
        R = 2.0 if spec.radius_primal.unbounded else 0.9 * spec.radius_primal.value
        probes = [P(cmath.rect(R * i / 3, 1.0 * i)) for i in range(4)]
        for k in range(16):
            assert reproducing_defect(spec, quad, k, probes) < 1e-12
