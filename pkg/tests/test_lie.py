import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm as pade

from conftest import random_local
from entgauge.errors import NonHermitianInput, NotBlockDiagonal
from entgauge.fockspace import GeneratorCombo, channel_swap, generator_fundamental
from entgauge.lie import (
    EulerParamsLO,
    ExpCurve,
    euler_product,
    euler_to_unitary,
    expm,
    is_block_diagonal,
    maurer_cartan,
    mck_closed_form,
    p0,
    unitary_to_euler,
)

J = generator_fundamental


def random_hermitian(rng, n=4):
    h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (h + h.conj().T) / 2


def test_expm_examples():
    np.testing.assert_allclose(expm(J("J_az"), 2 * np.pi), np.diag([-1, -1, 1, 1]), atol=1e-14)
    expected = np.eye(4, dtype=complex)
    expected[np.ix_([0, 2], [0, 2])] = [[0, 1j], [1j, 0]]
    np.testing.assert_allclose(expm(J("J_HHx"), np.pi), expected, atol=1e-14)
    np.testing.assert_allclose(expm(J("J_VVy"), 0.0), np.eye(4), atol=0)


def test_expm_matches_pade(rng):
    for n in (4, 10):
        for _ in range(5):
            h = random_hermitian(rng, n)
            s = rng.uniform(-3, 3)
            u = expm(h, s)
            np.testing.assert_allclose(u, pade(1j * s * h), atol=1e-12)
            np.testing.assert_allclose(u.conj().T @ u, np.eye(n), atol=1e-12)
            np.testing.assert_allclose(expm(h, -s), u.conj().T, atol=1e-12)


def test_expm_group_law(rng):
    h = random_hermitian(rng)
    np.testing.assert_allclose(expm(h, 0.3) @ expm(h, 1.1), expm(h, 1.4), atol=1e-12)


def test_expm_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        expm(np.array([[0, 1], [0, 0]]), 1.0)


def test_p0_examples():
    np.testing.assert_allclose(p0(0, 0), np.eye(4), atol=1e-15)
    np.testing.assert_allclose(p0(np.pi, np.pi), 1j * channel_swap(), atol=1e-15)
    np.testing.assert_allclose(p0(2 * np.pi, 2 * np.pi), -np.eye(4), atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.floats(-7, 7), st.floats(-7, 7))
def test_p0_is_product_of_exponentials(xh, xv):
    a = expm(J("J_HHx"), xh) @ expm(J("J_VVx"), xv)
    b = expm(J("J_VVx"), xv) @ expm(J("J_HHx"), xh)
    np.testing.assert_allclose(p0(xh, xv), a, atol=1e-13)
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_euler_examples():
    np.testing.assert_allclose(euler_to_unitary(EulerParamsLO()), np.eye(4), atol=1e-15)
    b = 0.7
    k = euler_to_unitary(EulerParamsLO(beta_a=b))
    np.testing.assert_allclose(
        k[:2, :2], [[np.cos(b / 2), np.sin(b / 2)], [-np.sin(b / 2), np.cos(b / 2)]], atol=1e-15
    )
    np.testing.assert_allclose(k[2:, 2:], np.eye(2), atol=1e-15)
    k = euler_to_unitary(EulerParamsLO(delta_a=1.2))
    np.testing.assert_allclose(k[:2, :2], np.exp(0.6j) * np.eye(2), atol=1e-15)


def test_euler_closed_form_matches_product(rng):
    for _ in range(20):
        p = EulerParamsLO.from_array(rng.uniform(0, 2 * np.pi, 8))
        np.testing.assert_allclose(euler_to_unitary(p), euler_product(p), atol=1e-13)


def test_euler_round_trip(rng):
    for _ in range(100):
        v = rng.uniform(0, 2 * np.pi, 8)
        v[[1, 5]] = rng.uniform(0.01, np.pi - 0.01, 2)
        p = EulerParamsLO.from_array(v)
        q = unitary_to_euler(euler_to_unitary(p))
        np.testing.assert_allclose(euler_to_unitary(q), euler_to_unitary(p), atol=1e-12)
        diff = np.angle(np.exp(1j * (q.as_array() - v)))
        # delta carries an e^{i delta/2}, so it is only fixed modulo 4 pi
        diff[[3, 7]] = 2 * np.angle(np.exp(0.5j * (q.as_array()[[3, 7]] - v[[3, 7]])))
        np.testing.assert_allclose(diff, 0, atol=1e-8)


def test_unitary_to_euler_examples():
    assert unitary_to_euler(np.eye(4)).as_array() == pytest.approx(np.zeros(8), abs=1e-15)
    phi = 0.9
    k = np.diag([np.exp(1j * phi)] * 2 + [1, 1])
    p = unitary_to_euler(k)
    assert p.delta_a == pytest.approx(2 * phi)
    rest = np.delete(p.as_array(), 3)
    np.testing.assert_allclose(rest, 0, atol=1e-12)


def test_unitary_to_euler_ranges(rng):
    for _ in range(50):
        p = unitary_to_euler(random_local(rng))
        for ch in "ab":
            a, b, g, d = p.channel(ch)
            assert 0 <= a < 2 * np.pi and 0 <= g < 2 * np.pi
            assert 0 <= b <= np.pi
            assert 0 <= d < 4 * np.pi


def test_unitary_to_euler_degenerate_beta():
    p = unitary_to_euler(euler_to_unitary(EulerParamsLO(alpha_a=0.4, gamma_a=0.3)))
    assert p.gamma_a == 0.0
    assert p.alpha_a == pytest.approx(0.7)


def test_unitary_to_euler_rejects_nonlocal():
    with pytest.raises(NotBlockDiagonal):
        unitary_to_euler(p0(np.pi / 2, 0))
    assert not is_block_diagonal(p0(np.pi, np.pi))


def test_maurer_cartan_sign():
    j = GeneratorCombo.of(Jay=0.5, Jby=0.5).fundamental()
    curve = ExpCurve(j)
    for s in (0.0, 0.8, 4.0):
        np.testing.assert_allclose(maurer_cartan(curve, s).matrix, -j, atol=1e-14)
        np.testing.assert_allclose(maurer_cartan(curve, s, "finite-difference").matrix, -j, atol=1e-8)


def test_maurer_cartan_of_p0():
    a, b = 0.6, -1.3

    def curve(s):
        return p0(s * a, s * b)

    theta = maurer_cartan(curve, 0.9, "finite-difference").matrix
    np.testing.assert_allclose(theta, -(a * J("J_HHx") + b * J("J_VVx")), atol=1e-8)


def test_maurer_cartan_constant_curve():
    g = p0(0.3, 0.4)
    theta = maurer_cartan(lambda s: g, 1.0, "finite-difference").matrix
    np.testing.assert_allclose(theta, 0, atol=1e-12)


def test_maurer_cartan_modes_agree(rng):
    h = random_hermitian(rng, 10)
    base = expm(random_hermitian(rng, 10), 1.0)
    curve = ExpCurve(h, base)
    a = maurer_cartan(curve, 0.4).matrix
    b = maurer_cartan(curve, 0.4, "finite-difference").matrix
    np.testing.assert_allclose(a, b, atol=1e-7)
    with pytest.raises(TypeError):
        maurer_cartan(lambda s: base, 0.0)


# The printed closed form omits the alpha_b companion term and any J_b0 term,
# so it is checked on the parameters it covers.
MCK_PARAMS = ["alpha_a", "beta_a", "gamma_a", "delta_a", "beta_b", "gamma_b"]


@pytest.mark.parametrize("name", MCK_PARAMS)
def test_mck_single_parameter(rng, name):
    v = rng.uniform(0.2, 2.5, 8)
    v[[4, 7]] = 0.0
    k = EulerParamsLO.names().index(name)
    e = np.zeros(8)
    e[k] = 1.0

    def curve(t):
        return euler_to_unitary(EulerParamsLO.from_array(v + t * e))

    theta = maurer_cartan(curve, 0.0, "finite-difference").matrix
    expected = mck_closed_form(EulerParamsLO.from_array(v), EulerParamsLO.from_array(e))
    np.testing.assert_allclose(theta, expected, atol=1e-8)


def test_euler_params_helpers():
    p = EulerParamsLO.from_array(np.arange(8.0))
    assert p.channel("b") == (4.0, 5.0, 6.0, 7.0)
    assert EulerParamsLO.names()[0] == "alpha_a"
    np.testing.assert_array_equal(p.as_array(), np.arange(8.0))
