import warnings

import numpy as np
import pytest
from scipy.linalg import cossin

from conftest import random_local, random_unitary
from entgauge.decompose import (
    Closing,
    PhaseLayer,
    TwoModeRotation,
    cartan_kpk,
    classify_closing,
    compile_one_param,
    cs_decompose,
    givens_factorize,
    is_local,
    recompose,
)
from entgauge.errors import DegenerateAngles
from entgauge.fockspace import LABELS, GeneratorCombo, channel_swap, lift
from entgauge.lie import euler_to_unitary, expm, is_block_diagonal, p0, unitary_to_euler


def quiet_cartan(g):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateAngles)
        return cartan_kpk(g)


def test_csd_reconstruction(rng):
    for _ in range(200):
        g = random_unitary(rng)
        f = cs_decompose(g)
        np.testing.assert_allclose(f.reconstruct(), g, atol=1e-12)
        assert np.all(f.D >= 0) and np.all(f.D <= np.pi / 2)
        for u in (f.U1, f.U2, f.V1, f.V2):
            np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-12)


def test_csd_angles_match_scipy(rng):
    for _ in range(20):
        g = random_unitary(rng)
        _, cs, _ = cossin(g, p=2, q=2)
        theta = np.arccos(np.clip(np.diag(cs)[:2].real, -1, 1))
        np.testing.assert_allclose(np.sort(cs_decompose(g).D), np.sort(theta), atol=1e-10)


def test_csd_phase_convention(rng):
    f = cs_decompose(random_unitary(rng))
    for k in range(2):
        first = f.U1[:, k][np.abs(f.U1[:, k]) > 1e-12][0]
        assert abs(first.imag) < 1e-14 and first.real > 0


def test_csd_is_deterministic(rng):
    g = random_unitary(rng)
    a, b = cs_decompose(g), cs_decompose(g.copy())
    np.testing.assert_array_equal(a.U1, b.U1)
    np.testing.assert_array_equal(a.D, b.D)


def test_csd_normal_form():
    f = cs_decompose(p0(1.0, 2.2))
    for u in (f.U1, f.U2, f.V1, f.V2):
        np.testing.assert_allclose(u, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(f.D, [0.5, 1.1], atol=1e-14)


def test_csd_local_input(rng):
    k = random_local(rng)
    f = cs_decompose(k)
    np.testing.assert_allclose(f.D, 0, atol=1e-12)
    np.testing.assert_allclose(f.reconstruct(), k, atol=1e-12)


def test_csd_degenerate_inputs():
    for g in (np.eye(4), p0(np.pi, np.pi), p0(np.pi / 2, np.pi / 2), channel_swap()):
        np.testing.assert_allclose(cs_decompose(g).reconstruct(), g, atol=1e-14)


def test_cartan_round_trip(rng):
    for _ in range(100):
        g = random_unitary(rng)
        c = quiet_cartan(g)
        np.testing.assert_allclose(c.reconstruct(), g, atol=1e-12)
        assert is_block_diagonal(c.kprime, 1e-12)
        assert 0 <= c.x_H / 2 <= np.pi / 2 and 0 <= c.x_V / 2 <= np.pi / 2
        assert c.kbar.gamma_b == 0.0 and c.kbar.delta_b == 0.0


def test_cartan_identity():
    with pytest.warns(DegenerateAngles):
        c = cartan_kpk(np.eye(4))
    assert c.x_H == 0 and c.x_V == 0
    np.testing.assert_allclose(c.kbar.as_array(), 0, atol=1e-15)
    np.testing.assert_allclose(c.kprime, np.eye(4), atol=1e-15)


def test_cartan_local_times_p0(rng):
    k = random_local(rng)
    g = p0(np.pi / 2, np.pi / 2) @ k
    with pytest.warns(DegenerateAngles):
        c = cartan_kpk(g)
    assert c.x_H == pytest.approx(np.pi / 2) and c.x_V == pytest.approx(np.pi / 2)
    np.testing.assert_allclose(c.reconstruct(), g, atol=1e-12)


def test_cartan_canonical_angles():
    c = quiet_cartan(p0(3 * np.pi / 2, 0))
    assert 0 <= c.x_H <= np.pi and 0 <= c.x_V <= np.pi
    np.testing.assert_allclose(c.reconstruct(), p0(3 * np.pi / 2, 0), atol=1e-12)


def test_cartan_kbar_is_euler_of_local(rng):
    c = quiet_cartan(random_unitary(rng))
    k = euler_to_unitary(c.kbar)
    np.testing.assert_allclose(euler_to_unitary(unitary_to_euler(k)), k, atol=1e-12)


def test_is_local():
    assert is_local(np.eye(4))
    assert not is_local(p0(np.pi, np.pi))
    assert is_local(euler_to_unitary(unitary_to_euler(np.diag([1j, 1, -1, 1]))))


def test_classify_examples(rng):
    assert classify_closing(random_local(rng)) is Closing.StrictlyLocal
    assert classify_closing(p0(np.pi, np.pi)) is Closing.SwapTimesLocal
    assert classify_closing(p0(np.pi / 2, np.pi / 2)) is Closing.NotClosing
    assert Closing.SwapTimesLocal.closes and not Closing.NotClosing.closes


def test_classify_agrees_with_subspace_test(rng):
    for k in range(1000):
        kind = k % 3
        if kind == 0:
            g = random_local(rng)
        elif kind == 1:
            g = channel_swap() @ random_local(rng)
        else:
            g = random_unitary(rng)
        big = lift(g)
        leak = np.linalg.norm(big[4:, :4])
        assert classify_closing(g).closes == (leak <= 1e-8)
        if kind < 2:
            assert classify_closing(g).closes


def test_givens_factorize(rng):
    for _ in range(30):
        v = random_unitary(rng)
        factors = givens_factorize(v)
        rotations = [f for f in factors if isinstance(f, TwoModeRotation)]
        assert len(rotations) <= 6
        assert isinstance(factors[-1], PhaseLayer)
        np.testing.assert_allclose(recompose(factors), v, atol=1e-12)


def test_givens_identity():
    np.testing.assert_allclose(recompose(givens_factorize(np.eye(4))), np.eye(4), atol=1e-15)


def test_compile_jaz():
    c = compile_one_param(GeneratorCombo.of(Jaz=1.0))
    np.testing.assert_allclose(c.V, np.eye(4), atol=1e-15)
    np.testing.assert_allclose(c.c, [0.5, -0.5, 0, 0], atol=1e-15)


def test_compile_mixing_generator():
    j = GeneratorCombo.of(JHHx=0.5, JVVx=0.5)
    c = compile_one_param(j)
    # eigenvalues of (J_HHx + J_VVx)/2
    np.testing.assert_allclose(np.sort(c.c), [-0.25, -0.25, 0.25, 0.25], atol=1e-15)
    assert np.allclose(np.abs(c.V) ** 2 * 2, np.round(np.abs(c.V) ** 2 * 2))
    # rows only couple aH with bH and aV with bV
    for row in c.V:
        support = set(np.flatnonzero(np.abs(row) > 1e-12))
        assert support in ({0, 2}, {1, 3})


@pytest.mark.parametrize("label", LABELS)
def test_compile_each_label(label):
    j = GeneratorCombo({label: 1.0})
    c = compile_one_param(j)
    for s in (0.1, 1.0, np.pi, 10.0):
        np.testing.assert_allclose(c.evaluate(s), expm(j.fundamental(), s), atol=1e-12)
    np.testing.assert_allclose(recompose(c.factorization), c.V, atol=1e-12)


def test_compile_random_combo(rng):
    j = GeneratorCombo({label: rng.normal() for label in LABELS})
    c = compile_one_param(j)
    for s in rng.uniform(-5, 5, 20):
        np.testing.assert_allclose(c.V.conj().T @ c.phase_shift(s) @ c.V, expm(j.fundamental(), s), atol=1e-12)
