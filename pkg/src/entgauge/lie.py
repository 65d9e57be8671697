"""Matrix-group numerics on U(4) and its two-photon image."""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields
from typing import Callable

import numpy as np

from .errors import NonHermitianInput, NotBlockDiagonal
from .fockspace import GeneratorLabel as L
from .fockspace import generator_fundamental

TWO_PI = 2 * np.pi
FOUR_PI = 4 * np.pi


def check_hermitian(h: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {h.shape}")
    err = np.linalg.norm(h - h.conj().T)
    if err > tol:
        raise NonHermitianInput(f"matrix is not Hermitian: |H - H^+|_F = {err:.3e}")
    return h


def expm(h: np.ndarray, s: float = 1.0) -> np.ndarray:
    """exp(i s H) for Hermitian H, via the Hermitian eigendecomposition."""
    h = check_hermitian(h)
    if s == 0:
        return np.eye(h.shape[0], dtype=complex)
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(1j * s * w)) @ v.conj().T


def p0(x_h: float, x_v: float) -> np.ndarray:
    """exp(i x_H J_HHx) exp(i x_V J_VVx).

    Closed form: rotates (aH, bH) by x_H/2 and (aV, bV) by x_V/2.
    """
    ch, sh = np.cos(x_h / 2), np.sin(x_h / 2)
    cv, sv = np.cos(x_v / 2), np.sin(x_v / 2)
    c = np.diag([ch, cv]).astype(complex)
    s = 1j * np.diag([sh, sv])
    return np.block([[c, s], [s, c]])


@dataclass(frozen=True)
class EulerParamsLO:
    """Euler angles of a local operation, applied in the order
    exp(i alpha Jz) exp(i beta Jy) exp(i gamma Jz) exp(i delta J0) per channel.
    """

    alpha_a: float = 0.0
    beta_a: float = 0.0
    gamma_a: float = 0.0
    delta_a: float = 0.0
    alpha_b: float = 0.0
    beta_b: float = 0.0
    gamma_b: float = 0.0
    delta_b: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self))

    @classmethod
    def from_array(cls, values) -> "EulerParamsLO":
        return cls(*(float(v) for v in values))

    @classmethod
    def names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def channel(self, which: str) -> tuple[float, float, float, float]:
        return tuple(getattr(self, f"{p}_{which}") for p in ("alpha", "beta", "gamma", "delta"))


_CHANNEL_LABELS = {
    "a": (L.Jaz, L.Jay, L.Jaz, L.Ja0),
    "b": (L.Jbz, L.Jby, L.Jbz, L.Jb0),
}


def _block(alpha, beta, gamma, delta) -> np.ndarray:
    # closed form of the single-channel Euler product, as a 2x2 matrix
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    rot = np.array(
        [
            [np.exp(0.5j * (alpha + gamma)) * c, np.exp(0.5j * (alpha - gamma)) * s],
            [-np.exp(-0.5j * (alpha - gamma)) * s, np.exp(-0.5j * (alpha + gamma)) * c],
        ]
    )
    return np.exp(0.5j * delta) * rot


def euler_to_unitary(p: EulerParamsLO) -> np.ndarray:
    """Block-diagonal unitary of the eight-factor Euler product."""
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = _block(*p.channel("a"))
    out[2:, 2:] = _block(*p.channel("b"))
    return out


def euler_product(p: EulerParamsLO) -> np.ndarray:
    """Same as :func:`euler_to_unitary` but literally multiplying the eight
    exponentials; kept as a slow reference."""
    out = np.eye(4, dtype=complex)
    for ch in ("a", "b"):
        for label, angle in zip(_CHANNEL_LABELS[ch], p.channel(ch)):
            out = out @ expm(generator_fundamental(label), angle)
    return out


def _block_to_euler(u: np.ndarray, tol: float) -> tuple[float, float, float, float]:
    det = np.linalg.det(u)
    delta = np.angle(det) % TWO_PI
    r = u * np.exp(-0.5j * delta)
    c = min(abs(r[0, 0]), 1.0)
    s = min(abs(r[0, 1]), 1.0)
    beta = 2 * np.arctan2(s, c)
    p = np.angle(r[0, 0])
    q = np.angle(r[0, 1])
    if s < tol:
        alpha, gamma = 2 * p, 0.0
    elif c < tol:
        alpha, gamma = 2 * q, 0.0
    else:
        alpha, gamma = p + q, p - q
    # R(alpha) and R(gamma) are 4pi periodic; a 2pi shift of either flips the
    # sign of the SU(2) part, which is compensated by delta + 2pi.
    flips = 0
    alpha %= FOUR_PI
    gamma %= FOUR_PI
    if alpha >= TWO_PI:
        alpha -= TWO_PI
        flips += 1
    if gamma >= TWO_PI:
        gamma -= TWO_PI
        flips += 1
    if flips % 2:
        delta += TWO_PI
    return float(alpha), float(beta), float(gamma), float(delta)


def is_block_diagonal(k: np.ndarray, tol: float = 1e-8) -> bool:
    k = np.asarray(k)
    return np.linalg.norm(k[:2, 2:]) <= tol and np.linalg.norm(k[2:, :2]) <= tol


def unitary_to_euler(k: np.ndarray, tol: float = 1e-8) -> EulerParamsLO:
    """Euler angles of a block-diagonal unitary.

    Ranges: alpha, gamma in [0, 2pi), beta in [0, pi], delta in [0, 4pi).
    delta needs the doubled range because the other angles only cover SU(2)
    up to sign. At beta in {0, pi} gamma is set to 0.
    """
    k = np.asarray(k, dtype=complex)
    if not is_block_diagonal(k, tol):
        raise NotBlockDiagonal(
            "off-diagonal blocks have norms "
            f"{np.linalg.norm(k[:2, 2:]):.3e}, {np.linalg.norm(k[2:, :2]):.3e}"
        )
    a = _block_to_euler(k[:2, :2], 1e-12)
    b = _block_to_euler(k[2:, 2:], 1e-12)
    return EulerParamsLO(*a, *b)


def mck_closed_form(p: EulerParamsLO, dp: EulerParamsLO) -> np.ndarray:
    """Maurer-Cartan form i K^+ dK of the Euler product in the gauge
    alpha_b = delta_b = 0, as the explicit sum over generators.

    ``dp`` holds the differentials. No Jb0 term and no cos(beta_b) d alpha_b
    Jz term appear; the expression is only exact when d alpha_b = d delta_b = 0.
    """
    J = generator_fundamental
    ba, ga = p.beta_a, p.gamma_a
    bb, gb = p.beta_b, p.gamma_b
    return -(
        (np.cos(ba) * dp.alpha_a + dp.gamma_a) * J(L.Jaz)
        + dp.gamma_b * J(L.Jbz)
        + (np.cos(ga) * np.sin(ba) * dp.alpha_a - np.sin(ga) * dp.beta_a) * J(L.Jax)
        + (np.cos(gb) * np.sin(bb) * dp.alpha_b - np.sin(gb) * dp.beta_b) * J(L.Jbx)
        + (np.sin(ga) * np.sin(ba) * dp.alpha_a + np.cos(ga) * dp.beta_a) * J(L.Jay)
        + (np.sin(gb) * np.sin(bb) * dp.alpha_b + np.cos(gb) * dp.beta_b) * J(L.Jby)
        + dp.delta_a * J(L.Ja0)
    )


class ExpCurve:
    """s -> exp(i (s - s0) J) @ base, a curve with a known derivative."""

    def __init__(self, generator: np.ndarray, base: np.ndarray | None = None, s0: float = 0.0):
        self.generator = check_hermitian(generator)
        n = self.generator.shape[0]
        self.base = np.eye(n, dtype=complex) if base is None else np.asarray(base, dtype=complex)
        self.s0 = s0

    def __call__(self, s: float) -> np.ndarray:
        return expm(self.generator, s - self.s0) @ self.base

    def derivative(self, s: float) -> np.ndarray:
        return 1j * self.generator @ self(s)


@dataclass(frozen=True, eq=False)
class MaurerCartanSample:
    """Hermitian matrix i G^+ dG/ds at pseudotime ``s``."""

    matrix: np.ndarray
    s: float


def maurer_cartan(
    curve: Callable[[float], np.ndarray],
    s: float,
    mode: str = "analytic",
    h: float | None = None,
) -> MaurerCartanSample:
    """Sample the Maurer-Cartan form of a unitary curve.

    ``analytic`` needs ``curve.derivative``; ``finite-difference`` uses a
    central difference with step ``h`` (default 1e-6 * max(1, |s|)).
    """
    g = np.asarray(curve(s), dtype=complex)
    if mode == "analytic":
        deriv = getattr(curve, "derivative", None)
        if deriv is None:
            raise TypeError("analytic mode needs a curve with a derivative() method")
        dg = np.asarray(deriv(s), dtype=complex)
    elif mode in ("finite-difference", "fd"):
        if h is None:
            h = 1e-6 * max(1.0, abs(s))
        dg = (np.asarray(curve(s + h)) - np.asarray(curve(s - h))) / (2 * h)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    theta = 1j * g.conj().T @ dg
    return MaurerCartanSample(0.5 * (theta + theta.conj().T), s)
