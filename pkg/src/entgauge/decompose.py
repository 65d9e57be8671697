"""Local/nonlocal factorization of U(4) elements.

Any G in U(4) is written as ``Kbar @ p0(x_H, x_V) @ Kprime`` with Kbar and
Kprime block diagonal. The construction runs through a 2+2 cosine-sine
decomposition

    G = blockdiag(U1, U2) @ [[C, iS], [iS, C]] @ blockdiag(V1, V2)^+

whose middle factor is exactly ``p0(2 d_1, 2 d_2)``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DegenerateAngles
from .fockspace import GeneratorCombo, channel_swap, check_unitary
from .lie import EulerParamsLO, check_hermitian, euler_to_unitary, expm, p0, unitary_to_euler

# singular values closer than this are treated as one degenerate pair
DEGENERACY_TOL = 1e-12
# columns with norm below this carry no direction information
NULL_TOL = 1e-13


def _blockdiag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = a
    out[2:, 2:] = b
    return out


def _polar_unitary(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def _orthonormalize(cols: np.ndarray, keep: list[int]) -> np.ndarray:
    """Gram-Schmidt the columns listed in ``keep`` (in that order), then fill
    the remaining columns from the canonical basis."""
    n = cols.shape[0]
    out = np.zeros_like(cols, dtype=complex)
    chosen = []
    for k in keep:
        v = cols[:, k].astype(complex)
        for w in chosen:
            v = v - (w.conj() @ v) * w
        v = v / np.linalg.norm(v)
        out[:, k] = v
        chosen.append(v)
    missing = [k for k in range(cols.shape[1]) if k not in keep]
    for k in missing:
        best = None
        for e in np.eye(n, dtype=complex):
            v = e.copy()
            for w in chosen:
                v = v - (w.conj() @ v) * w
            if best is None or np.linalg.norm(v) > np.linalg.norm(best) + 1e-12:
                best = v
        v = best / np.linalg.norm(best)
        out[:, k] = v
        chosen.append(v)
    return out


def _first_nonzero_phase(v: np.ndarray, tol: float = 1e-12) -> complex:
    for x in v:
        if abs(x) > tol:
            return x / abs(x)
    return 1.0


@dataclass(frozen=True, eq=False)
class CSDFactors:
    U1: np.ndarray
    U2: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    D: np.ndarray

    def middle(self) -> np.ndarray:
        return p0(2 * self.D[0], 2 * self.D[1])

    def left(self) -> np.ndarray:
        return _blockdiag(self.U1, self.U2)

    def right(self) -> np.ndarray:
        """blockdiag(V1, V2)^+, the rightmost factor."""
        return _blockdiag(self.V1, self.V2).conj().T

    def reconstruct(self) -> np.ndarray:
        return self.left() @ self.middle() @ self.right()


def cs_decompose(g: np.ndarray) -> CSDFactors:
    """2+2 cosine-sine decomposition with a fixed phase convention.

    Conventions: D in [0, pi/2]; singular pairs are ordered so that
    |U1[0,0]| >= |U1[0,1]| (inputs already in normal form return identity
    factors); each column of U1 has its first nonzero entry real positive.
    Degenerate pairs use U1 = I.
    """
    g = check_unitary(g)
    g11, g12 = g[:2, :2], g[:2, 2:]
    g21, g22 = g[2:, :2], g[2:, 2:]

    u1, c, v1h = np.linalg.svd(g11)
    v1 = v1h.conj().T
    if abs(c[0] - c[1]) < DEGENERACY_TOL:
        u1 = np.eye(2, dtype=complex)
        if c[0] > NULL_TOL:
            v1 = _polar_unitary(g11).conj().T
        else:
            # G11 = 0 leaves U1 free; g21 = i U2 V1^+ and we pick U2 = I
            v1 = _polar_unitary(-1j * g21).conj().T
        c = np.array([c.mean(), c.mean()])
    elif abs(u1[0, 1]) > abs(u1[0, 0]):
        u1, v1, c = u1[:, ::-1], v1[:, ::-1], c[::-1]

    # U2 S = -i G21 V1; orthonormalize in order of decreasing sine
    q = -1j * g21 @ v1
    s = np.linalg.norm(q, axis=0)
    order = [int(k) for k in np.argsort(-s, kind="stable") if s[k] > NULL_TOL]
    u2 = _orthonormalize(q, order)
    s = np.real(np.einsum("ij,ij->j", u2.conj(), q))
    s = np.clip(s, 0.0, None)
    c = np.clip(c, 0.0, None)
    d = np.arctan2(s, c)

    # rows of V2^+ from whichever block is better conditioned
    v2h = np.zeros((2, 2), dtype=complex)
    from_g22 = u2.conj().T @ g22
    from_g12 = -1j * u1.conj().T @ g12
    for k in range(2):
        if c[k] >= s[k]:
            v2h[k] = from_g22[k] / c[k]
        else:
            v2h[k] = from_g12[k] / s[k]
    v2 = _polar_unitary(v2h).conj().T

    for k in range(2):
        ph = _first_nonzero_phase(u1[:, k]).conjugate()
        u1[:, k] *= ph
        u2[:, k] *= ph
        v1[:, k] *= ph
        v2[:, k] *= ph
    return CSDFactors(u1, u2, v1, v2, d)


@dataclass(frozen=True, eq=False)
class CartanFactors:
    """G = euler_to_unitary(kbar) @ p0(x_H, x_V) @ kprime."""

    kbar: EulerParamsLO
    x_H: float
    x_V: float
    kprime: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return euler_to_unitary(self.kbar) @ p0(self.x_H, self.x_V) @ self.kprime


def _isotropy(theta: float, phi: float) -> np.ndarray:
    # exp(i theta (Jaz + Jbz)) exp(i phi (Ja0 + Jb0)); commutes with p0(x, y)
    return np.diag(np.exp(1j * np.array([theta + phi, -theta + phi, theta + phi, -theta + phi]) / 2))


def cartan_kpk(g: np.ndarray) -> CartanFactors:
    """Factor G = Kbar P0 Kprime with Kbar in Euler form.

    Kbar is determined up to right multiplication by the isotropy group of
    P0, generated by Jaz + Jbz and Ja0 + Jb0. Those factors move through P0
    into Kprime and are used to set gamma_b = delta_b = 0. With the Euler
    order exp(i alpha Jz) exp(i beta Jy) exp(i gamma Jz), right
    multiplication cannot change alpha_b, so alpha_b is generally nonzero.
    """
    csd = cs_decompose(g)
    x_h, x_v = 2 * csd.D[0], 2 * csd.D[1]
    if abs(x_h - x_v) < 1e-12:
        warnings.warn(
            f"x_H = x_V = {x_h:.6g}: factorization is canonical but not unique",
            DegenerateAngles,
            stacklevel=2,
        )
    left, right = csd.left(), csd.right()
    b = unitary_to_euler(left)
    z = _isotropy(b.gamma_b, b.delta_b)
    kbar_matrix = left @ z.conj().T
    kprime = z @ right
    kbar = unitary_to_euler(kbar_matrix)
    # the residual gauge angles are zero up to rounding; store them exactly
    kbar = EulerParamsLO(
        kbar.alpha_a, kbar.beta_a, kbar.gamma_a, kbar.delta_a,
        kbar.alpha_b, kbar.beta_b, 0.0, 0.0,
    )
    # absorb the rounding of the two zeroed angles into kprime
    kprime = euler_to_unitary(kbar).conj().T @ kbar_matrix @ kprime
    return CartanFactors(kbar, float(x_h), float(x_v), kprime)


def is_local(g: np.ndarray, tol: float = 1e-8) -> bool:
    g = np.asarray(g)
    return bool(np.linalg.norm(g[:2, 2:]) <= tol and np.linalg.norm(g[2:, :2]) <= tol)


class Closing(str, enum.Enum):
    StrictlyLocal = "StrictlyLocal"
    SwapTimesLocal = "SwapTimesLocal"
    NotClosing = "NotClosing"

    @property
    def closes(self) -> bool:
        return self is not Closing.NotClosing


def classify_closing(g: np.ndarray, tol: float = 1e-8) -> Closing:
    if is_local(g, tol):
        return Closing.StrictlyLocal
    if is_local(channel_swap() @ np.asarray(g), tol):
        return Closing.SwapTimesLocal
    return Closing.NotClosing


@dataclass(frozen=True)
class TwoModeRotation:
    """exp-free beamsplitter on modes (m, m+1):
    [[e^{i phi} cos theta, -sin theta], [e^{i phi} sin theta, cos theta]]."""

    modes: tuple[int, int]
    theta: float
    phi: float

    def matrix(self, n: int = 4) -> np.ndarray:
        out = np.eye(n, dtype=complex)
        m, k = self.modes
        ct, st, e = np.cos(self.theta), np.sin(self.theta), np.exp(1j * self.phi)
        out[m, m], out[m, k] = e * ct, -st
        out[k, m], out[k, k] = e * st, ct
        return out


@dataclass(frozen=True)
class PhaseLayer:
    """Fixed phase shift exp(i phases[k]) on each mode."""

    phases: tuple[float, ...]

    def matrix(self, n: int = 4) -> np.ndarray:
        return np.diag(np.exp(1j * np.asarray(self.phases, dtype=float)))


def givens_factorize(v: np.ndarray) -> list[TwoModeRotation | PhaseLayer]:
    """Factor a unitary into nearest-neighbour two-mode rotations and a final
    phase layer, listed in the order light traverses them.

    Reck-style triangular elimination: n(n-1)/2 rotations.
    """
    v = check_unitary(v)
    n = v.shape[0]
    w = v.conj().T.copy()
    applied = []
    for j in range(n - 1):
        for i in range(n - 1, j, -1):
            a, b = w[i - 1, j], w[i, j]
            theta = float(np.arctan2(abs(b), abs(a)))
            phi = float(np.angle(b) - np.angle(a) + np.pi) if abs(a) > 0 and abs(b) > 0 else 0.0
            if abs(b) > 0 and abs(a) == 0:
                phi = float(np.angle(b) + np.pi)
            t = TwoModeRotation((i - 1, i), theta, phi)
            w = t.matrix(n) @ w
            applied.append(t)
    # w = T_L ... T_1 V^+ is now diagonal D, so V = D^+ T_L ... T_1
    phases = tuple(float(-np.angle(w[k, k])) for k in range(n))
    return applied + [PhaseLayer(phases)]


def recompose(factors, n: int = 4) -> np.ndarray:
    out = np.eye(n, dtype=complex)
    for f in factors:
        out = f.matrix(n) @ out
    return out


@dataclass(frozen=True, eq=False)
class CompiledSubgroup:
    """exp(i s J) = V^+ diag(exp(i s c)) V, with V built from ``factorization``."""

    V: np.ndarray
    c: np.ndarray
    factorization: list

    def phase_shift(self, s: float) -> np.ndarray:
        return np.diag(np.exp(1j * s * self.c))

    def evaluate(self, s: float) -> np.ndarray:
        return self.V.conj().T @ self.phase_shift(s) @ self.V


def _canonical_eigenbasis(h: np.ndarray, tol: float = 1e-9):
    w, vecs = np.linalg.eigh(h)
    groups = []
    for k in range(len(w)):
        if groups and abs(w[k] - w[groups[-1][-1]]) < tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    n = h.shape[0]
    basis = np.zeros((n, n), dtype=complex)
    for idx in groups:
        sub = vecs[:, idx]
        proj = sub @ sub.conj().T
        chosen = []
        for _ in idx:
            best, best_norm = None, -1.0
            for e in np.eye(n, dtype=complex):
                v = proj @ e
                for u in chosen:
                    v = v - (u.conj() @ v) * u
                nv = np.linalg.norm(v)
                if nv > best_norm + 1e-12:
                    best, best_norm = v, nv
            chosen.append(best / best_norm)
        for k, v in zip(idx, chosen):
            basis[:, k] = v
    return w, basis


def compile_one_param(j: GeneratorCombo | np.ndarray) -> CompiledSubgroup:
    """Diagonalize a one-parameter subgroup exp(i s J) into fixed optics V and
    variable mode phase shifts with rates ``c``.

    Degenerate eigenspaces get a Gram-Schmidt basis from the canonical modes.
    Eigenvectors are then assigned to modes by maximal overlap, so a
    generator that is already diagonal compiles to V = I.
    """
    h = j.fundamental() if isinstance(j, GeneratorCombo) else check_hermitian(j)
    if np.allclose(h, 0):
        raise ValueError("generator is zero")
    w, basis = _canonical_eigenbasis(h)
    _, cols = linear_sum_assignment(-np.abs(basis) ** 2)
    basis, w = basis[:, cols], w[cols]
    for k in range(basis.shape[1]):
        basis[:, k] *= _first_nonzero_phase(basis[:, k]).conjugate()
    v = basis.conj().T
    return CompiledSubgroup(v, np.asarray(w, dtype=float), givens_factorize(v))
