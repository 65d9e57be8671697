"""Four optical modes, the two-photon Fock basis and the u(4) generators.

Mode ordering is ``aH, aV, bH, bV``: modes 0-1 belong to spatial channel
``a`` and modes 2-3 to channel ``b``, so local operations are block diagonal
with 2x2 blocks.

The ten two-photon states are ordered with the dual-rail qubit states
``|HH>, |HV>, |VH>, |VV>`` first, followed by the six remaining occupation
vectors in ascending lexicographic order.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from math import factorial, sqrt
from types import MappingProxyType
from typing import Mapping, NamedTuple

import numpy as np

from .errors import NonUnitaryInput


class Mode(enum.IntEnum):
    aH = 0
    aV = 1
    bH = 2
    bV = 3


class FockState(NamedTuple):
    """Photon counts per mode; compares equal to a plain 4-tuple."""

    aH: int
    aV: int
    bH: int
    bV: int

    @property
    def photons(self) -> int:
        return sum(self)

    def mode_list(self) -> tuple[int, ...]:
        """Occupied modes with multiplicity, e.g. (2,0,0,0) -> (0, 0)."""
        return tuple(m for m, n in enumerate(self) for _ in range(n))

    def label(self) -> str:
        return "|" + ",".join(str(n) for n in self) + ">"


HH = FockState(1, 0, 1, 0)
HV = FockState(1, 0, 0, 1)
VH = FockState(0, 1, 1, 0)
VV = FockState(0, 1, 0, 1)
QUBIT_STATES = (HH, HV, VH, VV)


def basis_h2() -> list[FockState]:
    """The canonical ordered basis of the 10-dimensional two-photon space."""
    everything = [
        FockState(*occ)
        for occ in itertools.product(range(3), repeat=4)
        if sum(occ) == 2
    ]
    rest = sorted(s for s in everything if s not in QUBIT_STATES)
    return list(QUBIT_STATES) + rest


_BASIS = tuple(basis_h2())
DIM_H2 = len(_BASIS)
DIM_H11 = len(QUBIT_STATES)

_ROW0 = np.array([s.mode_list()[0] for s in _BASIS])
_ROW1 = np.array([s.mode_list()[1] for s in _BASIS])
_NORM = np.array([1.0 / sqrt(np.prod([factorial(n) for n in s])) for s in _BASIS])


class GeneratorLabel(str, enum.Enum):
    """The 16 named generators of u(4); the value is the serialized token."""

    Jax = "J_ax"
    Jay = "J_ay"
    Jaz = "J_az"
    Ja0 = "J_a0"
    Jbx = "J_bx"
    Jby = "J_by"
    Jbz = "J_bz"
    Jb0 = "J_b0"
    JHHx = "J_HHx"
    JHHy = "J_HHy"
    JHVx = "J_HVx"
    JHVy = "J_HVy"
    JVHx = "J_VHx"
    JVHy = "J_VHy"
    JVVx = "J_VVx"
    JVVy = "J_VVy"

    @property
    def is_local(self) -> bool:
        return self in LOCAL_LABELS

    @classmethod
    def from_token(cls, token: str) -> "GeneratorLabel":
        return cls(token)


LABELS = tuple(GeneratorLabel)
LOCAL_LABELS = LABELS[:8]
NONLOCAL_LABELS = LABELS[8:]
TOKENS = tuple(label.value for label in LABELS)


def _bilinear(i: int, j: int, kind: str) -> np.ndarray:
    # one-photon matrix of (c_i^+ c_j + h.c.)/2 ("x") or (c_i^+ c_j - h.c.)/2i ("y")
    m = np.zeros((4, 4), dtype=complex)
    if kind == "x":
        m[i, j] = m[j, i] = 0.5
    else:
        m[i, j] = -0.5j
        m[j, i] = 0.5j
    return m


def _number(weights) -> np.ndarray:
    return np.diag(np.asarray(weights, dtype=complex))


_FUNDAMENTAL = {
    GeneratorLabel.Jax: _bilinear(0, 1, "x"),
    GeneratorLabel.Jay: _bilinear(0, 1, "y"),
    GeneratorLabel.Jaz: _number([0.5, -0.5, 0, 0]),
    GeneratorLabel.Ja0: _number([0.5, 0.5, 0, 0]),
    GeneratorLabel.Jbx: _bilinear(2, 3, "x"),
    GeneratorLabel.Jby: _bilinear(2, 3, "y"),
    GeneratorLabel.Jbz: _number([0, 0, 0.5, -0.5]),
    GeneratorLabel.Jb0: _number([0, 0, 0.5, 0.5]),
    GeneratorLabel.JHHx: _bilinear(0, 2, "x"),
    GeneratorLabel.JHHy: _bilinear(0, 2, "y"),
    GeneratorLabel.JHVx: _bilinear(0, 3, "x"),
    GeneratorLabel.JHVy: _bilinear(0, 3, "y"),
    GeneratorLabel.JVHx: _bilinear(1, 2, "x"),
    GeneratorLabel.JVHy: _bilinear(1, 2, "y"),
    GeneratorLabel.JVVx: _bilinear(1, 3, "x"),
    GeneratorLabel.JVVy: _bilinear(1, 3, "y"),
}
for _m in _FUNDAMENTAL.values():
    _m.setflags(write=False)


def generator_fundamental(label: GeneratorLabel | str) -> np.ndarray:
    """4x4 one-photon matrix of a named generator (read-only array)."""
    return _FUNDAMENTAL[GeneratorLabel(label)]


def two_photon_rep(m: np.ndarray) -> np.ndarray:
    """10x10 matrix of the bilinear operator sum_ij m_ij c_i^+ c_j on H_2.

    This is the derivative of :func:`lift` at the identity, taken
    analytically on the 2x2 permanents.
    """
    m = np.asarray(m, dtype=complex)
    eye = np.eye(4)
    r0, r1 = _ROW0[:, None], _ROW1[:, None]
    c0, c1 = _ROW0[None, :], _ROW1[None, :]
    d = (
        eye[r0, c0] * m[r1, c1]
        + m[r0, c0] * eye[r1, c1]
        + eye[r0, c1] * m[r1, c0]
        + m[r0, c1] * eye[r1, c0]
    )
    return d * np.outer(_NORM, _NORM)


_TWO_PHOTON = {label: two_photon_rep(mat) for label, mat in _FUNDAMENTAL.items()}
for _m in _TWO_PHOTON.values():
    _m.setflags(write=False)


def generator_two_photon(label: GeneratorLabel | str) -> np.ndarray:
    """10x10 matrix of a named generator on the two-photon space."""
    return _TWO_PHOTON[GeneratorLabel(label)]


@dataclass(frozen=True)
class GeneratorCombo:
    """Real linear combination of the 16 named generators."""

    coefficients: Mapping[GeneratorLabel, float] = field(default_factory=dict)

    def __post_init__(self):
        coeffs = {}
        for key, value in dict(self.coefficients).items():
            value = float(value)
            if not np.isfinite(value):
                raise ValueError(f"non-finite coefficient for {key}")
            coeffs[GeneratorLabel(key)] = value
        object.__setattr__(self, "coefficients", MappingProxyType(coeffs))

    @classmethod
    def of(cls, **terms: float) -> "GeneratorCombo":
        """Build from attribute-style names: ``GeneratorCombo.of(JHHx=0.5)``."""
        return cls({GeneratorLabel[name]: value for name, value in terms.items()})

    def __add__(self, other: "GeneratorCombo") -> "GeneratorCombo":
        out = dict(self.coefficients)
        for key, value in other.coefficients.items():
            out[key] = out.get(key, 0.0) + value
        return GeneratorCombo(out)

    def __mul__(self, factor: float) -> "GeneratorCombo":
        return GeneratorCombo({k: v * factor for k, v in self.coefficients.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "GeneratorCombo":
        return self * -1.0

    def __eq__(self, other):
        if not isinstance(other, GeneratorCombo):
            return NotImplemented
        keys = set(self.coefficients) | set(other.coefficients)
        return all(
            self.coefficients.get(k, 0.0) == other.coefficients.get(k, 0.0) for k in keys
        )

    def __hash__(self):
        return hash(tuple(sorted((k.value, v) for k, v in self.coefficients.items() if v)))

    @property
    def is_zero(self) -> bool:
        return not any(self.coefficients.values())

    @property
    def is_local(self) -> bool:
        return all(k.is_local for k, v in self.coefficients.items() if v)

    def fundamental(self) -> np.ndarray:
        out = np.zeros((4, 4), dtype=complex)
        for label, value in self.coefficients.items():
            out += value * _FUNDAMENTAL[label]
        return out

    def two_photon(self) -> np.ndarray:
        out = np.zeros((DIM_H2, DIM_H2), dtype=complex)
        for label, value in self.coefficients.items():
            out += value * _TWO_PHOTON[label]
        return out

    def to_tokens(self) -> dict[str, float]:
        return {k.value: v for k, v in self.coefficients.items()}

    @classmethod
    def from_tokens(cls, tokens: Mapping[str, float]) -> "GeneratorCombo":
        return cls({GeneratorLabel(k): v for k, v in tokens.items()})


def check_unitary(g: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    g = np.asarray(g, dtype=complex)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise NonUnitaryInput(f"expected a square matrix, got shape {g.shape}")
    err = np.linalg.norm(g.conj().T @ g - np.eye(g.shape[0]))
    if err > tol:
        raise NonUnitaryInput(f"matrix is not unitary: |g^+g - 1|_F = {err:.3e}")
    return g


def lift(g: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Two-photon representation of a 4x4 unitary.

    Matrix elements are permanents of the 2x2 submatrices selected by the
    occupied modes, normalized by 1/sqrt(prod n_i! prod m_j!).
    """
    g = check_unitary(g, tol)
    if g.shape != (4, 4):
        raise NonUnitaryInput(f"expected a 4x4 unitary, got shape {g.shape}")
    r0, r1 = _ROW0[:, None], _ROW1[:, None]
    c0, c1 = _ROW0[None, :], _ROW1[None, :]
    perm = g[r0, c0] * g[r1, c1] + g[r0, c1] * g[r1, c0]
    return perm * np.outer(_NORM, _NORM)


def project_h11(m: np.ndarray) -> np.ndarray:
    """Leading 4x4 block: the restriction to span{|HH>,|HV>,|VH>,|VV>}."""
    return np.asarray(m)[:DIM_H11, :DIM_H11].copy()


def channel_swap() -> np.ndarray:
    """Permutation exchanging the spatial channels (aH<->bH, aV<->bV)."""
    return np.eye(4, dtype=complex)[[2, 3, 0, 1]]


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Density matrix on the dual-rail qubit subspace (basis HH, HV, VH, VV)."""

    matrix: np.ndarray
    tol: float = 1e-10

    def __post_init__(self):
        rho = np.array(self.matrix, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError(f"density matrix must be 4x4, got {rho.shape}")
        if np.linalg.norm(rho - rho.conj().T) > self.tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > self.tol:
            raise ValueError(f"density matrix trace is {np.trace(rho).real:.6g}, not 1")
        if np.linalg.eigvalsh(rho).min() < -1e-12:
            raise ValueError("density matrix is not positive semidefinite")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @classmethod
    def pure(cls, psi) -> "TwoQubitState":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def bell(cls, name: str) -> "TwoQubitState":
        """One of ``phi+``, ``phi-``, ``psi+``, ``psi-``."""
        return cls.pure(BELL_STATES[name])

    def __eq__(self, other):
        if not isinstance(other, TwoQubitState):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)


_r = 1 / sqrt(2)
BELL_STATES = {
    "phi+": np.array([_r, 0, 0, _r]),
    "phi-": np.array([_r, 0, 0, -_r]),
    "psi+": np.array([0, _r, _r, 0]),
    "psi-": np.array([0, _r, -_r, 0]),
}
