"""Piecewise one-parameter paths in U(4), the gauge potential they induce on
the dual-rail qubit subspace, and the path-ordered Wilson loop.

A path is a sequence of segments ``G_k(s) = exp(i (s - s_k) J_k)``; each new
segment multiplies on the left of everything accumulated before it, so the
cumulative transformation is ``G(s) = G_k(s) G_{k-1}(full) ... G_1(full)``.
"""

from __future__ import annotations

import bisect
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .decompose import Closing, classify_closing
from .errors import NoConvergence, NoSolution, NotClosed, OutOfRange
from .fockspace import (
    DIM_H11,
    DIM_H2,
    GeneratorCombo,
    TwoQubitState,
    lift,
    project_h11,
    two_photon_rep,
)
from .lie import check_hermitian, expm

BOUNDARY_TOL = 1e-12
CONSTANT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PathSegment:
    """One-parameter evolution exp(i (s - s_start) J) on [s_start, s_end].

    ``J`` is ``generator`` plus the optional dense 4x4 Hermitian ``dense``,
    which holds generators outside the span of the named labels (for example
    a generator conjugated by a fixed local operation).
    """

    generator: GeneratorCombo
    s_start: float
    s_end: float
    dense: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        if not (np.isfinite(self.s_start) and np.isfinite(self.s_end)):
            raise ValueError("segment endpoints must be finite")
        if self.s_end < self.s_start:
            raise ValueError(f"segment ends before it starts: {self.s_start} > {self.s_end}")
        if self.dense is not None:
            d = check_hermitian(self.dense).copy()
            if d.shape != (4, 4):
                raise ValueError(f"dense generator must be 4x4, got {d.shape}")
            d.setflags(write=False)
            object.__setattr__(self, "dense", d)

    @property
    def length(self) -> float:
        return self.s_end - self.s_start

    @cached_property
    def hamiltonian(self) -> np.ndarray:
        h = self.generator.fundamental()
        if self.dense is not None:
            h = h + self.dense
        return h

    @cached_property
    def hamiltonian_two_photon(self) -> np.ndarray:
        return two_photon_rep(self.hamiltonian)

    @property
    def is_local(self) -> bool:
        h = self.hamiltonian
        return np.linalg.norm(h[:2, 2:]) < 1e-14

    def evolution(self, s: float) -> np.ndarray:
        """Fundamental-representation G_k(s) for s within the segment."""
        return expm(self.hamiltonian, s - self.s_start)

    def full(self) -> np.ndarray:
        return self.evolution(self.s_end)


@dataclass(frozen=True, eq=False)
class Path:
    segments: tuple[PathSegment, ...]

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("a path needs at least one segment")
        for prev, nxt in zip(segs, segs[1:]):
            if abs(prev.s_end - nxt.s_start) > BOUNDARY_TOL * max(1.0, abs(prev.s_end)):
                raise ValueError(
                    f"segments are not contiguous: {prev.s_end} -> {nxt.s_start}"
                )
        object.__setattr__(self, "segments", segs)

    @classmethod
    def from_lengths(cls, items: Iterable, s0: float = 0.0) -> "Path":
        """Build from ``(generator, length)`` pairs; ``generator`` is a
        GeneratorCombo or a dense 4x4 Hermitian matrix."""
        segs = []
        s = s0
        for item in items:
            gen, length = item[0], float(item[1])
            name = item[2] if len(item) > 2 else ""
            if isinstance(gen, GeneratorCombo):
                segs.append(PathSegment(gen, s, s + length, name=name))
            else:
                segs.append(PathSegment(GeneratorCombo(), s, s + length, dense=gen, name=name))
            s += length
        return cls(tuple(segs))

    @property
    def s_start(self) -> float:
        return self.segments[0].s_start

    @property
    def s_end(self) -> float:
        return self.segments[-1].s_end

    @cached_property
    def _prefix(self) -> tuple[np.ndarray, ...]:
        # prefix[k] is the product of all segments before k
        out = [np.eye(4, dtype=complex)]
        for seg in self.segments[:-1]:
            out.append(seg.full() @ out[-1])
        return tuple(out)

    def segment_index(self, s: float) -> int:
        """Index of the segment containing s, preferring the one on the right
        at a boundary. Zero-length segments are never selected."""
        tol = BOUNDARY_TOL * max(1.0, abs(self.s_end), abs(self.s_start))
        if s < self.s_start - tol or s > self.s_end + tol:
            raise OutOfRange(f"s = {s} outside [{self.s_start}, {self.s_end}]")
        candidates = [k for k, seg in enumerate(self.segments) if seg.length > 0]
        if not candidates:
            return len(self.segments) - 1
        starts = [self.segments[k].s_start for k in candidates]
        pos = bisect.bisect_right(starts, s + tol) - 1
        return candidates[max(pos, 0)]

    def fundamental_at(self, s: float) -> np.ndarray:
        k = self.segment_index(s)
        seg = self.segments[k]
        s = min(max(s, seg.s_start), seg.s_end)
        return seg.evolution(s) @ self._prefix[k]

    def endpoint(self) -> np.ndarray:
        """Fundamental-representation transformation at the end of the path."""
        return self.segments[-1].full() @ self._prefix[-1]


def cumulative(path: Path, s: float) -> np.ndarray:
    """10x10 two-photon transformation G(s) accumulated along the path."""
    return lift(path.fundamental_at(s))


def _default_basis() -> np.ndarray:
    return np.eye(DIM_H2, DIM_H11, dtype=complex)


@dataclass(frozen=True, eq=False)
class GaugePotentialSample:
    """A/ds at ``s``: 4x4 Hermitian over the initial basis vectors."""

    matrix: np.ndarray
    s: float


def gauge_potential(path: Path, s: float, basis: np.ndarray | None = None) -> GaugePotentialSample:
    """A_ab/ds = i <psi_a(0)| G^+ dG/ds |psi_b(0)> at pseudotime s.

    On segment k, dG/ds = i J_k G, so A/ds = -B^+ G^+ J_k G B where the
    columns of B are the initial basis vectors (default |HH>,|HV>,|VH>,|VV>).
    """
    k = path.segment_index(s)
    seg = path.segments[k]
    g = cumulative(path, s)
    b = _default_basis() if basis is None else np.asarray(basis, dtype=complex)
    gb = g @ b
    a = -gb.conj().T @ seg.hamiltonian_two_photon @ gb
    return GaugePotentialSample(0.5 * (a + a.conj().T), s)


def ordered_exponential(
    sample: Callable[[float], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_steps: int = 2**22,
    start_steps: int = 1,
) -> tuple[np.ndarray, int, float]:
    """P exp(i int_a^b A(s) ds) with later s on the left.

    Midpoint-sampled product of exp(i A(s_k) h), doubling the number of
    steps until successive results differ by at most ``tol`` (Frobenius).
    Returns (matrix, steps, last difference).
    """

    def product(n):
        h = (b - a) / n
        out = None
        for k in range(n):
            f = expm(sample(a + (k + 0.5) * h), h)
            out = f if out is None else f @ out
        return out

    n = max(1, start_steps)
    prev = product(n)
    while True:
        n *= 2
        if n > max_steps:
            raise NoConvergence(f"no convergence to {tol:g} within {max_steps} steps")
        cur = product(n)
        diff = float(np.linalg.norm(cur - prev))
        if diff <= tol:
            return cur, n, diff
        prev = cur


@dataclass(frozen=True, eq=False)
class Holonomy:
    """The 4x4 unitary acquired on the qubit subspace around a closed loop."""

    matrix: np.ndarray
    steps: int = 0
    residual: float = 0.0
    classification: Closing = Closing.StrictlyLocal


def _is_constant(path: Path, k: int, basis) -> np.ndarray | None:
    seg = path.segments[k]
    pts = [seg.s_start + f * seg.length for f in (0.25, 0.5, 0.75)]
    vals = [gauge_potential(path, s, basis).matrix for s in pts]
    if all(np.linalg.norm(v - vals[1]) <= CONSTANT_TOL for v in vals):
        return vals[1]
    return None


def wilson_loop(
    path: Path,
    tol: float = 1e-10,
    basis: np.ndarray | None = None,
    closure_tol: float = 1e-8,
    max_steps: int = 2**22,
    exact_segments: bool = True,
) -> Holonomy:
    """Path-ordered exponential of the gauge potential around a closed path.

    Segments on which A is constant (checked at three interior points) use a
    single exact exponential unless ``exact_segments`` is False.
    """
    classification = classify_closing(path.endpoint(), closure_tol)
    if not classification.closes:
        raise NotClosed("path endpoint is neither local nor channel swap times local")
    total = np.eye(DIM_H11, dtype=complex)
    steps = 0
    residual = 0.0
    for k, seg in enumerate(path.segments):
        if seg.length == 0:
            continue
        const = _is_constant(path, k, basis) if exact_segments else None
        if const is not None:
            factor = expm(const, seg.length)
            steps += 1
        else:
            eps = seg.length * 1e-12

            def sample(s, _lo=seg.s_start + eps, _hi=seg.s_end - eps):
                # clamp inside the segment so boundaries stay one-sided
                return gauge_potential(path, min(max(s, _lo), _hi), basis).matrix

            factor, n, diff = ordered_exponential(
                sample, seg.s_start, seg.s_end, tol, max_steps
            )
            steps += n
            residual = max(residual, diff)
        total = factor @ total
    return Holonomy(total, steps, residual, classification)


def nagp_example_closed_form(s2_end: float) -> np.ndarray:
    """Closed-form holonomy of the worked triangle example as a function of
    the local-rotation endpoint."""
    s = 0.5 * np.sin(s2_end / 2)
    cp = 0.5 * (1 + np.cos(s2_end / 2))
    cm = 0.5 * (1 - np.cos(s2_end / 2))
    return np.array(
        [
            [cp, -s, -s, cm],
            [s, cp, -cm, -s],
            [s, -cm, cp, -s],
            [cm, s, s, cp],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class ClosureSolution:
    m: int
    n: int
    s3_end: float


def solve_closure(theta: float, phi: float, s1_end: float, max_mn: int = 16) -> ClosureSolution:
    """Smallest m + n (same parity) and s3 >= 0 with

        s1 cos^2 theta + s3 cos^2 phi = m pi
        s1 sin^2 theta + s3 sin^2 phi = n pi.

    Adding the two gives s1 + s3 = (m + n) pi, so only even totals are tried.
    """
    for name, angle in (("theta", theta), ("phi", phi)):
        if not (-1e-15 <= angle <= np.pi / 2 + 1e-15):
            raise ValueError(f"{name} = {angle} outside [0, pi/2]")
    ct, st = np.cos(theta) ** 2, np.sin(theta) ** 2
    cp, sp = np.cos(phi) ** 2, np.sin(phi) ** 2
    for total in range(0, max_mn + 1, 2):
        s3 = total * np.pi - s1_end
        if s3 < -1e-12:
            continue
        s3 = max(s3, 0.0)
        m = round((s1_end * ct + s3 * cp) / np.pi)
        n = total - m
        if m < 0 or n < 0:
            continue
        if (
            abs(s1_end * ct + s3 * cp - m * np.pi) <= 1e-10
            and abs(s1_end * st + s3 * sp - n * np.pi) <= 1e-10
        ):
            return ClosureSolution(int(m), int(n), float(s3))
    raise NoSolution(
        f"no closing (m, n) with m + n <= {max_mn} for theta={theta}, phi={phi}, s1={s1_end}"
    )


def _mixing_combo(angle: float) -> GeneratorCombo:
    return GeneratorCombo.of(JHHx=np.cos(angle) ** 2, JVVx=np.sin(angle) ** 2)


def build_triangle_path(
    theta: float,
    phi: float,
    s1_end: float,
    kbar_generator: GeneratorCombo,
    s2_end: float,
    max_mn: int = 16,
) -> Path:
    """Three-leg loop: a nonlocal mixing P0 leg, a local leg, and a second
    mixing leg conjugated by the local leg's endpoint, closed by
    :func:`solve_closure`."""
    if not kbar_generator.is_local:
        raise ValueError("the second leg must be generated by local labels only")
    sol = solve_closure(theta, phi, s1_end, max_mn)
    kbar = expm(kbar_generator.fundamental(), s2_end)
    g3 = kbar @ _mixing_combo(phi).fundamental() @ kbar.conj().T
    return Path.from_lengths(
        [
            (_mixing_combo(theta), s1_end, "G1"),
            (kbar_generator, s2_end, "G2"),
            (0.5 * (g3 + g3.conj().T), sol.s3_end, "G3"),
        ]
    )


EXAMPLE_LOCAL_GENERATOR = GeneratorCombo.of(Jay=0.5, Jby=0.5)
VARIANTS = {"diag": np.pi / 4, "hv": 0.0}


def example_path(s2_end: float, variant: str = "diag") -> Path:
    """The worked example: theta = phi = pi/4 (``diag``) or 0 (``hv``),
    s1 = pi, local leg exp(i s (Jay + Jby)/2)."""
    try:
        angle = VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}; expected one of {sorted(VARIANTS)}") from None
    return build_triangle_path(angle, angle, np.pi, EXAMPLE_LOCAL_GENERATOR, s2_end)


class TotalTransformation(NamedTuple):
    two_photon: np.ndarray
    restricted: np.ndarray
    classification: Closing
    fundamental: np.ndarray


def total_transformation(path: Path, tol: float = 1e-8) -> TotalTransformation:
    g = path.endpoint()
    big = lift(g)
    return TotalTransformation(big, project_h11(big), classify_closing(g, tol), g)


def apply_cycle(rho: TwoQubitState, path: Path, tol: float = 1e-8) -> TwoQubitState:
    total = total_transformation(path, tol)
    if not total.classification.closes:
        raise NotClosed("the path does not return to the qubit subspace")
    r = total.restricted
    out = r @ rho.matrix @ r.conj().T
    return TwoQubitState(0.5 * (out + out.conj().T))


def sweep_example(
    s2_values: Sequence[float],
    variant: str = "diag",
    tol: float = 1e-10,
    workers: int | None = None,
) -> list[Holonomy]:
    """Holonomies of the worked example over many endpoints, evaluated
    concurrently; results keep the order of ``s2_values``."""

    def run(s2):
        return wilson_loop(example_path(s2, variant), tol)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, s2_values))
