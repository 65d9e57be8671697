"""Independent reference computations used by the tests.

Nothing here imports the package's numerics: operators come from truncated
single-mode ladder matrices combined with Kronecker products, exponentials
from scipy's Pade expm, derivatives from finite differences.
"""

import itertools

import numpy as np
from scipy.linalg import expm as pade_expm

CUTOFF = 3  # occupations 0..2 per mode


def ladder():
    a = np.zeros((CUTOFF, CUTOFF))
    for n in range(1, CUTOFF):
        a[n - 1, n] = np.sqrt(n)
    return a


def mode_op(op, mode):
    mats = [np.eye(CUTOFF)] * 4
    mats[mode] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def fock_index(occ):
    idx = 0
    for n in occ:
        idx = idx * CUTOFF + n
    return idx


QUBIT_OCC = [(1, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 1, 0, 1)]
OTHER_OCC = sorted(
    o for o in itertools.product(range(3), repeat=4) if sum(o) == 2 and o not in QUBIT_OCC
)
ORDER = QUBIT_OCC + OTHER_OCC
SELECT = np.array([fock_index(o) for o in ORDER])

_A = [mode_op(ladder(), m) for m in range(4)]
_AD = [a.T for a in _A]


def bilinear(coeffs):
    """sum_ij coeffs[i][j] c_i^+ c_j restricted to the 10 two-photon states."""
    full = np.zeros((CUTOFF**4, CUTOFF**4), dtype=complex)
    for i in range(4):
        for j in range(4):
            if coeffs[i][j] != 0:
                full += coeffs[i][j] * _AD[i] @ _A[j]
    return full[np.ix_(SELECT, SELECT)]


def named(label):
    """Ladder-operator definitions of the 16 generators, written out by hand."""
    modes = {"aH": 0, "aV": 1, "bH": 2, "bV": 3}
    pairs = {
        "a": ("aH", "aV"),
        "b": ("bH", "bV"),
        "HH": ("aH", "bH"),
        "HV": ("aH", "bV"),
        "VH": ("aV", "bH"),
        "VV": ("aV", "bV"),
    }
    c = np.zeros((4, 4), dtype=complex)
    body, kind = label[2:-1], label[-1]
    if body in ("a", "b") and kind in "z0":
        i, j = modes[pairs[body][0]], modes[pairs[body][1]]
        c[i, i] = 0.5
        c[j, j] = 0.5 if kind == "0" else -0.5
    else:
        i, j = modes[pairs[body][0]], modes[pairs[body][1]]
        if kind == "x":
            c[i, j] = c[j, i] = 0.5
        else:
            c[i, j] = 1 / 2j
            c[j, i] = -1 / 2j
    return c


def generator_4(label):
    return named(label)


def generator_10(label):
    return bilinear(named(label))


def two_photon_of(matrix4):
    return bilinear(matrix4)


def brute_force_loop(hamiltonians4, lengths, steps_per_unit=400, h=1e-6):
    """Wilson loop of a piecewise one-parameter path from first principles.

    G(s) is rebuilt with Pade exponentials of the 10x10 generators, dG/ds by
    central differences, A = i P G^+ dG P and the ordered product uses
    midpoints with later pseudotime on the left.
    """
    gens = [bilinear(h4) for h4 in hamiltonians4]
    prefix = [np.eye(10, dtype=complex)]
    for g, L in zip(gens, lengths):
        prefix.append(pade_expm(1j * L * g) @ prefix[-1])

    def G(k, t):
        return pade_expm(1j * t * gens[k]) @ prefix[k]

    total = np.eye(4, dtype=complex)
    for k, L in enumerate(lengths):
        if L == 0:
            continue
        n = max(8, int(np.ceil(L * steps_per_unit)))
        dt = L / n
        for j in range(n):
            t = (j + 0.5) * dt
            dg = (G(k, t + h) - G(k, t - h)) / (2 * h)
            a = 1j * G(k, t).conj().T @ dg
            a = a[:4, :4]
            a = 0.5 * (a + a.conj().T)
            total = pade_expm(1j * a * dt) @ total
    return total


def example_hamiltonians(angle, s2):
    """Generators of the three legs of the worked triangle loop."""
    mix = np.cos(angle) ** 2 * named("J_HHx") + np.sin(angle) ** 2 * named("J_VVx")
    local = 0.5 * (named("J_ay") + named("J_by"))
    kbar = pade_expm(1j * s2 * local)
    return [mix, local, kbar @ mix @ kbar.conj().T]
