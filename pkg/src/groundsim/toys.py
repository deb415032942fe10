"""Small test systems: orbital bases and random symmetry-respecting integrals.

These fixtures are used by the test suite and the demo scripts.  Random
integral tables are Hermitian by construction and optionally respect the
parity and angular-momentum-projection selection rules, so the mapped
Hamiltonians commute with the tapered symmetries.
"""
from __future__ import annotations

import numpy as np

from .fermion import FermionHamiltonian, OccupationDeterminant, OrbitalBasis, SpinOrbital


def five_electron_basis() -> tuple[OrbitalBasis, OccupationDeterminant]:
    """Five electrons in eight orbitals: 7s(+-1/2), 7p1/2(+-1/2), 7p3/2(m = -3/2..3/2).

    The reference occupies both s spinors, both p1/2 spinors, and the
    p3/2 orbital with m = +1/2, giving total 2m = 1 and odd parity.
    """
    orbitals = (
        SpinOrbital(0, 7, 0, 1, -1),   # 7s, m = -1/2
        SpinOrbital(1, 7, 0, 1, 1),    # 7s, m = +1/2
        SpinOrbital(2, 7, 1, 1, -1),   # 7p1/2, m = -1/2
        SpinOrbital(3, 7, 1, 1, 1),    # 7p1/2, m = +1/2
        SpinOrbital(4, 7, 1, 3, -3),   # 7p3/2, m = -3/2
        SpinOrbital(5, 7, 1, 3, -1),   # 7p3/2, m = -1/2
        SpinOrbital(6, 7, 1, 3, 1),    # 7p3/2, m = +1/2
        SpinOrbital(7, 7, 1, 3, 3),    # 7p3/2, m = +3/2
    )
    basis = OrbitalBasis(orbitals)
    occ = [0] * 8
    for i in (0, 1, 2, 3, 6):
        occ[i] = 1
    return basis, OccupationDeterminant(tuple(occ))


def mixed_parity_basis(n_odd: int, n_even: int, two_m: int = 1):
    """Orbitals with a single common m value, n_odd odd-parity ones first-listed last."""
    orbitals = []
    idx = 0
    for _ in range(n_even):
        orbitals.append(SpinOrbital(idx, 1, 0, abs(two_m), two_m))
        idx += 1
    for _ in range(n_odd):
        orbitals.append(SpinOrbital(idx, 2, 1, abs(two_m), two_m))
        idx += 1
    return OrbitalBasis(tuple(orbitals))


def two_electron_toy(rng: np.random.Generator, h1_scale: float = 0.4,
                     h2_scale: float = 0.15, diagonal_bias: float = 2.5):
    """Two electrons in four orbitals (two even, two odd), real random integrals.

    The reference occupies one even and one odd orbital; singles and doubles
    then span the full (N = 2, parity-odd) determinant space, so dUCC-SD can
    represent the exact ground state.  The default diagonal bias keeps the
    reference determinant dominant in the lowest sector eigenstate, as a
    mean-field reference would be.
    """
    basis = mixed_parity_basis(n_odd=2, n_even=2)
    ham = random_integrals(basis, rng, h1_scale=h1_scale, h2_scale=h2_scale,
                           real=True, diagonal_bias=diagonal_bias)
    occ = [0] * 4
    occ[0] = 1  # even orbital
    occ[2] = 1  # odd orbital
    return basis, ham, OccupationDeterminant(tuple(occ))


def five_electron_problem(seed: int, h1_scale: float = 0.5, h2_scale: float = 0.1,
                    diagonal_bias: float = 2.0):
    """Reordered eight-orbital problem with a ground-dominant reference.

    The diagonal bias mimics a mean-field ordering of the orbitals, so the
    reference determinant dominates the lowest eigenstate of its symmetry
    sector (as a Dirac-Fock reference would).
    """
    from .fermion import reorder_odd_before_even

    rng = np.random.default_rng(seed)
    basis, ref = five_electron_basis()
    ham = random_integrals(basis, rng, h1_scale=h1_scale, h2_scale=h2_scale,
                           diagonal_bias=diagonal_bias)
    basis, ham, ref, _ = reorder_odd_before_even(basis, ham, ref)
    return basis, ham, ref


def _h1_allowed(a: SpinOrbital, b: SpinOrbital, conserve: bool) -> bool:
    if not conserve:
        return True
    return a.parity == b.parity and a.two_m == b.two_m


def _h2_allowed(p, q, r, s, conserve: bool) -> bool:
    if not conserve:
        return True
    if (p.parity + q.parity) % 2 != (r.parity + s.parity) % 2:
        return False
    return p.two_m + q.two_m == r.two_m + s.two_m


def random_integrals(basis: OrbitalBasis, rng: np.random.Generator,
                     h1_scale: float = 0.5, h2_scale: float = 0.1,
                     real: bool = True, conserve_symmetry: bool = True,
                     diagonal_bias: float = 0.0) -> FermionHamiltonian:
    """Random Hermitian integrals respecting the parity/m selection rules.

    diagonal_bias subtracts a decreasing ladder from the diagonal h_ii so
    the low orbitals are energetically preferred (keeps reference states
    dominant and spectra well separated).
    """
    n = basis.n_orbs
    orbs = basis.orbitals

    def draw() -> complex:
        if real:
            return complex(rng.uniform(-1.0, 1.0), 0.0)
        return complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))

    h1: dict = {}
    for p in range(n):
        for q in range(p, n):
            if not _h1_allowed(orbs[p], orbs[q], conserve_symmetry):
                continue
            val = draw() * h1_scale
            if p == q:
                val = complex(val.real, 0.0)
                val -= diagonal_bias * (1.0 - p / max(n - 1, 1))
                h1[(p, p)] = val
            else:
                h1[(p, q)] = val
                h1[(q, p)] = val.conjugate()

    h2: dict = {}
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            for r in range(n):
                for s in range(n):
                    if r == s:
                        continue
                    key = (p, q, r, s)
                    if key in h2:
                        continue
                    if not _h2_allowed(orbs[p], orbs[q], orbs[r], orbs[s],
                                       conserve_symmetry):
                        continue
                    val = draw() * h2_scale
                    mirror = (s, r, q, p)
                    if mirror == key:
                        val = complex(val.real, 0.0)
                        h2[key] = val
                    else:
                        h2[key] = val
                        h2[mirror] = val.conjugate()
    ham = FermionHamiltonian(n, h1, h2)
    ham.validate()
    return ham
