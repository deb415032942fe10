"""Second-quantized Hamiltonian input: orbital metadata, integral tables,
reference determinant, and a determinant-basis exact-diagonalization oracle.

Integrals file format (UTF-8 text, '#' comments, whitespace separated):

    NORB <int>
    NELEC <int>
    REF <i1> <i2> ...              0-based occupied orbital indices
    ORB <idx> <n> <parity 0|1> <2j> <2m>
    H1 <p> <q> <re> <im>
    H2 <p> <q> <r> <s> <re> <im>

Unlisted integral entries are zero; energies are in Hartree.  The stored h2
values do NOT include the global 1/2 prefactor of the two-body sum; it is
applied at Hamiltonian-assembly time.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

HERMITICITY_TOL = 1e-8


class IntegralsFormatError(ValueError):
    """Malformed integrals file; carries the offending line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class HermiticityError(ValueError):
    """Integral tables violate Hermiticity beyond tolerance."""


@dataclass(frozen=True)
class SpinOrbital:
    """One relativistic orbital: n, parity (l mod 2), 2j, and 2m."""

    index: int
    n: int
    parity: int
    two_j: int
    two_m: int

    def __post_init__(self):
        if self.parity not in (0, 1):
            raise ValueError("parity must be 0 (even) or 1 (odd)")
        if self.two_j <= 0 or self.two_j % 2 == 0:
            raise ValueError("2j must be a positive odd integer")
        if self.two_m % 2 == 0 or abs(self.two_m) > self.two_j:
            raise ValueError("2m must be odd with |2m| <= 2j")


@dataclass(frozen=True)
class OrbitalBasis:
    orbitals: tuple[SpinOrbital, ...]
    ordering_tag: str = "as-loaded"

    def __post_init__(self):
        indices = [o.index for o in self.orbitals]
        if indices != list(range(len(self.orbitals))):
            raise ValueError("orbital indices must be unique and contiguous from 0")
        if self.ordering_tag == "odd-before-even":
            parities = [o.parity for o in self.orbitals]
            if sorted(parities, reverse=True) != parities:
                raise ValueError("odd-before-even tag, but even orbital precedes odd")

    @property
    def n_orbs(self) -> int:
        return len(self.orbitals)

    @property
    def n_odd(self) -> int:
        return sum(o.parity for o in self.orbitals)


@dataclass(frozen=True)
class OccupationDeterminant:
    """Occupation-number list f_i over the basis orbitals."""

    occupations: tuple[int, ...]

    def __post_init__(self):
        if any(f not in (0, 1) for f in self.occupations):
            raise ValueError("occupations must be 0/1")

    @property
    def n_electrons(self) -> int:
        return sum(self.occupations)

    def occupied_indices(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.occupations) if f)

    def total_two_m(self, basis: OrbitalBasis) -> int:
        return sum(basis.orbitals[i].two_m for i in self.occupied_indices())

    def total_parity(self, basis: OrbitalBasis) -> int:
        return sum(basis.orbitals[i].parity for i in self.occupied_indices()) % 2


@dataclass
class FermionHamiltonian:
    """Sparse one-/two-electron integral tables.

    h1[(p, q)] multiplies a+_p a_q; h2[(p, q, r, s)] multiplies a+_p a+_q a_r a_s
    (the 1/2 prefactor is applied on assembly, not stored).
    """

    n_orbs: int
    h1: dict[tuple[int, int], complex] = field(default_factory=dict)
    h2: dict[tuple[int, int, int, int], complex] = field(default_factory=dict)
    max_asymmetry: float = 0.0

    def validate(self, tol: float = HERMITICITY_TOL):
        for (p, q) in self.h1:
            if not (0 <= p < self.n_orbs and 0 <= q < self.n_orbs):
                raise ValueError(f"h1 index ({p},{q}) out of range")
        for key in self.h2:
            if not all(0 <= i < self.n_orbs for i in key):
                raise ValueError(f"h2 index {key} out of range")
        for (p, q), v in self.h1.items():
            if abs(v - np.conj(self.h1.get((q, p), 0.0))) > tol:
                raise HermiticityError(f"h1[{p},{q}] violates h_pq = conj(h_qp)")
        for (p, q, r, s), v in self.h2.items():
            if abs(v - np.conj(self.h2.get((s, r, q, p), 0.0))) > tol:
                raise HermiticityError(f"h2[{p},{q},{r},{s}] violates h_pqrs = conj(h_srqp)")


def _symmetrize_h1(raw: dict, tol: float):
    out = {}
    worst = 0.0
    for (p, q), v in raw.items():
        mirror = raw.get((q, p))
        if mirror is None:
            out[(p, q)] = v
            out[(q, p)] = np.conj(v)
        else:
            gap = abs(v - np.conj(mirror))
            worst = max(worst, gap)
            if gap > tol:
                raise HermiticityError(
                    f"h1 entries ({p},{q}) and ({q},{p}) differ by {gap:.3e}"
                )
            out[(p, q)] = 0.5 * (v + np.conj(mirror))
    return out, worst


def _symmetrize_h2(raw: dict, tol: float):
    out = {}
    worst = 0.0
    for (p, q, r, s), v in raw.items():
        mkey = (s, r, q, p)
        mirror = raw.get(mkey)
        if mirror is None:
            out[(p, q, r, s)] = v
            out[mkey] = np.conj(v)
        else:
            gap = abs(v - np.conj(mirror))
            worst = max(worst, gap)
            if gap > tol:
                raise HermiticityError(
                    f"h2 entries ({p},{q},{r},{s}) and {mkey} differ by {gap:.3e}"
                )
            out[(p, q, r, s)] = 0.5 * (v + np.conj(mirror))
    return out, worst


def load_integrals(path) -> tuple[OrbitalBasis, FermionHamiltonian, OccupationDeterminant]:
    """Parse, validate and Hermiticity-symmetrize an integrals file."""
    n_orbs = None
    n_elec = None
    ref_indices = None
    orbitals = {}
    raw_h1 = {}
    raw_h2 = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            tag = parts[0].upper()
            try:
                if tag == "NORB":
                    n_orbs = int(parts[1])
                elif tag == "NELEC":
                    n_elec = int(parts[1])
                elif tag == "REF":
                    ref_indices = [int(t) for t in parts[1:]]
                elif tag == "ORB":
                    idx, nq, par, tj, tm = (int(t) for t in parts[1:6])
                    if idx in orbitals:
                        raise IntegralsFormatError(lineno, f"duplicate ORB index {idx}")
                    orbitals[idx] = SpinOrbital(idx, nq, par, tj, tm)
                elif tag == "H1":
                    p, q = int(parts[1]), int(parts[2])
                    val = complex(float(parts[3]), float(parts[4]))
                    if (p, q) in raw_h1:
                        raise IntegralsFormatError(lineno, f"duplicate H1 entry ({p},{q})")
                    raw_h1[(p, q)] = val
                elif tag == "H2":
                    p, q, r, s = (int(t) for t in parts[1:5])
                    val = complex(float(parts[5]), float(parts[6]))
                    key = (p, q, r, s)
                    if key in raw_h2:
                        raise IntegralsFormatError(lineno, f"duplicate H2 entry {key}")
                    raw_h2[key] = val
                else:
                    raise IntegralsFormatError(lineno, f"unknown record {tag!r}")
            except IntegralsFormatError:
                raise
            except (IndexError, ValueError) as exc:
                raise IntegralsFormatError(lineno, str(exc)) from exc

    if n_orbs is None:
        raise IntegralsFormatError(0, "missing NORB record")
    if not orbitals:
        # Metadata-free file: synthesize placeholder quantum numbers.
        orbitals = {i: SpinOrbital(i, i + 1, 0, 1, 1) for i in range(n_orbs)}
    if sorted(orbitals) != list(range(n_orbs)):
        raise ValueError(f"expected ORB records for indices 0..{n_orbs - 1}")
    basis = OrbitalBasis(tuple(orbitals[i] for i in range(n_orbs)))

    for (p, q) in raw_h1:
        if not (0 <= p < n_orbs and 0 <= q < n_orbs):
            raise ValueError(f"h1 index ({p},{q}) out of range")
    for key in raw_h2:
        if not all(0 <= i < n_orbs for i in key):
            raise ValueError(f"h2 index {key} out of range")

    h1, worst1 = _symmetrize_h1(raw_h1, HERMITICITY_TOL)
    h2, worst2 = _symmetrize_h2(raw_h2, HERMITICITY_TOL)
    ham = FermionHamiltonian(n_orbs, h1, h2, max_asymmetry=max(worst1, worst2))
    ham.validate()

    if ref_indices is None:
        ref_indices = []
    if any(not 0 <= i < n_orbs for i in ref_indices):
        raise ValueError("REF index out of range")
    if len(set(ref_indices)) != len(ref_indices):
        raise ValueError("REF lists a repeated orbital")
    occ = [0] * n_orbs
    for i in ref_indices:
        occ[i] = 1
    ref = OccupationDeterminant(tuple(occ))
    if n_elec is not None and ref.n_electrons != n_elec:
        raise ValueError(
            f"NELEC = {n_elec} but REF occupies {ref.n_electrons} orbitals"
        )
    return basis, ham, ref


def save_integrals(path, basis: OrbitalBasis, ham: FermionHamiltonian,
                   ref: OccupationDeterminant):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"NORB {basis.n_orbs}\n")
        fh.write(f"NELEC {ref.n_electrons}\n")
        fh.write("REF " + " ".join(str(i) for i in ref.occupied_indices()) + "\n")
        for o in basis.orbitals:
            fh.write(f"ORB {o.index} {o.n} {o.parity} {o.two_j} {o.two_m}\n")
        for (p, q), v in sorted(ham.h1.items()):
            fh.write(f"H1 {p} {q} {v.real:.17g} {v.imag:.17g}\n")
        for (p, q, r, s), v in sorted(ham.h2.items()):
            fh.write(f"H2 {p} {q} {r} {s} {v.real:.17g} {v.imag:.17g}\n")


def reorder_odd_before_even(basis: OrbitalBasis, ham: FermionHamiltonian,
                            ref: OccupationDeterminant):
    """Stable permutation placing odd-parity orbitals before even ones.

    Returns (basis, ham, ref, perm) where perm[new_index] = old_index.
    """
    if basis.ordering_tag != "as-loaded":
        raise ValueError("basis is already reordered")
    order = [o.index for o in basis.orbitals if o.parity == 1]
    order += [o.index for o in basis.orbitals if o.parity == 0]
    old_to_new = {old: new for new, old in enumerate(order)}

    new_orbitals = tuple(
        SpinOrbital(new, basis.orbitals[old].n, basis.orbitals[old].parity,
                    basis.orbitals[old].two_j, basis.orbitals[old].two_m)
        for new, old in enumerate(order)
    )
    new_basis = OrbitalBasis(new_orbitals, ordering_tag="odd-before-even")
    new_h1 = {
        (old_to_new[p], old_to_new[q]): v for (p, q), v in ham.h1.items()
    }
    new_h2 = {
        (old_to_new[p], old_to_new[q], old_to_new[r], old_to_new[s]): v
        for (p, q, r, s), v in ham.h2.items()
    }
    new_ham = FermionHamiltonian(ham.n_orbs, new_h1, new_h2, ham.max_asymmetry)
    new_occ = tuple(ref.occupations[old] for old in order)
    return new_basis, new_ham, OccupationDeterminant(new_occ), order


def symmetry_qubits(basis: OrbitalBasis) -> tuple[int, int]:
    """(whole-system-parity qubit, particle-parity qubit) for an odd-first basis."""
    if basis.ordering_tag != "odd-before-even":
        raise ValueError("symmetry qubits are defined for odd-before-even ordering")
    n_odd = basis.n_odd
    if n_odd == 0 or n_odd == basis.n_orbs:
        raise ValueError("need both parities present to taper two qubits")
    return n_odd - 1, basis.n_orbs - 1


# ---------------------------------------------------------------------------
# Determinant-basis FCI oracle
# ---------------------------------------------------------------------------

def _annihilate(det: int, orb: int):
    if not det >> orb & 1:
        return None
    sign = -1 if bin(det & ((1 << orb) - 1)).count("1") % 2 else 1
    return sign, det & ~(1 << orb)


def _create(det: int, orb: int):
    if det >> orb & 1:
        return None
    sign = -1 if bin(det & ((1 << orb) - 1)).count("1") % 2 else 1
    return sign, det | (1 << orb)


def enumerate_determinants(n_orbs: int, n_electrons: int | None = None,
                           basis: OrbitalBasis | None = None,
                           total_two_m: int | None = None,
                           total_parity: int | None = None) -> list[int]:
    """Determinant bitmasks, optionally filtered by electron count and symmetry."""
    if n_electrons is None:
        pool = range(1 << n_orbs)
        dets = list(pool)
    else:
        dets = []
        for occ in itertools.combinations(range(n_orbs), n_electrons):
            d = 0
            for i in occ:
                d |= 1 << i
            dets.append(d)
    if total_two_m is not None or total_parity is not None:
        if basis is None:
            raise ValueError("symmetry filters require the orbital basis")
        filtered = []
        for d in dets:
            occ = [i for i in range(n_orbs) if d >> i & 1]
            if total_two_m is not None and sum(basis.orbitals[i].two_m for i in occ) != total_two_m:
                continue
            if total_parity is not None and sum(basis.orbitals[i].parity for i in occ) % 2 != total_parity:
                continue
            filtered.append(d)
        dets = filtered
    return sorted(dets)


def fci_matrix(ham: FermionHamiltonian, determinants) -> np.ndarray:
    """Dense Hamiltonian matrix in the given determinant basis.

    Built by direct application of a+_p a_q and (1/2) a+_p a+_q a_r a_s with
    fermionic signs; independent of any qubit mapping.
    """
    dets = list(determinants)
    index = {d: i for i, d in enumerate(dets)}
    dim = len(dets)
    mat = np.zeros((dim, dim), dtype=complex)
    for col, det in enumerate(dets):
        for (p, q), v in ham.h1.items():
            step = _annihilate(det, q)
            if step is None:
                continue
            sign, d1 = step
            step = _create(d1, p)
            if step is None:
                continue
            sign2, d2 = step
            row = index.get(d2)
            if row is not None:
                mat[row, col] += v * sign * sign2
        for (p, q, r, s), v in ham.h2.items():
            step = _annihilate(det, s)
            if step is None:
                continue
            sgn, d1 = step
            step = _annihilate(d1, r)
            if step is None:
                continue
            sgn2, d2 = step
            step = _create(d2, q)
            if step is None:
                continue
            sgn3, d3 = step
            step = _create(d3, p)
            if step is None:
                continue
            sgn4, d4 = step
            row = index.get(d4)
            if row is not None:
                mat[row, col] += 0.5 * v * sgn * sgn2 * sgn3 * sgn4
    return mat


def fci_eigenvalues(ham: FermionHamiltonian, determinants) -> np.ndarray:
    return np.linalg.eigvalsh(fci_matrix(ham, determinants))


def reference_energy(ham: FermionHamiltonian, ref: OccupationDeterminant) -> float:
    """<ref|H|ref>, the mean-field-like energy of the reference determinant."""
    det = 0
    for i in ref.occupied_indices():
        det |= 1 << i
    mat = fci_matrix(ham, [det])
    value = complex(mat[0, 0])
    if abs(value.imag) > 1e-10:
        raise ValueError("reference energy has an imaginary residual")
    return float(value.real)
