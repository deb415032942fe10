"""Pauli-string algebra and the parity fermion-to-qubit encoding.

Pauli strings are stored in symplectic form: a pair of bit masks (x, z)
over the qubit register, where qubit q carries X if only the x bit is set,
Z if only the z bit is set, Y if both, and I if neither.  Commutation then
reduces to a GF(2) inner product and string products need only mask XORs
plus an i^k phase.

Qubit ordering convention: qubit 0 is the least significant bit of a basis
index, and the leftmost character of a text label is the highest qubit.
"""
from __future__ import annotations

from dataclasses import dataclass

COEFF_CUTOFF = 1e-12

_PAULI_CHARS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_CHAR_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


class SymmetryViolationError(ValueError):
    """A Pauli term acts with X or Y on a qubit assumed to be a symmetry."""


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis in symplectic (x, z) mask form."""

    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        limit = 1 << self.n_qubits
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise ValueError("mask exceeds register size")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse e.g. 'ZXI' (leftmost char = highest qubit)."""
        x = z = 0
        n = len(label)
        for pos, ch in enumerate(label):
            q = n - 1 - pos
            try:
                xb, zb = _CHAR_BITS[ch.upper()]
            except KeyError:
                raise ValueError(f"invalid Pauli character {ch!r}") from None
            x |= xb << q
            z |= zb << q
        return cls(n, x, z)

    @classmethod
    def from_ops(cls, n_qubits: int, ops: dict[int, str]) -> "PauliString":
        """Build from a sparse {qubit: 'X'|'Y'|'Z'} map."""
        x = z = 0
        for q, ch in ops.items():
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit {q} out of range")
            xb, zb = _CHAR_BITS[ch.upper()]
            x |= xb << q
            z |= zb << q
        return cls(n_qubits, x, z)

    def label(self) -> str:
        return "".join(
            _PAULI_CHARS[(self.x_mask >> q & 1, self.z_mask >> q & 1)]
            for q in range(self.n_qubits - 1, -1, -1)
        )

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def is_diagonal(self) -> bool:
        return self.x_mask == 0

    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    def support(self) -> list[int]:
        m = self.x_mask | self.z_mask
        return [q for q in range(self.n_qubits) if m >> q & 1]

    def char_at(self, q: int) -> str:
        return _PAULI_CHARS[(self.x_mask >> q & 1, self.z_mask >> q & 1)]

    def commutes_with(self, other: "PauliString") -> bool:
        """Symplectic inner product over GF(2)."""
        a = (self.x_mask & other.z_mask).bit_count()
        b = (self.z_mask & other.x_mask).bit_count()
        return (a + b) % 2 == 0

    def __mul__(self, other: "PauliString") -> tuple[complex, "PauliString"]:
        """Product self @ other, returned as (phase, plain string).

        Phase bookkeeping uses the canonical form P = i^{|x&z|} X^x Z^z.
        """
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit-count mismatch")
        x3 = self.x_mask ^ other.x_mask
        z3 = self.z_mask ^ other.z_mask
        k = (
            (self.x_mask & self.z_mask).bit_count()
            + (other.x_mask & other.z_mask).bit_count()
            - (x3 & z3).bit_count()
            + 2 * (self.z_mask & other.x_mask).bit_count()
        ) % 4
        return 1j ** k, PauliString(self.n_qubits, x3, z3)

    def sort_key(self) -> tuple[int, int]:
        return (self.x_mask | self.z_mask, self.x_mask)


@dataclass(frozen=True)
class PauliTerm:
    """A weighted Pauli string: coeff * string."""

    coeff: complex
    string: PauliString


@dataclass(frozen=True)
class TaperSector:
    """Eigenvalues (+1/-1) of the two tapered symmetry qubits."""

    whole_system_parity: int
    particle_parity: int

    def __post_init__(self):
        if self.whole_system_parity not in (1, -1) or self.particle_parity not in (1, -1):
            raise ValueError("sector eigenvalues must be +1 or -1")


class QubitHamiltonian:
    """Deduplicated, canonically sorted sum of Pauli terms."""

    def __init__(self, n_qubits: int, terms, cutoff: float = COEFF_CUTOFF,
                 require_hermitian: bool = True):
        combined: dict[tuple[int, int], complex] = {}
        for term in terms:
            s = term.string
            if s.n_qubits != n_qubits:
                raise ValueError("term qubit count does not match Hamiltonian")
            key = (s.x_mask, s.z_mask)
            combined[key] = combined.get(key, 0.0) + complex(term.coeff)
        kept = []
        for (x, z), c in combined.items():
            if abs(c) < cutoff:
                continue
            if require_hermitian:
                if abs(c.imag) > 1e-10 * max(1.0, abs(c.real)):
                    raise ValueError(
                        f"non-Hermitian coefficient {c} on {PauliString(n_qubits, x, z).label()}"
                    )
                c = complex(c.real, 0.0)
            kept.append(PauliTerm(c, PauliString(n_qubits, x, z)))
        kept.sort(key=lambda t: t.string.sort_key())
        self.n_qubits = n_qubits
        self.terms = kept

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def coefficient(self, string: PauliString) -> complex:
        for t in self.terms:
            if t.string == string:
                return t.coeff
        return 0.0

    def to_text(self) -> str:
        """One line per term: '<re> <im> <string>'."""
        lines = [
            f"{t.coeff.real:+.16e} {t.coeff.imag:+.16e} {t.string.label()}"
            for t in self.terms
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str) -> "QubitHamiltonian":
        terms = []
        n_qubits = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected '<re> <im> <string>'")
            re_c, im_c, label = parts
            string = PauliString.from_label(label)
            if n_qubits is None:
                n_qubits = string.n_qubits
            elif string.n_qubits != n_qubits:
                raise ValueError(f"line {lineno}: inconsistent string length")
            terms.append(PauliTerm(complex(float(re_c), float(im_c)), string))
        if n_qubits is None:
            raise ValueError("no terms found")
        return cls(n_qubits, terms)


# ---------------------------------------------------------------------------
# Parity encoding of fermionic operators
# ---------------------------------------------------------------------------

def parity_encode_bits(occupations) -> list[int]:
    """Occupation numbers -> cumulative-parity qubit bits p_j = sum(f_0..f_j) mod 2."""
    bits = []
    acc = 0
    for f in occupations:
        acc ^= int(f) & 1
        bits.append(acc)
    return bits


def parity_decode_bits(bits) -> list[int]:
    """Inverse of parity_encode_bits."""
    occ = []
    prev = 0
    for b in bits:
        occ.append(int(b) ^ prev)
        prev = int(b)
    return occ


def parity_annihilation(j: int, n_orbs: int) -> list[PauliTerm]:
    """Parity-encoded annihilation operator for orbital j.

    Expansion: X on qubits j+1..n-1 tensored with (X_j Z_{j-1} + i Y_j)/2;
    the Z factor is the identity for j = 0.
    """
    if not 0 <= j < n_orbs:
        raise ValueError(f"orbital index {j} out of range for {n_orbs} orbitals")
    chain = 0
    for q in range(j + 1, n_orbs):
        chain |= 1 << q
    x1 = chain | (1 << j)
    z1 = (1 << (j - 1)) if j > 0 else 0
    term1 = PauliTerm(0.5, PauliString(n_orbs, x1, z1))
    # Y_j carries both bits.
    term2 = PauliTerm(0.5j, PauliString(n_orbs, chain | (1 << j), 1 << j))
    return [term1, term2]


def parity_creation(j: int, n_orbs: int) -> list[PauliTerm]:
    """Adjoint of parity_annihilation (strings are Hermitian, so conjugate coeffs)."""
    return [PauliTerm(t.coeff.conjugate(), t.string) for t in parity_annihilation(j, n_orbs)]


def multiply_sums(a: dict, b: dict, n_qubits: int) -> dict:
    """Product of two operators given as {(x_mask, z_mask): coeff} maps."""
    out: dict[tuple[int, int], complex] = {}
    for (xa, za), ca in a.items():
        sa = PauliString(n_qubits, xa, za)
        for (xb, zb), cb in b.items():
            phase, s = sa * PauliString(n_qubits, xb, zb)
            key = (s.x_mask, s.z_mask)
            out[key] = out.get(key, 0.0) + ca * cb * phase
    return {k: v for k, v in out.items() if abs(v) > 0.0}


def terms_to_sum(terms) -> dict:
    out: dict[tuple[int, int], complex] = {}
    for t in terms:
        key = (t.string.x_mask, t.string.z_mask)
        out[key] = out.get(key, 0.0) + complex(t.coeff)
    return out


def sum_to_terms(op: dict, n_qubits: int, cutoff: float = COEFF_CUTOFF) -> list[PauliTerm]:
    return [
        PauliTerm(c, PauliString(n_qubits, x, z))
        for (x, z), c in op.items()
        if abs(c) >= cutoff
    ]


def excitation_operator_sum(creations, annihilations, n_orbs: int) -> dict:
    """Pauli-sum map of a^dag_{p1} a^dag_{p2} ... a_{q1} a_{q2} ... (parity encoding)."""
    op = {(0, 0): 1.0 + 0.0j}
    for p in creations:
        op = multiply_sums(op, terms_to_sum(parity_creation(p, n_orbs)), n_orbs)
    for q in annihilations:
        op = multiply_sums(op, terms_to_sum(parity_annihilation(q, n_orbs)), n_orbs)
    return op


def map_hamiltonian(ham) -> QubitHamiltonian:
    """Parity-map a FermionHamiltonian onto qubits.

    The 1/2 prefactor of the two-body sum is applied here; h2 values are
    stored unscaled.  Like terms are combined and coefficients below the
    cutoff are dropped.
    """
    n = ham.n_orbs
    ann = [terms_to_sum(parity_annihilation(j, n)) for j in range(n)]
    crt = [terms_to_sum(parity_creation(j, n)) for j in range(n)]
    total: dict[tuple[int, int], complex] = {}

    def accumulate(op: dict, scale: complex):
        for key, c in op.items():
            total[key] = total.get(key, 0.0) + scale * c

    for (p, q), value in ham.h1.items():
        accumulate(multiply_sums(crt[p], ann[q], n), value)
    for (p, q, r, s), value in ham.h2.items():
        op = multiply_sums(crt[p], crt[q], n)
        op = multiply_sums(op, ann[r], n)
        op = multiply_sums(op, ann[s], n)
        accumulate(op, 0.5 * value)

    terms = sum_to_terms(total, n)
    return QubitHamiltonian(n, terms)


# ---------------------------------------------------------------------------
# Tapering
# ---------------------------------------------------------------------------

def _drop_bit(mask: int, pos: int) -> int:
    low = mask & ((1 << pos) - 1)
    high = (mask >> (pos + 1)) << pos
    return high | low


def drop_qubits(string: PauliString, positions) -> PauliString:
    """Remove qubits (must be I or Z there is NOT checked here) and compact indices."""
    x, z = string.x_mask, string.z_mask
    for pos in sorted(positions, reverse=True):
        x = _drop_bit(x, pos)
        z = _drop_bit(z, pos)
    return PauliString(string.n_qubits - len(positions), x, z)


def taper_terms(terms, n_qubits: int, sector: TaperSector,
                parity_qubit: int, last_qubit: int) -> list[PauliTerm]:
    """Replace Z on the two symmetry qubits by sector eigenvalues and drop them."""
    if parity_qubit == last_qubit:
        raise ValueError("tapered qubits must be distinct")
    eigen = {parity_qubit: sector.whole_system_parity, last_qubit: sector.particle_parity}
    out = []
    for t in terms:
        s = t.string
        coeff = complex(t.coeff)
        for q, val in eigen.items():
            if s.x_mask >> q & 1:
                raise SymmetryViolationError(
                    f"term {s.label()} acts with X/Y on tapered qubit {q}"
                )
            if s.z_mask >> q & 1:
                coeff *= val
        out.append(PauliTerm(coeff, drop_qubits(s, [parity_qubit, last_qubit])))
    return out


def taper(ham: QubitHamiltonian, sector: TaperSector,
          parity_qubit: int, last_qubit: int) -> QubitHamiltonian:
    """Taper the two symmetry qubits off a Hamiltonian (N_q -> N_q - 2)."""
    terms = taper_terms(ham.terms, ham.n_qubits, sector, parity_qubit, last_qubit)
    return QubitHamiltonian(ham.n_qubits - 2, terms)


def sector_from_reference(occupations, parity_qubit: int, last_qubit: int) -> TaperSector:
    """Sector eigenvalues read off the parity-encoded reference determinant."""
    bits = parity_encode_bits(occupations)
    return TaperSector(
        whole_system_parity=1 - 2 * bits[parity_qubit],
        particle_parity=1 - 2 * bits[last_qubit],
    )


def taper_reference_bits(occupations, parity_qubit: int, last_qubit: int) -> list[int]:
    """Parity-encoded reference bits with the tapered positions removed."""
    bits = parity_encode_bits(occupations)
    return [b for q, b in enumerate(bits) if q not in (parity_qubit, last_qubit)]


# ---------------------------------------------------------------------------
# Commuting-set partitioning
# ---------------------------------------------------------------------------

def partition_commuting(ham: QubitHamiltonian) -> list[list[PauliTerm]]:
    """Partition terms into mutually commuting groups.

    Greedy sequential coloring of the anticommutation graph; vertices are
    visited in descending |coeff| order (ties broken by the canonical string
    order) so the result is deterministic.
    """
    order = sorted(
        ham.terms, key=lambda t: (-abs(t.coeff), t.string.sort_key())
    )
    groups: list[list[PauliTerm]] = []
    for term in order:
        for group in groups:
            if all(term.string.commutes_with(other.string) for other in group):
                group.append(term)
                break
        else:
            groups.append([term])
    return groups
