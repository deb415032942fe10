"""Shot-sampled expectation values, one measurement setting per commuting group.

The default everywhere else in the package is the exact (infinite-shot)
expectation; this mode exists for realism studies.  Each commuting group is
rotated to a common Z eigenbasis with the group's diagonalizing Clifford,
bitstrings are sampled from the rotated state, and every term's eigenvalue
is read off the parity of its diagonalized support.
"""
from __future__ import annotations

import numpy as np

from .compiler import ExponentialGroup, diagonalize_group
from .pauli import QubitHamiltonian, partition_commuting
from .simulator import StateVector, apply_circuit, expectation


def sampled_expectation(state: StateVector, ham: QubitHamiltonian, shots: int,
                        seed: int | None = 0) -> float:
    """Monte-Carlo estimate of <psi|H|psi> with `shots` samples per group."""
    if shots <= 0:
        return expectation(state, ham)
    rng = np.random.default_rng(seed)
    total = 0.0
    for group_terms in partition_commuting(ham):
        identity = [t for t in group_terms if t.string.is_identity]
        total += sum(float(t.coeff.real) for t in identity)
        nontrivial = [t for t in group_terms if not t.string.is_identity]
        if not nontrivial:
            continue
        # Unit angles so the Clifford's sign on each conjugated string comes
        # back through the diagonalized angle.
        group = ExponentialGroup(ham.n_qubits, [(t.string, 1.0) for t in nontrivial])
        clifford, diag = diagonalize_group(group)
        rotated = apply_circuit(state, clifford)
        probs = np.abs(rotated.amplitudes) ** 2
        probs = probs / probs.sum()
        outcomes = rng.choice(probs.size, size=shots, p=probs)
        for term, (z_string, sign) in zip(nontrivial, diag):
            parities = 1.0 - 2.0 * (np.bitwise_count(outcomes & z_string.z_mask) & 1)
            total += float(term.coeff.real) * sign * float(np.mean(parities))
    return total
