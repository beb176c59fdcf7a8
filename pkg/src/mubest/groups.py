"""Exact generation of the two-qubit Pauli, Clifford, and restricted Clifford groups.

Group elements are 4x4 unitaries stored modulo global phase in a canonical
form: the first entry of non-negligible modulus (row-major scan) is made
positive real, and entries rounded to a 1e-6 grid serve as the deduplication
key.  Clifford entries live on a lattice with spacing >= 2^-4, so the grid
separates distinct elements with huge margin while absorbing float drift.
"""

import json

import numpy as np

from .errors import ContractViolationError, GroupSizeError
from .linalg import check_unitary, kron

KEY_GRID = 1e6
MODULUS_FLOOR = 1e-8

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.array([[1, 0], [0, -1]], dtype=complex)
P = np.array([[1, 0], [0, 1j]])
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT12 = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
CNOT21 = SWAP @ CNOT12 @ SWAP


def standard_gates():
    """The named gate set, with single-qubit gates also embedded as G x I and I x G."""
    gates = {"X": X, "Y": Y, "Z": Z, "P": P, "H": H, "CNOT12": CNOT12, "CNOT21": CNOT21}
    for name, g in [("H", H), ("P", P), ("X", X), ("Y", Y), ("Z", Z)]:
        gates[name + "1"] = kron(g, I2)
        gates[name + "2"] = kron(I2, g)
    return gates


def canonicalize_phase(u):
    """Strip the global phase: first entry with modulus > 1e-8 becomes positive real."""
    u = check_unitary(u)
    flat = u.ravel()
    pivot = flat[np.argmax(np.abs(flat) > MODULUS_FLOOR)]
    return u * (abs(pivot) / pivot)


def canonical_key(u):
    """Hashable fixed-precision encoding of a phase-canonical unitary."""
    grid = np.rint(np.stack([u.real, u.imag]) * KEY_GRID).astype(np.int64)
    return grid.tobytes()


class UnitaryGroup:
    """An immutable set of phase-canonical unitaries with O(1) membership tests."""

    def __init__(self, elements, generator_labels=()):
        self.elements = list(elements)
        self.generator_labels = list(generator_labels)
        self._keys = {canonical_key(u): i for i, u in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, u):
        return canonical_key(canonicalize_phase(u)) in self._keys

    @property
    def dim(self):
        return self.elements[0].shape[0]


def generate_group(generators, max_size, generator_labels=()):
    """Breadth-first closure of the generators under left multiplication.

    Deduplication is by canonical key.  Raises GroupSizeError if the closure
    would exceed max_size (a symptom of wrong generators or a broken
    canonicalization grid).
    """
    gens = [canonicalize_phase(g) for g in generators]
    dim = gens[0].shape[0]
    identity = np.eye(dim, dtype=complex)
    elements = {canonical_key(identity): identity}
    frontier = [identity]
    while frontier:
        fresh = []
        for u in frontier:
            for g in gens:
                v = canonicalize_phase(g @ u)
                k = canonical_key(v)
                if k not in elements:
                    if len(elements) >= max_size:
                        raise GroupSizeError(
                            f"group closure exceeded max_size={max_size}"
                        )
                    elements[k] = v
                    fresh.append(v)
        frontier = fresh
    return UnitaryGroup(elements.values(), generator_labels)


def clifford_group_2q():
    """The projective two-qubit Clifford group, order 11520."""
    g = standard_gates()
    return generate_group(
        [g["H1"], g["H2"], g["P1"], g["P2"], g["CNOT12"], g["CNOT21"]],
        max_size=11520,
        generator_labels=["H1", "H2", "P1", "P2", "CNOT12", "CNOT21"],
    )


def restricted_clifford_group_2q():
    """The order-960 restricted Clifford subgroup.

    The two generators are composites of standard gates; the written gate
    strings are matrix products read left to right (verified against the
    expected group order).
    """
    g = standard_gates()
    g1 = g["H2"] @ g["CNOT12"] @ g["P1"] @ g["H2"]
    g2 = g["H1"] @ g["P2"] @ g["CNOT12"] @ g["H2"]
    return generate_group(
        [g1, g2], max_size=960, generator_labels=["H2.CNOT12.P1.H2", "H1.P2.CNOT12.H2"]
    )


def pauli_group_projective(n):
    """The projective n-qubit Pauli group, identified with {I,X,Y,Z}^{x n}."""
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    singles = [I2, X, Y, Z]
    if n == 1:
        elements = [canonicalize_phase(p) for p in singles]
    else:
        elements = [canonicalize_phase(kron(a, b)) for a in singles for b in singles]
    return UnitaryGroup(elements, generator_labels=["pauli"])


def stabilizer_of_state(group, psi, tol=1e-8):
    """Subgroup fixing |psi> up to global phase: |<psi|U|psi>| >= 1 - tol."""
    psi = np.asarray(psi, dtype=complex)
    members = [u for u in group if abs(np.vdot(psi, u @ psi)) >= 1 - tol]
    return UnitaryGroup(members, generator_labels=["stabilizer"])


def save_group(group, path):
    """Write a group as a JSON list of matrices (same layout as design files)."""
    data = {
        "format_version": 1,
        "dim": group.dim,
        "order": len(group),
        "generator_labels": group.generator_labels,
        "elements": [
            [[ [z.real, z.imag] for z in row] for row in u] for u in group
        ],
    }
    with open(path, "w") as fh:
        json.dump(data, fh)


def load_group(path, spot_checks=20, rng=None):
    """Load a serialized group; verifies unitarity and closure spot-checks."""
    with open(path) as fh:
        data = json.load(fh)
    elements = []
    for rec in data["elements"]:
        u = np.array([[complex(re, im) for re, im in row] for row in rec])
        elements.append(canonicalize_phase(u))
    group = UnitaryGroup(elements, data.get("generator_labels", ()))
    if len(group) != data["order"]:
        raise ContractViolationError(
            f"group order {len(group)} != recorded {data['order']}"
        )
    rng = np.random.default_rng(rng)
    for _ in range(spot_checks):
        a, b = rng.integers(len(group), size=2)
        if group.elements[a] @ group.elements[b] not in group:
            raise ContractViolationError("loaded group fails closure spot-check")
    return group
