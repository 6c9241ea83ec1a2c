"""Noiseless four-party secret sharing over a shared GHZ state.

Register layout (qubit 1 most significant): qubits 1 and 2 start with Alice
and Bob and end up with Charlie, qubits 3 and 4 belong to Dennis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .channels import I2, SIGMA_X, SIGMA_Z
from .qmath import basis_ket, kron

PAULI_TAGS = ("I", "X", "iY", "Z")
PAULI = {
    "I": I2,
    "X": SIGMA_X,
    "iY": np.array([[0, 1], [-1, 0]], dtype=complex),  # i * sigma_y, real
    "Z": SIGMA_Z,
}
# Bob's operation is carried by a single qudit basis vector |B_k>.
QUDIT_INDEX = {"I": 0, "X": 1, "iY": 2, "Z": 3}

_S = 1 / np.sqrt(2)
BELL_NAMES = ("phi+", "phi-", "psi+", "psi-")
BELL = {
    "phi+": _S * (basis_ket("00") + basis_ket("11")),
    "phi-": _S * (basis_ket("00") - basis_ket("11")),
    "psi+": _S * (basis_ket("01") + basis_ket("10")),
    "psi-": _S * (basis_ket("01") - basis_ket("10")),
}


class DennisOutcome(Enum):
    """Dennis' two classical bits and the projector they announce."""

    P1 = "00"
    P2 = "01"
    Q1 = "10"
    Q2 = "11"

    @property
    def bits(self) -> str:
        return self.value

    @property
    def bell(self) -> str:
        return BELL_NAMES[int(self.value, 2)]

    @classmethod
    def from_bits(cls, bits: str) -> "DennisOutcome":
        return cls(bits)


@dataclass(frozen=True)
class LambdaEntry:
    index: int
    ket: np.ndarray
    op_pairs: tuple[tuple[str, str], tuple[str, str]]
    # (coefficient, Charlie's Bell state, Dennis' Bell state)
    bell_form: tuple[tuple[float, str, str], tuple[float, str, str]]


def _entry(index, bits_a, bits_b, sign, pairs, bell_form):
    ket = _S * (basis_ket(bits_a) + sign * basis_ket(bits_b))
    return LambdaEntry(index, ket, pairs, tuple((c * _S, x, y) for c, x, y in bell_form))


LAMBDA_TABLE: tuple[LambdaEntry, ...] = (
    _entry(1, "0000", "1111", +1, (("I", "I"), ("Z", "Z")), ((1, "phi+", "phi+"), (1, "phi-", "phi-"))),
    _entry(2, "0000", "1111", -1, (("I", "Z"), ("Z", "I")), ((1, "phi+", "phi-"), (1, "phi-", "phi+"))),
    _entry(3, "0100", "1011", +1, (("I", "X"), ("Z", "iY")), ((1, "psi+", "phi+"), (1, "psi-", "phi-"))),
    _entry(4, "0100", "1011", -1, (("I", "iY"), ("Z", "X")), ((1, "psi+", "phi-"), (1, "psi-", "phi+"))),
    _entry(5, "1000", "0111", +1, (("X", "I"), ("iY", "Z")), ((1, "psi+", "phi+"), (-1, "psi-", "phi-"))),
    _entry(6, "1000", "0111", -1, (("X", "Z"), ("iY", "I")), ((1, "psi+", "phi-"), (-1, "psi-", "phi+"))),
    _entry(7, "1100", "0011", +1, (("X", "X"), ("iY", "iY")), ((1, "phi+", "phi+"), (-1, "phi-", "phi-"))),
    _entry(8, "1100", "0011", -1, (("X", "iY"), ("iY", "X")), ((1, "phi+", "phi-"), (-1, "phi-", "phi+"))),
)


def lambda_entry(index: int) -> LambdaEntry:
    if not 1 <= index <= 8:
        raise ValueError(f"lambda index must be 1..8, got {index!r}")
    return LAMBDA_TABLE[index - 1]


def branch_labels(bob: str) -> tuple[int, ...]:
    """Indices of the four lambda states compatible with Bob's announced operation."""
    if bob not in PAULI:
        raise ValueError(f"unknown Pauli tag {bob!r}")
    return tuple(e.index for e in LAMBDA_TABLE if any(b == bob for _, b in e.op_pairs))


def ghz4() -> np.ndarray:
    return _S * (basis_ket("0000") + basis_ket("1111"))


def encode(alice: str, bob: str) -> tuple[int, np.ndarray]:
    """Apply Alice's and Bob's Pauli operations to the GHZ state.

    Returns the index of the matching table entry and the resulting ket.
    Six of the sixteen operation pairs produce the tabulated ket times -1;
    the ket returned is always the physically produced one.
    """
    ket = kron(PAULI[alice], PAULI[bob], I2, I2) @ ghz4()
    for e in LAMBDA_TABLE:
        if (alice, bob) in e.op_pairs:
            if abs(abs(np.vdot(e.ket, ket)) - 1) > 1e-12:
                raise AssertionError(f"table entry {e.index} does not match ({alice}, {bob})")
            return e.index, ket
    raise ValueError(f"unknown operation pair ({alice!r}, {bob!r})")


def bell_decompose(ket: np.ndarray, tol: float = 1e-12) -> list[tuple[tuple[str, str], complex]]:
    """Coefficients of a 4-qubit ket in the product Bell basis (Charlie x Dennis).

    Only terms with magnitude above ``tol`` are returned.
    """
    ket = np.asarray(ket, dtype=complex)
    terms = []
    for c in BELL_NAMES:
        for d in BELL_NAMES:
            coeff = np.vdot(kron(BELL[c], BELL[d]), ket)
            if abs(coeff) > tol:
                terms.append(((c, d), complex(coeff)))
    return terms


def bell_compose(terms) -> np.ndarray:
    return sum(coeff * kron(BELL[c], BELL[d]) for (c, d), coeff in terms)


def _max_entangled(d: int = 4) -> np.ndarray:
    return sum(kron(np.eye(d)[i], np.eye(d)[i]) for i in range(d)) / np.sqrt(d)


def teleport_qudit(chi: np.ndarray) -> tuple[np.ndarray, float]:
    """Teleport a 4-level state by projecting B and C onto the maximally
    entangled state shared by C and C'.

    Returns Charlie's normalized C' state and the probability of the
    projection succeeding (1/16 for every input).
    """
    chi = np.asarray(chi, dtype=complex)
    if chi.shape != (4,):
        raise ValueError("teleport_qudit expects a 4-dimensional ket")
    if abs(np.linalg.norm(chi) - 1) > 1e-12:
        raise ValueError("input qudit state is not normalized")
    psi = _max_entangled(4)
    state = kron(chi, psi)  # B, C, C'
    projected = kron(np.outer(psi, psi.conj()), np.eye(4)) @ state
    p = float(np.vdot(projected, projected).real)
    out = psi.conj() @ projected.reshape(16, 4)
    return out / np.linalg.norm(out), p


def dennis_measure_ideal(ket: np.ndarray, outcome: DennisOutcome) -> tuple[np.ndarray | None, float]:
    """Project Dennis' qubits onto the announced Bell state.

    Returns Charlie's renormalized two-qubit ket and the outcome probability,
    or ``(None, 0.0)`` when the outcome cannot occur.
    """
    amps = np.asarray(ket, dtype=complex).reshape(4, 4)  # rows: Charlie, cols: Dennis
    charlie = amps @ BELL[outcome.bell].conj()
    p = float(np.vdot(charlie, charlie).real)
    if p < 1e-14:
        return None, 0.0
    return charlie / np.sqrt(p), p


def identify_bell(ket2: np.ndarray) -> str:
    """Name of the Bell state a two-qubit ket equals up to phase."""
    overlaps = [abs(np.vdot(BELL[n], ket2)) ** 2 for n in BELL_NAMES]
    best = int(np.argmax(overlaps))
    if abs(overlaps[best] - 1) > 1e-12:
        raise ValueError("state is not a Bell state")
    return BELL_NAMES[best]


@lru_cache(maxsize=None)
def decode_table() -> dict[tuple[str, str, str], str]:
    """(Bob's op, Dennis' Bell state, Charlie's Bell state) -> Alice's op.

    Built only from the tabulated Bell forms, i.e. the knowledge the
    receivers hold before the run.
    """
    table: dict[tuple[str, str, str], str] = {}
    for e in LAMBDA_TABLE:
        for alice, bob in e.op_pairs:
            for _, charlie, dennis in e.bell_form:
                key = (bob, dennis, charlie)
                if table.setdefault(key, alice) != alice:
                    raise AssertionError(f"ambiguous decode for {key}")
    return table


@dataclass(frozen=True)
class DecodeBranch:
    outcome: DennisOutcome
    probability: float
    charlie_bell: str
    bob_decoded: str
    alice_decoded: str


@dataclass(frozen=True)
class IdealRun:
    alice: str
    bob: str
    lambda_index: int
    teleport_probability: float
    branches: tuple[DecodeBranch, ...]

    @property
    def total_probability(self) -> float:
        return sum(b.probability for b in self.branches)

    @property
    def success(self) -> bool:
        return all(b.alice_decoded == self.alice and b.bob_decoded == self.bob for b in self.branches)


def run_ideal(alice: str, bob: str) -> IdealRun:
    """Run one noiseless round for every Dennis outcome with nonzero probability."""
    index, ket = encode(alice, bob)

    chi = np.eye(4, dtype=complex)[QUDIT_INDEX[bob]]
    received, p_tel = teleport_qudit(chi)
    k = int(np.argmax(np.abs(received) ** 2))
    bob_decoded = next(tag for tag, i in QUDIT_INDEX.items() if i == k)

    branches = []
    for outcome in DennisOutcome:
        charlie, p = dennis_measure_ideal(ket, outcome)
        if charlie is None:
            continue
        c = identify_bell(charlie)
        alice_decoded = decode_table()[(bob_decoded, outcome.bell, c)]
        branches.append(DecodeBranch(outcome, p, c, bob_decoded, alice_decoded))
    return IdealRun(alice, bob, index, p_tel, tuple(branches))


@dataclass
class IdealTally:
    pairs_total: int = 0
    pairs_decoded: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)
    runs: list[IdealRun] = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        return self.pairs_decoded / self.pairs_total if self.pairs_total else 0.0


def run_ideal_exhaustive(branch: str | None = None) -> IdealTally:
    """Decode every (Alice, Bob) pair, optionally only those where Bob used ``branch``."""
    tally = IdealTally()
    for alice in PAULI_TAGS:
        for bob in PAULI_TAGS:
            if branch is not None and bob != branch:
                continue
            run = run_ideal(alice, bob)
            tally.runs.append(run)
            tally.pairs_total += 1
            if run.success and abs(run.total_probability - 1) < 1e-12:
                tally.pairs_decoded += 1
            else:
                tally.failures.append((alice, bob))
    return tally
