"""Kraus channels on single qubits and their action inside a register."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qmath import basis_ket, dagger, kron, num_qubits

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class KrausChannel:
    """A channel rho -> sum_k E_k rho E_k^dagger given by its Kraus operators."""

    ops: tuple[np.ndarray, ...]
    label: str = ""

    def __post_init__(self):
        if not self.ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shapes = {op.shape for op in self.ops}
        if len(shapes) != 1:
            raise ValueError(f"Kraus operators have mixed shapes {shapes}")

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def completeness_error(self) -> float:
        """max |sum_k E_k^dagger E_k - I| entrywise."""
        total = sum(dagger(op) @ op for op in self.ops)
        return float(np.abs(total - np.eye(self.dim)).max())


def _check_probability(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


def amplitude_damping(gamma: float) -> KrausChannel:
    """E1 = |0><0| + sqrt(1-gamma)|1><1|,  E2 = sqrt(gamma)|0><1|."""
    _check_probability("gamma", gamma)
    e1 = np.diag([1.0, np.sqrt(1.0 - gamma)]).astype(complex)
    e2 = np.zeros((2, 2), dtype=complex)
    e2[0, 1] = np.sqrt(gamma)
    return KrausChannel((e1, e2), label=f"amplitude_damping({gamma:g})")


def dephasing(p: float) -> KrausChannel:
    # p = 1 removes all off-diagonal terms.
    _check_probability("p", p)
    return KrausChannel(
        (np.sqrt(1.0 - p / 2) * I2, np.sqrt(p / 2) * SIGMA_Z), label=f"dephasing({p:g})"
    )


def depolarizing(p: float) -> KrausChannel:
    # rho -> (1 - p) rho + p I/2
    _check_probability("p", p)
    ops = (np.sqrt(1.0 - 3 * p / 4) * I2,) + tuple(
        np.sqrt(p / 4) * s for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)
    )
    return KrausChannel(ops, label=f"depolarizing({p:g})")


def expanded_kraus(channel: KrausChannel, n_qubits: int, targets: Sequence[int]) -> list[np.ndarray]:
    """Register-wide Kraus operators: one per choice of single-qubit operator
    on each target, identities on the remaining qubits.

    For two targets this is the four-term expansion
    (E_a x E_b x I x I) rho (E_a x E_b x I x I)^dagger.
    """
    targets = list(targets)
    if not targets:
        raise ValueError("target list is empty")
    if len(set(targets)) != len(targets):
        raise ValueError(f"targets {targets} are not distinct")
    if not all(1 <= t <= n_qubits for t in targets):
        raise ValueError(f"targets {targets} outside qubits 1..{n_qubits}")
    if channel.dim != 2:
        raise ValueError("only single-qubit channels can be embedded")

    expanded = []
    for combo in itertools.product(channel.ops, repeat=len(targets)):
        factors = [I2] * n_qubits
        for t, op in zip(targets, combo):
            factors[t - 1] = op
        expanded.append(kron(*factors))
    return expanded


def apply(channel: KrausChannel, rho: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Apply a single-qubit channel independently to each target qubit (1-based)."""
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho.shape[0])
    out = np.zeros_like(rho)
    for k in expanded_kraus(channel, n, targets):
        out += k @ rho @ dagger(k)
    return out


# Term lists (coefficient, ket, bra) of the eight damped states as published.
# Entries are transcribed as listed, including the sign of every cross term.
def _reference_terms(i: int, g: float) -> list[tuple[float, str, str]]:
    a = (1 - g) / 2
    if i in (1, 2):
        s = 1 if i == 1 else -1
        return [
            (0.5, "0000", "0000"),
            (s * a, "1111", "0000"),
            (g**2 / 2, "0011", "0011"),
            ((1 - g) * g / 2, "0111", "0111"),
            ((1 - g) * g / 2, "1011", "1011"),
            (s * a, "0000", "1111"),
            ((1 - 2 * g + g**2) / 2, "1111", "1111"),
        ]
    if i in (3, 4, 5, 6):
        s = 1 if i in (3, 5) else -1
        x, y = ("0100", "1011") if i in (3, 4) else ("0111", "1000")
        return [
            (g / 2, "0000", "0000"),
            (g / 2, "0011", "0011"),
            (a, x, x),
            (s * a, y, x),
            (s * a, x, y),
            (a, y, y),
        ]
    if i in (7, 8):
        s = 1 if i == 7 else -1
        return [
            (g**2 / 2, "0000", "0000"),
            (0.5, "0011", "0011"),
            (s * (g - 1) / 2, "1100", "0011"),
            ((1 - g) * g / 2, "0100", "0100"),
            ((1 - g) * g / 2, "1000", "1000"),
            (s * (g - 1) / 2, "0011", "1100"),
            ((1 - 2 * g + g**2) / 2, "1100", "1100"),
        ]
    raise ValueError(f"state index must be 1..8, got {i!r}")


def reference_rho_prime(i: int, gamma: float) -> np.ndarray:
    """Published closed form of the i-th damped state (16x16), term by term.

    Kept verbatim so it can be audited against ``apply``; it is not used to
    drive any computation.
    """
    rho = np.zeros((16, 16), dtype=complex)
    for coeff, ket, bra in _reference_terms(i, gamma):
        rho += coeff * np.outer(basis_ket(ket), basis_ket(bra))
    return rho
