"""Small dense linear-algebra kernel for qubit registers (dimension <= 16).

States are plain numpy arrays: kets are 1-D complex vectors, operators and
density matrices are square 2-D arrays. Qubit 1 is the most significant bit
of the basis index, so ``basis_ket("0111")`` has its single 1 at index 7.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

HERMITIAN_TOL = 1e-12
# Eigenvalues in [-EIGEN_FLOOR, 0) are rounding noise; anything lower is a bug.
EIGEN_FLOOR = 1e-10
# Eigenvalues below this are dropped before square roots; sqrt(1e-17) ~ 3e-9
# would otherwise leak into fidelities of rank-deficient states.
SQRT_CUTOFF = 1e-12
TRACE_TOL = 1e-9


class NegativeEigenvalueError(ValueError):
    """Raised when a supposedly PSD matrix has an eigenvalue below the floor."""


def basis_ket(bits: str) -> np.ndarray:
    """Computational basis ket for a bit string such as ``"0011"``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def projector(ket: np.ndarray) -> np.ndarray:
    """Density matrix |ket><ket|."""
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def kron(*ops) -> np.ndarray:
    """Kronecker product of any number of vectors or matrices, left to right."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op))
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.abs(m - dagger(m)).max() <= tol


def partial_trace(rho: np.ndarray, qubits_total: int, traced: Iterable[int]) -> np.ndarray:
    """Trace out the given qubits (1-based indices) of a ``qubits_total`` register.

    >>> bell = projector(np.array([1, 0, 0, 1]) / np.sqrt(2))
    >>> np.allclose(partial_trace(bell, 2, {2}), np.eye(2) / 2)
    True
    """
    rho = np.asarray(rho)
    traced = set(traced)
    if rho.shape != (2**qubits_total, 2**qubits_total):
        raise ValueError(f"shape {rho.shape} does not match {qubits_total} qubits")
    if not traced <= set(range(1, qubits_total + 1)):
        raise ValueError(f"traced qubits {sorted(traced)} outside 1..{qubits_total}")

    t = rho.reshape([2] * (2 * qubits_total))
    n = qubits_total
    for q in sorted(traced, reverse=True):
        t = np.trace(t, axis1=q - 1, axis2=n + q - 1)
        n -= 1
    d = 2**n
    return t.reshape(d, d)


def eig_hermitian(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching eigenvector columns."""
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m):
        raise ValueError("matrix is not Hermitian within 1e-12")
    vals, vecs = np.linalg.eigh(m)
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def _floored(vals: np.ndarray) -> np.ndarray:
    lowest = vals.min()
    if lowest < -EIGEN_FLOOR:
        raise NegativeEigenvalueError(f"eigenvalue {lowest:.3e} below -{EIGEN_FLOOR:g}")
    return np.clip(vals, 0.0, None)


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Principal square root of a PSD matrix via its eigendecomposition."""
    vals, vecs = eig_hermitian(m)
    vals = _floored(vals)
    vals[vals < SQRT_CUTOFF] = 0.0
    return (vecs * np.sqrt(vals)) @ dagger(vecs)


def _check_trace(rho: np.ndarray) -> None:
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"density matrix has trace {tr!r}, expected 1")


def entropy_of_spectrum(vals: Iterable[float]) -> float:
    """Shannon entropy in bits with 0 log 0 := 0."""
    p = np.asarray(list(vals), dtype=float)
    p = p[p > SQRT_CUTOFF]
    return float(-(p * np.log2(p)).sum()) if p.size else 0.0


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S(rho) = -sum_j lambda_j log2 lambda_j, in bits."""
    _check_trace(rho)
    vals, _ = eig_hermitian(rho)
    return max(entropy_of_spectrum(_floored(vals)), 0.0)


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Root fidelity tr sqrt(sqrt(rho) sigma sqrt(rho)).

    This is the *unsquared* convention: for a pure ``rho = |psi><psi|`` it
    reduces to sqrt(<psi|sigma|psi>). Evaluated as the trace norm of
    sqrt(rho) sqrt(sigma), which avoids a second matrix square root.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    _check_trace(rho)
    _check_trace(sigma)
    svals = np.linalg.svd(psd_sqrt(rho) @ psd_sqrt(sigma), compute_uv=False)
    return float(min(max(svals.sum(), 0.0), 1.0))


def is_psd(m: np.ndarray, tol: float = EIGEN_FLOOR) -> tuple[bool, float]:
    """Return ``(min_eigenvalue >= -tol, min_eigenvalue)``."""
    vals = np.linalg.eigvalsh(np.asarray(m, dtype=complex))
    lowest = float(vals.min())
    return lowest >= -tol, lowest


def validate_density(rho: np.ndarray, weight: float = 1.0, tol: float = 1e-12) -> None:
    """Raise if ``rho`` is not Hermitian, PSD and of trace ``weight``."""
    if not is_hermitian(rho, tol):
        raise ValueError("density matrix is not Hermitian")
    ok, lowest = is_psd(rho)
    if not ok:
        raise NegativeEigenvalueError(f"density matrix has eigenvalue {lowest:.3e}")
    tr = np.trace(rho).real
    if abs(tr - weight) > tol:
        raise ValueError(f"density matrix trace {tr!r} != {weight!r}")
