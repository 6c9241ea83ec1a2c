"""Noisy pipeline: Dennis' rotated Bell measurement, Charlie's two-class
split, the proposed POVM families, error rates and the audit of the
published closed forms against direct operator-sum evaluation.

Only the branch where Dennis announces ``00`` is worked out in closed form;
the numeric path accepts any announced outcome and any Bob branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .channels import amplitude_damping, apply, reference_rho_prime
from .protocol import BELL_NAMES, DennisOutcome, lambda_entry, branch_labels
from .qmath import basis_ket, fidelity, is_psd, kron, partial_trace, projector

PSD_TOL = 1e-10
FLAG_TOL = 1e-9
ZERO_WEIGHT = 1e-14

M1 = np.diag([1.0, 0.0, 0.0, 1.0]).astype(complex)
M2 = np.diag([0.0, 1.0, 1.0, 0.0]).astype(complex)
CLASSIFIERS = {"M1": M1, "M2": M2}
# Basis indices of the 2-dim block each classifier keeps: {|00>,|11>} and {|01>,|10>}.
SUBSPACE = {"M1": (0, 3), "M2": (1, 2)}


@dataclass(frozen=True)
class GenMeasurement:
    """Rotated Bell projector: ``alpha|00> +- beta|11>`` (P kinds) or
    ``alpha|01> +- beta|10>`` (Q kinds)."""

    alpha: complex
    beta: complex
    kind: DennisOutcome = DennisOutcome.P1

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")

    @classmethod
    def bell(cls, kind: DennisOutcome = DennisOutcome.P1) -> "GenMeasurement":
        s = 1 / math.sqrt(2)
        return cls(s, s, kind)

    @classmethod
    def from_alpha(cls, alpha: float, phase: float = 0.0, kind: DennisOutcome = DennisOutcome.P1):
        """Real ``alpha`` in [0, 1] and ``beta = sqrt(1 - alpha^2) e^{i phase}``."""
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
        beta = math.sqrt(max(1.0 - alpha * alpha, 0.0))
        return cls(alpha, beta * complex(math.cos(phase), math.sin(phase)) if phase else beta, kind)

    def vector(self) -> np.ndarray:
        lo, hi = ("00", "11") if self.kind in (DennisOutcome.P1, DennisOutcome.P2) else ("01", "10")
        sign = 1 if self.kind in (DennisOutcome.P1, DennisOutcome.Q1) else -1
        return self.alpha * basis_ket(lo) + sign * self.beta * basis_ket(hi)

    def with_kind(self, kind: DennisOutcome) -> "GenMeasurement":
        return GenMeasurement(self.alpha, self.beta, kind)


def measurement_operator(m: GenMeasurement) -> np.ndarray:
    return projector(m.vector())


def dennis_project(rho_prime: np.ndarray, m: GenMeasurement) -> tuple[np.ndarray | None, float]:
    """Charlie's state after Dennis' outcome: tr_{3,4}[(I x P) rho' (I x P)].

    Returns the normalized 4x4 state and the branch probability, or
    ``(None, 0.0)`` for a branch that cannot occur.
    """
    op = kron(np.eye(4), measurement_operator(m))
    rho00 = partial_trace(op @ rho_prime @ op.conj().T, 4, {3, 4})
    p = float(np.trace(rho00).real)
    if p < ZERO_WEIGHT:
        return None, 0.0
    return rho00 / p, p


def classify(rho00: np.ndarray, which: str, prior: float = 0.5) -> tuple[np.ndarray | None, float]:
    """Project onto one of Charlie's two classes.

    Returns the normalized class state and its weight ``prior * tr(M rho M)``.
    """
    m = CLASSIFIERS[which]
    kept = m @ rho00 @ m
    tr = float(np.trace(kept).real)
    if tr < ZERO_WEIGHT:
        return None, prior * max(tr, 0.0)
    return kept / tr, prior * tr


@dataclass(frozen=True)
class Member:
    label: int
    state: np.ndarray | None
    weight: float

    def unnormalized(self) -> np.ndarray:
        if self.state is None:
            return np.zeros((4, 4), dtype=complex)
        return self.weight * self.state


@dataclass(frozen=True)
class Ensemble:
    members: tuple[Member, ...]
    classifier: str

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(mb.label for mb in self.members)

    def weight(self, label: int) -> float:
        return next(mb.weight for mb in self.members if mb.label == label)

    def scaled(self, factor: float) -> "Ensemble":
        return Ensemble(tuple(Member(m.label, m.state, factor * m.weight) for m in self.members), self.classifier)


def branch_slots(bob: str = "Z") -> tuple[int, int, int, int]:
    """Branch labels ordered by Charlie's Bell state when Dennis finds phi+.

    For Bob = Z (or I) this is (1, 2, 5, 6); the POVM elements U1, U2, U5, U6
    attach to the slots in this order.
    """
    order = {}
    for label in branch_labels(bob):
        for _, charlie, dennis in lambda_entry(label).bell_form:
            if dennis == "phi+":
                order[BELL_NAMES.index(charlie)] = label
    return tuple(order[k] for k in sorted(order))


@lru_cache(maxsize=4096)
def _damped(label: int, gamma: float) -> np.ndarray:
    rho = apply(amplitude_damping(gamma), projector(lambda_entry(label).ket), [1, 2])
    rho.setflags(write=False)
    return rho


def damped_state(label: int, gamma: float) -> np.ndarray:
    """rho'_label: the lambda state after damping on qubits 1 and 2."""
    return _damped(label, float(gamma))


def build_ensemble(
    gamma: float,
    m: GenMeasurement,
    which: str,
    branch: str = "Z",
    prior: float = 0.5,
) -> Ensemble:
    members = []
    for label in branch_slots(branch):
        rho00, _ = dennis_project(damped_state(label, gamma), m)
        if rho00 is None:
            members.append(Member(label, None, 0.0))
            continue
        state, w = classify(rho00, which, prior)
        members.append(Member(label, state, w))
    return Ensemble(tuple(members), which)


@dataclass(frozen=True)
class Bound:
    value: float
    clamped: float


def inconclusive_bound(ensemble: Ensemble, n: int | None = None, normalize: bool = False) -> Bound:
    """sqrt(n/(n-1) * sum_{i != j} w_i w_j F(rho_i, rho_j)^2) over ordered pairs.

    States enter normalized; weights as stored unless ``normalize`` rescales
    them to sum to 1. Members with no state (zero weight) contribute nothing.
    """
    members = [m for m in ensemble.members if m.state is not None]
    n = len(ensemble.members) if n is None else n
    weights = [m.weight for m in members]
    if normalize:
        total = sum(weights)
        weights = [w / total for w in weights] if total > 0 else weights
    acc = 0.0
    for i, mi in enumerate(members):
        for j, mj in enumerate(members):
            if i != j:
                acc += weights[i] * weights[j] * fidelity(mi.state, mj.state) ** 2
    value = math.sqrt(n / (n - 1) * max(acc, 0.0))
    return Bound(value, min(value, 1.0))


def povm_U(u: float, labels: Sequence[int] = (1, 2, 5, 6)) -> dict[int, np.ndarray]:
    """U-family on span{|00>, |11>}, elements in the order U1, U2, U5, U6."""
    u1 = 0.5 * np.array([[1 - 2 * u, 1], [1, 1]], dtype=complex)
    u2 = 0.5 * np.array([[1 - 2 * u, -1], [-1, 1]], dtype=complex)
    u5 = np.array([[u, 0], [0, 0]], dtype=complex)
    return dict(zip(labels, (u1, u2, u5, u5.copy())))


def povm_V(v: float, labels: Sequence[int] = (1, 2, 5, 6)) -> dict[int, np.ndarray]:
    """V-family on span{|01>, |10>}, elements in the order V1, V2, V5, V6."""
    v1 = np.array([[0, v], [v, 0]], dtype=complex)
    v5 = 0.5 * np.array([[1, 1 - 2 * v], [1 - 2 * v, 1]], dtype=complex)
    v6 = 0.5 * np.array([[1, -1 - 2 * v], [-1 - 2 * v, 1]], dtype=complex)
    return dict(zip(labels, (v1, v1.copy(), v5, v6)))


@dataclass(frozen=True)
class PovmFamily:
    name: str
    parameter: str
    classifier: str
    build: Callable[..., dict[int, np.ndarray]]


U_FAMILY = PovmFamily("U", "u", "M1", povm_U)
V_FAMILY = PovmFamily("V", "v", "M2", povm_V)


@dataclass(frozen=True)
class FeasibilityRow:
    value: float
    min_eigs: dict[int, float]
    feasible: bool


def psd_scan(family: PovmFamily, grid: Iterable[float], tol: float = PSD_TOL) -> list[FeasibilityRow]:
    rows = []
    for x in grid:
        eigs = {label: is_psd(op, tol)[1] for label, op in family.build(x).items()}
        rows.append(FeasibilityRow(float(x), eigs, all(e >= -tol for e in eigs.values())))
    return rows


def embed(op2: np.ndarray, classifier: str) -> np.ndarray:
    """Place a 2x2 block on the classifier's subspace of the 4x4 space."""
    idx = SUBSPACE[classifier]
    out = np.zeros((4, 4), dtype=complex)
    out[np.ix_(idx, idx)] = op2
    return out


def error_rate(povm: dict[int, np.ndarray], ensemble: Ensemble) -> float:
    """1 - 1/2 sum_i tr[Pi_i rho_i] with rho_i the weighted (unnormalized) class states."""
    if set(povm) != set(ensemble.labels):
        raise ValueError(f"POVM labels {sorted(povm)} do not match ensemble labels {sorted(ensemble.labels)}")
    total = 0.0
    for member in ensemble.members:
        op = povm[member.label]
        if op.shape == (2, 2):
            op = embed(op, ensemble.classifier)
        total += np.trace(op @ member.unnormalized()).real
    return float(1.0 - 0.5 * total)


def reference_er1(u: float, gamma: float) -> float:
    """Published closed form for the U-family error rate (Bell measurement)."""
    g = gamma
    return 0.5 * (1 + (1 - g) / 2 - (1 - g) ** 2 / 4 - u * g - 0.25 * (1 - 2 * u) * (1 + g * g))


def reference_er2(v: float, gamma: float) -> float:
    """Published closed form for the V-family error rate (Bell measurement)."""
    g = gamma
    return 0.25 * (1 - (1 - g) * (1 - 2 * v - 2 * v * g) + g)


def t_bits(er1: float, er2: float) -> float:
    return 4.0 - (er1 + er2)


@dataclass
class DiscriminationReport:
    gamma: float
    alpha: float
    beta: float
    u: float
    v: float
    er1_numeric: float
    er2_numeric: float
    er1_paper: float
    er2_paper: float
    p0_1: float
    p0_2: float
    t_bits_numeric: float
    t_bits_paper: float
    feasible_u: bool
    feasible_v: bool
    min_eigs_u: dict[int, float] = field(default_factory=dict)
    min_eigs_v: dict[int, float] = field(default_factory=dict)
    p0_1_normalized: float = 0.0
    p0_2_normalized: float = 0.0
    discrepancies: list[tuple[str, float, float, float]] = field(default_factory=list)

    def row(self) -> dict:
        return {k: getattr(self, k) for k in REPORT_COLUMNS}


REPORT_COLUMNS = (
    "gamma", "alpha", "beta", "u", "v", "er1_numeric", "er2_numeric", "er1_paper",
    "er2_paper", "p0_1", "p0_2", "t_bits_numeric", "t_bits_paper", "feasible_u", "feasible_v",
)


@dataclass(frozen=True)
class Infeasible:
    gamma: float
    reason: str
    feasible = False


def evaluate(
    gamma: float,
    u: float,
    v: float,
    m: GenMeasurement | None = None,
    branch: str = "Z",
    prior: float = 0.5,
    tol: float = PSD_TOL,
) -> DiscriminationReport:
    """Full report for one (gamma, u, v, alpha) point."""
    m = GenMeasurement.bell() if m is None else m
    slots = branch_slots(branch)
    ens1 = build_ensemble(gamma, m, "M1", branch, prior)
    ens2 = build_ensemble(gamma, m, "M2", branch, prior)
    (fu,) = psd_scan(U_FAMILY, [u], tol)
    (fv,) = psd_scan(V_FAMILY, [v], tol)
    er1 = error_rate(povm_U(u, slots), ens1)
    er2 = error_rate(povm_V(v, slots), ens2)
    r1, r2 = reference_er1(u, gamma), reference_er2(v, gamma)
    report = DiscriminationReport(
        gamma=gamma, alpha=abs(m.alpha), beta=abs(m.beta), u=u, v=v,
        er1_numeric=er1, er2_numeric=er2, er1_paper=r1, er2_paper=r2,
        p0_1=inconclusive_bound(ens1).value, p0_2=inconclusive_bound(ens2).value,
        t_bits_numeric=t_bits(er1, er2), t_bits_paper=t_bits(r1, r2),
        feasible_u=fu.feasible, feasible_v=fv.feasible,
        min_eigs_u=fu.min_eigs, min_eigs_v=fv.min_eigs,
        p0_1_normalized=inconclusive_bound(ens1, normalize=True).value,
        p0_2_normalized=inconclusive_bound(ens2, normalize=True).value,
    )
    for name, num, ref in (("er1", er1, r1), ("er2", er2, r2)):
        if abs(num - ref) > FLAG_TOL:
            report.discrepancies.append((name, num, ref, abs(num - ref)))
    return report


def default_alpha_grid() -> list[float]:
    """alpha in [0, 1] step 0.01, plus 1/sqrt(2) so the Bell point is on the grid."""
    return sorted({round(k / 100, 12) for k in range(101)} | {1 / math.sqrt(2)})


def optimize(
    gamma: float,
    u_grid: Sequence[float],
    v_grid: Sequence[float],
    alpha_grid: Sequence[float],
    tol: float = PSD_TOL,
    branch: str = "Z",
    prior: float = 0.5,
    phase: float = 0.0,
) -> DiscriminationReport | Infeasible:
    """Exhaustive search minimizing er1 + er2 over PSD-feasible (u, v) and alpha.

    Ties go to the smallest u, then smallest v, then largest alpha.
    """
    if not len(u_grid) or not len(v_grid) or not len(alpha_grid):
        return Infeasible(gamma, "empty grid")
    us = sorted(r.value for r in psd_scan(U_FAMILY, u_grid, tol) if r.feasible)
    vs = sorted(r.value for r in psd_scan(V_FAMILY, v_grid, tol) if r.feasible)
    if not us or not vs:
        return Infeasible(gamma, f"no PSD-feasible {'u' if not us else 'v'} on the grid")

    slots = branch_slots(branch)
    us_arr, vs_arr = np.array(us), np.array(vs)
    best = None
    for alpha in alpha_grid:
        m = GenMeasurement.from_alpha(alpha, phase)
        ens1 = build_ensemble(gamma, m, "M1", branch, prior)
        ens2 = build_ensemble(gamma, m, "M2", branch, prior)
        # Both families are affine in their parameter, so the error rate is too.
        e1_0, e1_1 = error_rate(povm_U(0.0, slots), ens1), error_rate(povm_U(1.0, slots), ens1)
        e2_0, e2_1 = error_rate(povm_V(0.0, slots), ens2), error_rate(povm_V(1.0, slots), ens2)
        er1 = e1_0 + us_arr * (e1_1 - e1_0)
        er2 = e2_0 + vs_arr * (e2_1 - e2_0)
        # Round first so float noise cannot break ties against the smaller parameter.
        i, j = int(np.argmin(np.round(er1, 12))), int(np.argmin(np.round(er2, 12)))
        key = (round(float(er1[i] + er2[j]), 12), us[i], vs[j], -alpha)
        if best is None or key < best[0]:
            best = (key, m)
    (_, u, v, _), m = best
    return evaluate(gamma, u, v, m, branch, prior, tol)


# --- published intermediate forms (Bob announced Z, Dennis announced 00) ---


def reference_rho00(i: int, gamma: float, alpha: complex, beta: complex) -> np.ndarray:
    g, a, b = gamma, alpha, beta
    ac, bc = np.conj(a), np.conj(b)
    aa, bb = abs(a) ** 2, abs(b) ** 2
    if i in (1, 2):
        s = 1 if i == 1 else -1
        return np.array([
            [aa + bb * g * g, 0, 0, -s * ac * b * (g - 1)],
            [0, -bb * (g - 1) * g, 0, 0],
            [0, 0, -bb * (g - 1) * g, 0],
            [-s * a * bc * (g - 1), 0, 0, bb * (g - 1) ** 2],
        ], dtype=complex)
    if i in (5, 6):
        s = 1 if i == 5 else -1
        return np.array([
            [g, 0, 0, 0],
            [0, -bb * (g - 1), -s * a * bc * (g - 1), 0],
            [0, -s * ac * b * (g - 1), -aa * (g - 1), 0],
            [0, 0, 0, 0],
        ], dtype=complex)
    raise ValueError(f"no published form for index {i!r}")


def reference_class_state(i: int, which: str, gamma: float, alpha: complex, beta: complex) -> np.ndarray:
    """Published weighted class states rho_i^{M1}, rho_i^{M2} as 4x4 matrices."""
    g, a, b = gamma, alpha, beta
    ac, bc = np.conj(a), np.conj(b)
    aa, bb = abs(a) ** 2, abs(b) ** 2
    out = np.zeros((4, 4), dtype=complex)
    if which == "M1":
        if i in (1, 2):
            s = 1 if i == 1 else -1
            out[0, 0] = (aa + bb * g * g) / 2
            out[0, 3] = s * (1 - g) * ac * b / 2
            out[3, 0] = s * (1 - g) * a * bc / 2
            out[3, 3] = bb * (g - 1) ** 2 / 2
        elif i in (5, 6):
            out[0, 0] = g / 2
        else:
            raise ValueError(f"no published form for index {i!r}")
    elif which == "M2":
        if i in (1, 2):
            out[1, 1] = out[2, 2] = bb * g * (1 - g) / 2
        elif i in (5, 6):
            s = 1 if i == 5 else -1
            out[1, 1] = bb * (1 - g) / 2
            out[1, 2] = s * a * bc * (1 - g) / 2
            out[2, 1] = s * ac * b * (1 - g) / 2
            out[2, 2] = aa * (1 - g) / 2
        else:
            raise ValueError(f"no published form for index {i!r}")
    else:
        raise ValueError(f"unknown classifier {which!r}")
    return out


def reference_eta(i: int, gamma: float, alpha: complex, beta: complex) -> float:
    if i in (1, 2):
        return (abs(alpha) ** 2 + abs(beta) ** 2 * ((gamma - 1) ** 2 + gamma**2)) / 2
    if i in (5, 6):
        return gamma / 2
    raise ValueError(f"no published weight for index {i!r}")


def reference_zeta(i: int, gamma: float, alpha: complex, beta: complex) -> float:
    if i in (1, 2):
        return abs(beta) ** 2 * gamma * (1 - gamma) / 2
    if i in (5, 6):
        return (1 - gamma) / 2
    raise ValueError(f"no published weight for index {i!r}")


# --- audit ledger ---


@dataclass(frozen=True)
class LedgerRow:
    section: str
    gamma: float
    quantity: str
    numeric: float
    reference: float
    delta: float
    flagged: bool


@dataclass
class Ledger:
    rows: list[LedgerRow]
    feasible_sets: dict[str, list[float]]
    tol: float

    def section(self, name: str) -> list[LedgerRow]:
        return [r for r in self.rows if r.section == name]

    def summary(self) -> dict[str, tuple[int, int]]:
        """section -> (passed, flagged)."""
        out: dict[str, tuple[int, int]] = {}
        for r in self.rows:
            p, f = out.get(r.section, (0, 0))
            out[r.section] = (p, f + 1) if r.flagged else (p + 1, f)
        return out


def _matrix_row(section, gamma, quantity, numeric, reference, tol) -> LedgerRow:
    diff = np.abs(numeric - reference)
    k = np.unravel_index(int(np.argmax(diff)), diff.shape)
    delta = float(diff[k])
    # Report the real part of the worst entry; every audited entry is real at
    # real (alpha, beta).
    return LedgerRow(section, gamma, quantity, float(numeric[k].real), float(reference[k].real), delta, delta > tol)


def _scalar_row(section, gamma, quantity, numeric, reference, tol) -> LedgerRow:
    delta = abs(numeric - reference)
    return LedgerRow(section, gamma, quantity, float(numeric), float(reference), float(delta), delta > tol)


AUDIT_MEASUREMENTS = (("bell", 1 / math.sqrt(2), 1 / math.sqrt(2)), ("a0.8", 0.8, 0.6))


def discrepancy_report(
    gamma_grid: Iterable[float],
    tol: float = FLAG_TOL,
    feasibility_grid: Sequence[float] | None = None,
    psd_tol: float = PSD_TOL,
) -> Ledger:
    """Compare every published intermediate against direct evaluation.

    Rows whose deviation exceeds ``tol`` are flagged; nothing here raises on
    a disagreement.
    """
    rows: list[LedgerRow] = []
    for g in gamma_grid:
        g = float(g)
        ch = amplitude_damping(g)
        for i in range(1, 9):
            numeric = apply(ch, projector(lambda_entry(i).ket), [1, 2])
            rows.append(_matrix_row("rho_prime", g, f"rho'_{i}", numeric, reference_rho_prime(i, g), tol))

        for tag, a, b in AUDIT_MEASUREMENTS:
            m = GenMeasurement(a, b)
            for i in (1, 2, 5, 6):
                rho00, _ = dennis_project(damped_state(i, g), m)
                rows.append(_matrix_row("rho00", g, f"rho00_{i}[{tag}]", rho00, reference_rho00(i, g, a, b), tol))
                for which, ref_w, wsec in (("M1", reference_eta, "eta"), ("M2", reference_zeta, "zeta")):
                    state, w = classify(rho00, which)
                    weighted = np.zeros((4, 4), dtype=complex) if state is None else w * state
                    rows.append(_matrix_row(
                        f"rho_{which}", g, f"rho_{i}^{which}[{tag}]", weighted,
                        reference_class_state(i, which, g, a, b), tol,
                    ))
                    rows.append(_scalar_row(wsec, g, f"{wsec}_{i}[{tag}]", w, ref_w(i, g, a, b), tol))

            total = sum(measurement_operator(m.with_kind(k)) for k in DennisOutcome)
            rows.append(_matrix_row("completeness", g, f"P1+P2+Q1+Q2[{tag}]", total, np.eye(4), tol))

        bell = GenMeasurement.bell()
        er1 = error_rate(povm_U(0.0), build_ensemble(g, bell, "M1"))
        er2 = error_rate(povm_V(0.0), build_ensemble(g, bell, "M2"))
        rows.append(_scalar_row("er1", g, "er1(u=0)", er1, reference_er1(0.0, g), tol))
        rows.append(_scalar_row("er2", g, "er2(v=0)", er2, reference_er2(0.0, g), tol))

    grid = feasibility_grid if feasibility_grid is not None else [round(k * 0.005, 12) for k in range(201)]
    feasible = {
        fam.parameter: [r.value for r in psd_scan(fam, grid, psd_tol) if r.feasible] for fam in (U_FAMILY, V_FAMILY)
    }
    return Ledger(rows, feasible, tol)
