"""Channel quality measures for the eight damped lambda states."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .discrimination import damped_state
from .protocol import lambda_entry
from .qmath import fidelity, projector, von_neumann_entropy

METRICS = ("fidelity", "cl1", "cr")
# Same closed forms for these two groups of states.
GROUP_A = (1, 2, 7, 8)
GROUP_B = (3, 4, 5, 6)


def _xlog2x(x: float) -> float:
    return x * math.log2(x) if x > 1e-12 else 0.0


def fidelity_closed_form(i: int, gamma: float) -> float:
    if i in GROUP_A:
        return math.sqrt(max(1 - gamma + gamma * gamma / 4, 0.0))
    if i in GROUP_B:
        return math.sqrt(max(1 - gamma, 0.0))
    raise ValueError(f"state index must be 1..8, got {i!r}")


def cl1_closed_form(i: int, gamma: float) -> float:
    if not 1 <= i <= 8:
        raise ValueError(f"state index must be 1..8, got {i!r}")
    return abs(1 - gamma)


def cr_closed_form(i: int, gamma: float) -> float:
    if i in GROUP_A:
        g = gamma
        return 0.5 - _xlog2x((1 - g) ** 2 / 2) + _xlog2x((2 - 2 * g + g * g) / 2)
    if i in GROUP_B:
        return 1 - gamma
    raise ValueError(f"state index must be 1..8, got {i!r}")


def fidelity_vs_gamma(i: int, gamma: float) -> tuple[float, float]:
    """(numeric, closed form) fidelity between |lambda_i> and its damped state."""
    numeric = fidelity(projector(lambda_entry(i).ket), damped_state(i, gamma))
    return numeric, fidelity_closed_form(i, gamma)


def l1_coherence(rho: np.ndarray) -> float:
    """Sum of |rho_ij| over i != j in the computational basis."""
    a = np.abs(np.asarray(rho))
    return float(a.sum() - np.trace(a))


def rel_entropy_coherence(rho: np.ndarray) -> float:
    """S(diag(rho)) - S(rho), diag taken in the computational basis."""
    rho = np.asarray(rho)
    return von_neumann_entropy(np.diag(np.diag(rho))) - von_neumann_entropy(rho)


def metric_value(metric: str, i: int, gamma: float) -> tuple[float, float]:
    if metric == "fidelity":
        return fidelity_vs_gamma(i, gamma)
    rho = damped_state(i, gamma)
    if metric == "cl1":
        return l1_coherence(rho), cl1_closed_form(i, gamma)
    if metric == "cr":
        return rel_entropy_coherence(rho), cr_closed_form(i, gamma)
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


@dataclass(frozen=True)
class MetricCurve:
    metric: str
    state_index: int
    samples: tuple[tuple[float, float, float], ...]  # (gamma, numeric, closed form)

    @property
    def max_delta(self) -> float:
        return max((abs(n - c) for _, n, c in self.samples), default=0.0)


def metric_sweep(metric: str, states: Iterable[int], gamma_grid: Sequence[float]) -> list[MetricCurve]:
    grid = [float(g) for g in gamma_grid]
    if not grid:
        raise ValueError("gamma grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("gamma grid must be strictly increasing")
    curves = []
    for i in states:
        samples = tuple((g, *metric_value(metric, i, g)) for g in grid)
        curves.append(MetricCurve(metric, i, samples))
    return curves
