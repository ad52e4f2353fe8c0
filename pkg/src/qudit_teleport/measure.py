"""Projective measurement of qudit pairs in the product generalized-Bell basis."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import GlobalUnitary
from .statevec import StateVector, apply_matrix
from .weyl import BellLabel, as_label, phi_matrix

Pair = tuple[int, int]


@dataclass(frozen=True)
class Outcome:
    labels: tuple[BellLabel, ...]

    @classmethod
    def from_dits(cls, dits: Sequence[int]) -> Outcome:
        if len(dits) % 2:
            raise ValueError("outcome needs an even number of dits")
        return cls(tuple(BellLabel(dits[i], dits[i + 1]) for i in range(0, len(dits), 2)))

    @property
    def dits(self) -> tuple[int, ...]:
        return tuple(x for lab in self.labels for x in lab)

    def check(self, d: int, n: int) -> Outcome:
        if len(self.labels) != n:
            raise ValueError(f"outcome has {len(self.labels)} labels, expected {n}")
        for lab in self.labels:
            as_label(lab, d)
        return self

    def index(self, d: int) -> int:
        idx = 0
        for lab in self.labels:
            idx = idx * d * d + lab.k * d + lab.l
        return idx

    def __str__(self) -> str:
        return ",".join(map(str, self.dits))


@dataclass(frozen=True, eq=False)
class MeasurementResult:
    outcome: Outcome
    probability: float
    post_state: StateVector


def all_outcomes(d: int, n: int) -> list[Outcome]:
    """Every outcome, ordered to match :meth:`Outcome.index` (row-major over ``k1 l1 k2 l2 ...``)."""
    labels = [BellLabel(k, l) for k in range(d) for l in range(d)]
    return [Outcome(combo) for combo in itertools.product(labels, repeat=n)]


def _validate_pairs(m: int, pairs: Sequence[Pair]) -> tuple[list[int], list[int]]:
    flat = [int(p) for pair in pairs for p in pair]
    if any(len(pair) != 2 for pair in pairs):
        raise ValueError("each pair must have exactly two positions")
    if len(set(flat)) != len(flat):
        raise ValueError(f"pairs overlap: {list(pairs)}")
    for p in flat:
        if not 0 <= p < m:
            raise ValueError(f"position {p} out of range for {m} qudits")
    if len(flat) == m:
        raise ValueError("at least one qudit must remain unmeasured")
    rest = [q for q in range(m) if q not in set(flat)]
    return flat, rest


def branch_amplitudes(joint: StateVector, pairs: Sequence[Pair]) -> np.ndarray:
    """Unnormalized residuals for every outcome, shape ``(d**(2n), d**rest)``.

    Row ``i`` is ``<Phi_L1|...<Phi_Ln| joint`` for the outcome with index ``i``,
    expressed over the unmeasured qudits in ascending order.
    """
    flat, rest = _validate_pairs(joint.m, pairs)
    d, n = joint.d, len(pairs)
    basis = phi_matrix(d).conj()
    psi = np.moveaxis(joint.tensor(), flat, list(range(2 * n)))
    psi = psi.reshape((d * d,) * n + (d ** len(rest),))
    for axis in range(n):
        psi = np.moveaxis(np.tensordot(basis, psi, axes=([1], [axis])), 0, axis)
    return psi.reshape(d ** (2 * n), -1)


def project_outcome(
    joint: StateVector, pairs: Sequence[Pair], outcome: Outcome
) -> tuple[float, StateVector | None]:
    """Probability of ``outcome`` and the normalized state left on the other qudits.

    A zero-probability outcome returns ``(0.0, None)``.
    """
    flat, rest = _validate_pairs(joint.m, pairs)
    outcome.check(joint.d, len(pairs))
    d = joint.d
    psi = np.moveaxis(joint.tensor(), flat, list(range(len(flat))))
    psi = psi.reshape(-1, d ** len(rest))
    bra = np.array([1.0 + 0j])
    for lab in outcome.labels:
        bra = np.kron(bra, phi_basis_state(d, lab).conj())
    residual = bra @ psi
    weight = float(np.vdot(residual, residual).real)
    if weight <= 1e-300:
        return 0.0, None
    return weight, StateVector(d, len(rest), residual / np.sqrt(weight))


def phi_basis_state(d: int, label: BellLabel) -> np.ndarray:
    lab = as_label(label, d)
    return phi_matrix(d)[lab.k * d + lab.l]


def distribution_array(joint: StateVector, pairs: Sequence[Pair]) -> np.ndarray:
    branches = branch_amplitudes(joint, pairs)
    return np.sum(np.abs(branches) ** 2, axis=1)


def outcome_distribution(joint: StateVector, pairs: Sequence[Pair]) -> dict[Outcome, float]:
    probs = distribution_array(joint, pairs)
    return dict(zip(all_outcomes(joint.d, len(pairs)), probs.tolist()))


def _draw(probs: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    idx = min(idx, len(probs) - 1)
    while probs[idx] <= 0:  # guard against landing on a zero-width bin at the boundary
        idx -= 1
    return idx


def sample_product_phi(
    joint: StateVector, pairs: Sequence[Pair], rng: np.random.Generator
) -> MeasurementResult:
    branches = branch_amplitudes(joint, pairs)
    probs = np.sum(np.abs(branches) ** 2, axis=1)
    idx = _draw(probs, rng)
    outcome = all_outcomes(joint.d, len(pairs))[idx]
    residual = branches[idx] / np.sqrt(probs[idx])
    n_rest = joint.m - 2 * len(pairs)
    return MeasurementResult(outcome, float(probs[idx]), StateVector(joint.d, n_rest, residual))


def measure_xi(
    joint: StateVector,
    alice_positions: Sequence[int],
    upsilon: GlobalUnitary,
    rng: np.random.Generator,
) -> MeasurementResult:
    """Measure in the basis ``{Upsilon_A |Theta_L>}``.

    ``alice_positions`` lists the n A-qudits followed by the n X-qudits; pair i
    is ``(A_i, X_i)``.
    """
    n = len(alice_positions) // 2
    if len(alice_positions) != 2 * n or upsilon.n != n:
        raise ValueError("alice_positions must hold n A-qudits then n X-qudits, matching upsilon")
    a_pos, x_pos = list(alice_positions[:n]), list(alice_positions[n:])
    rotated = apply_matrix(joint, upsilon.matrix.conj().T, a_pos)
    return sample_product_phi(rotated, list(zip(a_pos, x_pos)), rng)
