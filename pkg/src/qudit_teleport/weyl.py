"""Generalized Bell states and the Weyl (shift/phase) correction operators.

``V(k, l)`` maps ``|j>`` to ``exp(2 pi i j k / d) |j + l mod d>``; ``U(k, l)`` is
its transpose, which is exactly the operator satisfying
``U_A |Phi_00> = V_B |Phi_00>``.  Both are unitary (no ``1/sqrt(d)`` factor).
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .statevec import LocalOperator, StateVector, apply_local, make_state

# Test-only switch: when set, weyl_v flips the sign of one matrix entry.
_fault_active = False


@contextlib.contextmanager
def phase_fault():
    """Temporarily corrupt one phase of ``weyl_v`` (fault-detection drills)."""
    global _fault_active
    previous, _fault_active = _fault_active, True
    try:
        yield
    finally:
        _fault_active = previous


@dataclass(frozen=True, order=True)
class BellLabel:
    k: int
    l: int

    def check(self, d: int) -> BellLabel:
        if not (0 <= self.k < d and 0 <= self.l < d):
            raise ValueError(f"label ({self.k},{self.l}) out of range for d={d}")
        return self

    def __iter__(self):
        return iter((self.k, self.l))

    def __str__(self) -> str:
        return f"({self.k},{self.l})"


def as_label(label, d: int) -> BellLabel:
    if not isinstance(label, BellLabel):
        label = BellLabel(*label)
    return label.check(d)


def mod_add(j: int, l: int, d: int) -> int:
    if not (0 <= j < d and 0 <= l < d):
        raise ValueError(f"digits ({j},{l}) out of range for d={d}")
    return (j + l) % d


def all_labels(d: int) -> list[BellLabel]:
    return [BellLabel(k, l) for k in range(d) for l in range(d)]


@lru_cache(maxsize=None)
def _v_matrix(d: int, k: int, l: int) -> np.ndarray:
    mat = np.zeros((d, d), dtype=complex)
    for j in range(d):
        mat[(j + l) % d, j] = np.exp(2j * np.pi * j * k / d)
    mat.setflags(write=False)
    return mat


def weyl_v(d: int, label) -> LocalOperator:
    k, l = as_label(label, d)
    mat = _v_matrix(d, k, l).copy()
    if _fault_active and (k, l) == (1, 1):
        mat[(0 + l) % d, 0] *= -1
    return LocalOperator(d, 1, mat)


def weyl_u(d: int, label) -> LocalOperator:
    k, l = as_label(label, d)
    return LocalOperator(d, 1, _v_matrix(d, k, l).T.copy())


def phi00(d: int) -> StateVector:
    amps = np.zeros(d * d, dtype=complex)
    amps[[j * d + j for j in range(d)]] = 1.0
    return make_state(d, 2, amps)


def gbs_state(d: int, label) -> StateVector:
    """``|Phi_kl> = V(k,l)`` on the second qudit of ``|Phi_00>``."""
    return apply_local(phi00(d), weyl_v(d, label), [1])


def phi_basis(d: int) -> list[StateVector]:
    if d < 2:
        raise ValueError(f"qudit dimension must be >= 2, got {d}")
    return [gbs_state(d, lab) for lab in all_labels(d)]


def phi_matrix(d: int) -> np.ndarray:
    """Rows are the amplitudes of ``phi_basis(d)``; read-only and cached."""
    return _phi_matrix(d, _fault_active)


@lru_cache(maxsize=None)
def _phi_matrix(d: int, faulted: bool) -> np.ndarray:
    mat = np.array([s.amps for s in phi_basis(d)])
    mat.setflags(write=False)
    return mat


def gram(states: list[StateVector]) -> np.ndarray:
    mat = np.array([s.amps for s in states])
    return mat.conj() @ mat.T
