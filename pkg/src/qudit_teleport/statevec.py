"""Dense state vectors and operators over registers of qudits.

Basis index ``x`` of an ``m``-qudit register encodes the digits
``(j_0, ..., j_{m-1})`` big-endian: ``x = sum_t j_t * d**(m-1-t)``, so qudit 0
is the most significant digit.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class StateVector:
    d: int
    m: int
    amps: np.ndarray

    @property
    def dim(self) -> int:
        return self.d**self.m

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per qudit."""
        return self.amps.reshape((self.d,) * self.m)

    def __repr__(self) -> str:
        return f"StateVector(d={self.d}, m={self.m}, amps={np.array2string(self.amps, precision=4)})"


@dataclass(frozen=True, eq=False)
class LocalOperator:
    d: int
    arity: int
    matrix: np.ndarray

    def __post_init__(self):
        side = self.d**self.arity
        if self.matrix.shape != (side, side):
            raise ValueError(
                f"operator matrix must be {side}x{side} for d={self.d}, arity={self.arity}; "
                f"got {self.matrix.shape}"
            )

    def is_unitary(self, atol: float = ATOL) -> bool:
        return unitarity_error(self.matrix) <= atol

    def dagger(self) -> LocalOperator:
        return LocalOperator(self.d, self.arity, self.matrix.conj().T)


def unitarity_error(matrix: np.ndarray) -> float:
    """Max-abs entry of ``M^dagger M - I``."""
    eye = np.eye(matrix.shape[0])
    return float(np.max(np.abs(matrix.conj().T @ matrix - eye)))


def _check_params(d: int, m: int) -> None:
    if d < 2:
        raise ValueError(f"qudit dimension must be >= 2, got {d}")
    if m < 1:
        raise ValueError(f"qudit count must be >= 1, got {m}")


def make_state(d: int, m: int, amps: Sequence[complex]) -> StateVector:
    _check_params(d, m)
    arr = np.asarray(amps, dtype=complex).reshape(-1)
    if arr.size != d**m:
        raise ValueError(f"expected {d**m} amplitudes for d={d}, m={m}; got {arr.size}")
    norm = np.linalg.norm(arr)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return StateVector(d, m, arr / norm)


def basis_state(d: int, digits: Sequence[int]) -> StateVector:
    m = len(digits)
    _check_params(d, m)
    amps = np.zeros(d**m, dtype=complex)
    index = 0
    for j in digits:
        if not 0 <= j < d:
            raise ValueError(f"digit {j} out of range for d={d}")
        index = index * d + j
    amps[index] = 1.0
    return StateVector(d, m, amps)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} vs {b.d}")
    return StateVector(a.d, a.m + b.m, np.kron(a.amps, b.amps))


def tensor_all(states: Sequence[StateVector]) -> StateVector:
    if not states:
        raise ValueError("need at least one state")
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def _check_targets(m: int, targets: Sequence[int]) -> list[int]:
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise ValueError(f"repeated target in {targets}")
    for t in targets:
        if not 0 <= t < m:
            raise ValueError(f"target {t} out of range for {m} qudits")
    return targets


def apply_matrix(s: StateVector, matrix: np.ndarray, targets: Sequence[int]) -> StateVector:
    """Apply a ``d**k`` square matrix to the listed qudits without building the full operator.

    The result is not renormalized; for a unitary matrix the norm is preserved.
    """
    targets = _check_targets(s.m, targets)
    k = len(targets)
    if matrix.shape != (s.d**k, s.d**k):
        raise ValueError(f"matrix shape {matrix.shape} does not match {k} targets at d={s.d}")
    psi = np.moveaxis(s.tensor(), targets, list(range(k)))
    rest = psi.shape[k:]
    psi = (matrix @ psi.reshape(s.d**k, -1)).reshape((s.d,) * k + rest)
    psi = np.moveaxis(psi, list(range(k)), targets)
    return StateVector(s.d, s.m, psi.reshape(-1))


def apply_local(s: StateVector, op: LocalOperator, targets: Sequence[int]) -> StateVector:
    if op.d != s.d:
        raise ValueError(f"operator dimension {op.d} does not match state dimension {s.d}")
    if len(targets) != op.arity:
        raise ValueError(f"operator arity {op.arity} but {len(targets)} targets given")
    return apply_matrix(s, op.matrix, targets)


def inner(a: StateVector, b: StateVector) -> complex:
    if (a.d, a.m) != (b.d, b.m):
        raise ValueError(f"shape mismatch: (d={a.d}, m={a.m}) vs (d={b.d}, m={b.m})")
    return complex(np.vdot(a.amps, b.amps))


def reduced_density(s: StateVector, keep: Sequence[int]) -> np.ndarray:
    """Density matrix of the kept qudits, in the order listed, tracing out the rest."""
    keep = _check_targets(s.m, keep)
    k = len(keep)
    psi = np.moveaxis(s.tensor(), keep, list(range(k))).reshape(s.d**k, -1)
    return psi @ psi.conj().T


def random_state(d: int, m: int, seed: int | np.random.Generator) -> StateVector:
    """Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalized."""
    _check_params(d, m)
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal(d**m) + 1j * rng.standard_normal(d**m)
    return make_state(d, m, amps)


def permute(s: StateVector, order: Sequence[int]) -> StateVector:
    """Reorder qudits so that new qudit ``i`` is old qudit ``order[i]``."""
    order = _check_targets(s.m, order)
    if len(order) != s.m:
        raise ValueError("permutation must list every qudit")
    return StateVector(s.d, s.m, np.transpose(s.tensor(), order).reshape(-1))


def write_state(s: StateVector, path: str | Path) -> None:
    lines = [f"{s.d} {s.m}"]
    lines += [f"{float(a.real)!r} {float(a.imag)!r}" for a in s.amps]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_state(path: str | Path) -> StateVector:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"{path}: empty state file")
    try:
        d, m = (int(t) for t in lines[0].split())
        amps = [complex(float(re), float(im)) for re, im in (ln.split() for ln in lines[1:] if ln.strip())]
    except ValueError as exc:
        raise ValueError(f"{path}: malformed state file ({exc})") from None
    return make_state(d, m, amps)
