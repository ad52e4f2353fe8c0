"""End-to-end teleportation of an n-qudit state over the three channel families.

``Dn`` uses a tensor product of Bell pairs, ``Dpn`` a channel distorted by a
global unitary on Alice's side, and ``Dppn`` one distorted on both sides.  The
joint register is laid out ``X1..Xn A1 B1 .. An Bn``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .channels import ChannelSpec, bob_frame, build_channel
from .measure import MeasurementResult, Outcome, all_outcomes, branch_amplitudes, measure_xi, sample_product_phi
from .statevec import LocalOperator, StateVector, apply_local, apply_matrix, inner, tensor
from .weyl import as_label, weyl_v

PROTOCOLS = ("Dn", "Dpn", "Dppn")
KIND_FOR = {"Dn": "TPS", "Dpn": "GES", "Dppn": "GES2"}


@dataclass(frozen=True, eq=False)
class Transcript:
    protocol: str
    spec: ChannelSpec
    input_state: StateVector
    outcome: Outcome
    classical_message: "ClassicalMessage"  # noqa: F821 - defined in session
    bob_pre_correction: StateVector
    bob_post_correction: StateVector
    fidelity: float
    seed: int | None
    probability: float
    pre_rotated: bool

    def summary(self) -> dict:
        return {
            "protocol": self.protocol,
            "outcome": str(self.outcome),
            "probability": self.probability,
            "fidelity": self.fidelity,
            "pre_rotated": self.pre_rotated,
        }


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(inner(a, b))


def corrections(outcome: Outcome, d: int) -> list[LocalOperator]:
    """Bob's correction ``V(k_i, l_i)`` for each of his qudits ``B_i``."""
    return [weyl_v(d, lab) for lab in outcome.labels]


def apply_corrections(state: StateVector, outcome: Outcome) -> StateVector:
    for i, op in enumerate(corrections(outcome, state.d)):
        state = apply_local(state, op, [i])
    return state


def layout(n: int) -> tuple[list[int], list[int], list[int]]:
    """Positions of the X, A and B qudits in the joint register."""
    xs = list(range(n))
    As = [n + 2 * i for i in range(n)]
    Bs = [n + 2 * i + 1 for i in range(n)]
    return xs, As, Bs


def check_run(protocol: str, input_state: StateVector, spec: ChannelSpec) -> None:
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")
    if spec.kind != KIND_FOR[protocol]:
        raise ValueError(f"protocol {protocol} needs a {KIND_FOR[protocol]} channel, got {spec.kind}")
    if (input_state.d, input_state.m) != (spec.d, spec.n):
        raise ValueError(
            f"input state (d={input_state.d}, m={input_state.m}) does not match channel (d={spec.d}, n={spec.n})"
        )


def prepare_joint(input_state: StateVector, spec: ChannelSpec) -> StateVector:
    return tensor(input_state, build_channel(spec))


def needs_prerotation(protocol: str, spec: ChannelSpec) -> bool:
    if protocol == "Dppn":
        return True
    return any((o.k, o.l) != (0, 0) for o in spec.offsets)


def bob_prerotate(joint: StateVector, spec: ChannelSpec) -> StateVector:
    """Bob undoes the known operator on his half of the channel (Omega and pair offsets)."""
    _, _, Bs = layout(spec.n)
    return apply_matrix(joint, bob_frame(spec).conj().T, Bs)


def alice_measure(
    joint: StateVector, protocol: str, spec: ChannelSpec, rng: np.random.Generator
) -> MeasurementResult:
    xs, As, _ = layout(spec.n)
    if protocol == "Dn":
        return sample_product_phi(joint, list(zip(As, xs)), rng)
    return measure_xi(joint, As + xs, spec.upsilon, rng)


def run(
    protocol: str,
    input_state: StateVector,
    spec: ChannelSpec,
    rng: int | np.random.Generator,
) -> Transcript:
    from .session import ClassicalMessage

    check_run(protocol, input_state, spec)
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)

    joint = prepare_joint(input_state, spec)
    pre_rotated = needs_prerotation(protocol, spec)
    if pre_rotated:
        joint = bob_prerotate(joint, spec)
    result = alice_measure(joint, protocol, spec, rng)
    message = ClassicalMessage(spec.d, spec.n, result.outcome.dits)
    post = apply_corrections(result.post_state, result.outcome)
    return Transcript(
        protocol=protocol,
        spec=spec,
        input_state=input_state,
        outcome=result.outcome,
        classical_message=message,
        bob_pre_correction=result.post_state,
        bob_post_correction=post,
        fidelity=fidelity(input_state, post),
        seed=None if seed is None else int(seed),
        probability=result.probability,
        pre_rotated=pre_rotated,
    )


def run_dn(input_state: StateVector, spec: ChannelSpec, rng) -> Transcript:
    return run("Dn", input_state, spec, rng)


def run_dpn(input_state: StateVector, spec: ChannelSpec, rng) -> Transcript:
    return run("Dpn", input_state, spec, rng)


def run_dppn(input_state: StateVector, spec: ChannelSpec, rng) -> Transcript:
    return run("Dppn", input_state, spec, rng)


def branches(
    protocol: str, input_state: StateVector, spec: ChannelSpec, *, prerotate: bool = True
) -> list[tuple[Outcome, float, StateVector | None]]:
    """Every outcome with its probability and Bob's (uncorrected) state.

    With ``prerotate=False`` Bob's channel-frame operator is left in place, so
    the states are what his qudits hold straight after Alice's measurement.
    """
    check_run(protocol, input_state, spec)
    joint = prepare_joint(input_state, spec)
    if prerotate and needs_prerotation(protocol, spec):
        joint = bob_prerotate(joint, spec)
    xs, As, _ = layout(spec.n)
    if protocol != "Dn":
        joint = apply_matrix(joint, spec.upsilon.matrix.conj().T, As)
    amps = branch_amplitudes(joint, list(zip(As, xs)))
    out = []
    for outcome, row in zip(all_outcomes(spec.d, spec.n), amps):
        p = float(np.vdot(row, row).real)
        state = StateVector(spec.d, spec.n, row / np.sqrt(p)) if p > 1e-300 else None
        out.append((outcome, p, state))
    return out


def expected_residual(input_state: StateVector, outcome: Outcome) -> StateVector:
    """``V(k_1,l_1)^dag x ... x V(k_n,l_n)^dag |input>``, built independently of the measurement."""
    d = input_state.d
    mats = [weyl_v(d, as_label(lab, d)).matrix.conj().T for lab in outcome.labels]
    return StateVector(d, input_state.m, reduce(np.kron, mats) @ input_state.amps)


def bob_average_density(protocol: str, input_state: StateVector, spec: ChannelSpec) -> np.ndarray:
    """Bob's state averaged over Alice's outcomes, before any message arrives."""
    rho = 0
    for _, p, state in branches(protocol, input_state, spec, prerotate=False):
        if state is not None:
            rho = rho + p * np.outer(state.amps, state.amps.conj())
    return rho
