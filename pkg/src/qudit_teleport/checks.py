"""Invariant suites shared by the ``verify`` command and the test-suite.

Each check returns the largest deviation it observed; callers compare against
a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import protocols
from .channels import ChannelSpec, build_channel, local_product_unitary, random_global_unitary
from .measure import Outcome
from .statevec import StateVector, apply_local, random_state, unitarity_error
from .weyl import BellLabel, all_labels, gram, phi00, phi_basis, weyl_u, weyl_v


@dataclass
class PropertyResult:
    name: str
    max_deviation: float
    tolerance: float
    cases: int

    @property
    def passed(self) -> bool:
        return bool(self.max_deviation <= self.tolerance)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "max_deviation": float(self.max_deviation),
            "tolerance": self.tolerance,
            "passed": self.passed,
            "cases": self.cases,
        }


def basis_orthonormality(d: int) -> float:
    g = gram(phi_basis(d))
    return float(np.max(np.abs(g - np.eye(d * d))))


def weyl_unitarity(d: int) -> float:
    errs = [unitarity_error(f(d, lab).matrix) for lab in all_labels(d) for f in (weyl_u, weyl_v)]
    return max(errs)


def ricochet(d: int) -> float:
    base = phi00(d)
    dev = 0.0
    for lab in all_labels(d):
        left = apply_local(base, weyl_u(d, lab), [0])
        right = apply_local(base, weyl_v(d, lab), [1])
        dev = max(dev, float(np.max(np.abs(left.amps - right.amps))))
    return dev


def example_specs(d: int, n: int, seed: int = 0) -> dict[str, ChannelSpec]:
    """One channel per protocol, with Haar-random distortions."""
    ups = random_global_unitary(d, n, seed + 1)
    om = random_global_unitary(d, n, seed + 2)
    return {
        "Dn": ChannelSpec(d, n, "TPS"),
        "Dpn": ChannelSpec(d, n, "GES", upsilon=ups),
        "Dppn": ChannelSpec(d, n, "GES2", upsilon=ups, omega=om),
    }


def uniform_outcomes(d: int, n: int, inputs: int = 3, seed: int = 0) -> float:
    dev = 0.0
    target = 1.0 / d ** (2 * n)
    for i in range(inputs):
        psi = random_state(d, n, seed + 100 + i)
        for proto, spec in example_specs(d, n, seed + i).items():
            probs = np.array([p for _, p, _ in protocols.branches(proto, psi, spec)])
            dev = max(dev, float(np.max(np.abs(probs - target))))
    return dev


def faithfulness(d: int, n: int, inputs: int = 3, seed: int = 0) -> float:
    """``1 - fidelity`` over every outcome branch, after Bob's corrections."""
    dev = 0.0
    for i in range(inputs):
        psi = random_state(d, n, seed + 200 + i)
        for proto, spec in example_specs(d, n, seed + i).items():
            for outcome, _, state in protocols.branches(proto, psi, spec):
                fixed = protocols.apply_corrections(state, outcome)
                dev = max(dev, 1.0 - protocols.fidelity(psi, fixed))
    return dev


def no_signaling(d: int, n: int, inputs: int = 2, seed: int = 0) -> float:
    dev = 0.0
    mixed = np.eye(d**n) / d**n
    for i in range(inputs):
        psi = random_state(d, n, seed + 300 + i)
        for proto, spec in example_specs(d, n, seed + i).items():
            rho = protocols.bob_average_density(proto, psi, spec)
            dev = max(dev, float(np.max(np.abs(rho - mixed))))
    return dev


def _overlap_gap(a: StateVector, b: StateVector) -> float:
    return 1.0 - protocols.fidelity(a, b)


def transpose_label(label: BellLabel, d: int) -> BellLabel:
    """Label of ``V(k,l)^T`` up to phase: ``(k, -l mod d)``."""
    return BellLabel(label.k, (-label.l) % d)


def _add(a: BellLabel, b: BellLabel, d: int) -> BellLabel:
    return BellLabel((a.k + b.k) % d, (a.l + b.l) % d)


def reduction_local_upsilon(d: int, n: int, seed: int = 0) -> float:
    """Dpn with a Weyl-product Upsilon against Dn over the equivalent offset channel.

    ``Upsilon = V(p_1) x ... x V(p_n)`` on Alice's side equals the Bell-pair channel
    with offsets ``transpose_label(p_i)``.  Outcome ``L`` of Dpn then matches
    outcome ``L + offset`` of Dn, with Bob holding the same state.
    """
    rng = np.random.default_rng(seed)
    parts = [BellLabel(int(rng.integers(d)), int(rng.integers(d))) for _ in range(n)]
    offsets = tuple(transpose_label(p, d) for p in parts)
    ges = ChannelSpec(d, n, "GES", upsilon=local_product_unitary([weyl_v(d, p) for p in parts]))
    tps = ChannelSpec(d, n, "TPS", offsets)
    dev = _overlap_gap(build_channel(ges), build_channel(tps))
    psi = random_state(d, n, seed + 400)
    dn = {o: (p, s) for o, p, s in protocols.branches("Dn", psi, tps, prerotate=False)}
    for outcome, p, state in protocols.branches("Dpn", psi, ges):
        shifted = Outcome(tuple(_add(lab, off, d) for lab, off in zip(outcome.labels, offsets)))
        p_dn, s_dn = dn[shifted]
        dev = max(dev, abs(p - p_dn), _overlap_gap(state, s_dn))
    # A generic local-product Upsilon still leaves Bob with the Dn state for the same label.
    generic = local_product_unitary([random_global_unitary(d, 1, seed + 500 + i).matrix for i in range(n)])
    ges_generic = ChannelSpec(d, n, "GES", upsilon=generic)
    plain = {o: s for o, _, s in protocols.branches("Dn", psi, ChannelSpec(d, n, "TPS"))}
    for outcome, _, state in protocols.branches("Dpn", psi, ges_generic):
        dev = max(dev, _overlap_gap(state, plain[outcome]))
    return dev


def transcripts_gap(a: protocols.Transcript, b: protocols.Transcript) -> float:
    """Largest difference between two transcripts; ``inf`` if discrete fields differ."""
    if a.outcome != b.outcome or a.classical_message != b.classical_message:
        return float("inf")
    return max(
        float(np.max(np.abs(a.bob_pre_correction.amps - b.bob_pre_correction.amps))),
        float(np.max(np.abs(a.bob_post_correction.amps - b.bob_post_correction.amps))),
        abs(a.fidelity - b.fidelity),
        abs(a.probability - b.probability),
    )


def reduction_identity_omega(d: int, n: int, seed: int = 0, runs: int = 5) -> float:
    ups = random_global_unitary(d, n, seed + 600)
    ges = ChannelSpec(d, n, "GES", upsilon=ups)
    ges2 = ChannelSpec(d, n, "GES2", upsilon=ups, omega=local_product_unitary([np.eye(d)] * n))
    dev = 0.0
    for r in range(runs):
        psi = random_state(d, n, seed + 700 + r)
        dev = max(dev, transcripts_gap(protocols.run_dppn(psi, ges2, seed + r), protocols.run_dpn(psi, ges, seed + r)))
    return dev


def reduction_local_omega(d: int, n: int, seed: int = 0, runs: int = 5) -> float:
    """Dppn with ``Omega = V(o_1) x ... x V(o_n)`` is Dpn over the Xi channel with offsets ``o``."""
    rng = np.random.default_rng(seed + 800)
    offs = tuple(BellLabel(int(rng.integers(d)), int(rng.integers(d))) for _ in range(n))
    ups = random_global_unitary(d, n, seed + 801)
    ges2 = ChannelSpec(d, n, "GES2", upsilon=ups, omega=local_product_unitary([weyl_v(d, o) for o in offs]))
    ges = ChannelSpec(d, n, "GES", offs, upsilon=ups)
    dev = _overlap_gap(build_channel(ges2), build_channel(ges))
    for r in range(runs):
        psi = random_state(d, n, seed + 900 + r)
        dev = max(dev, transcripts_gap(protocols.run_dppn(psi, ges2, seed + r), protocols.run_dpn(psi, ges, seed + r)))
    return dev
