"""End-to-end acceptance criteria.

Each test records one PASS/FAIL line, printed in the "acceptance criteria"
section of the pytest summary, then asserts.
"""

import itertools
import time

import numpy as np

from qudit_teleport import checks, protocols
from qudit_teleport.channels import ChannelSpec, random_global_unitary, yeo_chua_upsilon
from qudit_teleport.measure import all_outcomes
from qudit_teleport.protocols import PROTOCOLS, apply_corrections, branches, corrections, fidelity
from qudit_teleport.session import (
    ClassicalMessage,
    Phase,
    SessionError,
    decode_message,
    duplex_pipe,
    encode_message,
    run_session,
)
from qudit_teleport.statevec import random_state

from conftest import ACCEPTANCE_LINES, phase_aligned_distance


def record(number, title, passed, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {number}. {title}: {detail}")
    assert passed, detail


def test_faithfulness():
    start = time.perf_counter()
    worst = 1.0
    runs = 0
    for d, n in itertools.product([2, 3], [1, 2, 3]):
        if d ** (3 * n) > 20000:
            continue
        specs = checks.example_specs(d, n, seed=10 * d + n)
        for proto in PROTOCOLS:
            for i in range(100):
                psi = random_state(d, n, 10_000 * d + 1000 * n + i)
                worst = min(worst, protocols.run(proto, psi, specs[proto], i).fidelity)
                runs += 1
    elapsed = time.perf_counter() - start
    ok = worst >= 1 - 1e-9 and elapsed < 60
    record(1, "faithfulness", ok, f"{runs} runs, min fidelity {worst:.15f}, {elapsed:.1f} s")


SIGMA = {
    (0, 0): np.eye(2),
    (0, 1): np.array([[0, 1], [1, 0]]),
    (1, 1): np.array([[0, 1], [-1, 0]]),
    (1, 0): np.array([[-1, 0], [0, 1]]),
}


def test_qubit_pauli_corrections():
    psi = random_state(2, 1, 2024)
    dist = fid = 0.0
    seen = 0
    for outcome, _, state in branches("Dn", psi, ChannelSpec(2, 1)):
        lab = outcome.labels[0]
        (op,) = corrections(outcome, 2)
        dist = max(dist, phase_aligned_distance(op.matrix, SIGMA[(lab.k, lab.l)]))
        fid = max(fid, abs(fidelity(psi, apply_corrections(state, outcome)) - 1))
        seen += 1
    ok = seen == 4 and dist <= 1e-12 and fid <= 1e-12
    record(2, "qubit Pauli corrections", ok, f"{seen} outcomes, matrix dist {dist:.1e}, |F-1| {fid:.1e}")


def test_uniform_outcome_law():
    dev = 0.0
    for d, n in [(2, 2), (3, 1)]:
        for i in range(10):
            psi = random_state(d, n, 500 + i)
            for proto, spec in checks.example_specs(d, n, seed=i).items():
                probs = np.array([p for _, p, _ in branches(proto, psi, spec)])
                assert len(probs) == d ** (2 * n)
                dev = max(dev, float(np.max(np.abs(probs - 1 / d ** (2 * n)))))
    record(3, "uniform outcome law", dev <= 1e-12, f"max deviation {dev:.1e}")


def test_basis_integrity():
    dev = max(
        max(checks.basis_orthonormality(d), checks.weyl_unitarity(d), checks.ricochet(d)) for d in range(2, 8)
    )
    record(4, "basis integrity d=2..7", dev <= 1e-12, f"max deviation {dev:.1e}")


def test_reduction_chain():
    local_u = max(checks.reduction_local_upsilon(d, n, seed=d + n) for d, n in [(2, 1), (2, 2), (3, 1), (3, 2)])
    ident = max(checks.reduction_identity_omega(d, n, seed=d + n) for d, n in [(2, 1), (2, 2), (3, 1), (3, 2)])
    local_o = max(checks.reduction_local_omega(d, n, seed=d + n) for d, n in [(2, 1), (2, 2), (3, 1), (3, 2)])
    ok = local_u <= 1e-10 and ident == 0 and local_o <= 1e-10
    record(5, "reduction chain", ok, f"local Upsilon {local_u:.1e}, identity Omega {ident:.1e}, local Omega {local_o:.1e}")


def test_yeo_chua():
    rng = np.random.default_rng(77)
    dev = 0.0
    for i in range(5):
        theta, phi = rng.uniform(0, 2 * np.pi, size=2)
        spec = ChannelSpec(2, 2, "GES", upsilon=yeo_chua_upsilon(theta, phi))
        psi = random_state(2, 2, 900 + i)
        for outcome, _, state in branches("Dpn", psi, spec):
            dev = max(dev, abs(fidelity(psi, apply_corrections(state, outcome)) - 1))
    record(6, "Yeo-Chua channel", dev <= 1e-10, f"5 angle pairs, all 16 outcomes each, max |F-1| {dev:.1e}")


def test_no_signaling():
    dev = 0.0
    for d, n in [(2, 2), (3, 1)]:
        psi = random_state(d, n, 31)
        mixed = np.eye(d**n) / d**n
        for proto, spec in checks.example_specs(d, n, seed=5).items():
            rho = protocols.bob_average_density(proto, psi, spec)
            dev = max(dev, float(np.max(np.abs(rho - mixed))))
    record(7, "no-signaling", dev <= 1e-10, f"max deviation from I/d^n {dev:.1e}")


class _Dropping:
    def __init__(self, inner):
        self.inner = inner

    def send(self, data):
        pass

    def recv(self, timeout=None):
        return self.inner.recv(timeout)

    def close(self):
        self.inner.close()


def test_session_layer():
    frames = 0
    roundtrip = True
    for d in range(2, 6):
        for n in range(1, 4):
            for dits in itertools.product(range(d), repeat=2 * n):
                msg = ClassicalMessage(d, n, dits)
                roundtrip &= decode_message(encode_message(msg)) == msg
                frames += 1

    gap = 0.0
    configs = [(p, s) for d, n in [(2, 1), (2, 2), (3, 1), (3, 2)] for p, s in checks.example_specs(d, n, d * n).items()]
    for i in range(20):
        proto, spec = configs[i % len(configs)]
        psi = random_state(spec.d, spec.n, 3000 + i)
        gap = max(gap, checks.transcripts_gap(protocols.run(proto, psi, spec, i), run_session(psi, spec, proto, i)))

    alice_end, bob_end = duplex_pipe()
    try:
        run_session(random_state(3, 2, 1), ChannelSpec(3, 2), "Dn", 1, pipes=(_Dropping(alice_end), bob_end), timeout=0.2)
        loss_ok = False
    except SessionError as err:
        loss_ok = err.phase is Phase.Sent and err.bob.phase is Phase.Ready and err.bob.state is None

    ok = roundtrip and gap <= 1e-12 and loss_ok
    record(8, "session layer", ok, f"{frames} frames round-trip, 20 sessions max gap {gap:.1e}, loss handled {loss_ok}")


def test_sampler_statistics():
    d, n, samples = 2, 2, 16000
    spec = ChannelSpec(d, n, "GES", upsilon=random_global_unitary(d, n, 8))
    joint = protocols.prepare_joint(random_state(d, n, 8), spec)
    rng = np.random.default_rng(2718)
    index = {o: i for i, o in enumerate(all_outcomes(d, n))}
    counts = np.zeros(d ** (2 * n))
    for _ in range(samples):
        counts[index[protocols.alice_measure(joint, "Dpn", spec, rng).outcome]] += 1
    dev = float(np.max(np.abs(counts / samples - 1 / 16)))
    record(9, "sampler statistics", dev <= 0.02, f"{samples} samples, max |freq - 1/16| {dev:.4f}")
