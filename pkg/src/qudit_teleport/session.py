"""Alice and Bob as explicit parties exchanging the outcome over a byte pipe.

Wire frame: ``version (0x01) | d | n (uint16, big-endian) | payload`` where the
payload packs the 2n dits ``k1 l1 ... kn ln`` at ``ceil(log2 d)`` bits each,
most significant bit first, zero-padded to a whole byte.
"""

from __future__ import annotations

import enum
import queue
import threading
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from . import protocols
from .channels import ChannelSpec
from .measure import MeasurementResult, Outcome
from .statevec import StateVector

VERSION = 0x01
HEADER_LEN = 4


class FrameError(ValueError):
    pass


class ChannelClosed(Exception):
    pass


class SessionError(RuntimeError):
    def __init__(self, message: str, phase: "Phase", alice: "AliceParty", bob: "BobParty"):
        super().__init__(f"{message} (phase: {phase.name})")
        self.phase = phase
        self.alice = alice
        self.bob = bob


@dataclass(frozen=True)
class ClassicalMessage:
    d: int
    n: int
    dits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dits", tuple(int(x) for x in self.dits))
        if len(self.dits) != 2 * self.n:
            raise ValueError(f"message needs {2 * self.n} dits, got {len(self.dits)}")
        if any(not 0 <= x < self.d for x in self.dits):
            raise ValueError(f"dit out of range for d={self.d}: {self.dits}")

    def outcome(self) -> Outcome:
        return Outcome.from_dits(self.dits)


def bits_per_dit(d: int) -> int:
    return (d - 1).bit_length()


def encode_message(msg: ClassicalMessage) -> bytes:
    if msg.d > 255:
        raise ValueError(f"d={msg.d} does not fit the one-byte header field")
    if msg.n > 0xFFFF:
        raise ValueError(f"n={msg.n} does not fit the 16-bit header field")
    width = bits_per_dit(msg.d)
    nbits = width * len(msg.dits)
    acc = 0
    for x in msg.dits:
        acc = (acc << width) | x
    nbytes = -(-nbits // 8)
    acc <<= nbytes * 8 - nbits
    header = bytes([VERSION, msg.d]) + msg.n.to_bytes(2, "big")
    return header + acc.to_bytes(nbytes, "big")


def decode_message(frame: bytes) -> ClassicalMessage:
    frame = bytes(frame)
    if len(frame) < HEADER_LEN:
        raise FrameError(f"frame too short for header: {len(frame)} bytes")
    if frame[0] != VERSION:
        raise FrameError(f"unsupported frame version 0x{frame[0]:02x}")
    d = frame[1]
    n = int.from_bytes(frame[2:4], "big")
    if d < 2:
        raise FrameError(f"invalid dimension {d} in header")
    width = bits_per_dit(d)
    nbits = width * 2 * n
    nbytes = -(-nbits // 8)
    payload = frame[HEADER_LEN:]
    if len(payload) != nbytes:
        raise FrameError(f"payload length {len(payload)} bytes, expected {nbytes}")
    acc = int.from_bytes(payload, "big") >> (nbytes * 8 - nbits)
    mask = (1 << width) - 1
    dits = [(acc >> (width * (2 * n - 1 - i))) & mask for i in range(2 * n)]
    if any(x >= d for x in dits):
        raise FrameError(f"corrupt frame: dit value >= d={d}")
    return ClassicalMessage(d, n, tuple(dits))


class BytePipe(Protocol):
    def send(self, data: bytes) -> None: ...

    def recv(self, timeout: float | None = None) -> bytes: ...

    def close(self) -> None: ...


_CLOSED = object()


class _Endpoint:
    def __init__(self, inbox: queue.Queue, outbox: queue.Queue):
        self._inbox = inbox
        self._outbox = outbox

    def send(self, data: bytes) -> None:
        self._outbox.put(bytes(data))

    def recv(self, timeout: float | None = None) -> bytes:
        try:
            item = self._inbox.get(timeout=timeout) if timeout else self._inbox.get_nowait()
        except queue.Empty:
            raise ChannelClosed("no message available") from None
        if item is _CLOSED:
            self._inbox.put(_CLOSED)
            raise ChannelClosed("peer closed the channel")
        return item

    def close(self) -> None:
        self._outbox.put(_CLOSED)


def duplex_pipe() -> tuple[_Endpoint, _Endpoint]:
    """Two connected in-memory endpoints (Alice's, Bob's)."""
    a_to_b: queue.Queue = queue.Queue()
    b_to_a: queue.Queue = queue.Queue()
    return _Endpoint(b_to_a, a_to_b), _Endpoint(a_to_b, b_to_a)


class Phase(enum.Enum):
    Ready = "ready"
    Measured = "measured"
    Sent = "sent"
    Corrected = "corrected"
    Done = "done"


_ALICE_NEXT = {Phase.Ready: Phase.Measured, Phase.Measured: Phase.Sent, Phase.Sent: Phase.Done}
_BOB_NEXT = {Phase.Ready: Phase.Corrected, Phase.Corrected: Phase.Done}


class Lab:
    """The shared quantum register; only measurement results leave it."""

    def __init__(self, joint: StateVector):
        self.joint = joint
        self.bob_state: StateVector | None = None


class _Party:
    role = ""
    _next: dict = {}

    def __init__(self):
        self.phase = Phase.Ready

    def _check(self, to: Phase) -> None:
        if self._next.get(self.phase) is not to:
            raise RuntimeError(f"{self.role}: illegal transition {self.phase.name} -> {to.name}")

    def _advance(self, to: Phase) -> None:
        self._check(to)
        self.phase = to


class AliceParty(_Party):
    role = "Alice"
    _next = _ALICE_NEXT

    def __init__(self, protocol: str, spec: ChannelSpec, lab: Lab, pipe: BytePipe, rng: np.random.Generator):
        super().__init__()
        self.protocol, self.spec, self.lab, self.pipe, self.rng = protocol, spec, lab, pipe, rng
        self.result: MeasurementResult | None = None
        self.message: ClassicalMessage | None = None

    def measure(self) -> None:
        self._check(Phase.Measured)
        self.result = protocols.alice_measure(self.lab.joint, self.protocol, self.spec, self.rng)
        self.lab.bob_state = self.result.post_state
        self._advance(Phase.Measured)

    def send(self) -> None:
        self._check(Phase.Sent)
        self.message = ClassicalMessage(self.spec.d, self.spec.n, self.result.outcome.dits)
        self.pipe.send(encode_message(self.message))
        self._advance(Phase.Sent)

    def finish(self) -> None:
        self._advance(Phase.Done)
        self.pipe.close()


class BobParty(_Party):
    role = "Bob"
    _next = _BOB_NEXT

    def __init__(self, protocol: str, spec: ChannelSpec, lab: Lab, pipe: BytePipe):
        super().__init__()
        self.protocol, self.spec, self.lab, self.pipe = protocol, spec, lab, pipe
        self.pre_rotated = False
        self.message: ClassicalMessage | None = None
        self.state: StateVector | None = None

    def prerotate(self) -> None:
        """Before teleportation, undo the known Bob-side channel operator."""
        if self.phase is not Phase.Ready:
            raise RuntimeError("Bob can only pre-rotate before the protocol starts")
        if protocols.needs_prerotation(self.protocol, self.spec):
            self.lab.joint = protocols.bob_prerotate(self.lab.joint, self.spec)
            self.pre_rotated = True

    def receive_and_correct(self, timeout: float | None = None) -> None:
        self._check(Phase.Corrected)
        frame = self.pipe.recv(timeout)
        msg = decode_message(frame)
        if (msg.d, msg.n) != (self.spec.d, self.spec.n):
            raise FrameError(f"message for (d={msg.d}, n={msg.n}) does not match the channel")
        self.message = msg
        self.state = protocols.apply_corrections(self.lab.bob_state, msg.outcome())
        self._advance(Phase.Corrected)

    def finish(self) -> None:
        self._advance(Phase.Done)


def _transcript(input_state, spec, protocol, seed, alice: AliceParty, bob: BobParty) -> protocols.Transcript:
    return protocols.Transcript(
        protocol=protocol,
        spec=spec,
        input_state=input_state,
        outcome=bob.message.outcome(),
        classical_message=bob.message,
        bob_pre_correction=alice.result.post_state,
        bob_post_correction=bob.state,
        fidelity=protocols.fidelity(input_state, bob.state),
        seed=seed,
        probability=alice.result.probability,
        pre_rotated=bob.pre_rotated,
    )


def run_session(
    input_state: StateVector,
    spec: ChannelSpec,
    protocol: str,
    rng: int | np.random.Generator,
    *,
    pipes: tuple[BytePipe, BytePipe] | None = None,
    threaded: bool = False,
    timeout: float = 5.0,
) -> protocols.Transcript:
    """Teleport through two parties; equals :func:`protocols.run` for the same seed."""
    protocols.check_run(protocol, input_state, spec)
    seed = int(rng) if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    alice_pipe, bob_pipe = pipes or duplex_pipe()
    lab = Lab(protocols.prepare_joint(input_state, spec))
    alice = AliceParty(protocol, spec, lab, alice_pipe, rng)
    bob = BobParty(protocol, spec, lab, bob_pipe)

    bob.prerotate()
    if threaded:
        errors: list[BaseException] = []

        def bob_side():
            try:
                measured.wait(timeout)
                bob.receive_and_correct(timeout)
                bob.finish()
            except BaseException as exc:  # surfaced below with the phase it failed in
                errors.append(exc)

        measured = threading.Event()
        worker = threading.Thread(target=bob_side, name="bob")
        worker.start()
        alice.measure()
        measured.set()
        alice.send()
        alice.finish()
        worker.join()
        if errors:
            raise SessionError(f"Bob failed: {errors[0]}", Phase.Sent, alice, bob) from errors[0]
    else:
        alice.measure()
        alice.send()
        alice.finish()
        try:
            bob.receive_and_correct()
        except (ChannelClosed, FrameError) as exc:
            raise SessionError(f"Bob failed: {exc}", Phase.Sent, alice, bob) from exc
        bob.finish()
    return _transcript(input_state, spec, protocol, seed, alice, bob)
