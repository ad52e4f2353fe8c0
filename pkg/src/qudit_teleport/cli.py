"""Command-line harness: batch teleportation runs and invariant verification.

    qudit-teleport teleport --d 2 --n 1 --protocol dn --trials 100 --seed 1
    qudit-teleport verify --d 2..5 --n 1..2 --output verify.json
"""

from __future__ import annotations

import argparse
import contextlib
import json
import statistics
import sys
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import checks, protocols
from .channels import ChannelSpec, parse_channel
from .statevec import StateVector, random_state, read_state
from .weyl import BellLabel, phase_fault

JOINT_CAP = 200_000
FIDELITY_TOL = 1e-9
PROTOCOL_NAMES = {"dn": "Dn", "dpn": "Dpn", "dppn": "Dppn"}
DEFAULT_CHANNEL = {"dn": "tps", "dpn": "ges:haar:1", "dppn": "ges2:haar:1:haar:2"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    d: int
    n: int
    protocol: str
    channel: str
    offsets: tuple[BellLabel, ...]
    trials: int
    seed: int
    input: str | None
    output: str | None

    def validate(self) -> None:
        if self.d < 2 or self.n < 1:
            raise ConfigError(f"need d >= 2 and n >= 1 (got d={self.d}, n={self.n})")
        if self.d ** (3 * self.n) > JOINT_CAP:
            raise ConfigError(f"d^(3n) = {self.d ** (3 * self.n)} exceeds the cap {JOINT_CAP}")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if self.protocol not in PROTOCOL_NAMES:
            raise ConfigError(f"unknown protocol {self.protocol!r}")

    def channel_spec(self) -> ChannelSpec:
        spec = parse_channel(self.channel, self.d, self.n, self.offsets)
        want = protocols.KIND_FOR[PROTOCOL_NAMES[self.protocol]]
        if spec.kind != want:
            raise ConfigError(f"protocol {self.protocol} needs a {want.lower()} channel, got {self.channel!r}")
        return spec

    def echo(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "protocol": self.protocol,
            "channel": self.channel,
            "offsets": [[o.k, o.l] for o in self.offsets],
            "trials": self.trials,
            "seed": self.seed,
            "input": self.input or "random",
        }


def trial_streams(seed: int, trial: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (input, measurement) streams for one trial, stable in ``(seed, trial)``."""
    input_ss, measure_ss = np.random.SeedSequence([seed, trial]).spawn(2)
    return np.random.default_rng(input_ss), np.random.default_rng(measure_ss)


def transcript_record(trial: int, t: protocols.Transcript) -> dict:
    from .session import encode_message

    return {
        "trial": trial,
        "outcome": ",".join(map(str, t.classical_message.dits)),
        "fidelity": t.fidelity,
        "probability": t.probability,
        "message": encode_message(t.classical_message).hex(),
        "pre_rotated": t.pre_rotated,
    }


def _report(command: str, config: dict, passed: bool, **body) -> dict:
    return {
        "format": "qudit-teleport-report",
        "version": 1,
        "command": command,
        "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": config,
        "passed": passed,
        **body,
    }


def _write(report: dict, output: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_teleport(cfg: RunConfig, workers: int = 1) -> tuple[dict, int]:
    cfg.validate()
    spec = cfg.channel_spec()
    proto = PROTOCOL_NAMES[cfg.protocol]
    fixed_input: StateVector | None = None
    if cfg.input:
        fixed_input = read_state(cfg.input)
        if (fixed_input.d, fixed_input.m) != (cfg.d, cfg.n):
            raise ConfigError(f"input file holds d={fixed_input.d}, m={fixed_input.m}; expected d={cfg.d}, m={cfg.n}")

    def one(trial: int) -> dict:
        input_rng, measure_rng = trial_streams(cfg.seed, trial)
        psi = fixed_input if fixed_input is not None else random_state(cfg.d, cfg.n, input_rng)
        return transcript_record(trial, protocols.run(proto, psi, spec, measure_rng))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            records = list(pool.map(one, range(cfg.trials)))
    else:
        records = [one(t) for t in range(cfg.trials)]

    fids = [r["fidelity"] for r in records]
    hist = Counter(r["outcome"] for r in records)
    aggregate = {
        "min_fidelity": min(fids),
        "mean_fidelity": statistics.fmean(fids),
        "outcome_histogram": dict(sorted(hist.items())),
    }
    passed = aggregate["min_fidelity"] >= 1 - FIDELITY_TOL
    config = cfg.echo() | {"channel_spec": spec.describe()}
    return _report("teleport", config, passed, trials=records, aggregate=aggregate), 0 if passed else 1


def parse_range(text: str) -> list[int]:
    lo, sep, hi = text.partition("..")
    try:
        lo_i = int(lo)
        hi_i = int(hi) if sep else lo_i
    except ValueError:
        raise ConfigError(f"bad range {text!r}; expected N or LO..HI") from None
    if hi_i < lo_i:
        raise ConfigError(f"empty range {text!r}")
    return list(range(lo_i, hi_i + 1))


BASIS_TOL = 1e-12
PROTOCOL_TOL = 1e-10


def cmd_verify(ds: list[int], ns: list[int], seed: int = 0, fault: bool = False) -> tuple[dict, int]:
    for d in ds:
        for n in ns:
            if d < 2 or n < 1 or d ** (3 * n) > JOINT_CAP:
                raise ConfigError(f"(d={d}, n={n}) outside the supported range (d^(3n) <= {JOINT_CAP})")
    pairs = [(d, n) for d in ds for n in ns]
    suites = [
        ("basis_orthonormality", BASIS_TOL, lambda: [checks.basis_orthonormality(d) for d in ds]),
        ("weyl_unitarity", BASIS_TOL, lambda: [checks.weyl_unitarity(d) for d in ds]),
        ("ricochet", BASIS_TOL, lambda: [checks.ricochet(d) for d in ds]),
        ("uniform_distribution", PROTOCOL_TOL, lambda: [checks.uniform_outcomes(d, n, seed=seed) for d, n in pairs]),
        ("faithfulness", FIDELITY_TOL, lambda: [checks.faithfulness(d, n, seed=seed) for d, n in pairs]),
        ("reduction_local_upsilon", PROTOCOL_TOL, lambda: [checks.reduction_local_upsilon(d, n, seed) for d, n in pairs]),
        ("reduction_identity_omega", PROTOCOL_TOL, lambda: [checks.reduction_identity_omega(d, n, seed) for d, n in pairs]),
        ("reduction_local_omega", PROTOCOL_TOL, lambda: [checks.reduction_local_omega(d, n, seed) for d, n in pairs]),
        ("no_signaling", PROTOCOL_TOL, lambda: [checks.no_signaling(d, n, seed=seed) for d, n in pairs]),
    ]
    results = []
    with phase_fault() if fault else contextlib.nullcontext():
        for name, tol, run in suites:
            devs = run()
            results.append(checks.PropertyResult(name, max(devs), tol, len(devs)))
    passed = all(r.passed for r in results)
    config = {"d": ds, "n": ns, "seed": seed, "fault": fault}
    report = _report("verify", config, passed, properties=[r.as_dict() for r in results])
    return report, 0 if passed else 1


def load_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("report_schema.json").read_text(encoding="utf-8"))


def _parse_offsets(text: str | None) -> tuple[BellLabel, ...]:
    if not text:
        return ()
    out = []
    for item in text.split(";"):
        k, l = (int(x) for x in item.split(","))
        out.append(BellLabel(k, l))
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qudit-teleport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    tp = sub.add_parser("teleport", help="run a batch of teleportations and report fidelities")
    tp.add_argument("--d", type=int, required=True, help="qudit dimension")
    tp.add_argument("--n", type=int, required=True, help="number of qudits to teleport")
    tp.add_argument("--protocol", choices=sorted(PROTOCOL_NAMES), default="dn")
    tp.add_argument("--channel", help='e.g. "tps", "ges:haar:7", "ges:yeo-chua:0.7,1.1", "ges2:haar:3:haar:4"')
    tp.add_argument("--offsets", help='pair offsets "k,l;k,l;..." (default all zero)')
    tp.add_argument("--trials", type=int, default=1)
    tp.add_argument("--seed", type=int, default=0)
    tp.add_argument("--input", help="state-vector file to teleport (default: random per trial)")
    tp.add_argument("--output", help="report path (default: stdout)")
    tp.add_argument("--workers", type=int, default=1, help="threads used to run trials")

    vp = sub.add_parser("verify", help="run the invariant suites over ranges of d and n")
    vp.add_argument("--d", default="2..5", help="dimension range, e.g. 2..5")
    vp.add_argument("--n", default="1..2", help="pair-count range, e.g. 1..2")
    vp.add_argument("--seed", type=int, default=0)
    vp.add_argument("--output", help="report path (default: stdout)")
    vp.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "teleport":
            cfg = RunConfig(
                d=args.d,
                n=args.n,
                protocol=args.protocol,
                channel=args.channel or DEFAULT_CHANNEL[args.protocol],
                offsets=_parse_offsets(args.offsets),
                trials=args.trials,
                seed=args.seed,
                input=args.input,
                output=args.output,
            )
            report, status = cmd_teleport(cfg, workers=args.workers)
        else:
            report, status = cmd_verify(parse_range(args.d), parse_range(args.n), args.seed, args.inject_fault)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"qudit-teleport: error: {exc}", file=sys.stderr)
        return 2
    _write(report, args.output)
    if status:
        print("qudit-teleport: FAILED", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
