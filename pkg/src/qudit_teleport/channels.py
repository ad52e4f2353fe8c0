"""Shared 2n-qudit channels: tensor products of Bell pairs and their genuinely entangled variants.

Channel qudits are laid out ``A1 B1 A2 B2 ... An Bn``; Alice holds the even
positions and Bob the odd ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .statevec import ATOL, StateVector, apply_matrix, tensor_all, unitarity_error
from .weyl import BellLabel, _v_matrix, as_label, gbs_state

KINDS = ("TPS", "GES", "GES2")
DEFAULT_UNITARY_CAP = 1024


@dataclass(frozen=True, eq=False)
class GlobalUnitary:
    d: int
    n: int
    matrix: np.ndarray
    tag: str = ""

    def __post_init__(self):
        side = self.d**self.n
        if self.matrix.shape != (side, side):
            raise ValueError(f"global unitary must be {side}x{side}; got {self.matrix.shape}")
        err = unitarity_error(self.matrix)
        if err > ATOL:
            raise ValueError(f"matrix is not unitary (max |M^dag M - I| = {err:.3g})")

    def dagger(self) -> GlobalUnitary:
        return GlobalUnitary(self.d, self.n, self.matrix.conj().T, f"dagger({self.tag})")


def identity_unitary(d: int, n: int) -> GlobalUnitary:
    return GlobalUnitary(d, n, np.eye(d**n, dtype=complex), "identity")


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    d: int
    n: int
    kind: str = "TPS"
    offsets: tuple[BellLabel, ...] = field(default=())
    upsilon: GlobalUnitary | None = None
    omega: GlobalUnitary | None = None

    def __post_init__(self):
        if self.d < 2 or self.n < 1:
            raise ValueError(f"need d >= 2 and n >= 1; got d={self.d}, n={self.n}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}; expected one of {KINDS}")
        offsets = self.offsets or (BellLabel(0, 0),) * self.n
        if len(offsets) != self.n:
            raise ValueError(f"expected {self.n} offsets, got {len(offsets)}")
        object.__setattr__(self, "offsets", tuple(as_label(o, self.d) for o in offsets))
        if self.kind in ("GES", "GES2") and self.upsilon is None:
            raise ValueError(f"{self.kind} channel requires upsilon")
        if self.kind == "GES2" and self.omega is None:
            raise ValueError("GES2 channel requires omega")
        for name in ("upsilon", "omega"):
            u = getattr(self, name)
            if u is not None and (u.d, u.n) != (self.d, self.n):
                raise ValueError(f"{name} acts on (d={u.d}, n={u.n}); channel is (d={self.d}, n={self.n})")

    @property
    def alice_positions(self) -> list[int]:
        return list(range(0, 2 * self.n, 2))

    @property
    def bob_positions(self) -> list[int]:
        return list(range(1, 2 * self.n, 2))

    def describe(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "kind": self.kind,
            "offsets": [[o.k, o.l] for o in self.offsets],
            "upsilon": self.upsilon.tag if self.upsilon is not None else None,
            "omega": self.omega.tag if self.omega is not None else None,
        }


def build_channel(spec: ChannelSpec) -> StateVector:
    state = tensor_all([gbs_state(spec.d, o) for o in spec.offsets])
    if spec.kind in ("GES", "GES2"):
        state = apply_matrix(state, spec.upsilon.matrix, spec.alice_positions)
    if spec.kind == "GES2":
        state = apply_matrix(state, spec.omega.matrix, spec.bob_positions)
    return state


def bob_frame(spec: ChannelSpec) -> np.ndarray:
    """Bob-side operator separating the channel from ``Upsilon_A |Theta_00..0>``.

    This is ``Omega (V(o_1) x ... x V(o_n))``; Bob undoes it before teleporting.
    """
    frame = reduce(np.kron, [_v_matrix(spec.d, o.k, o.l) for o in spec.offsets])
    if spec.kind == "GES2":
        frame = spec.omega.matrix @ frame
    return frame


def yeo_chua_upsilon(theta: float, phi: float) -> GlobalUnitary:
    c, s = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    # basis order |00>, |01>, |10>, |11>; column j is the image of basis state j
    mat = np.array(
        [
            [c, 0, 0, -s],
            [0, -sp, cp, 0],
            [0, cp, sp, 0],
            [s, 0, 0, c],
        ],
        dtype=complex,
    )
    return GlobalUnitary(2, 2, mat, f"yeo-chua({theta!r},{phi!r})")


def random_global_unitary(d: int, n: int, seed: int, cap: int = DEFAULT_UNITARY_CAP) -> GlobalUnitary:
    """Haar-random unitary on ``n`` qudits via QR of a complex Gaussian matrix."""
    side = d**n
    if side > cap:
        raise ValueError(f"d**n = {side} exceeds the unitary size cap {cap}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((side, side)) + 1j * rng.standard_normal((side, side))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))
    return GlobalUnitary(d, n, q, f"haar({seed})")


def local_product_unitary(parts: Sequence) -> GlobalUnitary:
    mats = [np.asarray(getattr(p, "matrix", p), dtype=complex) for p in parts]
    if not mats:
        raise ValueError("need at least one factor")
    d = mats[0].shape[0]
    for mat in mats:
        if mat.shape != (d, d):
            raise ValueError(f"all factors must be {d}x{d} single-qudit matrices; got {mat.shape}")
        if unitarity_error(mat) > ATOL:
            raise ValueError("local factor is not unitary")
    return GlobalUnitary(d, len(mats), reduce(np.kron, mats), "local-product")


def operator_schmidt_values(matrix: np.ndarray, d: int, n_left: int, n_right: int) -> np.ndarray:
    """Singular values of an operator across a left|right qudit split.

    More than one nonzero value means the operator is not a product across the split.
    """
    dl, dr = d**n_left, d**n_right
    t = matrix.reshape(dl, dr, dl, dr).transpose(0, 2, 1, 3).reshape(dl * dl, dr * dr)
    return np.linalg.svd(t, compute_uv=False)


def parse_unitary(desc: str, d: int, n: int) -> GlobalUnitary:
    """Parse ``haar:SEED``, ``yeo-chua:THETA,PHI`` or ``identity``."""
    name, _, arg = desc.partition(":")
    if name == "identity" and not arg:
        return identity_unitary(d, n)
    if name == "haar":
        return random_global_unitary(d, n, int(arg))
    if name == "yeo-chua":
        if (d, n) != (2, 2):
            raise ValueError("yeo-chua unitary is defined only for d=2, n=2")
        theta, phi = (float(x) for x in arg.split(","))
        return yeo_chua_upsilon(theta, phi)
    raise ValueError(f"unrecognized unitary descriptor {desc!r}")


def _split_generators(rest: str) -> list[str]:
    tokens = rest.split(":")
    out: list[str] = []
    i = 0
    while i < len(tokens):
        if tokens[i] == "identity":
            out.append("identity")
            i += 1
        elif i + 1 < len(tokens):
            out.append(f"{tokens[i]}:{tokens[i + 1]}")
            i += 2
        else:
            raise ValueError(f"incomplete generator in {rest!r}")
    return out


def parse_channel(desc: str, d: int, n: int, offsets: Sequence = ()) -> ChannelSpec:
    """Parse a channel descriptor such as ``tps``, ``ges:haar:7`` or ``ges2:haar:3:haar:4``."""
    kind, _, rest = desc.partition(":")
    kind = kind.upper()
    if kind == "TPS":
        if rest:
            raise ValueError("tps channel takes no generator")
        return ChannelSpec(d, n, "TPS", tuple(offsets))
    gens = _split_generators(rest) if rest else []
    if kind == "GES" and len(gens) == 1:
        return ChannelSpec(d, n, "GES", tuple(offsets), upsilon=parse_unitary(gens[0], d, n))
    if kind == "GES2" and len(gens) == 2:
        return ChannelSpec(
            d, n, "GES2", tuple(offsets),
            upsilon=parse_unitary(gens[0], d, n),
            omega=parse_unitary(gens[1], d, n),
        )
    raise ValueError(f"bad channel descriptor {desc!r}")
