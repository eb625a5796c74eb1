"""Polar code for the deterministic broadcast channel.

Each receiver's output row ``y_r`` is built as ``u_r G_n`` where ``u_r``
carries message bits on its message set and randomized (or MAP) choices
elsewhere, conditioned on the rows built before it. The channel input at
position ``j`` is the smallest ``x`` with ``f_r(x) = y_r(j)`` for all ``r``;
the only failure is an empty preimage. Receivers see their row noiselessly
and recover ``u_r = y_r G_n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import DeterministicBC, check_permutation
from .codec import (
    MESSAGE,
    SHARED,
    EncoderBlockError,
    RulePlan,
    as_bit_matrix,
    check_mode,
    run_pass,
)
from .fieldcore import log2_length, polar_transform
from .maps import SharedMaps
from .prob import Pmf
from .synthesis import PolarizationSets, build_sets, detbc_bundle


@dataclass(eq=False)
class DetCodeSpec:
    """Frozen deterministic-BC code.

    Attributes
    ----------
    channel : DeterministicBC
    px : Pmf
        Input law the code shapes its rows after.
    n : int
    message_sets : tuple of ndarray
        Sorted message indices per receiver (receiver ``r`` at position
        ``r - 1``).
    permutation : tuple of int
        Order in which rows are built (0-based receivers).
    seed_key : int
        Key of the shared random maps.
    sets : PolarizationSets, optional
        Construction record.
    """

    channel: DeterministicBC
    px: Pmf
    n: int
    message_sets: tuple
    permutation: tuple = ()
    seed_key: int = 0
    sets: PolarizationSets | None = None
    bundle: object = field(init=False, repr=False)

    def __post_init__(self) -> None:
        log2_length(self.n)
        self.px = self.px if isinstance(self.px, Pmf) else Pmf(np.asarray(self.px, dtype=np.float64))
        self.permutation = check_permutation(self.permutation or None, self.channel.m)
        if len(self.message_sets) != self.channel.m:
            raise ValueError("need one message set per receiver")
        msets = []
        for idx in self.message_sets:
            arr = np.unique(np.asarray(idx, dtype=np.int64))
            if arr.size and (arr[0] < 0 or arr[-1] >= self.n):
                raise ValueError("message index out of range")
            msets.append(arr)
        self.message_sets = tuple(msets)
        self.bundle = detbc_bundle(self.channel, self.px, self.permutation)

    @property
    def rates(self) -> np.ndarray:
        return np.array([len(m) / self.n for m in self.message_sets])

    def context(self, receiver: int):
        """Context of receiver ``receiver`` (1-based)."""
        for ctx in self.bundle.contexts.values():
            if ctx.target == f"Y{receiver}":
                return ctx
        raise KeyError(receiver)


def construct_detbc(
    channel: DeterministicBC,
    px,
    n: int,
    beta: float = 0.3,
    num_samples: int = 10000,
    seed: int = 0,
    *,
    pi=None,
    selector: str = "threshold",
    tau: float | None = None,
    delta: float | None = None,
    exact: bool = False,
    seed_key: int | None = None,
    workers: int = 1,
    sets: PolarizationSets | None = None,
) -> DetCodeSpec:
    """Construct message sets and return a :class:`DetCodeSpec`."""
    pi = check_permutation(pi, channel.m)
    if sets is None:
        bundle = detbc_bundle(channel, px, pi)
        sets = build_sets(
            bundle, n, beta, num_samples, seed, selector=selector, tau=tau, delta=delta, exact=exact, workers=workers
        )
    msets = tuple(sets.sets[f"M{r + 1}"] for r in range(channel.m))
    return DetCodeSpec(channel, px, n, msets, pi, seed if seed_key is None else seed_key, sets)


def encode_batch(spec: DetCodeSpec, messages, mode: str = "random") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Encode a batch of message tuples.

    Parameters
    ----------
    spec : DetCodeSpec
    messages : sequence of array_like
        ``messages[r]`` has shape ``(B, |M_{r+1}|)``.
    mode : {"random", "map"}

    Returns
    -------
    x : ndarray, shape (B, n)
        Channel inputs; ``-1`` where the preimage was empty.
    ok : ndarray of bool, shape (B,)
    rows : ndarray, shape (m, B, n)
        Output rows ``y_r`` chosen by the encoder.
    """
    check_mode(mode)
    m, n = spec.channel.m, spec.n
    if len(messages) != m:
        raise ValueError(f"expected {m} messages")
    msgs = [as_bit_matrix(messages[r], len(spec.message_sets[r]), f"message {r + 1}") for r in range(m)]
    batch = msgs[0].shape[0]
    if any(w.shape[0] != batch for w in msgs):
        raise ValueError("all messages must have the same batch size")
    maps = SharedMaps(spec.seed_key)
    rows = np.zeros((m, batch, n), dtype=np.uint8)
    for i, r in enumerate(spec.permutation):
        ctx = spec.context(r + 1)
        if i:
            side = ctx.side_code([rows[k] for k in spec.permutation[:i]])
        else:
            side = np.zeros((batch, n), dtype=np.int64)
        kinds = np.full(n, SHARED)
        kinds[spec.message_sets[r]] = MESSAGE
        plan = RulePlan(kinds, spec.message_sets[r], label=f"detbc_row{r + 1}")
        _, y = run_pass(
            plan, ctx.base_llr[side], messages=msgs[r], maps=maps, map_side=side if i else None, mode=mode
        )
        rows[r] = y
    code = np.zeros((batch, n), dtype=np.int64)
    for r in range(m):
        code = 2 * code + rows[r]
    x = spec.channel.consistent_input_table()[code]
    ok = np.all(x >= 0, axis=1)
    return x, ok, rows


def encode(spec: DetCodeSpec, messages, mode: str = "random") -> np.ndarray:
    """Encode one block.

    Raises
    ------
    EncoderBlockError
        If some position admits no consistent input symbol.
    """
    x, ok, _ = encode_batch(spec, [np.asarray(w)[None, :] if np.ndim(w) == 1 else w for w in messages], mode)
    if x.shape[0] != 1:
        raise ValueError("encode handles one block; use encode_batch for several")
    if not ok[0]:
        bad = np.flatnonzero(x[0] < 0)
        raise EncoderBlockError(f"no consistent input at {bad.size} position(s), first at index {int(bad[0])}")
    return x[0]


def decode(spec: DetCodeSpec, receiver: int, y) -> np.ndarray:
    """Recover receiver ``receiver``'s (1-based) message from its output row."""
    if not 1 <= receiver <= spec.channel.m:
        raise ValueError(f"receiver must lie in 1..{spec.channel.m}")
    y = np.asarray(y, dtype=np.uint8)
    if y.shape[-1] != spec.n:
        raise ValueError(f"output row must have length {spec.n}")
    return polar_transform(y)[..., spec.message_sets[receiver - 1]]
