"""Per-index rules shared by all encoders and decoders.

Every SC pass assigns one rule to each index:

``MESSAGE``
    copy the next message bit;
``DECIDE``
    most likely value under the decoding context (ties go to 0);
``SHARED``
    shared random map: 0 with the probability given by the map's own
    context, drawn from the keyed PRF (or most likely value in ``map`` mode);
``FIXED``
    a known bit supplied per block (fair-coin vector, genie bits).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .maps import SharedMaps
from .synthesis.sc import SuccessiveCanceller, prob_zero

MESSAGE, DECIDE, SHARED, FIXED = 0, 1, 2, 3
MODES = ("random", "map")


class EncoderBlockError(RuntimeError):
    """The encoder found no input symbol consistent with the chosen rows."""


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def message_positions(n: int, indices) -> np.ndarray:
    """Array mapping each index to its slot in the message, or -1."""
    pos = np.full(n, -1, dtype=np.int64)
    idx = np.asarray(indices, dtype=np.int64)
    pos[idx] = np.arange(idx.size)
    return pos


def as_bit_matrix(bits, width: int, name: str) -> np.ndarray:
    """Validate a batch of bit rows ``(B, width)`` (1-D input is one row)."""
    arr = np.asarray(bits)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ValueError(f"{name} must have {width} bits per block, got shape {np.shape(bits)}")
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.uint8)


@dataclass
class RulePlan:
    """Rules of one SC pass.

    Attributes
    ----------
    kinds : ndarray of int
        Rule per index.
    message_index : ndarray
        Sorted indices carrying message bits.
    decide_ctx, shared_ctx : int
        Which context axis of the likelihood stack feeds each rule.
    label : str
        Name of the shared map (PRF domain separation).
    """

    kinds: np.ndarray
    message_index: np.ndarray
    decide_ctx: int = 0
    shared_ctx: int = 0
    label: str = ""


def run_pass(
    plan: RulePlan,
    llr0: np.ndarray,
    *,
    messages: np.ndarray | None = None,
    fixed: np.ndarray | None = None,
    maps: SharedMaps | None = None,
    map_side: np.ndarray | None = None,
    mode: str = "random",
) -> tuple[np.ndarray, np.ndarray]:
    """Execute one SC pass.

    Parameters
    ----------
    plan : RulePlan
    llr0 : ndarray, shape (C, B, n)
        Single-letter log-likelihood ratios for each context.
    messages : ndarray, shape (B, |message_index|), optional
    fixed : ndarray, shape (B, n), optional
        Bits used at ``FIXED`` indices.
    maps : SharedMaps, optional
        Required when any index uses ``SHARED`` in random mode.
    map_side : ndarray, shape (B, n), optional
        Argument of the shared map besides the prefix.
    mode : {"random", "map"}

    Returns
    -------
    u, t : ndarray
        Decided bits and their transform.
    """
    check_mode(mode)
    llr0 = np.asarray(llr0, dtype=np.float64)
    if llr0.ndim == 2:
        llr0 = llr0[None]
    _, batch, n = llr0.shape
    kinds = plan.kinds
    pos = message_positions(n, plan.message_index)
    use_prf = mode == "random" and bool(np.any(kinds == SHARED))
    state = maps.initial_state(plan.label, map_side, batch) if use_prf else None

    def decide(j: int, lam: np.ndarray) -> np.ndarray:
        nonlocal state
        kind = kinds[j]
        if kind == MESSAGE:
            bit = messages[:, pos[j]]
        elif kind == DECIDE:
            bit = (lam[plan.decide_ctx] < 0).astype(np.uint8)
        elif kind == SHARED:
            if mode == "map":
                bit = (lam[plan.shared_ctx] < 0).astype(np.uint8)
            else:
                bit = (maps.draw(state, j) >= prob_zero(lam[plan.shared_ctx])).astype(np.uint8)
        else:
            bit = fixed[:, j]
        if use_prf:
            state = maps.advance(state, j, bit)
        return bit

    return SuccessiveCanceller(n).run(llr0, decide)


def stack_llr(*layers: np.ndarray) -> np.ndarray:
    """Stack per-context single-letter likelihood arrays along a new axis 0."""
    return np.stack([np.asarray(a, dtype=np.float64) for a in layers])


def trial_rng(master_seed: int, n: int, trial: int) -> np.random.Generator:
    """Independent generator of one simulated block, addressed by ``(n, trial)``."""
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=(int(n), int(trial))))
