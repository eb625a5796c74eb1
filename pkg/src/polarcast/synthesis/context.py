"""Polarization contexts: which sequence is synthesized, given what.

A context pairs a binary target variable ``T`` of a single-letter joint
model with a tuple of side-information variables ``S``. Blocks are i.i.d.
copies of ``(T, S)``; the synthesized bit channels are those of
``U = T^n G_n`` given ``U`` prefixes and the whole ``S^n``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..channels import (
    DeterministicBC,
    MartonConfig,
    SuperpositionChain,
    cover_rates,
    det_region_vertex,
    marton_rates,
    check_permutation,
)
from ..prob import JointTable, Pmf, conditional_entropy

SCHEMES = ("det_bc_row", "sp_cloud", "sp_satellite", "ma_v1", "ma_v2")

_ALLOWED = {
    "sp_cloud": ("V", [(), ("Y1",), ("Y2",)]),
    "sp_satellite": ("X", [("V",), ("V", "Y1")]),
    "ma_v1": ("V1", [(), ("Y1",)]),
    "ma_v2": ("V2", [("V1",), ("Y2",)]),
}


class ContextError(ValueError):
    """Context inconsistent with its scheme or model."""


def model_hash(model: JointTable) -> str:
    """Stable short hash of a joint model (names, shape and weights)."""
    h = hashlib.sha256()
    h.update(repr((model.names, model.dims)).encode())
    h.update(np.ascontiguousarray(model.weights, dtype=np.float64).tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class PolarContext:
    """Target/side-information pair inside a joint model.

    Parameters
    ----------
    scheme : str
        One of ``det_bc_row``, ``sp_cloud``, ``sp_satellite``, ``ma_v1``,
        ``ma_v2``.
    model : JointTable
        Single-letter joint distribution with named axes.
    target : str
        Binary variable whose transform is synthesized.
    side : tuple of str
        Conditioning variables, each observed as a full length-n sequence.
    """

    scheme: str
    model: JointTable
    target: str
    side: tuple[str, ...] = ()
    pair: np.ndarray = field(init=False, repr=False)
    base_llr: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        side = tuple(self.side)
        object.__setattr__(self, "side", side)
        if self.scheme not in SCHEMES:
            raise ContextError(f"unknown scheme {self.scheme!r}")
        if self.scheme == "det_bc_row":
            names = (self.target,) + side
            if not all(nm.startswith("Y") for nm in names) or len(set(names)) != len(names):
                raise ContextError("det-BC rows condition on previous output rows only")
        else:
            target, allowed = _ALLOWED[self.scheme]
            if self.target != target or side not in allowed:
                raise ContextError(f"{self.scheme} does not condition {self.target} on {side}")
        pair = self.model.pair_table(self.target, side)
        if pair.shape[0] != 2:
            raise ContextError(f"target {self.target} must be binary")
        pair = pair.T.copy()  # (|S|, 2)
        pair.setflags(write=False)
        with np.errstate(divide="ignore", invalid="ignore"):
            llr = np.log(pair[:, 0]) - np.log(pair[:, 1])
        llr[np.isnan(llr)] = 0.0  # unreachable side symbol
        llr.setflags(write=False)
        object.__setattr__(self, "pair", pair)
        object.__setattr__(self, "base_llr", llr)

    @property
    def side_dims(self) -> tuple[int, ...]:
        return tuple(self.model.dims[self.model.axis(s)] for s in self.side)

    @property
    def side_size(self) -> int:
        return int(np.prod(self.side_dims, dtype=np.int64)) if self.side else 1

    @property
    def name(self) -> str:
        return self.target + ("|" + "".join(self.side) if self.side else "")

    def side_code(self, sequences: Sequence[np.ndarray] | dict | None, shape=None) -> np.ndarray:
        """Combine side-information sequences into product-alphabet codes.

        Parameters
        ----------
        sequences : sequence or dict of ndarray, or None
            One integer array per side variable (all the same shape), or a
            mapping from variable name to array.
        shape : tuple, optional
            Shape of the result when the context has no side information.
        """
        if not self.side:
            if shape is None:
                raise ContextError("shape is required for a context without side information")
            return np.zeros(shape, dtype=np.int64)
        if isinstance(sequences, dict):
            sequences = [sequences[s] for s in self.side]
        if sequences is None or len(sequences) != len(self.side):
            raise ContextError(f"expected {len(self.side)} side sequences")
        arrays = [np.asarray(a, dtype=np.int64) for a in sequences]
        return np.ravel_multi_index(arrays, self.side_dims)

    def key(self) -> str:
        return f"{self.scheme}:{model_hash(self.model)}:{self.name}"


@dataclass(frozen=True, eq=False)
class SchemeBundle:
    """All contexts needed to construct one scheme, plus its rate targets.

    ``contexts`` maps a statistic name (``"Y2|Y1"``, ``"X|VY1"``, ...) to
    its context; ``targets`` maps message-set names to single-letter rates.
    """

    scheme: str
    model: JointTable
    contexts: dict
    targets: dict
    order: tuple[str, ...] = ()
    extra: dict = field(default_factory=dict)

    def key(self) -> str:
        return f"{self.scheme}:{model_hash(self.model)}:{','.join(sorted(self.contexts))}:{self.order}"


def detbc_bundle(ch: DeterministicBC, px, pi: Sequence[int] | None = None) -> SchemeBundle:
    """Contexts of a deterministic BC: row ``pi[i]`` given rows ``pi[:i]``."""
    pi = check_permutation(pi, ch.m)
    px = px if isinstance(px, Pmf) else Pmf(np.asarray(px, dtype=np.float64))
    model = ch.joint(px)
    contexts = {}
    for i, r in enumerate(pi):
        side = tuple(f"Y{k + 1}" for k in pi[:i])
        ctx = PolarContext("det_bc_row", model, f"Y{r + 1}", side)
        contexts[ctx.name] = ctx
    rates = det_region_vertex(ch, px, pi)
    targets = {f"M{r + 1}": float(rates[r]) for r in range(ch.m)}
    return SchemeBundle("detbc", model, contexts, targets, tuple(contexts), {"pi": pi})


def superposition_bundle(chain: SuperpositionChain) -> SchemeBundle:
    """Five contexts of the superposition construction."""
    model = chain.joint()
    specs = [
        ("sp_satellite", "X", ("V",)),
        ("sp_satellite", "X", ("V", "Y1")),
        ("sp_cloud", "V", ()),
        ("sp_cloud", "V", ("Y1",)),
        ("sp_cloud", "V", ("Y2",)),
    ]
    contexts = {}
    for scheme, t, s in specs:
        ctx = PolarContext(scheme, model, t, s)
        contexts[ctx.name] = ctx
    r1, r2, _ = cover_rates(chain)
    targets = {"M1": r1, "M2": r2}
    return SchemeBundle("superposition", model, contexts, targets, ("V", "X"))


def marton_bundle(cfg: MartonConfig) -> SchemeBundle:
    """Four contexts of the Marton construction."""
    model = cfg.joint()
    specs = [
        ("ma_v1", "V1", ()),
        ("ma_v1", "V1", ("Y1",)),
        ("ma_v2", "V2", ("V1",)),
        ("ma_v2", "V2", ("Y2",)),
    ]
    contexts = {}
    for scheme, t, s in specs:
        ctx = PolarContext(scheme, model, t, s)
        contexts[ctx.name] = ctx
    r1, r2 = marton_rates(cfg)
    entropy_gap = conditional_entropy(model, "V2", ["V1"]) - conditional_entropy(model, "V2", ["Y2"])
    targets = {"M1": r1, "M2": r2}
    return SchemeBundle("marton", model, contexts, targets, ("V1", "V2"), {"m2_entropy_gap": entropy_gap})
