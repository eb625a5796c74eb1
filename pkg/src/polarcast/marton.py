"""Two-user Marton polar code with genie-given bits.

The encoder builds ``u1`` (message ``w1`` on ``M1``) giving ``v1``, then
``u2`` conditioned on ``v1``: message ``w2`` on ``M2``, a shared fair coin
on the rest of ``H_V2|V1`` and a shared random map elsewhere. The codeword
is ``x(j) = phi(v1(j), v2(j))``. Receiver 2 never sees ``v1``: it decides
``L_V2|Y2``, copies the fair coin on ``H_V2|Y2`` and receives the
partially polarized indices ``Delta_2`` out of band.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import MartonConfig, marton_admissible
from .codec import (
    DECIDE,
    FIXED,
    MESSAGE,
    SHARED,
    RulePlan,
    as_bit_matrix,
    check_mode,
    run_pass,
    stack_llr,
    trial_rng,
)
from .fieldcore import log2_length
from .maps import SharedMaps
from .prob import mutual_information
from .synthesis import ConstructionError, PolarizationSets, build_sets, check_alignment, marton_bundle


class GenieCoverageError(ValueError):
    """Genie bits do not match the size of ``Delta_2``."""


@dataclass(eq=False)
class MaCodeSpec:
    """Frozen Marton code.

    Attributes
    ----------
    cfg : MartonConfig
    n : int
    sets : PolarizationSets
        Marton sets including ``Delta_1`` and ``Delta_2``.
    seed_key : int
    eta : float, optional
        Configured bound on ``|Delta_1 u Delta_2| / n``; ``eta_ok`` compares.
    mode : {"random", "map"}
    """

    cfg: MartonConfig
    n: int
    sets: PolarizationSets
    seed_key: int = 0
    eta: float | None = None
    mode: str = "random"
    bundle: object = field(init=False, repr=False)

    def __post_init__(self) -> None:
        log2_length(self.n)
        check_mode(self.mode)
        self.bundle = marton_bundle(self.cfg)
        s = self.sets
        cover = np.union1d(np.union1d(s["L_V2|Y2"], s["H_V2|Y2"]), s["Delta_2"])
        if cover.size != self.n or np.intersect1d(s["H_V2|Y2"], s["L_V2|Y2"]).size:
            raise ConstructionError("receiver-2 sets do not partition the index range")
        if np.setdiff1d(s["H_V2|Y2"], s["H_V2|V1"]).size:
            raise ConstructionError("H_V2|Y2 must lie inside H_V2|V1")

    @property
    def m1(self) -> np.ndarray:
        return self.sets["M1"]

    @property
    def m2(self) -> np.ndarray:
        return self.sets["M2"]

    @property
    def delta2(self) -> np.ndarray:
        return self.sets["Delta_2"]

    @property
    def rates(self) -> tuple[float, float]:
        return len(self.m1) / self.n, len(self.m2) / self.n

    @property
    def eta_actual(self) -> float:
        return self.sets.eta

    @property
    def eta_ok(self) -> bool:
        return self.eta is None or self.eta_actual <= self.eta

    @property
    def r2_eff(self) -> float:
        """Receiver-2 rate after charging one bit per genie bit."""
        return (len(self.m2) - len(self.delta2)) / self.n

    def ctx(self, name: str):
        return self.bundle.contexts[name]


def construct_marton(
    cfg: MartonConfig,
    n: int,
    beta: float = 0.3,
    num_samples: int = 10000,
    seed: int = 0,
    *,
    selector: str = "threshold",
    tau: float | None = None,
    delta: float | None = None,
    exact: bool = False,
    repair: bool = False,
    eta: float | None = None,
    seed_key: int | None = None,
    mode: str = "random",
    workers: int = 1,
    sets: PolarizationSets | None = None,
) -> MaCodeSpec:
    """Build sets and return a :class:`MaCodeSpec`.

    Raises
    ------
    ConstructionError
        If ``P(y2|v2)`` does not dominate ``P(v1|v2)``, or the receiver-2
        sets are not aligned with the encoder's and ``repair`` is False.
        With ``repair``, indices of ``H_V2|Y2`` outside ``H_V2|V1`` are
        moved to ``Delta_2`` so receiver 2 gets them as genie bits.
    """
    if not marton_admissible(cfg):
        j = cfg.joint()
        i2 = mutual_information(j, ["V2"], ["Y2"])
        i12 = mutual_information(j, ["V1"], ["V2"])
        raise ConstructionError(
            f"P(y2|v2) does not stochastically dominate P(v1|v2); I(V2;Y2)={i2:.6f}, I(V1;V2)={i12:.6f}"
        )
    if sets is None:
        bundle = marton_bundle(cfg)
        sets = build_sets(
            bundle, n, beta, num_samples, seed, selector=selector, tau=tau, delta=delta, exact=exact, workers=workers
        )
    report = check_alignment(sets, "marton")
    bad_h = report.violations["H_V2|Y2<=H_V2|V1"]
    bad_l = report.violations["L_V2|V1<=L_V2|Y2"]
    if bad_h or bad_l:
        if not repair:
            raise ConstructionError(
                f"misaligned sets: {len(bad_h)} indices of H_V2|Y2 outside H_V2|V1, "
                f"{len(bad_l)} indices of L_V2|V1 outside L_V2|Y2"
            )
        if bad_h:
            sets.sets["H_V2|Y2"] = np.setdiff1d(sets.sets["H_V2|Y2"], bad_h)
            sets.sets["Delta_2"] = np.union1d(sets.sets["Delta_2"], bad_h)
            sets.notes.append(f"repair: moved {len(bad_h)} indices of H_V2|Y2 into Delta_2")
        if bad_l:
            sets.notes.append(f"repair: {len(bad_l)} indices of L_V2|V1 outside L_V2|Y2 (no decoder impact)")
    return MaCodeSpec(cfg, n, sets, seed if seed_key is None else seed_key, eta, mode)


def ma_encode_batch(spec: MaCodeSpec, w1, w2) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Encode a batch.

    Returns
    -------
    x : ndarray, shape (B, n)
    genie : ndarray, shape (B, |Delta_2|)
        ``u2`` restricted to ``Delta_2``.
    v1, v2 : ndarray, shape (B, n)
    """
    n = spec.n
    w1 = as_bit_matrix(w1, len(spec.m1), "w1")
    w2 = as_bit_matrix(w2, len(spec.m2), "w2")
    if w1.shape[0] != w2.shape[0]:
        raise ValueError("w1 and w2 batch sizes differ")
    batch = w1.shape[0]
    maps = SharedMaps(spec.seed_key)
    ctx1 = spec.ctx("V1")
    kinds1 = np.full(n, SHARED)
    kinds1[spec.m1] = MESSAGE
    _, v1 = run_pass(
        RulePlan(kinds1, spec.m1, label="ma_u1"),
        ctx1.base_llr[np.zeros((batch, n), dtype=np.int64)],
        messages=w1,
        maps=maps,
        mode=spec.mode,
    )
    ctx2 = spec.ctx("V2|V1")
    kinds2 = np.full(n, SHARED)
    kinds2[spec.sets["H_V2|V1"]] = FIXED
    kinds2[spec.m2] = MESSAGE
    gamma = np.broadcast_to(maps.gamma(n), (batch, n))
    u2, v2 = run_pass(
        RulePlan(kinds2, spec.m2, label="ma_u2"),
        ctx2.base_llr[ctx2.side_code([v1])],
        messages=w2,
        fixed=gamma,
        maps=maps,
        map_side=v1,
        mode=spec.mode,
    )
    x = spec.cfg.phi[v1, v2]
    return x, u2[:, spec.delta2], v1, v2


def ma_encode(spec: MaCodeSpec, w1, w2) -> tuple[np.ndarray, np.ndarray]:
    """Encode one block; returns ``(x, genie_bits)``."""
    x, genie, _, _ = ma_encode_batch(spec, np.asarray(w1)[None, :], np.asarray(w2)[None, :])
    return x[0], genie[0]


def ma_decode1_batch(spec: MaCodeSpec, y1) -> np.ndarray:
    """Receiver 1: message estimates of shape ``(B, |M1|)``."""
    n = spec.n
    y1 = np.atleast_2d(np.asarray(y1, dtype=np.int64))
    if y1.shape[1] != n:
        raise ValueError(f"y1 must have length {n}")
    obs, prior = spec.ctx("V1|Y1"), spec.ctx("V1")
    llr = stack_llr(obs.base_llr[obs.side_code([y1])], prior.base_llr[np.zeros(y1.shape, dtype=np.int64)])
    kinds = np.full(n, SHARED)
    kinds[spec.m1] = DECIDE
    u1, _ = run_pass(
        RulePlan(kinds, spec.m1, decide_ctx=0, shared_ctx=1, label="ma_u1"),
        llr,
        maps=SharedMaps(spec.seed_key),
        mode=spec.mode,
    )
    return u1[:, spec.m1]


def ma_decode2_batch(spec: MaCodeSpec, y2, genie) -> np.ndarray:
    """Receiver 2: message estimates of shape ``(B, |M2|)``.

    Only ``y2``, the genie bits on ``Delta_2`` and the shared fair coin are
    used; ``v1`` plays no part.
    """
    n = spec.n
    y2 = np.atleast_2d(np.asarray(y2, dtype=np.int64))
    if y2.shape[1] != n:
        raise ValueError(f"y2 must have length {n}")
    genie = np.asarray(genie)
    if genie.ndim == 1:
        genie = genie[None, :]
    if genie.shape != (y2.shape[0], len(spec.delta2)):
        raise GenieCoverageError(
            f"expected {len(spec.delta2)} genie bits per block for Delta_2, got shape {genie.shape}"
        )
    ctx = spec.ctx("V2|Y2")
    kinds = np.full(n, FIXED)
    kinds[spec.sets["L_V2|Y2"]] = DECIDE
    fixed = np.broadcast_to(SharedMaps(spec.seed_key).gamma(n), y2.shape).copy()
    fixed[:, spec.delta2] = genie
    u2, _ = run_pass(RulePlan(kinds, spec.m2, label="ma_u2"), ctx.base_llr[ctx.side_code([y2])], fixed=fixed)
    return u2[:, spec.m2]


def ma_decode1(spec: MaCodeSpec, y1) -> np.ndarray:
    return ma_decode1_batch(spec, np.asarray(y1)[None, :])[0]


def ma_decode2(spec: MaCodeSpec, y2, genie_bits) -> np.ndarray:
    return ma_decode2_batch(spec, np.asarray(y2)[None, :], np.asarray(genie_bits)[None, :])[0]


@dataclass
class TwoPhaseResult:
    """Aggregate of a two-phase run.

    ``r2_eff`` charges one bit per genie bit: ``R2 - |Delta_2| / n``.
    """

    n: int
    num_blocks: int
    r1: float
    r2: float
    r2_eff: float
    genie_bits_per_block: int
    genie_bits_total: int
    eta: float
    eta_bound: float | None
    errors1: int
    errors2: int
    block_errors: int

    @property
    def block_error_rate(self) -> float:
        return self.block_errors / self.num_blocks

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["block_error_rate"] = self.block_error_rate
        return d


def two_phase_simulate(spec: MaCodeSpec, num_blocks: int, seed: int) -> TwoPhaseResult:
    """Send ``num_blocks`` blocks, then deliver all buffered genie bits.

    Phase 1 encodes each block, passes it through the channel and lets
    receiver 1 decode at once, while ``y2`` and the genie bits are
    buffered. Phase 2 hands the buffer to receiver 2 over an ideal side
    link and decodes every block there.
    """
    if num_blocks < 1:
        raise ValueError("num_blocks must be >= 1")
    n = spec.n
    k1, k2 = len(spec.m1), len(spec.m2)
    w1 = np.zeros((num_blocks, k1), dtype=np.uint8)
    w2 = np.zeros((num_blocks, k2), dtype=np.uint8)
    y1 = np.zeros((num_blocks, n), dtype=np.int64)
    y2 = np.zeros((num_blocks, n), dtype=np.int64)
    rngs = [trial_rng(seed, n, b) for b in range(num_blocks)]
    for b, rng in enumerate(rngs):
        w1[b] = rng.integers(0, 2, k1)
        w2[b] = rng.integers(0, 2, k2)
    x, genie, _, _ = ma_encode_batch(spec, w1, w2)
    for b, rng in enumerate(rngs):
        y1[b], y2[b] = spec.cfg.channel.sample(x[b], rng)
    ok1 = np.all(ma_decode1_batch(spec, y1) == w1, axis=1)
    # phase 2: buffered genie bits reach receiver 2
    ok2 = np.all(ma_decode2_batch(spec, y2, genie) == w2, axis=1)
    r1, r2 = spec.rates
    return TwoPhaseResult(
        n=n,
        num_blocks=num_blocks,
        r1=r1,
        r2=r2,
        r2_eff=spec.r2_eff,
        genie_bits_per_block=len(spec.delta2),
        genie_bits_total=len(spec.delta2) * num_blocks,
        eta=spec.eta_actual,
        eta_bound=spec.eta,
        errors1=int(np.sum(~ok1)),
        errors2=int(np.sum(~ok2)),
        block_errors=int(np.sum(~(ok1 & ok2))),
    )
