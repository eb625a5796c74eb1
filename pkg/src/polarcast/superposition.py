"""Two-user superposition polar code.

The cloud row ``u2`` (message ``w2`` on ``M2``) gives ``v = u2 G_n``; the
satellite row ``u1`` (message ``w1`` on ``M1``, conditioned on ``v``) gives
the codeword ``x = u1 G_n``. Receiver 1 decodes the cloud from ``y1`` and
then the satellite from ``(v_hat, y1)``; receiver 2 decodes the cloud only.
Non-message indices use shared random maps whose laws condition on the
map's own argument (cloud prefix only; satellite prefix and ``v``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import SuperpositionChain, cover_rates, superposition_admissible
from .codec import DECIDE, MESSAGE, SHARED, RulePlan, as_bit_matrix, check_mode, run_pass, stack_llr
from .fieldcore import log2_length
from .maps import SharedMaps
from .synthesis import ConstructionError, PolarizationSets, build_sets, check_alignment, superposition_bundle


@dataclass(eq=False)
class SpCodeSpec:
    """Frozen superposition code.

    Attributes
    ----------
    chain : SuperpositionChain
    n : int
    sets : PolarizationSets
        Must contain ``M1``, ``M2`` and ``M1v`` with ``M2`` inside ``M1v``.
    seed_key : int
    mode : {"random", "map"}
        Rule of the shared maps at non-message indices.
    """

    chain: SuperpositionChain
    n: int
    sets: PolarizationSets
    seed_key: int = 0
    mode: str = "random"
    bundle: object = field(init=False, repr=False)

    def __post_init__(self) -> None:
        log2_length(self.n)
        check_mode(self.mode)
        if not np.all(np.isin(self.sets["M2"], self.sets["M1v"])):
            raise ConstructionError("cloud message set M2 is not nested in M1v")
        self.bundle = superposition_bundle(self.chain)

    @property
    def m1(self) -> np.ndarray:
        return self.sets["M1"]

    @property
    def m2(self) -> np.ndarray:
        return self.sets["M2"]

    @property
    def rates(self) -> tuple[float, float]:
        return len(self.m1) / self.n, len(self.m2) / self.n

    def ctx(self, name: str):
        return self.bundle.contexts[name]


def construct_superposition(
    chain: SuperpositionChain,
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
    seed_key: int | None = None,
    mode: str = "random",
    workers: int = 1,
    sets: PolarizationSets | None = None,
) -> SpCodeSpec:
    """Build sets and return a :class:`SpCodeSpec`.

    Raises
    ------
    ConstructionError
        If ``P(y1|v)`` does not dominate ``P(y2|v)``, or if ``M2`` is not
        nested in ``M1v`` and ``repair`` is False. With ``repair`` the
        cloud message set is shrunk to ``M2 & M1v`` and the loss recorded.
    """
    if not superposition_admissible(chain):
        r1, r2, _ = cover_rates(chain)
        raise ConstructionError(
            "P(y1|v) does not stochastically dominate P(y2|v); "
            f"I(X;Y1|V)={r1:.6f}, I(V;Y2)={r2:.6f}"
        )
    if sets is None:
        bundle = superposition_bundle(chain)
        sets = build_sets(
            bundle, n, beta, num_samples, seed, selector=selector, tau=tau, delta=delta, exact=exact, workers=workers
        )
    report = check_alignment(sets, "superposition")
    bad = report.violations["M2<=M1v"]
    if bad:
        if not repair:
            raise ConstructionError(f"M2 not nested in M1v at {len(bad)} indices: {bad[:10]}")
        sets.sets["M2"] = np.intersect1d(sets.sets["M2"], sets.sets["M1v"])
        loss = len(bad) / n
        sets.rates["M2"] = len(sets.sets["M2"]) / n
        sets.notes.append(f"repair: removed {len(bad)} indices from M2 (rate loss {loss:.6f})")
    return SpCodeSpec(chain, n, sets, seed if seed_key is None else seed_key, mode)


def _kinds(n: int, message_index: np.ndarray, rest: int) -> np.ndarray:
    kinds = np.full(n, rest)
    kinds[message_index] = MESSAGE
    return kinds


def sp_encode_batch(spec: SpCodeSpec, w1, w2) -> tuple[np.ndarray, np.ndarray]:
    """Encode a batch; returns ``(x, v)`` each of shape ``(B, n)``."""
    n = spec.n
    w1 = as_bit_matrix(w1, len(spec.m1), "w1")
    w2 = as_bit_matrix(w2, len(spec.m2), "w2")
    if w1.shape[0] != w2.shape[0]:
        raise ValueError("w1 and w2 batch sizes differ")
    batch = w1.shape[0]
    maps = SharedMaps(spec.seed_key)
    cloud = spec.ctx("V")
    zeros = np.zeros((batch, n), dtype=np.int64)
    plan2 = RulePlan(_kinds(n, spec.m2, SHARED), spec.m2, label="sp_cloud")
    _, v = run_pass(plan2, cloud.base_llr[zeros], messages=w2, maps=maps, mode=spec.mode)
    sat = spec.ctx("X|V")
    side = sat.side_code([v])
    plan1 = RulePlan(_kinds(n, spec.m1, SHARED), spec.m1, label="sp_satellite")
    _, x = run_pass(plan1, sat.base_llr[side], messages=w1, maps=maps, map_side=v, mode=spec.mode)
    return x, v


def sp_encode(spec: SpCodeSpec, w1, w2) -> np.ndarray:
    """Encode one block and return ``x``."""
    x, _ = sp_encode_batch(spec, np.asarray(w1)[None, :], np.asarray(w2)[None, :])
    return x[0]


def _decode_cloud(spec: SpCodeSpec, y, receiver: int) -> np.ndarray:
    n = spec.n
    y = np.asarray(y, dtype=np.int64)
    batch = y.shape[0]
    obs = spec.ctx(f"V|Y{receiver}")
    prior = spec.ctx("V")
    llr = stack_llr(obs.base_llr[obs.side_code([y])], prior.base_llr[np.zeros((batch, n), dtype=np.int64)])
    plan = RulePlan(_kinds(n, spec.m2, SHARED), spec.m2, decide_ctx=0, shared_ctx=1, label="sp_cloud")
    plan.kinds[spec.m2] = DECIDE
    u2, v = run_pass(plan, llr, maps=SharedMaps(spec.seed_key), mode=spec.mode)
    return u2, v


def sp_decode1_batch(spec: SpCodeSpec, y1) -> tuple[np.ndarray, np.ndarray]:
    """Receiver 1: returns ``(w1_hat, v_hat)``."""
    n = spec.n
    y1 = np.atleast_2d(np.asarray(y1, dtype=np.int64))
    if y1.shape[1] != n:
        raise ValueError(f"y1 must have length {n}")
    _, v_hat = _decode_cloud(spec, y1, 1)
    obs = spec.ctx("X|VY1")
    prior = spec.ctx("X|V")
    llr = stack_llr(obs.base_llr[obs.side_code([v_hat, y1])], prior.base_llr[prior.side_code([v_hat])])
    plan = RulePlan(_kinds(n, spec.m1, SHARED), spec.m1, decide_ctx=0, shared_ctx=1, label="sp_satellite")
    plan.kinds[spec.m1] = DECIDE
    u1, _ = run_pass(plan, llr, maps=SharedMaps(spec.seed_key), map_side=v_hat, mode=spec.mode)
    return u1[:, spec.m1], v_hat


def sp_decode2_batch(spec: SpCodeSpec, y2) -> np.ndarray:
    """Receiver 2: cloud message estimates, shape ``(B, |M2|)``."""
    y2 = np.atleast_2d(np.asarray(y2, dtype=np.int64))
    if y2.shape[1] != spec.n:
        raise ValueError(f"y2 must have length {spec.n}")
    u2, _ = _decode_cloud(spec, y2, 2)
    return u2[:, spec.m2]


def sp_decode1(spec: SpCodeSpec, y1) -> np.ndarray:
    return sp_decode1_batch(spec, np.asarray(y1)[None, :])[0][0]


def sp_decode2(spec: SpCodeSpec, y2) -> np.ndarray:
    return sp_decode2_batch(spec, np.asarray(y2)[None, :])[0]
