"""Polarization and message sets, and the alignment checks between them.

High-entropy sets collect indices with ``Z >= 1 - delta``, low-entropy sets
those with ``Z <= delta``; message sets are intersections of the two.

Two selectors are offered:

``threshold``
    ``delta = 2 ** -(n ** beta)`` (or an explicit ``delta``).
``backoff``
    Message sets of size ``k = floor(n (target - tau))``. Low-entropy
    (decoding) sets keep the threshold value and are loosened only when they
    hold fewer than ``k`` indices. The shortfall is taken from the
    high-entropy (uniformity) test instead: its threshold ``delta_high`` is
    raised until every message set has ``k`` candidates, and each message
    set is trimmed to its ``k`` most uniform indices. Reliability therefore
    stays at the asymptotic level while the encoder's input law departs
    slightly from the target. This is a finite-length selector, not the
    asymptotic rule.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .estimate import IndexStats, estimate_many
from .exact import exact_stats

Z_ORDER_TOL = 1e-12
BACKOFF_ROUNDING = 1e-12


class ConstructionError(RuntimeError):
    """A code cannot be constructed from the given sets or model."""


def polarization_delta(n: int, beta: float) -> float:
    """``delta_n = 2 ** -(n ** beta)``."""
    if not 0.0 < beta < 0.5:
        raise ValueError("beta must lie in (0, 1/2)")
    return 2.0 ** (-(n**beta))


@dataclass(eq=False)
class PolarizationSets:
    """Named index sets of one construction, with rates and provenance."""

    scheme: str
    n: int
    beta: float | None
    delta: float
    selector: str
    sets: dict
    message_keys: tuple
    rates: dict
    targets: dict
    stats: dict = field(default_factory=dict)
    tau: float | None = None
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    delta_high: float | None = None

    def __getitem__(self, key: str) -> np.ndarray:
        return self.sets[key]

    @property
    def eta(self) -> float | None:
        """Fraction of partially polarized indices ``|D1 u D2| / n`` (Marton)."""
        if "Delta_1" not in self.sets:
            return None
        return len(np.union1d(self.sets["Delta_1"], self.sets["Delta_2"])) / self.n

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "scheme": self.scheme,
            "beta": self.beta,
            "delta": self.delta,
            "delta_high": self.delta_high,
            "selector": self.selector,
            "tau": self.tau,
            "z": {k: s.z.tolist() for k, s in self.stats.items()},
            "h": {k: s.h.tolist() for k, s in self.stats.items()},
            "stats": {k: s.to_dict() for k, s in self.stats.items()},
            "sets": {k: [int(j) for j in v] for k, v in self.sets.items()},
            "message_keys": list(self.message_keys),
            "rates": self.rates,
            "targets": self.targets,
            "eta": self.eta,
            "notes": list(self.notes),
            "extra": self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "PolarizationSets":
        return cls(
            scheme=d["scheme"],
            n=int(d["n"]),
            beta=d.get("beta"),
            delta=float(d["delta"]),
            selector=d.get("selector", "threshold"),
            sets={k: np.asarray(v, dtype=np.int64) for k, v in d["sets"].items()},
            message_keys=tuple(d.get("message_keys", ())),
            rates=dict(d.get("rates", {})),
            targets=dict(d.get("targets", {})),
            stats={k: IndexStats.from_dict(v) for k, v in d.get("stats", {}).items()},
            tau=d.get("tau"),
            notes=list(d.get("notes", [])),
            extra=dict(d.get("extra", {})),
            delta_high=d.get("delta_high"),
        )


# ---------------------------------------------------------------- derivation


def _message_pairs(bundle) -> dict:
    """``(high-entropy context, low-entropy context or None)`` per message set."""
    if bundle.scheme == "detbc":
        return {f"M{ctx.target[1:]}": (name, None) for name, ctx in bundle.contexts.items()}
    if bundle.scheme == "superposition":
        return {"M1": ("X|V", "X|VY1"), "M2": ("V", "V|Y2")}
    if bundle.scheme == "marton":
        return {"M1": ("V1", "V1|Y1"), "M2": ("V2|V1", "V2|Y2")}
    raise ValueError(f"unknown scheme {bundle.scheme!r}")


def derive_sets(bundle, z: dict, delta: float, delta_high: float | None = None) -> dict:
    """All named sets of a scheme.

    Low-entropy sets use ``delta``; high-entropy sets use ``delta_high``
    (defaults to ``delta``).
    """
    n = len(next(iter(z.values())))
    dh = delta if delta_high is None else delta_high

    def hi(name):
        return np.flatnonzero(z[name] >= 1.0 - dh)

    def lo(name):
        return np.flatnonzero(z[name] <= delta)

    if bundle.scheme == "detbc":
        return {f"M{ctx.target[1:]}": hi(name) for name, ctx in bundle.contexts.items()}
    if bundle.scheme == "superposition":
        s = {
            "H_X|V": hi("X|V"),
            "L_X|VY1": lo("X|VY1"),
            "L_V|Y1": lo("V|Y1"),
            "H_V": hi("V"),
            "L_V|Y2": lo("V|Y2"),
        }
        s["M1v"] = np.intersect1d(s["H_V"], s["L_V|Y1"])
        s["M1"] = np.intersect1d(s["H_X|V"], s["L_X|VY1"])
        s["M2"] = np.intersect1d(s["H_V"], s["L_V|Y2"])
        return s
    if bundle.scheme == "marton":
        s = {
            "H_V1": hi("V1"),
            "L_V1|Y1": lo("V1|Y1"),
            "H_V2|V1": hi("V2|V1"),
            "L_V2|V1": lo("V2|V1"),
            "H_V2|Y2": hi("V2|Y2"),
            "L_V2|Y2": lo("V2|Y2"),
        }
        s["M1"] = np.intersect1d(s["H_V1"], s["L_V1|Y1"])
        s["M2"] = np.intersect1d(s["H_V2|V1"], s["L_V2|Y2"])
        full = np.arange(n)
        s["Delta_1"] = np.setdiff1d(full, np.union1d(s["H_V2|V1"], s["L_V2|V1"]))
        s["Delta_2"] = np.setdiff1d(full, np.union1d(s["H_V2|Y2"], s["L_V2|Y2"]))
        return s
    raise ValueError(f"unknown scheme {bundle.scheme!r}")


def _message_keys(bundle) -> tuple:
    if bundle.scheme == "detbc":
        return tuple(f"M{ctx.target[1:]}" for ctx in bundle.contexts.values())
    return ("M1", "M2")


def sets_from_stats(
    bundle,
    stats: dict,
    n: int,
    *,
    beta: float | None = 0.3,
    delta: float | None = None,
    selector: str = "threshold",
    tau: float | None = None,
) -> PolarizationSets:
    """Derive :class:`PolarizationSets` from per-context statistics."""
    z = {k: np.asarray(s.z, dtype=np.float64) for k, s in stats.items()}
    base_delta = delta if delta is not None else polarization_delta(n, beta)
    keys = _message_keys(bundle)
    notes = []
    delta_high = None
    if selector == "threshold":
        work_delta = base_delta
        sets = derive_sets(bundle, z, work_delta)
    elif selector == "backoff":
        if tau is None or tau < 0:
            raise ValueError("backoff selection needs tau >= 0")
        pairs = _message_pairs(bundle)
        sizes = {k: int(math.floor(n * max(bundle.targets[k] - tau, 0.0) + 1e-9)) for k in keys}
        work_delta = base_delta
        for k in keys:
            lo_ctx = pairs[k][1]
            if lo_ctx is not None and sizes[k] > 0:
                work_delta = max(work_delta, float(np.sort(z[lo_ctx])[sizes[k] - 1]))
        delta_high = base_delta
        for k in keys:
            hi_ctx, lo_ctx = pairs[k]
            cand = np.arange(n) if lo_ctx is None else np.flatnonzero(z[lo_ctx] <= work_delta)
            if sizes[k] > 0:
                zh = np.sort(z[hi_ctx][cand])[::-1]
                # slack keeps the k-th index inside after the 1 - (1 - z) round trip
                delta_high = max(delta_high, 1.0 - float(zh[sizes[k] - 1]) + BACKOFF_ROUNDING)
        if bundle.scheme != "detbc" and work_delta + delta_high >= 1.0:
            raise ConstructionError(
                f"backoff tau={tau} at n={n} needs delta={work_delta:.3g} and delta_high={delta_high:.3g}; "
                "high and low sets would overlap"
            )
        sets = derive_sets(bundle, z, work_delta, delta_high)
        for k in keys:
            hi_ctx = pairs[k][0]
            cand = sets[k]
            order = cand[np.argsort(-z[hi_ctx][cand], kind="stable")]
            sets[k] = np.sort(order[: sizes[k]])
        notes.append(
            f"backoff selector: tau={tau}, message sizes {sizes}, "
            f"delta {work_delta:.6g}, delta_high {delta_high:.6g}"
        )
    else:
        raise ValueError(f"unknown selector {selector!r}")
    rates = {k: len(sets[k]) / n for k in keys}
    result = PolarizationSets(
        scheme=bundle.scheme,
        n=n,
        beta=beta,
        delta=work_delta,
        selector=selector,
        sets=sets,
        message_keys=keys,
        rates=rates,
        targets=dict(bundle.targets),
        stats=dict(stats),
        tau=tau,
        notes=notes,
        extra={k: v for k, v in bundle.extra.items() if k != "pi"},
        delta_high=delta_high,
    )
    if bundle.scheme == "detbc":
        result.extra["pi"] = list(bundle.extra["pi"])
    return result


def build_sets(
    bundle,
    n: int,
    beta: float = 0.3,
    num_samples: int = 10000,
    seed: int = 0,
    *,
    selector: str = "threshold",
    tau: float | None = None,
    delta: float | None = None,
    exact: bool = False,
    workers: int = 1,
) -> PolarizationSets:
    """Estimate statistics for every context of ``bundle`` and derive sets.

    Parameters
    ----------
    bundle : SchemeBundle
    n : int
        Block length.
    beta : float
        Exponent of ``delta_n = 2 ** -(n ** beta)``.
    num_samples, seed : int
        Monte-Carlo budget and master seed (ignored when ``exact``).
    selector : {"threshold", "backoff"}
    tau : float, optional
        Rate backoff for the ``backoff`` selector.
    delta : float, optional
        Explicit threshold overriding ``delta_n``.
    exact : bool
        Use full enumeration instead of sampling (small ``n`` only).
    workers : int
        Processes for sampling; results do not depend on it.
    """
    if exact:
        stats = {name: exact_stats(ctx, n) for name, ctx in bundle.contexts.items()}
    else:
        stats = estimate_many(bundle.contexts, n, num_samples, seed, workers)
    return sets_from_stats(bundle, stats, n, beta=beta, delta=delta, selector=selector, tau=tau)


# ---------------------------------------------------------------- alignment


@dataclass
class AlignmentReport:
    """Subset relations and Bhattacharyya orderings that failed."""

    scheme: str
    violations: dict = field(default_factory=dict)
    z_order_violations: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(len(v) for v in self.violations.values()) and not any(
            len(v) for v in self.z_order_violations.values()
        )


def _not_subset(a, b) -> list:
    return [int(j) for j in np.setdiff1d(a, b)]


def check_alignment(sets: PolarizationSets, scheme: str | None = None) -> AlignmentReport:
    """Check the nesting relations required by the two-user decoders.

    Superposition: ``M2`` inside ``M1v``. Marton: ``L_V2|V1`` inside
    ``L_V2|Y2`` and ``H_V2|Y2`` inside ``H_V2|V1``. For exact statistics the
    index-wise ordering ``Z(. | stronger) <= Z(. | weaker)`` is also checked.
    """
    scheme = scheme or sets.scheme
    report = AlignmentReport(scheme)
    s = sets.sets
    if scheme == "superposition":
        report.violations["M2<=M1v"] = _not_subset(s["M2"], s["M1v"])
        pairs = [("V|Y1", "V|Y2"), ("X|VY1", "X|V")]
    elif scheme == "marton":
        report.violations["L_V2|V1<=L_V2|Y2"] = _not_subset(s["L_V2|V1"], s["L_V2|Y2"])
        report.violations["H_V2|Y2<=H_V2|V1"] = _not_subset(s["H_V2|Y2"], s["H_V2|V1"])
        pairs = [("V2|Y2", "V2|V1")]
    else:
        raise ValueError("alignment is defined for superposition and marton")
    for strong, weak in pairs:
        st, wk = sets.stats.get(strong), sets.stats.get(weak)
        if st is not None and wk is not None and st.exact and wk.exact:
            bad = np.flatnonzero(st.z > wk.z + Z_ORDER_TOL)
            report.z_order_violations[f"Z({strong})<=Z({weak})"] = [int(j) for j in bad]
    return report
