"""Monte-Carlo estimation of per-index Bhattacharyya parameters and entropies.

Blocks are sampled from the single-letter model, every context sees the
same blocks, and one genie-aided sweep per block gives the likelihood of
each index given its true prefix. With ``s = ln P(u|.) - ln P(1-u|.)`` for
the realized bit ``u``:

* ``sqrt(phi) = exp(-s/2)`` averages to ``Z``;
* ``-log2 P(u|.)`` averages to ``H``.

Realized conditionals below ``1e-300`` count as zero (``phi = 0``).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..fieldcore import log2_length
from .sc import genie_llrs

PHI_GUARD = 1e-300
_LOG_GUARD = math.log(PHI_GUARD)
_SAMPLE_BUDGET = 2**20  # letters per chunk


@dataclass(frozen=True, eq=False)
class IndexStats:
    """Per-index ``Z`` and ``H`` estimates for one context.

    Attributes
    ----------
    n : int
    z, h : ndarray
        Estimates clamped to ``[0, 1]``.
    sample_count : int
        Number of blocks (0 for exact statistics).
    std_error, h_std_error : ndarray
        Standard errors of the means (zero when exact).
    exact : bool
    """

    n: int
    z: np.ndarray
    h: np.ndarray
    sample_count: int
    std_error: np.ndarray
    h_std_error: np.ndarray
    exact: bool = False

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "z": self.z.tolist(),
            "h": self.h.tolist(),
            "sample_count": self.sample_count,
            "std_error": self.std_error.tolist(),
            "h_std_error": self.h_std_error.tolist(),
            "exact": self.exact,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IndexStats":
        return cls(
            n=int(d["n"]),
            z=np.asarray(d["z"], dtype=np.float64),
            h=np.asarray(d["h"], dtype=np.float64),
            sample_count=int(d["sample_count"]),
            std_error=np.asarray(d["std_error"], dtype=np.float64),
            h_std_error=np.asarray(d["h_std_error"], dtype=np.float64),
            exact=bool(d.get("exact", False)),
        )


def sample_letters(model, shape, rng: np.random.Generator) -> dict:
    """Draw i.i.d. letters from a joint model.

    Returns
    -------
    dict
        Variable name to integer array of the given shape.
    """
    cdf = np.cumsum(model.weights.ravel())
    cdf[-1] = 1.0
    flat = np.searchsorted(cdf, rng.random(shape), side="right")
    flat = np.minimum(flat, cdf.size - 1)
    coords = np.unravel_index(flat, model.dims)
    return {name: c.astype(np.int64) for name, c in zip(model.names, coords)}


def _chunk_size(n: int, num_samples: int) -> int:
    return max(1, min(num_samples, _SAMPLE_BUDGET // n))


def _chunk_sums(args) -> dict:
    contexts, n, count, seed, chunk_id = args
    model = next(iter(contexts.values())).model
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk_id,)))
    letters = sample_letters(model, (count, n), rng)
    out = {}
    for name, ctx in contexts.items():
        t = letters[ctx.target].astype(np.uint8)
        side = ctx.side_code([letters[s] for s in ctx.side]) if ctx.side else np.zeros((count, n), dtype=np.int64)
        lam, u = genie_llrs(ctx.base_llr[side], t)
        s = np.where(u == 0, lam, -lam)
        with np.errstate(over="ignore", invalid="ignore"):
            neg_log_p = np.logaddexp(0.0, -s)
            guarded = -neg_log_p < _LOG_GUARD
            root_phi = np.where(guarded, 0.0, np.exp(-0.5 * s))
        h = np.where(guarded, 0.0, neg_log_p / math.log(2.0))
        out[name] = np.stack([root_phi.sum(0), (root_phi**2).sum(0), h.sum(0), (h**2).sum(0)])
    return out


def estimate_many(contexts: dict, n: int, num_samples: int, seed: int, workers: int = 1) -> dict:
    """Estimate statistics for several contexts of one model on shared blocks.

    Parameters
    ----------
    contexts : dict
        Name to :class:`PolarContext`; all must share the same model.
    n : int
        Block length.
    num_samples : int
        Number of sampled blocks.
    seed : int
        Master seed; chunk ``c`` uses substream ``c``.
    workers : int
        Process count. Results do not depend on it.

    Returns
    -------
    dict
        Name to :class:`IndexStats`.
    """
    log2_length(n)
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")
    models = {id(c.model) for c in contexts.values()}
    if len(models) != 1:
        raise ValueError("contexts must share one model")
    size = _chunk_size(n, num_samples)
    jobs = []
    start = 0
    cid = 0
    while start < num_samples:
        count = min(size, num_samples - start)
        jobs.append((contexts, n, count, seed, cid))
        start += count
        cid += 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_chunk_sums, jobs))
    else:
        partials = [_chunk_sums(job) for job in jobs]
    result = {}
    for name in contexts:
        acc = np.zeros((4, n))
        for part in partials:
            acc = acc + part[name]
        mean_z = acc[0] / num_samples
        mean_h = acc[2] / num_samples
        if num_samples > 1:
            var_z = np.maximum(acc[1] - num_samples * mean_z**2, 0.0) / (num_samples - 1)
            var_h = np.maximum(acc[3] - num_samples * mean_h**2, 0.0) / (num_samples - 1)
        else:
            var_z = var_h = np.zeros(n)
        result[name] = IndexStats(
            n=n,
            z=np.clip(mean_z, 0.0, 1.0),
            h=np.clip(mean_h, 0.0, 1.0),
            sample_count=num_samples,
            std_error=np.sqrt(var_z / num_samples),
            h_std_error=np.sqrt(var_h / num_samples),
        )
    return result


def estimate_stats_mc(ctx, n: int, num_samples: int, seed: int, workers: int = 1) -> IndexStats:
    """Monte-Carlo :class:`IndexStats` for a single context."""
    return estimate_many({ctx.name: ctx}, n, num_samples, seed, workers)[ctx.name]
