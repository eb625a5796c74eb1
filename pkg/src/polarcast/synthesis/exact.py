"""Brute-force enumeration of synthesized bit channels for small blocks.

Everything here is computed from full joint tables over all sequences,
using an explicitly materialized transform matrix. It shares no code with
the recursive likelihood path, so it serves as the reference for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..prob import LN2

MAX_STATES = 2**24


class TooLargeError(ValueError):
    """Enumeration would exceed the state guard."""


def kron_transform_matrix(n: int) -> np.ndarray:
    """``G_n = F^{(x)l} B_n`` built from Kronecker powers and string reversal."""
    levels = int(round(math.log2(n)))
    if 2**levels != n or n < 2:
        raise ValueError("n must be a power of two >= 2")
    f = np.array([[1, 0], [1, 1]], dtype=np.int64)
    g = np.array([[1]], dtype=np.int64)
    for _ in range(levels):
        g = np.kron(g, f)
    b = np.zeros((n, n), dtype=np.int64)
    for j in range(n):
        b[j, int(format(j, f"0{levels}b")[::-1], 2)] = 1
    return (g @ b) % 2


def _index_bits(n: int) -> np.ndarray:
    """All length-n bit vectors, row k = binary expansion of k, first bit MSB."""
    k = np.arange(2**n)[:, None]
    return ((k >> np.arange(n - 1, -1, -1)[None, :]) & 1).astype(np.int64)


def transform_index_map(n: int) -> np.ndarray:
    """``perm[t] = u`` where ``u = t G_n`` for all sequence indices (MSB first)."""
    bits = _index_bits(n)
    u = (bits @ kron_transform_matrix(n)) % 2
    return (u * (1 << np.arange(n - 1, -1, -1))).sum(axis=1)


def _sequence_table(pair: np.ndarray, n: int) -> np.ndarray:
    """``P(s^n, t^n)`` with shape ``(|S|^n, 2^n)``, first letter most significant."""
    tab = pair
    for _ in range(n - 1):
        tab = np.einsum("ab,cd->acbd", tab, pair).reshape(tab.shape[0] * pair.shape[0], tab.shape[1] * 2)
    return tab


@dataclass(frozen=True)
class ExactBitChannel:
    """Exact law of ``U(j)`` given every prefix and side sequence.

    ``p0[s, k]`` and ``p1[s, k]`` are the joint masses of side sequence
    ``s`` (product-alphabet code, first letter most significant), prefix
    ``k`` (first bit most significant) and ``U(j) = 0`` or ``1``.
    """

    n: int
    j: int
    p0: np.ndarray
    p1: np.ndarray
    z: float
    h: float

    @property
    def cond0(self) -> np.ndarray:
        """``P(U(j)=0 | prefix, side)``, NaN where the context is unreachable."""
        tot = self.p0 + self.p1
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(tot > 0, self.p0 / tot, np.nan)


class ExactContextTable:
    """Joint table of ``(S^n, U^n)`` for one context, from full enumeration.

    Parameters
    ----------
    ctx : PolarContext
    n : int
        Block length; ``(2 |S|)^n`` must not exceed ``2**24``.
    """

    def __init__(self, ctx, n: int) -> None:
        pair = np.asarray(ctx.pair, dtype=np.float64)  # (|S|, 2)
        states = float(pair.size) ** n
        if states > MAX_STATES:
            raise TooLargeError(f"{pair.size}^{n} states exceed the enumeration guard of 2^24")
        self.n = n
        self.side_size = pair.shape[0]
        t_table = _sequence_table(pair, n)
        u_table = np.empty_like(t_table)
        u_table[:, transform_index_map(n)] = t_table
        self.table = u_table  # (|S|^n, 2^n)

    def prefix_joint(self, j: int) -> np.ndarray:
        """Joint of ``(S^n, U(0..j))`` with shape ``(|S|^n, 2^j, 2)``."""
        s = self.table.shape[0]
        return self.table.reshape(s, 2**j, 2, 2 ** (self.n - j - 1)).sum(axis=3)

    def bit_channel(self, j: int) -> ExactBitChannel:
        if not 0 <= j < self.n:
            raise ValueError(f"index {j} out of range for n={self.n}")
        pj = self.prefix_joint(j)
        p0, p1 = pj[..., 0], pj[..., 1]
        z = min(1.0, 2.0 * float(np.sqrt(p0 * p1).sum()))
        tot = p0 + p1
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(pj > 0, -pj * np.log2(pj / tot[..., None]), 0.0)
        h = min(1.0, max(0.0, float(terms.sum())))
        return ExactBitChannel(self.n, j, p0, p1, z, h)


def exact_bit_channel(ctx, j: int, n: int) -> ExactBitChannel:
    """Exact conditional law of ``U(j)`` (0-based) with its ``Z`` and ``H``."""
    return ExactContextTable(ctx, n).bit_channel(j)


def exact_stats(ctx, n: int, method: str = "auto"):
    """Exact ``Z`` and ``H`` at every index as :class:`IndexStats`.

    Parameters
    ----------
    ctx : PolarContext
    n : int
    method : {"auto", "enumerate", "evolve"}
        ``enumerate`` uses the full joint table; ``evolve`` tracks the
        atoms of the synthesized channels (see :func:`evolved_stats`).
        ``auto`` enumerates when the table fits the guard.
    """
    from .estimate import IndexStats

    if method not in ("auto", "enumerate", "evolve"):
        raise ValueError(f"unknown method {method!r}")
    fits = float(np.asarray(ctx.pair).size) ** n <= MAX_STATES
    if method == "evolve" or (method == "auto" and not fits):
        z, h = evolved_stats(ctx, n)
    else:
        table = ExactContextTable(ctx, n)
        chans = [table.bit_channel(j) for j in range(n)]
        z = np.array([c.z for c in chans])
        h = np.array([c.h for c in chans])
    return IndexStats(n=n, z=z, h=h, sample_count=0, std_error=np.zeros(n), h_std_error=np.zeros(n), exact=True)


# ---------------------------------------------------------------- atom evolution

MERGE_DIGITS = 12


def _merge_atoms(w0: np.ndarray, w1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Drop null atoms and pool atoms with the same likelihood ratio.

    Pooling proportional atoms leaves ``Z`` and ``H`` unchanged since both
    are positively homogeneous in ``(w0, w1)``. Ratios are compared after
    rounding the log ratio to ``MERGE_DIGITS`` decimals.
    """
    keep = (w0 + w1) > 0
    w0, w1 = w0[keep], w1[keep]
    with np.errstate(divide="ignore", invalid="ignore"):
        key = np.round(np.log(w0) - np.log(w1), MERGE_DIGITS)
    uniq, inv = np.unique(key, return_inverse=True)
    return np.bincount(inv, w0, uniq.size), np.bincount(inv, w1, uniq.size)


def _evolve(a0: np.ndarray, a1: np.ndarray, plus: int) -> tuple[np.ndarray, np.ndarray]:
    """One polarization step on a bit channel given by its atoms.

    An atom is a pair of joint masses ``(P(obs, T=0), P(obs, T=1))``. Two
    independent copies ``(T1, obs1)``, ``(T2, obs2)`` give the minus channel
    ``T1 xor T2`` and the plus channel ``T2`` with ``T1 xor T2`` revealed.
    """
    if a0.size * a0.size > MAX_STATES:
        raise TooLargeError(f"{a0.size}^2 atom pairs exceed the guard of 2^24")
    p00, p01 = np.multiply.outer(a0, a0).ravel(), np.multiply.outer(a0, a1).ravel()
    p10, p11 = np.multiply.outer(a1, a0).ravel(), np.multiply.outer(a1, a1).ravel()
    if not plus:
        return _merge_atoms(p00 + p11, p01 + p10)
    # revealed sum 0: (T1, T2) in {(0,0), (1,1)}; sum 1: {(1,0), (0,1)}
    return _merge_atoms(np.concatenate([p00, p10]), np.concatenate([p11, p01]))


def _atom_z_h(w0: np.ndarray, w1: np.ndarray) -> tuple[float, float]:
    tot = w0 + w1
    z = 2.0 * float(np.sqrt(w0 * w1).sum())
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(w0 > 0, w0 * np.log2(tot / w0), 0.0) + np.where(w1 > 0, w1 * np.log2(tot / w1), 0.0)
    return min(1.0, z), min(1.0, max(0.0, float(terms.sum())))


def evolved_stats(ctx, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``Z`` and ``H`` from the distributions of likelihood ratios.

    The bit channel of index ``j`` arises from the single-letter channel by
    ``log2 n`` minus/plus steps, the most significant bit of ``j`` first
    (0 for minus). Each step is evaluated exactly on the finite set of
    atoms, so no sequences are enumerated.

    Raises
    ------
    TooLargeError
        If a step would combine more than ``2**24`` atom pairs.
    """
    from ..fieldcore import log2_length

    levels = log2_length(n)
    pair = np.asarray(ctx.pair, dtype=np.float64)
    memo = {(): _merge_atoms(pair[:, 0].copy(), pair[:, 1].copy())}
    z = np.zeros(n)
    h = np.zeros(n)
    for j in range(n):
        path = tuple((j >> (levels - 1 - k)) & 1 for k in range(levels))
        for k in range(1, levels + 1):
            if path[:k] not in memo:
                memo[path[:k]] = _evolve(*memo[path[: k - 1]], path[k - 1])
        z[j], h[j] = _atom_z_h(*memo[path])
    return z, h


# ---------------------------------------------------------------- P versus Q


@dataclass(frozen=True)
class TVDiagnostic:
    """Exact comparison of the true law ``P`` and the perturbed law ``Q``."""

    tv_exact: float
    kl_bound: float
    divergence: float
    message_entropy_gap: float

    @property
    def holds(self) -> bool:
        return self.tv_exact <= self.kl_bound + 1e-12


def rows_joint(model, row_names, n: int) -> np.ndarray:
    """Joint of the transformed rows ``U_r = R_r^n G_n`` as a flat array.

    The index concatenates the rows in ``row_names`` order, each ``n`` bits
    with its first bit most significant.
    """
    m = len(row_names)
    if 2 ** (n * m) > MAX_STATES:
        raise TooLargeError(f"2^{n * m} states exceed the enumeration guard")
    letter = model.marginal(list(row_names))
    if letter.shape != (2,) * m:
        raise ValueError("rows must be binary variables")
    full = letter
    for _ in range(n - 1):
        full = np.multiply.outer(full, letter)
    # axes are (letter, row); regroup as (row, letter)
    full = full.reshape((2,) * (n * m))
    order = [l * m + r for r in range(m) for l in range(n)]
    full = np.transpose(full, order).reshape((2**n,) * m)
    perm = transform_index_map(n)
    out = full
    for r in range(m):
        moved = np.empty_like(out)
        idx = [slice(None)] * m
        idx[r] = perm
        moved[tuple(idx)] = out
        out = moved
    return out.reshape(-1)


def tv_from_joint(p: np.ndarray, uniform_positions) -> TVDiagnostic:
    """Build ``Q`` bit by bit and compare it with ``P``.

    Parameters
    ----------
    p : ndarray
        Flat joint over ``N`` bits (first bit most significant).
    uniform_positions : iterable of int
        Bit positions where ``Q`` uses a fair coin; all others use the
        true conditional of ``P`` given the preceding bits. An unreachable
        conditioning context also gets a fair coin.
    """
    p = np.asarray(p, dtype=np.float64)
    total_bits = int(round(math.log2(p.size)))
    uniform = set(int(k) for k in uniform_positions)
    q = np.ones_like(p)
    gap = 0.0
    for k in range(total_bits):
        pk = p.reshape(2**k, 2, -1).sum(axis=2)
        tot = pk.sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = np.where(tot > 0, pk / tot, 0.5)
        if k in uniform:
            terms = np.where(pk > 0, -pk * np.log2(np.where(pk > 0, cond, 1.0)), 0.0)
            gap += 1.0 - float(terms.sum())
            cond = np.full_like(cond, 0.5)
        q = (q.reshape(2**k, 2, -1) * cond[:, :, None]).reshape(-1)
    tv = float(np.abs(p - q).sum())
    mask = p > 0
    divergence = float((p[mask] * np.log2(p[mask] / q[mask])).sum())
    bound = math.sqrt(2.0 * LN2 * max(gap, 0.0))
    return TVDiagnostic(tv, bound, max(divergence, 0.0), gap)


def tv_diagnostic(bundle, sets, n: int) -> TVDiagnostic:
    """Exact total variation between the coded law and the ideal law.

    Parameters
    ----------
    bundle : SchemeBundle
        Scheme definition (row order and model).
    sets : PolarizationSets or dict
        Message sets. For Marton the second row uses a fair coin on all of
        ``H_V2|V1`` (message bits plus the shared fair-coin vector).
    n : int
        Block length (``n * rows <= 24``).
    """
    named = sets.sets if hasattr(sets, "sets") else sets
    scheme = bundle.scheme
    if scheme == "detbc":
        rows = [ctx.target for ctx in bundle.contexts.values()]
        per_row = [named[f"M{r[1:]}"] for r in rows]
    elif scheme == "superposition":
        rows = ["V", "X"]
        per_row = [named["M2"], named["M1"]]
    elif scheme == "marton":
        rows = ["V1", "V2"]
        per_row = [named["M1"], named["H_V2|V1"]]
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    p = rows_joint(bundle.model, rows, n)
    positions = [r * n + int(j) for r, idx in enumerate(per_row) for j in idx]
    return tv_from_joint(p, positions)


def oracle_max_diff(ctx, n: int) -> float:
    """Largest gap between SC and enumerated ``P(U(j)=0 | prefix, side)``.

    Runs over every index, every reachable side sequence and every prefix.
    """
    from .sc import prob_zero, sc_log_likelihood

    table = ExactContextTable(ctx, n)
    size = ctx.side_size
    codes = np.arange(size**n)
    side = np.stack([(codes // size ** (n - 1 - k)) % size for k in range(n)], axis=1)
    worst = 0.0
    for j in range(n):
        c0 = table.bit_channel(j).cond0
        for k in range(2**j):
            prefix = np.array([(k >> (j - 1 - i)) & 1 for i in range(j)], dtype=np.uint8)
            p = prob_zero(sc_log_likelihood(ctx, j, np.broadcast_to(prefix, (codes.size, j)), side))
            live = ~np.isnan(c0[:, k])
            if live.any():
                worst = max(worst, float(np.abs(p[live] - c0[live, k]).max()))
    return worst
