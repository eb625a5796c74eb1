"""Successive-cancellation likelihood recursion in the log domain.

A log-likelihood ratio ``lam = ln P(U=0|.) - ln P(U=1|.)`` is carried
for every synthesized bit; ``+inf``/``-inf`` mark deterministic bits.

Two evaluation routes share the combining rules:

* :func:`genie_llrs` processes whole blocks whose bits are known (code
  construction, oracle checks). It combines adjacent half-blocks bottom-up:
  the odd-position rule takes the first half's likelihood for the XOR of
  the prefix pair and the second half's for the even bits.
* :class:`SuccessiveCanceller` decides bits one at a time through a
  callback (encoding and decoding). It walks the natural-order
  ``F^{(x)l}`` tree on the bit-reversed observation sequence, which yields
  the same bit channels because ``G_n = B_n F^{(x)l}``.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..fieldcore import bit_reversal_permutation, log2_length, polar_transform


def combine_odd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Log-domain form of ``(L1 L2 + 1) / (L1 + L2)``.

    Uses ``sign(a) sign(b) min(|a|, |b|)`` plus the exact log-sum-exp
    correction, which stays finite when either input is infinite.
    """
    with np.errstate(invalid="ignore"):
        main = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        corr = np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    # both inputs infinite: the correction vanishes
    return main + np.where(np.isnan(corr), 0.0, corr)


def combine_even(a: np.ndarray, b: np.ndarray, prev_bit: np.ndarray) -> np.ndarray:
    """Log-domain form of ``L1^gamma L2`` with ``gamma = 1 - 2 prev_bit``.

    A contradiction (``+inf`` against ``-inf``) has zero probability under
    the model; it is mapped to an uninformative ``0``.
    """
    with np.errstate(invalid="ignore"):
        out = b + np.where(prev_bit != 0, -a, a)
    return np.where(np.isnan(out), 0.0, out)


def genie_llrs(llr0: np.ndarray, t_bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Likelihoods of every index given the true prefix.

    Parameters
    ----------
    llr0 : ndarray, shape (B, n)
        Single-letter log-likelihood ratios of ``T`` given ``S`` at each
        position.
    t_bits : ndarray, shape (B, n)
        Realized source bits ``T``.

    Returns
    -------
    lam : ndarray, shape (B, n)
        ``lam[:, j]`` is the log-likelihood ratio of ``U(j)`` given
        ``U(0..j-1)`` and ``S^n``.
    u : ndarray, shape (B, n)
        ``U = T G_n``.
    """
    lam = np.asarray(llr0, dtype=np.float64)
    bits = np.asarray(t_bits, dtype=np.uint8)
    if lam.shape != bits.shape or lam.ndim != 2:
        raise ValueError("llr0 and t_bits must both have shape (B, n)")
    batch, n = lam.shape
    log2_length(n)
    m = 1
    while m < n:
        # blocks of size m, paired as (first half, second half) of size 2m
        lam = lam.reshape(batch, n // (2 * m), 2, m)
        bits = bits.reshape(batch, n // (2 * m), 2, m)
        la, lb = lam[:, :, 0, :], lam[:, :, 1, :]
        ba, bb = bits[:, :, 0, :], bits[:, :, 1, :]
        odd_bits = ba ^ bb
        new_lam = np.empty((batch, n // (2 * m), m, 2))
        new_lam[..., 0] = combine_odd(la, lb)
        new_lam[..., 1] = combine_even(la, lb, odd_bits)
        new_bits = np.empty((batch, n // (2 * m), m, 2), dtype=np.uint8)
        new_bits[..., 0] = odd_bits
        new_bits[..., 1] = bb
        m *= 2
        lam = new_lam.reshape(batch, n)
        bits = new_bits.reshape(batch, n)
    return lam, bits


DecideFn = Callable[[int, np.ndarray], np.ndarray]


class SuccessiveCanceller:
    """Bit-by-bit SC pass over a batch of blocks.

    Parameters
    ----------
    n : int
        Block length.

    Notes
    -----
    ``run`` takes log-likelihood ratios of shape ``(C, B, n)``: ``C``
    observation contexts that share the decided bits (for instance the
    decoder's channel output and the prefix-only law used by a shared random
    map). The callback ``decide(j, lam_j)`` receives ``lam_j`` of shape
    ``(C, B)`` and returns the ``B`` bits chosen for index ``j``.
    """

    def __init__(self, n: int) -> None:
        self.n = n
        log2_length(n)
        self.perm = bit_reversal_permutation(n)

    def run(self, llr0: np.ndarray, decide: DecideFn) -> tuple[np.ndarray, np.ndarray]:
        """Run the pass.

        Returns
        -------
        u : ndarray, shape (B, n)
            Decided bits in index order.
        t : ndarray, shape (B, n)
            ``u G_n``, the reconstructed source sequence.
        """
        lam = np.asarray(llr0, dtype=np.float64)
        if lam.ndim == 2:
            lam = lam[None]
        if lam.shape[-1] != self.n:
            raise ValueError(f"expected length {self.n}, got {lam.shape[-1]}")
        batch = lam.shape[1]
        u = np.zeros((batch, self.n), dtype=np.uint8)

        def leaf(j: int, lam_j: np.ndarray) -> np.ndarray:
            bit = np.asarray(decide(j, lam_j), dtype=np.uint8)
            u[:, j] = bit
            return bit

        x = self._node(lam[..., self.perm], 0, leaf)
        return u, x[:, self.perm]

    def _node(self, lam: np.ndarray, j0: int, leaf) -> np.ndarray:
        m = lam.shape[-1]
        if m == 2:
            la, lb = lam[..., 0], lam[..., 1]
            b0 = leaf(j0, combine_odd(la, lb))
            b1 = leaf(j0 + 1, combine_even(la, lb, b0[None]))
            return np.stack([b0 ^ b1, b1], axis=-1)
        h = m // 2
        la, lb = lam[..., :h], lam[..., h:]
        left = self._node(combine_odd(la, lb), j0, leaf)
        right = self._node(combine_even(la, lb, left[None]), j0 + h, leaf)
        return np.concatenate([left ^ right, right], axis=-1)


def sc_log_likelihood(ctx, j: int, prefix, side) -> np.ndarray:
    """Log-likelihood ratio of ``U(j)`` given a prefix and side information.

    Parameters
    ----------
    ctx : PolarContext
    j : int
        0-based index.
    prefix : array_like, shape (..., j)
        Bits ``U(0..j-1)``.
    side : array_like, shape (..., n)
        Product-alphabet side-information codes (zeros without side info).

    Returns
    -------
    ndarray
        Log-likelihood ratios with the broadcast batch shape.
    """
    side = np.asarray(side, dtype=np.int64)
    prefix = np.asarray(prefix, dtype=np.uint8)
    n = side.shape[-1]
    log2_length(n)
    if not 0 <= j < n or prefix.shape[-1] != j:
        raise ValueError(f"prefix must have length j={j} < n={n}")
    batch_shape = np.broadcast_shapes(side.shape[:-1], prefix.shape[:-1])
    count = int(np.prod(batch_shape, dtype=np.int64))
    side = np.broadcast_to(side, batch_shape + (n,)).reshape(count, n)
    prefix = np.broadcast_to(prefix, batch_shape + (j,)).reshape(count, j)
    u = np.zeros((side.shape[0], n), dtype=np.uint8)
    u[:, :j] = prefix
    # any completion of the prefix works: index j only sees bits before it
    t = polar_transform(u)
    lam, _ = genie_llrs(ctx.base_llr[side], t)
    return lam[:, j].reshape(batch_shape)


def sc_likelihood(ctx, j: int, prefix, side) -> np.ndarray:
    """Likelihood ratio ``P(U(j)=0|.) / P(U(j)=1|.)`` in ``[0, inf]``."""
    with np.errstate(over="ignore"):
        return np.exp(sc_log_likelihood(ctx, j, prefix, side))


def prob_zero(lam: np.ndarray) -> np.ndarray:
    """``P(U=0) = L / (1 + L)`` from a log-likelihood ratio, stably."""
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(lam, dtype=np.float64)))
