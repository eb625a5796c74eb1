"""Binary polar transform and its index arithmetic.

The transform maps a row vector ``x`` of length ``n = 2**l`` to ``x G_n``
over GF(2), where ``G_n = F^{(x)l} B_n``, ``F = [[1, 0], [1, 1]]`` and
``B_n`` is the bit-reversal permutation. ``G_n`` is its own inverse.

All indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InvalidLengthError(ValueError):
    """Raised when a block length is not a power of two (at least 2)."""


def log2_length(n: int) -> int:
    """Return ``l`` with ``n == 2**l``, validating ``n``.

    Parameters
    ----------
    n : int
        Block length.

    Returns
    -------
    int
        Number of butterfly levels.

    Raises
    ------
    InvalidLengthError
        If ``n`` is not a power of two or is smaller than 2.
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise InvalidLengthError(f"block length must be an integer, got {n!r}")
    n = int(n)
    if n < 2 or n & (n - 1):
        raise InvalidLengthError(f"block length must be a power of two >= 2, got {n}")
    return n.bit_length() - 1


def bit_reversal_permutation(n: int) -> np.ndarray:
    """Bit-reversal permutation of ``range(n)``.

    Parameters
    ----------
    n : int
        Power-of-two length.

    Returns
    -------
    numpy.ndarray
        Integer array ``perm`` where ``perm[j]`` is ``j`` with its
        ``log2(n)``-bit binary representation reversed.

    Examples
    --------
    >>> bit_reversal_permutation(8).tolist()
    [0, 4, 2, 6, 1, 5, 3, 7]
    """
    levels = log2_length(n)
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(levels):
        rev |= ((idx >> b) & 1) << (levels - 1 - b)
    return rev


@dataclass(frozen=True)
class TransformPlan:
    """Precomputed data for transforms of one block length."""

    n: int
    levels: int = field(init=False)
    bit_reversal: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", log2_length(self.n))
        perm = bit_reversal_permutation(self.n)
        perm.setflags(write=False)
        object.__setattr__(self, "bit_reversal", perm)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Transform the last axis of ``x`` (see :func:`polar_transform`)."""
        return polar_transform(x)


def _as_bits(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim == 0:
        raise InvalidLengthError("expected a bit sequence, got a scalar")
    if arr.dtype == np.bool_:
        arr = arr.astype(np.uint8)
    elif not np.issubdtype(arr.dtype, np.integer):
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("bit blocks must contain only 0 and 1")
        arr = arr.astype(np.uint8)
    elif arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError("bit blocks must contain only 0 and 1")
    return arr.astype(np.uint8, copy=False)


def butterfly(x: np.ndarray) -> np.ndarray:
    """Multiply the last axis of ``x`` by ``F^{(x)l}`` (no bit reversal).

    Each pass XORs the second half of every sub-block into the first half,
    matching ``(a, b) F = (a ^ b, b)`` applied recursively.
    """
    u = _as_bits(x).copy()
    n = u.shape[-1]
    log2_length(n)
    lead = u.shape[:-1]
    half = n // 2
    while half >= 1:
        v = u.reshape(*lead, n // (2 * half), 2, half)
        v[..., 0, :] ^= v[..., 1, :]
        half //= 2
    return u


def polar_transform(x) -> np.ndarray:
    """Apply ``G_n`` to the last axis of a bit array.

    Parameters
    ----------
    x : array_like
        Bits with shape ``(..., n)``; ``n`` must be a power of two.

    Returns
    -------
    numpy.ndarray
        ``x G_n`` as ``uint8`` with the same shape.

    Raises
    ------
    InvalidLengthError
        If the last axis length is not a power of two.

    Examples
    --------
    >>> polar_transform([1, 0]).tolist()
    [1, 0]
    >>> polar_transform([0, 1]).tolist()
    [1, 1]
    """
    arr = _as_bits(x)
    n = arr.shape[-1]
    u = butterfly(arr)
    return u[..., bit_reversal_permutation(n)]
