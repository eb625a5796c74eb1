"""Shared random maps as a keyed pseudo-random function.

Encoders and decoders evaluate the same randomized rules (``Psi``
thresholds and the fair-coin vector ``Gamma``) without exchanging them.
Every draw is a pure function of ``(seed_key, map label, index, digest of
the map's argument)``, so two parties holding the same key and the same
argument obtain the same bit.

The mixing function is the SplitMix64 finalizer on ``uint64`` lanes, which
vectorizes over a batch of blocks.
"""

from __future__ import annotations

import hashlib

import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)
_S11 = np.uint64(11)
_UNIT = 1.0 / 9007199254740992.0  # 2**-53


def mix64(z) -> np.ndarray:
    """SplitMix64 finalizer applied elementwise to ``uint64`` data."""
    z = np.array(z, dtype=np.uint64, ndmin=1)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def to_unit(z: np.ndarray) -> np.ndarray:
    """Map ``uint64`` words to floats uniform on ``[0, 1)``."""
    return (z >> _S11).astype(np.float64) * _UNIT


def label_key(seed_key: int, *labels) -> np.uint64:
    """Derive a 64-bit key from a master key and a tuple of labels."""
    h = hashlib.blake2b(digest_size=8)
    h.update(repr((int(seed_key), labels)).encode())
    return np.uint64(int.from_bytes(h.digest(), "little"))


class SharedMaps:
    """Keyed random maps shared by the encoder and all decoders.

    Parameters
    ----------
    seed_key : int
        Master key of the code.
    """

    def __init__(self, seed_key: int) -> None:
        self.seed_key = int(seed_key)

    def gamma(self, n: int) -> np.ndarray:
        """Prefix-independent fair-coin bits ``Gamma(j)``, ``j = 0..n-1``."""
        key = label_key(self.seed_key, "gamma")
        with np.errstate(over="ignore"):
            u = to_unit(mix64(key ^ mix64(np.arange(n, dtype=np.uint64))))
        return (u >= 0.5).astype(np.uint8)

    def initial_state(self, label: str, side: np.ndarray | None, batch: int) -> np.ndarray:
        """Digest of the map label and the conditioning sequence.

        Parameters
        ----------
        label : str
            Which map (e.g. ``"detbc_row2"``).
        side : ndarray or None
            Integer side-information sequences of shape ``(batch, n)``, or
            None when the map depends on the prefix only.
        batch : int
            Number of blocks.
        """
        key = label_key(self.seed_key, "psi", label)
        state = np.full(batch, key, dtype=np.uint64)
        if side is not None:
            side = np.asarray(side, dtype=np.uint64).reshape(batch, -1)
            pos = np.arange(side.shape[1], dtype=np.uint64)
            with np.errstate(over="ignore"):
                words = mix64((pos[None, :] << np.uint64(32)) ^ (side + np.uint64(1)) ^ key)
            state = mix64(state ^ np.bitwise_xor.reduce(words, axis=1))
        return state

    @staticmethod
    def draw(state: np.ndarray, j: int) -> np.ndarray:
        """Uniform draws for index ``j`` given the running prefix digest."""
        with np.errstate(over="ignore"):
            return to_unit(mix64(state ^ mix64(np.uint64(j) + _GOLDEN)))

    @staticmethod
    def advance(state: np.ndarray, j: int, bits: np.ndarray) -> np.ndarray:
        """Fold the decided bit at index ``j`` into the prefix digest."""
        with np.errstate(over="ignore"):
            step = np.uint64(2 * j + 1) + np.asarray(bits, dtype=np.uint64)
            return mix64(state + _GOLDEN * step)

    def psi_uniform(self, label: str, j: int, prefix, side=None) -> float:
        """Uniform draw of one map at index ``j`` for a single argument.

        Recomputes the digest from scratch; the incremental
        :meth:`draw`/:meth:`advance` path must agree with it.
        """
        side_arr = None if side is None else np.asarray(side)[None, :]
        state = self.initial_state(label, side_arr, 1)
        prefix = np.asarray(prefix, dtype=np.uint8).ravel()
        if prefix.size != j:
            raise ValueError(f"prefix must have length {j}")
        for k, b in enumerate(prefix):
            state = self.advance(state, k, np.array([b]))
        return float(self.draw(state, j)[0])
