"""Finite probability kernel: pmfs, joint tables, entropies, divergences.

All logarithms are base 2 and all probabilities are float64. Zero-mass
terms contribute nothing to entropies (``0 log 0 = 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

PMF_TOL = 1e-12
LN2 = math.log(2.0)


class DomainError(ValueError):
    """Argument outside the domain of a probability function."""


class ShapeError(ValueError):
    """Alphabet or axis mismatch."""


class DivergenceUndefinedError(ValueError):
    """``D(p||q)`` requested with ``p`` not absolutely continuous w.r.t. ``q``."""


def _check_probability(x: float, name: str = "x") -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0) or math.isnan(x):
        raise DomainError(f"{name} must lie in [0, 1], got {x}")
    return x


def _validated_weights(weights, tol: float = PMF_TOL) -> np.ndarray:
    w = np.array(weights, dtype=np.float64)
    if w.size == 0:
        raise ShapeError("empty distribution")
    if np.any(~np.isfinite(w)) or np.any(w < 0):
        raise DomainError("weights must be finite and nonnegative")
    total = w.sum()
    if abs(total - 1.0) > tol:
        raise DomainError(f"weights sum to {total!r}, expected 1")
    w.setflags(write=False)
    return w


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function over ``range(len(weights))``."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = _validated_weights(self.weights)
        if w.ndim != 1:
            raise ShapeError("a Pmf is one-dimensional")
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size

    @classmethod
    def uniform(cls, size: int) -> "Pmf":
        return cls(np.full(size, 1.0 / size))

    def entropy(self) -> float:
        return entropy(self.weights)


@dataclass(frozen=True, eq=False)
class JointTable:
    """Joint pmf over a product alphabet, one array axis per variable.

    Parameters
    ----------
    weights : array_like
        Nonnegative array summing to one.
    names : sequence of str, optional
        Variable names, one per axis. Defaults to ``("A0", "A1", ...)``.
    """

    weights: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        w = _validated_weights(self.weights)
        names = tuple(self.names) if self.names else tuple(f"A{k}" for k in range(w.ndim))
        if len(names) != w.ndim or len(set(names)) != len(names):
            raise ShapeError(f"need {w.ndim} distinct names, got {names}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "names", names)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self.weights.shape)

    def axis(self, name_or_axis) -> int:
        if isinstance(name_or_axis, (int, np.integer)):
            ax = int(name_or_axis)
            if not 0 <= ax < self.weights.ndim:
                raise ShapeError(f"axis {ax} out of range")
            return ax
        try:
            return self.names.index(name_or_axis)
        except ValueError:
            raise ShapeError(f"unknown variable {name_or_axis!r}; have {self.names}") from None

    def marginal(self, keep: Sequence) -> np.ndarray:
        """Marginal array over ``keep``, axes ordered as listed."""
        axes = [self.axis(k) for k in keep]
        if len(set(axes)) != len(axes):
            raise ShapeError("repeated axis in marginal")
        drop = tuple(a for a in range(self.weights.ndim) if a not in axes)
        m = self.weights.sum(axis=drop)
        remaining = [a for a in range(self.weights.ndim) if a in axes]
        return np.transpose(m, [remaining.index(a) for a in axes])

    def marginal_pmf(self, keep: Sequence) -> Pmf:
        return Pmf(self.marginal(keep).ravel())

    def pair_table(self, target, given: Sequence) -> np.ndarray:
        """Matrix ``P(target=t, given=s)`` with shape ``(|target|, prod |given|)``.

        The ``given`` variables are flattened in C order.
        """
        t = self.axis(target)
        g = [self.axis(a) for a in given]
        if t in g:
            raise ShapeError("target and conditioning axes overlap")
        m = self.marginal([t, *g])
        return m.reshape(m.shape[0], -1)


def binary_entropy(x: float) -> float:
    """Binary entropy ``h_b(x)`` in bits.

    Examples
    --------
    >>> binary_entropy(0.5)
    1.0
    """
    x = _check_probability(x)
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def star_convolve(a: float, b: float) -> float:
    """Binary convolution ``a * b = (1-a) b + a (1-b)``."""
    a = _check_probability(a, "a")
    b = _check_probability(b, "b")
    return (1.0 - a) * b + a * (1.0 - b)


def entropy(weights) -> float:
    """Shannon entropy in bits of a nonnegative array (need not be 1-D)."""
    p = np.asarray(weights, dtype=np.float64).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _as_table(joint) -> JointTable:
    return joint if isinstance(joint, JointTable) else JointTable(np.asarray(joint, dtype=np.float64))


def conditional_entropy(joint, target_axis, given_axes: Iterable = ()) -> float:
    """``H(target | given)`` in bits from a joint table.

    Parameters
    ----------
    joint : JointTable or array_like
        Joint distribution.
    target_axis : int or str
        Axis (or variable name) of the target.
    given_axes : iterable of int or str
        Conditioning axes; other axes are marginalized out.
    """
    table = _as_table(joint)
    given = list(given_axes)
    pair = table.pair_table(target_axis, given)
    return entropy(pair) - entropy(pair.sum(axis=0))


def mutual_information(joint, a_axes: Sequence, b_axes: Sequence, given_axes: Sequence = ()) -> float:
    """``I(A; B | C)`` in bits, each argument a list of axes or names."""
    table = _as_table(joint)
    a = [table.axis(x) for x in a_axes]
    b = [table.axis(x) for x in b_axes]
    c = [table.axis(x) for x in given_axes]
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise ShapeError("mutual information axes overlap")

    def h(axes):
        return entropy(table.marginal(axes)) if axes else 0.0

    return max(0.0, h(a + c) + h(b + c) - h(a + b + c) - h(c))


def bhattacharyya(joint) -> float:
    """Bhattacharyya parameter ``Z(T|V) = 2 sum_v sqrt(P(0,v) P(1,v))``.

    Parameters
    ----------
    joint : JointTable or array_like
        Joint over ``{0,1} x V``; axis 0 is the binary target and any
        remaining axes form the observation ``V``.

    Returns
    -------
    float
        ``Z`` clamped to ``[0, 1]``.

    Raises
    ------
    ShapeError
        If the first axis does not have size 2.
    """
    w = _as_table(joint).weights
    if w.shape[0] != 2:
        raise ShapeError(f"first coordinate must be binary, got size {w.shape[0]}")
    flat = w.reshape(2, -1)
    z = 2.0 * np.sqrt(flat[0] * flat[1]).sum()
    return float(min(1.0, max(0.0, z)))


def _pmf_weights(p) -> np.ndarray:
    return p.weights if isinstance(p, Pmf) else Pmf(np.asarray(p, dtype=np.float64).ravel()).weights


def kl_divergence(p, q) -> float:
    """Kullback-Leibler divergence ``D(p||q)`` in bits.

    Raises
    ------
    DivergenceUndefinedError
        If ``p`` puts mass where ``q`` has none.
    """
    pw, qw = _pmf_weights(p), _pmf_weights(q)
    if pw.shape != qw.shape:
        raise ShapeError("alphabet mismatch")
    mask = pw > 0
    if np.any(qw[mask] == 0):
        raise DivergenceUndefinedError("support(p) is not contained in support(q)")
    d = float((pw[mask] * np.log2(pw[mask] / qw[mask])).sum())
    return max(d, 0.0)


def total_variation(p, q) -> float:
    """Unnormalized total variation ``sum_x |p(x) - q(x)|``, in ``[0, 2]``."""
    pw, qw = _pmf_weights(p), _pmf_weights(q)
    if pw.shape != qw.shape:
        raise ShapeError("alphabet mismatch")
    return float(np.abs(pw - qw).sum())


def pinsker_bound(divergence_bits: float) -> float:
    """Upper bound ``sqrt(2 ln2 D)`` on the total variation for ``D`` in bits."""
    return math.sqrt(2.0 * LN2 * max(divergence_bits, 0.0))
