"""Broadcast-channel models, rate evaluators and the class-hierarchy checks.

Models
------
``DeterministicBC``
    ``m`` binary outputs, each a lookup table of the input.
``NoisyBC``
    Two receivers with kernel ``P(y1, y2 | x)`` stored as an array of
    shape ``(|X|, |Y1|, |Y2|)``.
``SuperpositionChain``
    Binary cloud center ``V``, satellite ``X`` and a ``NoisyBC``.
``MartonConfig``
    Binary auxiliaries ``(V1, V2)``, a map ``x = phi(v1, v2)`` and a ``NoisyBC``.

The BEC erasure symbol is output index 2.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .prob import (
    JointTable,
    Pmf,
    ShapeError,
    binary_entropy,
    conditional_entropy,
    entropy,
    mutual_information,
    star_convolve,
)

ROW_TOL = 1e-12
DEGRADATION_TOL = 1e-9
SWEEP_TOL = 1e-12


class ConfigError(ValueError):
    """Invalid model parameters or channel document."""


class UnsupportedChannelError(ValueError):
    """Operation not defined for this kind of channel."""


def _row_stochastic(table, name: str) -> np.ndarray:
    k = np.array(table, dtype=np.float64)
    if k.ndim < 2:
        raise ConfigError(f"{name} must have at least two axes")
    if np.any(~np.isfinite(k)) or np.any(k < 0):
        raise ConfigError(f"{name} has negative or non-finite entries")
    sums = k.reshape(k.shape[0], -1).sum(axis=1)
    if np.any(np.abs(sums - 1.0) > ROW_TOL):
        raise ConfigError(f"{name} rows must sum to 1, got {sums}")
    k.setflags(write=False)
    return k


def _as_pmf(px, size: int | None = None) -> Pmf:
    p = px if isinstance(px, Pmf) else Pmf(np.asarray(px, dtype=np.float64))
    if size is not None and len(p) != size:
        raise ConfigError(f"distribution has {len(p)} entries, expected {size}")
    return p


# ---------------------------------------------------------------- models


@dataclass(frozen=True, eq=False)
class DeterministicBC:
    """Deterministic broadcast channel with binary outputs ``y_i = f_i(x)``."""

    input_alphabet_size: int
    functions: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        size = int(self.input_alphabet_size)
        if size < 1:
            raise ConfigError("input alphabet must be nonempty")
        tables = []
        for i, f in enumerate(self.functions):
            arr = np.array(f, dtype=np.int64)
            if arr.shape != (size,):
                raise ConfigError(f"f_{i + 1} must have {size} entries")
            if np.any((arr != 0) & (arr != 1)):
                raise ConfigError(f"f_{i + 1} must map into {{0, 1}}")
            arr.setflags(write=False)
            tables.append(arr)
        if not tables:
            raise ConfigError("need at least one receiver")
        object.__setattr__(self, "input_alphabet_size", size)
        object.__setattr__(self, "functions", tuple(tables))

    @property
    def m(self) -> int:
        return len(self.functions)

    def outputs(self, x) -> np.ndarray:
        """Outputs for input symbols ``x``; shape ``(m, *x.shape)``."""
        x = np.asarray(x)
        return np.stack([f[x] for f in self.functions])

    def joint(self, px) -> JointTable:
        """Joint table over ``(X, Y1, ..., Ym)``."""
        p = _as_pmf(px, self.input_alphabet_size)
        w = np.zeros((self.input_alphabet_size,) + (2,) * self.m)
        for x in range(self.input_alphabet_size):
            w[(x, *(int(f[x]) for f in self.functions))] = p.weights[x]
        return JointTable(w, ("X",) + tuple(f"Y{i + 1}" for i in range(self.m)))

    def consistent_input_table(self) -> np.ndarray:
        """Smallest input consistent with each output tuple, or -1.

        Indexed by the output tuple flattened in C order (``y1`` most
        significant).
        """
        table = np.full(2**self.m, -1, dtype=np.int64)
        for x in range(self.input_alphabet_size - 1, -1, -1):
            code = 0
            for f in self.functions:
                code = 2 * code + int(f[x])
            table[code] = x
        return table


@dataclass(frozen=True, eq=False)
class NoisyBC:
    """Two-receiver DM-BC with kernel ``P(y1, y2 | x)``."""

    kernel: np.ndarray

    def __post_init__(self) -> None:
        k = _row_stochastic(self.kernel, "kernel")
        if k.ndim != 3:
            raise ConfigError("kernel must have shape (|X|, |Y1|, |Y2|)")
        object.__setattr__(self, "kernel", k)

    @property
    def input_alphabet_size(self) -> int:
        return self.kernel.shape[0]

    @property
    def output_alphabet_sizes(self) -> tuple[int, int]:
        return self.kernel.shape[1], self.kernel.shape[2]

    def leg(self, i: int) -> np.ndarray:
        """Marginal kernel ``P(y_i | x)`` for receiver ``i`` in {1, 2}."""
        if i == 1:
            return self.kernel.sum(axis=2)
        if i == 2:
            return self.kernel.sum(axis=1)
        raise ConfigError(f"receiver must be 1 or 2, got {i}")

    def joint(self, px) -> JointTable:
        p = _as_pmf(px, self.input_alphabet_size)
        return JointTable(p.weights[:, None, None] * self.kernel, ("X", "Y1", "Y2"))

    def sample(self, x: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Draw channel outputs for input symbols ``x`` (any shape)."""
        x = np.asarray(x)
        _, s1, s2 = self.kernel.shape
        cdf = np.cumsum(self.kernel.reshape(self.input_alphabet_size, -1), axis=1)
        r = rng.random(x.shape)
        idx = (r[..., None] >= cdf[x]).sum(axis=-1)
        idx = np.minimum(idx, s1 * s2 - 1)
        return idx // s2, idx % s2


@dataclass(frozen=True, eq=False)
class SuperpositionChain:
    """Binary cloud center ``V``, satellite ``X`` and channel, ``V - X - (Y1, Y2)``."""

    pv: Pmf
    px_given_v: np.ndarray
    channel: NoisyBC

    def __post_init__(self) -> None:
        pv = _as_pmf(self.pv)
        if len(pv) != 2:
            raise ConfigError("the cloud center V must be binary")
        k = _row_stochastic(self.px_given_v, "px_given_v")
        if k.shape != (2, self.channel.input_alphabet_size):
            raise ConfigError("px_given_v must have shape (2, |X|)")
        object.__setattr__(self, "pv", pv)
        object.__setattr__(self, "px_given_v", k)

    def joint(self) -> JointTable:
        w = (
            self.pv.weights[:, None, None, None]
            * self.px_given_v[:, :, None, None]
            * self.channel.kernel[None, :, :, :]
        )
        return JointTable(w, ("V", "X", "Y1", "Y2"))


@dataclass(frozen=True, eq=False)
class MartonConfig:
    """Binary auxiliaries ``(V1, V2)`` with ``x = phi(v1, v2)``."""

    pv1v2: np.ndarray
    phi: np.ndarray
    channel: NoisyBC

    def __post_init__(self) -> None:
        p = JointTable(np.asarray(self.pv1v2, dtype=np.float64)).weights
        if p.shape != (2, 2):
            raise ConfigError("pv1v2 must be a 2x2 table")
        phi = np.array(self.phi, dtype=np.int64)
        if phi.shape != (2, 2):
            raise ConfigError("phi must be a 2x2 lookup table")
        if phi.min() < 0 or phi.max() >= self.channel.input_alphabet_size:
            raise ConfigError("phi maps outside the input alphabet")
        phi.setflags(write=False)
        object.__setattr__(self, "pv1v2", p)
        object.__setattr__(self, "phi", phi)

    def joint(self) -> JointTable:
        nx = self.channel.input_alphabet_size
        ind = np.zeros((2, 2, nx))
        for v1, v2 in itertools.product(range(2), repeat=2):
            ind[v1, v2, self.phi[v1, v2]] = 1.0
        w = self.pv1v2[:, :, None, None, None] * ind[:, :, :, None, None] * self.channel.kernel[None, None]
        return JointTable(w, ("V1", "V2", "X", "Y1", "Y2"))


# ---------------------------------------------------------------- builders


def bsc_kernel(p: float) -> np.ndarray:
    return np.array([[1.0 - p, p], [p, 1.0 - p]])


def bec_kernel(eps: float) -> np.ndarray:
    return np.array([[1.0 - eps, 0.0, eps], [0.0, 1.0 - eps, eps]])


def product_channel(leg1, leg2) -> NoisyBC:
    """NoisyBC whose legs are conditionally independent given ``X``."""
    k1 = np.asarray(leg1, dtype=np.float64)
    k2 = np.asarray(leg2, dtype=np.float64)
    if k1.shape[0] != k2.shape[0]:
        raise ConfigError("legs must share the input alphabet")
    return NoisyBC(k1[:, :, None] * k2[:, None, :])


def blackwell() -> DeterministicBC:
    """Blackwell channel: ``x -> (y1, y2)`` is ``0 -> (0,0), 1 -> (0,1), 2 -> (1,1)``.

    The output pair ``(1, 0)`` never occurs.
    """
    return DeterministicBC(3, (np.array([0, 0, 1]), np.array([0, 1, 1])))


def _check_crossover(p: float, name: str) -> float:
    p = float(p)
    if not 0.0 <= p < 0.5:
        raise ConfigError(f"{name} must lie in [0, 1/2), got {p}")
    return p


def bsc_pair(p1: float, p2: float) -> NoisyBC:
    """Binary symmetric BC: ``Y1 = BSC(p1)(X)``, ``Y2 = BSC(p2)(X)``."""
    p1 = _check_crossover(p1, "p1")
    p2 = _check_crossover(p2, "p2")
    return product_channel(bsc_kernel(p1), bsc_kernel(p2))


def bec_bsc(eps: float, p: float) -> NoisyBC:
    """``Y1 = BSC(p)(X)`` and ``Y2 = BEC(eps)(X)`` with erasure symbol 2."""
    p = _check_crossover(p, "p")
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise ConfigError(f"eps must lie in (0, 1), got {eps}")
    return product_channel(bsc_kernel(p), bec_kernel(eps))


def example2_chain(alpha: float, p1: float, p2: float) -> SuperpositionChain:
    """Fair ``V`` with ``X = V xor Bernoulli(alpha)`` over ``bsc_pair(p1, p2)``."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError("alpha must lie in [0, 1]")
    return SuperpositionChain(Pmf([0.5, 0.5]), bsc_kernel(alpha), bsc_pair(p1, p2))


def two_bit_marton(r: float, q: float, p1: float = 0.0) -> MartonConfig:
    """Marton configuration with ``X = (V1, V2)`` sent over two binary legs.

    ``P(V1 != V2) = r`` with fair marginals, ``x = 2 v1 + v2``, receiver 1
    sees ``V1`` through ``BSC(p1)`` and receiver 2 sees ``V2`` through
    ``BSC(q)``.
    """
    q = _check_crossover(q, "q")
    p1 = _check_crossover(p1, "p1")
    if not 0.0 <= r <= 1.0:
        raise ConfigError("r must lie in [0, 1]")
    pv = np.array([[1.0 - r, r], [r, 1.0 - r]]) / 2.0
    leg1 = np.repeat(bsc_kernel(p1), 2, axis=0)
    leg2 = np.tile(bsc_kernel(q), (2, 1))
    return MartonConfig(pv, np.array([[0, 1], [2, 3]]), product_channel(leg1, leg2))


# ---------------------------------------------------------------- rates


def det_region_vertex(ch: DeterministicBC, px, pi: Sequence[int] | None = None) -> np.ndarray:
    """Vertex of the deterministic-BC region for receiver order ``pi``.

    Parameters
    ----------
    ch : DeterministicBC
    px : Pmf or array_like
        Input distribution.
    pi : sequence of int, optional
        Receiver order (0-based); identity by default.

    Returns
    -------
    numpy.ndarray
        Rates indexed by receiver: ``R[pi[i]] = H(Y_pi[i] | Y_pi[0..i-1])``.
        They sum to ``H(Y1, ..., Ym)``.
    """
    pi = check_permutation(pi, ch.m)
    joint = ch.joint(px)
    rates = np.zeros(ch.m)
    for i, r in enumerate(pi):
        given = [f"Y{k + 1}" for k in pi[:i]]
        rates[r] = conditional_entropy(joint, f"Y{r + 1}", given)
    return rates


def check_permutation(pi, m: int) -> tuple[int, ...]:
    if pi is None:
        return tuple(range(m))
    pi = tuple(int(k) for k in pi)
    if sorted(pi) != list(range(m)):
        raise ConfigError(f"invalid permutation {pi} of {m} receivers")
    return pi


def cover_rates(chain: SuperpositionChain) -> tuple[float, float, float]:
    """Return ``(I(X;Y1|V), I(V;Y2), I(X;Y1))`` for a superposition chain."""
    j = chain.joint()
    return (
        mutual_information(j, ["X"], ["Y1"], ["V"]),
        mutual_information(j, ["V"], ["Y2"]),
        mutual_information(j, ["X"], ["Y1"]),
    )


def marton_rates(cfg: MartonConfig) -> tuple[float, float]:
    """Return ``(I(V1;Y1), I(V2;Y2) - I(V1;V2))``; the second may be negative."""
    j = cfg.joint()
    r1 = mutual_information(j, ["V1"], ["Y1"])
    r2 = mutual_information(j, ["V2"], ["Y2"]) - mutual_information(j, ["V1"], ["V2"])
    return r1, r2


# ---------------------------------------------------------------- degradation


def is_stochastically_degraded(k1, k2, tol: float = DEGRADATION_TOL) -> bool:
    """Whether ``k2 = k1 @ P`` for some row-stochastic ``P``.

    Decided by a phase-one linear program: nonnegative slacks absorb the
    matching constraints and the instance is feasible when their minimal
    total is at most ``tol``.

    Parameters
    ----------
    k1 : array_like
        ``P(a | w)``, shape ``(|W|, |A|)``.
    k2 : array_like
        ``P(b | w)``, shape ``(|W|, |B|)``.
    """
    a = np.asarray(k1, dtype=np.float64)
    b = np.asarray(k2, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ShapeError("kernels must be 2-D with the same conditioning alphabet")
    nw, na = a.shape
    nb = b.shape[1]
    nvar = na * nb
    nmatch = nw * nb
    # columns: P (row-major a,b), slack+, slack-
    a_eq = np.zeros((nmatch + na, nvar + 2 * nmatch))
    b_eq = np.zeros(nmatch + na)
    for w in range(nw):
        for bb in range(nb):
            row = w * nb + bb
            a_eq[row, bb:nvar:nb] = a[w]
            a_eq[row, nvar + row] = 1.0
            a_eq[row, nvar + nmatch + row] = -1.0
            b_eq[row] = b[w, bb]
    for aa in range(na):
        a_eq[nmatch + aa, aa * nb:(aa + 1) * nb] = 1.0
        b_eq[nmatch + aa] = 1.0
    cost = np.concatenate([np.zeros(nvar), np.ones(2 * nmatch)])
    res = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        return False
    return bool(res.fun <= tol)


def superposition_admissible(chain: SuperpositionChain) -> bool:
    """``P(y1|v)`` stochastically dominates ``P(y2|v)``."""
    k1 = chain.px_given_v @ chain.channel.leg(1)
    k2 = chain.px_given_v @ chain.channel.leg(2)
    return is_stochastically_degraded(k1, k2)


def marton_admissible(cfg: MartonConfig) -> bool:
    """``P(y2|v2)`` stochastically dominates ``P(v1|v2)``."""
    j = cfg.joint()
    v2y2 = j.marginal(["V2", "Y2"])
    v2v1 = j.marginal(["V2", "V1"])
    pv2 = v2y2.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        k1 = np.where(pv2 > 0, v2y2 / pv2, 0.0)
        k2 = np.where(pv2 > 0, v2v1 / pv2, 0.0)
    keep = pv2[:, 0] > 0
    return is_stochastically_degraded(k1[keep], k2[keep])


# ---------------------------------------------------------------- classifier


CLASS_LABELS = ("degraded_1to2", "degraded_2to1", "less_noisy", "more_capable", "none")


@dataclass(frozen=True)
class ClassifyResult:
    """Outcome of :func:`classify`.

    ``label`` is the strongest class found. For ``degraded_1to2`` the
    output of receiver 2 is a degraded version of receiver 1 (and vice
    versa for ``degraded_2to1``). ``stronger`` names the dominating
    receiver (1 or 2) or is ``None``. Sweep-based answers are
    non-falsification claims at the stated grid densities.
    """

    label: str
    stronger: int | None
    degraded: dict
    less_noisy_not_falsified: dict
    more_capable_not_falsified: dict
    grid: dict = field(default_factory=dict)
    analytic: str | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "stronger": self.stronger,
            "degraded": self.degraded,
            "less_noisy_not_falsified": self.less_noisy_not_falsified,
            "more_capable_not_falsified": self.more_capable_not_falsified,
            "grid": self.grid,
            "analytic": self.analytic,
        }


def _mi_binary_input(px0: np.ndarray, leg: np.ndarray) -> np.ndarray:
    """``I(X;Y)`` for binary ``X`` with ``P(X=0) = px0`` (array)."""
    py = px0[..., None] * leg[0] + (1.0 - px0[..., None]) * leg[1]
    h_y = _entropy_last(py)
    h_y_x = float(entropy(leg[0])) * px0 + float(entropy(leg[1])) * (1.0 - px0)
    return h_y - h_y_x


def _entropy_last(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return t.sum(axis=-1)


def more_capable_sweep(leg_a, leg_b, points: int = 1001, tol: float = SWEEP_TOL) -> bool:
    """True if ``I(X;Y_a) >= I(X;Y_b)`` on a grid of binary input laws."""
    t = np.linspace(0.0, 1.0, points)
    return bool(np.all(_mi_binary_input(t, np.asarray(leg_a)) >= _mi_binary_input(t, np.asarray(leg_b)) - tol))


def _mi_binary_v(a, b, c, leg: np.ndarray) -> np.ndarray:
    # P(V=0)=a, P(X=0|V=0)=b, P(X=0|V=1)=c; returns I(V;Y)
    py_v0 = b[..., None] * leg[0] + (1.0 - b[..., None]) * leg[1]
    py_v1 = c[..., None] * leg[0] + (1.0 - c[..., None]) * leg[1]
    py = a[..., None] * py_v0 + (1.0 - a[..., None]) * py_v1
    return _entropy_last(py) - a * _entropy_last(py_v0) - (1.0 - a) * _entropy_last(py_v1)


def less_noisy_sweep(leg_a, leg_b, points: int = 101, tol: float = SWEEP_TOL) -> bool:
    """True if ``I(V;Y_a) >= I(V;Y_b)`` over a grid of binary ``V - X`` chains.

    The grid has ``points**3`` entries over ``(P(V=0), P(X=0|V=0), P(X=0|V=1))``.
    A True answer means "not falsified on this grid".
    """
    leg_a = np.asarray(leg_a)
    leg_b = np.asarray(leg_b)
    g = np.linspace(0.0, 1.0, points)
    b, c = np.meshgrid(g, g, indexing="ij")
    for a_val in g:
        a = np.full_like(b, a_val)
        if np.any(_mi_binary_v(a, b, c, leg_a) < _mi_binary_v(a, b, c, leg_b) - tol):
            return False
    return True


def _bec_bsc_family(ch: NoisyBC) -> tuple[str, float, float] | None:
    """Detect (BSC on one leg, BEC on the other); returns (bsc_leg, p, eps)."""
    legs = {1: ch.leg(1), 2: ch.leg(2)}
    for s, e in ((1, 2), (2, 1)):
        ks, ke = legs[s], legs[e]
        if ks.shape == (2, 2) and ke.shape == (2, 3):
            p = ks[0, 1]
            eps = ke[0, 2]
            if np.allclose(ks, bsc_kernel(p), atol=1e-12) and np.allclose(ke, bec_kernel(eps), atol=1e-12):
                return str(s), float(p), float(eps)
    return None


def analytic_bec_bsc_class(eps: float, p: float) -> str:
    """Class of the BEC(eps)/BSC(p) pair from the known thresholds."""
    p = min(p, 1.0 - p)
    if eps <= 2.0 * p:
        return "degraded"
    if eps <= 4.0 * p * (1.0 - p):
        return "less_noisy"
    if eps <= binary_entropy(p):
        return "more_capable"
    return "none"


def classify(ch: NoisyBC, mc_points: int = 1001, ln_points: int = 101) -> ClassifyResult:
    """Place a binary-input two-receiver channel in the degradation hierarchy.

    Raises
    ------
    UnsupportedChannelError
        If the input alphabet is not binary.
    """
    if ch.input_alphabet_size != 2:
        raise UnsupportedChannelError("classification requires a binary input alphabet")
    k1, k2 = ch.leg(1), ch.leg(2)
    deg = {"1to2": is_stochastically_degraded(k1, k2), "2to1": is_stochastically_degraded(k2, k1)}
    ln = {"1": less_noisy_sweep(k1, k2, ln_points), "2": less_noisy_sweep(k2, k1, ln_points)}
    mc = {"1": more_capable_sweep(k1, k2, mc_points), "2": more_capable_sweep(k2, k1, mc_points)}
    if deg["1to2"]:
        label, stronger = "degraded_1to2", 1
    elif deg["2to1"]:
        label, stronger = "degraded_2to1", 2
    elif ln["1"] or ln["2"]:
        label, stronger = "less_noisy", 1 if ln["1"] else 2
    elif mc["1"] or mc["2"]:
        label, stronger = "more_capable", 1 if mc["1"] else 2
    else:
        label, stronger = "none", None
    fam = _bec_bsc_family(ch)
    analytic = analytic_bec_bsc_class(fam[2], fam[1]) if fam else None
    return ClassifyResult(
        label=label,
        stronger=stronger,
        degraded=deg,
        less_noisy_not_falsified=ln,
        more_capable_not_falsified=mc,
        grid={"less_noisy_points_per_axis": ln_points, "more_capable_points": mc_points},
        analytic=analytic,
    )


# ---------------------------------------------------------------- documents


def to_document(obj) -> dict:
    """Serialize a channel, chain or Marton configuration to a JSON-ready dict."""
    if isinstance(obj, DeterministicBC):
        return {
            "type": "deterministic",
            "m": obj.m,
            "x_size": obj.input_alphabet_size,
            "tables": [f.tolist() for f in obj.functions],
        }
    if isinstance(obj, NoisyBC):
        return {
            "type": "noisy",
            "m": 2,
            "x_size": obj.input_alphabet_size,
            "y_sizes": list(obj.output_alphabet_sizes),
            "tables": obj.kernel.tolist(),
        }
    if isinstance(obj, SuperpositionChain):
        return {
            "type": "superposition",
            "pv": obj.pv.weights.tolist(),
            "px_given_v": obj.px_given_v.tolist(),
            "channel": to_document(obj.channel),
        }
    if isinstance(obj, MartonConfig):
        return {
            "type": "marton",
            "pv1v2": obj.pv1v2.tolist(),
            "phi": obj.phi.tolist(),
            "channel": to_document(obj.channel),
        }
    raise ConfigError(f"cannot serialize {type(obj).__name__}")


def from_document(doc: dict):
    """Inverse of :func:`to_document`.

    Raises
    ------
    ConfigError
        On a missing field, unknown type or invalid table.
    """
    try:
        kind = doc["type"]
        if kind == "deterministic":
            ch = DeterministicBC(int(doc["x_size"]), tuple(np.asarray(t) for t in doc["tables"]))
            if "m" in doc and int(doc["m"]) != ch.m:
                raise ConfigError("m does not match the number of tables")
            return ch
        if kind == "noisy":
            ch = NoisyBC(np.asarray(doc["tables"], dtype=np.float64))
            if "x_size" in doc and int(doc["x_size"]) != ch.input_alphabet_size:
                raise ConfigError("x_size does not match the kernel")
            return ch
        if kind == "superposition":
            return SuperpositionChain(Pmf(doc["pv"]), np.asarray(doc["px_given_v"]), from_document(doc["channel"]))
        if kind == "marton":
            return MartonConfig(np.asarray(doc["pv1v2"]), np.asarray(doc["phi"]), from_document(doc["channel"]))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed channel document: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown document type {doc.get('type')!r}")


def load_document(path) -> object:
    """Read a JSON channel document from ``path``."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return from_document(doc)


def example2_rates(alpha: float, p1: float, p2: float) -> tuple[float, float]:
    """Closed-form corner ``(h(alpha*p1) - h(p1), 1 - h(alpha*p2))``."""
    return (
        binary_entropy(star_convolve(alpha, p1)) - binary_entropy(p1),
        1.0 - binary_entropy(star_convolve(alpha, p2)),
    )

