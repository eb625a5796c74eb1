"""Experiment driver: configuration, cached construction, trials, output.

Every simulated block draws its messages and channel noise from its own
generator addressed by ``(master_seed, n, trial)``, and a block's SC pass
never mixes rows of a batch. Results therefore do not depend on how trials
are grouped or how many worker processes run them.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import norm

from . import detbc, marton, superposition
from .channels import (
    ConfigError,
    DeterministicBC,
    MartonConfig,
    NoisyBC,
    SuperpositionChain,
    bsc_kernel,
    cover_rates,
    det_region_vertex,
    from_document,
    marton_rates,
)
from .codec import trial_rng
from .fieldcore import log2_length
from .prob import Pmf, mutual_information
from .synthesis import PolarizationSets, build_sets, detbc_bundle, marton_bundle, superposition_bundle

CSV_VERSION = "v1"
CHUNK_TRIALS = 50
SCHEMES = ("detbc", "sp", "marton")
_ALIASES = {"superposition": "sp", "det": "detbc"}
_DOC_TYPES = {"detbc": (DeterministicBC,), "sp": (SuperpositionChain,), "marton": (MartonConfig,)}


def canonical_scheme(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in SCHEMES:
        raise ConfigError(f"unknown scheme {name!r}; expected one of {SCHEMES}")
    return name


@dataclass
class ExperimentConfig:
    """Everything that determines a simulation run.

    ``workers`` only affects speed and is left out of :meth:`config_hash`.
    """

    scheme: str
    document: dict
    n: tuple = (256,)
    beta: float = 0.3
    samples: int = 10000
    trials: int = 200
    master_seed: int = 0
    construction_seed: int | None = None
    mode: str = "random"
    selector: str = "threshold"
    tau: float | None = None
    delta: float | None = None
    exact: bool = False
    px: list | None = None
    pi: list | None = None
    repair: bool = False
    eta: float | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        self.scheme = canonical_scheme(self.scheme)
        if isinstance(self.n, int):
            self.n = (self.n,)
        self.n = tuple(int(v) for v in self.n)
        if not self.n:
            raise ConfigError("at least one block length is required")
        for v in self.n:
            try:
                log2_length(v)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if not 0.0 < self.beta < 0.5:
            raise ConfigError("beta must lie in (0, 1/2)")
        if self.mode not in ("random", "map"):
            raise ConfigError("mode must be 'random' or 'map'")
        if self.selector not in ("threshold", "backoff"):
            raise ConfigError("selector must be 'threshold' or 'backoff'")
        if self.selector == "backoff" and (self.tau is None or self.tau < 0):
            raise ConfigError("the backoff selector needs tau >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        model = self.model()
        if not isinstance(model, _DOC_TYPES[self.scheme]):
            raise ConfigError(f"scheme {self.scheme} cannot use a {self.document.get('type')!r} document")

    @property
    def seed(self) -> int:
        """Seed of the construction's Monte-Carlo estimates."""
        return self.master_seed if self.construction_seed is None else self.construction_seed

    def model(self):
        return from_document(self.document)

    def input_law(self) -> np.ndarray:
        ch = self.model()
        size = ch.input_alphabet_size
        px = np.full(size, 1.0 / size) if self.px is None else np.asarray(self.px, dtype=np.float64)
        if px.shape != (size,):
            raise ConfigError(f"px must have {size} entries")
        return px

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n"] = list(self.n)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "scheme" not in d or "document" not in d:
            raise ConfigError("config needs 'scheme' and 'document'")
        return cls(**d)

    def config_hash(self) -> str:
        d = self.to_dict()
        d.pop("workers")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


# ---------------------------------------------------------------- construction


def _construction_key(cfg: ExperimentConfig, n: int) -> str:
    d = {
        "document": cfg.document,
        "scheme": cfg.scheme,
        "n": n,
        "beta": cfg.beta,
        "samples": cfg.samples,
        "seed": cfg.seed,
        "selector": cfg.selector,
        "tau": cfg.tau,
        "delta": cfg.delta,
        "exact": cfg.exact,
        "px": None if cfg.scheme != "detbc" else cfg.input_law().tolist(),
        "pi": cfg.pi,
    }
    return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


def _bundle(cfg: ExperimentConfig):
    model = cfg.model()
    if cfg.scheme == "detbc":
        return detbc_bundle(model, cfg.input_law(), cfg.pi)
    if cfg.scheme == "sp":
        return superposition_bundle(model)
    return marton_bundle(model)


def construct_sets(cfg: ExperimentConfig, n: int, cache_dir: str | os.PathLike | None = None) -> PolarizationSets:
    """Polarization sets for block length ``n``, cached on disk when enabled.

    The cache directory is ``cache_dir`` or the ``POLARCAST_CACHE``
    environment variable; without either nothing is cached.
    """
    cache_dir = cache_dir if cache_dir is not None else os.environ.get("POLARCAST_CACHE")
    path = None
    if cache_dir:
        path = Path(cache_dir) / f"{cfg.scheme}-n{n}-{_construction_key(cfg, n)[:24]}.json"
        if path.exists():
            return PolarizationSets.from_dict(json.loads(path.read_text()))
    sets = build_sets(
        _bundle(cfg),
        n,
        cfg.beta,
        cfg.samples,
        cfg.seed,
        selector=cfg.selector,
        tau=cfg.tau,
        delta=cfg.delta,
        exact=cfg.exact,
        workers=cfg.workers,
    )
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(sets.to_json())
        tmp.replace(path)
    return sets


def build_code(cfg: ExperimentConfig, n: int, cache_dir=None):
    """Code spec of the configured scheme at block length ``n``."""
    sets = construct_sets(cfg, n, cache_dir)
    model = cfg.model()
    if cfg.scheme == "detbc":
        return detbc.construct_detbc(model, cfg.input_law(), n, pi=cfg.pi, seed_key=cfg.seed, sets=sets)
    if cfg.scheme == "sp":
        return superposition.construct_superposition(
            model, n, repair=cfg.repair, seed_key=cfg.seed, mode=cfg.mode, sets=sets
        )
    return marton.construct_marton(
        model, n, repair=cfg.repair, eta=cfg.eta, seed_key=cfg.seed, mode=cfg.mode, sets=sets
    )


# ---------------------------------------------------------------- trials


@dataclass
class TrialRecord:
    """Outcome of one simulated block.

    ``decode_ok`` is empty when the det-BC encoder failed. ``wall_time`` is
    the block's share of its batch time and is not written to CSV.
    """

    scheme: str
    n: int
    trial: int
    stream: str
    encoder_ok: bool
    decode_ok: tuple
    rates: tuple
    genie_count: int | None = None
    r2_eff: float | None = None
    wall_time: float = 0.0

    @property
    def block_error(self) -> bool:
        return not self.encoder_ok or not all(self.decode_ok)


def _messages(rngs, sizes) -> list[np.ndarray]:
    out = [np.zeros((len(rngs), k), dtype=np.uint8) for k in sizes]
    for b, rng in enumerate(rngs):
        for r, k in enumerate(sizes):
            out[r][b] = rng.integers(0, 2, k)
    return out


def _simulate_chunk(scheme: str, spec, mode: str, master_seed: int, trials: list) -> list[TrialRecord]:
    t0 = time.perf_counter()
    n = spec.n
    rngs = [trial_rng(master_seed, n, t) for t in trials]
    records = []
    if scheme == "detbc":
        sizes = [len(m) for m in spec.message_sets]
        msgs = _messages(rngs, sizes)
        x, ok, _ = detbc.encode_batch(spec, msgs, mode)
        y = spec.channel.outputs(np.where(x < 0, 0, x))
        dec = [np.all(detbc.decode(spec, r + 1, y[r]) == msgs[r], axis=1) for r in range(spec.channel.m)]
        rates = tuple(float(v) for v in spec.rates)
        for b, t in enumerate(trials):
            d = tuple(bool(dr[b]) for dr in dec) if ok[b] else ()
            records.append(TrialRecord(scheme, n, t, f"{n}/{t}", bool(ok[b]), d, rates))
    else:
        sizes = [len(spec.m1), len(spec.m2)]
        w1, w2 = _messages(rngs, sizes)
        if scheme == "sp":
            x, _ = superposition.sp_encode_batch(spec, w1, w2)
        else:
            x, genie, _, _ = marton.ma_encode_batch(spec, w1, w2)
        channel = spec.chain.channel if scheme == "sp" else spec.cfg.channel
        y1 = np.zeros(x.shape, dtype=np.int64)
        y2 = np.zeros(x.shape, dtype=np.int64)
        for b, rng in enumerate(rngs):
            y1[b], y2[b] = channel.sample(x[b], rng)
        if scheme == "sp":
            ok1 = np.all(superposition.sp_decode1_batch(spec, y1)[0] == w1, axis=1)
            ok2 = np.all(superposition.sp_decode2_batch(spec, y2) == w2, axis=1)
            extra = {}
        else:
            ok1 = np.all(marton.ma_decode1_batch(spec, y1) == w1, axis=1)
            ok2 = np.all(marton.ma_decode2_batch(spec, y2, genie) == w2, axis=1)
            extra = {"genie_count": len(spec.delta2), "r2_eff": spec.r2_eff}
        rates = tuple(float(v) for v in spec.rates)
        for b, t in enumerate(trials):
            records.append(TrialRecord(scheme, n, t, f"{n}/{t}", True, (bool(ok1[b]), bool(ok2[b])), rates, **extra))
    share = (time.perf_counter() - t0) / max(len(trials), 1)
    for rec in records:
        rec.wall_time = share
    return records


_WORKER_STATE: dict = {}


def _init_worker(scheme, spec, mode, master_seed) -> None:
    _WORKER_STATE.update(scheme=scheme, spec=spec, mode=mode, master_seed=master_seed)


def _worker_chunk(trials: list) -> list[TrialRecord]:
    s = _WORKER_STATE
    return _simulate_chunk(s["scheme"], s["spec"], s["mode"], s["master_seed"], trials)


def simulate_code(scheme: str, spec, trials: int, master_seed: int, mode: str = "random", workers: int = 1):
    """Run ``trials`` blocks of one code; records come back in trial order."""
    scheme = canonical_scheme(scheme)
    chunks = [list(range(s, min(s + CHUNK_TRIALS, trials))) for s in range(0, trials, CHUNK_TRIALS)]
    if workers <= 1 or len(chunks) == 1:
        parts = [_simulate_chunk(scheme, spec, mode, master_seed, c) for c in chunks]
    else:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(scheme, spec, mode, master_seed)
        ) as pool:
            parts = list(pool.map(_worker_chunk, chunks))
    return list(itertools.chain.from_iterable(parts))


# ---------------------------------------------------------------- aggregation


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    z = norm.ppf(0.5 + confidence / 2.0)
    p = errors / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def csv_columns(scheme: str, m: int = 2) -> list[str]:
    scheme = canonical_scheme(scheme)
    if scheme == "detbc":
        return (
            ["n", "trial", "encoder_ok"]
            + [f"decode_ok_{r + 1}" for r in range(m)]
            + [f"R_{r + 1}" for r in range(m)]
        )
    cols = ["n", "trial", "ok1", "ok2", "R1", "R2"]
    if scheme == "marton":
        cols += ["genie_count", "r2_eff"]
    return cols


def _fmt(v: float) -> str:
    return f"{v:.10f}"


def records_to_csv(scheme: str, records: list, m: int = 2) -> str:
    """Versioned CSV text; identical records give identical bytes."""
    scheme = canonical_scheme(scheme)
    buf = io.StringIO()
    buf.write(f"# polarcast {scheme} csv {CSV_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_columns(scheme, m))
    for rec in records:
        if scheme == "detbc":
            dec = [str(int(d)) for d in rec.decode_ok] if rec.encoder_ok else [""] * m
            writer.writerow([rec.n, rec.trial, int(rec.encoder_ok), *dec, *map(_fmt, rec.rates)])
        else:
            row = [rec.n, rec.trial, int(rec.decode_ok[0]), int(rec.decode_ok[1]), *map(_fmt, rec.rates)]
            if scheme == "marton":
                row += [rec.genie_count, _fmt(rec.r2_eff)]
            writer.writerow(row)
    return buf.getvalue()


def summarize(records: list) -> list[dict]:
    """Per block length: block errors, Wilson interval and per-receiver failures."""
    out = []
    for n in sorted({r.n for r in records}):
        rows = [r for r in records if r.n == n]
        errors = sum(r.block_error for r in rows)
        lo, hi = wilson_interval(errors, len(rows))
        width = max(len(r.decode_ok) for r in rows)
        out.append(
            {
                "n": n,
                "trials": len(rows),
                "block_errors": errors,
                "pe": errors / len(rows),
                "pe_ci95": [lo, hi],
                "encoder_failures": sum(not r.encoder_ok for r in rows),
                "receiver_failures": [
                    sum(1 for r in rows if r.encoder_ok and not r.decode_ok[i]) for i in range(width)
                ],
                "rates": list(rows[0].rates),
                "genie_count": rows[0].genie_count,
                "r2_eff": rows[0].r2_eff,
            }
        )
    return out


@dataclass
class RunResult:
    config: ExperimentConfig
    records: list
    summary: dict
    csv_text: str
    construction: dict = field(default_factory=dict)

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{self.config.scheme}.csv"
        json_path = out / f"{self.config.scheme}_summary.json"
        csv_path.write_text(self.csv_text)
        json_path.write_text(json.dumps(self.summary, indent=1, sort_keys=True))
        return csv_path, json_path


def run(cfg: ExperimentConfig, out_dir=None, cache_dir=None) -> RunResult:
    """Construct (cached) and simulate every block length of ``cfg``."""
    t0 = time.perf_counter()
    records, construction = [], {}
    m = cfg.model().m if cfg.scheme == "detbc" else 2
    for n in cfg.n:
        spec = build_code(cfg, n, cache_dir)
        info = {"rates": [float(v) for v in spec.rates], "delta": spec.sets.delta, "notes": list(spec.sets.notes)}
        info["delta_high"] = spec.sets.delta_high
        info["targets"] = dict(spec.sets.targets)
        if cfg.scheme == "marton":
            info.update(eta=spec.eta_actual, eta_bound=cfg.eta, eta_ok=spec.eta_ok, genie_count=len(spec.delta2))
        construction[str(n)] = info
        records += simulate_code(cfg.scheme, spec, cfg.trials, cfg.master_seed, cfg.mode, cfg.workers)
    summary = {
        "scheme": cfg.scheme,
        "config_hash": cfg.config_hash(),
        "csv_version": CSV_VERSION,
        "master_seed": cfg.master_seed,
        "per_n": summarize(records),
        "construction": construction,
        "elapsed_seconds": time.perf_counter() - t0,
    }
    result = RunResult(cfg, records, summary, records_to_csv(cfg.scheme, records, m), construction)
    if out_dir is not None:
        result.write(out_dir)
    return result


# ---------------------------------------------------------------- region


def _binary_alpha_chain(ch: NoisyBC, alpha: float) -> SuperpositionChain:
    return SuperpositionChain(Pmf(np.array([0.5, 0.5])), bsc_kernel(alpha), ch)


def region(doc: dict, px_list=None, alphas=None) -> list[dict]:
    """Boundary samples of the rate region of a channel document.

    Deterministic channels give the vertex for every receiver order and
    input law in ``px_list`` (uniform by default). Binary-input noisy
    channels give the superposition corner with ``V`` fair and
    ``X = V xor Bernoulli(alpha)`` over ``alphas``. Superposition chains
    give their single corner, Marton configurations their two corners.
    """
    model = from_document(doc)
    rows = []
    if isinstance(model, DeterministicBC):
        size = model.input_alphabet_size
        laws = [np.full(size, 1.0 / size)] if px_list is None else [np.asarray(p, dtype=float) for p in px_list]
        for k, px in enumerate(laws):
            for pi in itertools.permutations(range(model.m)):
                rates = det_region_vertex(model, px, pi)
                rows.append({"kind": "vertex", "px": k, "order": "-".join(str(r + 1) for r in pi),
                             **{f"R{r + 1}": float(v) for r, v in enumerate(rates)}})
    elif isinstance(model, NoisyBC):
        if model.input_alphabet_size != 2:
            raise ConfigError("the alpha sweep needs a binary-input channel")
        grid = np.linspace(0.0, 0.5, 11) if alphas is None else np.asarray(alphas, dtype=float)
        for a in grid:
            r1, r2, _ = cover_rates(_binary_alpha_chain(model, float(a)))
            rows.append({"kind": "cover", "alpha": float(a), "R1": r1, "R2": r2})
    elif isinstance(model, SuperpositionChain):
        r1, r2, _ = cover_rates(model)
        rows.append({"kind": "cover", "R1": r1, "R2": r2})
    else:
        j = model.joint()
        i1 = mutual_information(j, ["V1"], ["Y1"])
        i2 = mutual_information(j, ["V2"], ["Y2"])
        i12 = mutual_information(j, ["V1"], ["V2"])
        r1, r2 = marton_rates(model)
        rows.append({"kind": "marton", "corner": 1, "R1": r1, "R2": r2})
        rows.append({"kind": "marton", "corner": 2, "R1": i1 - i12, "R2": i2})
    return rows


def region_csv(rows: list[dict]) -> str:
    cols = []
    for row in rows:
        cols += [c for c in row if c not in cols]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (_fmt(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
