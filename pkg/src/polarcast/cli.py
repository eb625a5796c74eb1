"""Command-line interface ``polarcast``.

Exit codes: 0 success, 1 encoder block error or failed self-test,
2 construction error, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, detbc, marton
from .channels import ConfigError, classify, from_document
from .codec import EncoderBlockError
from .harness import ExperimentConfig, build_code, region, region_csv, run
from .synthesis import ConstructionError, TooLargeError

EXIT_OK, EXIT_FAIL, EXIT_CONSTRUCTION, EXIT_CONFIG = 0, 1, 2, 3

_DOC_FLAGS = {"detbc": "channel", "sp": "chain", "marton": "chain"}
_ACTIONS = {
    "detbc": ("construct", "encode", "decode", "simulate"),
    "sp": ("construct", "simulate"),
    "marton": ("construct", "simulate", "two-phase"),
}
_CONFIG_KEYS = (
    "n", "beta", "samples", "trials", "master_seed", "construction_seed", "mode", "selector", "tau",
    "delta", "exact", "px", "pi", "repair", "eta", "workers",
)


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _bits(text: str) -> np.ndarray:
    text = text.strip()
    if text and set(text) - {"0", "1"}:
        raise ConfigError(f"bit string expected, got {text!r}")
    return np.array([int(c) for c in text], dtype=np.uint8)


def _bit_text(bits) -> str:
    return "".join(str(int(b)) for b in np.ravel(bits))


def _add_run_flags(p: argparse.ArgumentParser, doc_flag: str) -> None:
    p.add_argument("--config", help="JSON experiment config; inline flags override its fields")
    p.add_argument(f"--{doc_flag}", dest="document", help="JSON channel document")
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--beta", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", dest="master_seed", type=int)
    p.add_argument("--construction-seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--mode", choices=("map", "random"))
    p.add_argument("--selector", choices=("threshold", "backoff"))
    p.add_argument("--tau", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--exact", action="store_true", default=None)
    p.add_argument("--px", type=float, nargs="+")
    p.add_argument("--pi", type=int, nargs="+", help="receiver order, 1-based")
    p.add_argument("--repair", action="store_true", default=None)
    p.add_argument("--eta", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output file or directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polarcast", description="Polar codes for broadcast channels")
    parser.add_argument("--version", action="version", version=f"polarcast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for scheme, actions in _ACTIONS.items():
        sp = sub.add_parser(scheme, help=f"{scheme} codes")
        acts = sp.add_subparsers(dest="action", required=True)
        for action in actions:
            p = acts.add_parser(action)
            _add_run_flags(p, _DOC_FLAGS[scheme])
            if scheme == "detbc" and action == "encode":
                p.add_argument("--messages", nargs="+", required=True, help="one bit string per receiver")
            if scheme == "detbc" and action == "decode":
                p.add_argument("--receiver", type=int, required=True)
                p.add_argument("--y", required=True, help="received output row as a bit string")
            if scheme == "marton" and action == "two-phase":
                p.add_argument("--blocks", type=int, default=50)
    p = sub.add_parser("region", help="rate-region boundary samples")
    p.add_argument("document", help="JSON channel document")
    p.add_argument("--px", type=float, nargs="+", action="append", help="input law (repeatable)")
    p.add_argument("--alphas", type=float, nargs="+")
    p.add_argument("--out")
    p = sub.add_parser("classify", help="degradation / less-noisy / more-capable class")
    p.add_argument("document", help="JSON noisy-channel document")
    p.add_argument("--out")
    sub.add_parser("selftest", help="quick internal consistency checks")
    return parser


def _config_from_args(args, scheme: str) -> ExperimentConfig:
    d = _read_json(args.config) if args.config else {}
    d.setdefault("scheme", scheme)
    if args.document:
        d["document"] = _read_json(args.document)
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            d[key] = val
    if d.get("pi") is not None and args.pi is not None:
        d["pi"] = [r - 1 for r in d["pi"]]
    if "document" not in d:
        raise ConfigError(f"a channel document is required (--{_DOC_FLAGS[scheme]} or --config)")
    try:
        return ExperimentConfig.from_dict(d)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _scheme_command(args) -> int:
    scheme, action = args.command, args.action
    cfg = _config_from_args(args, scheme)
    if action == "construct":
        # sets as used by the code, including any repair
        spec = build_code(cfg, cfg.n[0])
        _emit(spec.sets.to_json(), args.out)
        return EXIT_OK
    if action == "simulate":
        result = run(cfg)
        if args.out:
            result.write(args.out)
        else:
            sys.stdout.write(result.csv_text)
        for row in result.summary["per_n"]:
            lo, hi = row["pe_ci95"]
            print(f"n={row['n']} Pe={row['pe']:.4f} [{lo:.4f}, {hi:.4f}] rates={row['rates']}", file=sys.stderr)
        return EXIT_OK
    spec = build_code(cfg, cfg.n[0])
    if action == "encode":
        msgs = [_bits(t) for t in args.messages]
        sizes = [len(m) for m in spec.message_sets]
        if [len(m) for m in msgs] != sizes:
            raise ConfigError(f"expected one message per receiver with lengths {sizes}")
        x = detbc.encode(spec, msgs, cfg.mode)
        _emit(" ".join(str(int(v)) for v in x), args.out)
        return EXIT_OK
    if action == "decode":
        if len(args.y) != cfg.n[0]:
            raise ConfigError(f"--y must have length n={cfg.n[0]}")
        _emit(_bit_text(detbc.decode(spec, args.receiver, _bits(args.y))), args.out)
        return EXIT_OK
    # two-phase
    res = marton.two_phase_simulate(spec, args.blocks, cfg.master_seed)
    _emit(json.dumps(res.to_dict(), indent=1, sort_keys=True), args.out)
    return EXIT_OK


def _selftest() -> int:
    from .fieldcore import polar_transform
    from .channels import blackwell, two_bit_marton
    from .synthesis import detbc_bundle, marton_bundle, oracle_max_diff
    from .synthesis.exact import kron_transform_matrix

    ok = True
    for n in (2, 4, 8, 16):
        g = kron_transform_matrix(n)
        x = np.array(np.unravel_index(np.arange(2**n), (2,) * n), dtype=np.uint8).T if n <= 8 else (
            np.random.default_rng(0).integers(0, 2, (200, n), dtype=np.uint8)
        )
        good = np.array_equal(polar_transform(x), (x.astype(np.int64) @ g) % 2)
        print(f"transform n={n}: {'ok' if good else 'FAIL'}")
        ok &= good
    for bundle in (detbc_bundle(blackwell(), [1 / 3] * 3), marton_bundle(two_bit_marton(0.25, 0.1))):
        for name, ctx in bundle.contexts.items():
            worst = oracle_max_diff(ctx, 4)
            good = worst < 1e-9
            print(f"oracle {bundle.scheme}/{name} n=4: max diff {worst:.2e} {'ok' if good else 'FAIL'}")
            ok &= good
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in _ACTIONS:
            return _scheme_command(args)
        if args.command == "region":
            rows = region(_read_json(args.document), args.px, args.alphas)
            _emit(region_csv(rows), args.out)
            return EXIT_OK
        if args.command == "classify":
            res = classify(from_document(_read_json(args.document)))
            _emit(json.dumps(res.to_dict(), indent=1, sort_keys=True), args.out)
            return EXIT_OK
        return _selftest()
    except ConstructionError as exc:
        print(f"construction error: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except (ConfigError, TooLargeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EncoderBlockError as exc:
        print(f"encoder block error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
