"""Command-line front end: ``ifsconj {entropy,verify,graph,primes,transform}``.

Exit codes: 0 success, 1 malformed input, 2 no kneading root below 1,
3 precision exhausted, 4 I/O failure, 5 address-space mismatch,
6 conjugacy residual above tolerance.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .homeomorphism import (
    AddressSpaceMismatch, check_address_spaces, fractal_transform, graph_iterate, graph_points,
    verify_conjugacy,
)
from .interval_ifs import Mask, ParameterError, System, load_system_doc, system_from_dict
from .kneading import KneadingResult, NoRootBelowOne, PrecisionExhausted, solve_gamma
from .primes import prime_kneading_pair, prime_system
from .symbolic import KneadingWarning, alpha_beta

log = logging.getLogger("ifsconj")

EXIT_OK, EXIT_INPUT, EXIT_NO_ROOT, EXIT_PRECISION, EXIT_IO, EXIT_MISMATCH, EXIT_RESIDUAL = range(7)


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    system: Optional[str] = None
    target: Optional[str] = None
    n: int = 200
    tol: Optional[float] = None
    samples: int = 2000
    iters: int = 20
    res: int = 512
    out: Optional[str] = None
    seed: int = 0
    prime_limit: int = 29
    horizon: int = 19
    with_direct: bool = False
    raster_rule: str = "cover"

    def __post_init__(self):
        if self.n < 16:
            raise InputError(f"--n must be at least 16, got {self.n}")
        if self.tol is not None and not self.tol > 0:
            raise InputError(f"--tol must be positive, got {self.tol}")
        if self.samples < 1:
            raise InputError("--samples must be positive")
        if self.iters < 0:
            raise InputError("--iters must be non-negative")
        if self.res < 1:
            raise InputError("--res must be positive")
        if self.prime_limit < 2:
            raise InputError("--prime-limit must be at least 2")
        if self.horizon < 0:
            raise InputError("--horizon must be non-negative")

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        fields = cls.__dataclass_fields__
        return cls(**{k: v for k, v in vars(ns).items() if k in fields})


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2)


def _load(spec: Optional[str], flag: str = "--system") -> dict:
    if spec is None:
        raise InputError(f"{flag} is required")
    try:
        return load_system_doc(spec)
    except ParameterError as exc:
        raise InputError(str(exc)) from None


def _system(spec: Optional[str], flag: str = "--system") -> tuple[System, Mask]:
    try:
        return system_from_dict(_load(spec, flag))
    except ParameterError as exc:
        raise InputError(str(exc)) from None


def _kneading(system: System, mask: Mask, cfg: RunConfig) -> KneadingResult:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", KneadingWarning)
        alpha, beta = alpha_beta(system, mask, cfg.n)
    notes = [str(w.message) for w in caught]
    for msg in notes:
        log.warning("%s", msg)
    if system.touching:
        notes.append("a + b = 1: touching branches, slopes may equal 2")
    if mask.is_degenerate(system):
        notes.append(f"rho = {mask.rho} is an end of the overlap region")
    kr = solve_gamma(alpha, beta, tol=cfg.tol or 1e-12)
    return replace(kr, notes=tuple(notes))


def cmd_entropy(cfg: RunConfig) -> int:
    doc = _load(cfg.system)
    if isinstance(doc, dict) and doc.get("kind") == "primes":
        alpha, beta = prime_kneading_pair(int(doc.get("limit", cfg.prime_limit)))
        kr = solve_gamma(alpha, beta, tol=cfg.tol or 1e-12)
    else:
        try:
            system, mask = system_from_dict(doc)
        except ParameterError as exc:
            raise InputError(str(exc)) from None
        kr = _kneading(system, mask, cfg)
    print(kr.to_json())
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    system, mask = _system(cfg.system)
    kr = _kneading(system, mask, cfg)
    tol = cfg.tol or 1e-6
    report = verify_conjugacy(system, mask, kr, samples=cfg.samples, n=cfg.n, seed=cfg.seed)
    doc = {"gamma": kr.gamma, "p": kr.p, "tol": tol, **report.to_dict()}
    doc["ok"] = report.sup_residual < tol
    print(_dump(doc))
    return EXIT_OK if doc["ok"] else EXIT_RESIDUAL


def _write(path: Path, data, binary: bool = False) -> None:
    if binary:
        path.write_bytes(data)
    else:
        path.write_text(data, encoding="ascii")


def cmd_graph(cfg: RunConfig) -> int:
    system, mask = _system(cfg.system)
    kr = _kneading(system, mask, cfg)
    regions = graph_iterate(system, mask, kr, cfg.iters)
    base = Path(cfg.out or "graph")
    paths = {"pgm": base.with_suffix(".pgm"), "csv": base.with_suffix(".csv")}
    try:
        _write(paths["pgm"], regions.to_pgm(cfg.res, cfg.raster_rule), binary=True)
        with open(paths["csv"], "w", newline="", encoding="ascii") as fh:
            regions.to_csv(fh)
        if cfg.with_direct:
            paths["direct"] = base.with_name(base.name + ".direct.csv")
            with open(paths["direct"], "w", newline="", encoding="ascii") as fh:
                writer = csv.writer(fh)
                writer.writerow(["x", "H"])
                for h, w in graph_points(system, mask, kr, cfg.res, cfg.n):
                    writer.writerow([repr(w), repr(h)])
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    doc = {
        "gamma": kr.gamma,
        "p": kr.p,
        "iters": cfg.iters,
        "rectangles": len(regions),
        "max_height": max(float(h) for h in regions.heights()),
        "files": {k: str(v) for k, v in paths.items()},
    }
    print(_dump(doc))
    return EXIT_OK


def cmd_primes(cfg: RunConfig) -> int:
    report = prime_system(cfg.prime_limit, cfg.horizon, tol=cfg.tol or 1e-12)
    print(_dump(report.to_dict()))
    return EXIT_OK


def cmd_transform(cfg: RunConfig) -> int:
    sys_f, mask_f = _system(cfg.system)
    sys_g, mask_g = _system(cfg.target, "--target")
    depth = check_address_spaces(sys_f, mask_f, sys_g, mask_g, cfg.n)
    log.info("kneading pairs agree on %d bits", depth)
    count = max(cfg.samples, 2)
    rows = []
    for i in range(count):
        x = Fraction(i, count - 1) if sys_f.exact else i / (count - 1)
        rows.append((float(x), fractal_transform(sys_f, mask_f, sys_g, mask_g, x, cfg.n, check=False)))
    try:
        fh = open(cfg.out, "w", newline="", encoding="ascii") if cfg.out else sys.stdout
        try:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "T"])
            writer.writerows((repr(x), repr(t)) for x, t in rows)
        finally:
            if fh is not sys.stdout:
                fh.close()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


COMMANDS = {
    "entropy": cmd_entropy,
    "verify": cmd_verify,
    "graph": cmd_graph,
    "primes": cmd_primes,
    "transform": cmd_transform,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--system", help="system JSON, inline or a file path")
    common.add_argument("--n", type=int, default=200, help="itinerary truncation depth (default 200)")
    common.add_argument("--tol", type=float, default=None,
                        help="root bracket width, or residual tolerance for verify (default 1e-6)")
    common.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    common.add_argument("--out", help="output path (graph: base name for .pgm/.csv)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="ifsconj",
        description="Kneading entropy and conjugacies of overlapping two-map affine IFS.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("entropy", parents=[common], help="solve for gamma, p and the entropy")

    p = sub.add_parser("verify", parents=[common], help="check H o W = L o H on samples")
    p.add_argument("--samples", type=int, default=2000)

    p = sub.add_parser("graph", parents=[common], help="rectangle iteration for the graph of H")
    p.add_argument("--iters", type=int, default=20)
    p.add_argument("--res", type=int, default=512)
    p.add_argument("--with-direct", action="store_true", help="also write direct (x, H(x)) samples")
    p.add_argument("--raster-rule", choices=["cover", "center"], default="cover",
                   help="dark pixel if a rectangle meets it (cover) or holds its centre")

    p = sub.add_parser("primes", parents=[common], help="the prime-indicator example")
    p.add_argument("--prime-limit", type=int, default=29)
    p.add_argument("--horizon", type=int, default=19)

    p = sub.add_parser("transform", parents=[common], help="fractal transformation between two systems")
    p.add_argument("--target", help="second system JSON, inline or a file path")
    p.add_argument("--samples", type=int, default=101, help="uniform grid size")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = RunConfig.from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoRootBelowOne as exc:
        print(f"error: no root below 1: {exc}", file=sys.stderr)
        return EXIT_NO_ROOT
    except PrecisionExhausted as exc:
        print(f"error: precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except AddressSpaceMismatch as exc:
        print(f"error: address spaces differ: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (ParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
