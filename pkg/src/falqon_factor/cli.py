"""Command-line front end.

Exit codes: 0 success or verified, 1 run finished but the claim failed,
2 usage, schema or configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import io as fio
from .encoder import CatalogError, UnsupportedVariant, catalog_hamiltonian, encode, load_catalog
from .runner import ConfigError, build_problem, factor_report, output_dir, resolve_config, run_config
from .sweeps import NOISE_HEADER, RFI_HEADER, STEPSIZE_HEADER, rows_to_csv, sweep_noise, sweep_rfi, sweep_stepsize

EXIT_OK, EXIT_CLAIM, EXIT_USAGE = 0, 1, 2
MIN_N = 9


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ config


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if isinstance(data, dict) and "artifact" in data and "config" in data:
        data = data["config"]  # a run manifest
    return data


def _set(cfg: dict, path: str, value) -> None:
    *parents, leaf = path.split(".")
    node = cfg
    for p in parents:
        node = node.setdefault(p, {})
        if node is None:
            raise UsageError(f"cannot override {path}")
    node[leaf] = value


_FLAG_PATHS = {
    "n": "instance.n",
    "variant": "instance.variant",
    "l_p": "instance.l_p",
    "l_q": "instance.l_q",
    "algorithm": "algorithm",
    "backend": "backend",
    "init": "initial_state",
    "c": "falqon.c",
    "dt": "falqon.dt",
    "iters": "falqon.max_iters",
    "kick": "falqon.seed_kick",
    "measurement": "falqon.measurement",
    "layer_order": "falqon.layer_order",
    "dtheta": "noise.dtheta",
    "dphi": "noise.dphi",
    "seed": "noise.seed",
    "realization": "problem_realization",
    "nu1": "rf.nu1",
    "rfi": "rf.rfi",
    "sweep_iters": "sweep.iterations",
    "seeds": "seeds",
    "workers": "workers",
}


def config_from_args(args, command: str) -> dict:
    user = _load_config(args.config)
    if "command" in user:
        user = dict(user)
        user.pop("command")
    for flag, path in _FLAG_PATHS.items():
        value = getattr(args, flag, None)
        if value is not None:
            _set(user, path, value)
    if getattr(args, "generic", False):
        _set(user, "instance.source", "generic")
    if getattr(args, "stop_on_factors", False):
        _set(user, "falqon.stop_on_factors", True)
    return resolve_config(user, command)


def _instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="biprime to factor")
    p.add_argument("--variant", choices=["full", "truncated"])
    p.add_argument("--generic", action="store_true", default=None, help="compile with the generic encoder")
    p.add_argument("--l-p", dest="l_p", type=int)
    p.add_argument("--l-q", dest="l_q", type=int)


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config or a run manifest to replay")
    p.add_argument("--out", help="output directory (default: $FALQON_FACTOR_OUT or ./falqon_out)")
    p.add_argument("--algorithm", choices=["falqon", "adiabatic", "qaoa"])
    p.add_argument("--backend", choices=["pure", "mixed", "deviation"])
    p.add_argument("--init", choices=["uniform", "zero", "thermal"])
    p.add_argument("--c", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--iters", type=int)
    p.add_argument("--kick", type=float)
    p.add_argument("--measurement", choices=["direct", "tomography"])
    p.add_argument("--layer-order", dest="layer_order", choices=["problem_first", "drive_first"])
    p.add_argument("--dtheta", type=float)
    p.add_argument("--dphi", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--realization", choices=["exact", "daqc"])
    p.add_argument("--nu1", type=float)
    p.add_argument("--rfi", type=float)


def _sweep_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--workers", type=int, help="process count (default: all cores)")
    p.add_argument("--seeds", type=int, nargs="+", help="explicit seed list")
    p.add_argument("--sweep-iters", dest="sweep_iters", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="falqon-factor", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="write the Z-polynomial for n")
    p.add_argument("--n", type=int, required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--catalog", action="store_true", help="use the packaged catalog (default)")
    src.add_argument("--generic", action="store_true", help="compile with the generic encoder")
    p.add_argument("--variant", choices=["full", "truncated"], default="full")
    p.add_argument("--l-p", dest="l_p", type=int)
    p.add_argument("--l-q", dest="l_q", type=int)
    p.add_argument("--out")

    p = sub.add_parser("factor", help="run one trajectory and report the decoded factors")
    _instance_flags(p)
    _run_flags(p)
    p.add_argument("--stop-on-factors", dest="stop_on_factors", action="store_true")

    for name, text in [
        ("sweep-noise", "energy trajectories over a control-error grid"),
        ("sweep-rfi", "minimum energy over RF amplitude and inhomogeneity"),
        ("sweep-stepsize", "seeded trajectories over step size and noise"),
    ]:
        p = sub.add_parser(name, help=text)
        _instance_flags(p)
        _run_flags(p)
        _sweep_flags(p)

    p = sub.add_parser("verify", help="run the oracle suite over a catalog")
    p.add_argument("--catalog", help="catalog file (default: packaged catalog)")
    return parser


# ------------------------------------------------------------------ commands


def _write_outputs(out: Path, kind: str, cfg: dict, files: dict[str, str], **extra) -> Path:
    digests = {}
    for name, text in files.items():
        fio.write_text(out / name, text)
        digests[name] = fio.file_digest(out / name)
    return fio.write_text(out / f"{kind}_manifest.json", fio.dumps(fio.manifest(kind, cfg, digests, **extra)))


def cmd_encode(args) -> int:
    n = args.n
    if n % 2 == 0:
        raise UsageError("n must be odd")
    if n < MIN_N:
        raise UsageError(f"n must be at least {MIN_N}")
    if args.generic:
        h, rule, inst = encode(n, args.l_p, args.l_q)
        tag = f"generic_{inst.l_p}x{inst.l_q}"
        extra = {"source": "generic", "l_p": inst.l_p, "l_q": inst.l_q, "variables": list(inst.variable_layout)}
    else:
        h, rule = catalog_hamiltonian(n, args.variant)
        tag = args.variant
        extra = {"source": "catalog", "variant": args.variant}
    doc = fio.zpoly_document(h, n=n, decoding=rule.to_json(), **extra)
    fio.validate(doc, "hamiltonian")
    out = Path(args.out) if args.out else output_dir({})
    stem = f"hamiltonian_{n}_{tag}"
    listing = [f"# n = {n} ({tag}), {h.n_qubits} qubits, {len(h.terms)} terms", str(h)]
    listing += [f"{c:+.17g}\t{' '.join(f'z{k + 1}' for k in range(h.n_qubits) if m >> k & 1) or '1'}" for m, c in h.terms]
    fio.write_text(out / f"{stem}.json", fio.dumps(doc))
    fio.write_text(out / f"{stem}.txt", "\n".join(listing) + "\n")
    print(f"{h.n_qubits} qubits, {len(h.terms)} terms: {h}")
    print(f"wrote {out / (stem + '.json')}")
    return EXIT_OK


def cmd_factor(args) -> int:
    cfg = config_from_args(args, "factor")
    problem = build_problem(cfg)
    record = run_config(cfg, problem)
    report = factor_report(problem, record.final_probs)
    report["iterations"] = len(record) - 1
    report["final_energy"] = record.energy[-1]
    report["final_p_sol"] = record.p_sol[-1]
    out = output_dir(cfg, args.out)
    path = _write_outputs(
        out, "factor", cfg,
        {"trajectory.csv": record.to_csv(cfg["drive_weights"]), "report.json": fio.dumps(report)},
        run=record.metadata,
    )
    for row in report["top_states"]:
        print(f"|{row['state']}>  p={row['probability']:.4f}  -> {row['p']} x {row['q']}"
              f"{'' if row['product_ok'] else '  (wrong)'}")
    verdict = "factors" if report["success"] else "no verified factors; best guess"
    print(f"{verdict}: {report['factors'][0]} x {report['factors'][-1]}  (manifest {path})")
    return EXIT_OK if report["success"] else EXIT_CLAIM


def _sweep(args, command: str, fn, header: list[str], stem: str) -> int:
    cfg = config_from_args(args, command)
    build_problem(cfg)  # fail fast on a bad instance
    rows = fn(cfg, cfg["workers"])
    out = output_dir(cfg, args.out)
    path = _write_outputs(out, stem, cfg, {f"{stem}.csv": rows_to_csv(header, rows)}, rows=len(rows))
    print(f"{len(rows)} rows -> {out / (stem + '.csv')} (manifest {path})")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import format_table, run_suite

    if args.catalog and not Path(args.catalog).is_file():
        raise UsageError(f"no such catalog file: {args.catalog}")
    checks = run_suite(args.catalog)
    print(format_table(checks))
    failed = [c.name for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_CLAIM


COMMANDS = {
    "encode": cmd_encode,
    "factor": cmd_factor,
    "sweep-noise": lambda a: _sweep(a, "sweep-noise", sweep_noise, NOISE_HEADER, "sweep_noise"),
    "sweep-rfi": lambda a: _sweep(a, "sweep-rfi", sweep_rfi, RFI_HEADER, "sweep_rfi"),
    "sweep-stepsize": lambda a: _sweep(a, "sweep-stepsize", sweep_stepsize, STEPSIZE_HEADER, "sweep_stepsize"),
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, fio.SchemaError, CatalogError, UnsupportedVariant) as exc:
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # invalid splits, non-physical parameters and the like
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
