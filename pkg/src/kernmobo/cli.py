"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error (bad input files, invalid
config, unparseable SMILES), 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from kernmobo import __version__
from kernmobo.exceptions import DataError, NumericError

logger = logging.getLogger("kernmobo")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _seed_list(text: str) -> list[int]:
    """``"3"``, ``"0,2,5"`` or an inclusive range ``"0-9"``."""
    try:
        if "-" in text and "," not in text:
            lo, hi = (int(v) for v in text.split("-", 1))
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def _output(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


# -- subcommands -----------------------------------------------------------------------

def cmd_fp(args) -> int:
    from kernmobo.fingerprint import FingerprintConfig, smiles_fingerprint
    from kernmobo.io import load_smiles_file

    config = FingerprintConfig(radius=args.radius, fold_dim=args.fold)
    smiles = load_smiles_file(args.smiles)
    lines = []
    for smi in smiles:
        try:
            lines.append(smiles_fingerprint(smi, config).to_json(smi))
        except DataError as exc:
            raise DataError(f"{args.smiles}: {exc}") from None
    fh, close = _output(args.out)
    try:
        for line in lines:
            fh.write(line + "\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_hv(args) -> int:
    from kernmobo.io import load_points_csv
    from kernmobo.pareto import hv_hso, hv_sweep, pareto_filter

    points = load_points_csv(args.points)
    front = pareto_filter(points)
    engine = hv_hso if args.engine == "hso" else hv_sweep
    print(repr(engine(front, np.array(args.ref))))
    return EXIT_OK


def cmd_gp_predict(args) -> int:
    from kernmobo.fingerprint import FingerprintConfig, fingerprint_many
    from kernmobo.gp import GPHyperparams, fit, predict
    from kernmobo.io import fmt_float, load_smiles_file, load_training_csv

    fp_cfg = FingerprintConfig(radius=args.radius, fold_dim=args.fold)
    train_smiles, y = load_training_csv(args.train)
    query_smiles = load_smiles_file(args.query)
    hyper = GPHyperparams(mean=args.mean, amplitude=args.amplitude, noise=args.noise)
    gp = fit(fingerprint_many(train_smiles, fp_cfg), y, hyper, args.kernel, max_jitter=args.max_jitter)
    pred = predict(gp, fingerprint_many(query_smiles, fp_cfg))
    fh, close = _output(args.out)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["smiles", "mean", "variance"])
        for smi, m, v in zip(query_smiles, pred.means, pred.variances):
            writer.writerow([smi, fmt_float(m), fmt_float(v)])
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _build_run(cfg, seed: int):
    """Oracle and candidate pool for one seed of a config."""
    from kernmobo.bo import CandidatePool, CompositeOracle, csv_oracle, named_rng, similarity_oracle
    from kernmobo.datasets import synthetic_smiles
    from kernmobo.fingerprint import FingerprintConfig
    from kernmobo.io import load_smiles_file

    if "smiles_file" in cfg.dataset:
        smiles = load_smiles_file(cfg.resolve(cfg.dataset["smiles_file"]))
    else:
        syn = cfg.dataset["synthetic"]
        smiles = synthetic_smiles(syn["n"], seed=syn.get("seed", 0))

    if "csv" in cfg.oracle:
        section = cfg.oracle["csv"]
        oracle = csv_oracle(cfg.resolve(section["path"]), section["columns"])
    else:
        section = cfg.oracle["similarity"]
        fp_cfg = FingerprintConfig(**cfg.fingerprint)
        oracle = CompositeOracle([similarity_oracle(ref, section.get("kind", "minmax"), fp_cfg)
                                  for ref in section["references"]])

    rng = named_rng(seed, "known-split") if cfg.known_selection == "random" else None
    pool = CandidatePool.from_smiles(smiles, oracle, cfg.n_known, rng)
    return pool, oracle


def _run_one(cfg, seed: int, out_dir: Path) -> tuple[int, float, int]:
    from kernmobo.bo import run_method
    from kernmobo.io import write_results

    pool, oracle = _build_run(cfg, seed)
    result = run_method(cfg.method, pool, oracle, cfg.bo_config(seed))
    write_results(result, out_dir)
    effective = cfg.to_dict()
    effective["seed"] = seed
    from kernmobo.config import RunConfigFile

    (out_dir / "config.json").write_text(
        RunConfigFile.from_dict(effective, cfg.base_dir).dumps(), encoding="utf-8")
    return seed, result.final_hv_fixed, len(result.records)


def cmd_bo_run(args) -> int:
    from kernmobo.config import load_config, resolve_seed

    cfg = load_config(args.config)
    out_root = Path(args.out) if args.out else cfg.resolve(cfg.output_dir)
    if args.seeds:
        if args.seed is not None:
            raise UsageError("bo-run: --seed and --seeds are mutually exclusive")
        jobs = [(s, out_root / f"seed_{s}") for s in args.seeds]
    else:
        jobs = [(resolve_seed(None, cfg) if args.seed is None else args.seed, out_root)]

    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            futures = [ex.submit(_run_one, cfg, s, d) for s, d in jobs]
            results = [f.result() for f in futures]
    else:
        results = [_run_one(cfg, s, d) for s, d in jobs]
    for (seed, hv, n), (_, d) in zip(results, jobs):
        print(f"seed={seed} iterations={n} final_hv_fixed_ref={hv!r} out={d}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from kernmobo.pareto import hv_hso, hv_sweep, pareto_filter

    rng = np.random.default_rng(args.seed)
    engines = {"hso": hv_hso, "sweep": hv_sweep}
    print(f"{'d':>2} {'n':>5} {'front':>5} " + " ".join(f"{name + '_ms':>10}" for name in engines))
    for d in args.dims:
        for n in args.sizes:
            # points on a concave surface, so most of them are non-dominated
            raw = np.abs(rng.standard_normal((n, d)))
            pts = raw / np.linalg.norm(raw, axis=1, keepdims=True) + 1e-3
            front = pareto_filter(pts)
            r = np.zeros(d)
            row = f"{d:>2} {n:>5} {len(front):>5} "
            for engine in engines.values():
                t0 = time.perf_counter()
                for _ in range(args.repeats):
                    engine(front, r)
                row += f"{1e3 * (time.perf_counter() - t0) / args.repeats:>10.3f} "
            print(row.rstrip())
    return EXIT_OK


# -- entry point -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kernmobo", description="Exact fingerprint-kernel GPs and multi-objective BO.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("fp", help="SMILES file -> fingerprint JSONL")
    p.add_argument("smiles")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--fold", type=int, default=0, help="fold width (0 keeps full 64-bit keys)")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_fp)

    p = sub.add_parser("hv", help="hypervolume of a points CSV")
    p.add_argument("points")
    p.add_argument("--ref", type=_float_list, required=True)
    p.add_argument("--engine", choices=("sweep", "hso"), default="sweep")
    p.set_defaults(func=cmd_hv)

    p = sub.add_parser("gp-predict", help="fit a GP on a smiles,y CSV and predict query SMILES")
    p.add_argument("train")
    p.add_argument("query")
    p.add_argument("--mean", type=float, default=0.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=1e-4)
    p.add_argument("--kernel", choices=("minmax", "tanimoto"), default="minmax")
    p.add_argument("--max-jitter", type=float, default=1e-4,
                   help="largest diagonal jitter tried if the Cholesky fails (0 disables)")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--fold", type=int, default=0)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_gp_predict)

    p = sub.add_parser("bo-run", help="run an optimization from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--seeds", type=_seed_list, help="several seeds, e.g. 0-9 or 1,4,7")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="output directory (overrides the config)")
    p.set_defaults(func=cmd_bo_run)

    p = sub.add_parser("bench", help="time the hypervolume engines")
    p.add_argument("--dims", type=lambda s: [int(v) for v in s.split(",")], default=[2, 3, 4])
    p.add_argument("--sizes", type=lambda s: [int(v) for v in s.split(",")], default=[10, 50, 100])
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
