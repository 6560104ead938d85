"""Command-line entry point.

Subcommands:
  norm-error  batch-size sweep of the average normalization error
  compare     paired baseline-vs-proposed accuracy sweep over batch sizes
  train       a single training run (run.json + constellation.csv)
  ser         symbol-error-rate sweep for a trained run

Every command is a deterministic function of its JSON config; all seeds are
explicit. Exit codes: 0 success, 1 runtime failure, 2 config/usage error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import comm, metrics, train


class ConfigError(Exception):
    pass


def _load_config(path: str, schema: dict) -> dict:
    """Load JSON and validate against {key: (checker, default-or-None)}.

    Unknown keys are rejected; keys with default None are required.
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - set(schema)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = {}
    for key, (check, default) in schema.items():
        if key in raw:
            value = raw[key]
            if not check(value):
                raise ConfigError(f"invalid value for {key!r}: {value!r}")
            cfg[key] = value
        elif default is _REQUIRED:
            raise ConfigError(f"missing required config key {key!r}")
        else:
            cfg[key] = default
    return cfg


_REQUIRED = object()


def _is_pos_int(v):
    return isinstance(v, int) and not isinstance(v, bool) and v > 0


def _is_seed(v):
    return isinstance(v, int) and not isinstance(v, bool) and v >= 0


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_pos_num(v):
    return _is_num(v) and v > 0


def _is_int_list(v):
    return isinstance(v, list) and len(v) > 0 and all(_is_pos_int(x) for x in v)


def _is_seed_list(v):
    return isinstance(v, list) and len(v) > 0 and all(_is_seed(x) for x in v)


def _is_num_list(v):
    return isinstance(v, list) and len(v) > 0 and all(_is_num(x) for x in v)


def _is_str(v):
    return isinstance(v, str) and bool(v)


_TRAIN_KEYS = {
    "M": (_is_pos_int, 128),
    "batch_size": (_is_pos_int, 64),
    "snr_db": (_is_num, 45.0),
    "power": (_is_pos_num, 1.0),
    "tx_hidden": (_is_int_list, [100, 100]),
    "rx_hidden": (_is_int_list, [100, 100]),
    "lr": (_is_pos_num, 0.008),
    "data_budget": (_is_pos_int, 76800),
    "val_batches": (_is_pos_int, 30),
    "val_batch_size": (_is_pos_int, 1000),
    "val_seed": (_is_seed, 0),
}

TRAIN_SCHEMA = {
    **_TRAIN_KEYS,
    "architecture": (lambda v: v in train.ARCHITECTURES, "proposed"),
    "init_seed": (_is_seed, 0),
    "data_seed": (_is_seed, 0),
    "noise_seed": (lambda v: v is None or _is_seed(v), None),
}

COMPARE_SCHEMA = {
    **_TRAIN_KEYS,
    "batch_sizes": (_is_int_list, [16, 32, 64, 128, 256, 512]),
    "init_seeds": (_is_seed_list, list(range(10))),
    "data_seeds": (_is_seed_list, list(range(100, 110))),
}
del COMPARE_SCHEMA["batch_size"]

NORM_ERROR_SCHEMA = {
    "M_list": (_is_int_list, [4, 16, 64, 256]),
    "batch_sizes": (_is_int_list, [4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048]),
    "n_inits": (_is_pos_int, 30),
    "n_batches": (_is_pos_int, 1000),
    "eb": (_is_pos_num, 1.0),
    "tx_hidden": (_is_int_list, [60, 60]),
    "seed": (_is_seed, 0),
}

SER_SCHEMA = {
    "run_json": (_is_str, _REQUIRED),
    "snr_db_list": (_is_num_list, [0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20]),
    "n_symbols": (_is_pos_int, 100000),
    "seed": (_is_seed, 0),
}


def _write_meta(out_dir: Path, name: str, cfg: dict) -> None:
    with open(out_dir / f"{name}_meta.json", "w") as fh:
        json.dump({"command": name, "config": cfg}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _train_config(cfg: dict, architecture: str, batch_size: int, init_seed: int, data_seed: int):
    return train.TrainConfig(
        M=cfg["M"],
        batch_size=batch_size,
        snr_db=cfg["snr_db"],
        power=cfg["power"],
        architecture=architecture,
        tx_hidden=tuple(cfg["tx_hidden"]),
        rx_hidden=tuple(cfg["rx_hidden"]),
        lr=cfg["lr"],
        data_budget=cfg["data_budget"],
        init_seed=init_seed,
        data_seed=data_seed,
        noise_seed=cfg.get("noise_seed"),
    )


def _run_and_score(cfg: dict, architecture: str, batch_size: int, init_seed: int, data_seed: int) -> float:
    result = train.train_run(_train_config(cfg, architecture, batch_size, init_seed, data_seed))
    rng = np.random.default_rng(cfg["val_seed"])
    return metrics.validation_accuracy(
        result.tx,
        result.rx,
        cfg["power"],
        result.config.sigma2,
        cfg["val_batches"],
        cfg["val_batch_size"],
        rng,
    )


def _compare_cell(args) -> list[tuple[str, int, int, int, float]]:
    cfg, batch_size, init_seed, data_seed = args
    rows = []
    for arch in train.ARCHITECTURES:
        acc = _run_and_score(cfg, arch, batch_size, init_seed, data_seed)
        rows.append((arch, batch_size, init_seed, data_seed, acc))
    return rows


def cmd_norm_error(cfg: dict, out_dir: Path, workers: int) -> None:
    stats = metrics.norm_error_experiment(
        cfg["M_list"],
        cfg["batch_sizes"],
        cfg["n_inits"],
        cfg["n_batches"],
        cfg["eb"],
        tuple(cfg["tx_hidden"]),
        cfg["seed"],
    )
    with open(out_dir / "norm_error.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["M", "Bs", "mean_error", "std_error", "n"])
        for st in stats:
            writer.writerow(
                [st.M, st.batch_size, f"{st.mean_error:.17g}", f"{st.std_error:.17g}",
                 st.n_inits * st.n_batches]
            )
    _write_meta(out_dir, "norm_error", cfg)


def cmd_compare(cfg: dict, out_dir: Path, workers: int) -> None:
    out_path = out_dir / "accuracy.csv"
    done: set[tuple[str, int, int, int]] = set()
    if out_path.exists():
        with open(out_path, newline="") as fh:
            for row in csv.DictReader(fh):
                done.add((row["arch"], int(row["Bs"]), int(row["init_seed"]), int(row["data_seed"])))
    cells = [
        (cfg, bs, i, d)
        for bs in cfg["batch_sizes"]
        for i in cfg["init_seeds"]
        for d in cfg["data_seeds"]
        if not all((a, bs, i, d) in done for a in train.ARCHITECTURES)
    ]
    mode = "a" if done else "w"
    with open(out_path, mode, newline="") as fh:
        writer = csv.writer(fh)
        if not done:
            writer.writerow(["arch", "Bs", "init_seed", "data_seed", "accuracy"])
        if workers > 1 and cells:
            with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_compare_cell, c) for c in cells]
                # iterate in submission order so output order is deterministic
                for fut in futures:
                    for row in fut.result():
                        writer.writerow([*row[:4], f"{row[4]:.17g}"])
                    fh.flush()
        else:
            for cell in cells:
                for row in _compare_cell(cell):
                    writer.writerow([*row[:4], f"{row[4]:.17g}"])
                fh.flush()
    _write_meta(out_dir, "compare", cfg)


def cmd_train(cfg: dict, out_dir: Path, workers: int) -> None:
    config = _train_config(cfg, cfg["architecture"], cfg["batch_size"], cfg["init_seed"], cfg["data_seed"])
    result = train.train_run(config)
    rng = np.random.default_rng(cfg["val_seed"])
    accuracy = metrics.validation_accuracy(
        result.tx, result.rx, cfg["power"], config.sigma2,
        cfg["val_batches"], cfg["val_batch_size"], rng,
    )
    doc = train.run_result_to_dict(result)
    doc["validation_accuracy"] = accuracy
    doc["validation"] = {
        "n_batches": cfg["val_batches"],
        "batch_size": cfg["val_batch_size"],
        "seed": cfg["val_seed"],
    }
    with open(out_dir / "run.json", "w") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")
    comm.export_constellation_csv(result.constellation, out_dir / "constellation.csv")


def cmd_ser(cfg: dict, out_dir: Path, workers: int) -> None:
    run_path = Path(cfg["run_json"])
    if not run_path.exists():
        raise ConfigError(f"run file not found: {run_path}")
    with open(run_path) as fh:
        doc = json.load(fh)
    points = np.asarray(doc["constellation"], dtype=float)
    rx = train.mlp_from_dict(doc["rx"])
    rng = np.random.default_rng(cfg["seed"])
    rows = metrics.ser_sweep(
        points, rx, cfg["snr_db_list"], cfg["n_symbols"], rng,
        power=doc["config"]["power"],
    )
    with open(out_dir / "ser.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["snr_db", "ser", "ci_lo", "ci_hi"])
        for snr_db, ser, lo, hi in rows:
            writer.writerow([f"{snr_db:.17g}", f"{ser:.17g}", f"{lo:.17g}", f"{hi:.17g}"])
    _write_meta(out_dir, "ser", cfg)


_COMMANDS = {
    "norm-error": (NORM_ERROR_SCHEMA, cmd_norm_error),
    "compare": (COMPARE_SCHEMA, cmd_compare),
    "train": (TRAIN_SCHEMA, cmd_train),
    "ser": (SER_SCHEMA, cmd_ser),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aecomm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to JSON config")
        p.add_argument("--out", required=True, help="output directory (created if missing)")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    schema, fn = _COMMANDS[args.command]
    try:
        cfg = _load_config(args.config, schema)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        fn(cfg, out_dir, max(1, args.workers))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - contract maps failures to exit 1
        print(f"failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
