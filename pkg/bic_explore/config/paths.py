from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

VERSION = "1.0.0"
APP_NAME = "BIC Explore"
DEFAULT_OUT_DIRNAME = "out"


@dataclass(frozen=True)
class RuntimePaths:
    out_dir: str
    rates_csv: str
    partition_csv: str
    audit_json: str
    results_csv: str
    trajectories_csv: str
    run_config_json: str
    log_file: str


def _build_runtime_paths(out_dir: str) -> RuntimePaths:
    return RuntimePaths(
        out_dir=out_dir,
        rates_csv=os.path.join(out_dir, "rates.csv"),
        partition_csv=os.path.join(out_dir, "partition.csv"),
        audit_json=os.path.join(out_dir, "audit.json"),
        results_csv=os.path.join(out_dir, "results.csv"),
        trajectories_csv=os.path.join(out_dir, "trajectories.csv"),
        run_config_json=os.path.join(out_dir, "run_config.json"),
        log_file=os.path.join(out_dir, "bic_explore.log"),
    )


def get_runtime_paths(out_dir: str | None = None, create: bool = False) -> RuntimePaths:
    paths = _build_runtime_paths(str(Path(out_dir or DEFAULT_OUT_DIRNAME)))
    if create:
        Path(paths.out_dir).mkdir(parents=True, exist_ok=True)
    return paths
