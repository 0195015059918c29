"""Result records: CSV/JSON persistence and the content-addressed cache.

Curves are written as plain-decimal CSV at 17 significant digits, which
round-trips float64 exactly; everything fitted lands in summary.json.  A run
is cached under <out>/.cache/<experiment>-<confighash> and replayed
byte-for-byte when the same configuration is requested again.
"""

import dataclasses
import hashlib
import json
import shutil
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import NamedTuple


class Table(NamedTuple):
    columns: tuple
    rows: list  # list of tuples of floats


@dataclass(frozen=True)
class ResultRecord:
    experiment: str
    config: dict
    timestamp: str
    version: str
    tables: dict  # name -> Table
    fits: dict


def config_as_dict(config) -> dict:
    data = dataclasses.asdict(config)
    for key, value in data.items():
        if isinstance(value, tuple):
            data[key] = list(value)
    return data


def config_hash(config_dict: dict) -> str:
    canonical = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def format_value(x) -> str:
    return f"{float(x):.17g}"


def write_table_csv(table: Table, path: Path):
    lines = [",".join(table.columns)]
    for row in table.rows:
        lines.append(",".join(format_value(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def read_table_csv(path: Path) -> Table:
    lines = path.read_text().splitlines()
    columns = tuple(lines[0].split(","))
    rows = [tuple(float(x) for x in line.split(",")) for line in lines[1:]]
    return Table(columns=columns, rows=rows)


def _summary_payload(record: ResultRecord) -> dict:
    return {
        "experiment": record.experiment,
        "config": record.config,
        "config_hash": config_hash(record.config),
        "version": record.version,
        "timestamp": record.timestamp,
        "fits": record.fits,
        "tables": {
            name: {"file": f"curve_{name}.csv", "columns": list(t.columns)}
            for name, t in record.tables.items()
        },
    }


def write_record(record: ResultRecord, directory: Path):
    directory.mkdir(parents=True, exist_ok=True)
    for name, table in record.tables.items():
        write_table_csv(table, directory / f"curve_{name}.csv")
    with open(directory / "summary.json", "w") as fh:
        json.dump(_summary_payload(record), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_record(directory: Path) -> ResultRecord:
    with open(directory / "summary.json") as fh:
        summary = json.load(fh)
    tables = {
        name: read_table_csv(directory / meta["file"])
        for name, meta in summary["tables"].items()
    }
    return ResultRecord(
        experiment=summary["experiment"],
        config=summary["config"],
        timestamp=summary["timestamp"],
        version=summary["version"],
        tables=tables,
        fits=summary["fits"],
    )


def cache_dir_for(out_dir: Path, experiment: str, config_dict: dict) -> Path:
    return out_dir / ".cache" / f"{experiment}-{config_hash(config_dict)[:16]}"


def cache_lookup(out_dir: Path, experiment: str, config_dict: dict):
    cached = cache_dir_for(out_dir, experiment, config_dict)
    if (cached / "summary.json").exists():
        return read_record(cached)
    return None


def cache_store(record: ResultRecord, out_dir: Path):
    cached = cache_dir_for(out_dir, record.experiment, record.config)
    write_record(record, cached)


def publish(record: ResultRecord, out_dir: Path) -> Path:
    """Copy the cached canonical files into <out>/<experiment>/."""
    cached = cache_dir_for(out_dir, record.experiment, record.config)
    target = out_dir / record.experiment
    target.mkdir(parents=True, exist_ok=True)
    for item in cached.iterdir():
        shutil.copy2(item, target / item.name)
    return target


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()
