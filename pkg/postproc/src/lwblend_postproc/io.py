"""Reading and validating solver output files.

Snapshot CSVs carry a first-line comment with the schema tag and a JSON
metadata blob (dimensionality, element counts, node counts, column names);
JSON snapshots embed the same structure. Run manifests are JSON documents
with the configuration echo, conservation ledger and blending-coefficient
statistics.
"""

import json
from pathlib import Path

import numpy as np

SNAPSHOT_SCHEMA = "lwblend-snapshot v1"
MANIFEST_SCHEMA = "lwblend-manifest v1"


class SchemaError(ValueError):
    """File does not match the supported schema version."""


class Snapshot:
    def __init__(self, meta, columns):
        self.meta = meta
        self.columns = columns

    @property
    def dim(self):
        return self.meta["dim"]

    @property
    def time(self):
        return self.meta["time"]

    def variable(self, name):
        try:
            return self.columns[name]
        except KeyError:
            raise SchemaError(
                f"unknown variable {name!r}; file provides: "
                + ", ".join(self.columns))

    def grid_2d(self, name):
        """Reshape a column to the (nx*nodes, ny*nodes) sample grid."""
        if self.dim != 2:
            raise SchemaError("snapshot is not two-dimensional")
        nx, ny = self.meta["cells"]
        ns = self.meta["nodes_per_element"]
        return self.variable(name).reshape(nx * ns, ny * ns)


def read_snapshot(path):
    path = Path(path)
    if path.suffix == ".json":
        payload = json.loads(path.read_text())
        if payload.get("schema") != SNAPSHOT_SCHEMA:
            raise SchemaError(
                f"{path.name}: expected '{SNAPSHOT_SCHEMA}', found "
                f"{payload.get('schema')!r}")
        meta = payload["meta"]
        columns = {k: np.asarray(v, dtype=float)
                   for k, v in payload["data"].items()}
        _check_meta(path, meta, columns)
        return Snapshot(meta, columns)

    with path.open() as fh:
        first = fh.readline().strip()
        if not first.startswith(f"# {SNAPSHOT_SCHEMA} "):
            raise SchemaError(
                f"{path.name}: missing or unsupported schema header")
        meta = json.loads(first[len(f"# {SNAPSHOT_SCHEMA} "):])
        names = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    columns = {name: data[:, i] for i, name in enumerate(names)}
    _check_meta(path, meta, columns)
    return Snapshot(meta, columns)


def _check_meta(path, meta, columns):
    for key in ("dim", "time", "cells", "nodes_per_element", "columns"):
        if key not in meta:
            raise SchemaError(f"{path.name}: metadata lacks {key!r}")
    if set(meta["columns"]) != set(columns):
        raise SchemaError(f"{path.name}: column list does not match metadata")
    expected = int(np.prod(meta["cells"])) * meta["nodes_per_element"] ** meta["dim"]
    sizes = {v.size for v in columns.values()}
    if sizes != {expected}:
        raise SchemaError(
            f"{path.name}: expected {expected} rows per column, found {sizes}")
    stamp = _time_from_name(path.name)
    if stamp is not None and abs(stamp - meta["time"]) > 5e-7:
        raise SchemaError(
            f"{path.name}: filename stamp {stamp} disagrees with metadata "
            f"time {meta['time']}")


def _time_from_name(name):
    # snapshot_0001_t0.250000.csv -> 0.25
    stem = Path(name).stem
    if "_t" not in stem:
        return None
    try:
        return float(stem.rsplit("_t", 1)[1])
    except ValueError:
        return None


def read_manifest(path):
    payload = json.loads(Path(path).read_text())
    if payload.get("schema") != MANIFEST_SCHEMA:
        raise SchemaError(
            f"{Path(path).name}: expected '{MANIFEST_SCHEMA}', found "
            f"{payload.get('schema')!r}")
    return payload
