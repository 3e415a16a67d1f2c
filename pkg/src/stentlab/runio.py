"""CSV, JSON and manifest helpers for run artifacts.

Floats are written with ``repr`` so a read-back parses to the identical
value (lossless round trip).  Headers carry units in brackets.
"""
import csv
import hashlib
import json
import os

import numpy as np


def format_value(v):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, header, rows):
    """Write rows (iterables) under a header; floats keep full precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def read_csv(path):
    """Read back (header, rows) with floats parsed where possible."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for raw in reader:
            row = []
            for cell in raw:
                try:
                    row.append(float(cell) if ("." in cell or "e" in cell
                                               or "E" in cell or "n" in cell
                                               or cell in ("inf", "-inf")) else int(cell))
                except ValueError:
                    row.append(cell)
            rows.append(row)
    return header, rows


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def sha256_of(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, paths, extra=None):
    """Manifest of artifact checksums, sorted by relative path."""
    artifacts = []
    for p in sorted(paths):
        rel = os.path.relpath(p, out_dir)
        artifacts.append({"path": rel, "sha256": sha256_of(p),
                          "bytes": os.path.getsize(p)})
    data = {"artifacts": artifacts}
    if extra:
        data.update(extra)
    manifest = os.path.join(out_dir, "manifest.json")
    write_json(manifest, data)
    return manifest
