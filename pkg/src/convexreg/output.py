"""Deterministic text serialization for CLI artifacts.

Every float prints with 17 significant digits (which round-trips doubles
exactly), JSON keys are sorted, and CSV files start with one comment line
embedding the fully resolved run configuration, so identical runs produce
identical bytes and any artifact can be replayed from its own header.
"""

import json

import numpy as np


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v != v or v in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite value in output: {v}")
        return f"{v:.17g}"
    return str(value)


def canonical_json(obj) -> str:
    """JSON text with sorted keys and 17-significant-digit floats."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return canonical_json(list(obj))
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: str(kv[0]))
        body = ",".join(f"{json.dumps(str(k))}:{canonical_json(v)}" for k, v in items)
        return "{" + body + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(payload))
        fh.write("\n")


def write_csv(path, config, header, rows):
    """CSV with a leading '# <config json>' comment line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# " + canonical_json(config) + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
