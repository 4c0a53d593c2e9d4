"""CSV dumps of policies, kernels and sweep rows."""

import csv
import io

import numpy as np

from .exceptions import InputError

POLICY_COLUMNS = ("bus", "level", "price", "age", "action", "value")


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_rows(stream, columns, rows):
    """Write dict rows with a header; floats use their shortest exact repr."""
    writer = csv.writer(stream)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])


def policy_rows(curve, table, values):
    rows = []
    K, T = table.shape
    for i in range(K):
        for d in range(T):
            rows.append({"bus": curve.bus_id, "level": i, "price": float(curve.prices[i]),
                         "age": d + 1, "action": int(table[i, d]),
                         "value": float(values[i, d])})
    return rows


def read_policy_dump(text):
    """Parse a policy dump into ``{bus: (table, values)}`` arrays of shape ``(K, T)``."""
    reader = csv.DictReader(io.StringIO(text))
    missing = set(POLICY_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise InputError(f"policy file lacks columns {sorted(missing)}", "policy_file")
    entries = {}
    for n, row in enumerate(reader, start=2):
        try:
            key = (int(row["level"]), int(row["age"]))
            entries.setdefault(row["bus"], {})[key] = (int(row["action"]), float(row["value"]))
        except ValueError:
            raise InputError(f"policy file row {n} is malformed", "policy_file") from None
    out = {}
    for bus, cells in entries.items():
        K = 1 + max(i for i, _ in cells)
        T = max(d for _, d in cells)
        if len(cells) != K * T:
            raise InputError(f"policy file bus {bus}: incomplete state grid", "policy_file")
        table = np.zeros((K, T), dtype=np.int8)
        values = np.zeros((K, T))
        for (i, d), (a, v) in cells.items():
            table[i, d - 1] = a
            values[i, d - 1] = v
        out[bus] = (table, values)
    return out


def kernel_matrix_rows(curve, matrix):
    rows = []
    for i, row in enumerate(matrix):
        entry = {"from_level": i, "from_price": float(curve.prices[i])}
        entry.update({f"to_{j}": float(p) for j, p in enumerate(row)})
        rows.append(entry)
    return rows
