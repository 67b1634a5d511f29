"""CSV/JSON writers shared by the CLI and the result records."""
from __future__ import annotations

import csv
import json
import math

SCHEMA = "mlg-1"

CONVENTIONS = {
    "units": "hbar = m = 1",
    "energies": "E_n = omega * n",
    "position_unit": "oscillator length",
    "delta_coupling": "L * psi_0(0)^2 = 1/sqrt(pi)",
    "gaussian_coupling": "unit-area Gaussian of width sigma centred at x = 0",
    "kernel_units": "time^2",
}


def fmt(x) -> str:
    """Round-trip float formatting; ints and strings pass through."""
    if isinstance(x, bool) or x is None:
        return "" if x is None else str(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g")
    try:
        return format(float(x), ".17g")
    except (TypeError, ValueError):
        return str(x)


def write_csv(fh, header, rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):
        return _clean(obj.item())
    return obj


def dump_json(payload: dict, fh=None, **extra) -> str:
    """Serialize with the schema tag and the unit conventions block."""
    doc = {"schema": SCHEMA, "conventions": CONVENTIONS, **_clean(payload), **extra}
    text = json.dumps(doc, indent=2, sort_keys=False)
    if fh is not None:
        fh.write(text + "\n")
    return text
