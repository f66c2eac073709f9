"""Delimited and JSON output with byte-stable formatting.

All floating-point output is rounded to 12 significant digits, CSV files are
comma-separated with a header row and LF endings, JSON is UTF-8 with sorted
keys; identical inputs therefore produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .spectral import Spectrum


def round_sig(x):
    """Round a float to 12 significant digits."""
    x = float(x)
    if not math.isfinite(x) or x == 0.0:
        return x
    return float(f"{x:.11e}")


def fmt_sig(x):
    return f"{round_sig(x):.11e}"


def round_floats(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, complex):
        return [round_sig(obj.real), round_sig(obj.imag)]
    if isinstance(obj, np.floating):
        return round_sig(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [round_floats(v) for v in obj]
    return obj


def render_json(payload):
    return json.dumps(round_floats(payload), sort_keys=True, indent=2,
                      ensure_ascii=False) + "\n"


def write_json(path, payload):
    text = render_json(payload)
    Path(path).write_text(text, encoding="utf-8", newline="\n")
    return text


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_spectrum_csv(path, spectrum):
    rows = [
        (i + 1, spectrum.k, fmt_sig(lam))
        for i, lam in enumerate(spectrum.values)
    ]
    _write_csv(path, ("n", "k", "lambda"), rows)


def read_spectra_csv(path):
    """Read spectra rows (columns n, k, lambda; extras ignored) grouped by k."""
    buckets = {}
    with open(path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"n", "k", "lambda"} <= set(reader.fieldnames):
            raise ConfigError(f"{path}: expected CSV columns n,k,lambda")
        for row in reader:
            try:
                n = int(row["n"])
                k = int(row["k"])
                lam = float(row["lambda"])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{path}: malformed row {row!r}") from exc
            buckets.setdefault(k, []).append((n, lam))
    out = {}
    for k, pairs in buckets.items():
        pairs.sort()
        out[k] = Spectrum(k=k, values=np.array([lam for _, lam in pairs]))
    return out


def write_weyl_csv(path, rows):
    """rows: iterables (lam: complex, N: complex | None, status: str)."""
    out = []
    for lam, nval, status in rows:
        if nval is None:
            out.append((fmt_sig(lam.real), fmt_sig(lam.imag), "", "", status))
        else:
            out.append((fmt_sig(lam.real), fmt_sig(lam.imag),
                        fmt_sig(nval.real), fmt_sig(nval.imag), status))
    _write_csv(path, ("re_lambda", "im_lambda", "re_N", "im_N", "status"), out)


def read_weyl_csv(path):
    """Read tabulated N samples; rows whose status is not ok are skipped."""
    lams, values = [], []
    with open(path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"re_lambda", "im_lambda", "re_N", "im_N"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise ConfigError(
                f"{path}: expected CSV columns re_lambda,im_lambda,re_N,im_N"
            )
        for row in reader:
            if row.get("status", "ok") not in ("", "ok"):
                continue
            try:
                lams.append(complex(float(row["re_lambda"]), float(row["im_lambda"])))
                values.append(complex(float(row["re_N"]), float(row["im_N"])))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{path}: malformed row {row!r}") from exc
    return np.array(lams, dtype=complex), np.array(values, dtype=complex)
