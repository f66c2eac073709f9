"""Command-line front end: spectrum, weyl, verify and invert subcommands.

The run configuration is a single JSON file; see README for the schema.
Exit codes: 0 success, 2 configuration or input error, 3 incomplete
eigenvalue enumeration, 4 failed verification, 5 diverging reconstruction.
"""

from __future__ import annotations

import argparse
import cmath
import math
import sys
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    DivergenceError,
    EnumerationIncompleteError,
    LadderMismatchError,
    WeylPoleError,
)
from .inverse import S_PI_CAP, SectorRay, reconstruct
from .io_utils import (
    fmt_sig,
    read_spectra_csv,
    read_weyl_csv,
    render_json,
    write_json,
    write_weyl_csv,
)
from .operators import (
    PI,
    OperatorConfig,
    PolyKernel,
    PolyPotential,
    SampledPotential,
    SeparableKernel,
    ZeroKernel,
)
from .spectral import WeylFunction, eigenvalues, weyl_eval
from .verify import run_verification

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ENUMERATION = 3
EXIT_VERIFY = 4
EXIT_DIVERGENCE = 5


def _as_complex(entry, where):
    if isinstance(entry, (int, float)):
        return complex(entry)
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        return complex(float(entry[0]), float(entry[1]))
    raise ConfigError(f"{where}: numbers must be scalars or [re, im] pairs")


def _coeff_array(data, where):
    if not isinstance(data, (list, tuple)) or not data:
        raise ConfigError(f"{where}: expected a non-empty list")
    out = np.array([_as_complex(v, where) for v in data])
    if not np.all(np.isfinite(out)):
        raise ConfigError(f"{where}: all entries must be finite")
    return out


def _build_potential(spec, n):
    kind = spec.get("type")
    if kind == "poly":
        return PolyPotential(_coeff_array(spec.get("data"), "operator.q.data"))
    if kind == "samples":
        data = _coeff_array(spec.get("data"), "operator.q.data")
        if data.size != n + 1:
            raise ConfigError(
                f"operator.q.data: sampled potential needs grid.n+1 = {n + 1} "
                f"values, got {data.size}"
            )
        return SampledPotential(data)
    raise ConfigError(f"operator.q.type must be 'poly' or 'samples', got {kind!r}")


def _build_kernel(spec):
    kind = spec.get("type", "zero")
    if kind == "zero":
        return ZeroKernel()
    if kind == "poly2":
        data = spec.get("data")
        if not isinstance(data, list) or not data:
            raise ConfigError("operator.M.data: expected a 2-d coefficient list")
        rows = [_coeff_array(r, "operator.M.data") for r in data]
        width = max(r.size for r in rows)
        mat = np.zeros((len(rows), width), dtype=complex)
        for i, r in enumerate(rows):
            mat[i, : r.size] = r
        if not np.any(mat != 0):
            return ZeroKernel()
        return PolyKernel(mat)
    if kind == "separable":
        terms = spec.get("data")
        if not isinstance(terms, list) or not terms:
            raise ConfigError("operator.M.data: expected a list of {f, g} terms")
        pairs = []
        for t in terms:
            pairs.append((_coeff_array(t.get("f"), "operator.M.data.f"),
                          _coeff_array(t.get("g"), "operator.M.data.g")))
        return SeparableKernel(pairs)
    raise ConfigError(
        f"operator.M.type must be 'zero', 'poly2' or 'separable', got {kind!r}"
    )


class RunConfig:
    def __init__(self, raw, path):
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        op = raw.get("operator")
        if not isinstance(op, dict) or "q" not in op:
            raise ConfigError(f"{path}: missing operator.q")
        grid = raw.get("grid", {})
        self.n = int(grid.get("n", 2000))
        if self.n < 16:
            raise ConfigError(f"{path}: grid.n must be >= 16")
        self.operator = OperatorConfig(
            _build_potential(op["q"], self.n), _build_kernel(op.get("M", {}))
        )
        spectral = raw.get("spectral", {})
        self.n_max = int(spectral.get("n_max", 20))
        self.n_prod = int(spectral.get("N_prod", 2000))
        ray = raw.get("ray", {})
        self.theta = float(ray.get("theta", PI / 2))
        if not (0.0 < self.theta < PI):
            raise ConfigError(f"{path}: ray.theta must lie in (0, pi)")
        self.s0 = float(ray.get("s0", 8.0))
        self.ratio = float(ray.get("ratio", 1.25))
        self.count = int(ray.get("count", 15))
        if self.s0 <= 0 or self.ratio <= 1.0 or self.count < 4:
            raise ConfigError(f"{path}: ray needs s0 > 0, ratio > 1, count >= 4")
        inverse = raw.get("inverse", {})
        self.k_max = int(inverse.get("K_max", 8))
        self.tol = float(inverse.get("tol", 0.05))
        output = raw.get("output", {})
        self.out_path = output.get("path")
        for name in ("n", "n_max", "n_prod", "theta", "s0", "ratio", "count",
                     "k_max", "tol"):
            v = getattr(self, name)
            if isinstance(v, float) and not math.isfinite(v):
                raise ConfigError(f"{path}: {name} must be finite")

    def ladder(self):
        s = self.s0 * self.ratio ** np.arange(self.count)
        s = s[s * PI <= S_PI_CAP]
        if s.size < 4:
            raise ConfigError("ray ladder has fewer than 4 usable moduli")
        return s

    def ray(self):
        return SectorRay(theta=self.theta, s_values=self.ladder())


def load_config(path):
    import json

    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return RunConfig(raw, path)


def _resolve_out(args, cfg, default_name):
    if args.out:
        return Path(args.out)
    if cfg.out_path:
        return Path(cfg.out_path)
    return Path(default_name)


def cmd_spectrum(args):
    cfg = load_config(args.config)
    k = args.k
    n_max = args.n_max if args.n_max is not None else cfg.n_max
    spec = eigenvalues(cfg.operator, k, n_max, n=cfg.n)
    out = _resolve_out(args, cfg, f"spectrum_k{k}.csv")
    rows = []
    for i, lam in enumerate(spec.values):
        nn = i + 1
        center = nn if k == 1 else nn - 0.5
        if lam >= 0:
            root = math.sqrt(lam)
            rows.append((nn, k, fmt_sig(lam), fmt_sig(root), fmt_sig(root - center)))
        else:
            rows.append((nn, k, fmt_sig(lam), "", ""))
    import csv as _csv

    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(("n", "k", "lambda", "sqrt_lambda", "center_gap"))
        writer.writerows(rows)
    print(f"wrote {out}")
    return EXIT_OK


def _parse_lambdas(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip().replace("i", "j")
        if not tok:
            continue
        try:
            out.append(complex(tok))
        except ValueError as exc:
            raise ConfigError(f"cannot parse lambda value {tok!r}") from exc
    if not out:
        raise ConfigError("empty lambda list")
    return out


def cmd_weyl(args):
    cfg = load_config(args.config)
    if args.lambdas:
        lams = _parse_lambdas(args.lambdas)
    elif args.ray:
        rho = cfg.ladder() * cmath.exp(1j * cfg.theta)
        lams = list(rho * rho)
    else:
        raise ConfigError("weyl needs --lambdas or --ray")
    w = WeylFunction.from_config(cfg.operator, n=cfg.n)
    rows = []
    for lam in lams:
        try:
            rows.append((complex(lam), weyl_eval(w, lam), "ok"))
        except WeylPoleError:
            rows.append((complex(lam), None, "pole"))
    out = _resolve_out(args, cfg, "weyl.csv")
    write_weyl_csv(out, rows)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_verify(args):
    cfg = load_config(args.config)
    report = run_verification(cfg.operator, n=cfg.n, seed=args.seed)
    payload = report.to_json_dict()
    if args.out:
        write_json(args.out, payload)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(render_json(payload))
    return EXIT_OK if report.all_passed else EXIT_VERIFY


def _truth_coeffs(cfg, k_max):
    q = cfg.operator.q
    if not isinstance(q, PolyPotential):
        return None
    fact = np.array([math.factorial(j) for j in range(q.coeffs.size)])
    taylor = q.coeffs * fact
    out = np.zeros(k_max + 1, dtype=complex)
    upto = min(taylor.size, k_max + 1)
    out[:upto] = taylor[:upto]
    return out


def _weyl_source(args, cfg):
    src = args.weyl_source
    if src == "self":
        return WeylFunction.from_config(cfg.operator, n=cfg.n), True
    if src.startswith("table:"):
        lams, values = read_weyl_csv(src[len("table:"):])
        ladder_lams = np.array(
            [(s * cmath.exp(1j * cfg.theta)) ** 2 for s in cfg.ladder()]
        )
        for lam in ladder_lams:
            if not np.any(np.abs(lams - lam) <= 1e-9 * (1.0 + abs(lam))):
                raise LadderMismatchError(
                    f"table is missing the ladder point lambda={lam:.6g}; "
                    "samples must lie exactly on the configured ladder "
                    "(interpolation is not supported)"
                )
        return WeylFunction.from_table(lams, values), False
    if src.startswith("spectra:"):
        paths = src[len("spectra:"):].split(",")
        if len(paths) != 2:
            raise ConfigError("spectra source needs two paths: spectra:ONE,TWO")
        found = {}
        for p in paths:
            found.update(read_spectra_csv(p.strip()))
        if 1 not in found or 2 not in found:
            raise ConfigError("spectra source must supply both k=1 and k=2 spectra")
        return (
            WeylFunction.from_spectra(found[1], found[2], n_prod=cfg.n_prod),
            False,
        )
    raise ConfigError(
        f"unknown weyl source {src!r}; use self, table:<path> or spectra:<p1>,<p2>"
    )


def cmd_invert(args):
    cfg = load_config(args.config)
    ray = cfg.ray()
    source, roundtrip = _weyl_source(args, cfg)
    out = _resolve_out(args, cfg, "invert.json")
    try:
        report = reconstruct(source, cfg.operator.kernel, cfg.k_max, ray=ray,
                             n=cfg.n, tol=cfg.tol)
    except DivergenceError as exc:
        payload = {
            "error": "divergence",
            "failing_k": exc.k,
            "message": str(exc),
            "ray": {"theta": ray.theta, "s_values": ray.s_values.tolist()},
        }
        write_json(out, payload)
        print(f"wrote {out}", file=sys.stderr)
        return EXIT_DIVERGENCE
    payload = report.to_json_dict()
    if roundtrip:
        truth = _truth_coeffs(cfg, cfg.k_max)
        if truth is not None:
            payload["roundtrip"] = {
                "truth": [[c.real, c.imag] for c in truth],
                "coeff_errors": [
                    abs(report.coeffs[j] - truth[j]) for j in range(truth.size)
                ],
            }
    write_json(out, payload)
    print(f"wrote {out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="idespec",
        description="Spectral solver for second-order integro-differential "
        "operators on [0, pi]: spectra, Weyl function, verification "
        "identities, and Taylor-coefficient reconstruction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="Enumerate eigenvalues to CSV.")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--k", type=int, choices=(1, 2), default=1)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--out", default=None, metavar="PATH")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("weyl", help="Tabulate N(lambda) to CSV.")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--lambdas", default=None,
                   help="comma-separated lambda values (complex allowed)")
    p.add_argument("--ray", action="store_true",
                   help="tabulate on the configured sector ladder")
    p.add_argument("--out", default=None, metavar="PATH")
    p.set_defaults(func=cmd_weyl)

    p = sub.add_parser("verify", help="Run the identity battery; exit 4 on failure.")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, metavar="PATH")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("invert", help="Reconstruct Taylor coefficients to JSON.")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--weyl-source", default="self", metavar="SPEC",
                   help="self | table:<csv> | spectra:<csv1>,<csv2>")
    p.add_argument("--out", default=None, metavar="PATH")
    p.set_defaults(func=cmd_invert)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EnumerationIncompleteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENUMERATION
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
