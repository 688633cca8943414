"""Command-line interface: reproducible curvature queries, scans,
verification suites, and topology reports.

Subcommands
-----------

``curv``      sectional curvature of one plane under every applicable
              engine (closed form and finite differences) with
              agreement deltas.
``verify``    named verification suites; writes ``verify_result.json``.
``scan``      minimum-curvature scan over representative points; writes
              ``scan_report.json`` and ``samples.csv`` (and optionally a
              heatmap PNG).
``topology``  homology of E_{m,-n} and the transition-chart identity.

Configuration is a flat ``key = value`` text file selected with
``--config``; command-line flags override file values.  All floating
point output is serialized with 17 significant digits so reports are
byte-identical for identical configurations.  Exit codes: 0 all checks
pass, 1 a check failed, 2 usage or configuration error.
"""

import argparse
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .metrics import Biinvariant, MetricParams, SplitMetric, full_metric
from .curvature import FD_STEP, FLAT_THRESHOLD, biinvariant_sec_unnormalized, riemann_at
from .sp2 import representative_point, tangent_from_coords
from .zerolocus import (
    classify_plane_full,
    classify_plane_g_nu,
    scan_min_curvature,
)
from .verify import SUITES, run_suites
from .topology import homology_E, transition_identity_check

SQRT_HALF = 1.0 / math.sqrt(2.0)


# ---------------------------------------------------------------------------
# configuration

@dataclass
class RunConfig:
    nu1: float = 0.5
    nu2: float = 0.5
    l1u: float = 1.0
    l1d: float = 1.0
    theta_steps: int = 16
    t_steps: int = 16
    restarts: int = 20
    seed: int = 0
    fd_step: float = FD_STEP
    flat_threshold: float = FLAT_THRESHOLD
    metric: str = "full"
    space: str = "e20"
    out: str = "."

    def validate(self):
        for name in ("nu1", "nu2"):
            nu = getattr(self, name)
            if not (0.0 < nu) or nu >= SQRT_HALF + 1e-12:
                raise ConfigError(
                    f"{name} = {nu!r} invalid: the construction requires "
                    "0 < nu1, nu2 < 1/sqrt(2)"
                )
        for name in ("l1u", "l1d"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be positive (or inf)")
        if self.theta_steps < 2 or self.t_steps < 2:
            raise ConfigError("grid resolutions must be at least 2")
        if self.restarts < 1:
            raise ConfigError("restarts must be at least 1")
        if self.fd_step <= 0.0 or self.flat_threshold <= 0.0:
            raise ConfigError("tolerances must be positive")
        if self.metric not in ("biinvariant", "split", "full"):
            raise ConfigError(f"unknown metric {self.metric!r}")
        if self.space not in ("sp2", "e20"):
            raise ConfigError(f"unknown scan space {self.space!r}")
        return self

    def params(self):
        return MetricParams(self.nu1, self.nu2, self.l1u, self.l1d)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


class ConfigError(Exception):
    pass


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(key, raw):
    raw = raw.strip()
    t = _FIELD_TYPES.get(key)
    if t is None:
        raise ConfigError(f"unknown config key {key!r}")
    if t is int:
        try:
            return int(raw)
        except ValueError as e:
            raise ConfigError(f"{key} expects an integer, got {raw!r}") from e
    if t is float:
        try:
            return float(raw)  # accepts "inf"
        except ValueError as e:
            raise ConfigError(f"{key} expects a number, got {raw!r}") from e
    return raw


def load_config(path):
    """Parse a flat key = value config file into a RunConfig."""
    cfg = RunConfig()
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, raw = line.split("=", 1)
        key = key.strip()
        setattr(cfg, key, _parse_value(key, raw))
    return cfg


def build_config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "grid", None):
        try:
            a, b = args.grid.lower().split("x")
            cfg.theta_steps, cfg.t_steps = int(a), int(b)
        except ValueError as e:
            raise ConfigError(f"--grid expects TxT, got {args.grid!r}") from e
    for flag, key in (
        ("nu1", "nu1"), ("nu2", "nu2"), ("l1u", "l1u"), ("l1d", "l1d"),
        ("seed", "seed"), ("restarts", "restarts"), ("out", "out"),
        ("metric", "metric"), ("space", "space"),
    ):
        v = getattr(args, flag, None)
        if v is not None:
            setattr(cfg, key, _parse_value(key, str(v)) if key in _FIELD_TYPES else v)
    return cfg.validate()


# ---------------------------------------------------------------------------
# deterministic JSON

def _render(obj, indent):
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad}  {_render(str(k), 0)}: {_render(v, indent + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {_render(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        if math.isnan(x):
            return '"nan"'
        return format(x, ".17g")
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps(obj):
    """Deterministic JSON: insertion-ordered keys, floats at 17
    significant digits, infinities as the strings "inf" / "-inf"."""
    return _render(obj, 0) + "\n"


def _fmt(x):
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# curv subcommand

def _parse_plane(spec, dim):
    try:
        rows = [
            np.array([float(v) for v in part.split(",")]) for part in spec.split(";")
        ]
    except ValueError as e:
        raise ConfigError(f"cannot parse plane spec {spec!r}") from e
    if len(rows) != 2 or any(r.shape != (dim,) for r in rows):
        raise ConfigError(
            f"plane spec needs two semicolon-separated lists of {dim} numbers"
        )
    return rows


def cmd_curv(args):
    cfg = build_config(args)
    params = cfg.params()
    theta, t = args.theta, args.t
    record = {
        "theta": theta,
        "t": t,
        "metric": cfg.metric,
        "space": cfg.space,
        "engines": {},
    }
    if cfg.space == "e20":
        coeffs = _parse_plane(args.plane, 7)
        cl = classify_plane_full(theta, t, tuple(coeffs), params)
        record["engines"]["fd"] = cl.sec
        record["classification"] = cl.tag
    else:
        Q = representative_point(theta, t)
        rows = _parse_plane(args.plane, 10)
        metric = {
            "biinvariant": Biinvariant(),
            "split": SplitMetric(params.nu1, params.nu2),
            "full": full_metric(params),
        }[cfg.metric]
        R = riemann_at(metric, Q)
        sec = R.sec(rows[0], rows[1])
        record["engines"]["fd"] = sec
        if cfg.metric == "biinvariant":
            num = biinvariant_sec_unnormalized(rows[0], rows[1])
            G = np.eye(10)
            den = (
                (rows[0] @ G @ rows[0]) * (rows[1] @ G @ rows[1])
                - (rows[0] @ G @ rows[1]) ** 2
            )
            record["engines"]["lie_bracket"] = num / den
        if cfg.metric == "split":
            plane = (
                tangent_from_coords(Q, rows[0]),
                tangent_from_coords(Q, rows[1]),
            )
            cl = classify_plane_g_nu(Q, plane, params)
            record["classification"] = cl.tag
            if "vertizontal" in cl.witness:
                record["engines"]["vertizontal_closed_form"] = cl.witness[
                    "vertizontal"
                ]
    vals = list(record["engines"].values())
    record["max_engine_delta"] = max(
        (abs(a - b) for a in vals for b in vals), default=0.0
    )
    sys.stdout.write(dumps(record))
    return 0


# ---------------------------------------------------------------------------
# verify subcommand

def cmd_verify(args):
    cfg = build_config(args)
    names = args.suite or ["all"]
    for n in names:
        if n != "all" and n not in SUITES:
            raise ConfigError(
                f"unknown suite {n!r}; choose from {sorted(SUITES)} or 'all'"
            )
    result = run_suites(names, params=cfg.params(), seed=cfg.seed)
    result = {"config": cfg.to_dict(), **result}
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "verify_result.json").write_text(dumps(result))
    for sname, sres in result["suites"].items():
        for cname, c in sres["checks"].items():
            print(
                f"[{c['status'].upper():4s}] {sname}/{cname} "
                f"max_residual={c['max_residual']:.3e} tol={c['tolerance']:.1e}"
            )
    print("PASS" if result["passed"] else "FAIL")
    return 0 if result["passed"] else 1


# ---------------------------------------------------------------------------
# scan subcommand

def write_samples_csv(path, report):
    lines = ["theta,t,min_sec,plane_coeffs,classification,on_zero_locus"]
    for p in report.points:
        coeffs = " ".join(_fmt(v) for row in p.plane for v in row)
        lines.append(
            ",".join(
                [
                    _fmt(p.theta),
                    _fmt(p.t),
                    _fmt(p.min_sec),
                    coeffs,
                    p.classification,
                    "true" if p.on_zero_locus else "false",
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_heatmap(path, report):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    nt = len({p.t for p in report.points})
    ntheta = len({p.theta for p in report.points})
    M = np.array([p.min_sec for p in report.points]).reshape(ntheta, nt)
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(
        np.log10(np.maximum(M.T, 1e-16)),
        origin="lower",
        aspect="auto",
        extent=(0.0, math.pi, 0.0, math.pi / 4),
    )
    ax.set_xlabel("theta")
    ax.set_ylabel("t")
    ax.set_title("log10 min sectional curvature")
    fig.colorbar(im, ax=ax)
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_scan(args):
    cfg = build_config(args)
    report = scan_min_curvature(
        cfg.params(),
        grid=(cfg.theta_steps, cfg.t_steps),
        restarts=cfg.restarts,
        seed=cfg.seed,
        metric=cfg.metric,
        space=cfg.space,
    )
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    payload = {"config": cfg.to_dict(), **report.to_dict()}
    (outdir / "scan_report.json").write_text(dumps(payload))
    write_samples_csv(outdir / "samples.csv", report)
    if args.heatmap:
        write_heatmap(outdir / "scan_heatmap.png", report)
    ok = report.min_sec() >= -1e-6
    locus_ok = all(
        (p.min_sec <= cfg.flat_threshold) == p.on_zero_locus for p in report.points
    )
    print(
        f"scan: {len(report.points)} points, min_sec={report.min_sec():.3e}, "
        f"threshold={report.positivity_threshold:.3e}, "
        f"histogram={report.histogram}"
    )
    print("PASS" if ok and locus_ok else "FAIL")
    return 0 if ok and locus_ok else 1


# ---------------------------------------------------------------------------
# topology subcommand

def cmd_topology(args):
    rep = homology_E(args.m, args.n)
    record = rep.to_dict()
    if args.samples > 0:
        record["transition_identity"] = transition_identity_check(
            samples=args.samples, seed=args.seed or 0
        )
    sys.stdout.write(dumps(record))
    if "transition_identity" in record:
        return 0 if record["transition_identity"]["passed"] else 1
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(p):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--nu1", type=float)
    p.add_argument("--nu2", type=float)
    p.add_argument("--l1u", type=float)
    p.add_argument("--l1d", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--grid", help="theta x t resolution, e.g. 16x16")
    p.add_argument("--restarts", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--metric", choices=["biinvariant", "split", "full"])
    p.add_argument("--space", choices=["sp2", "e20"])


def make_parser():
    ap = argparse.ArgumentParser(
        prog="sp2lab",
        description="Curvature laboratory for perturbed metrics on Sp(2) "
        "and the unit tangent bundle of S^4",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curv", help="sectional curvature of one plane")
    _add_common(p)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument(
        "--plane",
        required=True,
        help="two comma-separated coefficient lists joined by ';' "
        "(7 numbers each for --space e20, 10 for --space sp2)",
    )
    p.set_defaults(func=cmd_curv)

    p = sub.add_parser("verify", help="run verification suites")
    _add_common(p)
    p.add_argument(
        "--suite",
        action="append",
        help="suite name (repeatable): "
        + ", ".join(sorted(SUITES)) + ", or all",
    )
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", help="minimum-curvature scan")
    _add_common(p)
    p.add_argument(
        "--heatmap", action="store_true", help="also write scan_heatmap.png"
    )
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("topology", help="bundle homology and charts")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_topology)
    return ap


def main(argv=None):
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
