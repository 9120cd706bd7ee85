"""Command-line front end.

Every command reads an optional JSON config (``--config``), lets flags
override its fields, runs one experiment and writes its outputs to
``--out``.  Reports embed the resolved config and seed.  Exit codes: 0 on
success or a passing verdict, 2 on input errors, 3 on a failing verdict.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .energy import energy, g_ratio, potential
from .errors import TorusEnergyError
from .fourier import nonnegativity_scan
from .geometry import Space
from .kernels import kernel_from_dict, profile_from_dict
from .measures import grid_centers, measure_from_csv, measure_from_dict
from .minimize import MinimizeConfig, minimize_points, points_from_csv, regime_classifier
from .subharmonic import check_profile_conditions, max_principle_check, probe_grid, scan_entire_subharmonicity
from .svg import configuration_plot

EXIT_OK, EXIT_INPUT, EXIT_VERDICT = 0, 2, 3
THREADS_ENV = "TORUS_ENERGY_THREADS"


class CliInputError(Exception):
    pass


# -- serialization ------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def _flatten(prefix: str, obj, out: list) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, json.dumps(obj) if isinstance(obj, list) else obj))


def write_report(out_dir: Path, name: str, payload: dict, config: dict, fmt: str) -> Path:
    """Write ``payload`` with a reproducibility header as JSON or key/value CSV."""
    doc = {
        "config": config,
        "seed": config.get("seed"),
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "result": payload,
    }
    doc = _jsonable(doc)
    if fmt == "csv":
        rows: list = []
        _flatten("", doc, rows)
        path = out_dir / f"{name}.csv"
        path.write_text("key,value\n" + "".join(f"{k},{json.dumps(v) if isinstance(v, str) else v}\n" for k, v in rows))
        return path
    path = out_dir / f"{name}.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


# -- inputs -------------------------------------------------------------------


def _read_text(ref: str) -> tuple[str, str]:
    """Text and suffix of a file path or ``bundled:<name>``."""
    if ref.startswith("bundled:"):
        name = ref.split(":", 1)[1]
        if not name.endswith(".json"):
            name += ".json"
        res = resources.files("torus_energy").joinpath("data", name)
        if not res.is_file():
            raise CliInputError(f"no bundled file {name!r}")
        return res.read_text(), ".json"
    path = Path(ref)
    if not path.is_file():
        raise CliInputError(f"cannot read {ref}")
    return path.read_text(), path.suffix.lower()


def _load_json_or_inline(ref) -> dict:
    if isinstance(ref, dict):
        return ref
    ref = str(ref)
    if ref.lstrip().startswith("{"):
        try:
            return json.loads(ref)
        except json.JSONDecodeError as exc:
            raise CliInputError(f"bad inline JSON: {exc}") from None
    text, _ = _read_text(ref)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliInputError(f"bad JSON in {ref}: {exc}") from None


def load_measure(ref, space: Space | None):
    if isinstance(ref, dict):
        return measure_from_dict(ref, space)
    text, suffix = _read_text(str(ref))
    if suffix == ".csv":
        if space is None:
            raise CliInputError("CSV measures need --space")
        return measure_from_csv(text, space)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliInputError(f"bad measure JSON in {ref}: {exc}") from None
    return measure_from_dict(data, space)


def _space(cfg: dict) -> Space | None:
    tag = cfg.get("space")
    return Space.parse(tag) if tag else None


def _kernel_spec(cfg: dict) -> dict:
    if cfg.get("kernel") is not None:
        return _load_json_or_inline(cfg["kernel"])
    if cfg.get("s") is None:
        raise CliInputError("a kernel is required: give --kernel or --s")
    shift = cfg.get("shift", 0.0)
    shift = shift if shift == "auto" else float(shift)
    return {"family": "riesz", "s": float(cfg["s"]), "shift": shift}


def _profile(cfg: dict):
    if cfg.get("profile") is None:
        raise CliInputError("a profile is required: give --profile")
    return profile_from_dict(_load_json_or_inline(cfg["profile"]))


def resolve_threads(value) -> int:
    if value is not None:
        return max(1, int(value))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise CliInputError(f"{THREADS_ENV} must be an integer") from None
    return os.cpu_count() or 1


# -- commands -----------------------------------------------------------------


def cmd_energy(cfg: dict, out: Path, fmt: str) -> int:
    space = _space(cfg)
    if cfg.get("measure") is None:
        raise CliInputError("energy needs --measure")
    mu = load_measure(cfg["measure"], space)
    space = mu.space
    cfg["space"] = space.tag
    kernel = kernel_from_dict(_kernel_spec(cfg), space)
    report = energy(
        kernel,
        mu,
        policy=cfg.get("policy"),
        include_diagonal=cfg.get("include_diagonal", True),
        cap=cfg.get("cap"),
    )
    payload = report.to_dict()
    n = cfg.get("potential_grid")
    if n:
        n = int(n)
        pts = grid_centers(space.dim, n) if space.is_periodic else probe_grid(space, n)[0]
        vals = np.asarray(potential(kernel, mu, pts, policy=cfg.get("policy")), dtype=float).reshape(-1)
        lines = [",".join([f"x{i + 1}" for i in range(pts.shape[1])] + ["U"])]
        lines += [",".join(repr(float(c)) for c in p) + "," + repr(float(v)) for p, v in zip(pts, vals)]
        (out / "potential.csv").write_text("\n".join(lines) + "\n")
        payload["potential_rows"] = len(pts)
    write_report(out, "energy_report", payload, cfg, fmt)
    return EXIT_OK


def cmd_scan(cfg: dict, out: Path, fmt: str) -> int:
    space = _space(cfg) or Space.torus(2)
    cfg["space"] = space.tag
    kernel = kernel_from_dict(_kernel_spec(cfg), space)
    rep = scan_entire_subharmonicity(
        kernel,
        space,
        R=float(cfg.get("R", 0.5)),
        n_pairs=int(cfg.get("n_pairs", 250)),
        radii_per_pair=int(cfg.get("radii_per_pair", 4)),
        seed=int(cfg["seed"]),
        n=int(cfg.get("n", 20000)),
        distances=cfg.get("distances"),
        threads=int(cfg["threads"]),
    )
    write_report(out, "subharmonicity_report", rep.to_dict(), cfg, fmt)
    (out / "margins.csv").write_text(rep.samples_csv())
    return EXIT_VERDICT if rep.verdict == "fails" else EXIT_OK


def cmd_max_principle(cfg: dict, out: Path, fmt: str) -> int:
    space = _space(cfg)
    if cfg.get("measure") is None:
        raise CliInputError("max-principle needs --measure")
    mu = load_measure(cfg["measure"], space)
    cfg["space"] = mu.space.tag
    kernel = kernel_from_dict(_kernel_spec(cfg), mu.space)
    rep = max_principle_check(kernel, mu, probe=int(cfg.get("probe", 128)), tol=float(cfg.get("tol", 1e-6)))
    write_report(out, "max_principle_report", rep.to_dict(), cfg, fmt)
    return EXIT_OK if rep.passed else EXIT_VERDICT


def cmd_minimize(cfg: dict, out: Path, fmt: str) -> int:
    space = _space(cfg) or Space.torus(2)
    cfg["space"] = space.tag
    kernel = kernel_from_dict(_kernel_spec(cfg), space)
    init = cfg.get("init", "random")
    if isinstance(init, str) and init not in ("random", "lattice"):
        text, _ = _read_text(init)
        init = points_from_csv(text)
    if cfg.get("N") is None:
        if isinstance(init, str):
            raise CliInputError("minimize needs --N")
        cfg["N"] = len(init)
    config = MinimizeConfig(
        kernel=kernel,
        space=space,
        n_points=int(cfg["N"]),
        optimizer=cfg.get("optimizer", "auto"),
        init=init,
        seed=int(cfg["seed"]),
        max_iters=int(cfg.get("max_iters", 5000)),
        tol=float(cfg.get("tol", 1e-10)),
        moves=cfg.get("moves"),
    )
    res = minimize_points(config)
    (out / "configuration.csv").write_text(res.points_csv())
    (out / "energy_trace.csv").write_text(res.trace_csv())
    svg = configuration_plot(res.points, f"{space.tag}, N={config.n_points}, E={res.energy:.6g}")
    if svg is not None:
        (out / "configuration.svg").write_text(svg)
    payload = res.to_dict()
    s = getattr(kernel, "s", None)
    if s is not None:
        payload["regime"] = regime_classifier(res, s, space.dim).to_dict()
    write_report(out, "diagnostics", payload, cfg, fmt)
    return EXIT_OK


def cmd_fourier(cfg: dict, out: Path, fmt: str) -> int:
    f = _profile(cfg)
    rep = nonnegativity_scan(
        f,
        int(cfg.get("n_max", 8)),
        int(cfg.get("resolution", 64)),
        check_conditions=not cfg.get("skip_conditions", False),
        seed=int(cfg["seed"]),
    )
    (out / "coefficients.csv").write_text(rep.to_csv())
    write_report(out, "fourier_report", rep.to_dict(), cfg, fmt)
    if cfg.get("expect_nonnegative") and not rep.nonnegative_verdict:
        return EXIT_VERDICT
    return EXIT_OK


def cmd_check_profile(cfg: dict, out: Path, fmt: str) -> int:
    f = _profile(cfg)
    rep = check_profile_conditions(f, seed=int(cfg["seed"]))
    write_report(out, "profile_conditions", rep.to_dict(), cfg, fmt)
    return EXIT_OK if rep.passed else EXIT_VERDICT


def cmd_g_ratio(cfg: dict, out: Path, fmt: str) -> int:
    space = _space(cfg)
    if cfg.get("mu") is None or cfg.get("nu") is None:
        raise CliInputError("g-ratio needs --mu and --nu")
    mu = load_measure(cfg["mu"], space)
    nu = load_measure(cfg["nu"], space)
    cfg["space"] = mu.space.tag
    kernel = kernel_from_dict(_kernel_spec(cfg), mu.space)
    res = g_ratio(kernel, mu, nu, policy=cfg.get("policy"))
    write_report(out, "g_ratio", res.to_dict(), cfg, fmt)
    return EXIT_OK if res.value >= 1.0 - float(cfg.get("tol", 1e-6)) else EXIT_VERDICT


COMMANDS = {
    "energy": cmd_energy,
    "scan-subharmonic": cmd_scan,
    "max-principle": cmd_max_principle,
    "minimize": cmd_minimize,
    "fourier": cmd_fourier,
    "check-profile": cmd_check_profile,
    "g-ratio": cmd_g_ratio,
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--threads", type=int, help=f"worker threads (fallback: ${THREADS_ENV})")
    p.add_argument("--format", choices=["json", "csv"], help="report format")


def _kernel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", help="kernel spec: JSON file, bundled:<name> or inline JSON")
    p.add_argument("--s", type=float, help="Riesz exponent (shorthand for a Riesz kernel)")
    p.add_argument("--shift", help="kernel shift: a number or 'auto'")
    p.add_argument("--space", help="torus:d, circle or sphere2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torus-energy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("energy", help="energy of a measure, optional potential field")
    _common(p)
    _kernel_flags(p)
    p.add_argument("--measure", help="measure file (.json or .csv) or bundled:<name>")
    p.add_argument("--policy", choices=["exclude", "analytic_cell", "cap_m"])
    p.add_argument("--cap", type=float)
    p.add_argument("--exclude-diagonal", dest="include_diagonal", action="store_false", default=None)
    p.add_argument("--potential-grid", type=int, help="write the potential on an n^d grid")

    p = sub.add_parser("scan-subharmonic", help="submean-inequality scan of a kernel")
    _common(p)
    _kernel_flags(p)
    p.add_argument("--R", type=float)
    p.add_argument("--n-pairs", type=int)
    p.add_argument("--radii-per-pair", type=int)
    p.add_argument("--n", type=int, help="Monte Carlo draws per ball")
    p.add_argument("--distances", type=float, nargs="+", help="place pairs at these distances")

    p = sub.add_parser("max-principle", help="first maximum principle on a probe grid")
    _common(p)
    _kernel_flags(p)
    p.add_argument("--measure")
    p.add_argument("--probe", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("minimize", help="N-point energy minimization")
    _common(p)
    _kernel_flags(p)
    p.add_argument("--N", type=int)
    p.add_argument("--optimizer", choices=["auto", "gradient", "anneal"])
    p.add_argument("--init", help="random, lattice or a configuration CSV")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--moves", type=int)
    p.add_argument("--tol", type=float)

    for name, helptext in (("fourier", "cosine coefficient scan of a profile"), ("check-profile", "profile conditions")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--profile", help="profile spec: JSON file, bundled:<name> or inline JSON")
        if name == "fourier":
            p.add_argument("--n-max", type=int)
            p.add_argument("--resolution", type=int)
            p.add_argument("--expect-nonnegative", action="store_true", default=None)
            p.add_argument("--skip-conditions", action="store_true", default=None)

    p = sub.add_parser("g-ratio", help="G ratio of two measures")
    _common(p)
    _kernel_flags(p)
    p.add_argument("--mu")
    p.add_argument("--nu")
    p.add_argument("--policy", choices=["exclude", "analytic_cell", "cap_m"])
    p.add_argument("--tol", type=float)
    return parser


def resolve_config(args: argparse.Namespace) -> tuple[dict, Path, str]:
    cfg: dict = {}
    if args.config:
        cfg = _load_json_or_inline(args.config)
        if not isinstance(cfg, dict):
            raise CliInputError("config must be a JSON object")
    for key, value in vars(args).items():
        if key in ("config", "command", "out", "format") or value is None:
            continue
        cfg[key] = value
    cfg.setdefault("seed", 0)
    cfg["threads"] = resolve_threads(cfg.get("threads"))
    out = Path(args.out or cfg.get("output_dir") or ".")
    fmt = args.format or cfg.get("format") or "json"
    if fmt not in ("json", "csv"):
        raise CliInputError("format must be json or csv")
    cfg["command"] = args.command
    return cfg, out, fmt


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        cfg, out, fmt = resolve_config(args)
        out.mkdir(parents=True, exist_ok=True)
        # threads are recorded for the run but do not change results
        code = COMMANDS[args.command](cfg, out, fmt)
    except (CliInputError, TorusEnergyError, OSError, KeyError, TypeError, ValueError) as exc:
        print(f"torus-energy {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
