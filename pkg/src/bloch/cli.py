"""``bloch`` command-line front end.

Each subcommand reads one JSON config, runs a job and writes
``<out>/<name>/report.json`` plus CSV tables where relevant.  The output
root defaults to ``$BLOCH_OUT`` and then ``./out``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__, bem, mesh
from .cluster import bloch_residual, build_clusters, export_field_grid
from .dispersion import (
    GeometryScale,
    MediumParams,
    assemble_M0,
    dispersion_scan,
    eigen_modes,
    frequencies_fixed_k,
    wavevectors_fixed_omega,
)
from .errors import BlochError, ConfigError
from .lattice import DEFAULT_TOL, cubic_lattice, find_exceptional_set, plane_distances, reciprocal_basis
from .specfun import ball_constants
from .validation import CHECKS, check_order_four, check_order_two

COMMANDS = ("exceptional", "polarizability", "dispersion", "cluster", "validate")


# -- config helpers ----------------------------------------------------------
def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    cfg.setdefault("_base", str(Path(path).resolve().parent))
    return cfg


def _vector(cfg: dict, key: str, required: bool = True):
    if key not in cfg:
        if required:
            raise ConfigError(f"missing required field {key!r}")
        return None
    v = np.asarray(cfg[key], dtype=float)
    if v.shape != (3,):
        raise ConfigError(f"{key!r} must be a list of three numbers")
    return v


def build_lattice(cfg: dict):
    block = cfg.get("lattice")
    if block is None:
        return cubic_lattice()
    vectors = block.get("vectors")
    if vectors is None or np.shape(vectors) != (3, 3):
        raise ConfigError("lattice.vectors must be three 3-vectors")
    return reciprocal_basis(*vectors)


def build_medium(cfg: dict) -> MediumParams:
    block = cfg.get("medium")
    if block is None:
        raise ConfigError("missing required block 'medium'")
    try:
        return MediumParams(*(float(block[k]) for k in ("rho_plus", "rho_minus", "gamma_plus", "gamma_minus")))
    except KeyError as exc:
        raise ConfigError(f"medium is missing {exc.args[0]!r}") from None


def _sigma(cfg: dict) -> float:
    if "sigma" in cfg:
        return float(cfg["sigma"])
    return build_medium(cfg).sigma


def build_tensor(cfg: dict, sigma: float, force_bem: bool = False, threads: int = 1):
    """Return ``(tensor, omega_hat_volume, mesh or None)`` for the geometry block."""
    geo = cfg.get("geometry", {})
    shape = geo.get("shape", "sphere")
    subdivisions = int(geo.get("subdivisions", 3))
    if shape == "sphere":
        if not force_bem:
            return bem.analytic_sphere_tensor(sigma), 4 * np.pi / 3, None
        surf = mesh.icosphere(subdivisions)
    elif shape == "ellipsoid":
        surf = mesh.ellipsoid(geo.get("semi_axes", [1.0, 1.0, 1.0]), subdivisions)
    elif shape == "mesh":
        if "path" not in geo:
            raise ConfigError("geometry.shape 'mesh' needs geometry.path")
        path = Path(geo["path"])
        if not path.is_absolute():
            path = Path(cfg.get("_base", ".")) / path
        surf = mesh.load_mesh(path, auto_flip=bool(geo.get("auto_flip", False)))
    else:
        raise ConfigError(f"unknown geometry.shape {shape!r}")
    return bem.polarizability_tensor(surf, sigma, threads=threads), surf.enclosed_volume, surf


def build_geometry(cfg: dict, omega_hat_volume: float, cell_volume: float) -> GeometryScale:
    geo = cfg.get("geometry", {})
    force = bool(geo.get("force_volume_fraction", False))
    if "a" in geo:
        return GeometryScale(float(geo["a"]), omega_hat_volume, cell_volume, force)
    if "f" in geo:
        return GeometryScale.from_fraction(float(geo["f"]), omega_hat_volume, cell_volume, force)
    raise ConfigError("geometry needs either 'a' (inclusion scale) or 'f' (volume fraction)")


# -- output helpers ----------------------------------------------------------
def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def meta_header(command: str, cfg: dict, tolerances: dict) -> dict:
    public = {k: v for k, v in cfg.items() if not k.startswith("_")}
    digest = hashlib.sha256(json.dumps(public, sort_keys=True).encode()).hexdigest()
    return {
        "command": command,
        "config_sha256": digest,
        "versions": {"bloch": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "tolerances": tolerances,
    }


def _comment_lines(meta: dict) -> list[str]:
    return [f"{k}: {json.dumps(v, sort_keys=True)}" for k, v in meta.items()]


class Job:
    def __init__(self, command: str, cfg: dict, out_root):
        self.command = command
        self.cfg = cfg
        name = cfg.get("name", command)
        root = out_root or os.environ.get("BLOCH_OUT") or "out"
        self.dir = Path(root) / name
        self.tolerances = {"exceptional_tol": float(cfg.get("tol", DEFAULT_TOL))}

    @property
    def meta(self) -> dict:
        return meta_header(self.command, self.cfg, self.tolerances)

    def write_report(self, body: dict) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.dir / "report.json"
        with open(path, "w") as fh:
            json.dump({"meta": self.meta, **body}, fh, indent=2, default=_jsonable)
            fh.write("\n")
        return path

    def write_csv(self, filename: str, header: list[str], rows) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.dir / filename
        with open(path, "w", newline="") as fh:
            for line in _comment_lines(self.meta):
                fh.write(f"# {line}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        return path


def _exceptional_body(exc) -> dict:
    return {
        "k": exc.k,
        "order": exc.order,
        "tol": exc.tol,
        "members": [{"index": list(t), "vector": v} for t, v in exc.members],
    }


# -- subcommands -------------------------------------------------------------
def cmd_exceptional(cfg: dict, args) -> int:
    job = Job("exceptional", cfg, args.out)
    lattice = build_lattice(cfg)
    k = _vector(cfg, "k")
    exc = find_exceptional_set(k, lattice, float(cfg.get("tol", DEFAULT_TOL)))
    planes = plane_distances(k, lattice, 2 * np.linalg.norm(k) + 1.0)[:6]
    body = _exceptional_body(exc)
    body["nearest_planes"] = [{"index": list(t), "distance": d} for t, d in planes]
    path = job.write_report(body)
    print(f"k = {k.tolist()}  order {exc.order}")
    for t, v in exc.members:
        print(f"  m = {t}  |k - m| = {np.linalg.norm(k - v):.12g}")
    print(f"wrote {path}")
    return 0


def cmd_polarizability(cfg: dict, args) -> int:
    job = Job("polarizability", cfg, args.out)
    sigma = _sigma(cfg)
    tensor, volume, surf = build_tensor(cfg, sigma, args.force_bem, args.threads)
    job.tolerances["symmetry_tol"] = tensor.symmetry_tol
    body = {
        "sigma": sigma,
        "source": tensor.source,
        "X": tensor.X,
        "symmetry_defect": tensor.symmetry_defect,
        "symmetry_tol": tensor.symmetry_tol,
        "omega_hat_volume": volume,
        "mesh": None if surf is None else surf.stats(),
    }
    path = job.write_report(body)
    print(f"source {tensor.source}, sigma = {sigma:g}")
    print(np.array2string(tensor.X, precision=6, suppress_small=True))
    print(f"symmetry defect {tensor.symmetry_defect:.2e}; wrote {path}")
    return 0


def _setup(cfg: dict, args):
    lattice = build_lattice(cfg)
    medium = build_medium(cfg)
    tensor, volume, _ = build_tensor(cfg, medium.sigma, args.force_bem, args.threads)
    geo = build_geometry(cfg, volume, lattice.cell_volume)
    return lattice, medium, tensor, geo


def _fixed_point(cfg: dict, args):
    lattice, medium, tensor, geo = _setup(cfg, args)
    k = _vector(cfg, "k")
    exc = find_exceptional_set(k, lattice, float(cfg.get("tol", DEFAULT_TOL)))
    matrix = assemble_M0(exc, tensor, medium)
    modes = eigen_modes(matrix)
    regime = cfg.get("regime", "fixed_k")
    if regime == "fixed_k":
        result = frequencies_fixed_k(exc, modes, medium, geo)
    elif regime == "fixed_omega":
        result = wavevectors_fixed_omega(exc, modes, geo, medium)
    else:
        raise ConfigError(f"regime must be 'fixed_k' or 'fixed_omega', got {regime!r}")
    return lattice, medium, tensor, geo, exc, matrix, modes, result


def cmd_dispersion(cfg: dict, args) -> int:
    job = Job("dispersion", cfg, args.out)
    if "scan" in cfg:
        lattice, medium, tensor, geo = _setup(cfg, args)
        scan = cfg["scan"]
        try:
            direction, k_range, steps = scan["direction"], scan["k_range"], int(scan["steps"])
        except KeyError as exc:
            raise ConfigError(f"scan is missing {exc.args[0]!r}") from None
        res = dispersion_scan(direction, k_range, steps, medium, geo, lattice, tensor,
                              float(cfg.get("tol", DEFAULT_TOL)))
        csv_path = job.write_csv("data.csv", res.header(), res.table())
        job.write_report({
            "regime": "scan",
            "direction": res.direction,
            "f": geo.f,
            "tensor_source": tensor.source,
            "rows": [{"abs_k": r.abs_k, "order": r.order, "exceptional": r.exceptional, "members": r.members,
                      "lambdas": r.lambdas, "omegas": r.omegas, "nearest_plane": r.nearest_plane} for r in res.rows],
        })
        marked = [r.abs_k for r in res.rows if r.exceptional]
        print(f"{len(res.rows)} samples, exceptional at |k| = {marked}; wrote {csv_path}")
        return 0

    _, medium, tensor, geo, exc, matrix, modes, result = _fixed_point(cfg, args)
    rows = [[str(s + 1), repr(m.lam), repr(m.epsilon), "" if m.omega is None else repr(m.omega),
             repr(float(np.linalg.norm(m.k)))] + [repr(float(c)) for c in m.k]
            for s, m in enumerate(result.modes)]
    csv_path = job.write_csv("data.csv", ["mode", "lambda", "epsilon", "omega", "abs_k", "k_x", "k_y", "k_z"], rows)
    job.write_report({
        "regime": result.regime,
        "f": result.f,
        "tensor_source": tensor.source,
        "exceptional": _exceptional_body(exc),
        "M0": matrix.M0,
        "degenerate": modes.degenerate,
        "eigenvalues": modes.lambdas,
        "eigenvectors": modes.vectors.T,
        "modes": [{"lambda": m.lam, "epsilon": m.epsilon, "omega": m.omega, "k": m.k, "mu": m.mu}
                  for m in result.modes],
    })
    print(f"{result.regime}: order {exc.order}, f = {result.f:.4g}")
    for s, m in enumerate(result.modes):
        print(f"  mode {s + 1}: lambda = {m.lam:.10g}  mu = {np.round(m.mu, 6).tolist()}")
    print(f"wrote {csv_path}")
    return 0


def cmd_cluster(cfg: dict, args) -> int:
    job = Job("cluster", cfg, args.out)
    lattice, *_, exc, _, _, result = _fixed_point(cfg, args)
    clusters = build_clusters(result, exc, complex(*cfg.get("amplitude", [1.0, 0.0])))
    samples = np.random.default_rng(0).uniform(-0.5, 0.5, size=(32, 3)) @ lattice.direct
    body = {"regime": result.regime, "exceptional": _exceptional_body(exc), "clusters": []}
    for c in clusters:
        body["clusters"].append({
            "lambda": c.lam, "epsilon": c.epsilon, "omega": c.omega, "k": c.k, "mu": c.mu,
            "spatial_frequencies": c.spatial_frequencies(),
            "bloch_residual": bloch_residual(c, lattice, samples),
        })
    if "grid" in cfg:
        grid = cfg["grid"]
        mode = int(cfg.get("mode", 0))
        if not 0 <= mode < len(clusters):
            raise ConfigError(f"mode must lie in [0, {len(clusters) - 1}]")
        job.dir.mkdir(parents=True, exist_ok=True)
        try:
            spec = (grid["origin"], grid["axes"], grid["counts"])
        except KeyError as exc_:
            raise ConfigError(f"grid is missing {exc_.args[0]!r}") from None
        n = export_field_grid(clusters[mode], spec, job.dir / "fields.csv", _comment_lines(job.meta))
        body["fields"] = {"mode": mode, "rows": n}
    path = job.write_report(body)
    for s, c in enumerate(clusters):
        print(f"cluster {s}: lambda = {c.lam:.8g}  mu = {np.round(c.mu, 6).tolist()}")
    print(f"wrote {path}")
    return 0


def cmd_validate(cfg: dict, args) -> int:
    try:
        only = sorted(CHECKS) if not args.only else [int(x) for x in args.only.split(",")]
    except ValueError:
        raise ConfigError(f"--only expects comma-separated integers, got {args.only!r}") from None
    unknown = [n for n in only if n not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown check numbers {unknown}; valid are 1-{len(CHECKS)}")
    if "ball" in cfg:
        # optional pre-flight on a user radius; a resonant one aborts the run
        try:
            R, kplus = float(cfg["ball"]["R"]), float(cfg["ball"]["k_plus"])
        except KeyError as exc:
            raise ConfigError(f"ball is missing {exc.args[0]!r}") from None
        bc = ball_constants(R, kplus)
        print(f"ball R = {bc.R:g}, k+ = {bc.kplus:g}: dual-form consistency {bc.consistency():.1e}")
    results = []
    for n in only:
        if n == 3 and args.perturb_lambda:
            results.append(check_order_two(args.perturb_lambda))
        elif n == 4 and args.perturb_lambda:
            results.append(check_order_four(args.perturb_lambda))
        else:
            results.append(CHECKS[n]())
        print(results[-1].line(), flush=True)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


HANDLERS = {
    "exceptional": cmd_exceptional,
    "polarizability": cmd_polarizability,
    "dispersion": cmd_dispersion,
    "cluster": cmd_cluster,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bloch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON job description")
        p.add_argument("--out", help="output root (default $BLOCH_OUT or ./out)")
        p.add_argument("--force-bem", action="store_true", help="solve spheres with BEM instead of the closed form")
        p.add_argument("--threads", type=int, default=1, help="worker threads for matrix assembly")
        if name == "validate":
            p.add_argument("--only", help="comma-separated check numbers")
            p.add_argument("--perturb-lambda", type=float, default=0.0,
                           help="shift computed eigenvalues in checks 3 and 4 (negative control)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command != "validate" and args.config is None:
            raise ConfigError(f"'{args.command}' needs --config")
        cfg = load_config(args.config)
        return HANDLERS[args.command](cfg, args)
    except (BlochError, OSError) as exc:
        print(f"bloch: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
