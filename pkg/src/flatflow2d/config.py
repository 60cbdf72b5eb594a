"""Run configuration: TOML files validated into typed objects.

Example::

    seed = 0
    n = 256
    output_dir = "out/ellipse"

    [initial_curve]
    kind = "ellipse"        # circle | ellipse | wulff | points
    a = 1.2
    b = 0.8333333333333334

    [anisotropy]
    kind = "euclidean"      # euclidean | elliptic | fourier

    [elasticity]
    kind = "none"           # none | analytic | fem

    [scheme]
    h = 1e-3
    beta = 0.1
    T = 0.1
    backend = "minimize"
    snapshot_stride = 10
"""

import os
import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .anisotropy import Anisotropy
from .curve import ClosedCurve
from .elasticity import BulkEnergyModel, Dirichlet, Domain, HookeTensor
from .errors import FlatFlowError, ValidationError
from .step import StepConfig


class ConfigError(ValidationError):
    """A configuration value is missing or invalid; ``field`` names it."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def _positive(table, key, where, default=None):
    val = table.get(key, default)
    if val is None:
        raise ConfigError(f"{where}.{key}", "is required")
    try:
        val = float(val)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.{key}", f"must be a number, got {val!r}") from None
    if not (val > 0 and np.isfinite(val)):
        raise ConfigError(f"{where}.{key}", f"must be positive, got {val!r}")
    return val


def _int(table, key, where, default, minimum=1):
    val = table.get(key, default)
    if not isinstance(val, int) or isinstance(val, bool) or val < minimum:
        raise ConfigError(f"{where}.{key}", f"must be an integer >= {minimum}, got {val!r}")
    return val


@dataclass
class RunConfig:
    """Everything a command needs, parsed from one TOML document."""

    initial_curve: dict
    n: int
    anisotropy: Anisotropy
    elasticity: BulkEnergyModel
    scheme: dict
    reference: dict = field(default_factory=dict)
    compare: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "out"
    raw: dict = field(default_factory=dict)
    base_dir: str = "."

    def step_config(self):
        s = self.scheme
        return StepConfig(
            h=s["h"],
            beta=s["beta"],
            anisotropy=self.anisotropy,
            bulk=self.elasticity,
            backend=s["backend"],
            tol=s["tol"],
            max_iter=s["max_iter"],
        )

    def build_initial_curve(self):
        ic, n = self.initial_curve, self.n
        kind = ic["kind"]
        try:
            if kind == "circle":
                return ClosedCurve.circle(ic["r"], n)
            if kind == "ellipse":
                return ClosedCurve.ellipse(ic["a"], ic["b"], n)
            if kind == "wulff":
                return self.anisotropy.wulff_boundary(n)
            path = ic["path"]
            if not os.path.isabs(path):
                path = os.path.join(self.base_dir, path)
            if path.endswith(".json"):
                return ClosedCurve.from_points(ClosedCurve.load(path).nodes, n)
            return ClosedCurve.from_points(np.loadtxt(path, delimiter=None), n)
        except OSError as exc:
            raise ConfigError("initial_curve.path", str(exc)) from None
        except FlatFlowError as exc:
            raise ConfigError("initial_curve", str(exc)) from None


def _parse_initial_curve(t):
    kind = t.get("kind")
    where = "initial_curve"
    if kind == "circle":
        return {"kind": kind, "r": _positive(t, "r", where, 1.0)}
    if kind == "ellipse":
        return {"kind": kind, "a": _positive(t, "a", where), "b": _positive(t, "b", where)}
    if kind == "wulff":
        return {"kind": kind}
    if kind == "points":
        if not isinstance(t.get("path"), str):
            raise ConfigError(f"{where}.path", "is required for kind 'points'")
        return {"kind": kind, "path": t["path"]}
    raise ConfigError(f"{where}.kind", f"must be circle, ellipse, wulff or points, got {kind!r}")


def _parse_anisotropy(t):
    try:
        return Anisotropy.from_dict(t or {"kind": "euclidean"})
    except KeyError as exc:
        raise ConfigError(f"anisotropy.{exc.args[0]}", "is required") from None
    except (FlatFlowError, TypeError, ValueError) as exc:
        raise ConfigError("anisotropy", str(exc)) from None


def _parse_elasticity(t):
    t = t or {}
    kind = t.get("kind", "none")
    where = "elasticity"
    try:
        if kind == "none":
            return BulkEnergyModel.none()
        omega = dict(t.get("omega", {}))
        domain = Domain(
            kind=omega.get("kind", "disk"),
            radius=float(omega.get("radius", 3.0)),
            center=tuple(omega.get("center", (0.0, 0.0))),
            bounds=tuple(omega.get("bounds", (-3.0, 3.0, -3.0, 3.0))),
        )
        if kind == "analytic":
            if not isinstance(t.get("analytic_q"), str):
                raise ConfigError(f"{where}.analytic_q", "is required for kind 'analytic'")
            return BulkEnergyModel.analytic(t["analytic_q"], domain)
        if kind == "fem":
            lame = t.get("lame", [1.0, 1.0])
            if len(lame) != 2:
                raise ConfigError(f"{where}.lame", "must be [lambda, mu]")
            w0 = dict(t.get("w0", {}))
            bc = Dirichlet(
                kind=w0.get("kind", "affine"),
                matrix=tuple(tuple(map(float, r)) for r in w0.get("matrix", [[0.0, 0.0], [0.0, 0.0]])),
                translation=tuple(w0.get("translation", (0.0, 0.0))),
                delta=float(w0.get("delta", 0.0)),
                center=tuple(w0.get("center", (0.0, 0.0))),
            )
            return BulkEnergyModel.fem(
                HookeTensor(float(lame[0]), float(lame[1])),
                domain,
                bc,
                mesh_size=_positive(t, "mesh_size", where, 0.05),
                grading=float(t.get("grading", 0.1)),
                max_size=t.get("max_size"),
                recovery=t.get("recovery", "traction"),
            )
    except ConfigError:
        raise
    except (FlatFlowError, TypeError, ValueError) as exc:
        raise ConfigError(where, str(exc)) from None
    raise ConfigError(f"{where}.kind", f"must be none, analytic or fem, got {kind!r}")


def _parse_scheme(t):
    where = "scheme"
    if t is None:
        raise ConfigError(where, "section is required")
    backend = t.get("backend", "minimize")
    if backend not in ("minimize", "el-fixed-point"):
        raise ConfigError(f"{where}.backend", f"must be minimize or el-fixed-point, got {backend!r}")
    T = t.get("T", 0.0)
    if not isinstance(T, (int, float)) or T < 0:
        raise ConfigError(f"{where}.T", f"must be non-negative, got {T!r}")
    return {
        "h": _positive(t, "h", where),
        "beta": _positive(t, "beta", where),
        "T": float(T),
        "backend": backend,
        "tol": _positive(t, "tol", where, 1e-9),
        "max_iter": _int(t, "max_iter", where, 500),
        "snapshot_stride": _int(t, "snapshot_stride", where, 1),
    }


def _parse_reference(t):
    if not t:
        return {}
    where = "reference"
    out = {"T": _positive(t, "T", where), "stride": _int(t, "stride", where, 1)}
    out["dt"] = _positive(t, "dt", where) if "dt" in t else None
    return out


def parse_config(data, base_dir="."):
    """Validate a decoded TOML document into a RunConfig."""
    if not isinstance(data, dict):
        raise ConfigError("config", "must be a table")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed", f"must be an integer, got {seed!r}")
    n = _int(data, "n", "config", 256, minimum=16)
    if "initial_curve" not in data:
        raise ConfigError("initial_curve", "section is required")
    cfg = RunConfig(
        initial_curve=_parse_initial_curve(data["initial_curve"]),
        n=n,
        anisotropy=_parse_anisotropy(data.get("anisotropy")),
        elasticity=_parse_elasticity(data.get("elasticity")),
        scheme=_parse_scheme(data.get("scheme")),
        reference=_parse_reference(data.get("reference")),
        compare=dict(data.get("compare", {})),
        sweep=dict(data.get("sweep", {})),
        seed=seed,
        output_dir=str(data.get("output_dir", "out")),
        raw=data,
        base_dir=base_dir,
    )
    for key, values in cfg.sweep.items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"sweep.{key}", "must be a non-empty list")
    return cfg


def load_config(path):
    """Read and validate a TOML config file."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"not valid TOML: {exc}") from None
    return parse_config(data, base_dir=os.path.dirname(os.path.abspath(path)))


def with_override(data, dotted_key, value):
    """Copy of a decoded config with one ``section.key`` replaced."""
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in data.items()}
    parts = dotted_key.split(".")
    table = out
    for p in parts[:-1]:
        table = table.setdefault(p, {})
    table[parts[-1]] = value
    return out
