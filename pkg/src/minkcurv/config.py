"""Run configurations: JSON in, validated dataclasses out.

Every key is checked against the dataclass fields of its section, and every
failure raises ``ConfigError`` carrying the dotted path of the offending key.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields

from . import norms, plane2d, surfaces
from .errors import ConfigError, InvalidInput

NORM_KINDS = {
    "euclidean": ("radius",),
    "lp": ("p", "delta"),
    "superellipsoid": ("a", "b", "c", "p", "delta"),
}
SURFACE_KINDS = {
    "sphere": ("radius",),
    "ellipsoid": ("a", "b", "c"),
    "torus": ("R", "r"),
    "minkowski_sphere": ("r",),
    "graph": ("expr", "extent"),
    "plane": ("extent",),
}
CURVE_KINDS = {
    "ellipse": ("a", "b"),
    "circle": ("r",),
    "norm_circle": ("r",),
}


def _number(value, path, positive=False, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{path} must be a finite number, got {value!r}", path)
    if positive and value <= 0:
        raise ConfigError(f"{path} must be positive, got {value}", path)
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path} must be >= {minimum}, got {value}", path)
    return float(value)


def _integer(value, path, minimum=0):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{path} must be an integer >= {minimum}, got {value!r}", path)
    return value


def _check_keys(data, cls, path, allowed=None):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'} must be a JSON object", path or None)
    names = {f.name for f in fields(cls)} if allowed is None else set(allowed)
    for key in data:
        if key not in names:
            where = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown key {where!r}", where)


def _kind(data, table, path):
    kind = data.get("kind")
    if kind not in table:
        raise ConfigError(f"{path}.kind must be one of {sorted(table)}, got {kind!r}", f"{path}.kind")
    _check_keys(data, None, path, allowed=("kind",) + table[kind])
    return kind


@dataclass(frozen=True)
class NormConfig:
    kind: str = "euclidean"
    radius: float = 1.0
    p: float = 4.0
    delta: float = norms.DEFAULT_DELTA
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0

    @classmethod
    def from_dict(cls, data, path="norm"):
        kind = _kind(data, NORM_KINDS, path)
        kw = {"kind": kind}
        for key in NORM_KINDS[kind]:
            if key in data:
                if key == "delta":
                    kw[key] = _number(data[key], f"{path}.{key}", minimum=0.0)
                else:
                    kw[key] = _number(data[key], f"{path}.{key}", positive=True)
        if kind in ("lp", "superellipsoid"):
            if "p" not in data:
                raise ConfigError(f"{path}.p is required for {kind}", f"{path}.p")
            if kw["p"] <= 1:
                raise ConfigError(f"{path}.p must exceed 1, got {kw['p']}", f"{path}.p")
        return cls(**kw)

    def build(self, dim=3):
        if self.kind == "euclidean":
            return norms.euclidean(self.radius, dim=dim)
        if self.kind == "lp":
            return norms.lp(self.p, self.delta, dim=dim)
        if dim != 3:
            raise ConfigError("superellipsoid norms exist only in three dimensions", "norm.kind")
        return norms.superellipsoid(self.a, self.b, self.c, self.p, self.delta)

    def as_dict(self):
        return {"kind": self.kind, **{k: getattr(self, k) for k in NORM_KINDS[self.kind]}}


@dataclass(frozen=True)
class SurfaceConfig:
    kind: str = "ellipsoid"
    radius: float = 1.0
    a: float = 1.0
    b: float = 1.5
    c: float = 2.0
    R: float = 2.0
    r: float = 0.5
    expr: str = "0.5*(x^2 + y^2)"
    extent: float = 0.5

    @classmethod
    def from_dict(cls, data, path="surface"):
        kind = _kind(data, SURFACE_KINDS, path)
        kw = {"kind": kind}
        for key in SURFACE_KINDS[kind]:
            if key not in data:
                continue
            if key == "expr":
                if not isinstance(data[key], str):
                    raise ConfigError(f"{path}.expr must be a string", f"{path}.expr")
                try:
                    surfaces.parse_expression(data[key])
                except InvalidInput as exc:
                    raise ConfigError(str(exc), f"{path}.expr") from None
                kw[key] = data[key]
            else:
                kw[key] = _number(data[key], f"{path}.{key}", positive=True)
        out = cls(**kw)
        if kind == "torus" and out.r >= out.R:
            raise ConfigError(f"{path}.r must be smaller than {path}.R", f"{path}.r")
        return out

    def build(self, norm=None):
        k = self.kind
        if k == "sphere":
            return surfaces.round_sphere(self.radius)
        if k == "ellipsoid":
            return surfaces.ellipsoid(self.a, self.b, self.c)
        if k == "torus":
            return surfaces.torus(self.R, self.r)
        if k == "minkowski_sphere":
            return surfaces.minkowski_sphere(norm, self.r)
        if k == "graph":
            return surfaces.graph(self.expr, self.extent)
        return surfaces.SurfaceAtlas([surfaces.plane_chart(self.extent)], "plane", {}, closed=False)

    @property
    def convex(self):
        return self.kind in ("sphere", "ellipsoid", "minkowski_sphere")

    @property
    def closed(self):
        return self.kind not in ("graph", "plane")

    def as_dict(self):
        return {"kind": self.kind, **{k: getattr(self, k) for k in SURFACE_KINDS[self.kind]}}


@dataclass(frozen=True)
class CurveConfig:
    kind: str = "ellipse"
    a: float = 2.0
    b: float = 1.0
    r: float = 1.0

    @classmethod
    def from_dict(cls, data, path="curve"):
        kind = _kind(data, CURVE_KINDS, path)
        kw = {k: _number(data[k], f"{path}.{k}", positive=True) for k in CURVE_KINDS[kind] if k in data}
        return cls(kind=kind, **kw)

    def build(self, plane_norm):
        if self.kind == "ellipse":
            return plane2d.ellipse(self.a, self.b)
        if self.kind == "circle":
            return plane2d.circle(self.r)
        return plane2d.norm_circle(plane_norm, self.r)


def _default_verify_surfaces():
    return (SurfaceConfig("sphere", radius=1.0), SurfaceConfig("ellipsoid"), SurfaceConfig("torus"))


def _default_verify_norms():
    return (NormConfig("euclidean"), NormConfig("lp", p=3.0), NormConfig("lp", p=4.0))


@dataclass(frozen=True)
class VerifyConfig:
    surfaces: tuple = field(default_factory=_default_verify_surfaces)
    norms: tuple = field(default_factory=_default_verify_norms)
    mc_samples: int = 200_000
    profile: str = "quick"

    @classmethod
    def from_dict(cls, data, path="verify"):
        _check_keys(data, cls, path)
        kw = {}
        if "surfaces" in data:
            kw["surfaces"] = tuple(SurfaceConfig.from_dict(s, f"{path}.surfaces[{i}]")
                                   for i, s in enumerate(_list(data["surfaces"], f"{path}.surfaces")))
        if "norms" in data:
            kw["norms"] = tuple(NormConfig.from_dict(s, f"{path}.norms[{i}]")
                                for i, s in enumerate(_list(data["norms"], f"{path}.norms")))
        if "mc_samples" in data:
            kw["mc_samples"] = _integer(data["mc_samples"], f"{path}.mc_samples", 1000)
        if "profile" in data:
            if data["profile"] not in ("quick", "full"):
                raise ConfigError(f"{path}.profile must be 'quick' or 'full'", f"{path}.profile")
            kw["profile"] = data["profile"]
        return cls(**kw)


def _list(value, path):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{path} must be a non-empty list", path)
    return value


def _point_list(value, path):
    pts = _list(value, path)
    out = []
    for i, p in enumerate(pts):
        if not isinstance(p, list) or len(p) != 2:
            raise ConfigError(f"{path}[{i}] must be a [u, v] pair", f"{path}[{i}]")
        out.append((_number(p[0], f"{path}[{i}]"), _number(p[1], f"{path}[{i}]")))
    return tuple(out)


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI command may read; unused sections are ignored by the command."""

    norm: NormConfig = field(default_factory=NormConfig)
    surface: SurfaceConfig = field(default_factory=SurfaceConfig)
    curve: CurveConfig = field(default_factory=CurveConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    grid: int = 1
    seed: int = 0
    threads: int = 1
    samples: int = 1_000_000
    eps: float = 0.2
    rhos: tuple = (0.05, 0.1, 0.2)
    offsets: tuple = (-0.1, -0.05, 0.05, 0.1)
    points: tuple = ()
    chart: int = 0
    n_grid: int = 20
    radii: tuple | None = None
    plane_samples: int = plane2d.DEFAULT_SAMPLES

    @classmethod
    def from_dict(cls, data):
        _check_keys(data, cls, "")
        kw = {}
        if "norm" in data:
            kw["norm"] = NormConfig.from_dict(data["norm"])
        if "surface" in data:
            kw["surface"] = SurfaceConfig.from_dict(data["surface"])
        if "curve" in data:
            kw["curve"] = CurveConfig.from_dict(data["curve"])
        if "verify" in data:
            kw["verify"] = VerifyConfig.from_dict(data["verify"])
        for key, lo in (("grid", 0), ("seed", 0), ("threads", 1), ("samples", 1000), ("chart", 0),
                        ("n_grid", 2), ("plane_samples", 64)):
            if key in data:
                kw[key] = _integer(data[key], key, lo)
        if "eps" in data:
            kw["eps"] = _number(data["eps"], "eps", positive=True)
        for key in ("rhos", "radii"):
            if key in data:
                kw[key] = tuple(_number(x, f"{key}[{i}]", positive=True)
                                for i, x in enumerate(_list(data[key], key)))
        if "offsets" in data:
            kw["offsets"] = tuple(_number(x, f"offsets[{i}]") for i, x in enumerate(_list(data["offsets"], "offsets")))
        if "points" in data:
            kw["points"] = _point_list(data["points"], "points")
        return cls(**kw)

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}", "config") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc.msg} (line {exc.lineno})",
                              "config") from None
        return cls.from_dict(data)

    def with_overrides(self, **kw):
        from dataclasses import replace
        return replace(self, **{k: v for k, v in kw.items() if v is not None})
