"""JSON run configuration: one file may carry a TUM, a linkage, a friction
generator, scenario settings and design ranges.  Everything is validated
before any computation and unknown keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import _schema
from . import linkage as lk
from . import sweep
from . import transition as tr
from . import tum_model as tm
from .errors import ConfigError

SCENARIO_KEYS = ("input_speed", "contact_angle_theta2", "contact_stiffness", "duration", "dt")
TOP_LEVEL_KEYS = (
    ("base", "tum", "linkage", "friction")
    + SCENARIO_KEYS
    + ("ranges", "reference_input_torque", "theta_ref", "objectives", "sample")
)


@dataclass(frozen=True)
class RunConfig:
    source: Path | None
    tum: tm.TumSpec | None = None
    linkage: lk.LinkageSpec | None = None
    friction: tr.FrictionGenerator | None = None
    scenario: tr.Scenario | None = None
    ranges: sweep.DesignRanges | None = None
    reference_input_torque: float = sweep.DEFAULT_REFERENCE_TORQUE
    theta_ref: float = sweep.DEFAULT_THETA_REF
    objectives: tuple = ()
    sample: dict | None = None

    def require(self, *names):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            where = self.source or "config"
            raise ConfigError(f"{where}: missing section(s) {', '.join(missing)}")
        return tuple(getattr(self, n) for n in names)


def data_path(name: str) -> Path:
    """Path of a file shipped in the package data directory."""
    return Path(str(resources.files("spine_mech") / "data" / name))


def _resolve(ref: str, relative_to: Path | None) -> Path:
    if relative_to is not None and (relative_to.parent / ref).is_file():
        return relative_to.parent / ref
    if Path(ref).is_file():
        return Path(ref)
    shipped = data_path(ref)
    if shipped.is_file():
        return shipped
    raise ConfigError(f"base config {ref!r} not found")


def load_raw(path) -> tuple[dict, list[Path]]:
    """Merged raw dict (base first, then overrides) and every file that contributed."""
    path = Path(path)
    data = _schema.read_json(path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object at top level")
    unknown = sorted(k for k in data if k not in TOP_LEVEL_KEYS and not _schema.is_comment_key(k))
    if unknown:
        raise ConfigError(f"{path}: unknown field(s) {', '.join(unknown)}")
    files = [path]
    if "base" in data:
        ref = data["base"]
        if not isinstance(ref, str):
            raise ConfigError(f"{path}: base must be a file name")
        base_path = _resolve(ref, path)
        if base_path.resolve() == path.resolve():
            raise ConfigError(f"{path}: base refers to itself")
        base, base_files = load_raw(base_path)
        base.update({k: v for k, v in data.items() if k != "base"})
        return base, base_files + files
    return dict(data), files


def from_dict(data: dict, source=None) -> RunConfig:
    where = str(source) if source is not None else "config"
    tum = tm.TumSpec.from_dict(data["tum"], f"{where}: tum") if "tum" in data else None
    link = lk.LinkageSpec.from_dict(data["linkage"], f"{where}: linkage") if "linkage" in data else None
    fric = tr.FrictionGenerator.from_dict(data["friction"], f"{where}: friction") if "friction" in data else None

    scenario = None
    if any(k in data for k in SCENARIO_KEYS):
        if tum is None or link is None or fric is None:
            raise ConfigError(f"{where}: a scenario needs tum, linkage and friction sections")
        fields = {k: data[k] for k in SCENARIO_KEYS if k in data}
        scenario = _schema.build(tr.Scenario, {"tum": tum, "linkage": link, "friction": fric, **fields}, where)
        if scenario.input_speed == 0:
            raise ConfigError(f"{where}: input_speed must be nonzero")

    torque = _schema.require_number(data.get("reference_input_torque", sweep.DEFAULT_REFERENCE_TORQUE),
                                    "reference_input_torque")
    theta_ref = _schema.require_number(data.get("theta_ref", sweep.DEFAULT_THETA_REF), "theta_ref")

    ranges = None
    if "ranges" in data:
        if tum is None or link is None:
            raise ConfigError(f"{where}: ranges need base tum and linkage sections")
        if not isinstance(data["ranges"], dict):
            raise ConfigError(f"{where}: ranges must be an object")
        ranges = sweep.DesignRanges({k: v for k, v in data["ranges"].items() if not _schema.is_comment_key(k)},
                                    tum, link)

    objectives = []
    for item in data.get("objectives", []):
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ConfigError(f"{where}: each objective must be [field, 'max' | 'min']")
        name, direction = item
        if name not in sweep.NUMERIC_FIELDS:
            raise ConfigError(f"{where}: unknown objective field {name!r}")
        if direction not in ("max", "min"):
            raise ConfigError(f"{where}: objective {name!r} direction must be 'max' or 'min'")
        objectives.append((name, direction))

    sample = None
    if "sample" in data:
        s = data["sample"]
        if not isinstance(s, dict) or set(s) - {"n", "seed"} or "n" not in s:
            raise ConfigError(f"{where}: sample must be {{\"n\": int, \"seed\": int}}")
        sample = {
            "n": _schema.require_number(s["n"], "sample.n", integer=True, positive=True),
            "seed": _schema.require_number(s.get("seed", 0), "sample.seed", integer=True, nonnegative=True),
        }

    return RunConfig(
        Path(source) if source is not None else None,
        tum, link, fric, scenario, ranges, torque, theta_ref, tuple(objectives), sample,
    )


def load(path) -> tuple[RunConfig, list[Path]]:
    data, files = load_raw(path)
    return from_dict(data, path), files


def load_prototype(name: str = "prototype.json") -> RunConfig:
    return load(data_path(name))[0]
