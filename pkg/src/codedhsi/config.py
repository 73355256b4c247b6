"""Declarative run configuration for the command-line pipeline.

A config is a flat text file of ``key = value`` lines with dotted block
prefixes (paths., scene., sim., classifier., audit.); blank lines and
``#`` comments are ignored. Flags override file values. A config names its
scene source either by paths.cube or by a scene block, never both.
"""

from dataclasses import dataclass, field, fields


class ConfigSyntaxError(ValueError):
    """The config file text could not be parsed."""


class ConfigError(ValueError):
    """The config parsed but violates a constraint."""


class MissingInputError(FileNotFoundError):
    """A referenced input file does not exist."""


def _as_bool(value):
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _as_reg_weight(value):
    v = value.strip().lower()
    if v in ("", "auto", "none"):
        return None
    return float(value)


def _as_float_list(value):
    return tuple(float(v) for v in value.split(",") if v.strip())


@dataclass
class RunConfig:
    # paths
    cube: str | None = None
    masks: str | None = None
    labels: str | None = None
    out: str = "runs/default"
    # scene block
    scene_rows: int = 32
    scene_cols: int = 32
    scene_bands: int = 16
    scene_classes: int = 3
    scene_geometry: str = "tiles"
    scene_voronoi_seeds: int | None = None
    scene_intensity_spread: float = 0.05
    scene_outlier_rate: float = 0.0
    scene_seed: int = 1
    scene_min_separation: float = 0.25
    # simulation block
    sim_acquisitions: int = 4
    sim_noise_sigma: float = 0.0
    sim_open_fraction: float = 0.5
    sim_seed: int = 2
    # classifier block
    clf_block_size: int = 4
    clf_threshold: tuple = (0.2,)
    clf_alpha: float = 0.05
    clf_reg_weight: float | None = None
    clf_refresh_every: int = 64
    clf_merge_angle: float = 0.10
    # audit block
    audit_bins: int = 64
    audit_bin_max: float = 0.5
    audit_exceed_threshold: float = 0.1
    # bookkeeping
    scene_keys_seen: bool = field(default=False, repr=False)

    _KEYMAP = {
        "paths.cube": ("cube", str),
        "paths.masks": ("masks", str),
        "paths.labels": ("labels", str),
        "paths.out": ("out", str),
        "scene.rows": ("scene_rows", int),
        "scene.cols": ("scene_cols", int),
        "scene.bands": ("scene_bands", int),
        "scene.classes": ("scene_classes", int),
        "scene.geometry": ("scene_geometry", str),
        "scene.voronoi_seeds": ("scene_voronoi_seeds", int),
        "scene.intensity_spread": ("scene_intensity_spread", float),
        "scene.outlier_rate": ("scene_outlier_rate", float),
        "scene.seed": ("scene_seed", int),
        "scene.min_separation": ("scene_min_separation", float),
        "sim.acquisitions": ("sim_acquisitions", int),
        "sim.noise_sigma": ("sim_noise_sigma", float),
        "sim.open_fraction": ("sim_open_fraction", float),
        "sim.seed": ("sim_seed", int),
        "classifier.block_size": ("clf_block_size", int),
        "classifier.threshold": ("clf_threshold", _as_float_list),
        "classifier.alpha": ("clf_alpha", float),
        "classifier.reg_weight": ("clf_reg_weight", _as_reg_weight),
        "classifier.refresh_every": ("clf_refresh_every", int),
        "classifier.merge_angle": ("clf_merge_angle", float),
        "audit.bins": ("audit_bins", int),
        "audit.bin_max": ("audit_bin_max", float),
        "audit.exceed_threshold": ("audit_exceed_threshold", float),
    }

    @classmethod
    def from_text(cls, text):
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigSyntaxError(f"line {lineno} is not 'key = value': {raw.rstrip()!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in cls._KEYMAP:
                raise ConfigError(f"line {lineno}: unknown config key {key!r}")
            attr, conv = cls._KEYMAP[key]
            try:
                setattr(cfg, attr, conv(value))
            except ValueError as exc:
                raise ConfigSyntaxError(f"line {lineno}: bad value for {key}: {exc}") from exc
            if key.startswith("scene."):
                cfg.scene_keys_seen = True
        if cfg.cube is not None and cfg.scene_keys_seen:
            raise ConfigError(
                "config names both paths.cube and a scene block; exactly one scene "
                "source is allowed")
        return cfg

    @classmethod
    def from_file(cls, path):
        try:
            with open(path, "r", encoding="ascii") as fh:
                text = fh.read()
        except FileNotFoundError as exc:
            raise MissingInputError(f"config file not found: {path}") from exc
        return cls.from_text(text)

    def manifest_lines(self):
        """Resolved config as deterministic key = value lines."""
        inverse = {attr: key for key, (attr, _) in self._KEYMAP.items()}
        lines = []
        for f in fields(self):
            if f.name not in inverse:
                continue
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ", ".join(repr(v) for v in value)
            elif value is None:
                value = ""
            lines.append(f"{inverse[f.name]} = {value}")
        return sorted(lines)
