# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

"""Run configuration: `key=value` documents merged over `conf/config.yaml`,
initial data expressions and the reproduction presets.
"""
from dataclasses import dataclass, field
import logging
import math
from pathlib import Path
import re
import typing as tp

import numpy as np
from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException
import yaml

from .errors import ConfigError
from .models import MhdState, ModelSpec, OSW
from .spectral import FilterSpec, GaugeSpec, Grid, SpectralField, make_grid
from .timestepper import StepControls

logger = logging.getLogger(__name__)

CONF_DIR = Path(__file__).parent / "conf"
SIN = "sin"
COS = "cos"
# always taken from the preset, other explicit keys win over it
PRESET_FIXED = ("model", "a", "initial.Omega", "initial.omega")
_ALIASES = {"gauge": "gauge.kind"}


@dataclass(frozen=True)
class Term:
    """`amplitude * shape(wavenumber x + phase)`."""
    amplitude: float = 1.0
    wavenumber: int = 1
    phase: float = 0.0
    shape: str = SIN

    def __call__(self, x: np.ndarray) -> np.ndarray:
        func = np.sin if self.shape == SIN else np.cos
        return self.amplitude * func(self.wavenumber * x + self.phase)


_NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TERM = re.compile(
    rf"""^(?:(?P<amp>{_NUMBER})\s*\*?\s*)?
    (?P<shape>sin|cos)\s*\(\s*
    (?:(?P<k>\d+)\s*\*?\s*)?x\s*
    (?:(?P<psign>[+-])\s*(?P<phase>{_NUMBER}))?
    \s*\)$""", re.VERBOSE)
_CONSTANT = re.compile(rf"^{_NUMBER}$")


def _split_terms(text: str) -> tp.List[tp.Tuple[int, str]]:
    """Splits on the `+` and `-` outside parentheses and exponents."""
    pieces: tp.List[tp.Tuple[int, str]] = []
    depth = 0
    sign = 1
    current = ""
    for index, char in enumerate(text):
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
        exponent = index >= 2 and text[index - 1] in "eE" and text[index - 2].isdigit()
        if char in "+-" and depth == 0 and not exponent:
            if current.strip():
                pieces.append((sign, current.strip()))
            elif pieces or current:
                raise ValueError(f"dangling sign in {text!r}")
            sign = 1 if char == "+" else -1
            current = ""
        else:
            current += char
    if depth != 0:
        raise ValueError(f"unbalanced parentheses in {text!r}")
    if not current.strip():
        raise ValueError(f"empty term in {text!r}")
    pieces.append((sign, current.strip()))
    return pieces


@dataclass(frozen=True)
class InitialField:
    """Sum of `terms` plus `offset`, parsed from strings like `0.5*sin(2x+0.7) + 3`."""
    terms: tp.Tuple[Term, ...] = ()
    offset: float = 0.0

    @classmethod
    def parse(cls, text: str) -> "InitialField":
        text = str(text).strip().lower()
        if not text:
            raise ValueError("empty expression")
        terms = []
        offset = 0.0
        for sign, piece in _split_terms(text):
            if _CONSTANT.match(piece):
                offset += sign * float(piece)
                continue
            match = _TERM.match(piece)
            if match is None:
                raise ValueError(f"cannot parse term {piece!r}")
            phase = float(match.group("phase") or 0.0)
            if match.group("psign") == "-":
                phase = -phase
            terms.append(Term(
                amplitude=sign * float(match.group("amp") or 1.0),
                wavenumber=int(match.group("k") or 1),
                phase=phase,
                shape=match.group("shape")))
        return cls(tuple(terms), offset)

    @property
    def max_wavenumber(self) -> int:
        return max((t.wavenumber for t in self.terms), default=0)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        out = np.full_like(x, self.offset, dtype=float)
        for term in self.terms:
            out += term(x)
        return out

    def __str__(self) -> str:
        parts = []
        for t in self.terms:
            phase = ""
            if t.phase:
                phase = f" {'-' if t.phase < 0 else '+'} {abs(t.phase)!r}"
            parts.append((t.amplitude, f"*{t.shape}({t.wavenumber}x{phase})"))
        if self.offset or not parts:
            parts.append((self.offset, ""))
        out = ""
        for index, (value, rest) in enumerate(parts):
            sign = "-" if value < 0 else "+"
            if index == 0:
                out = ("-" if value < 0 else "") + f"{abs(value)!r}{rest}"
            else:
                out += f" {sign} {abs(value)!r}{rest}"
        return out


@dataclass(frozen=True)
class InitialSpec:
    Omega: InitialField
    omega: InitialField
    from_snapshot: tp.Optional[Path] = None

    def check(self, n: int) -> None:
        if self.from_snapshot is not None:
            return
        for name in ["Omega", "omega"]:
            k = getattr(self, name).max_wavenumber
            if k >= n // 2:
                raise ConfigError(f"wavenumber {k} must be below n/2={n // 2}",
                                  key=f"initial.{name}")

    def state(self, grid: Grid, kind: str) -> MhdState:
        """Initial state on `grid`. For `osw` the `Omega` slot stays zero."""
        if self.from_snapshot is not None:
            from .outputs import read_snapshot
            try:
                s = read_snapshot(self.from_snapshot)
            except (OSError, ValueError) as error:
                raise ConfigError(str(error), key="initial.from_snapshot") from None
            if s.grid.n != grid.n:
                raise ConfigError(f"snapshot has {s.grid.n} nodes, expected n={grid.n}",
                                  key="initial.from_snapshot")
            Omega, omega = s.Omega, s.omega
        else:
            Omega = SpectralField.from_function(grid, self.Omega)
            omega = SpectralField.from_function(grid, self.omega)
        if kind == OSW:
            if self.Omega.terms or self.Omega.offset:
                logger.debug("Model osw ignores initial.Omega.")
            Omega = SpectralField.zeros(grid)
        return MhdState(Omega, omega)


@dataclass
class RunConfig:
    """Everything `vort1d.simulation.execute` needs.

    `settings` keeps the merged key/values, used for reports and sweep signatures.
    """
    model: ModelSpec
    n: int
    controls: StepControls
    initial: InitialSpec
    snapshot_times: tp.Tuple[float, ...] = ()
    out_dir: Path = Path("./outputs")
    preset: tp.Optional[str] = None
    bkm_threshold: float = 1e6
    diagnostics_every: int = 1
    oversample: int = 1
    c0: float = 4.0
    particles: int = 256
    settings: tp.Dict[str, tp.Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.initial.check(self.n)
        low, high = sorted([0.0, self.controls.t_end])
        for t in self.snapshot_times:
            if not low <= t <= high:
                raise ConfigError(f"snapshot time {t} outside [{low}, {high}]",
                                  key="snapshot_times")
        order = sorted(set(self.snapshot_times), key=lambda t: self.controls.sign * t)
        self.snapshot_times = tuple(order)

    @property
    def grid(self) -> Grid:
        return make_grid(self.n)

    def initial_state(self) -> MhdState:
        return self.initial.state(self.grid, self.model.kind)


def load_defaults() -> DictConfig:
    cfg = OmegaConf.load(CONF_DIR / "config.yaml")
    assert isinstance(cfg, DictConfig)
    return cfg


def available_presets() -> tp.List[str]:
    return sorted(p.stem for p in (CONF_DIR / "preset").glob("*.yaml"))


def _flat_keys(cfg: DictConfig, prefix: str = "") -> tp.List[str]:
    keys = []
    for key, value in cfg.items():
        name = f"{prefix}{key}"
        if isinstance(value, DictConfig):
            keys.extend(_flat_keys(value, name + "."))
        else:
            keys.append(name)
    return keys


def parse_value(text: str) -> tp.Any:
    """YAML scalar or list, with `1e-3` style numbers read as floats."""
    text = text.strip()
    if not text:
        return None
    return _floats(yaml.safe_load(text))


def _floats(value: tp.Any) -> tp.Any:
    if isinstance(value, list):
        return [_floats(v) for v in value]
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    return value


Entry = tp.Tuple[tp.Optional[int], str, str]


def _read_lines(text: str, origin: tp.Optional[int] = 1) -> tp.Iterator[Entry]:
    for offset, raw in enumerate(text.splitlines()):
        line = None if origin is None else origin + offset
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"expected key=value, got {content!r}", line=line)
        key, value = content.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError("missing key", line=line)
        yield line, _ALIASES.get(key, key), value


def parse_config(text: str, overrides: tp.Sequence[str] = ()) -> RunConfig:
    """Parses a `key=value` document, then `overrides` (same syntax, applied after),
    then expands the preset if any.
    """
    cfg = load_defaults()
    OmegaConf.set_struct(cfg, True)
    known = _flat_keys(cfg)
    lines: tp.Dict[str, tp.Optional[int]] = {}
    entries = list(_read_lines(text))
    for override in overrides:
        entries.extend(_read_lines(override, origin=None))
    for line, key, raw in entries:
        if key not in known:
            options = ", ".join(known)
            raise ConfigError(f"Unknown key. Did you mean one of: {options}?", key=key, line=line)
        try:
            value = parse_value(raw)
            OmegaConf.update(cfg, key, value, merge=False)
        except (yaml.YAMLError, OmegaConfBaseException) as error:
            raise ConfigError(f"malformed value {raw.strip()!r}: {error}", key=key,
                              line=line) from None
        lines[key] = line
    if "dt" in lines and "cfl" in lines and cfg.dt is not None:
        raise ConfigError("dt and cfl are exclusive", key="cfl", line=lines["cfl"])
    if cfg.preset is not None:
        _apply_preset(cfg, lines)
    return build_config(cfg, lines)


def _apply_preset(cfg: DictConfig, lines: tp.Dict[str, tp.Optional[int]]) -> None:
    name = str(cfg.preset)
    if name not in available_presets():
        options = ", ".join(available_presets())
        raise ConfigError(f"Unknown preset {name!r}. Did you mean one of: {options}?",
                          key="preset", line=lines.get("preset"))
    preset = OmegaConf.load(CONF_DIR / "preset" / f"{name}.yaml")
    assert isinstance(preset, DictConfig)
    for key in _flat_keys(preset):
        if key not in PRESET_FIXED and key in lines:
            continue
        if key in lines:
            logger.warning("Preset %s overrides %s=%s.", name, key, OmegaConf.select(cfg, key))
        OmegaConf.update(cfg, key, OmegaConf.select(preset, key), merge=False)
    logger.debug("Expanded preset %s.", name)


def _get(cfg: DictConfig, key: str, kind: tp.Type, lines: tp.Dict[str, tp.Optional[int]],
         optional: bool = False) -> tp.Any:
    value = OmegaConf.select(cfg, key)
    line = lines.get(key)
    if value is None:
        if optional:
            return None
        raise ConfigError("missing value", key=key, line=line)
    if kind is bool:
        if isinstance(value, bool):
            return value
    elif kind is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
    elif kind is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif kind is str:
        if isinstance(value, str):
            return value
    raise ConfigError(f"expected {kind.__name__}, got {value!r}", key=key, line=line)


def build_config(cfg: DictConfig, lines: tp.Optional[tp.Dict[str, tp.Optional[int]]] = None
                 ) -> RunConfig:
    """Validates a merged config and turns it into a `RunConfig`. Errors
    carry the key and, when known, the line that set it.
    """
    lines = {} if lines is None else lines

    def get(key: str, kind: tp.Type, optional: bool = False) -> tp.Any:
        return _get(cfg, key, kind, lines, optional)

    try:
        n = get("n", int)
        make_grid(n)
        gauge = GaugeSpec(get("gauge.kind", str), get("gauge.point", float))
        model = ModelSpec(get("model", str), get("a", float), gauge,
                          get("full_model_dedup", bool))
        filter = FilterSpec(get("filter.enabled", bool), get("filter.alpha", float),
                            get("filter.order", int))
        controls = StepControls(
            t_end=get("t_end", float), dt=get("dt", float, optional=True),
            cfl=get("cfl", float), filter=filter, direction=get("direction", str),
            nan_abort=get("nan_abort", bool), dt_min=get("dt_min", float),
            log_every=get("log_every", int))
        initial = _initial(cfg, lines)
        snapshot_times = OmegaConf.select(cfg, "snapshot_times")
        if not OmegaConf.is_list(snapshot_times):
            raise ConfigError(f"expected a list, got {snapshot_times!r}", key="snapshot_times")
        times = []
        for t in snapshot_times:
            if isinstance(t, bool) or not isinstance(t, (int, float)):
                raise ConfigError(f"expected numbers, got {t!r}", key="snapshot_times")
            times.append(float(t))
        every = get("diagnostics.every", int)
        oversample = get("diagnostics.oversample", int)
        c0 = get("characteristics.c0", float)
        bkm_threshold = get("bkm_threshold", float)
        particles = get("characteristics.particles", int)
        for key, value in [("diagnostics.every", every), ("diagnostics.oversample", oversample),
                           ("characteristics.particles", particles), ("log_every",
                                                                      controls.log_every)]:
            if value < 1:
                raise ConfigError(f"must be at least 1, got {value}", key=key)
        for key, fvalue in [("characteristics.c0", c0), ("bkm_threshold", bkm_threshold)]:
            if not (math.isfinite(fvalue) and fvalue > 0):
                raise ConfigError(f"must be positive, got {fvalue}", key=key)
        return RunConfig(
            model=model, n=n, controls=controls, initial=initial,
            snapshot_times=tuple(times), out_dir=Path(get("out_dir", str)),
            preset=get("preset", str, optional=True), bkm_threshold=bkm_threshold,
            diagnostics_every=every, oversample=oversample, c0=c0, particles=particles,
            settings=tp.cast(dict, OmegaConf.to_container(cfg, resolve=True)))
    except ConfigError as error:
        if error.line is None and error.key is not None and lines.get(error.key) is not None:
            raise ConfigError(error.reason, key=error.key, line=lines[error.key]) from None
        raise


def _initial(cfg: DictConfig, lines: tp.Dict[str, tp.Optional[int]]) -> InitialSpec:
    fields = {}
    for name in ["Omega", "omega"]:
        key = f"initial.{name}"
        value = OmegaConf.select(cfg, key)
        if value is None:
            raise ConfigError("missing value", key=key, line=lines.get(key))
        try:
            fields[name] = InitialField.parse(str(value))
        except ValueError as error:
            raise ConfigError(str(error), key=key, line=lines.get(key)) from None
    snapshot = _get(cfg, "initial.from_snapshot", str, lines, optional=True)
    return InitialSpec(fields["Omega"], fields["omega"],
                       None if snapshot is None else Path(snapshot))


def config_from_file(path: tp.Union[str, Path], overrides: tp.Sequence[str] = ()) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), overrides)
