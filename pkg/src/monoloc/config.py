"""Experiment configuration: one flat INI file, unknown keys rejected."""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields, replace

from .arithmetic import parse_frequency
from .errors import ConfigError
from .potential import OperatorSpec, parse_potential

# section -> {key: (attribute, parser)}
_tuple_int = lambda s: tuple(int(v) for v in s.replace(",", " ").split())


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


SCHEMA = {
    "operator": {"freq": ("freq", str), "potential": ("potential", str),
                 "lambda": ("lam", float), "x": ("x", float)},
    "scales": {"qk": ("scales", _tuple_int), "depth": ("depth", int)},
    "energy": {"E": ("E", float), "dE": ("dE", float)},
    "phases": {"samples": ("phases", int)},
    "tolerances": {"eig_tol": ("eig_tol", float)},
    "lyapunov": {"n": ("lyap_n", int), "sampling": ("sampling", str), "windows": ("windows", int)},
    "ids": {"n": ("ids_n", int), "bc": ("ids_bc", str)},
    "ldt": {"delta": ("ldt_delta", float), "grid": ("ldt_grid", int)},
    "localize": {"n": ("loc_n", int), "delta": ("loc_delta", float), "windows": ("loc_windows", int)},
    "output": {"dir": ("out", str), "seed": ("seed", int), "gnuplot": ("gnuplot", _bool)},
}


@dataclass(frozen=True)
class ExperimentConfig:
    freq: str = "golden"
    potential: str = "sawtooth"
    lam: float = 10.0
    x: float = 0.0
    scales: tuple = (13, 34, 89)
    depth: int = 40
    E: float = 5.0
    dE: float = 0.005
    phases: int = 50
    eig_tol: float = 1e-10
    lyap_n: int = 10_000
    sampling: str = "birkhoff"
    windows: int = 64
    ids_n: int = 233
    ids_bc: str = "periodic"
    ldt_delta: float = 0.3
    ldt_grid: int = 200_000
    loc_n: int = 2000
    loc_delta: float = 0.15
    loc_windows: int = 100
    out: str = "out"
    seed: int = 0
    gnuplot: bool = False
    preset: str = field(default="", compare=False)

    def __post_init__(self):
        try:
            parse_frequency(self.freq)
            parse_potential(self.potential)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if self.lam < 0:
            raise ConfigError("lambda must be >= 0")
        if not 1e-13 <= self.eig_tol <= 1e-6:
            raise ConfigError("eig_tol must lie in [1e-13, 1e-6]")
        if not 0 < self.dE <= 0.01:
            raise ConfigError("dE must lie in (0, 0.01]")
        if self.sampling not in ("birkhoff", "grid"):
            raise ConfigError("sampling must be birkhoff or grid")
        if self.ids_bc not in ("periodic", "dirichlet"):
            raise ConfigError("ids bc must be periodic or dirichlet")
        if not 0 < self.ldt_delta < 1 or not 0 < self.loc_delta < 1:
            raise ConfigError("delta fractions must lie in (0, 1)")
        if self.phases < 20 or self.ids_n < 50:
            raise ConfigError("need phases >= 20 and ids n >= 50")
        q = self.frequency.cf(self.depth).q
        bad = [s for s in self.scales if s not in q[1:]]
        if bad:
            raise ConfigError(f"scales {bad} are not convergent denominators; available: {list(q[1:16])}")

    @property
    def frequency(self):
        return parse_frequency(self.freq)

    def operator(self, lam=None, x=None):
        return OperatorSpec.parse(self.freq, self.lam if lam is None else lam, self.potential,
                                  self.x if x is None else x)

    def with_(self, **kw):
        try:
            return replace(self, **kw)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    def to_ini(self):
        cp = configparser.ConfigParser()
        cp.optionxform = str
        for sec, keys in SCHEMA.items():
            cp[sec] = {}
            for key, (attr, _) in keys.items():
                v = getattr(self, attr)
                if isinstance(v, tuple):
                    v = ", ".join(str(t) for t in v)
                elif isinstance(v, bool):
                    v = "true" if v else "false"
                cp[sec][key] = repr(v) if isinstance(v, float) else str(v)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


PRESETS = {
    "golden-sawtooth-lambda2": dict(freq="golden", potential="sawtooth", lam=2.0, E=1.0),
    "golden-sawtooth-lambda10": dict(freq="golden", potential="sawtooth", lam=10.0, E=5.0),
    "silver-blend0.5-lambda10": dict(freq="silver", potential="blend:0.5", lam=10.0, E=5.0,
                                     scales=(12, 29, 70)),
}


def preset(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return ExperimentConfig(**PRESETS[name], preset=name)


def parse_ini(text, base=None):
    """Overlay an INI document on ``base`` (defaults if None)."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from None
    kw = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]; known: {sorted(SCHEMA)}")
        for key, raw in cp[sec].items():
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]; known: {sorted(SCHEMA[sec])}")
            attr, conv = SCHEMA[sec][key]
            try:
                kw[attr] = conv(raw.strip().strip('"').strip("'"))
            except ValueError as e:
                raise ConfigError(f"[{sec}] {key}: {e}") from None
    base = base or ExperimentConfig()
    return base.with_(**kw)


def load(path=None, preset_name=None):
    base = preset(preset_name) if preset_name else ExperimentConfig()
    if path is None:
        return base
    with open(path) as fh:
        return parse_ini(fh.read(), base)


def field_names():
    return [f.name for f in fields(ExperimentConfig)]
