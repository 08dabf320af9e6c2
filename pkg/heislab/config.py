"""
Model files.

INI syntax, schema 1:

    [heislab]
    schema = 1
    [model]
    family = example1
    s = 1.5
    J = 0.01
    [window]
    lo = 0
    hi = 2
    [boundary]
    -1 = 0.5, 0.0, 0.1
    3 = 0, 0, 0
    [spins]
    0 = 1, 0, 0

Keys are case-insensitive. Every error is a ConfigError carrying the line
and field it refers to.
"""
import configparser
import re
from dataclasses import dataclass, field

import logging

from . import model
from .exceptions import ConfigError, ModelError
from .group import GroupElement
from .model import LatticeConfig, ModelSpec, Window

logger = logging.getLogger(__name__)

SCHEMA = 1

# field -> default (None: required)
FAMILY_FIELDS = {
    "example1": {"s": None, "j": None, "q": 2.0, "j_max": 1.0},
    "example2": {"s": None, "j": None, "q": 2.0, "j_max": 1.0},
    "ip_quadratic": {"alpha": None, "epsilon": None, "rho": 1.0, "p": 2.0, "j_max": 1.0},
    "ip_power": {"alpha": None, "epsilon": None, "rho": None, "s": None, "p": 2.0, "j_max": 1.0},
    "mu_p": {"beta": None, "p": 2.0},
    "custom": {"phase_exponent": None, "phase_coefficient": 1.0, "interaction": "none",
               "coupling": 0.0, "rho": 1.0, "interaction_exponent": 2.0, "q": 2.0, "j_max": 1.0},
}


def _build(family, v):
    if family == "example1":
        return model.example1(v["s"], v["j"], v["q"], v["j_max"])
    if family == "example2":
        return model.example2(v["s"], v["j"], v["q"], v["j_max"])
    if family == "ip_quadratic":
        return model.ip_quadratic(v["alpha"], v["epsilon"], v["rho"], v["p"], v["j_max"])
    if family == "ip_power":
        return model.ip_power(v["alpha"], v["epsilon"], v["rho"], v["s"], v["p"], v["j_max"])
    if family == "mu_p":
        return model.mu_p(v["beta"], v["p"])
    return ModelSpec("custom", v["phase_exponent"], v["phase_coefficient"], v["interaction"],
                     v["coupling"], rho=v["rho"], interaction_exponent=v["interaction_exponent"],
                     q=v["q"], j_max=v["j_max"])


@dataclass
class ModelFile:
    spec: ModelSpec
    window: Window
    boundary: dict
    spins: dict = field(default_factory=dict)
    path: str = "<string>"

    def config(self) -> LatticeConfig:
        spins = {i: self.spins.get(i, GroupElement.identity()) for i in self.window.sites}
        return LatticeConfig(self.window, spins, self.boundary)


class _Source:
    "Raw text of a model file, for line lookups."

    def __init__(self, text, path):
        self.lines = text.splitlines()
        self.path = path

    def lineno(self, section, key=None):
        current = None
        for k, line in enumerate(self.lines, start=1):
            s = line.strip()
            m = re.match(r"^\[(.+)\]$", s)
            if m:
                current = m.group(1).strip().lower()
                if key is None and current == section:
                    return k
                continue
            if current == section and key is not None:
                name = re.split(r"[=:]", s, maxsplit=1)[0].strip().lower()
                if name == key:
                    return k
        return None

    def error(self, message, section, key=None):
        return ConfigError(message, self.path, self.lineno(section, key), key or "[%s]" % section)


def _real(src, section, key, raw):
    try:
        return float(raw)
    except ValueError:
        raise src.error("expected a decimal real, got %r" % raw, section, key)


def _point(src, section, key, raw):
    try:
        return GroupElement.parse(raw)
    except ValueError as e:
        raise src.error(str(e), section, key)


def _site(src, section, key):
    try:
        return int(key)
    except ValueError:
        raise src.error("site labels are integers, got %r" % key, section, key)


def loads_model(text, path="<string>") -> ModelFile:
    src = _Source(text, path)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text, source=path)
    except configparser.DuplicateOptionError as e:
        raise ConfigError("duplicate key", path, e.lineno, e.option)
    except configparser.DuplicateSectionError as e:
        raise ConfigError("duplicate section", path, e.lineno, "[%s]" % e.section)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("expected a [section] header", path, e.lineno, None)
    except configparser.ParsingError as e:
        lineno, line = e.errors[0]
        raise ConfigError("cannot parse %s" % line.strip(), path, lineno, None)

    if cp.has_section("heislab"):
        schema = cp["heislab"].get("schema", str(SCHEMA))
        if schema.strip() != str(SCHEMA):
            raise src.error("unsupported schema %s (expected %d)" % (schema, SCHEMA), "heislab", "schema")
    for section in ("model", "window", "boundary"):
        if not cp.has_section(section):
            raise ConfigError("missing section [%s]" % section, path, None, "[%s]" % section)
    unknown = [s for s in cp.sections() if s not in ("heislab", "model", "window", "boundary", "spins")]
    if unknown:
        raise src.error("unknown section", unknown[0])

    sec = cp["model"]
    family = sec.get("family")
    if family is None:
        raise src.error("missing key", "model", "family")
    family = family.strip()
    if family not in FAMILY_FIELDS:
        raise src.error("unknown family %r (one of %s)" % (family, ", ".join(FAMILY_FIELDS)), "model", "family")
    fields = FAMILY_FIELDS[family]
    for key in sec:
        if key != "family" and key not in fields:
            raise src.error("unknown key for family %s" % family, "model", key)
    values = {}
    for key, default in fields.items():
        if key in sec:
            raw = sec[key].strip()
            values[key] = raw if key == "interaction" else _real(src, "model", key, raw)
        elif default is None:
            raise src.error("missing key for family %s" % family, "model", key)
        else:
            values[key] = default
    try:
        spec = _build(family, values)
    except (ModelError, ValueError) as e:
        raise src.error(str(e), "model", "family")

    w = cp["window"]
    try:
        window = Window(int(w.get("lo", "0")), int(w.get("hi", w.get("lo", "0"))))
    except ModelError as e:
        raise src.error(str(e), "window", "hi")
    except ValueError as e:
        raise src.error(str(e), "window", "lo" if "lo" in w else None)

    boundary = {}
    for key, raw in cp["boundary"].items():
        j = _site(src, "boundary", key)
        if j not in window.boundary_sites:
            raise src.error("site %d does not border window %s" % (j, window), "boundary", key)
        boundary[j] = _point(src, "boundary", key, raw)
    missing = [j for j in window.boundary_sites if j not in boundary]
    if missing:
        raise src.error("missing boundary value for site(s) %s" % missing, "boundary")

    spins = {}
    if cp.has_section("spins"):
        for key, raw in cp["spins"].items():
            i = _site(src, "spins", key)
            if i not in window:
                raise src.error("site %d is not in window %s" % (i, window), "spins", key)
            spins[i] = _point(src, "spins", key, raw)
    logger.debug("loaded %s from %s", spec.to_s(), path)
    return ModelFile(spec, window, boundary, spins, path)


def load_model(path) -> ModelFile:
    try:
        with open(path, "rt") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(e.strerror or str(e), path, None, None)
    return loads_model(text, path)


def dumps_model(mf: ModelFile) -> str:
    "The model as a custom-family model file."
    spec = mf.spec
    lines = ["[heislab]", "schema = %d" % SCHEMA, "", "[model]", "family = custom"]
    d = spec.to_dict()
    for key in ("phase_exponent", "phase_coefficient", "interaction", "coupling", "rho",
                "interaction_exponent", "q", "j_max"):
        lines.append("%s = %s" % (key, d[key]))
    lines += ["", "[window]", "lo = %d" % mf.window.lo, "hi = %d" % mf.window.hi, "", "[boundary]"]
    for j, g in sorted(mf.boundary.items()):
        lines.append("%d = %r, %r, %r" % (j, g.x1, g.x2, g.x3))
    if mf.spins:
        lines += ["", "[spins]"]
        for i, g in sorted(mf.spins.items()):
            lines.append("%d = %r, %r, %r" % (i, g.x1, g.x2, g.x3))
    return "\n".join(lines) + "\n"
