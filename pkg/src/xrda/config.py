"""Flat key-value experiment configs.

Grammar (documented in the README): a header line ``spec_version = 1``
before any section, then ``[problem]``, ``[schedule]``, ``[run]`` and
optionally ``[output]`` sections of ``key = value`` lines.  ``#`` or
``;`` start a comment, blank lines are ignored, list values are
whitespace-separated.  Parsing collects every validation error before
failing so a config round of fixes needs one pass.
"""

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .geometry import make_mirror
from .problems import build_problem, read_dense_matrix, synthetic_sparse_data
from .regularizers import (BoxIndicator, L1Penalty, L2BallIndicator,
                           SimplexIndicator, ZeroRegularizer, ensure_supported)
from .schedules import PRESET_KINDS, constant_steps, power_steps, schedule_preset

SPEC_VERSION = 1

SECTIONS = ("problem", "schedule", "run", "output")

_KNOWN_KEYS = {
    "problem": {"loss", "mirror", "regularizer", "lambda", "radius", "box_lo",
                "box_hi", "cost", "data_a", "data_b", "d", "m", "k", "noise",
                "data_seed"},
    "schedule": {"preset", "c", "mu", "step_kind", "step_scale", "step_exponent"},
    "run": {"iterations", "mode", "seeds", "batch_size", "reference_tol", "x1"},
    "output": {"directory", "stride", "timing"},
}


class ConfigError(Exception):
    """Carries every validation problem found in a config."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass
class ExperimentConfig:
    name: str
    base_dir: Path
    # problem
    loss: str
    mirror: str
    regularizer: str
    lam: float = None
    radius: float = None
    box_lo: object = None
    box_hi: object = None
    cost: list = None
    data_a: str = None
    data_b: str = None
    d: int = None
    m: int = None
    k: int = None
    noise: float = None
    data_seed: int = None
    # schedule
    preset: str = None
    c: float = None
    mu: float = None
    step_kind: str = "power"
    step_scale: float = 1.0
    step_exponent: float = 0.5
    # run
    iterations: int = None
    mode: str = "exact"
    seeds: list = field(default_factory=lambda: [0])
    batch_size: int = None
    reference_tol: float = 1e-8
    x1: list = None
    # output
    directory: str = "runs"
    stride: int = 100
    timing: str = "deterministic"
    # canonical text of the problem definition, for reference caching
    problem_key: str = ""


def _tokenize(text):
    """Yield (lineno, kind, payload); kind in {'section', 'pair'}."""
    errors = []
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                errors.append("line %d: malformed section header %r" % (lineno, raw))
                continue
            out.append((lineno, "section", line[1:-1].strip().lower()))
            continue
        if "=" not in line:
            errors.append("line %d: expected 'key = value', got %r" % (lineno, raw))
            continue
        key, _, value = line.partition("=")
        out.append((lineno, "pair", (key.strip().lower(), value.strip())))
    return out, errors


def _collect_sections(tokens, errors):
    header = {}
    sections = {}
    current = None
    for lineno, kind, payload in tokens:
        if kind == "section":
            name = payload
            if name not in SECTIONS:
                errors.append("line %d: unknown section [%s]" % (lineno, name))
                current = {}
                continue
            if name in sections:
                errors.append("line %d: duplicate section [%s]" % (lineno, name))
                current = sections[name]
                continue
            current = sections.setdefault(name, {})
            continue
        key, value = payload
        target = header if current is None else current
        if key in target:
            errors.append("line %d: duplicate key %r" % (lineno, key))
            continue
        target[key] = value
    return header, sections


class _Reader:
    """Typed key extraction over one section's dict, accumulating errors."""

    def __init__(self, section, data, errors):
        self.section = section
        self.data = dict(data)
        self.errors = errors

    def error(self, msg):
        self.errors.append("[%s] %s" % (self.section, msg))

    def take(self, key):
        return self.data.pop(key, None)

    def take_choice(self, key, choices, default=None, required=False):
        raw = self.take(key)
        if raw is None:
            if required:
                self.error("missing required key %r" % key)
            return default
        if raw not in choices:
            self.error("%s = %r is not one of %s" % (key, raw, sorted(choices)))
            return default
        return raw

    def take_float(self, key, default=None, required=False, minimum=None,
                   strict_min=None):
        raw = self.take(key)
        if raw is None:
            if required:
                self.error("missing required key %r" % key)
            return default
        try:
            val = float(raw)
        except ValueError:
            self.error("%s = %r is not a number" % (key, raw))
            return default
        if minimum is not None and val < minimum:
            self.error("%s = %g must be >= %g" % (key, val, minimum))
            return default
        if strict_min is not None and not val > strict_min:
            self.error("%s = %g must be > %g" % (key, val, strict_min))
            return default
        return val

    def take_int(self, key, default=None, required=False, minimum=None):
        raw = self.take(key)
        if raw is None:
            if required:
                self.error("missing required key %r" % key)
            return default
        try:
            val = int(raw)
        except ValueError:
            self.error("%s = %r is not an integer" % (key, raw))
            return default
        if minimum is not None and val < minimum:
            self.error("%s = %d must be >= %d" % (key, val, minimum))
            return default
        return val

    def take_floats(self, key):
        raw = self.take(key)
        if raw is None:
            return None
        try:
            return [float(tok) for tok in raw.split()]
        except ValueError:
            self.error("%s = %r is not a whitespace-separated list of numbers"
                       % (key, raw))
            return None

    def take_ints(self, key):
        raw = self.take(key)
        if raw is None:
            return None
        try:
            return [int(tok) for tok in raw.split()]
        except ValueError:
            self.error("%s = %r is not a whitespace-separated list of integers"
                       % (key, raw))
            return None

    def finish(self):
        for key in sorted(self.data):
            if key in _KNOWN_KEYS[self.section]:
                continue
            self.error("unknown key %r" % key)
        for key in sorted(set(self.data) & _KNOWN_KEYS[self.section]):
            self.error("key %r is not allowed with these settings" % key)


def parse_config(text, base_dir=".", name="experiment"):
    """Parse and validate config text; raises ConfigError listing every issue."""
    tokens, errors = _tokenize(text)
    header, sections = _collect_sections(tokens, errors)

    version = header.pop("spec_version", None)
    if version is None:
        errors.append("missing header key 'spec_version = %d' before the first section"
                      % SPEC_VERSION)
    elif version != str(SPEC_VERSION):
        errors.append("unsupported spec_version %r (this package reads version %d)"
                      % (version, SPEC_VERSION))
    for key in sorted(header):
        errors.append("unexpected key %r before the first section" % key)

    for required in ("problem", "schedule", "run"):
        if required not in sections:
            errors.append("missing required section [%s]" % required)
    if errors and not all(s in sections for s in ("problem", "schedule", "run")):
        raise ConfigError(errors)

    cfg = ExperimentConfig(name=name, base_dir=Path(base_dir), loss=None,
                           mirror=None, regularizer=None)

    p = _Reader("problem", sections["problem"], errors)
    cfg.loss = p.take_choice("loss", ("lad", "logistic", "linear"), required=True)
    cfg.mirror = p.take_choice("mirror", ("euclidean", "entropy"), required=True)
    cfg.regularizer = p.take_choice(
        "regularizer", ("l1", "box", "simplex", "l2ball", "zero"), required=True)
    if cfg.regularizer == "l1":
        cfg.lam = p.take_float("lambda", required=True, strict_min=0.0)
    if cfg.regularizer == "l2ball":
        cfg.radius = p.take_float("radius", required=True, strict_min=0.0)
    if cfg.regularizer == "box":
        cfg.box_lo = p.take_floats("box_lo")
        cfg.box_hi = p.take_floats("box_hi")
        if cfg.box_lo is None or cfg.box_hi is None:
            p.error("box regularizer needs box_lo and box_hi")
    if cfg.loss == "linear":
        cfg.cost = p.take_floats("cost")
        if cfg.cost is None:
            p.error("linear loss needs the cost vector (key 'cost')")
    elif cfg.loss is not None:
        cfg.data_a = p.take("data_a")
        cfg.data_b = p.take("data_b")
        cfg.d = p.take_int("d", minimum=1)
        cfg.m = p.take_int("m", minimum=1)
        cfg.k = p.take_int("k", minimum=1)
        cfg.noise = p.take_float("noise", minimum=0.0)
        cfg.data_seed = p.take_int("data_seed")
        files_mode = cfg.data_a is not None or cfg.data_b is not None
        synth_mode = any(v is not None for v in (cfg.d, cfg.m, cfg.k, cfg.noise,
                                                 cfg.data_seed))
        if files_mode and synth_mode:
            p.error("give either data files (data_a, data_b) or a synthetic recipe "
                    "(d, m, k, noise, data_seed), not both")
        elif files_mode:
            if cfg.data_a is None or cfg.data_b is None:
                p.error("file mode needs both data_a and data_b")
        elif synth_mode:
            missing = [key for key, v in (("d", cfg.d), ("m", cfg.m), ("k", cfg.k),
                                          ("noise", cfg.noise),
                                          ("data_seed", cfg.data_seed)) if v is None]
            if missing:
                p.error("synthetic recipe is missing %s" % ", ".join(missing))
            elif cfg.k > cfg.d:
                p.error("planted sparsity k = %d exceeds d = %d" % (cfg.k, cfg.d))
        else:
            p.error("%s loss needs data files or a synthetic recipe" % cfg.loss)
    p.finish()

    if cfg.mirror is not None and cfg.regularizer is not None:
        try:
            ensure_supported(make_mirror(cfg.mirror), _make_regularizer(cfg))
        except ValueError as exc:
            errors.append("[problem] %s" % exc)
        except TypeError:
            pass  # regularizer params already reported above

    s = _Reader("schedule", sections["schedule"], errors)
    cfg.preset = s.take_choice("preset", PRESET_KINDS, required=True)
    if cfg.preset == "rda":
        cfg.c = s.take_float("c", default=1.0, strict_min=0.0)
    if cfg.preset == "averaged_leap_frog":
        cfg.mu = s.take_float("mu", required=True)
        if cfg.mu is not None and not 0.0 <= cfg.mu <= 1.0:
            s.error("mu = %g must lie in [0, 1]" % cfg.mu)
    if cfg.preset is not None and cfg.preset != "rda":
        cfg.step_kind = s.take_choice("step_kind", ("power", "constant"),
                                      default="power")
        cfg.step_scale = s.take_float("step_scale", default=1.0, strict_min=0.0)
        if cfg.step_kind == "power":
            cfg.step_exponent = s.take_float("step_exponent", default=0.5)
            if cfg.step_exponent is not None and cfg.step_exponent < 0:
                s.error("step_exponent = %g must be >= 0: forward steps s must be "
                        "non-increasing" % cfg.step_exponent)
    s.finish()

    r = _Reader("run", sections["run"], errors)
    cfg.iterations = r.take_int("iterations", required=True, minimum=1)
    cfg.mode = r.take_choice("mode", ("exact", "stochastic"), default="exact")
    seeds = r.take_ints("seeds")
    if seeds is not None:
        if not seeds:
            r.error("seeds list is empty")
        else:
            cfg.seeds = seeds
    cfg.batch_size = r.take_int("batch_size", minimum=1)
    cfg.reference_tol = r.take_float("reference_tol", default=1e-8, strict_min=0.0)
    cfg.x1 = r.take_floats("x1")
    if cfg.m is not None and cfg.batch_size is not None and cfg.batch_size > cfg.m:
        r.error("batch_size = %d exceeds m = %d" % (cfg.batch_size, cfg.m))
    r.finish()

    if "output" in sections:
        o = _Reader("output", sections["output"], errors)
        cfg.directory = o.take("directory") or cfg.directory
        cfg.stride = o.take_int("stride", default=100, minimum=1)
        cfg.timing = o.take_choice("timing", ("deterministic", "wall"),
                                   default="deterministic")
        o.finish()

    if errors:
        raise ConfigError(errors)

    items = sorted(sections["problem"].items())
    items.append(("reference_tol", repr(cfg.reference_tol)))
    cfg.problem_key = hashlib.sha256(
        "\n".join("%s = %s" % kv for kv in items).encode()).hexdigest()[:16]
    return cfg


def parse_config_file(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(["cannot read config file %s: %s" % (path, exc)])
    return parse_config(text, base_dir=path.parent, name=path.stem)


def _make_regularizer(cfg):
    kind = cfg.regularizer
    if kind == "l1":
        return L1Penalty(cfg.lam)
    if kind == "box":
        return BoxIndicator(cfg.box_lo, cfg.box_hi)
    if kind == "simplex":
        return SimplexIndicator()
    if kind == "l2ball":
        return L2BallIndicator(cfg.radius)
    return ZeroRegularizer()


def build_problem_from_config(cfg):
    """Materialize the CompositeProblem a config describes."""
    mirror = make_mirror(cfg.mirror)
    reg = _make_regularizer(cfg)
    if cfg.loss == "linear":
        return build_problem("linear", reg, mirror, c=cfg.cost,
                             batch_size=cfg.batch_size)
    if cfg.data_a is not None:
        A = read_dense_matrix(cfg.base_dir / cfg.data_a)
        b = read_dense_matrix(cfg.base_dir / cfg.data_b, ndmin=1)
    else:
        A, b, _ = synthetic_sparse_data(cfg.loss, cfg.d, cfg.m, cfg.k, cfg.noise,
                                        cfg.data_seed)
    try:
        return build_problem(cfg.loss, reg, mirror, A=A, b=b,
                             batch_size=cfg.batch_size)
    except ValueError as exc:
        raise ConfigError(["[problem] %s" % exc])


def build_schedule_from_config(cfg):
    if cfg.preset == "rda":
        return schedule_preset("rda", c=cfg.c)
    if cfg.step_kind == "constant":
        steps = constant_steps(cfg.step_scale)
    else:
        steps = power_steps(cfg.step_scale, cfg.step_exponent)
    return schedule_preset(cfg.preset, mu=cfg.mu, steps=steps)
