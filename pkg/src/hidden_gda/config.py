"""Experiment configuration files.

The format is plain text::

    # comment
    kind = cycle2x2
    seed = 7

    [game]
    U = [[2, -1], [-1, 1]]

    [fields]
    f = sigmoid
    g = affine_sigmoid a=0.8 b=0.2

Values are Python-style literals (numbers, lists, quoted strings); anything
that does not parse as a literal is kept as a bare string, which is how field
specs and enum values are written.  Every problem is reported with its line
number and ``section.key`` path.
"""

import ast
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .activation import ScalarField, parse_field
from .game import BilinearGame, GameError, game_from_equilibrium, solve_interior_equilibrium
from .integrate import RK4, RK45

KINDS = (
    "cycle2x2",
    "recurrence_multi",
    "spurious",
    "spurious_discrete",
    "discrete_energy",
    "time_average",
    "divergence_check",
)

KIND_HELP = {
    "cycle2x2": "2x2 hidden game: conserved energy, periodic orbits, averages over one period",
    "recurrence_multi": "N x M hidden game: returns to the initial state in volume coordinates",
    "spurious": "continuous GDA: stable non-Nash fixed points or unsafe initializations",
    "spurious_discrete": "discrete GDA counterpart of 'spurious'",
    "discrete_energy": "discrete GDA on a 2x2 sigmoid game: the energy never decreases",
    "time_average": "2x2 hidden game: running time averages of f, g and the payoff",
    "divergence_check": "divergence of the flow in volume coordinates at random points",
}


class ConfigError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Diagnostic:
    line: Optional[int]
    path: str
    reason: str

    def __str__(self):
        where = f"line {self.line}: " if self.line else ""
        return f"{where}{self.path}: {self.reason}"


def _literal(text):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_text(text):
    """``{section: {key: (value, line)}}``; the top level is section ``""``."""
    sections = {"": {}}
    header_lines = {"": 0}
    current = ""
    diags = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                diags.append(Diagnostic(lineno, current or "<top>", f"malformed section header {line!r}"))
                continue
            current = line[1:-1].strip()
            if current in sections:
                diags.append(Diagnostic(lineno, current, "duplicate section"))
            sections.setdefault(current, {})
            header_lines.setdefault(current, lineno)
            continue
        if "=" not in line:
            diags.append(Diagnostic(lineno, current or "<top>", f"expected 'key = value', got {line!r}"))
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            diags.append(Diagnostic(lineno, current or "<top>", "missing key"))
            continue
        path = f"{current}.{key}" if current else key
        if key in sections[current]:
            diags.append(Diagnostic(lineno, path, "duplicate key"))
            continue
        # field specs contain '=' themselves ("affine_sigmoid a=0.8 b=0.2"); the
        # first '=' separates key from value, so the remainder is kept intact
        sections[current][key] = (_literal(value), lineno)
    return sections, header_lines, diags


# ----------------------------------------------------------------------------
# schema

def _is_num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _float(lo=None, hi=None, lo_open=True, hi_open=True):
    def check(x):
        if not _is_num(x):
            return None, "expected a finite number"
        x = float(x)
        if lo is not None and (x <= lo if lo_open else x < lo):
            return None, f"must be {'>' if lo_open else '>='} {lo:g}"
        if hi is not None and (x >= hi if hi_open else x > hi):
            return None, f"must be {'<' if hi_open else '<='} {hi:g}"
        return x, None
    return check


def _int(lo=None, hi=None):
    def check(x):
        if isinstance(x, bool) or not isinstance(x, int):
            return None, "expected an integer"
        if lo is not None and x < lo:
            return None, f"must be >= {lo}"
        if hi is not None and x > hi:
            return None, f"must be <= {hi}"
        return x, None
    return check


def _enum(*options):
    def check(x):
        if x not in options:
            return None, f"must be one of {', '.join(options)}"
        return x, None
    return check


def _string(x):
    if not isinstance(x, str) or not x:
        return None, "expected a non-empty string"
    return x, None


def _matrix(x):
    if not isinstance(x, (list, tuple)) or not x or not all(isinstance(r, (list, tuple)) for r in x):
        return None, "expected a matrix literal such as [[1, -1], [-1, 1]]"
    widths = {len(r) for r in x}
    if len(widths) != 1:
        return None, "rows have different lengths"
    if not all(_is_num(v) for r in x for v in r):
        return None, "entries must be finite numbers"
    return np.array(x, dtype=float), None


def _field_list(x):
    items = list(x) if isinstance(x, (list, tuple)) else [x]
    out = []
    for item in items:
        if not isinstance(item, str):
            return None, f"expected a field description string, got {item!r}"
        try:
            out.append(parse_field(item))
        except ValueError as exc:
            return None, str(exc)
    return out, None


def _numbers(x):
    """A scalar, a vector, or a list of vectors (one per seed)."""
    arr = np.asarray(x, dtype=object)
    try:
        vals = np.array(x, dtype=float)
    except (TypeError, ValueError):
        return None, "expected numbers"
    if arr.dtype == object and vals.ndim == 0 and not _is_num(x):
        return None, "expected numbers"
    if not np.all(np.isfinite(vals)):
        return None, "entries must be finite"
    if vals.ndim > 2:
        return None, "expected a scalar, a vector or a list of vectors"
    return vals, None


SCHEMA = {
    "": {
        "kind": _enum(*KINDS),
        "seed": _int(0, (1 << 64) - 1),
        "out": _string,
        "description": _string,
    },
    "game": {
        "U": _matrix,
        "p": _float(0.0, 1.0),
        "q": _float(0.0, 1.0),
        "v": _float(),
    },
    "fields": {"f": _field_list, "g": _field_list},
    "init": {
        "mode": _enum("explicit", "random", "disk"),
        "theta": _numbers,
        "phi": _numbers,
        "lambda": _float(),
        "mu": _float(),
        "count": _int(1, 100000),
        "center": _enum("zero", "equilibrium"),
        "spread": _float(0.0),
        "radius": _float(0.0),
        "multiplier_spread": _float(0.0, lo_open=False),
    },
    "integrator": {
        "method": _enum("rk4", "rk45"),
        "step": _float(0.0),
        "rtol": _float(0.0),
        "atol": _float(0.0),
        "horizon": _float(0.0),
        "sample_every": _float(0.0),
    },
    "analysis": {
        "period_eps": _float(0.0),
        "recurrence_eps": _float(0.0),
        "warmup": _float(0.0, lo_open=False),
        "quad_tol": _float(0.0),
        "points": _int(1, 100000),
        "h": _float(0.0),
        "converge_tol": _float(0.0),
        "transient": _float(0.0, 1.0, lo_open=False),
    },
    "discrete": {"alpha": _float(0.0), "steps": _int(1, 10**7)},
    "spurious": {
        "construct": _enum("bump"),
        "p": _float(0.0, 1.0),
        "q": _float(0.0, 1.0),
        "v_sign": _int(-1, 1),
        "margin": _float(0.0),
        "margin_f": _float(0.0),
        "margin_g": _float(0.0),
        "curvature": _float(0.0),
        "v_magnitude": _float(0.0),
    },
}

DEFAULTS = {
    "integrator_rk45": {"rtol": 1e-9, "atol": 1e-12},
    "init": {"mode": "explicit", "lambda": 0.0, "mu": 0.0, "count": 1, "center": "zero",
             "spread": 1.0, "radius": 0.05, "multiplier_spread": 0.0},
    "analysis": {"period_eps": 1e-3, "recurrence_eps": 0.05, "warmup": 1.0, "quad_tol": 1e-10,
                 "points": 100, "h": 1e-4, "converge_tol": 1e-6, "transient": 0.5},
    "discrete": {"alpha": 0.05, "steps": 10000},
    "spurious": {"v_sign": 1, "margin": 0.1, "curvature": 0.5, "v_magnitude": 4.0},
}

KIND_INTEGRATOR = {
    "cycle2x2": ("rk45", 2000.0, 0.05),
    "time_average": ("rk45", 2000.0, 0.05),
    "recurrence_multi": ("rk45", 1000.0, 0.1),
    "spurious": ("rk4", 200.0, 0.1),
}


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    out: str
    game: Optional[BilinearGame]
    f_fields: list
    g_fields: list
    init: dict
    method: object
    horizon: float
    sample_every: float
    analysis: dict
    discrete: dict
    spurious: Optional[dict]
    source: str = ""
    description: str = ""
    extras: dict = field(default_factory=dict)


def _get(sections, sec, key, default=None):
    entry = sections.get(sec, {}).get(key)
    return default if entry is None else entry[0]


def _line(sections, header_lines, sec, key=None):
    if key is not None and key in sections.get(sec, {}):
        return sections[sec][key][1]
    return header_lines.get(sec) or None


def validate_sections(sections, header_lines, source=""):
    """Type-check and cross-check parsed sections; returns an :class:`ExperimentConfig`."""
    diags = []
    values = {}
    for sec, entries in sections.items():
        if sec not in SCHEMA:
            diags.append(Diagnostic(header_lines.get(sec), sec, "unknown section"))
            continue
        values[sec] = {}
        for key, (raw, lineno) in entries.items():
            path = f"{sec}.{key}" if sec else key
            check = SCHEMA[sec].get(key)
            if check is None:
                diags.append(Diagnostic(lineno, path, "unknown key"))
                continue
            val, err = check(raw)
            if err:
                diags.append(Diagnostic(lineno, path, err))
            else:
                values[sec][key] = val

    def val(sec, key, default=None):
        return values.get(sec, {}).get(key, default)

    def line(sec, key=None):
        return _line(sections, header_lines, sec, key)

    kind = val("", "kind")
    if "kind" not in sections[""]:
        diags.append(Diagnostic(None, "kind", f"missing; choose one of {', '.join(KINDS)}"))
    if kind is None:
        raise ConfigError(diags)

    spurious = None
    game = None
    constructed = kind in ("spurious", "spurious_discrete") and "spurious" in sections
    if constructed:
        spurious = dict(DEFAULTS["spurious"])
        spurious.update(values.get("spurious", {}))
        for key in ("construct", "p", "q"):
            if key not in spurious and f"spurious.{key}" not in {d.path for d in diags}:
                diags.append(Diagnostic(line("spurious"), f"spurious.{key}", "missing"))
        if spurious.get("v_sign") == 0:
            diags.append(Diagnostic(line("spurious", "v_sign"), "spurious.v_sign", "must be +1 or -1"))
        for sec in ("game", "fields"):
            if sec in sections:
                diags.append(Diagnostic(line(sec), sec, "not allowed together with a [spurious] construction"))
    else:
        if "spurious" in sections:
            diags.append(Diagnostic(line("spurious"), "spurious", f"only valid for spurious kinds, not {kind}"))
        g = values.get("game", {})
        if "game" not in sections:
            diags.append(Diagnostic(None, "game", "missing section"))
        elif "U" in g and any(k in g for k in ("p", "q", "v")):
            diags.append(Diagnostic(line("game", "U"), "game", "give either U or p, q, v, not both"))
        elif "U" in g:
            try:
                game = BilinearGame(g["U"])
            except GameError as exc:
                diags.append(Diagnostic(line("game", "U"), "game.U", str(exc)))
        elif all(k in g for k in ("p", "q", "v")):
            if g["v"] == 0:
                diags.append(Diagnostic(line("game", "v"), "game.v", "must be nonzero"))
            else:
                game = game_from_equilibrium(g["p"], g["q"], g["v"])
        elif not any(f"game.{k}" in {d.path for d in diags} for k in ("U", "p", "q", "v")):
            diags.append(Diagnostic(line("game"), "game", "needs U, or p, q and v for a 2x2 game"))

    two_by_two = kind in ("cycle2x2", "time_average", "discrete_energy", "spurious", "spurious_discrete")
    if game is not None and two_by_two and game.U.shape != (2, 2):
        diags.append(Diagnostic(line("game", "U"), "game.U",
                                f"kind {kind} needs a 2x2 matrix, got {game.U.shape[0]}x{game.U.shape[1]}"))
        game = None
    if game is not None:
        try:
            solve_interior_equilibrium(game)
        except GameError as exc:
            key = "U" if "U" in values.get("game", {}) else None
            diags.append(Diagnostic(line("game", key), "game.U" if key else "game", str(exc)))
            game = None

    f_fields, g_fields = [], []
    if not constructed:
        fields_section = values.get("fields", {})
        for key, count in (("f", game.N if game is not None else None), ("g", game.M if game is not None else None)):
            if f"fields.{key}" in {d.path for d in diags}:
                continue
            fl = fields_section.get(key, [ScalarField.make_sigmoid()])
            if count is not None and len(fl) == 1:
                fl = fl * count
            if count is not None and len(fl) != count:
                diags.append(Diagnostic(line("fields", key), f"fields.{key}",
                                        f"expected 1 or {count} field specs, got {len(fl)}"))
            (f_fields if key == "f" else g_fields).extend(fl)
        if kind == "discrete_energy" and any(f.family != "sigmoid" for f in f_fields + g_fields):
            diags.append(Diagnostic(line("fields"), "fields", "discrete_energy needs sigmoid activations"))

    init = dict(DEFAULTS["init"])
    init.update(values.get("init", {}))
    mode = init["mode"]
    if kind == "divergence_check":
        init.setdefault("count", 1)
    if mode == "explicit" and kind != "divergence_check" and not constructed:
        for key in ("theta", "phi"):
            if key not in init and f"init.{key}" not in {d.path for d in diags}:
                diags.append(Diagnostic(line("init"), f"init.{key}", "missing (required when init.mode = explicit)"))
    if mode == "disk" and not constructed:
        diags.append(Diagnostic(line("init", "mode"), "init.mode", "disk seeds need a [spurious] construction"))
    if mode == "explicit" and "theta" in init and "phi" in init and game is not None:
        th, ph = np.asarray(init["theta"]), np.asarray(init["phi"])
        if two_by_two:
            th, ph = np.atleast_1d(th), np.atleast_1d(ph)
            if th.ndim != 1 or ph.ndim != 1 or th.shape != ph.shape:
                diags.append(Diagnostic(line("init", "theta"), "init.theta",
                                        "for a 2x2 system give one number per seed for theta and phi (equal counts)"))
        else:
            th2, ph2 = np.atleast_2d(th), np.atleast_2d(ph)
            if th2.shape[-1] != game.N:
                diags.append(Diagnostic(line("init", "theta"), "init.theta", f"expected {game.N} entries per seed"))
            elif ph2.shape[-1] != game.M:
                diags.append(Diagnostic(line("init", "phi"), "init.phi", f"expected {game.M} entries per seed"))
            elif th2.shape[0] != ph2.shape[0]:
                diags.append(Diagnostic(line("init", "phi"), "init.phi", "theta and phi have different seed counts"))
    if mode == "random" and init["center"] == "equilibrium":
        if any(not f.bijective for f in f_fields + g_fields):
            diags.append(Diagnostic(line("init", "center"), "init.center",
                                    "center = equilibrium needs invertible (sigmoid-type) fields"))

    ig = values.get("integrator", {})
    default_method, default_T, default_sample = KIND_INTEGRATOR.get(kind, ("rk45", 100.0, 0.1))
    method_name = ig.get("method", default_method)
    if method_name == "rk4":
        for key in ("rtol", "atol"):
            if key in ig:
                diags.append(Diagnostic(line("integrator", key), f"integrator.{key}", "only used by rk45"))
        method = RK4(ig.get("step", 1e-3))
    else:
        if "step" in ig:
            diags.append(Diagnostic(line("integrator", "step"), "integrator.step", "only used by rk4"))
        method = RK45(ig.get("rtol", 1e-9), ig.get("atol", 1e-12))
    horizon = ig.get("horizon", default_T)
    sample_every = ig.get("sample_every", default_sample)
    if sample_every > horizon:
        diags.append(Diagnostic(line("integrator", "sample_every"), "integrator.sample_every",
                                f"exceeds the horizon {horizon:g}"))

    analysis = dict(DEFAULTS["analysis"])
    analysis.update(values.get("analysis", {}))
    if analysis["warmup"] >= horizon:
        diags.append(Diagnostic(line("analysis", "warmup"), "analysis.warmup", "must be below the horizon"))
    discrete = dict(DEFAULTS["discrete"])
    discrete.update(values.get("discrete", {}))

    if diags:
        raise ConfigError(diags)
    return ExperimentConfig(
        kind=kind,
        seed=val("", "seed", 0),
        out=val("", "out", f"out/{kind}"),
        game=game,
        f_fields=f_fields,
        g_fields=g_fields,
        init=init,
        method=method,
        horizon=horizon,
        sample_every=sample_every,
        analysis=analysis,
        discrete=discrete,
        spurious=spurious,
        source=source,
        description=val("", "description", ""),
    )


def load_config(path):
    """Parse and validate the file at ``path``; raises :class:`ConfigError`."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([Diagnostic(None, str(path), f"cannot read file: {exc.strerror}")]) from exc
    return loads(text, source=str(path))


def loads(text, source="<string>"):
    sections, header_lines, diags = parse_text(text)
    if diags:
        raise ConfigError(diags)
    return validate_sections(sections, header_lines, source)
