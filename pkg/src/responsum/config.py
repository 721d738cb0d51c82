"""JSON run configuration and canonical JSON output.

A configuration looks like::

    {
      "system": {
        "m": 1, "d": 1, "omega": [1.0], "damping": [[1.0]],
        "kind": "gradient-autonomous",
        "potential": "0.5 x1^2 + 0.25 x1^4",
        "forcing": [{"nu": [1], "re": [1.0], "im": [0.0]}]
      },
      "solve": {"epsilon": 0.01, "K_max": 8},
      "output_dir": "out"
    }

Polynomials are either the short string notation (real coefficients) or a
term list ``[{"exp": [2], "coeff": 0.5}, ...]`` where a complex coefficient is
written ``[re, im]``. For the forced kind ``potential`` is a list of
``{"nu": [...], "poly": <polynomial>}``. Only one of each pair ``+-nu`` needs
to be given; the partner is derived by conjugation.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .model import AUTONOMOUS, KINDS, Polynomial, SystemSpec, TrigPolynomialFamily, TrigVectorField

SECTIONS = ("system", "solve", "verify", "oracle", "sweep", "bounds", "output_dir")


def _field(obj, key, where, kind=None, default=...):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    if key not in obj:
        if default is ...:
            raise ParseError(f"{where}.{key}: missing")
        return default
    val = obj[key]
    if kind is not None and val is not None and not isinstance(val, kind):
        raise ParseError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}")
    return val


def _numbers(val, where, shape=None) -> np.ndarray:
    try:
        arr = np.array(val, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: expected numbers") from None
    if shape is not None and arr.shape != shape:
        raise ParseError(f"{where}: expected shape {shape}, got {arr.shape}")
    return arr


def _int(val, where) -> int:
    if isinstance(val, bool) or not isinstance(val, int):
        raise ParseError(f"{where}: expected an integer")
    return val


def _poly(obj, m, where) -> Polynomial:
    try:
        if isinstance(obj, (str, list, dict)):
            return Polynomial.from_json(obj, m)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{where}: malformed term list ({exc})") from None
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from None
    raise ParseError(f"{where}: expected a polynomial string or term list")


def _hermitian_table(entries, where, same, conj):
    """Keep the first of each inconsistent ``+-nu`` pair, warning about the other."""
    table: dict = {}
    for nu, val in entries:
        partner = tuple(-n for n in nu)
        if nu in table:
            raise ValidationError(f"{where}: duplicate mode {list(nu)}")
        if partner in table and partner != nu:
            if not same(table[partner], conj(val)):
                warnings.warn(f"{where}: modes {list(partner)} and {list(nu)} are not conjugate; "
                              f"keeping {list(partner)} and deriving its partner", stacklevel=3)
            continue
        if partner == nu and not same(val, conj(val)):
            raise ValidationError(f"{where}: zero-mode coefficient must be real")
        table[nu] = val
    return table


def _forcing(obj, m, d, where) -> TrigVectorField:
    if obj is None:
        return TrigVectorField.zero(m, d)
    if not isinstance(obj, list):
        raise ParseError(f"{where}: expected a list of modes")
    entries = []
    for i, item in enumerate(obj):
        w = f"{where}[{i}]"
        nu = tuple(int(n) for n in _numbers(_field(item, "nu", w), f"{w}.nu", (d,)))
        re = _numbers(_field(item, "re", w), f"{w}.re", (m,))
        im = _numbers(_field(item, "im", w, default=[0.0] * m), f"{w}.im", (m,))
        entries.append((nu, re + 1j * im))
    table = _hermitian_table(entries, where, lambda a, b: np.allclose(a, b, rtol=1e-13, atol=0), np.conj)
    return TrigVectorField(m, d, table, complete=True)


def _family(obj, m, d, where) -> TrigPolynomialFamily:
    if not isinstance(obj, list):
        raise ParseError(f"{where}: expected a list of {{nu, poly}} entries for the forced kind")
    entries = []
    for i, item in enumerate(obj):
        w = f"{where}[{i}]"
        nu = tuple(int(n) for n in _numbers(_field(item, "nu", w), f"{w}.nu", (d,)))
        entries.append((nu, _poly(_field(item, "poly", w), m, f"{w}.poly")))
    table = _hermitian_table(entries, where, lambda a, b: a.close_to(b), lambda p: p.conj())
    return TrigPolynomialFamily(m, d, table, complete=True)


def build_system(sysobj, where="system") -> SystemSpec:
    m = _int(_field(sysobj, "m", where), f"{where}.m")
    d = _int(_field(sysobj, "d", where), f"{where}.d")
    if m < 1 or d < 1:
        raise ValidationError(f"{where}: m and d must be at least 1")
    kind = _field(sysobj, "kind", where, str, AUTONOMOUS)
    if kind not in KINDS:
        raise ValidationError(f"{where}.kind must be one of {KINDS}")
    omega = _numbers(_field(sysobj, "omega", where), f"{where}.omega", (d,))
    damping = _numbers(_field(sysobj, "damping", where), f"{where}.damping", (m, m))
    mass = sysobj.get("mass")
    mass = None if mass is None else _numbers(mass, f"{where}.mass", (m, m))
    if kind == AUTONOMOUS:
        potential = _poly(_field(sysobj, "potential", where), m, f"{where}.potential")
        forcing = _forcing(sysobj.get("forcing"), m, d, f"{where}.forcing")
    else:
        potential = _family(_field(sysobj, "potential", where), m, d, f"{where}.potential")
        if sysobj.get("forcing"):
            raise ValidationError(f"{where}.forcing: the forced kind takes its forcing from the potential")
        forcing = None
    return SystemSpec(m=m, d=d, omega=omega, damping=damping, potential=potential, kind=kind,
                      forcing=forcing, mass=mass, name=str(sysobj.get("name", "")))


def _poly_json(p: Polynomial):
    return p.to_terms()


def _half(modes: dict) -> list:
    """One representative per ``+-nu`` pair (the lexicographically larger)."""
    return [(nu, v) for nu, v in sorted(modes.items()) if nu >= tuple(-n for n in nu)]


def system_to_dict(spec: SystemSpec, center=None, center_guess=None) -> dict:
    out = {
        "m": spec.m, "d": spec.d, "kind": spec.kind,
        "omega": spec.omega.tolist(), "damping": spec.damping.tolist(), "mass": spec.mass.tolist(),
    }
    if spec.name:
        out["name"] = spec.name
    if spec.is_forced:
        out["potential"] = [{"nu": list(nu), "poly": _poly_json(p)} for nu, p in _half(spec.potential.modes)]
    else:
        out["potential"] = _poly_json(spec.potential)
        out["forcing"] = [{"nu": list(nu), "re": v.real.tolist(), "im": v.imag.tolist()}
                          for nu, v in _half(spec.forcing.modes)]
    if center is not None:
        out["center"] = list(map(float, center))
    if center_guess is not None:
        out["center_guess"] = list(map(float, center_guess))
    return out


@dataclass
class RunConfig:
    system: SystemSpec
    solve: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    oracle: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    output_dir: str = "out"
    center: list | None = None
    center_guess: list | None = None

    def to_dict(self) -> dict:
        return {
            "system": system_to_dict(self.system, self.center, self.center_guess),
            "solve": dict(self.solve), "verify": dict(self.verify), "oracle": dict(self.oracle),
            "sweep": dict(self.sweep), "bounds": dict(self.bounds), "output_dir": self.output_dir,
        }


SOLVE_DEFAULTS = {"epsilon": 0.01, "K_max": 8, "N_trunc": None, "tol_newton": 1e-10,
                  "tol_picard": 1e-14, "method": "series", "zeta_guess": None}
VERIFY_DEFAULTS = {"t_end": None, "step_tol": 1e-6, "transient_fraction": 0.75,
                   "start": "center"}
ORACLE_DEFAULTS = {"k": 1, "nu": None, "zeta": None}
SWEEP_DEFAULTS = {"epsilon_list": [0.1, 0.01, 0.001, 0.0001]}
BOUNDS_DEFAULTS = {"N": 2, "xi": None, "rho": 1.0}


def _section(obj, name, defaults):
    sec = obj.get(name, {}) or {}
    if not isinstance(sec, dict):
        raise ParseError(f"{name}: expected an object")
    unknown = set(sec) - set(defaults)
    if unknown:
        raise ParseError(f"{name}: unknown field(s) {sorted(unknown)}")
    out = dict(defaults)
    out.update(sec)
    return out


def _positive(val, where):
    if val is None:
        return
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val) or val <= 0:
        raise ValidationError(f"{where} must be a positive number")


def validate(cfg: RunConfig) -> RunConfig:
    s, v, o, b = cfg.solve, cfg.verify, cfg.oracle, cfg.bounds
    _positive(s["epsilon"], "solve.epsilon")
    _positive(s["tol_newton"], "solve.tol_newton")
    _positive(s["tol_picard"], "solve.tol_picard")
    if isinstance(s["K_max"], bool) or not isinstance(s["K_max"], int) or s["K_max"] < 1:
        raise ValidationError("solve.K_max must be an integer >= 1")
    if s["N_trunc"] is not None and (not isinstance(s["N_trunc"], int) or s["N_trunc"] < 1):
        raise ValidationError("solve.N_trunc must be a positive integer")
    if s["method"] not in ("series", "picard"):
        raise ValidationError("solve.method must be 'series' or 'picard'")
    _positive(v["step_tol"], "verify.step_tol")
    _positive(v["t_end"], "verify.t_end")
    if not 0 <= v["transient_fraction"] < 1:
        raise ValidationError("verify.transient_fraction must lie in [0, 1)")
    if v["start"] not in ("center", "solution"):
        raise ValidationError("verify.start must be 'center' or 'solution'")
    if not isinstance(o["k"], int) or o["k"] < 1:
        raise ValidationError("oracle.k must be an integer >= 1")
    for eps in cfg.sweep["epsilon_list"]:
        _positive(eps, "sweep.epsilon_list entries")
    if not isinstance(b["N"], int) or b["N"] < 1:
        raise ValidationError("bounds.N must be an integer >= 1")
    _positive(b["rho"], "bounds.rho")
    _positive(b["xi"], "bounds.xi")
    m = cfg.system.m
    for key in ("zeta_guess",):
        if s[key] is not None:
            _numbers(s[key], f"solve.{key}", (m,))
    if o["nu"] is not None:
        _numbers(o["nu"], "oracle.nu", (cfg.system.d,))
    return cfg


def parse_dict(obj) -> RunConfig:
    if not isinstance(obj, dict):
        raise ParseError("configuration must be a JSON object")
    unknown = set(obj) - set(SECTIONS)
    if unknown:
        raise ParseError(f"unknown top-level field(s) {sorted(unknown)}")
    sysobj = _field(obj, "system", "config", dict)
    spec = build_system(sysobj)
    center = sysobj.get("center")
    guess = sysobj.get("center_guess")
    if center is not None:
        center = _numbers(center, "system.center", (spec.m,)).tolist()
    if guess is not None:
        guess = _numbers(guess, "system.center_guess", (spec.m,)).tolist()
    cfg = RunConfig(
        system=spec,
        solve=_section(obj, "solve", SOLVE_DEFAULTS),
        verify=_section(obj, "verify", VERIFY_DEFAULTS),
        oracle=_section(obj, "oracle", ORACLE_DEFAULTS),
        sweep=_section(obj, "sweep", SWEEP_DEFAULTS),
        bounds=_section(obj, "bounds", BOUNDS_DEFAULTS),
        output_dir=str(obj.get("output_dir", "out")),
        center=center, center_guess=guess,
    )
    return validate(cfg)


def parse_config(path) -> RunConfig:
    """Read and validate a configuration file.

    Raises
    ------
    ParseError
        for unreadable files, invalid JSON (with line and column) or
        malformed fields.
    ValidationError
        naming the violated invariant.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_dict(obj)


# ---------------------------------------------------------------------------
# canonical output


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    if x == 0:
        return "0"
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with sorted keys and floats at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    return json.dumps(str(obj))
