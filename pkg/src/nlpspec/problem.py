"""Versioned JSON problem files and the named builtin problems.

A problem file looks like::

    {
      "version": 1,
      "potential": {"polynomial": [{"re": 0, "im": 1}]},
      "rho": {"re": 1, "im": 0},
      "interaction": {"target": "k", "fourier": [{"m": 1, "c": {"re": 0.5, "im": 0}}]},
      "controls": {"grid": 1024, "b": 1.4, "window": 6}
    }

Each function takes exactly one encoding: ``named``, ``polynomial``
(coefficients of powers of x - pi), ``fourier`` (coefficients of psi_m)
or ``samples`` (grid values, N + 1 of them).  ``"builtin": NAME`` at the
top level supplies a whole problem whose fields may then be overridden.
"""

import json
from dataclasses import asdict, fields

import numpy as np

from .charfn import Controls, ProblemSpec
from .errors import ParameterError, SpectralError
from .funcspace import Grid, GridFunction, psi

FORMAT_VERSION = 1


class ProblemFileError(SpectralError, ValueError):
    """Malformed or inconsistent problem file."""


NAMED_FUNCTIONS = {
    "zero": lambda x: np.zeros_like(x, dtype=complex),
    "one": lambda x: np.ones_like(x, dtype=complex),
    "i": lambda x: np.full_like(x, 1j, dtype=complex),
    "ktilde": lambda x: (1 - 1j) / 2 * (x - np.pi),
    "i-sin-squared": lambda x: 1j * np.sin(x) ** 2,
}

BUILTINS = {
    "fig1": {
        "interaction": {"target": "K", "named": "ktilde"},
        "controls": {"b": 1.4, "n": 3, "window": 6},
    },
    "free": {
        "interaction": {"target": "K", "named": "zero"},
        "controls": {"window": 16},
    },
    "constant-0.3": {
        "interaction": {"target": "K", "polynomial": [{"re": 0.3, "im": 0.0}]},
        "controls": {"window": 8},
    },
    "damped": {
        "potential": {"named": "i"},
        "rho": {"re": 1.0, "im": 0.0},
        "interaction": {"target": "k", "named": "zero"},
        "controls": {"window": 24},
    },
}

ENCODINGS = ("named", "polynomial", "fourier", "samples")
INT_CONTROLS = {"grid", "modes", "window", "n_max", "m_cap", "max_depth", "n"}


def parse_complex(obj, where="value"):
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    if isinstance(obj, dict) and set(obj) <= {"re", "im"} and obj:
        try:
            return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0)))
        except (TypeError, ValueError) as exc:
            raise ProblemFileError(f"{where}: re/im must be numbers") from exc
    raise ProblemFileError(f"{where}: complex numbers are written as {{\"re\": .., \"im\": ..}}")


def complex_record(z):
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def parse_function(obj, grid, where):
    if not isinstance(obj, dict):
        raise ProblemFileError(f"{where}: expected an object")
    used = [k for k in ENCODINGS if k in obj]
    if len(used) != 1:
        raise ProblemFileError(f"{where}: exactly one of {ENCODINGS} is required, got {used}")
    enc = used[0]
    body = obj[enc]
    x = grid.x
    if enc == "named":
        if body not in NAMED_FUNCTIONS:
            raise ProblemFileError(f"{where}: unknown named function {body!r}")
        return GridFunction(NAMED_FUNCTIONS[body](x), grid)
    if not isinstance(body, list) or not body:
        raise ProblemFileError(f"{where}: {enc} must be a non-empty list")
    if enc == "polynomial":
        coeffs = [parse_complex(c, f"{where}.polynomial[{j}]") for j, c in enumerate(body)]
        vals = np.zeros_like(x, dtype=complex)
        for c in reversed(coeffs):
            vals = vals * (x - np.pi) + c
        return GridFunction(vals, grid)
    if enc == "fourier":
        vals = np.zeros_like(x, dtype=complex)
        for j, item in enumerate(body):
            if not isinstance(item, dict) or "m" not in item or "c" not in item:
                raise ProblemFileError(f"{where}.fourier[{j}]: needs fields m and c")
            m = item["m"]
            if not isinstance(m, int) or isinstance(m, bool):
                raise ProblemFileError(f"{where}.fourier[{j}].m must be an integer")
            vals += parse_complex(item["c"], f"{where}.fourier[{j}].c") * psi(m, grid).values
        return GridFunction(vals, grid)
    vals = [parse_complex(c, f"{where}.samples[{j}]") for j, c in enumerate(body)]
    if len(vals) != grid.n + 1:
        raise ProblemFileError(f"{where}: expected {grid.n + 1} samples, got {len(vals)}")
    return GridFunction(np.array(vals), grid)


def _merge(base, over):
    out = dict(base)
    for key, val in over.items():
        if key == "controls" and isinstance(val, dict):
            out[key] = {**base.get("controls", {}), **val}
        else:
            out[key] = val
    return out


def parse_controls(obj):
    if obj is None:
        obj = {}
    if not isinstance(obj, dict):
        raise ProblemFileError("controls must be an object")
    known = {f.name: f for f in fields(Controls)}
    unknown = set(obj) - set(known)
    if unknown:
        raise ProblemFileError(f"unknown controls: {sorted(unknown)}")
    kw = {}
    for key, val in obj.items():
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ProblemFileError(f"control {key} must be a number")
        if key in INT_CONTROLS:
            if float(val) != int(val):
                raise ProblemFileError(f"control {key} must be an integer")
            val = int(val)
        kw[key] = val
    try:
        return Controls(**kw)
    except ParameterError as exc:
        raise ProblemFileError(str(exc)) from exc


def problem_from_dict(data):
    """ProblemSpec from the decoded JSON; raises ProblemFileError."""
    if not isinstance(data, dict):
        raise ProblemFileError("problem file must hold a JSON object")
    if "builtin" in data:
        name = data["builtin"]
        if name not in BUILTINS:
            raise ProblemFileError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}")
        data = _merge(BUILTINS[name], {k: v for k, v in data.items() if k != "builtin"})
        data.setdefault("version", FORMAT_VERSION)
    if data.get("version") != FORMAT_VERSION:
        raise ProblemFileError(f"unsupported version {data.get('version')!r}; expected {FORMAT_VERSION}")
    unknown = set(data) - {"version", "potential", "rho", "interaction", "controls"}
    if unknown:
        raise ProblemFileError(f"unknown fields {sorted(unknown)}")
    controls = parse_controls(data.get("controls"))
    grid = Grid(controls.grid)
    inter = data.get("interaction")
    if not isinstance(inter, dict):
        raise ProblemFileError("interaction is required")
    target = inter.get("target", "k")
    if target not in ("k", "K"):
        raise ProblemFileError("interaction.target must be 'k' or 'K'")
    k = parse_function({kk: v for kk, v in inter.items() if kk != "target"}, grid, "interaction")
    if target == "K":
        # P_{1,K}: no potential, rho = 1
        if "potential" in data or "rho" in data:
            raise ProblemFileError("target K describes P_{1,K}; omit potential and rho")
        return ProblemSpec(GridFunction.constant(0.0, grid), 1.0, k, controls)
    V = parse_function(data.get("potential", {"named": "zero"}), grid, "potential")
    rho = parse_complex(data.get("rho", 1.0), "rho")
    return ProblemSpec(V, rho, k, controls)


def load_problem(path=None, builtin=None):
    if builtin is not None:
        return problem_from_dict({"builtin": builtin})
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path}: invalid JSON ({exc})") from exc
    return problem_from_dict(data)


def problem_to_dict(spec, target="k"):
    """Serialize with sampled functions (exact round trip on the same grid)."""
    samples = lambda f: [complex_record(v) for v in f.values]
    c = {k: v for k, v in asdict(spec.controls).items() if v is not None}
    if target == "K":
        return {
            "version": FORMAT_VERSION,
            "interaction": {"target": "K", "samples": samples(spec.k)},
            "controls": c,
        }
    return {
        "version": FORMAT_VERSION,
        "potential": {"samples": samples(spec.V)},
        "rho": complex_record(spec.rho),
        "interaction": {"target": "k", "samples": samples(spec.k)},
        "controls": c,
    }
