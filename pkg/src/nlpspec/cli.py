"""Command-line front end.

    nlpspec spectrum   --input FILE | --builtin NAME  [--b B] [--window W]
    nlpspec figure     ... --out DIR
    nlpspec dissipative {check, construct, evolve} ... [--lambda L] [--times T]
    nlpspec resolvent  ... --lambda L [--lambda-im M]
    nlpspec closeness  ... [--window W]

Exit codes: 0 success, 2 bad input, 3 numerical failure (assembly,
contour, refinement), 4 hypothesis violation.
"""

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .charfn import char_residual
from .dissipative import check_dissipative, constructed_spec, real_eigen_census
from .eigensystem import apply_operator, apply_resolvent, eigenpairs, hs_norm, quadratic_closeness
from .errors import HypothesisViolationError, SpectralError
from .funcspace import GridFunction, l2_norm
from .localization import spectrum_of
from .problem import ProblemFileError, load_problem, problem_to_dict
from .semigroup import norm_decay

EXIT_OK, EXIT_INPUT, EXIT_NUMERICS, EXIT_HYPOTHESIS = 0, 2, 3, 4
DEFAULT_TIMES = "0:10:21"


def _num(x):
    x = float(x)
    if x == 0:
        return 0.0
    return float(f"{x:.12g}")


def _cx(z):
    z = complex(z)
    return {"re": _num(z.real), "im": _num(z.imag)}


def _clean(obj):
    """Round every float to 12 significant digits, recursively."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _cx(obj)
    return obj


def _fmt(x):
    return f"{_num(x):.12g}"


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _header(command, spec):
    return {
        "tool": "nlpspec",
        "version": __version__,
        "command": command,
        "controls": asdict(spec.controls),
    }


def _emit(args, report, tables):
    """Write the JSON report (text) or the CSV tables (table)."""
    if args.format == "text":
        text = json.dumps(_clean(report), indent=2) + "\n"
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            with open(os.path.join(args.out, "report.json"), "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for name, content in tables.items():
            with open(os.path.join(args.out, name), "w", encoding="utf-8") as fh:
                fh.write(content)
    else:
        for name, content in tables.items():
            sys.stdout.write(f"# {name}\n{content}")


def _load(args):
    if (args.input is None) == (args.builtin is None):
        raise ProblemFileError("give exactly one of --input or --builtin")
    spec = load_problem(args.input, args.builtin)
    over = {}
    if getattr(args, "b", None) is not None:
        over["b"] = args.b
    if getattr(args, "window", None) is not None:
        over["window"] = args.window
    if over:
        spec = type(spec)(spec.V, spec.rho, spec.k, spec.controls.replace(**over))
    return spec


def _zero_row(z):
    return {"value": z.value, "multiplicity": z.multiplicity, "residual": z.residual}


def _spectrum_report(spec, S, red):
    rect = [_zero_row(z) for z in S.eigenvalues if z.provenance == "rectangle-subdivision"]
    disk = [
        {"n": z.enclosure[1], "radius": z.enclosure[2], **_zero_row(z)}
        for z in S.eigenvalues
        if z.provenance == "disk-certified"
    ]
    return {
        "eta": red.eta,
        "rho": spec.rho,
        "tail_threshold": S.tail_threshold,
        "b_requested": S.b_requested,
        "b_certified": S.b_certified,
        "rectangle": S.rectangle.as_dict(),
        "window": S.window,
        "certified_up_to": S.certified_up_to,
        "rectangle_eigenvalues": rect,
        "disk_eigenvalues": disk,
    }


def _eigen_table(S):
    rows = []
    for z in S.eigenvalues:
        if z.provenance == "disk-certified":
            n, r = z.enclosure[1], z.enclosure[2]
            rows.append(["disk", n, z.value.real, z.value.imag, z.multiplicity, z.residual, r])
        else:
            rows.append(["rectangle", "", z.value.real, z.value.imag, z.multiplicity, z.residual, ""])
    return _csv(["source", "n", "re", "im", "multiplicity", "residual", "radius"], rows)


def cmd_spectrum(args):
    spec = _load(args)
    S, red = spectrum_of(spec)
    report = {**_header("spectrum", spec), **_spectrum_report(spec, S, red)}
    _emit(args, report, {"eigenvalues.csv": _eigen_table(S)})
    return EXIT_OK


def cmd_figure(args):
    spec = _load(args)
    S, red = spectrum_of(spec)
    eig = _csv(
        ["re", "im", "multiplicity"],
        [[z.value.real, z.value.imag, z.multiplicity] for z in S.eigenvalues],
    )
    shift = S.eta_shift or 0
    circles = _csv(
        ["n", "center_re", "center_im", "radius"],
        [[n, (n + shift).real, (n + shift).imag, r]
         for n, r in sorted(S.disks.items()) if r > 0],
    )
    rect_rows = []
    for kind, b in (("requested", S.b_requested), ("certified", S.b_certified)):
        N = S.tail_threshold
        for j, c in enumerate([complex(-N - 0.5, -b), complex(N + 0.5, -b),
                               complex(N + 0.5, b), complex(-N - 0.5, b)]):
            c = c + shift
            rect_rows.append([kind, j, c.real, c.imag])
    rect = _csv(["kind", "corner", "re", "im"], rect_rows)
    args.format = "table"
    if not args.out:
        args.out = "."
    _emit(args, None, {"eigenvalues.csv": eig, "circles.csv": circles, "rectangle.csv": rect})
    return EXIT_OK


def _times(text):
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return np.linspace(float(a), float(b), int(n))
        return np.array([float(t) for t in text.split(",")])
    except ValueError as exc:
        raise ProblemFileError(f"bad --times {text!r}; use a,b,c or start:stop:count") from exc


def cmd_dissipative(args):
    spec = _load(args)
    if args.action == "check":
        rep = check_dissipative(spec, spec.controls.tol_range)
        report = {**_header("dissipative check", spec), **asdict(rep)}
        _emit(args, report, {"dissipative.csv": _csv(
            ["admissible", "margin", "range_ok"], [[rep.admissible, rep.margin, rep.range_ok]])})
        return EXIT_OK
    if args.action == "construct":
        if args.lam is None:
            raise ProblemFileError("construct needs --lambda")
        new = constructed_spec(spec.V, args.lam, spec.controls)
        text = json.dumps(_clean(problem_to_dict(new)), separators=(",", ":")) + "\n"
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            with open(os.path.join(args.out, "constructed.json"), "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    # evolve
    check = check_dissipative(spec, spec.controls.tol_range)
    S, _ = spectrum_of(spec)
    pairs = eigenpairs(spec, S)
    times = _times(args.times or DEFAULT_TIMES)
    tr = norm_decay(spec, S, pairs, times)
    census = real_eigen_census(S)
    report = {
        **_header("dissipative evolve", spec),
        "admissible": check.admissible,
        "regime": tr.regime,
        "real_eigenvalues": list(census.witnesses),
        "zeta": tr.zeta,
        "fitted_rate": tr.fitted_rate,
        "times": list(tr.times),
        "norms": list(tr.norms),
        "raw_norms": None if tr.raw_norms is None else list(tr.raw_norms),
    }
    raw = tr.raw_norms if tr.raw_norms is not None else tr.norms
    table = _csv(["t", "norm", "raw_norm"], [[t, n, r] for t, n, r in zip(tr.times, tr.norms, raw)])
    _emit(args, report, {"trace.csv": table})
    return EXIT_OK


def cmd_resolvent(args):
    spec = _load(args)
    if args.lam is None:
        raise ProblemFileError("resolvent needs --lambda")
    lam = complex(args.lam, args.lam_im)
    g = GridFunction.from_callable(lambda x: np.exp(1j * x) + x / 10, spec.grid)
    f = apply_resolvent(spec, lam, g)
    resid = l2_norm(apply_operator(spec, f) - lam * f - g) / l2_norm(g)
    report = {
        **_header("resolvent", spec),
        "lambda": lam,
        "char_residual": char_residual(spec, lam),
        "hs_norm": hs_norm(spec, lam),
        "probe_residual": resid,
        "boundary_defect": abs(f.start - spec.rho * f.end),
    }
    _emit(args, report, {"resolvent.csv": _csv(
        ["re", "im", "hs_norm", "probe_residual"], [[lam.real, lam.imag, report["hs_norm"], resid]])})
    return EXIT_OK


def cmd_closeness(args):
    spec = _load(args)
    S, red = spectrum_of(spec)
    sums = quadratic_closeness(red, S, S.window)
    report = {**_header("closeness", spec), "partial_sums": list(sums)}
    _emit(args, report, {"closeness.csv": _csv(["J", "S_J"], [[j, s] for j, s in enumerate(sums)])})
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="nlpspec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"nlpspec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--input", help="problem file (JSON)")
        sp.add_argument("--builtin", help="builtin problem: fig1, free, constant-0.3, damped")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--format", choices=("text", "table"), default="text")
        sp.add_argument("--b", type=float, help="rectangle half-height")
        sp.add_argument("--window", type=int, help="largest |n| refined outside the rectangle")

    common(sub.add_parser("spectrum", help="eigenvalues with enclosures"))
    common(sub.add_parser("figure", help="plot data: eigenvalues, circles, rectangle"))
    d = sub.add_parser("dissipative", help="dissipativity, construction, evolution")
    d.add_argument("action", choices=("check", "construct", "evolve"))
    common(d)
    d.add_argument("--lambda", dest="lam", type=float)
    d.add_argument("--times", help="comma list or start:stop:count")
    r = sub.add_parser("resolvent", help="resolvent probe and Hilbert-Schmidt norm")
    common(r)
    r.add_argument("--lambda", dest="lam", type=float)
    r.add_argument("--lambda-im", dest="lam_im", type=float, default=0.0)
    common(sub.add_parser("closeness", help="quadratic closeness partial sums"))
    return p


COMMANDS = {
    "spectrum": cmd_spectrum,
    "figure": cmd_figure,
    "dissipative": cmd_dissipative,
    "resolvent": cmd_resolvent,
    "closeness": cmd_closeness,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ProblemFileError as exc:
        print(f"nlpspec: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except HypothesisViolationError as exc:
        print(f"nlpspec: hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except SpectralError as exc:
        print(f"nlpspec: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":
    sys.exit(main())
