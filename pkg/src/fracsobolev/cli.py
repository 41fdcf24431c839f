"""Command-line front end: compute operators, norms, run verification.

Four commands::

    frac compute deriv  --alpha 0.5 --side left --scheme rl \\
         --fn "const:1" --grid 0,1,1024 --out d.csv
    frac compute integral --alpha 0.5 --fn "const:1" --grid 0,1,1024 --out i.csv
    frac norm --space gagliardo --alpha 0.5 --p 2 --fn "gauss:mu=0;s=1" --line 16,4096
    frac verify ftwfc --alpha 0.5 --fn "kappa:alpha=0.5;side=left" \\
         --grid 0,1,2048 --json report.json
    frac suite all --json reports.json

Exit codes: 0 success, 1 a verification failed, 2 usage error, 3 I/O error.

Functions are given in the spec grammar of the oracle module, or as a
path to a ``x,value`` CSV previously written by ``compute``.  Output
files are written atomically (temp file, then rename).  ``--config``
names a JSON file whose keys mirror the long flags; explicit flags win.
The environment variable ``FRAC_DEFAULT_N`` overrides the default grid
size used when ``--grid``/``--line`` is omitted.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .core import Grid, LineFunction, SampledFunction, Side, uniform_grid
from .operators import frac_derivative, frac_integral, rl_derivative
from .oracle import ClosedFormFunction, parse_function_spec, sample, sample_line
from .spaces import NormSpec, FracOrder, sobolev_norm
from .verify import (
    VerificationReport,
    canonical_checks,
    check_consistency_w1p,
    check_density,
    check_ftwfc,
    check_inclusivity,
    check_weak_pairing,
)

_SCHEMES = ("rl", "product_rl", "gl", "grunwald", "caputo", "marchaud", "spectral")
_SCHEME_ALIASES = {"rl": "product_rl", "gl": "grunwald"}
_SPACES = (
    "one_sided_left",
    "one_sided_right",
    "symmetric",
    "zero_trace_left",
    "zero_trace_right",
    "gagliardo",
    "fourier",
)


class _UsageError(ValueError):
    """Invalid flags or parameters — maps to exit status 2."""


# ---------------------------------------------------------------------------
# serialization helpers


def _json_ready(obj):
    """Recursively replace non-finite floats with strings.

    Strict JSON has no Infinity/NaN tokens; an honest failing report can
    contain them, so they travel as ``"inf"``/``"-inf"``/``"nan"``.
    """
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    return obj


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".frac-", suffix=".tmp")
    except OSError as exc:
        raise OSError(f"cannot write {path!r}: {exc.strerror or exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: str, payload) -> None:
    _atomic_write(path, json.dumps(_json_ready(payload), sort_keys=True, indent=2) + "\n")


def _format_value(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _csv_text(u: SampledFunction) -> str:
    lines = ["x,value"]
    vals = np.asarray(u.values, dtype=float)
    flagged = np.nonzero(~np.isfinite(vals))[0]
    if flagged.size:
        lines.append("# flagged: " + ",".join(str(i) for i in flagged))
    if u.left_power is not None:
        c, e = u.left_power
        lines.append(f"# left_power: {_format_value(c)},{_format_value(e)}")
    if u.right_power is not None:
        c, e = u.right_power
        lines.append(f"# right_power: {_format_value(c)},{_format_value(e)}")
    for x, v in zip(u.grid.nodes, vals):
        lines.append(f"{_format_value(float(x))},{_format_value(float(v))}")
    return "\n".join(lines) + "\n"


def _write_csv(path: str, u: SampledFunction) -> None:
    _atomic_write(path, _csv_text(u))


def _read_csv(path: str) -> SampledFunction:
    left_power = right_power = None
    xs: list[float] = []
    vs: list[float] = []
    with open(path, "r", encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line == "x,value":
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                for tag in ("left_power", "right_power"):
                    if body.startswith(tag + ":"):
                        c, _, e = body[len(tag) + 1 :].partition(",")
                        pair = (float(c), float(e))
                        if tag == "left_power":
                            left_power = pair
                        else:
                            right_power = pair
                continue
            x, _, v = line.partition(",")
            xs.append(float(x))
            vs.append(float(v))
    if len(xs) < 2:
        raise ValueError(f"CSV {path!r} holds fewer than two samples")
    x_arr = np.asarray(xs)
    steps = np.diff(x_arr)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise ValueError(f"CSV {path!r} is not uniformly spaced")
    grid = Grid(float(x_arr[0]), float(x_arr[-1]), len(xs) - 1)
    return SampledFunction(grid, np.asarray(vs), left_power, right_power)


# ---------------------------------------------------------------------------
# configuration plumbing


def _default_n() -> int:
    raw = os.environ.get("FRAC_DEFAULT_N")
    if raw is None:
        return 2048
    try:
        n = int(raw)
    except ValueError:
        raise _UsageError(f"FRAC_DEFAULT_N must be an integer, got {raw!r}") from None
    if n < 2:
        raise _UsageError(f"FRAC_DEFAULT_N must be at least 2, got {n}")
    return n


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    try:
        with open(args.config, "r", encoding="utf-8") as handle:
            table = json.load(handle)
    except OSError as exc:
        raise OSError(f"cannot read config {args.config!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _UsageError(f"config {args.config!r} is not valid JSON: {exc}") from exc
    if not isinstance(table, dict):
        raise _UsageError(f"config {args.config!r} must hold a JSON object")
    for key, value in table.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise _UsageError(f"config key {key!r} does not match any flag")
        if getattr(args, attr) is None:
            setattr(args, attr, value)
    return args


def _parse_grid(text: str) -> Grid:
    parts = text.split(",")
    if len(parts) != 3:
        raise _UsageError(f"--grid wants a,b,n — got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise _UsageError(f"--grid wants numeric a,b,n — got {text!r}") from None
    try:
        return uniform_grid(a, b, n)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _parse_line(text: str) -> tuple[float, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise _UsageError(f"--line wants L,n — got {text!r}")
    try:
        half_width, n = float(parts[0]), int(parts[1])
    except ValueError:
        raise _UsageError(f"--line wants numeric L,n — got {text!r}") from None
    if half_width <= 0 or n < 2:
        raise _UsageError(f"--line wants L > 0 and n >= 2 — got {text!r}")
    return half_width, n


def _resolve_function(
    spec: str, grid: Grid | None, side: Side
) -> ClosedFormFunction | SampledFunction:
    if spec.endswith(".csv"):
        return _read_csv(spec)
    try:
        return parse_function_spec(spec, grid, side)
    except ValueError as exc:
        raise _UsageError(f"bad function spec {spec!r}: {exc}") from exc


def _domain(args: argparse.Namespace) -> tuple[Grid | None, tuple[float, int] | None]:
    grid = _parse_grid(args.grid) if args.grid else None
    line = _parse_line(args.line) if args.line else None
    if grid is not None and line is not None:
        raise _UsageError("give either --grid or --line, not both")
    return grid, line


def _sample_on(
    f: ClosedFormFunction | SampledFunction,
    grid: Grid | None,
    line: tuple[float, int] | None,
) -> SampledFunction | LineFunction:
    if isinstance(f, SampledFunction):
        if grid is not None or line is not None:
            raise _UsageError("CSV input carries its own grid; drop --grid/--line")
        return f
    if line is not None:
        return sample_line(f, line[0], line[1])
    if grid is None:
        grid = uniform_grid(0.0, 1.0, _default_n())
    return sample(f, grid)


# ---------------------------------------------------------------------------
# commands


def _cmd_compute(args: argparse.Namespace) -> int:
    if args.alpha is None:
        raise _UsageError("compute needs --alpha")
    side = Side.parse(args.side or "left")
    grid, line = _domain(args)
    f = _resolve_function(args.fn, grid, side)
    u = _sample_on(f, grid, line)

    if args.what == "deriv":
        scheme = args.scheme or ("spectral" if isinstance(u, LineFunction) else "rl")
        if scheme not in _SCHEMES:
            raise _UsageError(f"unknown scheme {scheme!r}; pick one of {_SCHEMES}")
        scheme = _SCHEME_ALIASES.get(scheme, scheme)
        out = frac_derivative(u, args.alpha, side, scheme=scheme)
        if isinstance(out, LineFunction):
            out = out.as_sampled()
    else:
        if args.scheme:
            raise _UsageError("--scheme applies to deriv only")
        if isinstance(u, LineFunction):
            raise _UsageError("integral is defined on interval grids; use --grid")
        out = frac_integral(u, args.alpha, side)

    if args.out:
        _write_csv(args.out, out)
    else:
        sys.stdout.write(_csv_text(out))
    return 0


def _cmd_norm(args: argparse.Namespace) -> int:
    if args.space is None:
        raise _UsageError("norm needs --space")
    if args.space not in _SPACES:
        raise _UsageError(f"unknown space {args.space!r}; pick one of {_SPACES}")
    if args.alpha is None:
        raise _UsageError("norm needs --alpha")
    side = Side.parse(args.side or "left")
    grid, line = _domain(args)
    f = _resolve_function(args.fn, grid, side)
    u = _sample_on(f, grid, line)
    try:
        spec = NormSpec(args.space, FracOrder(args.alpha), args.p if args.p else 2.0)
        value = sobolev_norm(u, spec)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    sys.stdout.write(_format_value(value) + "\n")
    if args.json:
        _write_json(
            args.json,
            {
                "space": args.space,
                "alpha": args.alpha,
                "p": spec.p,
                "fn": args.fn,
                "value": value,
                "version": __version__,
            },
        )
    return 0


def _single_function_check(
    name: str, args: argparse.Namespace
) -> VerificationReport:
    """Adapter for the checks that accept one user-supplied function."""
    side = Side.parse(args.side or "left")
    grid, line = _domain(args)
    if line is not None:
        raise _UsageError(f"verify {name} works on interval grids; use --grid")
    if grid is None:
        grid = uniform_grid(0.0, 1.0, _default_n())
    if args.alpha is None:
        raise _UsageError(f"verify {name} needs --alpha")
    f = _resolve_function(args.fn, grid, side)

    if name == "ftwfc":
        u = f if isinstance(f, SampledFunction) else sample(f, grid)
        return check_ftwfc(u, args.alpha, side, tolerance=args.tolerance or 1e-2)
    if name == "weak_pairing":
        u = f if isinstance(f, SampledFunction) else sample(f, grid)
        v = rl_derivative(u, args.alpha, side)
        return check_weak_pairing(u, v, args.alpha, side, tolerance=args.tolerance or 1e-3)
    if name == "w1p_consistency":
        if isinstance(f, SampledFunction):
            raise _UsageError("w1p_consistency needs a closed-form --fn")
        return check_consistency_w1p(
            f, args.alpha, args.p or 2.0, grid, tolerance=args.tolerance or 1e-3
        )
    if name == "inclusivity":
        if args.beta is None:
            raise _UsageError("verify inclusivity needs --beta")
        u = f if isinstance(f, SampledFunction) else sample(f, grid)
        return check_inclusivity(
            u, args.alpha, args.beta, args.p or 2.0, tolerance=args.tolerance or 1e-2
        )
    if name == "density":
        u = f if isinstance(f, SampledFunction) else sample(f, grid)
        return check_density(u, args.alpha, args.p or 2.0, args.mode or "smooth")
    raise _UsageError(f"verify {name!r} does not take --fn; run it without flags")


def _cmd_verify(args: argparse.Namespace) -> int:
    checks = canonical_checks()
    overridable = ("ftwfc", "weak_pairing", "w1p_consistency", "inclusivity", "density")
    name = args.check
    if name not in checks and name not in overridable:
        known = ", ".join(sorted(set(checks) | set(overridable)))
        raise _UsageError(f"unknown check {name!r}; known checks: {known}")
    if args.fn:
        report = _single_function_check(name, args)
    else:
        if name not in checks:
            raise _UsageError(f"verify {name} needs --fn")
        report = checks[name]()

    status = "PASS" if report.passed else "FAIL"
    worst = max(report.residuals)
    sys.stdout.write(
        f"{status} {report.theorem_id} (worst residual {_format_value(worst)}, "
        f"tolerance {_format_value(report.tolerance)})\n"
    )
    if args.json:
        _write_json(args.json, report.to_dict())
    return 0 if report.passed else 1


def _cmd_suite(args: argparse.Namespace) -> int:
    if args.target != "all":
        raise _UsageError(f"the only suite is 'all', got {args.target!r}")
    reports = []
    failures = 0
    for name, runner in canonical_checks().items():
        report = runner()
        reports.append(report.to_dict())
        status = "PASS" if report.passed else "FAIL"
        if not report.passed:
            failures += 1
        worst = max(report.residuals)
        sys.stdout.write(
            f"{status} {name}: {report.theorem_id} "
            f"(worst residual {_format_value(worst)}, "
            f"tolerance {_format_value(report.tolerance)})\n"
        )
    sys.stdout.write(
        f"{len(reports) - failures} passed, {failures} failed, {len(reports)} total\n"
    )
    if args.json:
        _write_json(args.json, reports)
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# argument surface


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frac",
        description="fractional derivatives, norms, and theorem verification",
    )
    parser.add_argument("--version", action="version", version=f"frac {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--fn", help="function spec or CSV path")
        p.add_argument("--alpha", type=float, help="fractional order")
        p.add_argument("--side", choices=("left", "right"), help="base side")
        p.add_argument("--grid", help="interval grid as a,b,n")
        p.add_argument("--line", help="symmetric line window as L,n")
        p.add_argument("--p", type=float, help="integrability exponent")
        p.add_argument("--config", help="JSON file with flag defaults")

    p_compute = sub.add_parser("compute", help="evaluate an operator to CSV")
    p_compute.add_argument("what", choices=("deriv", "integral"))
    common(p_compute)
    p_compute.add_argument(
        "--scheme",
        help="derivative realization: rl|gl|caputo|marchaud|spectral",
    )
    p_compute.add_argument("--out", help="output CSV path (default: stdout)")
    p_compute.set_defaults(handler=_cmd_compute)

    p_norm = sub.add_parser("norm", help="evaluate a Sobolev-type norm")
    common(p_norm)
    p_norm.add_argument("--space", help="norm family, e.g. gagliardo")
    p_norm.add_argument("--json", help="also write the value as JSON")
    p_norm.set_defaults(handler=_cmd_norm)

    p_verify = sub.add_parser("verify", help="run one theorem check")
    p_verify.add_argument("check", help="check name, e.g. ftwfc")
    common(p_verify)
    p_verify.add_argument("--beta", type=float, help="higher order for inclusivity")
    p_verify.add_argument("--mode", help="density mode: smooth|piecewise_constant")
    p_verify.add_argument("--tolerance", type=float, help="override the pass bar")
    p_verify.add_argument("--json", help="write the report as JSON")
    p_verify.set_defaults(handler=_cmd_verify)

    p_suite = sub.add_parser("suite", help="run every canonical check")
    p_suite.add_argument("target", help="'all'")
    p_suite.add_argument("--config", help="JSON file with flag defaults")
    p_suite.add_argument("--json", help="write all reports as a JSON array")
    p_suite.set_defaults(handler=_cmd_suite)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        return args.handler(args)
    except ValueError as exc:
        # _UsageError and precondition rejections from the library both
        # land here: bad parameters, not a failed verification.
        sys.stderr.write(f"frac: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"frac: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
