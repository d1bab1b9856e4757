"""Command-line interface: density, moments, sweep and verify.

All output is machine-readable.  Numbers are written with Python's shortest
round-trip float repr, so files are byte-identical across runs.  Exit codes:
0 success, 1 computation or verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import ast
import io
import json
import math
import operator
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import densities as dens
from . import fock
from .errors import ConvergenceError, CutoffError, DomainError, NegativeDensityError
from .model import OscillatorParams, make_state, thermal_params_from
from .verify import run_verify

STATES = ("vacuum", "displaced", "squeezed")
SWEEP_PARAMS = ("beta_hw", "omega_t", "n", "alpha1", "alpha2", "z1", "z2")


class UsageError(Exception):
    pass


def fmt(value):
    """Shortest round-trip text for a number; infinities as 'inf'."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def _json_num(value):
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv}


def parse_real(text):
    """A real number, 'inf', or arithmetic on numbers and pi (e.g. 'pi/2', '3*pi/4')."""
    text = str(text).strip()
    if text.lower() in ("inf", "+inf", "infinity"):
        return math.inf

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError

    try:
        return float(ev(ast.parse(text, mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None


def parse_complex(text):
    parts = str(text).split(",")
    if len(parts) == 1:
        return complex(parse_real(parts[0]), 0.0)
    if len(parts) != 2:
        raise UsageError(f"expected RE,IM, got {text!r}")
    return complex(parse_real(parts[0]), parse_real(parts[1]))


def parse_grid(text):
    if text == "auto":
        return "auto"
    parts = str(text).split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be MIN:MAX:COUNT or auto, got {text!r}")
    lo, hi = parse_real(parts[0]), parse_real(parts[1])
    try:
        count = int(parts[2])
    except ValueError:
        raise UsageError(f"grid count must be an integer, got {parts[2]!r}") from None
    if count < 1 or not (math.isfinite(lo) and math.isfinite(hi)) or (count > 1 and hi <= lo):
        raise UsageError(f"bad grid {text!r}")
    return (lo, hi, count)


def parse_cutoff(text):
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise UsageError(f"cutoff must be auto or an integer, got {text!r}") from None
    if value < 1:
        raise UsageError("cutoff must be >= 1")
    return value


def parse_units(text):
    parts = str(text).split(",")
    if len(parts) != 3:
        raise UsageError(f"units must be M,OMEGA,HBAR, got {text!r}")
    return tuple(parse_real(p) for p in parts)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one run.  Defaults: unit parameters,
    automatic grid and cutoff, tolerance 1e-8."""

    state: str = "vacuum"
    n: int = 0
    alpha: complex = 0j
    z: complex = 0j
    beta_hw: float = 1.0
    omega_t: float = 0.0
    units: tuple = (1.0, 1.0, 1.0)
    grid: object = "auto"
    cutoff: object = "auto"
    tol: float = 1e-8
    method: str = "closed"
    format: str = "csv"
    out: object = None

    def to_dict(self):
        d = asdict(self)
        d["alpha"] = [self.alpha.real, self.alpha.imag]
        d["z"] = [self.z.real, self.z.imag]
        d["beta_hw"] = _json_num(self.beta_hw)
        d["units"] = list(self.units)
        d["grid"] = self.grid if self.grid == "auto" else list(self.grid)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(d)
        if "alpha" in kw:
            kw["alpha"] = complex(*kw["alpha"])
        if "z" in kw:
            kw["z"] = complex(*kw["z"])
        if "beta_hw" in kw:
            kw["beta_hw"] = parse_real(kw["beta_hw"])
        if "omega_t" in kw:
            kw["omega_t"] = float(kw["omega_t"])
        if "units" in kw:
            kw["units"] = tuple(float(u) for u in kw["units"])
        if "grid" in kw and kw["grid"] != "auto":
            lo, hi, count = kw["grid"]
            kw["grid"] = (float(lo), float(hi), int(count))
        if "cutoff" in kw and kw["cutoff"] != "auto":
            kw["cutoff"] = int(kw["cutoff"])
        if "tol" in kw:
            kw["tol"] = float(kw["tol"])
        return cls(**kw).validated()

    @classmethod
    def from_json(cls, text):
        try:
            return cls.from_dict(json.loads(text))
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise UsageError(f"unreadable config: {exc}") from None

    def validated(self):
        if self.state not in STATES:
            raise UsageError(f"state must be one of {STATES}, got {self.state!r}")
        if self.method not in ("closed", "oracle"):
            raise UsageError(f"method must be closed or oracle, got {self.method!r}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")
        if self.state == "vacuum" and (self.n or self.alpha or self.z):
            raise UsageError("the thermal vacuum takes no --n, --alpha or --z")
        if self.state == "displaced" and self.z:
            raise UsageError("a displaced number state takes no --z; use --state squeezed")
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise UsageError("tol must be positive")
        try:
            self.spec()
            self.thermal()
            self.params()
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        return self

    def spec(self):
        return make_state(self.state, self.alpha, self.z, self.n)

    def thermal(self):
        return thermal_params_from(self.beta_hw)

    def params(self):
        return OscillatorParams(*self.units)

    def grid_points(self):
        if self.grid == "auto":
            return dens.auto_grid(self.spec(), self.thermal(), self.params(), self.omega_t)
        lo, hi, count = self.grid
        return np.linspace(lo, hi, count)

    def oracle(self):
        spec, th = self.spec(), self.thermal()
        return fock.prepare_thermal_state(spec.alpha, spec.z, spec.n, th, self.cutoff,
                                          max_deficit=self.tol)


def density_values(cfg: RunConfig):
    x = cfg.grid_points()
    if cfg.method == "oracle":
        rho = cfg.oracle().density(x, cfg.params(), cfg.omega_t)
    else:
        rho = dens.density_profile(cfg.spec(), cfg.thermal(), cfg.params(), cfg.omega_t,
                                   grid=x).values
    return x, np.atleast_1d(rho)


def moment_values(cfg: RunConfig):
    if cfg.method == "oracle":
        c = cfg.oracle().at(cfg.omega_t)
        return fock.oracle_moments(c, cfg.params())
    return dens.state_moments(cfg.spec(), cfg.thermal(), cfg.params(), cfg.omega_t)


def render_csv(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def render_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_density(cfg: RunConfig):
    x, rho = density_values(cfg)
    if cfg.format == "json":
        return render_json({"beta_hw": _json_num(cfg.beta_hw), "omega_t": cfg.omega_t,
                            "x": x.tolist(), "rho": rho.tolist()})
    return render_csv(("x", "rho"), zip(x.tolist(), rho.tolist()))


def cmd_moments(cfg: RunConfig):
    mu, var = moment_values(cfg)
    if cfg.format == "csv":
        return render_csv(("mean_x", "var_x", "beta_hw", "omega_t"),
                          [(mu, var, cfg.beta_hw, cfg.omega_t)])
    return render_json({"mean_x": mu, "var_x": var, "beta_hw": _json_num(cfg.beta_hw),
                        "omega_t": cfg.omega_t})


def _with_param(cfg: RunConfig, name, value):
    if name == "n":
        if value != int(value):
            raise UsageError(f"n must be an integer, got {value!r}")
        return replace(cfg, n=int(value))
    if name in ("alpha1", "alpha2"):
        a = cfg.alpha
        a = complex(value, a.imag) if name == "alpha1" else complex(a.real, value)
        return replace(cfg, alpha=a)
    if name in ("z1", "z2"):
        z = cfg.z
        z = complex(value, z.imag) if name == "z1" else complex(z.real, value)
        return replace(cfg, z=z)
    return replace(cfg, **{name: value})


def parse_sweep(items):
    if not items:
        raise UsageError("sweep needs --sweep PARAM=v1,v2,...")
    if len(items) > 1:
        raise UsageError("sweep over exactly one parameter")
    name, sep, values = items[0].partition("=")
    name = name.strip()
    if not sep or name not in SWEEP_PARAMS:
        raise UsageError(f"--sweep must be PARAM=v1,... with PARAM in {SWEEP_PARAMS}")
    vals = [parse_real(v) for v in values.split(",") if v.strip()]
    if not vals:
        raise UsageError("sweep value list is empty")
    return name, sorted(vals)


def cmd_sweep(cfg: RunConfig, name, values, quantity="density"):
    # a sweep that moves a parameter the chosen kind lacks promotes the kind;
    # the promoted state reduces to the original at the zero value
    if name in ("z1", "z2") and cfg.state != "squeezed":
        cfg = replace(cfg, state="squeezed")
    elif name in ("n", "alpha1", "alpha2") and cfg.state == "vacuum":
        cfg = replace(cfg, state="displaced")
    runs = [(v, _with_param(cfg, name, v).validated()) for v in values]
    if quantity == "moments":
        header = ("param", "mean_x", "var_x")
        rows = [(v,) + tuple(moment_values(c)) for v, c in runs]
    else:
        header = ("param", "x", "rho")
        rows = []
        for v, c in runs:
            x, rho = density_values(c)
            rows.extend((v, xi, r) for xi, r in zip(x.tolist(), rho.tolist()))
    if name == "n":
        rows = [(int(r[0]),) + tuple(r[1:]) for r in rows]
    if cfg.format == "json":
        return render_json({"param": name, "rows": [
            dict(zip(header, (_json_num(v) for v in r))) for r in rows]})
    return render_csv(header, rows)


def write_output(text, path):
    """Write once: stdout, or a temp file in the target directory renamed into place."""
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".tfd-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", choices=STATES)
    common.add_argument("--n", type=int)
    common.add_argument("--alpha", metavar="RE,IM")
    common.add_argument("--z", metavar="RE,IM")
    common.add_argument("--beta-hw", metavar="VALUE|inf", help="dimensionless beta*hbar*omega")
    common.add_argument("--beta", metavar="VALUE",
                        help="physical inverse temperature; needs explicit --units")
    common.add_argument("--omega-t", metavar="VALUE", help="phase wt; 'pi/2' style allowed")
    common.add_argument("--grid", metavar="MIN:MAX:COUNT|auto")
    common.add_argument("--units", metavar="M,OMEGA,HBAR")
    common.add_argument("--cutoff", metavar="auto|N", help="Fock cutoff for --method oracle")
    common.add_argument("--tol", type=float, help="norm-deficit ceiling for --method oracle")
    common.add_argument("--method", choices=("closed", "oracle"))
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--config", metavar="PATH", help="read a RunConfig JSON file")
    common.add_argument("--emit-config", action="store_true",
                        help="print the resolved RunConfig as JSON and exit")

    parser = argparse.ArgumentParser(prog="thermofield", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("density", parents=[common], help="position density on a grid (CSV x,rho)")
    sub.add_parser("moments", parents=[common], help="mean and variance of x (JSON)")
    sw = sub.add_parser("sweep", parents=[common], help="one-parameter sweep (long CSV)")
    sw.add_argument("--sweep", action="append", metavar="PARAM=v1,v2,...")
    sw.add_argument("--quantity", choices=("density", "moments"), default="density")
    ver = sub.add_parser("verify", help="run the verification suite (JSON report)")
    ver.add_argument("--level", choices=("quick", "full"), default="quick")
    ver.add_argument("--out", metavar="PATH")
    return parser


def resolve_config(args):
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = RunConfig.from_json(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    else:
        cfg = RunConfig()
        if args.command == "moments":
            cfg = replace(cfg, format="json")
    kw = {}
    if args.state is not None:
        kw["state"] = args.state
    if args.n is not None:
        kw["n"] = args.n
    if args.alpha is not None:
        kw["alpha"] = parse_complex(args.alpha)
    if args.z is not None:
        kw["z"] = parse_complex(args.z)
    if args.units is not None:
        kw["units"] = parse_units(args.units)
    if args.beta is not None:
        if args.beta_hw is not None:
            raise UsageError("give either --beta-hw or --beta, not both")
        if args.units is None:
            raise UsageError("--beta is a physical inverse temperature and needs explicit "
                             "--units M,OMEGA,HBAR")
        _, omega, hbar = kw["units"]
        kw["beta_hw"] = parse_real(args.beta) * hbar * omega
    if args.beta_hw is not None:
        kw["beta_hw"] = parse_real(args.beta_hw)
    if args.omega_t is not None:
        kw["omega_t"] = parse_real(args.omega_t)
    if args.grid is not None:
        kw["grid"] = parse_grid(args.grid)
    if args.cutoff is not None:
        kw["cutoff"] = parse_cutoff(args.cutoff)
    if args.tol is not None:
        kw["tol"] = args.tol
    if args.method is not None:
        kw["method"] = args.method
    if args.format is not None:
        kw["format"] = args.format
    if args.out is not None:
        kw["out"] = args.out
    if "state" not in kw and cfg.state == "vacuum" and (
            kw.get("alpha") or kw.get("z") or kw.get("n")):
        kw["state"] = "squeezed" if kw.get("z") else "displaced"
    try:
        cfg = replace(cfg, **kw)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    return cfg.validated()


# value flags whose values may start with '-' (negative grid bounds, alpha, ...)
_VALUE_FLAGS = ("--alpha", "--z", "--beta-hw", "--beta", "--omega-t", "--grid", "--units",
                "--sweep")


def _join_values(argv):
    """Rewrite '--grid -4:4:5' as '--grid=-4:4:5' so argparse keeps the value."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(_join_values(sys.argv[1:] if argv is None else list(argv)))
    try:
        if args.command == "verify":
            report = run_verify(args.level)
            write_output(report.to_json(), args.out)
            if not report.passed:
                for c in report.failures:
                    print(f"FAIL {c.id} {json.dumps(c.to_dict()['params'], sort_keys=True)} "
                          f"{c.metric}={c.measured!r} > {c.threshold!r}", file=sys.stderr)
                return 1
            return 0
        cfg = resolve_config(args)
        if args.emit_config:
            sys.stdout.write(cfg.to_json())
            return 0
        if args.command == "density":
            text = cmd_density(cfg)
        elif args.command == "moments":
            text = cmd_moments(cfg)
        else:
            name, values = parse_sweep(args.sweep)
            text = cmd_sweep(cfg, name, values, args.quantity)
        write_output(text, cfg.out)
        return 0
    except UsageError as exc:
        print(f"thermofield: error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"thermofield: error: {exc}", file=sys.stderr)
        return 2
    except (CutoffError, ConvergenceError, NegativeDensityError) as exc:
        print(f"thermofield: computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
