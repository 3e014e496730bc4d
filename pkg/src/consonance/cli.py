"""Command line interface.

Subcommands: measure, optimize, sweep, schmidt, classify, remap.  States
come either from a JSON file (--state) or from a factory spec
(--family, e.g. ``werner:a=0.5`` or ``bell:psi-``).  Exit codes: 0 on
success, 1 when a state or parameter fails validation, 2 on usage errors.

The random seed resolves as --seed, else the CONSONANCE_SEED environment
variable, else 0.  CSV output serializes numbers with 9 significant
digits and is byte-identical across runs for a fixed seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import coherence, measures, optimizer, states, unitary
from .qstate import (DensityMatrix, PureState, ValidationError,
                     density_from_pure, load_state, save_state, state_to_json)
from .states import FactorySpecError

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2


def resolve_seed(explicit) -> int:
    if explicit is not None:
        return int(explicit)
    env = os.environ.get("CONSONANCE_SEED", "").strip()
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ValueError(f"CONSONANCE_SEED must be an integer, got {env!r}") from exc
    return 0


def _fmt(x: float) -> str:
    return f"{x + 0.0:.9g}"    # + 0.0 keeps -0.0 out of the CSV


# --- state sources -------------------------------------------------------


def _add_state_source(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--state", metavar="FILE_OR_SPEC",
                       help="JSON state file, or a factory spec if no such file exists")
    group.add_argument("--family", metavar="SPEC",
                       help="factory spec, e.g. werner:a=0.5 or bell:psi-")
    parser.add_argument("--no-validate", action="store_true",
                        help="skip physicality checks when loading a state file")


def _looks_like_family(text: str) -> bool:
    name = text.partition(":")[0].strip().lower()
    return states._FAMILY_ALIASES.get(name, name) in states._FAMILIES


def _normalize_pair_params(family, params):
    """Rewrite the a2 weight parameterization as amplitudes (a, b) so the
    closed-form evaluators see one canonical form."""
    if family in ("bell_like", "psi_like") and "a2" in params:
        params = dict(params)
        a2 = float(params.pop("a2"))
        params["a"] = math.sqrt(a2)
        params["b"] = math.sqrt(max(0.0, 1.0 - a2))
    return params


def _load_source(args):
    """Returns (state, family_name_or_None, family_params)."""
    spec = args.family
    if spec is None and args.state is not None and not os.path.exists(args.state) \
            and _looks_like_family(args.state):
        spec = args.state
    if spec is not None:
        state = states.parse_factory_spec(spec)
        name, params = _family_fields(spec)
        return state, name, _normalize_pair_params(name, params)
    return load_state(args.state, validate_state=not args.no_validate), None, {}


def _family_fields(spec: str):
    name, _, arg_text = spec.strip().partition(":")
    name = states._FAMILY_ALIASES.get(name.strip().lower(), name.strip().lower())
    fn, param_names, bare, parsers = states._FAMILIES[name]
    params = {}
    if arg_text:
        for chunk in arg_text.split(","):
            chunk = chunk.strip()
            if "=" in chunk:
                k, _, v = chunk.partition("=")
                params[k.strip()] = states._parse_value(v.strip(), parsers[k.strip()])
            elif bare is not None:
                params[bare] = states._parse_value(chunk, parsers[bare])
    return name, params


def _as_density(state) -> DensityMatrix:
    return density_from_pure(state) if isinstance(state, PureState) else state


# --- measure evaluation --------------------------------------------------


@dataclass
class MeasureContext:
    state: object
    family: str | None
    params: dict
    opt_config: optimizer.OptimizerConfig


def _closed_form_concurrence(family, params):
    if family == "werner":
        return measures.concurrence_werner(params["a"])
    if family in ("bell_like", "psi_like"):
        a = complex(params["a"])
        b = params.get("b")
        b = complex(b) if b is not None else math.sqrt(max(0.0, 1.0 - abs(a) ** 2))
        return 2.0 * abs(a) * abs(complex(b))
    if family == "bell":
        return 1.0
    return None


def _eval_discord(ctx: MeasureContext) -> float:
    fam, p = ctx.family, ctx.params
    if fam == "werner":
        return measures.discord_werner(p["a"])
    if fam in ("bell_like", "psi_like"):
        a = complex(p["a"])
        b = p.get("b")
        b = complex(b) if b is not None else complex(math.sqrt(max(0.0, 1.0 - abs(a) ** 2)))
        return measures.discord_bell_like(a, b)
    if fam == "bell":
        return 1.0
    if fam == "two_param_2x3":
        return measures.discord_2x3(p["alpha"], p["gamma"])
    raise ValueError(f"no closed-form discord for family {fam!r}")


def _eval_eof(ctx: MeasureContext) -> float:
    c = _closed_form_concurrence(ctx.family, ctx.params)
    if c is not None:
        return measures.eof_from_concurrence(c)
    rho = _as_density(ctx.state)
    if rho.dims != (2, 2):
        raise ValueError("eof is implemented for two-qubit states only")
    return measures.eof_2x2(rho)


def evaluate_measure(name: str, ctx: MeasureContext):
    """Returns (value, extras) where extras holds companion columns."""
    name = name.strip().lower()
    if name == "consonance_cf":
        if ctx.family is None:
            raise ValueError("consonance_cf needs a --family state")
        fam = "bell_like" if ctx.family == "bell" else ctx.family
        params = dict(ctx.params)
        if ctx.family == "bell":
            params = {"a": 1.0 / math.sqrt(2.0), "b": 1.0 / math.sqrt(2.0)}
        if fam in ("bell_like", "psi_like") and "b" not in params:
            a = complex(params["a"])
            params["b"] = complex(math.sqrt(max(0.0, 1.0 - abs(a) ** 2)))
        return measures.consonance_closed_form(fam, **params).value, {}
    if name in ("consonance", "consonance_opt"):
        report = optimizer.consonance(_as_density(ctx.state), ctx.opt_config)
        return report.value, {"feasible": report.feasible,
                              "l_residual": report.l_residual}
    if name == "consonance_pure":
        if not isinstance(ctx.state, PureState):
            raise ValueError("consonance_pure needs a pure state")
        return optimizer.consonance_pure_bipartite(ctx.state), {}
    if name == "concurrence":
        rho = _as_density(ctx.state)
        return measures.concurrence_2x2(rho), {}
    if name == "eof":
        return _eval_eof(ctx), {}
    if name == "negativity":
        rho = _as_density(ctx.state)
        if rho.n_parties != 2:
            raise ValueError("negativity here expects a bipartite state")
        return measures.negativity(rho), {}
    if name == "discord":
        return _eval_discord(ctx), {}
    if name == "nonlocal_sum":
        return coherence.profile(_as_density(ctx.state)).s_value, {}
    if name == "local_coherence":
        return coherence.profile(_as_density(ctx.state)).l_value, {}
    if name == "c_minus_concurrence":
        cf, _ = evaluate_measure("consonance_cf", ctx)
        # prefer the family's closed-form concurrence so the difference is
        # exact where both pieces are (the general route leaves float dust
        # at points like werner a=1 where the gap closes to 0)
        c = _closed_form_concurrence(ctx.family, ctx.params)
        if c is None:
            c = measures.concurrence_2x2(_as_density(ctx.state))
        return cf - c, {}
    raise ValueError(f"unknown measure {name!r}")


# --- sweeps --------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    """A one-axis parameter sweep over a state family."""

    family: str
    axis: str
    start: float
    stop: float
    points: int
    measures: tuple[str, ...]
    fixed: tuple[tuple[str, float], ...] = ()
    bindings: tuple = ()          # (param, fn(axis_value)) derived parameters
    recipe: str | None = None
    header_notes: tuple[str, ...] = ()
    optimizer_config: optimizer.OptimizerConfig | None = None

    def __post_init__(self):
        if self.points < 2:
            raise ValueError(f"a sweep needs at least 2 grid points, got {self.points}")
        if not self.measures:
            raise ValueError("a sweep needs at least one measure")
        valid = set(states.family_parameters(self.family))
        used = [self.axis] + [k for k, _ in self.fixed] + [k for k, _ in self.bindings]
        for k in used:
            if k not in valid:
                raise ValueError(f"family {self.family!r} has no parameter {k!r}; "
                                 f"valid: {sorted(valid)}")
        if len(set(used)) != len(used):
            raise ValueError(f"parameter assigned more than once in {used}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    def params_at(self, x: float) -> dict:
        p = {self.axis: float(x)}
        p.update({k: v for k, v in self.fixed})
        p.update({k: fn(float(x)) for k, fn in self.bindings})
        return p


def fig2_spec(points: int = 41) -> SweepSpec:
    """Werner family: consonance (closed form and optimizer) against
    discord, concurrence and EoF on a uniform grid of a."""
    return SweepSpec(
        family="werner", axis="a", start=0.0, stop=1.0, points=points,
        measures=("consonance_cf", "consonance_opt", "discord",
                  "concurrence", "eof"),
        recipe="fig2")


def fig3_spec(points: int = 301) -> SweepSpec:
    """Werner family: the consonance-minus-concurrence gap on a dense grid."""
    return SweepSpec(
        family="werner", axis="a", start=0.0, stop=1.0, points=points,
        measures=("c_minus_concurrence",),
        recipe="fig3",
        header_notes=("quantum dissonance has no closed form implemented here; "
                      "only the consonance minus concurrence gap is emitted",))


def fig4_spec(points: int = 80) -> SweepSpec:
    """Qubit-qutrit family along gamma with the third weight pinned at 0.07
    by sliding alpha."""
    return SweepSpec(
        family="two_param_2x3", axis="gamma", start=0.0, stop=0.79,
        points=points,
        bindings=(("alpha", lambda g: (0.79 - g) / 2.0),),
        measures=("consonance_cf", "consonance_opt", "discord", "negativity"),
        recipe="fig4",
        header_notes=("alpha = (0.79 - gamma)/2 keeps the beta weight at 0.07",))


RECIPES = {"fig2": fig2_spec, "fig3": fig3_spec, "fig4": fig4_spec}


def run_sweep(spec: SweepSpec, opt_config: optimizer.OptimizerConfig,
              seed: int) -> str:
    """Execute the sweep and render the CSV text."""
    if spec.optimizer_config is not None:
        opt_config = spec.optimizer_config
    columns = [spec.axis]
    for m in spec.measures:
        columns.append(m)
        if m in ("consonance", "consonance_opt"):
            columns.append(f"{m}_feasible")

    lines = []
    if spec.recipe:
        lines.append(f"# recipe = {spec.recipe}")
    lines.append(f"# family = {spec.family}")
    for k, v in spec.fixed:
        lines.append(f"# fixed {k} = {_fmt(v)}")
    for note in spec.header_notes:
        lines.append(f"# {note}")
    lines.append(f"# seed = {seed}")
    lines.append(",".join(columns))

    for x in spec.grid():
        params = spec.params_at(x)
        state = states.make_family(spec.family, **params)
        ctx = MeasureContext(state=state, family=spec.family,
                             params=_normalize_pair_params(spec.family, params),
                             opt_config=opt_config)
        row = [_fmt(float(x))]
        for m in spec.measures:
            value, extras = evaluate_measure(m, ctx)
            row.append(_fmt(value))
            if m in ("consonance", "consonance_opt"):
                row.append("true" if extras.get("feasible") else "false")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


# --- subcommand handlers -------------------------------------------------


def _opt_config_from(args, seed: int) -> optimizer.OptimizerConfig:
    preset = optimizer.Preset(kind=getattr(args, "preset", unitary.SINGLE_PARTY),
                              depth=getattr(args, "depth", 3))
    kwargs = dict(preset=preset, seed=seed)
    if getattr(args, "restarts", None) is not None:
        kwargs["restarts"] = args.restarts
    if getattr(args, "eps_l", None) is not None:
        kwargs["eps_l"] = args.eps_l
    if getattr(args, "max_evals", None) is not None:
        kwargs["max_evals"] = args.max_evals
    if getattr(args, "warm_start", None):
        circuit = unitary.load_circuit(args.warm_start)
        kwargs["warm_starts"] = (unitary.theta_vector(circuit),)
    return optimizer.OptimizerConfig(**kwargs)


def cmd_measure(args) -> int:
    state, family, params = _load_source(args)
    seed = resolve_seed(args.seed)
    ctx = MeasureContext(state=state, family=family, params=params,
                         opt_config=_opt_config_from(args, seed))
    value, extras = evaluate_measure(args.measure, ctx)
    if extras.get("feasible") is False:
        print(f"warning: no feasible frame found "
              f"(l_residual={extras['l_residual']:.3e})", file=sys.stderr)
    if args.json:
        out = {"measure": args.measure, "value": value}
        if family is not None:
            out["family"] = family
            out["params"] = {k: (str(v) if isinstance(v, complex) else v)
                             for k, v in params.items()}
        out.update({k: v for k, v in extras.items()})
        print(json.dumps(out))
    else:
        print(value)
    return EXIT_OK


def cmd_optimize(args) -> int:
    state, _, _ = _load_source(args)
    seed = resolve_seed(args.seed)
    config = _opt_config_from(args, seed)
    report = optimizer.consonance(_as_density(state), config)
    obj = optimizer.report_to_json(report)
    obj["config"] = optimizer.config_to_json(config)
    obj["seed"] = seed
    text = json.dumps(obj, indent=1)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    seed = resolve_seed(args.seed)
    if args.recipe:
        maker = RECIPES[args.recipe]
        spec = maker(args.points) if args.points else maker()
    else:
        for required in ("family", "axis", "start", "stop", "points"):
            if getattr(args, required) is None:
                raise ValueError(f"custom sweeps need --{required.replace('_', '-')}")
        fixed = []
        if args.fixed:
            for chunk in args.fixed.split(","):
                k, _, v = chunk.partition("=")
                if not _ or not k.strip():
                    raise ValueError(f"bad --fixed entry {chunk!r}; use key=value")
                fixed.append((k.strip(), float(v)))
        spec = SweepSpec(family=args.family, axis=args.axis, start=args.start,
                         stop=args.stop, points=args.points,
                         measures=tuple(m.strip() for m in args.measures.split(",")),
                         fixed=tuple(fixed))
    restarts = args.restarts if args.restarts is not None else 8
    config = optimizer.OptimizerConfig(
        preset=optimizer.Preset(kind=args.preset, depth=args.depth),
        restarts=restarts, seed=seed,
        max_evals=args.max_evals if args.max_evals is not None else 20000)
    text = run_sweep(spec, config, seed)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_schmidt(args) -> int:
    state, _, _ = _load_source(args)
    if not isinstance(state, PureState):
        raise ValidationError("schmidt needs a pure state")
    dec = measures.schmidt_decompose(state)
    if args.json:
        print(json.dumps({"coefficients": [float(c) for c in dec.coefficients]}))
    else:
        print("k,coefficient")
        for k, c in enumerate(dec.coefficients):
            print(f"{k},{_fmt(float(c))}")
    return EXIT_OK


def cmd_classify(args) -> int:
    state, _, _ = _load_source(args)
    rho = _as_density(state)
    diag, local, nonloc = coherence.class_masks(rho.dims)
    names = np.where(diag, "diagonal", np.where(local, "local", "nonlocal"))
    print("row,col,row_parts,col_parts,class,modulus")
    d = rho.dim
    for i in range(d):
        mi = np.unravel_index(i, rho.dims)
        for j in range(d):
            mj = np.unravel_index(j, rho.dims)
            print(f"{i},{j},"
                  f"{'.'.join(str(x) for x in mi)},"
                  f"{'.'.join(str(x) for x in mj)},"
                  f"{names[i, j]},{_fmt(abs(rho.entries[i, j]))}")
    return EXIT_OK


def cmd_remap(args) -> int:
    state, _, _ = _load_source(args)
    rho = _as_density(state)
    out = states.tps_remap(rho, states.named_relabeling(args.relabeling))
    if args.out:
        save_state(out, args.out)
    else:
        print(json.dumps(state_to_json(out)))
    return EXIT_OK


# --- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="consonance",
        description="Quantum correlation as nonlocal coherence under the "
                    "best local frame")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_opt_flags(p, with_warm=False):
        p.add_argument("--preset", choices=(unitary.SINGLE_PARTY, unitary.NONGLOBAL),
                       default=unitary.SINGLE_PARTY)
        p.add_argument("--depth", type=int, default=3,
                       help="layer budget for the nonglobal preset")
        p.add_argument("--restarts", type=int, default=None)
        p.add_argument("--max-evals", type=int, default=None, dest="max_evals")
        p.add_argument("--seed", type=int, default=None,
                       help="defaults to CONSONANCE_SEED, then 0")
        if with_warm:
            p.add_argument("--eps-l", type=float, default=None, dest="eps_l")
            p.add_argument("--warm-start", metavar="CIRCUIT_JSON", default=None,
                           help="circuit file whose parameters seed one restart")

    p = sub.add_parser("measure", help="evaluate one measure of one state")
    _add_state_source(p)
    p.add_argument("--measure", required=True,
                   help="consonance_cf, consonance_opt, consonance_pure, "
                        "concurrence, eof, negativity, discord, nonlocal_sum, "
                        "local_coherence, c_minus_concurrence")
    p.add_argument("--json", action="store_true")
    add_opt_flags(p)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("optimize", help="run the consonance search, print the report")
    _add_state_source(p)
    add_opt_flags(p, with_warm=True)
    p.add_argument("--report", metavar="FILE", help="also write the JSON report here")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="sweep a family parameter, emit CSV")
    p.add_argument("--recipe", choices=sorted(RECIPES))
    p.add_argument("--family")
    p.add_argument("--axis")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--fixed", help="comma-separated key=value pairs")
    p.add_argument("--measures", default="consonance_cf",
                   help="comma-separated measure names")
    p.add_argument("--out", metavar="FILE")
    add_opt_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("schmidt", help="Schmidt coefficients of a pure state")
    _add_state_source(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_schmidt)

    p = sub.add_parser("classify", help="per-element coherence classes as CSV")
    _add_state_source(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("remap", help="rewrite a state in a relabeled product structure")
    _add_state_source(p)
    p.add_argument("--relabeling", default="werner-F-prime",
                   help=f"one of: {', '.join(sorted(states.RELABELINGS))}")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_remap)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FactorySpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
