"""``ssa-lab`` command-line front end.

Exit codes: 0 when every verdict is satisfied (or within slack), 2 when any
verdict is ``violatedBeyondSlack``, 1 on usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import channels as chn
from . import inequalities as iq
from . import measures as ms
from . import recovery as rc
from . import reports
from . import states as st
from .linalg import InputError, Layout
from .optimize import OptimizerConfig

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2
SEED_ENV = "SSA_LAB_SEED"
QUANTITIES = ("entropy", "mi", "cmi", "coherent", "j", "discord", "concurrence", "eof", "delta", "dtilde")

log = logging.getLogger("ssa_lab")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


@dataclass
class RunConfig:
    command: str
    master_seed: int = 0
    out_path: Path | None = None
    format: str = "json"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)


# --- argument helpers -------------------------------------------------------

def parse_dims(text: str) -> Layout:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise InputError(f"bad --dims {text!r}") from exc
    return Layout.from_dims(dims)


def parse_rank(text: str | None, layout: Layout):
    if text is None:
        return 1, layout.total_dim
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return int(lo), int(hi)
        r = int(text)
    except ValueError as exc:
        raise InputError(f"bad --rank {text!r}; use r or min..max") from exc
    return r, r


def resolve_seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise InputError(f"{SEED_ENV} must be an integer, got {env!r}") from exc


def load_state_arg(spec: str, seed: int, dims: str | None = None, rank: str | None = None) -> st.DensityMatrix:
    """A state file path, a named state, or ``random-pure`` / ``random-mixed`` (uses --dims and --rank)."""
    if Path(spec).is_file():
        return st.load_state(spec)
    layout = parse_dims(dims or "2,2,2")
    if spec == "random-pure":
        return st.random_pure_state(layout, seed)
    if spec == "random-mixed":
        lo, hi = parse_rank(rank, layout)
        r = int(np.random.default_rng(seed).integers(lo, hi + 1))
        return st.random_mixed_state(layout, r, seed)
    if spec in ("markov", "bssa"):
        rng = np.random.default_rng(seed)
        if spec == "markov":
            return st.make_markov_state(st.random_markov_spec(rng))
        return st.make_bssa_saturating_state(st.random_bssa_spec(rng))
    return st.make_named_state(spec)


def _groups(rho: st.DensityMatrix, text: str | None, want: int):
    if text is None:
        labels = rho.labels
        if len(labels) < want:
            raise InputError(f"need {want} parties, state has {labels}")
        return [(lbl,) for lbl in labels[:want]]
    parts = [rho.layout.group(p) for p in text.split("|")]
    if len(parts) != want:
        raise InputError(f"--parts needs {want} groups separated by '|'")
    return parts


def _optimizer(args) -> OptimizerConfig:
    kw = {}
    if args.restarts is not None:
        kw["restarts"] = args.restarts
    if args.tol is not None:
        kw["tolerance"] = args.tol
    if args.patience is not None:
        kw["patience"] = args.patience
    return OptimizerConfig(seed=resolve_seed(args.seed), **kw)


def _emit(doc, cfg: RunConfig) -> None:
    text = reports.emit(doc, cfg.out_path, cfg.format)
    if cfg.out_path is None:
        sys.stdout.write(text)


# --- commands ---------------------------------------------------------------

def cmd_measure(args, cfg: RunConfig) -> int:
    rho = load_state_arg(args.state, cfg.master_seed, args.dims, args.rank)
    q, oc = args.quantity, cfg.optimizer
    doc = {"quantity": q, "state": args.state, "digest": rho.digest()}
    if q == "entropy":
        group = rho.layout.group(args.parts) if args.parts else rho.labels
        doc["value"] = ms.entropy(rho, group)
    elif q in ("mi", "coherent", "concurrence", "eof"):
        a, b = _groups(rho, args.parts, 2)
        if q == "mi":
            doc["value"] = ms.mutual_information(rho, a, b)
        elif q == "coherent":
            doc["value"] = ms.coherent_information(rho, a, b)
        elif q == "concurrence":
            if rho.layout.dim_of(a) != 2 or rho.layout.dim_of(b) != 2:
                raise InputError("concurrence is defined here for qubit pairs")
            doc["value"] = ms.concurrence(rho.reduce(a + b).matrix)
        else:
            doc["value"] = ms.entanglement_of_formation(rho, a, b, oc)
    elif q in ("j", "discord"):
        measured = rho.layout.group(args.measured or rho.labels[-1])
        other = rho.layout.group(args.other) if args.other else rho.layout.complement(measured)
        fn = ms.classical_correlation if q == "j" else ms.quantum_discord
        res = fn(rho.reduce(other + measured), measured, oc, other=other)
        doc.update(value=res.value, converged=res.converged, spreadOverRestarts=res.spread_over_restarts,
                   measured=list(measured), other=list(other), extra=res.extra)
    elif q in ("cmi", "delta", "dtilde"):
        a, b, c = _groups(rho, args.parts, 3)
        if q == "cmi":
            doc["value"] = ms.conditional_mutual_information(rho, a, b, c)
        else:
            terms = (ms.delta_terms if q == "delta" else ms.delta_tilde_terms)(rho, a, b, c, oc, args.route)
            doc.update(value=terms["value"], terms=terms)
    _emit(doc, cfg)
    return EXIT_OK


def _sweep(args, cfg: RunConfig, trials: int) -> int:
    layout = parse_dims(args.dims or "2,2,2")
    rank = parse_rank(args.rank, layout)
    if args.kind == "conservation" and args.rank is None:
        rank = (1, 1)
    summary = iq.sweep_random(args.kind, trials, layout, rank, cfg.master_seed, cfg.optimizer,
                              slack=args.slack, dump_dir=args.dump_dir)
    _emit(summary, cfg)
    return EXIT_VIOLATION if summary.violations else EXIT_OK


def cmd_check(args, cfg: RunConfig) -> int:
    if args.random is not None:
        return _sweep(args, cfg, args.random)
    if args.state is None:
        raise InputError("check needs --state or --random N")
    rho = load_state_arg(args.state, cfg.master_seed, args.dims, args.rank)
    want = 2 if args.kind == "wsa" else 3
    parts = _groups(rho, args.parts, want)
    rep = iq.evaluate_inequality(args.kind, rho, parts, cfg.optimizer, args.slack, args.route)
    _emit(rep, cfg)
    return EXIT_VIOLATION if rep.verdict == iq.VIOLATED else EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    return _sweep(args, cfg, args.trials)


def cmd_search(args, cfg: RunConfig) -> int:
    layout = parse_dims(args.dims or "2,2,2")
    found = iq.search_positive_delta_tilde(layout, args.trials, cfg.master_seed, cfg.optimizer,
                                           rank_range=parse_rank(args.rank or "2", layout),
                                           out_dir=args.states_dir)
    _emit({"budget": args.trials, "masterSeed": cfg.master_seed, "found": len(found), "entries": found}, cfg)
    return EXIT_OK


def cmd_dataproc(args, cfg: RunConfig) -> int:
    rho = load_state_arg(args.input, cfg.master_seed, args.dims or "2,2")
    pipe = chn.run_two_stage(rho, chn.make_named_channel(args.ch1), chn.make_named_channel(args.ch2))
    rep = chn.data_processing_report(pipe, cfg.optimizer, route=args.route)
    _emit(rep, cfg)
    slack = 1e-9 if args.route == "oracle" else 2e-3
    ok = min(rep.qdp_margin, rep.bounded_margin, rep.lii_margin) >= -slack and rep.identity_residual <= 1e-9
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_saturate(args, cfg: RunConfig) -> int:
    rho = load_state_arg(args.state, cfg.master_seed, args.dims, args.rank)
    parts = _groups(rho, args.parts, 3)
    markov = rc.check_markov(rho, parts)
    sat = rc.check_bssa_saturation(rho, parts, cfg.optimizer)
    _emit({"state": args.state, "digest": rho.digest(), "markov": markov, "saturation": sat}, cfg)
    return EXIT_OK


def cmd_state_gen(args, cfg: RunConfig) -> int:
    rho = load_state_arg(args.name, cfg.master_seed, args.dims, args.rank)
    meta = {"name": args.name, "seed": cfg.master_seed, "digest": rho.digest()}
    doc = st.state_to_json(rho, meta)
    text = json.dumps(doc, indent=1) + "\n"
    if cfg.out_path is None:
        sys.stdout.write(text)
    else:
        cfg.out_path.write_text(text)
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"master seed (fallback ${SEED_ENV}, then 0)")
    common.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--restarts", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--patience", type=int, default=None, help="stop after N restarts without improvement")
    common.add_argument("--dims", default=None, help="comma-separated party dimensions, e.g. 2,2,2")
    common.add_argument("--rank", default=None, help="r or min..max")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="ssa-lab", description="Entropy inequalities, discord and EoF at desk scale.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    m = sub.add_parser("measure", parents=[common], help="evaluate one correlation measure")
    m.add_argument("quantity", choices=QUANTITIES)
    m.add_argument("--state", required=True, help="named state, random-pure, random-mixed, markov, bssa or a file")
    m.add_argument("--measured", default=None, help="measured party for j/discord")
    m.add_argument("--other", default=None, help="unmeasured party for j/discord (default: the rest)")
    m.add_argument("--parts", default=None, help="label groups separated by '|', e.g. 'A|B|C'")
    m.add_argument("--route", default="auto", choices=("auto", "oracle", "direct", "purified"))
    m.set_defaults(func=cmd_measure)

    def add_sweep_flags(sp):
        sp.add_argument("kind", choices=iq.KINDS)
        sp.add_argument("--slack", type=float, default=None)
        sp.add_argument("--dump-dir", default=None, help="where offending states are written")

    c = sub.add_parser("check", parents=[common], help="evaluate an inequality on a state or random sweep")
    add_sweep_flags(c)
    c.add_argument("--state", default=None)
    c.add_argument("--random", type=int, default=None, metavar="N")
    c.add_argument("--parts", default=None)
    c.add_argument("--route", default="auto", choices=("auto", "oracle", "direct", "purified"))
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("sweep", parents=[common], help="seeded Monte-Carlo sweep")
    add_sweep_flags(s)
    s.add_argument("--trials", type=int, required=True)
    s.set_defaults(func=cmd_sweep)

    d = sub.add_parser("search-dtilde", parents=[common], help="search for states with positive Delta~")
    d.add_argument("--trials", type=int, required=True, help="candidate budget")
    d.add_argument("--states-dir", default=None)
    d.set_defaults(func=cmd_search)

    dp = sub.add_parser("dataproc", parents=[common], help="two-stage channel data-processing report")
    dp.add_argument("--input", default="bell")
    dp.add_argument("--ch1", required=True)
    dp.add_argument("--ch2", required=True)
    dp.add_argument("--route", default="oracle", choices=("oracle", "direct"))
    dp.set_defaults(func=cmd_dataproc)

    sa = sub.add_parser("saturate", parents=[common], help="Markov and b-SSA saturation battery")
    sa.add_argument("--state", required=True)
    sa.add_argument("--parts", default=None)
    sa.set_defaults(func=cmd_saturate)

    stp = sub.add_parser("state", help="state utilities")
    st_sub = stp.add_subparsers(dest="state_command", parser_class=_Parser)
    g = st_sub.add_parser("gen", parents=[common], help="write a state file")
    g.add_argument("name")
    g.set_defaults(func=cmd_state_gen)
    return p


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            raise UsageError(parser.format_help())
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = RunConfig(args.command, resolve_seed(args.seed), args.out, args.format, _optimizer(args))
        return args.func(args, cfg)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except (InputError, ValueError, OSError) as exc:
        sys.stderr.write(f"ssa-lab: error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
