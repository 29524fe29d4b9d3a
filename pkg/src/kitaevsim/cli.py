"""Command-line interface.

Subcommands: qfi, topo, elw, gap, sweep, oracle-check.  Machine-readable
output (CSV) goes to --out or stdout; human-readable summaries go to stderr.
Exit codes: 0 success, 1 numerical failure (non-finite result), 2 bad
configuration or arguments.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .bdg import edge_localization_width, mass_gap, solve_chain
from .entanglement import chain_qfi, scaling_exponent
from .model import (Anderson, AubryAndre, Boundary, ChainSpec, ConfigError,
                    GOLDEN_RATIO_INVERSE, Harper, Uniform, chain_from_dict,
                    chain_to_dict, load_chain)
from .oracle import equivalence_report
from .sweep import PRESET_NAMES, build_preset, run_plan
from .topology import topo_result

WORKERS_ENV = "KITAEVSIM_WORKERS"


class NumericalFailure(RuntimeError):
    pass


def _default_workers() -> int:
    value = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _add_chain_flags(parser: argparse.ArgumentParser, multi_l: bool) -> None:
    g = parser.add_argument_group("chain")
    g.add_argument("--config", metavar="FILE", help="chain config file (YAML)")
    if multi_l:
        g.add_argument("--L", metavar="N[,N...]", help="system size(s), comma separated")
    else:
        g.add_argument("--L", metavar="N", help="system size")
    g.add_argument("--J", type=float, help="hopping energy (default 1)")
    g.add_argument("--Delta", type=float, help="pairing energy (default 1)")
    g.add_argument("--alpha", help="pairing decay exponent, or 'inf' (default inf)")
    g.add_argument("--boundary", choices=["open", "closed"], help="boundary conditions")
    g.add_argument("--potential", choices=["uniform", "harper", "aubry_andre", "anderson"],
                   help="potential kind (default uniform)")
    g.add_argument("--mu", type=float, help="potential offset")
    g.add_argument("--V", type=float, help="modulation / disorder strength")
    g.add_argument("--omega", help="modulation frequency (float, or p/q for harper)")
    g.add_argument("--p", type=int, help="harper numerator")
    g.add_argument("--q", type=int, help="harper denominator")
    g.add_argument("--phi", type=float, help="modulation phase")
    g.add_argument("--potential-seed", type=int, dest="potential_seed",
                   help="anderson disorder seed")


def _parse_sizes(token: str) -> list[int]:
    try:
        sizes = [int(t) for t in token.split(",") if t]
    except ValueError:
        raise ConfigError("L", f"expected integer size list, got {token!r}") from None
    if not sizes:
        raise ConfigError("L", "at least one size required")
    if sorted(set(sizes)) != sizes:
        raise ConfigError("L", "sizes must be ascending and distinct")
    return sizes


def _chain_from_args(args, L: int) -> ChainSpec:
    doc: dict = {}
    if args.config:
        doc = chain_to_dict(load_chain(args.config))
    doc.setdefault("potential", {})
    doc["L"] = L
    if args.J is not None:
        doc["J"] = args.J
    if args.Delta is not None:
        doc["Delta"] = args.Delta
    if args.alpha is not None:
        doc["alpha"] = args.alpha
    if args.boundary is not None:
        doc["boundary"] = args.boundary
    pot = doc["potential"]
    if args.potential is not None:
        pot["kind"] = args.potential
        if args.potential != "anderson":
            pot.pop("seed", None)
    pot.setdefault("kind", "uniform")
    if args.mu is not None:
        pot["mu"] = args.mu
    if args.V is not None:
        pot["V"] = args.V
    if args.phi is not None:
        pot["phi"] = args.phi
    if args.potential_seed is not None:
        pot["seed"] = args.potential_seed
    if args.omega is not None:
        if pot["kind"] == "harper" or "/" in str(args.omega):
            frac = Fraction(str(args.omega))
            pot["kind"] = "harper"
            pot["p"], pot["q"] = frac.numerator, frac.denominator
        else:
            pot["omega"] = float(args.omega)
    if args.p is not None:
        pot["p"] = args.p
    if args.q is not None:
        pot["q"] = args.q
    doc.setdefault("J", 1.0)
    doc.setdefault("Delta", 1.0)
    if pot["kind"] in ("harper", "aubry_andre", "anderson"):
        pot.setdefault("mu", 0.0)
        pot.setdefault("V", 0.0)
    if pot["kind"] == "anderson":
        pot.setdefault("seed", 0)
    return chain_from_dict(doc)


def _check_finite(name: str, *values) -> None:
    for v in values:
        if v is not None and not math.isfinite(v):
            raise NumericalFailure(f"{name} produced a non-finite result")


def _emit_csv(out, header, rows):
    if out:
        fh = open(out, "w", encoding="utf-8", newline="")
    else:
        fh = sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if out:
            fh.close()


def _cmd_qfi(args) -> int:
    sizes = _parse_sizes(args.L or "100,200")
    results = [chain_qfi(_chain_from_args(args, L)) for L in sizes]
    for r in results:
        _check_finite("qfi", r.F_x, r.F_y)
    rows = []
    if len(sizes) >= 2:
        scaling = scaling_exponent(results)
        bx, by, b = scaling.beta_x, scaling.beta_y, scaling.beta
    else:
        bx = by = b = None
    for r in results:
        rows.append([r.L, repr(r.F_x), repr(r.F_y),
                     "" if bx is None else repr(bx),
                     "" if by is None else repr(by),
                     "" if b is None else repr(b)])
    _emit_csv(args.out, ["L", "F_x", "F_y", "beta_x", "beta_y", "beta"], rows)
    if b is not None:
        print(f"beta_x = {bx:.4f}  beta_y = {by:.4f}  beta = {b:.4f} "
              f"(sizes {sizes[-2]} -> {sizes[-1]})", file=sys.stderr)
    else:
        r = results[0]
        print(f"L = {r.L}: F_x = {r.F_x:.6g}, F_y = {r.F_y:.6g}", file=sys.stderr)
    return 0


def _cmd_topo(args) -> int:
    L = int(args.L or 200)
    chain = _chain_from_args(args, L)
    if not isinstance(chain.potential, Uniform):
        raise ConfigError("potential.kind", "topo expects a homogeneous (uniform) chain")
    res = topo_result(chain.J, chain.Delta, chain.potential.mu, chain.alpha,
                      L=L, n_k=args.nk)
    print(f"nu = {'undefined' if res.nu is None else res.nu}")
    print(f"berry_winding = {'undefined' if res.berry_winding is None else f'{res.berry_winding:.6f}'}")
    print(f"zeta = {'undefined' if res.zeta is None else res.zeta}")
    print(f"zeta_tilde = {'undefined' if res.zeta_tilde is None else res.zeta_tilde}")
    print(f"topo: mu/J = {chain.potential.mu / chain.J:g}, "
          f"Delta/J = {chain.Delta / chain.J:g}, alpha = {chain.alpha:g}", file=sys.stderr)
    return 0


def _cmd_elw(args) -> int:
    L = int(args.L or 200)
    chain = _chain_from_args(args, L)
    sol = solve_chain(chain)
    res = edge_localization_width(sol, C=args.C)
    _check_finite("elw", res.normalized_width)
    print(f"ell_left = {res.ell_left}")
    print(f"ell_right = {res.ell_right}")
    print(f"delta_ell = {res.delta_ell}")
    print(f"normalized_width = {res.normalized_width!r}")
    print(f"elw: L = {L}, 2C = {2 * args.C:g}", file=sys.stderr)
    return 0


def _cmd_gap(args) -> int:
    L = int(args.L or 200)
    chain = _chain_from_args(args, L)
    sol = solve_chain(chain)
    gap = mass_gap(sol)
    _check_finite("gap", gap)
    print(repr(gap))
    if args.spectrum_out:
        rows = [[k, repr(float(e))] for k, e in enumerate(sol.energies)]
        _emit_csv(args.spectrum_out, ["k", "Lambda"], rows)
    print(f"mass gap dE = {gap:.6g} at L = {L}", file=sys.stderr)
    return 0


def _cmd_sweep(args) -> int:
    if bool(args.preset) == bool(args.sweep_config):
        raise ConfigError("preset", "give exactly one of --preset or --config")
    boundary = Boundary(args.boundary) if args.boundary else None
    sizes = tuple(_parse_sizes(args.sizes)) if args.sizes else None
    if sizes is not None and len(sizes) != 2:
        raise ConfigError("sizes", "sweep needs exactly two sizes L1,L2")
    if args.preset:
        plan = build_preset(args.preset, grid=args.grid,
                            realizations=args.realizations,
                            boundary=boundary, sizes=sizes)
    else:
        plan = _plan_from_config(args.sweep_config, boundary=boundary, sizes=sizes,
                                 realizations=args.realizations)

    def progress(done, total):
        print(f"\r{plan.name}: {done}/{total} grid points", end="", file=sys.stderr)

    records = run_plan(plan, workers=args.workers, master_seed=args.seed,
                       out=args.out, resume=args.resume, progress=progress)
    print(file=sys.stderr)
    print(f"wrote {len(records)} records to {args.out}", file=sys.stderr)
    return 0


def _plan_from_config(path: str, *, boundary, sizes, realizations):
    import yaml

    from .sweep import SweepAxis, SweepPlan

    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "sweep config must be a mapping")
    unknown = set(doc) - {"chain", "axes", "observables", "sizes", "realizations", "beta_mode"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    if "chain" not in doc:
        raise ConfigError("chain", "required key missing")
    if "axes" not in doc or len(doc["axes"]) != 2:
        raise ConfigError("axes", "exactly two axes required")
    base = chain_from_dict(dict(doc["chain"]))
    axes = []
    for spec in doc["axes"]:
        spec = dict(spec)
        name = spec.pop("name", None)
        if name is None:
            raise ConfigError("axes.name", "required key missing")
        if "values" in spec:
            values = spec.pop("values")
            if name == "omega":
                values = tuple(Fraction(str(v)) for v in values)
            axes.append(SweepAxis(name, tuple(values)))
        elif name == "omega" and "q" in spec:
            q = spec.pop("q")
            axes.append(SweepAxis.harper_frequencies(q=q, p_values=spec.pop("p_values", None)))
        else:
            try:
                axes.append(SweepAxis.linear(name, float(spec.pop("min")),
                                             float(spec.pop("max")), int(spec.pop("count"))))
            except KeyError as exc:
                raise ConfigError(f"axes.{name}.{exc.args[0]}", "required key missing") from None
        if spec:
            raise ConfigError(f"axes.{name}.{sorted(spec)[0]}", "unknown key")
    plan = SweepPlan(
        name=os.path.basename(path),
        axes=(axes[0], axes[1]),
        base=base,
        observables=tuple(doc.get("observables", ("qfi",))),
        sizes=tuple(sizes or doc.get("sizes", (100, 200))),
        n_realizations=realizations or int(doc.get("realizations", 1)),
        beta_mode=doc.get("beta_mode", "mean_f"),
    )
    if boundary is not None:
        plan = SweepPlan(plan.name, plan.axes, plan.base.with_boundary(boundary),
                         plan.observables, plan.sizes, plan.n_realizations, plan.beta_mode)
    return plan


def _cmd_oracle_check(args) -> int:
    report = equivalence_report(n_specs=args.n_specs, seed=args.seed)
    print(f"specs checked: {report.n_specs} (L in {report.sizes})")
    print(f"max |G - G_oracle|        = {report.dev_g:.3e}  (tol 1e-10)")
    print(f"max |rho - rho_oracle|    = {report.dev_rho:.3e}  (tol 1e-9)")
    print(f"max rel |F - F_oracle|    = {report.dev_qfi:.3e}  (tol 1e-8)")
    ok = report.dev_g < 1e-10 and report.dev_rho < 1e-9 and report.dev_qfi < 1e-8
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kitaevsim",
        description="Variable-range Kitaev chain simulator: QFI scaling, "
                    "topological invariants, phase-diagram sweeps.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_qfi = sub.add_parser("qfi", help="QFI F_x, F_y and scaling exponents")
    _add_chain_flags(p_qfi, multi_l=True)
    p_qfi.add_argument("--out", metavar="CSV", help="write CSV here instead of stdout")
    p_qfi.set_defaults(func=_cmd_qfi)

    p_topo = sub.add_parser("topo", help="topological indicators nu, winding, zeta")
    _add_chain_flags(p_topo, multi_l=False)
    p_topo.add_argument("--nk", type=int, default=2048,
                        help="Brillouin-zone grid points for the winding (default 2048)")
    p_topo.set_defaults(func=_cmd_topo)

    p_elw = sub.add_parser("elw", help="edge localization width (open chains)")
    _add_chain_flags(p_elw, multi_l=False)
    p_elw.add_argument("--C", type=float, default=0.45,
                       help="per-edge probability threshold (default 0.45, i.e. 2C = 0.9)")
    p_elw.set_defaults(func=_cmd_elw)

    p_gap = sub.add_parser("gap", help="mass gap (smallest quasiparticle energy)")
    _add_chain_flags(p_gap, multi_l=False)
    p_gap.add_argument("--spectrum-out", metavar="CSV",
                       help="also write the full spectrum (columns k, Lambda)")
    p_gap.set_defaults(func=_cmd_gap)

    p_sweep = sub.add_parser("sweep", help="2-D phase-diagram sweep to CSV")
    p_sweep.add_argument("--preset", choices=PRESET_NAMES, help="figure preset")
    p_sweep.add_argument("--config", dest="sweep_config", metavar="FILE",
                         help="sweep config file (YAML)")
    p_sweep.add_argument("--out", required=True, metavar="CSV", help="output CSV path")
    p_sweep.add_argument("--workers", type=int, default=_default_workers(),
                         help=f"worker processes (default ${WORKERS_ENV} or 1)")
    p_sweep.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p_sweep.add_argument("--resume", action="store_true",
                         help="continue from an interrupted sweep's checkpoint")
    p_sweep.add_argument("--grid", type=int, help="override preset grid density")
    p_sweep.add_argument("--realizations", type=int,
                         help="override disorder realization count")
    p_sweep.add_argument("--boundary", choices=["open", "closed"],
                         help="override boundary conditions")
    p_sweep.add_argument("--sizes", metavar="L1,L2", help="override the size pair")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_oracle = sub.add_parser("oracle-check", help="pipeline vs 2^L brute force")
    p_oracle.add_argument("--n-specs", type=int, default=20, dest="n_specs",
                          help="random chain specs to test (default 20)")
    p_oracle.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p_oracle.set_defaults(func=_cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
