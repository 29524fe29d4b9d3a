"""Phase-diagram engine: 2-D parameter grids, disorder averaging, CSV emission.

A sweep walks a two-axis parameter grid over a base chain, computing the
requested observables at every point.  Grid points are independent, so the
engine parallelizes over them with a stateless worker pool; results are
written in row-major grid order regardless of completion order, and an
append-only checkpoint log makes interrupted sweeps resumable without
recomputing or duplicating finished records.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, replace, field
from fractions import Fraction
from multiprocessing import Pool
from typing import Iterable, Optional, Sequence

import numpy as np

from .bdg import edge_localization_width, mass_gap, solve_chain
from .entanglement import qfi_channel_detailed, two_point_slope
from .model import (Anderson, AubryAndre, Boundary, ChainSpec, ConfigError,
                    Harper, Uniform)
from .topology import UndecidedInvariantError, transfer_matrix_invariant
from .model import potential_values

AXIS_PARAMETERS = ("mu", "V", "omega", "Delta", "alpha")
OBSERVABLES = ("qfi", "gap", "elw", "nu")

CSV_COLUMNS = [
    "grid_i", "grid_j",
    "J", "Delta", "alpha", "boundary", "potential",
    "mu", "V", "p", "q", "omega", "phi", "seed",
    "L1", "L2",
    "F_x_L1", "F_y_L1", "F_x_L2", "F_y_L2",
    "beta_x", "beta_y", "beta",
    "mass_gap", "elw_normalized",
    "nu", "nu_bar", "n_realizations", "master_seed",
    "flags",
]


@dataclass(frozen=True)
class SweepAxis:
    """One grid axis: a parameter name plus its explicit value list.

    ``omega`` axes take rational values (Fraction or (p, q) pairs) that are
    reduced before being installed into a Harper potential; all other axes
    take floats.
    """

    name: str
    values: tuple

    def __post_init__(self):
        if self.name not in AXIS_PARAMETERS:
            raise ConfigError(f"axes.{self.name}", f"axis parameter must be one of {AXIS_PARAMETERS}")
        if len(self.values) < 1:
            raise ConfigError(f"axes.{self.name}", "axis needs at least one value")
        if self.name != "omega":
            for v in self.values:
                if not math.isfinite(v) and not (self.name == "alpha" and math.isinf(v)):
                    raise ConfigError(f"axes.{self.name}", f"non-finite axis value {v}")

    @staticmethod
    def linear(name: str, lo: float, hi: float, count: int) -> "SweepAxis":
        if count < 1:
            raise ConfigError(f"axes.{name}", "count must be >= 1")
        return SweepAxis(name, tuple(np.linspace(lo, hi, count).tolist()))

    @staticmethod
    def harper_frequencies(q: int, p_values: Optional[Iterable[int]] = None) -> "SweepAxis":
        """omega = p/q axis in the style p = 0, 1, ..., q at fixed q."""
        ps = range(0, q + 1) if p_values is None else p_values
        return SweepAxis("omega", tuple(Fraction(p, q) for p in ps))


@dataclass(frozen=True)
class SweepRecord:
    """One grid point of a phase diagram: parameters plus all observables."""

    grid_i: int
    grid_j: int
    chain: ChainSpec
    L1: int
    L2: int
    F_x_L1: Optional[float] = None
    F_y_L1: Optional[float] = None
    F_x_L2: Optional[float] = None
    F_y_L2: Optional[float] = None
    beta_x: Optional[float] = None
    beta_y: Optional[float] = None
    beta: Optional[float] = None
    mass_gap: Optional[float] = None
    elw_normalized: Optional[float] = None
    nu: Optional[float] = None
    nu_bar: Optional[float] = None
    n_realizations: Optional[int] = None
    master_seed: Optional[int] = None
    flags: tuple = ()


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return repr(value)
    return str(value)


def record_to_row(rec: SweepRecord) -> list[str]:
    pot = rec.chain.potential
    kind = {Uniform: "uniform", Harper: "harper", AubryAndre: "aubry_andre",
            Anderson: "anderson"}[type(pot)]
    p = pot.p if isinstance(pot, Harper) else None
    q = pot.q if isinstance(pot, Harper) else None
    omega = pot.omega if isinstance(pot, (Harper, AubryAndre)) else None
    phi = pot.phi if isinstance(pot, (Harper, AubryAndre)) else None
    V = getattr(pot, "V", None)
    seed = pot.seed if isinstance(pot, Anderson) else None
    values = [
        rec.grid_i, rec.grid_j,
        rec.chain.J, rec.chain.Delta, rec.chain.alpha, rec.chain.boundary.value, kind,
        pot.mu, V, p, q, omega, phi, seed,
        rec.L1, rec.L2,
        rec.F_x_L1, rec.F_y_L1, rec.F_x_L2, rec.F_y_L2,
        rec.beta_x, rec.beta_y, rec.beta,
        rec.mass_gap, rec.elw_normalized,
        rec.nu, rec.nu_bar, rec.n_realizations, rec.master_seed,
        ";".join(rec.flags),
    ]
    return [_fmt(v) for v in values]


def apply_axis_value(chain: ChainSpec, name: str, value) -> ChainSpec:
    """Return a copy of ``chain`` with one swept parameter replaced."""
    if name == "Delta":
        return replace(chain, Delta=float(value))
    if name == "alpha":
        return replace(chain, alpha=float(value))
    pot = chain.potential
    if name == "mu":
        return replace(chain, potential=replace(pot, mu=float(value)))
    if name == "V":
        if isinstance(pot, Uniform):
            raise ConfigError("axes.V", "V axis needs a modulated or random potential")
        return replace(chain, potential=replace(pot, V=float(value)))
    if name == "omega":
        if isinstance(pot, Harper):
            frac = Fraction(value) if not isinstance(value, tuple) else Fraction(*value)
            return replace(chain, potential=replace(pot, p=frac.numerator, q=frac.denominator))
        if isinstance(pot, AubryAndre):
            return replace(chain, potential=replace(pot, omega=float(value)))
        raise ConfigError("axes.omega", "omega axis needs a Harper or Aubry-Andre potential")
    raise ConfigError(f"axes.{name}", "unknown axis parameter")


def realization_seed(master_seed: int, index: int) -> int:
    """Deterministic per-realization 64-bit seed derived by counter."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def point_master_seed(sweep_seed: int, grid_i: int, grid_j: int) -> int:
    """Deterministic per-grid-point master seed."""
    ss = np.random.SeedSequence(entropy=int(sweep_seed), spawn_key=(int(grid_i), int(grid_j)))
    return int(ss.generate_state(1, np.uint64)[0])


def _observe_chain(chain: ChainSpec, observables: Sequence[str], sizes: tuple[int, int]):
    """All requested raw observables for one fixed potential realization."""
    L1, L2 = sizes
    out: dict = {"flags": []}
    need_l1 = {"qfi", "gap", "elw"} & set(observables)
    sol1 = solve_chain(chain.with_size(L1)) if need_l1 else None
    if "qfi" in observables:
        sol2 = solve_chain(chain.with_size(L2))
        for tag, sol in (("L1", sol1), ("L2", sol2)):
            for ch in "xy":
                detail = qfi_channel_detailed(sol.g, ch)
                out[f"F_{ch}_{tag}"] = detail.f
                if not detail.sign_pattern_consistent:
                    out["flags"].append(f"qfi_sign_mismatch_{ch}_{tag}")
    if "gap" in observables:
        out["mass_gap"] = mass_gap(sol1)
    if "elw" in observables:
        if chain.boundary is Boundary.OPEN:
            out["elw_normalized"] = edge_localization_width(sol1).normalized_width
        else:
            out["flags"].append("elw_skipped_closed_boundary")
    if "nu" in observables:
        if math.isinf(chain.alpha):
            try:
                out["nu"] = transfer_matrix_invariant(
                    potential_values(chain.potential, L2), chain.Delta, chain.J)
            except UndecidedInvariantError:
                out["flags"].append("nu_undecided")
        else:
            out["flags"].append("nu_skipped_finite_alpha")
    return out


def disorder_average(base: ChainSpec, n_realizations: int, master_seed: int,
                     observables: Sequence[str] = ("qfi", "gap", "nu"),
                     sizes: tuple[int, int] = (100, 200),
                     beta_mode: str = "mean_f",
                     grid_i: int = 0, grid_j: int = 0) -> SweepRecord:
    """Average observables over disorder realizations of an Anderson chain.

    Realization seeds derive from ``master_seed`` by counter.  The QFI is
    averaged over realizations at each size first and the scaling exponent
    taken from the averaged values (``beta_mode="mean_f"``); the alternative
    mean of per-realization exponents is exposed for sensitivity checks.
    ``nu_bar`` is the mean of the per-realization invariant.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    if not isinstance(base.potential, Anderson):
        raise ValueError("disorder_average requires an Anderson potential")
    if beta_mode not in ("mean_f", "mean_beta"):
        raise ValueError(f"unknown beta_mode {beta_mode!r}")
    L1, L2 = sizes
    sums: dict = {}
    counts: dict = {}
    betas: dict = {"x": [], "y": []}
    flags: set = set()
    nu_values = []
    for r in range(n_realizations):
        seed_r = realization_seed(master_seed, r)
        chain_r = replace(base, potential=replace(base.potential, seed=seed_r))
        obs = _observe_chain(chain_r, observables, sizes)
        for key, value in obs.items():
            if key == "flags":
                flags.update(value)
            elif key == "nu":
                nu_values.append(value)
            elif value is not None:
                sums[key] = sums.get(key, 0.0) + value
                counts[key] = counts.get(key, 0) + 1
        if beta_mode == "mean_beta" and "qfi" in observables:
            for ch in "xy":
                betas[ch].append(two_point_slope(L1, obs[f"F_{ch}_L1"], L2, obs[f"F_{ch}_L2"]))
    means = {k: sums[k] / counts[k] for k in sums}
    beta_x = beta_y = beta = None
    if "qfi" in observables:
        if beta_mode == "mean_f":
            beta_x = two_point_slope(L1, means["F_x_L1"], L2, means["F_x_L2"])
            beta_y = two_point_slope(L1, means["F_y_L1"], L2, means["F_y_L2"])
        else:
            beta_x = float(np.mean(betas["x"]))
            beta_y = float(np.mean(betas["y"]))
        beta = max(beta_x, beta_y)
    nu_bar = float(np.mean(nu_values)) if nu_values else None
    return SweepRecord(
        grid_i=grid_i, grid_j=grid_j, chain=base, L1=L1, L2=L2,
        F_x_L1=means.get("F_x_L1"), F_y_L1=means.get("F_y_L1"),
        F_x_L2=means.get("F_x_L2"), F_y_L2=means.get("F_y_L2"),
        beta_x=beta_x, beta_y=beta_y, beta=beta,
        mass_gap=means.get("mass_gap"), elw_normalized=means.get("elw_normalized"),
        nu=None, nu_bar=nu_bar, n_realizations=n_realizations,
        master_seed=master_seed, flags=tuple(sorted(flags)),
    )


def compute_record(task) -> SweepRecord:
    """Compute one grid point; module-level so worker processes can import it."""
    (i, j, chain, observables, sizes, n_realizations, sweep_seed, beta_mode) = task
    if isinstance(chain.potential, Anderson):
        master = point_master_seed(sweep_seed, i, j)
        return disorder_average(chain, n_realizations, master, observables,
                                sizes, beta_mode, grid_i=i, grid_j=j)
    obs = _observe_chain(chain, observables, sizes)
    L1, L2 = sizes
    beta_x = beta_y = beta = None
    if "qfi" in observables:
        beta_x = two_point_slope(L1, obs["F_x_L1"], L2, obs["F_x_L2"])
        beta_y = two_point_slope(L1, obs["F_y_L1"], L2, obs["F_y_L2"])
        beta = max(beta_x, beta_y)
    return SweepRecord(
        grid_i=i, grid_j=j, chain=chain, L1=L1, L2=L2,
        F_x_L1=obs.get("F_x_L1"), F_y_L1=obs.get("F_y_L1"),
        F_x_L2=obs.get("F_x_L2"), F_y_L2=obs.get("F_y_L2"),
        beta_x=beta_x, beta_y=beta_y, beta=beta,
        mass_gap=obs.get("mass_gap"), elw_normalized=obs.get("elw_normalized"),
        nu=obs.get("nu"), nu_bar=None, n_realizations=None, master_seed=None,
        flags=tuple(sorted(obs["flags"])),
    )


def _write_csv(path: str, rows: dict[tuple[int, int], list[str]]) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for key in sorted(rows):
            writer.writerow(rows[key])
    os.replace(tmp, path)


def _read_checkpoint(path: str) -> dict[tuple[int, int], list[str]]:
    done: dict[tuple[int, int], list[str]] = {}
    if not os.path.exists(path):
        return done
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_COLUMNS:
            raise ConfigError("resume", f"checkpoint {path} has a different schema")
        for row in reader:
            if len(row) == len(CSV_COLUMNS):
                done[(int(row[0]), int(row[1]))] = row
    return done


def run_sweep(axes: tuple[SweepAxis, SweepAxis], base: ChainSpec,
              observables: Sequence[str] = ("qfi",),
              sizes: tuple[int, int] = (100, 200), *,
              workers: int = 1, n_realizations: int = 1, master_seed: int = 0,
              beta_mode: str = "mean_f", out: Optional[str] = None,
              resume: bool = False, progress=None) -> list[SweepRecord]:
    """Evaluate observables on the full 2-D grid, one record per point.

    Output ordering is row-major over (axis1, axis2) and independent of the
    worker count.  With ``out`` set, a checkpoint log ``<out>.partial`` grows
    as records complete and the final CSV is written atomically at the end;
    ``resume=True`` skips any grid point already present in the checkpoint.
    """
    ax1, ax2 = axes
    if ax1.name == ax2.name:
        raise ConfigError("axes", "the two axis parameters must be distinct")
    unknown = set(observables) - set(OBSERVABLES)
    if unknown:
        raise ConfigError(f"observables.{sorted(unknown)[0]}", "unknown observable")
    if not (len(sizes) == 2 and sizes[0] < sizes[1]):
        raise ConfigError("sizes", "need two ascending sizes (L1, L2)")

    checkpoint = f"{out}.partial" if out else None
    done: dict[tuple[int, int], list[str]] = {}
    if checkpoint and resume:
        done = _read_checkpoint(checkpoint)

    tasks = []
    for i, v1 in enumerate(ax1.values):
        for j, v2 in enumerate(ax2.values):
            if (i, j) in done:
                continue
            chain = apply_axis_value(apply_axis_value(base, ax1.name, v1), ax2.name, v2)
            tasks.append((i, j, chain, tuple(observables), tuple(sizes),
                          n_realizations, master_seed, beta_mode))

    rows = dict(done)
    records: dict[tuple[int, int], SweepRecord] = {}
    ckpt_fh = None
    if checkpoint:
        fresh = not (resume and os.path.exists(checkpoint))
        ckpt_fh = open(checkpoint, "a" if not fresh else "w",
                       encoding="utf-8", newline="")
        if fresh:
            csv.writer(ckpt_fh, lineterminator="\n").writerow(CSV_COLUMNS)
            ckpt_fh.flush()

    def _collect(rec: SweepRecord):
        records[(rec.grid_i, rec.grid_j)] = rec
        row = record_to_row(rec)
        rows[(rec.grid_i, rec.grid_j)] = row
        if ckpt_fh is not None:
            csv.writer(ckpt_fh, lineterminator="\n").writerow(row)
            ckpt_fh.flush()
        if progress is not None:
            progress(len(rows), len(ax1.values) * len(ax2.values))

    try:
        if workers <= 1:
            for task in tasks:
                _collect(compute_record(task))
        else:
            with Pool(processes=workers) as pool:
                for rec in pool.imap_unordered(compute_record, tasks, chunksize=1):
                    _collect(rec)
    finally:
        if ckpt_fh is not None:
            ckpt_fh.close()

    if out:
        _write_csv(out, rows)
        if os.path.exists(checkpoint):
            os.remove(checkpoint)

    ordered = [records[key] for key in sorted(records)]
    return ordered


# --- figure presets ---------------------------------------------------------

@dataclass(frozen=True)
class SweepPlan:
    """A named, fully parameterized sweep ready to run."""

    name: str
    axes: tuple[SweepAxis, SweepAxis]
    base: ChainSpec
    observables: tuple[str, ...]
    sizes: tuple[int, int]
    n_realizations: int = 1
    beta_mode: str = "mean_f"


PRESET_NAMES = ("fig1b", "fig4a", "fig6b", "fig8", "fig8a", "fig8b", "fig8c")


def build_preset(name: str, *, grid: Optional[int] = None,
                 realizations: Optional[int] = None,
                 boundary: Optional[Boundary] = None,
                 sizes: Optional[tuple[int, int]] = None) -> SweepPlan:
    """Construct a figure preset, optionally overriding grid density,
    realization count, boundary conditions or the size pair."""
    inf = math.inf
    if name == "fig1b":
        n = grid or 21
        plan = SweepPlan(
            name=name,
            axes=(SweepAxis.linear("mu", -2.0, 2.0, n),
                  SweepAxis.harper_frequencies(q=n - 1)),
            base=ChainSpec(L=2, J=1.0, Delta=0.25, alpha=inf,
                           boundary=Boundary.CLOSED_ANTIPERIODIC,
                           potential=Harper(mu=0.0, V=0.5, p=0, q=1, phi=0.0)),
            observables=("qfi", "nu", "gap"),
            sizes=(200, 400),
        )
    elif name == "fig4a":
        n = grid or 41
        plan = SweepPlan(
            name=name,
            axes=(SweepAxis.linear("V", 0.0, 3.0, n),
                  SweepAxis.linear("Delta", 0.0, 1.5, n)),
            base=ChainSpec(L=2, J=1.0, Delta=1.0, alpha=inf, boundary=Boundary.OPEN,
                           potential=AubryAndre(mu=0.0, V=0.0, phi=math.pi / 2)),
            observables=("qfi", "nu", "gap"),
            sizes=(100, 200),
        )
    elif name == "fig6b":
        n = grid or 41
        plan = SweepPlan(
            name=name,
            axes=(SweepAxis.linear("V", 0.0, 4.0, n),
                  SweepAxis("Delta", (0.0, 1.0))),
            base=ChainSpec(L=2, J=1.0, Delta=1.0, alpha=inf, boundary=Boundary.OPEN,
                           potential=Anderson(mu=0.0, V=0.0, seed=0)),
            observables=("qfi", "nu", "gap"),
            sizes=(100, 200),
            n_realizations=realizations or 500,
        )
    elif name in ("fig8", "fig8a", "fig8b", "fig8c"):
        n = grid or 21
        axes = (SweepAxis.linear("V", 0.0, 3.0, n),
                SweepAxis.linear("alpha", 0.0, 3.0, n))
        variant = "fig8b" if name == "fig8" else name
        if variant == "fig8a":
            plan = SweepPlan(
                name=name, axes=axes,
                base=ChainSpec(L=2, J=1.0, Delta=1.0, alpha=inf,
                               boundary=Boundary.CLOSED_ANTIPERIODIC,
                               potential=Harper(mu=0.0, V=0.0, p=72, q=117, phi=math.pi / 2)),
                observables=("qfi", "gap"), sizes=(234, 468),
            )
        elif variant == "fig8b":
            plan = SweepPlan(
                name=name, axes=axes,
                base=ChainSpec(L=2, J=1.0, Delta=1.0, alpha=inf, boundary=Boundary.OPEN,
                               potential=AubryAndre(mu=0.0, V=0.0, phi=math.pi / 2)),
                observables=("qfi", "gap"), sizes=(100, 200),
            )
        else:
            plan = SweepPlan(
                name=name, axes=axes,
                base=ChainSpec(L=2, J=1.0, Delta=1.0, alpha=inf,
                               boundary=Boundary.CLOSED_ANTIPERIODIC,
                               potential=Anderson(mu=0.0, V=0.0, seed=0)),
                observables=("qfi", "gap"), sizes=(100, 200),
                n_realizations=realizations or 500,
            )
    else:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {PRESET_NAMES}")

    if realizations is not None:
        plan = replace(plan, n_realizations=realizations)
    if boundary is not None:
        plan = replace(plan, base=plan.base.with_boundary(boundary))
    if sizes is not None:
        plan = replace(plan, sizes=tuple(sizes))
    return plan


def run_plan(plan: SweepPlan, *, workers: int = 1, master_seed: int = 0,
             out: Optional[str] = None, resume: bool = False,
             progress=None) -> list[SweepRecord]:
    return run_sweep(plan.axes, plan.base, plan.observables, plan.sizes,
                     workers=workers, n_realizations=plan.n_realizations,
                     master_seed=master_seed, beta_mode=plan.beta_mode,
                     out=out, resume=resume, progress=progress)
