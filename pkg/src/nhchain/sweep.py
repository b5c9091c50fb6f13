"""Parameter-grid sweep engine with deterministic disorder averaging.

A sweep walks the Cartesian product of g, V and W grids; at each point
the requested quantities are evaluated for S evenly spaced disorder
phases theta0 = 2*pi*s/S and then averaged.  Evenly spaced phases stand
in for random draws so a rerun is bit-identical; output order follows
grid index, never thread completion order.  Individual point failures
(an ill-defined winding, a defective decomposition) become NaN rows
with the message in the warnings column, and the sweep moves on.

Resume: rerunning against an existing output file recomputes only grid
points with missing rows and appends those rows, keyed by the echoed
parameters, so an interrupted long sweep loses nothing.
"""

from __future__ import annotations

import csv
import json
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .model import ModelParams, build_fock_basis, build_many_body, build_single_particle
from .spectral import decompose, imag_fraction, ipr_per_state, static_observables
from .winding import winding_result

QUANTITIES = ("ipr_obc", "ipr_pbc", "f_im", "winding", "fock_ipr", "o_dw", "density")

CSV_COLUMNS = ("L", "N", "g", "V", "W", "theta0", "bc", "sample", "quantity", "value", "warnings")


def inclusive_range(start: float, stop: float, step: float) -> tuple:
    """Grid start, start+step, ..., stop (endpoint included up to rounding)."""
    if step <= 0:
        raise ValueError("step must be > 0")
    if stop < start:
        raise ValueError(f"empty range: stop {stop} < start {start}")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(np.round(start + step * np.arange(n), 12))


@dataclass(frozen=True)
class SweepSpec:
    base: ModelParams
    g_grid: Sequence[float] = ()
    v_grid: Sequence[float] = ()
    w_grid: Sequence[float] = ()
    theta0_samples: int = 1
    quantities: Sequence[str] = ("f_im",)
    out: Optional[str] = None
    fmt: str = "csv"

    def __post_init__(self) -> None:
        object.__setattr__(self, "g_grid", tuple(self.g_grid) or (self.base.g,))
        object.__setattr__(self, "v_grid", tuple(self.v_grid) or (self.base.V,))
        object.__setattr__(self, "w_grid", tuple(self.w_grid) or (self.base.W,))
        object.__setattr__(self, "quantities", tuple(self.quantities))
        if self.theta0_samples < 1:
            raise ValueError("theta0_samples must be >= 1")
        unknown = set(self.quantities) - set(QUANTITIES)
        if unknown:
            raise ValueError(f"unknown quantities: {sorted(unknown)}")
        needs_filling = {"fock_ipr", "o_dw"} & set(self.quantities)
        if needs_filling and not self.base.many_body:
            raise ValueError(f"{sorted(needs_filling)} require a particle number N")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"format must be 'csv' or 'json', got {self.fmt!r}")


@dataclass
class ResultRecord:
    L: int
    N: Optional[int]
    g: float
    V: float
    W: float
    theta0: Optional[float]   # None on theta0-averaged rows
    bc: str
    sample: str               # "0", "1", ... or "avg"
    quantity: str
    value: float
    warnings: str = ""

    @property
    def key(self) -> tuple:
        return (self.quantity, _num(self.g), _num(self.V), _num(self.W), self.sample)


def _num(x: float) -> str:
    return format(float(x), ".12g")


def _evaluate_sample(params: ModelParams, quantities: Sequence[str], basis) -> dict:
    """All requested quantities at one (grid point, theta0); never raises."""
    out = {}
    decomps = {}

    def get_decomp(bc):
        if bc not in decomps:
            p = replace(params, bc=bc, phi=0.0)
            H = build_many_body(p, basis) if p.many_body else build_single_particle(p)
            decomps[bc] = decompose(H)
        return decomps[bc]

    for q in quantities:
        error = ""
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                if q == "ipr_obc":
                    value = float(np.mean(ipr_per_state(get_decomp("obc"))))
                elif q == "ipr_pbc":
                    value = float(np.mean(ipr_per_state(get_decomp("pbc"))))
                elif q == "f_im":
                    value = imag_fraction(get_decomp(params.bc))
                elif q == "fock_ipr":
                    value = float(np.mean(ipr_per_state(get_decomp(params.bc))))
                elif q == "winding":
                    res = winding_result(replace(params, bc="pbc", phi=0.0),
                                         many_body=params.many_body)
                    value = float(res.nu)
                elif q == "o_dw":
                    value = static_observables(get_decomp(params.bc), basis).o_dw
                elif q == "density":
                    value = static_observables(get_decomp(params.bc), basis).density
            except Exception as exc:   # keep sweeping; the row carries the reason
                error = f"{type(exc).__name__}: {exc}"
                value = np.full(params.L, np.nan) if q == "density" else float("nan")
        notes = "; ".join([str(w.message) for w in caught] + ([error] if error else []))
        out[q] = (value, notes)
    return out


def _effective_bc(quantity: str, base_bc: str) -> str:
    """Boundary condition a quantity is actually computed under."""
    forced = {"ipr_obc": "obc", "ipr_pbc": "pbc", "winding": "pbc"}
    return forced.get(quantity, base_bc)


def _sample_rows(spec: SweepSpec, g: float, V: float, W: float, s: int, results: dict) -> list:
    base = spec.base
    theta0 = 2.0 * np.pi * s / spec.theta0_samples
    rows = []
    for q in spec.quantities:
        value, notes = results[q]
        bc = _effective_bc(q, base.bc)
        if q == "density":
            profile = value if not np.isscalar(value) else [value]
            for j, v in enumerate(np.atleast_1d(profile)):
                rows.append(ResultRecord(base.L, base.N, g, V, W, theta0, bc,
                                         str(s), f"density:{j}", float(v), notes))
        else:
            rows.append(ResultRecord(base.L, base.N, g, V, W, theta0, bc,
                                     str(s), q, float(value), notes))
    return rows


def _average_rows(spec: SweepSpec, g: float, V: float, W: float, sample_rows: list) -> list:
    by_quantity: dict = {}
    for r in sample_rows:
        by_quantity.setdefault(r.quantity, []).append(r)
    rows = []
    for q, group in by_quantity.items():   # insertion order mirrors the sample rows
        values = np.array([r.value for r in group], dtype=float)
        finite = values[np.isfinite(values)]
        mean = float(np.mean(finite)) if finite.size else float("nan")
        notes = "; ".join(sorted({r.warnings for r in group if r.warnings}))
        rows.append(ResultRecord(spec.base.L, spec.base.N, g, V, W, None,
                                 group[0].bc, "avg", q, mean, notes))
    return rows


def expected_keys(spec: SweepSpec, g: float, V: float, W: float) -> set:
    """Row keys one grid point must contribute (for resume bookkeeping)."""
    names = []
    for q in spec.quantities:
        if q == "density":
            names.extend(f"density:{j}" for j in range(spec.base.L))
        else:
            names.append(q)
    keys = set()
    for name in names:
        for s in range(spec.theta0_samples):
            keys.add((name, _num(g), _num(V), _num(W), str(s)))
        keys.add((name, _num(g), _num(V), _num(W), "avg"))
    return keys


def run_sweep(spec: SweepSpec, threads: int = 1, have: Optional[set] = None) -> Iterator[ResultRecord]:
    """Yield records grid point by grid point, in grid order.

    `have` is the set of row keys already on disk; points fully covered
    are skipped, partially covered points are recomputed and only the
    missing rows are yielded.
    """
    have = have or set()
    points = [(g, V, W) for g in spec.g_grid for V in spec.v_grid for W in spec.w_grid]
    todo = [pt for pt in points if not expected_keys(spec, *pt) <= have]

    basis = build_fock_basis(spec.base.L, spec.base.N) if spec.base.many_body else None

    def compute(task):
        g, V, W, s = task
        theta0 = 2.0 * np.pi * s / spec.theta0_samples
        params = replace(spec.base, g=g, V=V, W=W, theta0=theta0)
        return _evaluate_sample(params, spec.quantities, basis)

    tasks = [(g, V, W, s) for (g, V, W) in todo for s in range(spec.theta0_samples)]
    S = spec.theta0_samples
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = pool.map(compute, tasks)   # map preserves task order
        for i, (g, V, W) in enumerate(todo):
            point_rows = []
            for s in range(S):
                point_rows.extend(_sample_rows(spec, g, V, W, s, next(results)))
            rows = point_rows + _average_rows(spec, g, V, W, point_rows)
            for r in rows:
                if r.key not in have:
                    yield r


def write_records_csv(records: Iterable[ResultRecord], path: str, append: bool = False) -> int:
    new_file = not (append and os.path.exists(path) and os.path.getsize(path) > 0)
    n = 0
    with open(path, "a" if append else "w", newline="") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([
                r.L, "" if r.N is None else r.N, _num(r.g), _num(r.V), _num(r.W),
                "" if r.theta0 is None else format(r.theta0, ".17g"),
                r.bc, r.sample, r.quantity, format(r.value, ".17g"), r.warnings,
            ])
            n += 1
    return n


def read_records_csv(path: str) -> list:
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(ResultRecord(
                L=int(row["L"]), N=int(row["N"]) if row["N"] else None,
                g=float(row["g"]), V=float(row["V"]), W=float(row["W"]),
                theta0=float(row["theta0"]) if row["theta0"] else None,
                bc=row["bc"], sample=row["sample"], quantity=row["quantity"],
                value=float(row["value"]), warnings=row["warnings"],
            ))
    return records


def write_records_json(records: Iterable[ResultRecord], path: str) -> int:
    payload = [r.__dict__ for r in records]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
    return len(payload)


def read_records_json(path: str) -> list:
    with open(path) as fh:
        return [ResultRecord(**row) for row in json.load(fh)]


def run_sweep_to_file(spec: SweepSpec, threads: int = 1) -> tuple:
    """Run (or resume) a sweep into spec.out; returns (written, reused)."""
    if spec.out is None:
        raise ValueError("spec.out must be set")
    existing = []
    if os.path.exists(spec.out) and os.path.getsize(spec.out) > 0:
        existing = read_records_csv(spec.out) if spec.fmt == "csv" else read_records_json(spec.out)
    have = {r.key for r in existing}
    fresh = list(run_sweep(spec, threads=threads, have=have))
    if spec.fmt == "csv":
        write_records_csv(fresh, spec.out, append=bool(existing))
    else:
        write_records_json(existing + fresh, spec.out)
    return len(fresh), len(existing)
