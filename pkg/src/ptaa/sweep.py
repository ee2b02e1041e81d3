"""Resumable parameter sweeps persisted as JSON lines.

Each record is one parameter tuple::

    {"error": null, "inputs": {...}, "key": "(20, 0, 0.25)", "outputs": {...}, "schema": 1}

Records are appended as tuples finish. When the sweep ends the file is
rewritten in canonical order, so its bytes do not depend on the worker count
or on how many times the sweep was interrupted and resumed.
"""
from __future__ import annotations

import itertools
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .analysis import find_threshold
from .errors import NoCrossingError, ParameterError
from .lattice import LatticeConfig
from .twopotential import ScaledCut, single_thresholds

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

KINDS = {
    "threshold-vs-beta": ("N", "V0", "beta"),
    "indices-vs-beta": ("N", "V0", "beta"),
    "scaling-vs-N": ("beta", "V0", "N"),
    "boundary-grid": ("N", "beta1", "beta2", "x", "y"),
}
_INT_PARAMS = {"N"}


def fmt(value) -> str:
    """12-significant-digit rendering used for keys and text outputs."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".12g")


def canonical_key(values: Sequence) -> str:
    return "(" + ", ".join(fmt(v) for v in values) + ")"


def fraction_grid(denominator: int, lo: int = 1, hi: int | None = None) -> list[float]:
    """k / denominator for k = lo..hi (default 1..denominator-1), computed per index."""
    hi = denominator - 1 if hi is None else hi
    return [k / denominator for k in range(lo, hi + 1)]


def step_grid(step: float, upper: float = 1.0) -> list[float]:
    """Open grid (0, upper) with spacing ``step``; exact fractions when 1/step is whole."""
    if not 0 < step < upper:
        raise ParameterError(f"step must lie in (0, {upper})")
    den = round(upper / step)
    if abs(den * step - upper) <= 1e-9 * upper:
        return [upper * k / den for k in range(1, den)]
    out = []
    k = 1
    while k * step < upper:
        out.append(k * step)
        k += 1
    return out


@dataclass
class SweepJob:
    kind: str
    grid: dict[str, Sequence]
    output: Path
    workers: int = 1
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown sweep kind {self.kind!r}; choose from {sorted(KINDS)}")
        params = KINDS[self.kind]
        missing = [p for p in params if p not in self.grid]
        extra = [p for p in self.grid if p not in params]
        if missing or extra:
            raise ParameterError(f"{self.kind} grid needs exactly {params}; missing {missing}, unexpected {extra}")
        if any(len(list(self.grid[p])) == 0 for p in params):
            raise ParameterError("every grid axis must be non-empty")
        if int(self.workers) < 1:
            raise ParameterError("workers must be >= 1")
        self.output = Path(self.output)

    @property
    def params(self) -> tuple[str, ...]:
        return KINDS[self.kind]

    def tuples(self) -> list[tuple]:
        axes = []
        for p in self.params:
            cast = int if p in _INT_PARAMS else float
            axes.append([cast(v) for v in self.grid[p]])
        seen = {}
        for combo in itertools.product(*axes):
            seen.setdefault(canonical_key(combo), combo)
        return list(seen.values())


def _evaluate(kind: str, inputs: dict, options: dict) -> dict:
    gamma_max = options.get("gamma_max")
    if kind in ("threshold-vs-beta", "indices-vs-beta", "scaling-vs-N"):
        lattice = LatticeConfig(inputs["N"], options.get("J", 1.0))
        with_pairs = kind == "indices-vs-beta" or options.get("with_pairs", False)
        try:
            res = find_threshold(lattice, inputs["V0"], inputs["beta"], gamma_max, with_pairs=with_pairs)
        except NoCrossingError as exc:
            return {"gamma_pt": None, "unbroken_up_to": exc.gamma_max}
        out = {"gamma_pt": res.gamma_pt, "bracket": list(res.bracket)}
        if with_pairs:
            out["pairs"] = [list(p) for p in res.sorted_pairs()]
        return out
    # boundary-grid
    lattice = LatticeConfig(inputs["N"], options.get("J", 1.0))
    betas = (inputs["beta1"], inputs["beta2"])
    scales = single_thresholds(lattice, *betas)
    line = ScaledCut(lattice, betas, (0.0, 0.0), scales, "gamma1", inputs["y"])
    m = line.max_imag([inputs["x"]])
    return {"broken": bool(m[0] > line.tolerance([inputs["x"]])[0]), "max_abs_im": float(m[0])}


def _record(job: SweepJob, combo: tuple) -> dict:
    inputs = dict(zip(job.params, combo))
    rec = {"key": canonical_key(combo), "inputs": inputs, "outputs": None, "error": None, "schema": SCHEMA_VERSION}
    try:
        rec["outputs"] = _evaluate(job.kind, inputs, job.options)
    except Exception as exc:  # recorded, never aborts the sweep
        rec["error"] = f"{type(exc).__name__}: {exc}"
    return rec


def _dumps(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True)


def load_records(path: Path) -> tuple[dict[str, dict], bool]:
    """Records by key, and whether the file needed repair (torn final line)."""
    records = {}
    dirty = False
    if not path.exists():
        return records, dirty
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.endswith("\n"):
                dirty = True
                log.warning("%s:%d: dropping incomplete trailing record", path, lineno)
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                dirty = True
                log.warning("%s:%d: dropping unparseable record", path, lineno)
                continue
            records[rec["key"]] = rec
    return records, dirty


def _sort_key(params):
    def key(rec):
        return tuple(rec["inputs"][p] for p in params)

    return key


def _write_sorted(path: Path, records: list[dict]) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(_dumps(rec) + "\n")
    os.replace(tmp, path)


def run_sweep(
    job: SweepJob,
    *,
    limit: int | None = None,
    on_record: Callable[[dict], None] | None = None,
) -> list[dict]:
    """Evaluate every tuple missing from the output file; return all job records sorted.

    ``limit`` caps the number of new evaluations in this call; a later call
    resumes where it stopped.
    """
    path = job.output
    path.parent.mkdir(parents=True, exist_ok=True)
    existing, dirty = load_records(path)
    order = _sort_key(job.params)
    if dirty:
        _write_sorted(path, sorted(existing.values(), key=order))
    todo = [c for c in job.tuples() if canonical_key(c) not in existing]
    if limit is not None:
        todo = todo[: max(0, int(limit))]
    log.info("%s: %d tuples cached, %d to evaluate", path, len(existing), len(todo))

    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        def write(rec):
            fh.write(_dumps(rec) + "\n")
            fh.flush()
            existing[rec["key"]] = rec
            if on_record is not None:
                on_record(rec)

        if job.workers == 1:
            for combo in todo:
                write(_record(job, combo))
        else:
            with ThreadPoolExecutor(max_workers=int(job.workers)) as pool:
                futures = [pool.submit(_record, job, combo) for combo in todo]
                for fut in as_completed(futures):
                    write(fut.result())

    records = sorted(existing.values(), key=order)
    _write_sorted(path, records)
    keys = {canonical_key(c) for c in job.tuples()}
    return [r for r in records if r["key"] in keys]
