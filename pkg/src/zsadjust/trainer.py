"""Alternating optimization: closed-form weight solves interleaved with
prototype adjustment.

The schedule is:

1. Initial solve with ``alpha = 0`` and the original prototypes (class
   centroids depend on W and are undefined before a first weight
   estimate exists).
2. Per iteration: adjust seen prototypes, adjust unseen prototypes,
   recompute per-instance centroids O from the current W, then re-solve
   the full objective with the adjusted seen prototypes.

The loop stops after ``hp.iterations`` rounds or as soon as the relative
weight change ``||dW||_F / ||W||_F`` drops below ``hp.tol``. Each
completed iteration appends a trace record. Note that the objective is
not guaranteed to decrease across iterations: prototype adjustment
changes the objective itself between solves.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, replace

import numpy as np

from .adjustment import (
    AdjustedPrototypes,
    adjust_seen,
    adjust_unseen,
    untouched_provenance,
)
from .data import SynthSpec, split, synthesize
from .errors import DataError, SolverError
from .linalg import DEFAULT_PIVOT_FLOOR
from .mapping import (
    class_centroids,
    expand_per_instance,
    objective,
    solve_weights,
)


@dataclass(frozen=True)
class IterationRecord:
    """Observability for one completed alternating iteration."""

    iteration: int
    objective: float
    w_delta: float          # ||W_new - W_old||_F / ||W_new||_F
    seen_shift: float       # ||seen prototypes - previous iterate||_F
    unseen_shift: float
    ms: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TrainingTrace:
    records: tuple

    def __len__(self):
        return len(self.records)


def train(seen, table, hp, unseen_neighbors="adjusted",
          pivot_floor=DEFAULT_PIVOT_FLOOR, ridge_on_failure=False):
    """Run the alternating loop on the seen-class dataset.

    Parameters
    ----------
    seen : LabeledDataset
        Seen-class instances only (see :func:`zsadjust.data.split`).
    table : PrototypeTable
        Original prototypes for all classes, seen and unseen.
    hp : HyperParams
    unseen_neighbors : {"adjusted", "original"}
        Whether the unseen-prototype blend draws its seen neighbors from
        that iteration's adjusted seen prototypes (default) or from the
        original table.
    pivot_floor, ridge_on_failure
        Passed through to the weight solver.

    Returns
    -------
    (MappingModel, AdjustedPrototypes, TrainingTrace)
    """
    if seen.instance_count == 0:
        raise DataError("cannot train on an empty seen dataset")
    if unseen_neighbors not in ("adjusted", "original"):
        raise ValueError("unseen_neighbors must be 'adjusted' or 'original'")

    labels = seen.labels
    proto0 = expand_per_instance(table, labels)
    zeros = np.zeros_like(proto0)

    # Initial weights: cycle objective only, hard constraint relaxed,
    # no centroid term yet.
    hp0 = replace(hp, alpha=0.0)
    try:
        model = solve_weights(seen, proto0, zeros, hp0,
                              pivot_floor=pivot_floor,
                              ridge_on_failure=ridge_on_failure)
    except SolverError as exc:
        raise SolverError(f"initial solve failed: {exc}") from exc

    current = AdjustedPrototypes(table, untouched_provenance(table))
    records = []
    prev_vectors = table.vectors

    for it in range(1, hp.iterations + 1):
        tic = time.perf_counter()
        try:
            step_seen = adjust_seen(table, model, seen, hp)
            neighbors = table if unseen_neighbors == "original" else None
            adjusted = adjust_unseen(step_seen.table, hp, neighbors=neighbors)
            # Seen-class provenance comes from the seen step, unseen from
            # the unseen step.
            provenance = dict(adjusted.provenance)
            for cid in table.seen_ids:
                provenance[int(cid)] = step_seen.provenance[int(cid)]
            current = AdjustedPrototypes(adjusted.table, provenance)

            proto = expand_per_instance(current.table, labels)
            centroids = class_centroids(model, seen)
            new_model = solve_weights(seen, proto, centroids, hp,
                                      pivot_floor=pivot_floor,
                                      ridge_on_failure=ridge_on_failure)
        except SolverError as exc:
            raise SolverError(f"iteration {it}: {exc}") from exc

        obj = objective(new_model, seen, proto, centroids, hp)
        delta = float(
            np.linalg.norm(new_model.weights - model.weights, "fro")
            / max(np.linalg.norm(new_model.weights, "fro"), 1e-300)
        )
        vecs = current.table.vectors
        seen_mask = current.table.seen
        seen_shift = float(np.linalg.norm(
            vecs[:, seen_mask] - prev_vectors[:, seen_mask], "fro"))
        unseen_shift = float(np.linalg.norm(
            vecs[:, ~seen_mask] - prev_vectors[:, ~seen_mask], "fro"))
        ms = (time.perf_counter() - tic) * 1e3
        records.append(IterationRecord(it, obj, delta, seen_shift,
                                       unseen_shift, ms))

        model = new_model
        prev_vectors = vecs
        if delta < hp.tol:
            break

    return model, current, TrainingTrace(tuple(records))


@dataclass(frozen=True)
class BenchmarkResult:
    repeats: int
    median_ms: float
    max_ms: float
    runs_ms: tuple

    def to_dict(self):
        return {
            "repeats": self.repeats,
            "median_ms": self.median_ms,
            "max_ms": self.max_ms,
            "runs_ms": list(self.runs_ms),
        }


def benchmark_training(data, hp, repeats=1, **train_kwargs):
    """Median and max wall-clock of ``train`` over ``repeats`` runs.

    ``data`` is either a SynthSpec (synthesized once, outside the timed
    region) or a ``(seen_dataset, prototype_table)`` pair.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if isinstance(data, SynthSpec):
        dataset, table, _ = synthesize(data)
        seen, _ = split(dataset, table)
    else:
        seen, table = data

    runs = []
    for _ in range(repeats):
        tic = time.perf_counter()
        train(seen, table, hp, **train_kwargs)
        runs.append((time.perf_counter() - tic) * 1e3)
    return BenchmarkResult(
        repeats=repeats,
        median_ms=float(np.median(runs)),
        max_ms=float(max(runs)),
        runs_ms=tuple(runs),
    )
