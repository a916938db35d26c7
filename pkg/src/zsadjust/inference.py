"""Zero-shot prediction, Hit@k scoring, and hubness diagnostics.

A test instance x is mapped to semantic space as ``W @ x`` and the
unseen classes are ranked by cosine similarity to their (adjusted)
prototypes; ties break toward the smaller class id. Hit@k is the
fraction of instances whose true class appears in the top k.

The hubness diagnostic is the sample skewness of the 1-NN in-degree
over the candidate prototypes: how unevenly the prototypes attract
first-rank predictions. It is reported, never gated.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .adjustment import AdjustedPrototypes
from .data import PrototypeTable
from .errors import DataError
from .trainer import train


def _as_table(table_or_adjusted):
    if isinstance(table_or_adjusted, AdjustedPrototypes):
        return table_or_adjusted.table
    if isinstance(table_or_adjusted, PrototypeTable):
        return table_or_adjusted
    raise TypeError("expected a PrototypeTable or AdjustedPrototypes")


def skewness(values):
    """Population (Fisher-Pearson) skewness; 0 for a constant sample."""
    v = np.asarray(values, dtype=np.float64)
    centered = v - v.mean()
    m2 = float(np.mean(centered ** 2))
    if m2 <= 1e-24 * max(1.0, float(np.mean(v ** 2))):
        return 0.0
    m3 = float(np.mean(centered ** 3))
    return m3 / m2 ** 1.5


def _candidate_block(table):
    """Unseen candidates sorted by ascending class id, unit-normalized."""
    cand = table.restrict(keep_seen=False)
    order = np.argsort(cand.class_ids)
    ids = cand.class_ids[order]
    vecs = cand.vectors[:, order]
    return ids, vecs / np.linalg.norm(vecs, axis=0, keepdims=True)


def _rank_columns(model, features, table, direction="semantic"):
    """Ranking of unseen candidates for every feature column.

    Returns
    -------
    ids : ndarray, shape (c,)
        Candidate class ids, ascending.
    order : ndarray of int, shape (c, m)
        ``order[r, i]`` is the candidate index ranked r-th for column i.
    sims : ndarray, shape (c, m)
        Cosine similarities (candidate row, instance column); NaN
        columns mark instances whose mapped feature was the zero vector.
    """
    ids, cand = _candidate_block(table)
    if direction == "semantic":
        lhs = model.encode(features)          # compare W x to prototypes
        rhs = cand
    elif direction == "visual":
        lhs = np.asarray(features, dtype=np.float64)  # compare x to W^T p
        rhs = model.decode(cand)
        rhs_norm = np.linalg.norm(rhs, axis=0, keepdims=True)
        if np.any(rhs_norm == 0.0):
            raise DataError("a decoded prototype is the zero vector")
        rhs = rhs / rhs_norm
    else:
        raise ValueError("direction must be 'semantic' or 'visual'")
    if lhs.ndim == 1:
        lhs = lhs[:, None]
    norms = np.linalg.norm(lhs, axis=0, keepdims=True)
    zero = norms[0] == 0.0
    safe = np.where(norms == 0.0, 1.0, norms)
    sims = rhs.T @ (lhs / safe)
    sims[:, zero] = np.nan
    # Stable sort on descending similarity keeps the ascending-id layout
    # of the candidates as the tie-break.
    order = np.argsort(-sims, axis=0, kind="stable")
    return ids, order, sims


def predict(model, x, table, direction="semantic"):
    """Rank the unseen classes for one instance.

    Parameters
    ----------
    model : MappingModel
    x : ndarray, shape (d_v,)
    table : PrototypeTable or AdjustedPrototypes
        Only its unseen classes are candidates.
    direction : {"semantic", "visual"}
        Compare in semantic space (``W x`` vs prototypes, the default)
        or in visual space (``x`` vs decoded prototypes ``W^T p``).

    Returns
    -------
    list of (class id, similarity), best first; exact ties are ordered
    by ascending class id.

    Raises
    ------
    DataError
        If the mapped instance is the zero vector (cosine undefined).
    """
    table = _as_table(table)
    x = np.asarray(x, dtype=np.float64).ravel()
    ids, order, sims = _rank_columns(model, x[:, None], table, direction)
    if np.isnan(sims[0, 0]):
        raise DataError("mapped instance is the zero vector; cannot rank")
    return [(int(ids[j]), float(sims[j, 0])) for j in order[:, 0]]


@dataclass(frozen=True)
class EvalReport:
    """Hit@k accuracies plus per-class and hubness diagnostics."""

    hit_at: dict
    per_class_accuracy: dict
    hubness_skewness: float
    instance_count: int
    zero_mapped: int
    timing_ms: float

    def to_dict(self):
        return {
            "hit_at": {str(k): v for k, v in self.hit_at.items()},
            "per_class_accuracy": {
                str(c): v for c, v in self.per_class_accuracy.items()
            },
            "hubness_skewness": self.hubness_skewness,
            "instance_count": self.instance_count,
            "zero_mapped": self.zero_mapped,
            "timing_ms": self.timing_ms,
        }


def evaluate(model, unseen, table, ks=(1, 5), direction="semantic"):
    """Score zero-shot predictions over a dataset of unseen-class instances.

    Parameters
    ----------
    model : MappingModel
    unseen : LabeledDataset
        Instances of unseen classes only; every label must have an
        unseen prototype in ``table``.
    table : PrototypeTable or AdjustedPrototypes
    ks : iterable of int
        Which Hit@k accuracies to report; a k at or beyond the number of
        candidates scores every non-degenerate instance as a hit.

    Returns
    -------
    EvalReport
        Instances whose mapped feature is the zero vector are counted
        as misses at every k and reported in ``zero_mapped``;
        ``per_class_accuracy`` is Hit@1 per class.
    """
    tic = time.perf_counter()
    table = _as_table(table)
    if unseen.instance_count == 0:
        raise DataError("cannot evaluate an empty dataset")
    ids, order, sims = _rank_columns(model, unseen.features, table, direction)
    id_to_cand = {int(c): i for i, c in enumerate(ids)}
    missing = sorted(set(unseen.labels.tolist()) - set(ids.tolist()))
    if missing:
        raise DataError(f"labels without an unseen prototype: {missing}")

    m = unseen.instance_count
    true_idx = np.array([id_to_cand[int(c)] for c in unseen.labels])
    zero = np.isnan(sims[0])
    # rank_of[i] = position of the true class in instance i's ranking
    positions = np.empty_like(order)
    np.put_along_axis(positions, order, np.arange(ids.size)[:, None], axis=0)
    rank_of = positions[true_idx, np.arange(m)]

    hit_at = {}
    for k in sorted(set(int(k) for k in ks)):
        if k < 1:
            raise ValueError("k must be >= 1")
        hits = (rank_of < k) & ~zero
        hit_at[k] = float(np.mean(hits))

    top1 = (rank_of == 0) & ~zero
    per_class = {}
    for cid in np.unique(unseen.labels):
        mask = unseen.labels == cid
        per_class[int(cid)] = float(np.mean(top1[mask]))

    first = order[0, ~zero]
    in_degree = np.bincount(first, minlength=ids.size)
    return EvalReport(
        hit_at=hit_at,
        per_class_accuracy=per_class,
        hubness_skewness=skewness(in_degree),
        instance_count=m,
        zero_mapped=int(np.count_nonzero(zero)),
        timing_ms=(time.perf_counter() - tic) * 1e3,
    )


def sweep_k(seen, unseen, table, hp, k_values, direction="semantic",
            **train_kwargs):
    """Hit@1 as a function of the neighbor count k.

    Trains and evaluates from scratch for each k with everything else
    held fixed; returns ``{k: hit_at_1}``.
    """
    out = {}
    for k in k_values:
        hp_k = replace(hp, k=int(k))
        model, adjusted, _ = train(seen, table, hp_k, **train_kwargs)
        report = evaluate(model, unseen, adjusted, ks=(1,),
                          direction=direction)
        out[int(k)] = report.hit_at[1]
    return out
