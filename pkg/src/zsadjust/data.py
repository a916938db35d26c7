"""Datasets, prototype tables, on-disk formats, and synthetic data.

Conventions
-----------
Instances are matrix *columns*: a feature matrix is (d_v, m) with one
column per instance, and a prototype matrix is (d_s, n_classes) with one
column per class. Labels are integer class ids, one per instance column.

On-disk formats
---------------
* Binary matrix: magic bytes ``ZSRM``, u32 little-endian rows, u32
  little-endian cols, then rows*cols float64 little-endian, row-major.
* CSV matrix: one row per line, comma-separated decimal floats, no header.
* Labels: one base-10 integer per line, line i = class of column i.
* Prototypes: a binary matrix (d_s, n_classes) plus a sidecar text file
  with one ``<class id> <S|U>`` line per column.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .linalg import as_matrix

MAGIC = b"ZSRM"
_HEADER = struct.Struct("<4sII")


@dataclass(frozen=True)
class LabeledDataset:
    """Feature columns with one integer class id per column.

    Attributes
    ----------
    features : ndarray, shape (d_v, m)
    labels : ndarray of int, shape (m,)
    class_count : int
        Upper bound (exclusive) on class ids.
    """

    features: np.ndarray
    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        feats = as_matrix(self.features, "features")
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.shape[0] != feats.shape[1]:
            raise DataError(
                f"expected one label per instance column: "
                f"{labels.shape[0]} labels for {feats.shape[1]} columns"
            )
        if labels.size and labels.min() < 0:
            raise DataError("labels must be non-negative class ids")
        if labels.size and labels.max() >= self.class_count:
            raise DataError(
                f"label {labels.max()} out of range for "
                f"class_count={self.class_count}"
            )
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    @property
    def feature_dim(self):
        return self.features.shape[0]

    @property
    def instance_count(self):
        return self.features.shape[1]


@dataclass(frozen=True)
class PrototypeTable:
    """One semantic vector per class, each tagged seen or unseen.

    Attributes
    ----------
    class_ids : ndarray of int, shape (n,)
        Unique class ids, one per column of ``vectors``.
    vectors : ndarray, shape (d_s, n)
    seen : ndarray of bool, shape (n,)
        True where the class has training instances.
    """

    class_ids: np.ndarray
    vectors: np.ndarray
    seen: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.class_ids, dtype=np.int64)
        vecs = as_matrix(self.vectors, "prototypes")
        seen = np.asarray(self.seen, dtype=bool)
        if ids.ndim != 1 or seen.shape != ids.shape or vecs.shape[1] != ids.shape[0]:
            raise DataError("class_ids, vectors and seen tags must align")
        if ids.size == 0:
            raise DataError("prototype table must contain at least one class")
        if np.unique(ids).size != ids.size:
            raise DataError("duplicate class id in prototype table")
        norms = np.linalg.norm(vecs, axis=0)
        if np.any(norms == 0.0):
            zero_id = ids[int(np.argmin(norms))]
            raise DataError(
                f"prototype of class {zero_id} is the zero vector "
                f"(similarity would be undefined)"
            )
        object.__setattr__(self, "class_ids", ids)
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "seen", seen)

    @property
    def semantic_dim(self):
        return self.vectors.shape[0]

    @property
    def seen_ids(self):
        return self.class_ids[self.seen]

    @property
    def unseen_ids(self):
        return self.class_ids[~self.seen]

    def column_of(self, class_id):
        """Column index of ``class_id``; raises DataError if absent."""
        hits = np.flatnonzero(self.class_ids == class_id)
        if hits.size == 0:
            raise DataError(f"class {class_id} has no prototype")
        return int(hits[0])

    def vector(self, class_id):
        return self.vectors[:, self.column_of(class_id)].copy()

    def with_vectors(self, vectors):
        """Copy of the table with replaced prototype columns."""
        return PrototypeTable(self.class_ids.copy(), vectors, self.seen.copy())

    def restrict(self, keep_seen=None):
        """Sub-table of only the seen (True) or unseen (False) classes."""
        mask = self.seen if keep_seen else ~self.seen
        if not mask.any():
            kind = "seen" if keep_seen else "unseen"
            raise DataError(f"prototype table has no {kind} classes")
        return PrototypeTable(
            self.class_ids[mask], self.vectors[:, mask], self.seen[mask]
        )


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic zero-shot dataset.

    Class prototypes are sampled on the unit sphere in d_s dimensions and
    a ground-truth linear map G (d_v, d_s) is sampled once, with entries
    scaled by 1/sqrt(d_v) so clean features have roughly unit norm; an
    instance of class c is ``G @ p_c`` plus isotropic Gaussian noise.
    Instances of unseen classes are generated from a per-class perturbed
    copy of G (entries jittered with std ``shift_sigma``), which
    manufactures a controllable, systematic displacement of unseen-class
    features. With d_s above ``seen_count`` the seen prototypes span only
    a subspace of semantic space, reproducing the geometry that makes
    mapped unseen instances drift toward seen-class territory.
    """

    d_v: int = 50
    d_s: int = 20
    seen_count: int = 40
    unseen_count: int = 10
    per_class: int = 25
    noise_sigma: float = 0.0
    shift_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("d_v", "d_s", "seen_count", "unseen_count", "per_class"):
            if getattr(self, name) < 1:
                raise DataError(f"{name} must be a positive integer")
        if self.noise_sigma < 0 or self.shift_sigma < 0:
            raise DataError("noise_sigma and shift_sigma must be >= 0")
        if self.d_s > self.d_v:
            warnings.warn(
                "semantic dimension exceeds visual dimension; the linear "
                "generator cannot be injective",
                stacklevel=2,
            )


# ---------------------------------------------------------------------------
# matrix / label / prototype IO


def save_matrix(path, a, fmt="binary"):
    """Write a matrix as ``binary`` (ZSRM) or ``csv``."""
    a = as_matrix(a, "matrix")
    if fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, a.shape[0], a.shape[1]))
            fh.write(a.astype("<f8", copy=False).tobytes(order="C"))
    elif fmt == "csv":
        # %.17g round-trips float64 exactly through decimal text.
        with open(path, "w") as fh:
            for row in a:
                fh.write(",".join(f"{x:.17g}" for x in row))
                fh.write("\n")
    else:
        raise ValueError(f"unknown matrix format: {fmt!r}")


def load_matrix(path, fmt=None):
    """Read a matrix written by :func:`save_matrix`.

    ``fmt`` is ``"binary"``, ``"csv"``, or None to sniff the magic bytes.
    Non-finite entries are rejected with their location.
    """
    if fmt is None:
        with open(path, "rb") as fh:
            head = fh.read(4)
        fmt = "binary" if head == MAGIC else "csv"
    if fmt == "binary":
        return _load_binary(path)
    if fmt == "csv":
        return _load_csv(path)
    raise ValueError(f"unknown matrix format: {fmt!r}")


def _load_binary(path):
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise DataError(f"{path}: truncated header")
        magic, rows, cols = _HEADER.unpack(header)
        if magic != MAGIC:
            raise DataError(f"{path}: bad magic bytes {magic!r}")
        body = fh.read()
    expected = rows * cols * 8
    if len(body) != expected:
        raise DataError(
            f"{path}: payload is {len(body)} bytes but header declares "
            f"{rows}x{cols} ({expected} bytes)"
        )
    a = np.frombuffer(body, dtype="<f8").reshape(rows, cols)
    return _check_finite(a, path)


def _load_csv(path):
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = [float(tok) for tok in line.split(",")]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: unparsable value") from exc
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataError(
                    f"{path}:{lineno}: expected {width} columns, got {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: empty matrix file")
    return _check_finite(np.array(rows, dtype=np.float64), path)


def _check_finite(a, path):
    if not np.isfinite(a).all():
        bad = np.argwhere(~np.isfinite(a))[0]
        raise DataError(
            f"{path}: non-finite entry at row {bad[0]}, col {bad[1]}"
        )
    return np.ascontiguousarray(a)


def save_labels(path, labels):
    with open(path, "w") as fh:
        for lab in np.asarray(labels, dtype=np.int64):
            fh.write(f"{lab}\n")


def load_labels(path):
    labels = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                labels.append(int(line, 10))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: not an integer label") from exc
    return np.array(labels, dtype=np.int64)


def save_prototypes(table, matrix_path, partition_path, fmt="binary"):
    """Write a prototype table as matrix file + ``<id> <S|U>`` sidecar."""
    save_matrix(matrix_path, table.vectors, fmt=fmt)
    with open(partition_path, "w") as fh:
        for cid, seen in zip(table.class_ids, table.seen):
            fh.write(f"{cid} {'S' if seen else 'U'}\n")


def load_prototypes(matrix_path, partition_path):
    vectors = load_matrix(matrix_path)
    ids = []
    seen = []
    with open(partition_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2 or parts[1] not in ("S", "U"):
                raise DataError(
                    f"{partition_path}:{lineno}: expected '<id> <S|U>'"
                )
            try:
                ids.append(int(parts[0], 10))
            except ValueError as exc:
                raise DataError(
                    f"{partition_path}:{lineno}: bad class id"
                ) from exc
            seen.append(parts[1] == "S")
    if len(ids) != vectors.shape[1]:
        raise DataError(
            f"{partition_path}: {len(ids)} partition lines for "
            f"{vectors.shape[1]} prototype columns"
        )
    return PrototypeTable(np.array(ids), vectors, np.array(seen))


# ---------------------------------------------------------------------------
# splitting and synthesis


def split(dataset, table):
    """Partition instances into (seen, unseen) datasets by class tag.

    Every label must have a prototype, and the seen side must be
    nonempty (there is nothing to train on otherwise).
    """
    present = np.unique(dataset.labels)
    known = set(table.class_ids.tolist())
    missing = [int(c) for c in present if int(c) not in known]
    if missing:
        raise DataError(f"labels without a prototype: {missing}")
    col = {int(c): i for i, c in enumerate(table.class_ids)}
    seen_mask = np.array(
        [table.seen[col[int(c)]] for c in dataset.labels], dtype=bool
    )
    if not seen_mask.any():
        raise DataError("seen partition is empty: nothing to train on")
    seen_ds = LabeledDataset(
        dataset.features[:, seen_mask], dataset.labels[seen_mask],
        dataset.class_count,
    )
    unseen_ds = LabeledDataset(
        dataset.features[:, ~seen_mask], dataset.labels[~seen_mask],
        dataset.class_count,
    )
    return seen_ds, unseen_ds


def synthesize(spec):
    """Generate (LabeledDataset, PrototypeTable, ground_truth_map).

    Deterministic in ``spec.seed``. Classes 0..seen_count-1 are seen,
    the remaining ``unseen_count`` ids are unseen; every class
    contributes ``per_class`` instance columns, grouped by class.
    """
    rng = np.random.default_rng(spec.seed)
    n_classes = spec.seen_count + spec.unseen_count

    protos = rng.standard_normal((spec.d_s, n_classes))
    protos /= np.linalg.norm(protos, axis=0, keepdims=True)
    gmap = rng.standard_normal((spec.d_v, spec.d_s)) / np.sqrt(spec.d_v)

    m = n_classes * spec.per_class
    features = np.empty((spec.d_v, m))
    labels = np.repeat(np.arange(n_classes), spec.per_class)
    for c in range(n_classes):
        gen = gmap
        if c >= spec.seen_count and spec.shift_sigma > 0:
            gen = gmap + spec.shift_sigma * rng.standard_normal(gmap.shape)
        block = slice(c * spec.per_class, (c + 1) * spec.per_class)
        clean = gen @ protos[:, c]
        noise = 0.0
        if spec.noise_sigma > 0:
            noise = spec.noise_sigma * rng.standard_normal(
                (spec.d_v, spec.per_class)
            )
        features[:, block] = clean[:, None] + noise

    table = PrototypeTable(
        np.arange(n_classes),
        protos,
        np.arange(n_classes) < spec.seen_count,
    )
    dataset = LabeledDataset(features, labels, n_classes)
    return dataset, table, gmap
