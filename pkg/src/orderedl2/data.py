"""Datasets: synthetic generation, LIBSVM ingestion, splitting and evaluation.

Random numbers come from ``numpy.random.default_rng(seed)`` (PCG64 bit
generator, ziggurat normal variates). A synthetic draw consumes, in order,
the ``n * p`` entries of ``A`` (row-major), the ``p`` true coefficients and
then the ``n`` noise values.
"""

import hashlib
from collections.abc import Mapping
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import DimensionMismatch, LibsvmIndexError, ParseError, UnknownLabel


@dataclass(frozen=True)
class Dataset:
    """Dense design matrix ``A`` (n x p) with response ``b`` (n,).

    ``column_scale`` holds the norms the raw columns were divided by when
    ``normalized`` is set.
    """

    A: np.ndarray
    b: np.ndarray
    feature_names: list = None
    normalized: bool = False
    column_scale: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.ndim != 2 or b.ndim != 1 or A.shape[0] != b.shape[0]:
            raise DimensionMismatch(f"A {A.shape} and b {b.shape} are inconsistent")
        if self.feature_names is not None and len(self.feature_names) != A.shape[1]:
            raise DimensionMismatch("feature_names length does not match the column count")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def p(self):
        return self.A.shape[1]

    def fingerprint(self):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.A).tobytes())
        h.update(np.ascontiguousarray(self.b).tobytes())
        return {"n": self.n, "p": self.p, "sha256": h.hexdigest()}

    def normalize(self):
        """Scale columns to unit l2 norm (idempotent)."""
        A, norms = normalize_columns(self.A)
        scale = norms if self.column_scale is None else self.column_scale * norms
        return replace(self, A=A, normalized=True, column_scale=scale)


def normalize_columns(A):
    """Return ``(A / norms, norms)``; all-zero columns raise ``ValueError``."""
    A = np.asarray(A, dtype=float)
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0.0):
        bad = np.flatnonzero(norms == 0.0)
        raise ValueError(f"cannot normalize {bad.size} all-zero column(s), first at {bad[0]}")
    return A / norms, norms


@dataclass(frozen=True)
class SynthSpec:
    """Synthetic regression problem; variances are N(mean, variance) readings."""

    n: int
    p: int
    coef_variance: float = 0.02
    noise_variance: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be >= 1")
        if not self.coef_variance > 0:
            raise ValueError("coef_variance must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")


def generate_synthetic(spec):
    """Draw ``(Dataset, x_true)`` with unit-norm columns and ``b = A x_true + v``."""
    rng = np.random.default_rng(spec.seed)
    A = rng.standard_normal((spec.n, spec.p))
    A, norms = normalize_columns(A)
    x0 = rng.standard_normal(spec.p) * np.sqrt(spec.coef_variance)
    b = A @ x0
    if spec.noise_variance > 0:
        b = b + rng.standard_normal(spec.n) * np.sqrt(spec.noise_variance)
    return Dataset(A, b, normalized=True, column_scale=norms), x0


def _parse_libsvm_lines(lines):
    labels, rows, max_idx = [], [], 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            labels.append(float(parts[0]))
        except ValueError:
            raise ParseError(f"bad label {parts[0]!r}", lineno) from None
        idx, vals, prev = [], [], 0
        for tok in parts[1:]:
            key, sep, val = tok.partition(":")
            if not sep:
                raise ParseError(f"expected index:value, got {tok!r}", lineno)
            if key == "qid":
                continue
            try:
                j = int(key)
                x = float(val)
            except ValueError:
                raise ParseError(f"bad feature {tok!r}", lineno) from None
            if j < 1:
                raise LibsvmIndexError(f"feature index must be >= 1, got {j}", lineno)
            if j <= prev:
                raise LibsvmIndexError(f"feature index {j} not ascending after {prev}", lineno)
            prev = j
            idx.append(j - 1)
            vals.append(x)
        max_idx = max(max_idx, prev)
        rows.append((idx, vals))
    return labels, rows, max_idx


def load_libsvm(path, n_features=None):
    """Read a LIBSVM text file into a dense, unnormalized :class:`Dataset`.

    Lines are ``label idx:val ...`` with 1-based, strictly ascending indices.
    Absent entries are zero. The column count is the largest index seen
    unless ``n_features`` is given.
    """
    with open(path) as fh:
        labels, rows, max_idx = _parse_libsvm_lines(fh)
    if not rows:
        raise ParseError(f"{path}: no data lines")
    p = max_idx if n_features is None else int(n_features)
    if max_idx > p:
        raise LibsvmIndexError(f"index {max_idx} exceeds n_features={p}")
    if p < 1:
        raise ParseError(f"{path}: no features")
    A = np.zeros((len(rows), p))
    for i, (idx, vals) in enumerate(rows):
        A[i, idx] = vals
    return Dataset(A, np.asarray(labels))


def write_libsvm(path, d):
    with open(path, "w") as fh:
        for row, label in zip(d.A, d.b):
            nz = np.flatnonzero(row)
            feats = " ".join(f"{j + 1}:{row[j]:.17g}" for j in nz)
            fh.write(f"{label:.17g} {feats}".rstrip() + "\n")


def write_dataset_csv(path, d):
    header = ",".join(["b"] + [f"a_{j}" for j in range(1, d.p + 1)])
    np.savetxt(path, np.column_stack([d.b, d.A]), delimiter=",", header=header,
               comments="", fmt="%.17g")


def read_dataset_csv(path, normalized=None):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    A, b = data[:, 1:], data[:, 0]
    if normalized is None:
        normalized = bool(np.allclose(np.linalg.norm(A, axis=0), 1.0, rtol=0, atol=1e-10))
    return Dataset(A, b, normalized=normalized)


def load_dataset(path, normalize=True):
    """Load ``.csv`` (dataset export) or anything else as LIBSVM."""
    path = str(path)
    if path.endswith(".csv"):
        d = read_dataset_csv(path)
    else:
        d = load_libsvm(path)
    if normalize and not d.normalized:
        d = d.normalize()
    return d


def write_vector_csv(path, x, name):
    np.savetxt(path, np.asarray(x).reshape(-1, 1), header=name, comments="", fmt="%.17g")


def read_vector_csv(path):
    return np.loadtxt(path, skiprows=1, ndmin=1)


def map_labels_binary(raw_labels, negative_class, positive_class):
    """Map two class labels to -1 / +1."""
    out = np.empty(len(raw_labels))
    for i, lab in enumerate(raw_labels):
        if lab == negative_class:
            out[i] = -1.0
        elif lab == positive_class:
            out[i] = 1.0
        else:
            raise UnknownLabel(f"label {lab!r} at position {i} is neither "
                               f"{negative_class!r} nor {positive_class!r}")
    return out


@dataclass(frozen=True)
class SplitSpec:
    """Seeded train/test split.

    ``class_counts`` maps label -> number of training rows of that class
    (stratified mode); the counts must sum to ``train_n``.
    """

    train_n: int
    seed: int = 0
    class_counts: Mapping = None
    normalize: bool = True


def split_indices(n, spec, labels=None):
    """``(train_idx, test_idx)`` for a seeded shuffle-then-prefix split."""
    if not 0 < spec.train_n < n:
        raise ValueError(f"train_n must lie in (0, {n}), got {spec.train_n}")
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(n)
    if spec.class_counts is None:
        return np.sort(order[:spec.train_n]), np.sort(order[spec.train_n:])
    if sum(spec.class_counts.values()) != spec.train_n:
        raise ValueError("class_counts must sum to train_n")
    labels = np.asarray(labels)
    train = []
    for lab, cnt in sorted(spec.class_counts.items()):
        members = order[labels[order] == lab]
        if cnt > members.size:
            raise ValueError(f"class {lab!r} has only {members.size} rows, {cnt} requested")
        train.append(members[:cnt])
    train = np.sort(np.concatenate(train))
    test = np.setdiff1d(np.arange(n), train)
    return train, test


def split_train_test(d, spec):
    """Split rows; columns are rescaled by the training-set norms.

    ``d`` should be unnormalized. When ``spec.normalize`` is set, the training
    columns get unit norm and the test columns are divided by the same norms.
    """
    tr, te = split_indices(d.n, spec, d.b)
    A_tr, A_te = d.A[tr], d.A[te]
    scale = None
    if spec.normalize:
        A_tr, scale = normalize_columns(A_tr)
        A_te = A_te / scale
    train = Dataset(A_tr, d.b[tr], d.feature_names, spec.normalize, scale)
    test = Dataset(A_te, d.b[te], d.feature_names, False, scale)
    return train, test


def evaluate(coefficients, test):
    """Mean squared error and sign misclassification count (``sign(0) = +1``)."""
    x = np.asarray(coefficients, dtype=float)
    if x.shape != (test.p,):
        raise DimensionMismatch(f"coefficients have shape {x.shape}, expected ({test.p},)")
    pred = test.A @ x
    resid = pred - test.b
    labels = np.where(pred >= 0.0, 1.0, -1.0)
    return {
        "mse": float(resid @ resid) / test.n,
        "misclassified": int(np.count_nonzero(labels != test.b)),
    }
