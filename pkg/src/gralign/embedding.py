"""Node feature reduction and cross-network similarity.

GDV matrices from the two networks are stacked and reduced jointly by PCA so
both networks live in the same component space; node-pair similarity is
cosine similarity rescaled from [-1, 1] to [0, 1]. External embeddings enter
through the 3-column similarity file format (node1 node2 value), which is
also what the similarity writer emits.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, ParameterError, ParseError

__all__ = [
    "FeatureMatrix",
    "SimilarityMatrix",
    "pca_reduce",
    "cosine_similarity_matrix",
    "read_similarity_file",
    "write_similarity_file",
]


@dataclass
class FeatureMatrix:
    """Per-node real feature vectors for one network."""

    rows: np.ndarray = field(repr=False)
    source: str = "graphlet-pca"

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2:
            raise ParameterError("feature matrix must be 2-dimensional")
        if not np.isfinite(self.rows).all():
            raise ParameterError("feature matrix contains non-finite values")

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class SimilarityMatrix:
    """|V1| x |V2| node-pair similarities in [0, 1] with label tables."""

    values: np.ndarray = field(repr=False)
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.row_labels), len(self.col_labels)):
            raise ParameterError("similarity shape does not match label tables")
        if not np.isfinite(self.values).all():
            raise ParameterError("similarities must be finite")
        if self.values.size and (self.values.min() < 0.0 or self.values.max() > 1.0):
            raise ParameterError("similarities must lie in [0, 1]")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def pca_reduce(
    gdv1: np.ndarray,
    gdv2: np.ndarray,
    variance_threshold: float = 0.90,
    min_components: int = 2,
    log_transform: bool = False,
) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Jointly PCA-reduce two GDV matrices.

    Stacks both matrices, mean-centers columns, and projects onto the
    smallest r >= min_components principal components whose cumulative
    explained variance reaches the threshold. Both networks are projected
    with the same components. `log_transform` applies log(1+x) to the raw
    counts first (off by default).
    """
    gdv1 = np.asarray(gdv1, dtype=np.float64)
    gdv2 = np.asarray(gdv2, dtype=np.float64)
    if gdv1.ndim != 2 or gdv2.ndim != 2 or gdv1.shape[1] != gdv2.shape[1]:
        raise ParameterError("GDV matrices must be 2-d with matching column count")
    if len(gdv1) + len(gdv2) < 3:
        raise ParameterError("need at least 3 nodes in total for PCA")
    if not (0.0 < variance_threshold <= 1.0):
        raise ParameterError("variance_threshold must be in (0, 1]")
    if min_components < 1:
        raise ParameterError("min_components must be >= 1")

    stacked = np.vstack([gdv1, gdv2])
    if log_transform:
        stacked = np.log1p(stacked)
    centered = stacked - stacked.mean(axis=0)
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    total = float((s * s).sum())
    if total <= 0.0:
        raise DegenerateInputError(
            "all feature vectors are identical (zero variance); "
            "fall back to raw GDVs instead of PCA"
        )
    cumulative = np.cumsum(s * s) / total
    r = int(np.searchsorted(cumulative, variance_threshold) + 1)
    r = max(r, min_components)
    r = min(r, len(s))
    projected = centered @ vt[:r].T
    f1 = FeatureMatrix(projected[: len(gdv1)], source="graphlet-pca")
    f2 = FeatureMatrix(projected[len(gdv1):], source="graphlet-pca")
    return f1, f2


def cosine_similarity_matrix(
    f1: FeatureMatrix,
    f2: FeatureMatrix,
    row_labels: tuple[str, ...] | None = None,
    col_labels: tuple[str, ...] | None = None,
) -> SimilarityMatrix:
    """Pairwise (cos + 1) / 2 similarities, shape (len(f1), len(f2)).

    A zero vector has undefined cosine; it is taken as 0, i.e. similarity 0.5
    against everything. Label tables default to stringified row indices.
    """
    if f1.dim != f2.dim:
        raise ParameterError(f"feature dimensions differ: {f1.dim} vs {f2.dim}")

    def unit(rows):
        norms = np.linalg.norm(rows, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0  # zero rows stay zero -> cosine 0
        return rows / norms

    cos = unit(f1.rows) @ unit(f2.rows).T
    values = np.clip((cos + 1.0) / 2.0, 0.0, 1.0)
    if row_labels is None:
        row_labels = tuple(str(i) for i in range(len(f1)))
    if col_labels is None:
        col_labels = tuple(str(i) for i in range(len(f2)))
    return SimilarityMatrix(values, tuple(row_labels), tuple(col_labels))


def write_similarity_file(sm: SimilarityMatrix) -> str:
    """All |V1| x |V2| pairs, row-major, "node1 node2 similarity" per line
    (SANA simFormat 1). Values are written with full round-trip precision."""
    lines = []
    for i, rl in enumerate(sm.row_labels):
        row = sm.values[i].tolist()
        for j, cl in enumerate(sm.col_labels):
            lines.append(f"{rl} {cl} {row[j]!r}\n")
    return "".join(lines)


def read_similarity_file(
    text: str,
    row_labels: tuple[str, ...] | None = None,
    col_labels: tuple[str, ...] | None = None,
) -> SimilarityMatrix:
    """Parse a 3-column similarity file.

    When label tables are given (e.g. from the two graphs being aligned),
    every line must reference known labels; otherwise labels are collected in
    first-appearance order. Pairs absent from the file default to 0.
    """
    entries: list[tuple[str, str, float, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 3:
            raise ParseError(f"expected 3 columns, got {len(tokens)}", line=lineno)
        try:
            value = float(tokens[2])
        except ValueError:
            raise ParseError(f"unparseable similarity {tokens[2]!r}", line=lineno) from None
        if not np.isfinite(value) or not 0.0 <= value <= 1.0:
            raise ParseError(f"similarity {value} outside [0, 1]", line=lineno)
        entries.append((tokens[0], tokens[1], value, lineno))
    if not entries:
        raise ParseError("no similarity entries in input")

    if row_labels is None:
        seen: dict[str, int] = {}
        for a, _, _, _ in entries:
            seen.setdefault(a, len(seen))
        row_labels = tuple(seen)
    if col_labels is None:
        seen = {}
        for _, b, _, _ in entries:
            seen.setdefault(b, len(seen))
        col_labels = tuple(seen)
    rid = {l: i for i, l in enumerate(row_labels)}
    cid = {l: i for i, l in enumerate(col_labels)}
    values = np.zeros((len(row_labels), len(col_labels)))
    for a, b, value, lineno in entries:
        if a not in rid:
            raise ParseError(f"unknown node {a!r}", line=lineno)
        if b not in cid:
            raise ParseError(f"unknown node {b!r}", line=lineno)
        values[rid[a], cid[b]] = value
    return SimilarityMatrix(values, tuple(row_labels), tuple(col_labels))
