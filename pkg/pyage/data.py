"""
Dataset loading and saving, link-prediction splits and synthetic graphs.

Two on-disk layouts are understood:

- ``content``: the citation-network pair ``<name>.content`` (node id,
  feature values, class string per line) and ``<name>.cites`` (two node
  ids per line).
- ``native``: a directory holding ``edges.tsv`` (two node indices per
  line), ``features.tsv`` (header ``n d`` then n rows of d values) or
  ``features.bin`` and optionally ``labels.tsv`` (node index, class
  string).

The binary feature block is the magic ``b"AGEX"``, little-endian int64 n,
int64 d, then n * d little-endian float64 values in row-major order.
"""

from __future__ import annotations

import csv
import logging
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Literal

import numpy as np

from pyage.common import make_rng
from pyage.errors import ConfigurationError, InputError
from pyage.graph import Graph, build_graph

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence

    from pyage.common import FloatMatrix, IntPairs, Seed

log = logging.getLogger(__file__)

__all__ = (
    "DATA_DIR_ENV",
    "BINARY_MAGIC",
    "DatasetSpec",
    "LinkSplit",
    "load_dataset",
    "save_graph",
    "resolve_dataset",
    "data_root",
    "read_binary_features",
    "write_binary_features",
    "link_split",
    "generate_sbm",
)

DATA_DIR_ENV = "AGE_DATA_DIR"
BINARY_MAGIC = b"AGEX"
_HEADER = struct.Struct("<4sqq")

# stand-in for the named synthetic dataset
SBM_DEFAULTS = {
    "block_sizes": (50, 50, 50),
    "p_in": 0.3,
    "p_out": 0.02,
    "feature_noise": 0.1,
}


@dataclass(frozen=True)
class DatasetSpec:
    """
    Where a dataset lives and how to read it.

    Attributes:
        name: dataset name, used for presets and reporting.
        edge_path: ``.cites`` file or ``edges.tsv``.
        feature_path: ``.content`` file, ``features.tsv`` or ``features.bin``.
        label_path: ``labels.tsv`` for the native layout.
        feature_kind: binary word vectors or tf-idf values; both load as-is.
        layout: ``content``, ``native`` or ``sbm`` (generated, no files).
        seed: seed of the generated graph for the ``sbm`` layout.
    """

    name: str
    edge_path: Path | None = None
    feature_path: Path | None = None
    label_path: Path | None = None
    feature_kind: Literal["binary", "tfidf"] = "binary"
    layout: Literal["content", "native", "sbm"] = "native"
    seed: int = field(default=0, compare=False)


@dataclass(frozen=True)
class LinkSplit:
    """
    Edges held out for link prediction.

    Attributes:
        train_edges: edges kept in the residual graph.
        val_pos, test_pos: held-out edges.
        val_neg, test_neg: non-edges of the original graph, as many as
            the matching positives.
        residual_graph: the graph without the held-out edges; same nodes,
            features and labels.
    """

    train_edges: IntPairs
    val_pos: IntPairs
    val_neg: IntPairs
    test_pos: IntPairs
    test_neg: IntPairs
    residual_graph: Graph = field(repr=False)


def _rows(path: Path) -> Iterator[tuple[int, list[str]]]:
    """Non-blank tab-separated rows with their 1-based line numbers."""
    try:
        handle = path.open(newline="")
    except OSError as e:
        raise InputError(f"cannot open ({e.strerror})", path=str(path)) from e
    with handle:
        reader = csv.reader(handle, delimiter="\t")
        for row in reader:
            if row and any(cell.strip() for cell in row):
                yield reader.line_num, [cell.strip() for cell in row]


def _floats(cells: Sequence[str], path: Path, line: int) -> list[float]:
    try:
        return [float(cell) for cell in cells]
    except ValueError as e:
        raise InputError(f"not a number ({e})", path=str(path), line=line) from e


def _class_ids(names: Sequence[str]) -> tuple[np.ndarray, tuple[str, ...]]:
    """
    Dense class ids 0..m-1 in sorted class order.

    Classes sort numerically when every name is an integer, otherwise as
    strings.
    """
    unique = set(names)
    try:
        classes = tuple(sorted(unique, key=int))
    except ValueError:
        classes = tuple(sorted(unique))
    lookup = {name: i for i, name in enumerate(classes)}
    return np.array([lookup[name] for name in names], dtype=np.int64), classes


def _load_content(spec: DatasetSpec) -> Graph:
    assert spec.feature_path is not None and spec.edge_path is not None
    index: dict[str, int] = {}
    rows: list[list[float]] = []
    classes: list[str] = []
    width: int | None = None
    for line, cells in _rows(spec.feature_path):
        if len(cells) < 3:
            raise InputError(
                "expected node id, features and class",
                path=str(spec.feature_path),
                line=line,
            )
        node, values, label = cells[0], cells[1:-1], cells[-1]
        if node in index:
            raise InputError(
                f"duplicate node id {node!r}", path=str(spec.feature_path), line=line
            )
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise InputError(
                f"expected {width} feature values, got {len(values)}",
                path=str(spec.feature_path),
                line=line,
            )
        index[node] = len(rows)
        rows.append(_floats(values, spec.feature_path, line))
        classes.append(label)

    if not rows:
        raise InputError("no nodes found", path=str(spec.feature_path))

    edges: list[tuple[int, int]] = []
    dangling = 0
    for line, cells in _rows(spec.edge_path):
        if len(cells) != 2:
            raise InputError(
                f"expected 2 node ids, got {len(cells)}",
                path=str(spec.edge_path),
                line=line,
            )
        cited, citing = cells
        if cited not in index or citing not in index:
            dangling += 1
            continue
        edges.append((index[citing], index[cited]))
    if dangling:
        log.warning(
            "%s: dropped %d citations to nodes without features", spec.name, dangling
        )

    labels, class_names = _class_ids(classes)
    return build_graph(
        edges,
        np.array(rows),
        labels,
        class_count=len(class_names),
        node_ids=list(index),
        class_names=class_names,
    )


def read_binary_features(path: str | Path) -> FloatMatrix:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise InputError(f"cannot open ({e.strerror})", path=str(path)) from e
    if len(raw) < _HEADER.size:
        raise InputError("truncated header", path=str(path))
    magic, n, d = _HEADER.unpack_from(raw)
    if magic != BINARY_MAGIC:
        raise InputError(f"bad magic {magic!r}", path=str(path))
    if n < 0 or d < 0:
        raise InputError(f"negative shape ({n}, {d})", path=str(path))
    expected = _HEADER.size + 8 * n * d
    if len(raw) != expected:
        raise InputError(
            f"expected {expected} bytes for a {n} x {d} block, got {len(raw)}",
            path=str(path),
        )
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size, count=n * d)
    return values.astype(np.float64).reshape(n, d)


def write_binary_features(x: FloatMatrix, path: str | Path) -> Path:
    path = Path(path)
    x = np.ascontiguousarray(x, dtype="<f8")
    n, d = x.shape
    path.write_bytes(_HEADER.pack(BINARY_MAGIC, n, d) + x.tobytes(order="C"))
    return path


def _read_feature_tsv(path: Path) -> FloatMatrix:
    rows = _rows(path)
    try:
        line, header = next(rows)
    except StopIteration:
        raise InputError("empty feature file", path=str(path)) from None
    cells = header[0].split() if len(header) == 1 else header
    try:
        n, d = (int(cell) for cell in cells)
    except ValueError:
        raise InputError("header must be 'n d'", path=str(path), line=line) from None
    if n < 0 or d < 0:
        raise InputError(
            f"header sizes must be non-negative, got {n} {d}", path=str(path), line=line
        )

    x = np.empty((n, d))
    count = 0
    for line, cells in rows:
        if count == n:
            raise InputError(f"more than {n} feature rows", path=str(path), line=line)
        if len(cells) != d:
            raise InputError(
                f"expected {d} values, got {len(cells)}", path=str(path), line=line
            )
        x[count] = _floats(cells, path, line)
        count += 1
    if count != n:
        raise InputError(f"expected {n} feature rows, got {count}", path=str(path))
    return x


def _read_index_pairs(path: Path, n: int) -> list[tuple[int, int]]:
    edges = []
    for line, cells in _rows(path):
        if len(cells) != 2:
            raise InputError(
                f"expected 2 node indices, got {len(cells)}", path=str(path), line=line
            )
        try:
            i, j = int(cells[0]), int(cells[1])
        except ValueError:
            raise InputError(
                "node indices must be integers", path=str(path), line=line
            ) from None
        if not (0 <= i < n and 0 <= j < n):
            raise InputError(
                f"edge ({i}, {j}) references a node outside [0, {n})",
                path=str(path),
                line=line,
            )
        edges.append((i, j))
    return edges


def _load_native(spec: DatasetSpec) -> Graph:
    assert spec.feature_path is not None and spec.edge_path is not None
    if spec.feature_path.suffix == ".bin":
        x = read_binary_features(spec.feature_path)
    else:
        x = _read_feature_tsv(spec.feature_path)
    n = x.shape[0]
    edges = _read_index_pairs(spec.edge_path, n)

    labels = class_names = None
    if spec.label_path is not None:
        names: list[str | None] = [None] * n
        for line, cells in _rows(spec.label_path):
            if len(cells) != 2:
                raise InputError(
                    "expected node index and class",
                    path=str(spec.label_path),
                    line=line,
                )
            try:
                node = int(cells[0])
            except ValueError:
                raise InputError(
                    "node index must be an integer",
                    path=str(spec.label_path),
                    line=line,
                ) from None
            if not 0 <= node < n:
                raise InputError(
                    f"node {node} outside [0, {n})",
                    path=str(spec.label_path),
                    line=line,
                )
            names[node] = cells[1]
        missing = [i for i, name in enumerate(names) if name is None]
        if missing:
            raise InputError(
                f"{len(missing)} nodes have no label, first {missing[0]}",
                path=str(spec.label_path),
            )
        labels, class_names = _class_ids([name for name in names if name is not None])

    return build_graph(
        edges,
        x,
        labels,
        class_count=len(class_names) if class_names is not None else None,
        class_names=class_names,
    )


def load_dataset(spec: DatasetSpec) -> Graph:
    """Read a graph; node ids become dense indices in file order."""
    if spec.layout == "sbm":
        g, _ = generate_sbm(**SBM_DEFAULTS, seed=spec.seed)
        return g
    for path in (spec.edge_path, spec.feature_path, spec.label_path):
        if path is not None and not path.is_file():
            raise InputError("file not found", path=str(path))
    g = _load_content(spec) if spec.layout == "content" else _load_native(spec)
    log.info("loaded %s: %r", spec.name, g)
    return g


def save_graph(g: Graph, directory: str | Path, binary: bool = False) -> DatasetSpec:
    """
    Write a graph in the native layout and return the spec that reads it.

    Features are written with 17 significant digits, so they load back
    bit-exactly.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    edge_path = directory / "edges.tsv"
    np.savetxt(edge_path, g.edge_array(), fmt="%d", delimiter="\t")

    if binary:
        feature_path = write_binary_features(g.features, directory / "features.bin")
    else:
        feature_path = directory / "features.tsv"
        np.savetxt(
            feature_path,
            g.features,
            fmt="%.17g",
            delimiter="\t",
            header=f"{g.n} {g.d}",
            comments="",
        )

    label_path = None
    if g.labels is not None:
        label_path = directory / "labels.tsv"
        names = g.class_names or tuple(str(i) for i in range(g.class_count or 0))
        with label_path.open("w", newline="") as handle:
            writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
            writer.writerows((i, names[label]) for i, label in enumerate(g.labels))

    return DatasetSpec(
        name=directory.name,
        edge_path=edge_path,
        feature_path=feature_path,
        label_path=label_path,
        layout="native",
    )


def data_root(data_dir: str | Path | None = None) -> Path:
    """``data_dir``, else $AGE_DATA_DIR, else ./data."""
    if data_dir is not None:
        return Path(data_dir)
    return Path(os.environ.get(DATA_DIR_ENV, "data"))


def _native_spec(name: str, directory: Path) -> DatasetSpec | None:
    edges = directory / "edges.tsv"
    features = next(
        (
            directory / fname
            for fname in ("features.tsv", "features.bin")
            if (directory / fname).is_file()
        ),
        None,
    )
    if not edges.is_file() or features is None:
        return None
    labels = directory / "labels.tsv"
    return DatasetSpec(
        name=name,
        edge_path=edges,
        feature_path=features,
        label_path=labels if labels.is_file() else None,
    )


def resolve_dataset(
    name_or_path: str, data_dir: str | Path | None = None, seed: int = 0
) -> DatasetSpec:
    """
    Find a dataset by name or path.

    ``sbm`` names the built-in planted-partition graph. A path may point at
    a native directory or at either file of a content pair. Names are
    looked up under the data root as ``<name>.content``/``<name>.cites``
    or as a native directory ``<name>/``.
    """
    if name_or_path.lower() == "sbm":
        return DatasetSpec(name="sbm", layout="sbm", seed=seed)

    path = Path(name_or_path)
    if path.suffix in (".content", ".cites"):
        path = path.with_suffix("")
    candidates = [path]
    if not path.is_absolute():
        candidates.append(data_root(data_dir) / path)

    name = path.name
    feature_kind: Literal["binary", "tfidf"] = (
        "tfidf" if name.lower() in ("wiki", "pubmed") else "binary"
    )
    for base in candidates:
        content, cites = base.with_suffix(".content"), base.with_suffix(".cites")
        if content.is_file() and cites.is_file():
            return DatasetSpec(
                name=name,
                edge_path=cites,
                feature_path=content,
                feature_kind=feature_kind,
                layout="content",
            )
        if base.is_dir():
            spec = _native_spec(name, base)
            if spec is not None:
                return spec

    raise InputError(
        f"dataset {name_or_path!r} not found (looked in {data_root(data_dir)})"
    )


def _sample_non_edges(
    g: Graph, count: int, rng: np.random.Generator
) -> IntPairs:
    """``count`` distinct unordered non-adjacent pairs i < j, uniformly."""
    n = g.n
    available = n * (n - 1) // 2 - g.num_edges
    if count > available:
        raise ConfigurationError(
            f"need {count} non-edges, the graph only has {available}"
        )
    if count == 0:
        return np.empty((0, 2), dtype=np.int64)

    if 2 * count > available:
        # dense graph: enumerate the complement and draw from it
        upper = np.triu(g.adjacency.toarray() == 0, k=1)
        pool = np.argwhere(upper)
        return pool[rng.choice(pool.shape[0], size=count, replace=False)]

    chosen: dict[tuple[int, int], None] = {}
    while len(chosen) < count:
        draws = rng.integers(0, n, size=(2 * (count - len(chosen)) + 16, 2))
        for i, j in draws:
            if i == j:
                continue
            pair = (int(min(i, j)), int(max(i, j)))
            if pair in chosen or g.has_edge(*pair):
                continue
            chosen[pair] = None
            if len(chosen) == count:
                break
    return np.array(list(chosen), dtype=np.int64)


def link_split(
    g: Graph, val_frac: float = 0.05, test_frac: float = 0.10, seed: Seed = 0
) -> LinkSplit:
    """
    Hold out round(frac * |E|) edges for validation and test.

    Each held-out set gets as many non-edges of the original graph, all
    distinct.
    """
    if val_frac < 0 or test_frac < 0 or not val_frac + test_frac < 1:
        raise ConfigurationError(
            f"invalid split fractions {val_frac} + {test_frac}; the sum must be below 1"
        )
    rng = make_rng(seed)
    edges = g.edge_array()
    total = edges.shape[0]
    n_val, n_test = round(val_frac * total), round(test_frac * total)
    if n_val + n_test > total:
        raise ConfigurationError(
            f"cannot hold out {n_val} + {n_test} of {total} edges"
        )

    order = rng.permutation(total)
    val_pos = edges[order[:n_val]]
    test_pos = edges[order[n_val : n_val + n_test]]
    train = edges[np.sort(order[n_val + n_test :])]

    negatives = _sample_non_edges(g, n_val + n_test, rng)
    residual = build_graph(
        train,
        g.features,
        g.labels,
        class_count=g.class_count,
        node_ids=g.node_ids,
        class_names=g.class_names,
    )
    log.info(
        "split %d edges: %d train, %d validation, %d test",
        total,
        train.shape[0],
        n_val,
        n_test,
    )
    return LinkSplit(
        train_edges=train,
        val_pos=val_pos,
        val_neg=negatives[:n_val],
        test_pos=test_pos,
        test_neg=negatives[n_val:],
        residual_graph=residual,
    )


def generate_sbm(
    block_sizes: Sequence[int],
    p_in: float,
    p_out: float,
    feature_dim: int | None = None,
    feature_noise: float = 0.1,
    seed: Seed = 0,
) -> tuple[Graph, np.ndarray]:
    """
    Planted-partition graph with block-signature features.

    Every pair inside a block is an edge with probability ``p_in``, every
    pair across blocks with ``p_out``. Node features are the one-hot block
    indicator padded to ``feature_dim`` plus Gaussian noise.

    Returns:
        the graph (labels are the block ids) and the block id per node.
    """
    if not 0 <= p_out < p_in <= 1:
        raise ConfigurationError(
            f"need 0 <= p_out < p_in <= 1, got p_in={p_in}, p_out={p_out}"
        )
    if not block_sizes or min(block_sizes) < 1:
        raise ConfigurationError("every block needs at least one node")
    blocks = len(block_sizes)
    feature_dim = blocks if feature_dim is None else feature_dim
    if feature_dim < blocks:
        raise ConfigurationError(
            f"feature_dim ({feature_dim}) is smaller than the {blocks} blocks"
        )
    if feature_noise < 0:
        raise ConfigurationError("feature_noise must be non-negative")

    rng = make_rng(seed)
    membership = np.repeat(np.arange(blocks), block_sizes)
    n = membership.size

    same = membership[:, None] == membership[None, :]
    prob = np.where(same, p_in, p_out)
    hits = np.triu(rng.random((n, n)) < prob, k=1)
    edges = np.argwhere(hits)

    features = np.zeros((n, feature_dim))
    features[np.arange(n), membership] = 1.0
    features += feature_noise * rng.standard_normal((n, feature_dim))

    g = build_graph(
        edges,
        features,
        membership,
        class_count=blocks,
        class_names=tuple(f"block{i}" for i in range(blocks)),
    )
    log.debug("generated %r", g)
    return g, membership
