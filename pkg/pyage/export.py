"""
Artifact writers. Multi-file outputs are written to a staging directory
next to the destination and moved into place once complete, so a failed
run leaves nothing behind.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence

    from pyage.common import FloatMatrix
    from pyage.config import RunConfig
    from pyage.encoder import EmbeddingSnapshot

log = logging.getLogger(__file__)

__all__ = (
    "MANIFEST_NAME",
    "staged_directory",
    "write_snapshots",
    "write_json",
    "write_matrix_tsv",
)

MANIFEST_NAME = "manifest.json"


@contextmanager
def staged_directory(out_dir: str | Path) -> Iterator[Path]:
    """
    Yield an empty staging directory whose files end up in ``out_dir``.

    On a clean exit every staged file is moved into ``out_dir`` (created
    if needed); on an exception the staging directory is removed.
    """
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(
        tempfile.mkdtemp(prefix=f".{out_dir.name}.", dir=out_dir.parent)
    )
    try:
        yield staging
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise

    if not out_dir.exists():
        os.replace(staging, out_dir)
        return
    for item in staging.iterdir():
        os.replace(item, out_dir / item.name)
    staging.rmdir()


def write_json(doc: Any, path: str | Path, pretty: bool = True) -> Path:
    path = Path(path)
    text = json.dumps(doc, indent=2 if pretty else None, sort_keys=True)
    path.write_text(text + "\n")
    return path


def write_matrix_tsv(
    x: FloatMatrix, path: str | Path, row_ids: Sequence[str] | None = None
) -> Path:
    """One row per line: the row id, then the values at full precision."""
    path = Path(path)
    x = np.asarray(x, dtype=np.float64)
    ids = row_ids if row_ids is not None else [str(i) for i in range(x.shape[0])]
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        for node, row in zip(ids, x, strict=True):
            writer.writerow([node, *(repr(float(value)) for value in row)])
    return path


def write_snapshots(
    snapshots: Sequence[EmbeddingSnapshot],
    out_dir: str | Path,
    config: RunConfig,
    node_ids: Sequence[str] | None = None,
) -> list[Path]:
    """
    Write ``snapshot_<epoch>.tsv`` per snapshot plus ``manifest.json``.

    Manifest entries carry only the scores a snapshot actually has.

    Returns:
        the final paths of every written file, manifest last.
    """
    out_dir = Path(out_dir)
    entries: list[dict[str, Any]] = []
    names: list[str] = []
    with staged_directory(out_dir) as staging:
        for snapshot in snapshots:
            name = f"snapshot_{snapshot.epoch}.tsv"
            write_matrix_tsv(snapshot.z, staging / name, node_ids)
            names.append(name)
            entry: dict[str, Any] = {"epoch": snapshot.epoch, "file": name}
            for key in ("dbi", "val_auc", "loss"):
                value = getattr(snapshot, key)
                if value is not None:
                    entry[key] = value
            entries.append(entry)
        manifest = {
            "config_hash": config.config_hash(),
            "config": config.to_dict(),
            "snapshots": entries,
        }
        write_json(manifest, staging / MANIFEST_NAME)
        names.append(MANIFEST_NAME)

    log.info("wrote %d snapshots to %s", len(snapshots), out_dir)
    return [out_dir / name for name in names]
