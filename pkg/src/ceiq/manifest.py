"""Dataset manifests: CSV of image paths, subjective scores and reference ids.

Format: optional ``# polarity=MOS|DMOS`` comment, a header line
``image_path,score,ref_id``, then one row per image. Relative image paths
are resolved against the manifest's directory.
"""

import csv
import io
import os
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import ManifestError

POLARITIES = ("MOS", "DMOS")
HEADER = ("image_path", "score", "ref_id")


@dataclass(frozen=True)
class ManifestEntry:
    image_path: str
    score: float
    ref_id: str


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    entries: Tuple[ManifestEntry, ...]
    polarity: str = "MOS"

    def __post_init__(self):
        if not self.entries:
            raise ManifestError(f"manifest {self.name!r} is empty")
        if self.polarity not in POLARITIES:
            raise ManifestError(f"polarity must be one of {POLARITIES}, got {self.polarity!r}")
        seen = set()
        for e in self.entries:
            if e.image_path in seen:
                raise ManifestError(f"duplicate image path {e.image_path!r}")
            seen.add(e.image_path)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def paths(self):
        return [e.image_path for e in self.entries]

    @property
    def scores(self) -> np.ndarray:
        return np.array([e.score for e in self.entries], dtype=np.float64)

    @property
    def ref_ids(self):
        return [e.ref_id for e in self.entries]


def parse_manifest(text: str, name: str = "", base_dir: str = "") -> DatasetManifest:
    polarity = "MOS"
    rows = []
    header_seen = False
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.lower().startswith("polarity"):
                _, _, value = body.partition("=")
                value = value.strip().upper()
                if value not in POLARITIES:
                    raise ManifestError(f"line {lineno}: polarity must be MOS or DMOS, got {value!r}")
                polarity = value
            continue
        fields = next(csv.reader([line]))
        if not header_seen:
            if tuple(f.strip() for f in fields) != HEADER:
                raise ManifestError(
                    f"line {lineno}: expected header 'image_path,score,ref_id', got {line!r}"
                )
            header_seen = True
            continue
        if len(fields) != 3:
            raise ManifestError(f"line {lineno}: expected 3 columns, got {len(fields)}")
        path, score_str, ref_id = (f.strip() for f in fields)
        try:
            score = float(score_str)
        except ValueError as exc:
            raise ManifestError(f"line {lineno}: bad score {score_str!r}") from exc
        if base_dir and not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        rows.append(ManifestEntry(image_path=path, score=score, ref_id=ref_id))
    if not header_seen:
        raise ManifestError("missing header line 'image_path,score,ref_id'")
    if not rows:
        raise ManifestError("manifest has a header but no data rows")
    return DatasetManifest(name=name, entries=tuple(rows), polarity=polarity)


def load_manifest(path, name: str = "") -> DatasetManifest:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ManifestError(f"{path}: {exc}") from exc
    inferred = name or os.path.splitext(os.path.basename(path))[0]
    return parse_manifest(text, name=inferred, base_dir=os.path.dirname(os.path.abspath(path)))


def save_manifest(manifest: DatasetManifest, path) -> None:
    """Write entries with paths relative to the manifest location when possible."""
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# polarity={manifest.polarity}\n")
        fh.write(",".join(HEADER) + "\n")
        writer = csv.writer(fh)
        for e in manifest.entries:
            p = e.image_path
            if os.path.isabs(p):
                try:
                    p = os.path.relpath(p, base)
                except ValueError:
                    pass
            writer.writerow([p, format(e.score, ".9g"), e.ref_id])
