"""Pairing of reference and modified image directories into a manifest.

Pairs are keyed by filename stem (extension-insensitive) within matching
subdirectories, so a KITTI-style layout ``ref/0001/000123.png`` pairs with
``mod/0001/000123.jpg``. Pairs that fail validation are excluded downstream
rather than resampled; resampling would itself be a modification.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, EmptyIntersection

log = logging.getLogger(__name__)

TOOL_VERSION = "0.1.0"

_CODEC_SUFFIXES = {".png", ".jpg", ".jpeg"}


@dataclass(frozen=True)
class ImageRecord:
    """One decodable 8-bit PNG/JPEG image on disk."""

    id: str
    path: str
    width: int
    height: int
    channels: int
    bit_depth: int = 8

    def __post_init__(self):
        if self.width < 8 or self.height < 8:
            raise DecodeError(f"{self.path}: image smaller than 8x8")
        if self.channels not in (1, 3):
            raise DecodeError(f"{self.path}: expected 1 or 3 channels, got {self.channels}")
        if self.bit_depth != 8:
            raise DecodeError(f"{self.path}: only 8-bit images are supported")


@dataclass(frozen=True)
class ImagePair:
    """Reference/modified image pair with identical semantic content."""

    ref: ImageRecord
    mod: ImageRecord
    modification: str  # e.g. "jpeg:15", "vqgan:f8", "vkitti1", "vkitti2", "other:..."
    sequence_id: str = ""

    @property
    def id(self) -> str:
        return self.ref.id


@dataclass
class Manifest:
    """Deterministically ordered list of image pairs."""

    pairs: list[ImagePair]
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat()
    )
    tool_version: str = TOOL_VERSION

    def to_json(self) -> str:
        # created_at/tool_version are deliberately not serialized: reruns on
        # unchanged directories must produce byte-identical manifests.
        doc = {
            "version": 1,
            "pairs": [
                {
                    "id": p.id,
                    "ref": p.ref.path,
                    "mod": p.mod.path,
                    "modification": p.modification,
                    "sequence": p.sequence_id,
                }
                for p in self.pairs
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Manifest":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("version") != 1:
            raise DecodeError(f"{path}: unsupported manifest version {doc.get('version')!r}")
        pairs = [
            ImagePair(
                ref=read_image_record(entry["ref"]),
                mod=read_image_record(entry["mod"]),
                modification=entry["modification"],
                sequence_id=entry.get("sequence", ""),
            )
            for entry in doc["pairs"]
        ]
        return cls(pairs=pairs)


@dataclass
class ValidationReport:
    """Comparability check for one pair; any mismatch flags it unusable."""

    pair_id: str
    mismatches: list[str]

    @property
    def ok(self) -> bool:
        return not self.mismatches


@dataclass
class PairingReport:
    """Stems that could not be paired, and files that failed to decode."""

    unmatched_ref: list[str] = field(default_factory=list)
    unmatched_mod: list[str] = field(default_factory=list)
    decode_failures: list[str] = field(default_factory=list)


def read_image_record(path: str | Path) -> ImageRecord:
    """Decode the header of a PNG/JPEG file into an ImageRecord."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            mode = im.mode
            width, height = im.size
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"{path}: {exc}") from exc
    if mode in ("L",):
        channels = 1
    elif mode in ("RGB",):
        channels = 3
    elif mode in ("LA", "RGBA", "P"):
        # convertible without resampling; converted lazily by loaders
        channels = 3 if mode in ("RGBA", "P") else 1
    else:
        raise DecodeError(f"{path}: unsupported mode {mode}")
    return ImageRecord(
        id=path.stem, path=str(path), width=width, height=height, channels=channels
    )


def _scan(root: Path) -> dict[tuple[str, str], Path]:
    """Map (relative subdir, stem) -> file path for every image file under root."""
    found: dict[tuple[str, str], Path] = {}
    for p in sorted(root.rglob("*")):
        if p.is_file() and p.suffix.lower() in _CODEC_SUFFIXES:
            rel_dir = str(p.parent.relative_to(root))
            key = ("" if rel_dir == "." else rel_dir, p.stem)
            if key in found:
                log.warning("duplicate stem %s under %s, keeping %s", key, root, found[key])
                continue
            found[key] = p
    return found


def pair_by_stem(
    ref_dir: str | Path,
    mod_dir: str | Path,
    modification: str,
    report: PairingReport | None = None,
) -> Manifest:
    """Pair images with matching (subdir, stem) keys across two directories.

    Stems present in only one directory are recorded in `report` (and logged),
    not paired. Unreadable files are skipped and recorded likewise. Raises
    EmptyIntersection if no pair can be formed.
    """
    ref_dir, mod_dir = Path(ref_dir), Path(mod_dir)
    if report is None:
        report = PairingReport()
    ref_files = _scan(ref_dir)
    mod_files = _scan(mod_dir)

    common = sorted(ref_files.keys() & mod_files.keys())
    report.unmatched_ref = ["/".join(filter(None, k)) for k in sorted(ref_files.keys() - mod_files.keys())]
    report.unmatched_mod = ["/".join(filter(None, k)) for k in sorted(mod_files.keys() - ref_files.keys())]
    for name in report.unmatched_ref:
        log.info("unmatched reference image: %s", name)
    for name in report.unmatched_mod:
        log.info("unmatched modified image: %s", name)

    pairs: list[ImagePair] = []
    for seq, stem in common:
        try:
            ref_rec = read_image_record(ref_files[(seq, stem)])
            mod_rec = read_image_record(mod_files[(seq, stem)])
        except DecodeError as exc:
            log.warning("skipping pair %s/%s: %s", seq, stem, exc)
            report.decode_failures.append("/".join(filter(None, (seq, stem))))
            continue
        pairs.append(
            ImagePair(ref=ref_rec, mod=mod_rec, modification=modification, sequence_id=seq)
        )

    if not pairs:
        raise EmptyIntersection(f"no common decodable stems between {ref_dir} and {mod_dir}")

    pairs.sort(key=lambda p: (p.sequence_id, p.id))
    return Manifest(pairs=pairs)


def validate_pair(pair: ImagePair) -> ValidationReport:
    """Check that a pair is dimension- and channel-compatible."""
    mismatches = []
    if (pair.ref.width, pair.ref.height) != (pair.mod.width, pair.mod.height):
        mismatches.append("dimensions")
    if pair.ref.channels != pair.mod.channels:
        mismatches.append("channels")
    return ValidationReport(pair_id=pair.id, mismatches=mismatches)
