"""Class taxonomy, dataset manifests, and ground-truth event records.

Class codes are fixed so feature stores, models, and summaries agree bit-exactly:
0 NoAction, 1 Six, 2 NoBall, 3 Out, 4 Wide; store code 5 marks NonUmpire images.
Canonical order (used for every tie break) is ascending code among the event
classes: Six < NoBall < Out < Wide.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

from .errors import DataError


class EventClass(IntEnum):
    NO_ACTION = 0
    SIX = 1
    NO_BALL = 2
    OUT = 3
    WIDE = 4

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "EventClass":
        try:
            return _BY_LABEL[label]
        except KeyError:
            raise DataError(f"unknown event name {label!r}") from None


_LABELS = {
    EventClass.NO_ACTION: "NoAction",
    EventClass.SIX: "Six",
    EventClass.NO_BALL: "NoBall",
    EventClass.OUT: "Out",
    EventClass.WIDE: "Wide",
}
_BY_LABEL = {v: k for k, v in _LABELS.items()}

# The four classes that may appear in summaries, in canonical tie-break order.
EVENT_CLASSES = (EventClass.SIX, EventClass.NO_BALL, EventClass.OUT, EventClass.WIDE)


class PresenceClass(IntEnum):
    NON_UMPIRE = 0
    UMPIRE = 1


# Store-level code for non-umpire images (PresenceClass.NON_UMPIRE never appears
# in stores; the manifest/feature space uses 5 so it cannot collide with NoAction).
NON_UMPIRE_CODE = 5

VALID_CLASS_CODES = frozenset(range(6))

MANIFEST_MAGIC = "SNOWMAN"
MANIFEST_VERSION = 1


@dataclass(frozen=True)
class ManifestRecord:
    id: str
    path: str
    class_code: int


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    version: int
    records: tuple[ManifestRecord, ...]

    def __post_init__(self):
        seen = set()
        for i, rec in enumerate(self.records):
            if not rec.id:
                raise DataError(f"empty id at record {i}")
            if rec.id in seen:
                raise DataError(f"duplicate id {rec.id!r} at record {i}")
            seen.add(rec.id)
            if not rec.path:
                raise DataError(f"empty path at record {i}")
            if rec.class_code not in VALID_CLASS_CODES:
                raise DataError(f"unknown class code {rec.class_code} at record {i}")


@dataclass(frozen=True)
class GroundTruthEvent:
    start_frame: int
    end_frame: int
    event: EventClass

    def __post_init__(self):
        if self.start_frame < 0 or self.end_frame < 0:
            raise DataError("frame numbers must be non-negative")
        if self.start_frame > self.end_frame:
            raise DataError(f"event starts at {self.start_frame} after its end {self.end_frame}")
        if self.event == EventClass.NO_ACTION:
            raise DataError("ground-truth events cannot be NoAction")


def parse_manifest(data: bytes | str) -> DatasetManifest:
    """Parse the tab-separated manifest format.

    Header line: ``SNOWMAN 1 <name>``; then one ``<id>\\t<path>\\t<code>`` per line.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.splitlines()
    if not lines:
        raise DataError("empty manifest: missing header line")
    head = lines[0].split(" ", 2)
    if len(head) != 3 or head[0] != MANIFEST_MAGIC:
        raise DataError(f"bad manifest header {lines[0]!r}")
    if head[1] != str(MANIFEST_VERSION):
        raise DataError(f"unsupported manifest version {head[1]!r}")
    name = head[2]

    records = []
    for i, line in enumerate(lines[1:]):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise DataError(f"malformed record line at record {i}: {line!r}")
        rec_id, path, code_text = parts
        try:
            code = int(code_text)
        except ValueError:
            raise DataError(f"non-integer class code {code_text!r} at record {i}") from None
        records.append(ManifestRecord(rec_id, path, code))
    return DatasetManifest(name=name, version=MANIFEST_VERSION, records=tuple(records))


def serialize_manifest(manifest: DatasetManifest) -> bytes:
    lines = [f"{MANIFEST_MAGIC} {manifest.version} {manifest.name}"]
    for rec in manifest.records:
        lines.append(f"{rec.id}\t{rec.path}\t{rec.class_code}")
    return ("\n".join(lines) + "\n").encode("utf-8")


# The published dataset carries 78 images per class; a manifest claiming that
# name is checked against those counts.
SNOW_DATASET_NAME = "SNOW"
SNOW_PER_CLASS = 78


@dataclass
class BalanceReport:
    counts: dict[int, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


def check_class_balance(manifest: DatasetManifest) -> BalanceReport:
    """Report per-class record counts; warn on SNOW-named manifests that deviate
    from 78 per class (codes 0-4). Report-only, never raises."""
    report = BalanceReport(counts={code: 0 for code in sorted(VALID_CLASS_CODES)})
    for rec in manifest.records:
        report.counts[rec.class_code] += 1
    if not manifest.records:
        report.warnings.append("manifest has no records")
    if manifest.name == SNOW_DATASET_NAME:
        for code in range(5):
            n = report.counts[code]
            if n != SNOW_PER_CLASS:
                label = EventClass(code).label
                report.warnings.append(
                    f"class {label} (code {code}) has {n} records, expected {SNOW_PER_CLASS}"
                )
    return report


def parse_truth_file(data: bytes | str) -> list[GroundTruthEvent]:
    """One event per line: ``<start_frame>\\t<end_frame>\\t<class-code>``."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    events = []
    for i, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise DataError(f"malformed truth line {i}: {line!r}")
        try:
            start, end, code = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise DataError(f"non-integer field on truth line {i}: {line!r}") from None
        if code not in (1, 2, 3, 4):
            raise DataError(f"truth line {i} has non-event class code {code}")
        events.append(GroundTruthEvent(start, end, EventClass(code)))
    return events


def serialize_truth_file(events: list[GroundTruthEvent]) -> bytes:
    lines = [f"{e.start_frame}\t{e.end_frame}\t{int(e.event)}" for e in events]
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")
