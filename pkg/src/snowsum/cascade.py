"""Two-stage per-frame decision: stage 1 filters umpire presence, stage 2
assigns the pose class.

NoAction survives as an explicit decision (it is excluded from summaries but
must be countable by the window voter); Discarded marks stage-1 rejections and
never votes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._binio import ByteReader, ByteWriter, check_magic
from .domain import NON_UMPIRE_CODE, EventClass
from .errors import DataError
from .linsvm import MulticlassModel, load_model, predict_multi, predict_multi_batch, save_model

CASCADE_MAGIC = b"SNOWCSC1"


class DecisionKind(Enum):
    DISCARDED = "Discarded"
    NO_ACTION = "NoAction"
    EVENT = "Event"


@dataclass(frozen=True)
class FrameDecision:
    kind: DecisionKind
    event: EventClass | None = None

    def __post_init__(self):
        if self.kind is DecisionKind.EVENT:
            if self.event is None or self.event == EventClass.NO_ACTION:
                raise DataError("Event decisions must carry one of the four event classes")
        elif self.event is not None:
            raise DataError(f"{self.kind.value} decisions carry no event class")

    @property
    def tally_key(self) -> str:
        """Name this decision counts under in a window tally."""
        if self.kind is DecisionKind.EVENT:
            return self.event.label
        return self.kind.value


DISCARDED = FrameDecision(DecisionKind.DISCARDED)
NO_ACTION = FrameDecision(DecisionKind.NO_ACTION)


def event_decision(event: EventClass) -> FrameDecision:
    return FrameDecision(DecisionKind.EVENT, event)


@dataclass(frozen=True)
class CascadeModel:
    """stage1: binary umpire-presence model (classes [umpire, 5]); stage2:
    five-class pose model. Both stages must come from the same feature source."""

    stage1: MulticlassModel
    stage2: MulticlassModel
    source_tag: str

    def __post_init__(self):
        if len(self.stage1.classes) != 2:
            raise DataError(f"stage 1 must have exactly 2 classes, got {list(self.stage1.classes)}")
        if NON_UMPIRE_CODE not in self.stage1.classes:
            raise DataError(f"stage 1 must include the non-umpire code {NON_UMPIRE_CODE}")
        if list(self.stage2.classes) != [0, 1, 2, 3, 4]:
            raise DataError(f"stage 2 must cover the five pose classes, got {list(self.stage2.classes)}")
        if self.stage1.dim != self.stage2.dim:
            raise DataError(f"stage dims differ: {self.stage1.dim} vs {self.stage2.dim}")

    @property
    def dim(self) -> int:
        return self.stage1.dim


def classify_frame(cascade: CascadeModel, x) -> FrameDecision:
    """Stage 1 first; non-umpire frames are discarded without evaluating stage 2.
    The same feature vector is reused for both stages."""
    if predict_multi(cascade.stage1, x) == NON_UMPIRE_CODE:
        return DISCARDED
    pose = EventClass(predict_multi(cascade.stage2, x))
    if pose == EventClass.NO_ACTION:
        return NO_ACTION
    return event_decision(pose)


def classify_frames(cascade: CascadeModel, X) -> list[FrameDecision]:
    """Batch classify_frame over rows of X; stage 2 is evaluated only on the
    rows stage 1 accepted."""
    X = np.asarray(X, dtype=np.float64)
    stage1 = predict_multi_batch(cascade.stage1, X)
    decisions: list[FrameDecision] = [DISCARDED] * X.shape[0]
    umpire_rows = np.flatnonzero(stage1 != NON_UMPIRE_CODE)
    if umpire_rows.size:
        poses = predict_multi_batch(cascade.stage2, X[umpire_rows])
        for row, pose in zip(umpire_rows, poses):
            ev = EventClass(int(pose))
            decisions[row] = NO_ACTION if ev == EventClass.NO_ACTION else event_decision(ev)
    return decisions


def save_cascade(cascade: CascadeModel) -> bytes:
    w = ByteWriter()
    w.raw(CASCADE_MAGIC)
    for stage in (cascade.stage1, cascade.stage2):
        payload = save_model(stage)
        w.u32(len(payload))
        w.raw(payload)
    tag = cascade.source_tag.encode("utf-8")
    if len(tag) > 0xFFFF:
        raise DataError("source tag too long")
    w.u16(len(tag))
    w.raw(tag)
    return w.getvalue()


def load_cascade(data: bytes) -> CascadeModel:
    r = ByteReader(data, "cascade bundle")
    check_magic(r, CASCADE_MAGIC)
    stages = []
    for _ in range(2):
        payload = r.take(r.u32())
        stages.append(load_model(payload))
    tag = r.take(r.u16()).decode("utf-8")
    r.expect_done()
    return CascadeModel(stage1=stages[0], stage2=stages[1], source_tag=tag)
