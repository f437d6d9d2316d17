"""Tumbling-window frame accumulation, per-window majority vote, and segment
emission.

A buffer of 250 frames at 25 fps holds a 10-second clip; each full window is
voted independently and the stream advances by a whole window. Discarded
(non-umpire) frames never vote. NoAction votes and suppresses the window when
it wins outright, which is what produces the recorded false negatives when
no-action frames outnumber true event frames. Ties among event classes go to
canonical order (Six < NoBall < Out < Wide); a NoAction-vs-event tie goes to
the event.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cascade import FrameDecision
from .domain import EVENT_CLASSES, EventClass
from .errors import DataError

SUMMARY_MAGIC = "SNOWSUM"
SUMMARY_VERSION = 1

# Fixed tally key order: Discarded, NoAction, then canonical event order.
TALLY_KEYS = ("Discarded", "NoAction", "Six", "NoBall", "Out", "Wide")


@dataclass(frozen=True)
class WindowConfig:
    window_frames: int = 250
    fps: float = 25.0
    allow_partial_tail: bool = True

    def __post_init__(self):
        if self.window_frames < 1:
            raise DataError(f"window_frames must be >= 1, got {self.window_frames}")
        if self.fps <= 0:
            raise DataError(f"fps must be positive, got {self.fps}")


@dataclass(frozen=True)
class Segment:
    start_frame: int
    end_frame: int
    event: EventClass
    tally: dict[str, int]

    def __post_init__(self):
        if self.start_frame < 0 or self.end_frame < self.start_frame:
            raise DataError(f"invalid segment interval [{self.start_frame}, {self.end_frame}]")
        if self.event == EventClass.NO_ACTION:
            raise DataError("segments never carry NoAction")
        if set(self.tally) - set(TALLY_KEYS):
            raise DataError(f"unknown tally keys: {sorted(set(self.tally) - set(TALLY_KEYS))}")
        win = self.tally.get(self.event.label, 0)
        for ev in EVENT_CLASSES:
            if self.tally.get(ev.label, 0) > win:
                raise DataError(f"tally for {ev.label} exceeds the winning event {self.event.label}")

    @property
    def n_frames(self) -> int:
        return self.end_frame - self.start_frame + 1

    @classmethod
    def single_class(cls, start_frame: int, end_frame: int, event: EventClass) -> "Segment":
        """Segment whose window contained only the winning event (test helper)."""
        tally = {k: 0 for k in TALLY_KEYS}
        tally[event.label] = end_frame - start_frame + 1
        return cls(start_frame, end_frame, event, tally)


def _empty_tally() -> dict[str, int]:
    return {k: 0 for k in TALLY_KEYS}


def _vote_tally(tally: dict[str, int]) -> EventClass | None:
    """Majority rule over one window's tally; None means the window is suppressed."""
    best: EventClass | None = None
    best_count = tally.get("NoAction", 0)
    # Events are scanned in canonical order with a strict > against the current
    # best, so equal counts resolve to the earlier event; seeding best_count
    # with NoAction and letting any equal event displace it (>=) gives event
    # priority on NoAction ties.
    for ev in EVENT_CLASSES:
        count = tally.get(ev.label, 0)
        if count > best_count or (count == best_count and count > 0 and best is None):
            best = ev
            best_count = count
    if best is None or best_count == 0:
        return None
    return best


def vote(decisions: list[FrameDecision], cfg: WindowConfig | None = None) -> EventClass | None:
    """Vote one window of FrameDecisions. Depends only on the decision multiset."""
    tally = _empty_tally()
    n = 0
    for d in decisions:
        tally[d.tally_key] += 1
        n += 1
    if n == 0:
        raise DataError("cannot vote on an empty window")
    return _vote_tally(tally)


def summarize_stream(decisions, cfg: WindowConfig = WindowConfig(),
                     stats: dict | None = None) -> list[Segment]:
    """Partition an ordered (frame_index, FrameDecision) stream into tumbling
    windows and emit one Segment per window whose vote names an event.

    Frame indices must be contiguous from 0. Memory stays bounded by one
    window: only the open window's tally is retained. ``stats``, when given,
    receives ``peak_buffered`` (max frames held for an open window) and
    ``windows`` (windows voted).
    """
    segments: list[Segment] = []
    tally = _empty_tally()
    in_window = 0
    window_start = 0
    next_index = 0
    peak = 0
    windows = 0

    def close(end_frame: int):
        nonlocal tally, in_window, window_start, windows
        windows += 1
        winner = _vote_tally(tally)
        if winner is not None:
            segments.append(Segment(window_start, end_frame, winner, tally))
        tally = _empty_tally()
        in_window = 0
        window_start = end_frame + 1

    for frame_index, decision in decisions:
        if frame_index != next_index:
            raise DataError(f"frame indices must be contiguous from 0: expected {next_index}, got {frame_index}")
        next_index += 1
        tally[decision.tally_key] += 1
        in_window += 1
        if in_window > peak:
            peak = in_window
        if in_window == cfg.window_frames:
            close(frame_index)

    if in_window and cfg.allow_partial_tail:
        close(next_index - 1)

    if stats is not None:
        stats["peak_buffered"] = peak
        stats["windows"] = windows
    return segments


@dataclass(frozen=True)
class SummaryEntry:
    segment: Segment
    start_seconds: float
    end_seconds: float
    duration_seconds: float


@dataclass(frozen=True)
class SummaryDocument:
    fps: float
    window_frames: int
    entries: tuple[SummaryEntry, ...] = field(default_factory=tuple)

    def render(self) -> str:
        """The SNOWSUM text format."""
        lines = [f"{SUMMARY_MAGIC} {SUMMARY_VERSION} fps={_format_fps(self.fps)} window={self.window_frames}"]
        for e in self.entries:
            seg = e.segment
            tally = ",".join(f"{k}:{seg.tally.get(k, 0)}" for k in TALLY_KEYS)
            lines.append(f"{seg.start_frame}\t{seg.end_frame}\t{seg.event.label}\t{tally}")
        return "\n".join(lines) + "\n"

    def cut_list(self) -> str:
        """Plain-text cut list for external video tools: start/end seconds and
        event name per line, 3-decimal seconds."""
        lines = [
            f"{e.start_seconds:.3f} {e.end_seconds:.3f} {e.segment.event.label}"
            for e in self.entries
        ]
        return "\n".join(lines) + ("\n" if lines else "")


def _format_fps(fps: float) -> str:
    return str(int(fps)) if float(fps).is_integer() else repr(fps)


def emit_summary(segments: list[Segment], cfg: WindowConfig = WindowConfig()) -> SummaryDocument:
    """Build the summary document; segments must be ordered and non-overlapping."""
    prev_end = -1
    entries = []
    for seg in segments:
        if seg.start_frame <= prev_end:
            raise DataError(f"segments overlap at frame {seg.start_frame}")
        prev_end = seg.end_frame
        entries.append(SummaryEntry(
            segment=seg,
            start_seconds=seg.start_frame / cfg.fps,
            end_seconds=seg.end_frame / cfg.fps,
            duration_seconds=seg.n_frames / cfg.fps,
        ))
    return SummaryDocument(fps=cfg.fps, window_frames=cfg.window_frames, entries=tuple(entries))


def parse_summary(text: str | bytes) -> SummaryDocument:
    """Read a SNOWSUM document back (used by the metrics command)."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = text.splitlines()
    if not lines:
        raise DataError("empty summary: missing header")
    head = lines[0].split(" ")
    if len(head) != 4 or head[0] != SUMMARY_MAGIC:
        raise DataError(f"bad summary header {lines[0]!r}")
    if head[1] != str(SUMMARY_VERSION):
        raise DataError(f"unsupported summary version {head[1]!r}")
    if not head[2].startswith("fps=") or not head[3].startswith("window="):
        raise DataError(f"bad summary header {lines[0]!r}")
    try:
        fps = float(head[2][4:])
        window = int(head[3][7:])
    except ValueError:
        raise DataError(f"bad summary header {lines[0]!r}") from None

    segments = []
    for i, line in enumerate(lines[1:]):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise DataError(f"malformed summary line {i}: {line!r}")
        try:
            start, end = int(parts[0]), int(parts[1])
        except ValueError:
            raise DataError(f"non-integer frames on summary line {i}") from None
        event = EventClass.from_label(parts[2])
        tally = {}
        for item in parts[3].split(","):
            key, _, value = item.partition(":")
            try:
                tally[key] = int(value)
            except ValueError:
                raise DataError(f"malformed tally on summary line {i}: {item!r}") from None
        segments.append(Segment(start, end, event, tally))
    return emit_summary(segments, WindowConfig(window_frames=window, fps=fps))
