"""HTTP service running the human-evaluation protocol.

State is event-sourced: every accepted write is one JSON line in an
append-only log, and all session state is a pure fold over that log, so
a restart replays to the exact same state and the whole study stays
auditable. Annotator-visible payloads never contain a model identity;
items are served under per-item aliases and resolution back to models
happens offline with the frame key.

Protocol phases, in order and never backward:

    calibration  - both annotators label the first `calibration_size` items
    adjudication - every calibration disagreement gets a joint resolution
    solo         - the first annotator labels the remaining items
    review       - the second annotator re-labels them; differences become
                   disagreements to resolve, like a second calibration
    closed       - every item has exactly one final record; export enabled
"""

from __future__ import annotations

import json
import os
import random
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .evaluation import (
    CommentCategory,
    FeedbackType,
    SampleFrame,
    UndefinedKappaError,
    cohen_kappa,
    load_frame,
)

PHASES = ("calibration", "adjudication", "solo", "review", "closed")

BASE_DIMENSIONS = ("semantic_equivalence", "applicability", "has_explanation")
CONDITIONAL_DIMENSIONS = ("feedback_type", "category")
ALL_DIMENSIONS = BASE_DIMENSIONS + CONDITIONAL_DIMENSIONS


class LabelError(ValueError):
    """A submitted label violates the record invariants."""


@dataclass(frozen=True)
class LabelValues:
    """The five judgment dimensions for one (sample, alias)."""

    semantic_equivalence: bool
    applicability: bool
    has_explanation: bool
    feedback_type: str | None = None
    category: str | None = None

    def validate(self) -> None:
        if self.applicability:
            if not self.feedback_type:
                raise LabelError("applicable comment needs a feedback_type")
            if not self.category:
                raise LabelError("applicable comment needs a category")
        else:
            if self.feedback_type or self.category:
                raise LabelError(
                    "feedback_type/category must be absent when not applicable"
                )
        try:
            if self.feedback_type is not None:
                FeedbackType(self.feedback_type)
            if self.category is not None:
                CommentCategory(self.category)
        except ValueError as exc:
            raise LabelError(str(exc)) from None

    def to_dict(self) -> dict:
        return {
            "semantic_equivalence": self.semantic_equivalence,
            "applicability": self.applicability,
            "has_explanation": self.has_explanation,
            "feedback_type": self.feedback_type,
            "category": self.category,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "LabelValues":
        values = cls(
            semantic_equivalence=bool(obj["semantic_equivalence"]),
            applicability=bool(obj["applicability"]),
            has_explanation=bool(obj["has_explanation"]),
            feedback_type=obj.get("feedback_type") or None,
            category=obj.get("category") or None,
        )
        values.validate()
        return values

    def differing_dimensions(self, other: "LabelValues") -> list[str]:
        dims = [d for d in BASE_DIMENSIONS if getattr(self, d) != getattr(other, d)]
        if self.applicability and other.applicability:
            dims.extend(
                d for d in CONDITIONAL_DIMENSIONS if getattr(self, d) != getattr(other, d)
            )
        return dims


@dataclass
class AdjudicationItem:
    item_id: str
    kind: str  # "cal" or "rev"
    sample_id: str
    alias: str
    dimensions: list[str]
    labels: dict[str, dict]  # annotator -> label values
    resolution: dict | None = None

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "kind": self.kind,
            "sample_id": self.sample_id,
            "alias": self.alias,
            "dimensions": self.dimensions,
            "labels": self.labels,
            "resolution": self.resolution,
        }


class SessionState:
    """One session's state; every mutation comes through apply_*."""

    def __init__(
        self,
        session_id: str,
        frame_name: str,
        frame: SampleFrame,
        annotators: list[str],
        calibration_size: int,
    ):
        self.session_id = session_id
        self.frame_name = frame_name
        self.frame = frame
        self.annotators = annotators
        self.calibration_size = calibration_size
        # (annotator, sample_id, alias) -> LabelValues, last write wins
        self.labels: dict[tuple[str, str, str], LabelValues] = {}
        # (sample_id, alias) -> LabelValues
        self.resolutions: dict[tuple[str, str], LabelValues] = {}

    # -- structure ---------------------------------------------------------

    def item_units(self, item_index: int) -> list[tuple[str, str]]:
        item = self.frame.items[item_index]
        return [(item.sample_id, alias) for alias, _ in item.candidates]

    def calibration_units(self) -> list[tuple[str, str]]:
        units = []
        for i in range(self.calibration_size):
            units.extend(self.item_units(i))
        return units

    def solo_units(self) -> list[tuple[str, str]]:
        units = []
        for i in range(self.calibration_size, len(self.frame.items)):
            units.extend(self.item_units(i))
        return units

    def unit_exists(self, sample_id: str, alias: str) -> bool:
        for item in self.frame.items:
            if item.sample_id == sample_id:
                return any(a == alias for a, _ in item.candidates)
        return False

    def _item_index(self, sample_id: str) -> int | None:
        for i, item in enumerate(self.frame.items):
            if item.sample_id == sample_id:
                return i
        return None

    # -- phase -------------------------------------------------------------

    def phase(self) -> str:
        if not self._calibration_complete():
            return "calibration"
        if any(d.resolution is None for d in self.calibration_disagreements()):
            return "adjudication"
        if not self._solo_complete():
            return "solo"
        if not self._review_complete():
            return "review"
        return "closed"

    def _calibration_complete(self) -> bool:
        return all(
            (annotator, sid, alias) in self.labels
            for annotator in self.annotators
            for sid, alias in self.calibration_units()
        )

    def _solo_complete(self) -> bool:
        first = self.annotators[0]
        return all((first, sid, alias) in self.labels for sid, alias in self.solo_units())

    def _review_complete(self) -> bool:
        second = self.annotators[1]
        if not all(
            (second, sid, alias) in self.labels for sid, alias in self.solo_units()
        ):
            return False
        return all(d.resolution is not None for d in self.review_disagreements())

    # -- disagreements -----------------------------------------------------

    def _disagreements(self, units, kind: str) -> list[AdjudicationItem]:
        first, second = self.annotators
        items = []
        for sid, alias in units:
            a = self.labels.get((first, sid, alias))
            b = self.labels.get((second, sid, alias))
            if a is None or b is None:
                continue
            dims = a.differing_dimensions(b)
            if not dims:
                continue
            index = self._item_index(sid)
            resolution = self.resolutions.get((sid, alias))
            items.append(
                AdjudicationItem(
                    item_id=f"{kind}-{index}-{alias}",
                    kind=kind,
                    sample_id=sid,
                    alias=alias,
                    dimensions=dims,
                    labels={first: a.to_dict(), second: b.to_dict()},
                    resolution=resolution.to_dict() if resolution else None,
                )
            )
        return items

    def calibration_disagreements(self) -> list[AdjudicationItem]:
        return self._disagreements(self.calibration_units(), "cal")

    def review_disagreements(self) -> list[AdjudicationItem]:
        return self._disagreements(self.solo_units(), "rev")

    def all_disagreements(self) -> list[AdjudicationItem]:
        return self.calibration_disagreements() + self.review_disagreements()

    # -- writes (already validated against the current phase) ---------------

    def apply_label(self, annotator: str, sample_id: str, alias: str, values: LabelValues):
        self.labels[(annotator, sample_id, alias)] = values

    def apply_resolution(self, sample_id: str, alias: str, values: LabelValues):
        self.resolutions[(sample_id, alias)] = values

    # -- gating ------------------------------------------------------------

    def check_label_allowed(self, annotator: str, sample_id: str, alias: str) -> None:
        if annotator not in self.annotators:
            raise PermissionError(f"unknown annotator {annotator!r}")
        if not self.unit_exists(sample_id, alias):
            raise KeyError(f"unknown sample/alias {sample_id}/{alias}")
        if (sample_id, alias) in self.resolutions:
            raise PhaseViolation("item already adjudicated; labels are frozen")
        phase = self.phase()
        index = self._item_index(sample_id)
        in_calibration = index is not None and index < self.calibration_size
        if phase == "calibration":
            if not in_calibration:
                raise PhaseViolation("only calibration items may be labeled now")
        elif phase == "solo":
            if in_calibration or annotator != self.annotators[0]:
                raise PhaseViolation("solo phase: first annotator labels the remaining items")
        elif phase == "review":
            if in_calibration or annotator != self.annotators[1]:
                raise PhaseViolation("review phase: second annotator re-labels solo items")
        else:
            raise PhaseViolation(f"no labels accepted in phase {phase}")

    def check_resolution_allowed(self, item_id: str) -> AdjudicationItem:
        phase = self.phase()
        if phase not in ("adjudication", "review"):
            raise PhaseViolation(f"no resolutions accepted in phase {phase}")
        for item in self.all_disagreements():
            if item.item_id == item_id:
                if item.resolution is not None:
                    raise PhaseViolation(f"{item_id} is already resolved")
                if phase == "adjudication" and item.kind != "cal":
                    raise PhaseViolation("only calibration disagreements are open now")
                if phase == "review" and item.kind != "rev":
                    raise PhaseViolation("only review disagreements are open now")
                return item
        raise KeyError(f"{item_id} is not a disagreement")

    # -- reads ---------------------------------------------------------------

    def presentation_order(self, annotator: str, indices: list[int]) -> list[int]:
        # Same items, independently shuffled per annotator; deterministic.
        order = indices[:]
        random.Random(f"{self.session_id}:{annotator}").shuffle(order)
        return order

    def next_item(self, annotator: str) -> dict:
        if annotator not in self.annotators:
            raise PermissionError(f"unknown annotator {annotator!r}")
        phase = self.phase()
        payload: dict = {"phase": phase, "item": None}
        if phase == "calibration":
            indices = self.presentation_order(
                annotator, list(range(self.calibration_size))
            )
            pending = [i for i in indices if not self._item_done(annotator, i)]
            payload["remaining"] = len(pending)
            if pending:
                payload["item"] = self._item_payload(pending[0])
            else:
                payload["phase_complete"] = True
                payload["waiting_for"] = self._calibration_waiting(annotator)
        elif phase == "adjudication":
            open_items = [
                d.to_dict() for d in self.calibration_disagreements() if d.resolution is None
            ]
            payload["remaining"] = len(open_items)
            payload["disagreements"] = open_items
        elif phase == "solo":
            if annotator == self.annotators[0]:
                indices = list(range(self.calibration_size, len(self.frame.items)))
                pending = [i for i in indices if not self._item_done(annotator, i)]
                payload["remaining"] = len(pending)
                if pending:
                    payload["item"] = self._item_payload(pending[0])
            else:
                payload["remaining"] = 0
                payload["waiting_for"] = self.annotators[0]
        elif phase == "review":
            if annotator == self.annotators[1]:
                indices = list(range(self.calibration_size, len(self.frame.items)))
                pending = [i for i in indices if not self._item_done(annotator, i)]
                payload["remaining"] = len(pending)
                if pending:
                    item = self._item_payload(pending[0])
                    item["prior_labels"] = self._prior_labels(pending[0])
                    payload["item"] = item
                else:
                    open_items = [
                        d.to_dict()
                        for d in self.review_disagreements()
                        if d.resolution is None
                    ]
                    payload["remaining"] = len(open_items)
                    payload["disagreements"] = open_items
            else:
                payload["remaining"] = 0
                payload["waiting_for"] = self.annotators[1]
        else:
            payload["remaining"] = 0
            payload["closed"] = True
        return payload

    def _item_done(self, annotator: str, index: int) -> bool:
        return all(
            (annotator, sid, alias) in self.labels
            for sid, alias in self.item_units(index)
        )

    def _calibration_waiting(self, annotator: str) -> str | None:
        other = [a for a in self.annotators if a != annotator][0]
        done = all(
            self._item_done(other, i) for i in range(self.calibration_size)
        )
        return None if done else other

    def _item_payload(self, index: int) -> dict:
        item = self.frame.items[index]
        return {
            "index": index,
            "sample_id": item.sample_id,
            "m_pre": item.m_pre,
            "reference": item.reference,
            "candidates": [{"alias": a, "text": t} for a, t in item.candidates],
        }

    def _prior_labels(self, index: int) -> dict:
        first = self.annotators[0]
        item = self.frame.items[index]
        priors = {}
        for alias, _ in item.candidates:
            values = self.labels.get((first, item.sample_id, alias))
            if values is not None:
                priors[alias] = values.to_dict()
        return priors

    def progress(self, annotator: str) -> dict:
        phase = self.phase()
        if phase in ("calibration",):
            total = self.calibration_size
            done = sum(
                1 for i in range(self.calibration_size) if self._item_done(annotator, i)
            )
        elif phase in ("solo", "review"):
            indices = range(self.calibration_size, len(self.frame.items))
            total = len(self.frame.items) - self.calibration_size
            done = sum(1 for i in indices if self._item_done(annotator, i))
        else:
            total = done = 0
        return {"phase": phase, "items_done": done, "items_total": total}

    # -- agreement and export ------------------------------------------------

    def double_labeled_units(self) -> list[tuple[str, str]]:
        first, second = self.annotators
        units = []
        for index in range(len(self.frame.items)):
            for sid, alias in self.item_units(index):
                if (first, sid, alias) in self.labels and (second, sid, alias) in self.labels:
                    units.append((sid, alias))
        return units

    def _dimension_kappa(self, units) -> dict:
        first, second = self.annotators
        result: dict = {}
        for dim in BASE_DIMENSIONS:
            a = [getattr(self.labels[(first, s, al)], dim) for s, al in units]
            b = [getattr(self.labels[(second, s, al)], dim) for s, al in units]
            result[dim] = self._kappa_or_none(a, b)
        both_applicable = [
            (s, al)
            for s, al in units
            if self.labels[(first, s, al)].applicability
            and self.labels[(second, s, al)].applicability
        ]
        for dim in CONDITIONAL_DIMENSIONS:
            if not both_applicable:
                result[dim] = None
                continue
            a = [getattr(self.labels[(first, s, al)], dim) for s, al in both_applicable]
            b = [getattr(self.labels[(second, s, al)], dim) for s, al in both_applicable]
            result[dim] = self._kappa_or_none(a, b)
        return result

    @staticmethod
    def _kappa_or_none(a, b) -> dict | None:
        if not a:
            return None
        try:
            k = cohen_kappa(a, b)
        except UndefinedKappaError:
            return None
        return {
            "kappa": k.kappa,
            "observed": k.observed,
            "expected": k.expected,
            "items": k.items,
        }

    def agreement(self) -> dict:
        units = self.double_labeled_units()
        if not units:
            raise LookupError("no doubly-labeled items yet")
        overall = self._dimension_kappa(units)
        # Batch unit: calibration_size items; both per-batch and cumulative
        # curves are reported since the unit of the published ranges is
        # unspecified.
        per_item: dict[str, list[tuple[str, str]]] = {}
        order: list[str] = []
        for sid, alias in units:
            if sid not in per_item:
                per_item[sid] = []
                order.append(sid)
            per_item[sid].append((sid, alias))
        batches = []
        cumulative = []
        chunk = self.calibration_size
        for start in range(0, len(order), chunk):
            sample_ids = order[start : start + chunk]
            batch_units = [u for sid in sample_ids for u in per_item[sid]]
            upto_units = [u for sid in order[: start + len(sample_ids)] for u in per_item[sid]]
            batches.append(
                {"items": len(sample_ids), "dimensions": self._dimension_kappa(batch_units)}
            )
            cumulative.append(
                {"items": start + len(sample_ids), "dimensions": self._dimension_kappa(upto_units)}
            )
        return {
            "session_id": self.session_id,
            "units": len(units),
            "dimensions": overall,
            "batches": batches,
            "cumulative": cumulative,
        }

    def export(self) -> list[dict]:
        if self.phase() != "closed":
            raise PhaseViolation("session is not closed yet")
        first = self.annotators[0]
        records = []
        for index in range(len(self.frame.items)):
            for sid, alias in self.item_units(index):
                values = self.resolutions.get((sid, alias))
                annotator = "adjudicated"
                if values is None:
                    values = self.labels[(first, sid, alias)]
                    annotator = first
                records.append(
                    {
                        "sample_id": sid,
                        "alias": alias,
                        "annotator_id": annotator,
                        **values.to_dict(),
                    }
                )
        return records

    def snapshot(self) -> dict:
        """Canonical state digest used to verify replay equivalence."""
        return {
            "session_id": self.session_id,
            "frame": self.frame_name,
            "annotators": self.annotators,
            "calibration_size": self.calibration_size,
            "phase": self.phase(),
            "labels": {
                f"{a}|{s}|{al}": v.to_dict()
                for (a, s, al), v in sorted(self.labels.items())
            },
            "resolutions": {
                f"{s}|{al}": v.to_dict()
                for (s, al), v in sorted(self.resolutions.items())
            },
        }


class PhaseViolation(RuntimeError):
    pass


class EventLog:
    """Append-only JSONL log; every append is flushed and fsynced."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.next_event_id = 1
        self._lock = threading.Lock()

    def replay(self) -> list[dict]:
        events = []
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        events.append(json.loads(line))
        if events:
            self.next_event_id = events[-1]["event_id"] + 1
        return events

    def append(self, event: dict) -> dict:
        with self._lock:
            event = {"event_id": self.next_event_id, **event}
            self.next_event_id += 1
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
                fh.write(json.dumps(event, sort_keys=True, ensure_ascii=False) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        return event


class AnnotationServer:
    """All sessions, rebuilt from the event log at startup."""

    def __init__(self, log_path: str | Path, frames_dir: str | Path):
        self.log = EventLog(log_path)
        self.frames_dir = Path(frames_dir)
        self.sessions: dict[str, SessionState] = {}
        self._frame_sessions: dict[str, str] = {}
        self._write_lock = threading.Lock()
        for event in self.log.replay():
            self._apply(event)

    def _apply(self, event: dict) -> None:
        kind = event["kind"]
        if kind == "session_created":
            frame = load_frame(self.frames_dir / event["frame"])
            state = SessionState(
                session_id=event["session_id"],
                frame_name=event["frame"],
                frame=frame,
                annotators=list(event["annotators"]),
                calibration_size=int(event["calibration_size"]),
            )
            self.sessions[state.session_id] = state
            self._frame_sessions[event["frame"]] = state.session_id
        elif kind == "label":
            state = self.sessions[event["session_id"]]
            state.apply_label(
                event["annotator"],
                event["sample_id"],
                event["alias"],
                LabelValues.from_dict(event["labels"]),
            )
        elif kind == "resolution":
            state = self.sessions[event["session_id"]]
            state.apply_resolution(
                event["sample_id"], event["alias"], LabelValues.from_dict(event["labels"])
            )
        else:
            raise ValueError(f"unknown event kind {kind!r}")

    def _record(self, event: dict) -> None:
        event = self.log.append({**event, "ts": _now()})
        self._apply(event)

    # -- command handlers ----------------------------------------------------

    def create_session(self, frame: str, annotators: list[str], calibration_size: int) -> str:
        if frame in self._frame_sessions:
            raise FileExistsError(f"a session for frame {frame} already exists")
        if len(annotators) != 2 or len(set(annotators)) != 2:
            raise LabelError("exactly two distinct annotators are required")
        frame_path = self.frames_dir / frame
        if not frame_path.exists():
            raise FileNotFoundError(f"no frame named {frame}")
        loaded = load_frame(frame_path)
        if not 1 <= calibration_size <= len(loaded.items):
            raise LabelError(
                f"calibration_size must be in [1, {len(loaded.items)}]"
            )
        session_id = uuid.uuid4().hex[:12]
        with self._write_lock:
            self._record(
                {
                    "kind": "session_created",
                    "session_id": session_id,
                    "frame": frame,
                    "annotators": annotators,
                    "calibration_size": calibration_size,
                }
            )
        return session_id

    def submit_label(
        self, session_id: str, annotator: str, sample_id: str, alias: str, values: LabelValues
    ) -> dict:
        state = self._session(session_id)
        with self._write_lock:
            values.validate()
            state.check_label_allowed(annotator, sample_id, alias)
            self._record(
                {
                    "kind": "label",
                    "session_id": session_id,
                    "annotator": annotator,
                    "sample_id": sample_id,
                    "alias": alias,
                    "labels": values.to_dict(),
                }
            )
            return {"ok": True, "progress": state.progress(annotator)}

    def resolve(self, session_id: str, item_id: str, values: LabelValues) -> dict:
        state = self._session(session_id)
        with self._write_lock:
            values.validate()
            item = state.check_resolution_allowed(item_id)
            self._record(
                {
                    "kind": "resolution",
                    "session_id": session_id,
                    "sample_id": item.sample_id,
                    "alias": item.alias,
                    "labels": values.to_dict(),
                }
            )
            return {"ok": True, "phase": state.phase()}

    def _session(self, session_id: str) -> SessionState:
        if session_id not in self.sessions:
            raise KeyError(f"no session {session_id}")
        return self.sessions[session_id]


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# ---------------------------------------------------------------------------
# FastAPI wiring


class CreateSessionRequest(BaseModel):
    frame: str
    annotators: list[str]
    calibration_size: int = 25


class LabelRequest(BaseModel):
    annotator: str
    sample_id: str
    alias: str
    semantic_equivalence: bool
    applicability: bool
    has_explanation: bool
    feedback_type: Optional[str] = None
    category: Optional[str] = None


class ResolveRequest(BaseModel):
    semantic_equivalence: bool
    applicability: bool
    has_explanation: bool
    feedback_type: Optional[str] = None
    category: Optional[str] = None


def create_app(
    log_path: str | Path,
    frames_dir: str | Path,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="revcorpus annotation service")
    server = AnnotationServer(log_path, frames_dir)
    app.state.server = server

    def _http(exc: Exception) -> HTTPException:
        if isinstance(exc, LabelError):
            return HTTPException(422, str(exc))
        if isinstance(exc, PhaseViolation):
            return HTTPException(409, str(exc))
        if isinstance(exc, PermissionError):
            return HTTPException(403, str(exc))
        if isinstance(exc, FileExistsError):
            return HTTPException(409, str(exc))
        if isinstance(exc, (KeyError, FileNotFoundError, LookupError)):
            return HTTPException(404, str(exc))
        return HTTPException(500, str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok", "sessions": len(server.sessions)}

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        try:
            session_id = server.create_session(
                req.frame, req.annotators, req.calibration_size
            )
        except Exception as exc:
            raise _http(exc) from exc
        state = server.sessions[session_id]
        return {"session_id": session_id, "phase": state.phase()}

    @app.get("/sessions/{session_id}")
    def session_status(session_id: str):
        try:
            state = server._session(session_id)
        except Exception as exc:
            raise _http(exc) from exc
        return {
            "session_id": session_id,
            "frame": state.frame_name,
            "annotators": state.annotators,
            "calibration_size": state.calibration_size,
            "phase": state.phase(),
            "items": len(state.frame.items),
        }

    @app.get("/sessions/{session_id}/next")
    def next_item(session_id: str, annotator: str = Query(...)):
        try:
            state = server._session(session_id)
            return state.next_item(annotator)
        except Exception as exc:
            raise _http(exc) from exc

    @app.post("/sessions/{session_id}/labels")
    def submit_label(session_id: str, req: LabelRequest):
        try:
            values = LabelValues(
                semantic_equivalence=req.semantic_equivalence,
                applicability=req.applicability,
                has_explanation=req.has_explanation,
                feedback_type=req.feedback_type,
                category=req.category,
            )
            return server.submit_label(
                session_id, req.annotator, req.sample_id, req.alias, values
            )
        except Exception as exc:
            raise _http(exc) from exc

    @app.get("/sessions/{session_id}/agreement")
    def agreement(session_id: str):
        try:
            return server._session(session_id).agreement()
        except Exception as exc:
            raise _http(exc) from exc

    @app.get("/sessions/{session_id}/adjudications")
    def adjudications(session_id: str):
        try:
            state = server._session(session_id)
            return {"items": [d.to_dict() for d in state.all_disagreements()]}
        except Exception as exc:
            raise _http(exc) from exc

    @app.post("/sessions/{session_id}/adjudications/{item_id}/resolve")
    def resolve(session_id: str, item_id: str, req: ResolveRequest):
        try:
            values = LabelValues(
                semantic_equivalence=req.semantic_equivalence,
                applicability=req.applicability,
                has_explanation=req.has_explanation,
                feedback_type=req.feedback_type,
                category=req.category,
            )
            return server.resolve(session_id, item_id, values)
        except Exception as exc:
            raise _http(exc) from exc

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str):
        try:
            records = server._session(session_id).export()
        except Exception as exc:
            raise _http(exc) from exc
        return JSONResponse({"records": records})

    if ui_dir is not None:
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
