"""Fill-in-the-blank inflection drills generated from completed tables.

Each exercise asks the learner to inflect a stem for one slot; the answer
is the table cell's surface form.  Predicted cells are included by default
but carry their provenance so a client can disclose machine-generated
answers.  Exercises whose answer would appear verbatim in the prompt (the
bare-root slot, where the answer is the stem itself) are skipped.

Sessions schedule items through three Leitner boxes: new items start in
box 1, a correct answer promotes one box, a wrong answer demotes to box 1.
Box 3 is the "learned" shelf; once every item rests there the session is
exhausted.  Answers compare after Unicode NFC normalization and trimming.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
import unicodedata
from dataclasses import dataclass, field

from .errors import (
    EmptyAfterFilter,
    SessionExhausted,
    UnknownExercise,
    UnknownSession,
)
from .paradigms import SlotTemplate, TableSet

PROVENANCE_ATTESTED = "attested"
PROVENANCE_PREDICTED = "predicted"

UNMARKED = "unmarked"

# Prompt wording for the slot labels attested in the bundled data; unlisted
# labels fall back to the raw label and can be overridden via config.
DEFAULT_LABEL_DESCRIPTIONS: dict[str, str] = {
    "TR": "transitive",
    "PL": "plural",
    "SX": "subject extraction",
    "ATTR": "attributive",
    "3.II": "3rd person (II)",
    "3PL": "3rd person plural",
    "1SG.II": "my/I (series II)",
    "2SG.II": "your/you (series II)",
    "3PL.II": "their (series II)",
    "1PL.II": "our/we (series II)",
    "2PL.II": "your.pl (series II)",
}

BASE_FORM_DESCRIPTION = "base form"


@dataclass(frozen=True)
class Exercise:
    id: str
    lexeme_id: str
    variant_form: str
    dialect: str | None
    slot: str
    prompt: str
    answer: str
    provenance: str

    def public_view(self) -> dict:
        """The payload served to clients: everything except the answer."""
        return {
            "id": self.id,
            "lexeme_id": self.lexeme_id,
            "variant_form": self.variant_form,
            "dialect": self.dialect,
            "slot": self.slot,
            "prompt": self.prompt,
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class ExerciseFilter:
    dialects: frozenset[str] | None = None
    slots: frozenset[str] | None = None
    provenance: frozenset[str] | None = None

    def admits(self, exercise: Exercise) -> bool:
        if self.dialects is not None:
            group = exercise.dialect if exercise.dialect else UNMARKED
            if group not in self.dialects:
                return False
        if self.slots is not None and exercise.slot not in self.slots:
            return False
        if self.provenance is not None and (
            exercise.provenance not in self.provenance
        ):
            return False
        return True


def _exercise_id(lexeme_id: str, variant_form: str, slot: str) -> str:
    digest = hashlib.sha1(
        f"{lexeme_id}\t{variant_form}\t{slot}".encode("utf-8")
    )
    return digest.hexdigest()[:12]


def _prompt(
    variant_form: str,
    stem_gloss: str,
    slot: SlotTemplate,
    descriptions: dict[str, str],
) -> str:
    parts = [descriptions.get(label, label) for label in slot.labels[1:]]
    detail = ", ".join(parts) if parts else BASE_FORM_DESCRIPTION
    return f"Inflect '{variant_form}' ({stem_gloss}) for: {detail}"


def generate_exercises(
    tables: TableSet,
    exercise_filter: ExerciseFilter | None = None,
    descriptions: dict[str, str] | None = None,
) -> list[Exercise]:
    """One exercise per (table, slot) that passes the filter."""
    exercise_filter = exercise_filter or ExerciseFilter()
    descriptions = (
        DEFAULT_LABEL_DESCRIPTIONS if descriptions is None else descriptions
    )
    exercises: list[Exercise] = []
    for table in tables.sorted_tables():
        stem_gloss = table.stem_gloss()
        for slot in sorted(table.cells, key=SlotTemplate.render):
            cell = table.cells[slot]
            prompt = _prompt(table.variant_form, stem_gloss, slot, descriptions)
            if cell.surface in prompt:
                continue
            exercise = Exercise(
                id=_exercise_id(
                    table.lexeme_id, table.variant_form, slot.render()
                ),
                lexeme_id=table.lexeme_id,
                variant_form=table.variant_form,
                dialect=table.dialect
                if table.variant_kind == "dialect"
                else None,
                slot=slot.render(),
                prompt=prompt,
                answer=cell.surface,
                provenance=PROVENANCE_PREDICTED
                if cell.predicted
                else PROVENANCE_ATTESTED,
            )
            if exercise_filter.admits(exercise):
                exercises.append(exercise)
    if not exercises:
        raise EmptyAfterFilter("no exercises remain after filtering")
    return exercises


def exercises_to_json(exercises: list[Exercise]) -> str:
    payload = {
        "exercises": [
            {
                "id": e.id,
                "lexeme_id": e.lexeme_id,
                "variant_form": e.variant_form,
                "dialect": e.dialect,
                "slot": e.slot,
                "prompt": e.prompt,
                "answer": e.answer,
                "provenance": e.provenance,
            }
            for e in exercises
        ]
    }
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def exercises_from_json(text: str) -> list[Exercise]:
    payload = json.loads(text)
    return [Exercise(**item) for item in payload["exercises"]]


def normalize_answer(text: str) -> str:
    return unicodedata.normalize("NFC", text).strip()


@dataclass
class Attempt:
    exercise_id: str
    attempt: str
    correct: bool
    timestamp: float


NUM_BOXES = 3
LEARNED_BOX = 3


@dataclass
class Session:
    session_id: str
    # boxes[0..2] are Leitner boxes 1..3, each an ordered queue of ids.
    boxes: list[list[str]]
    history: list[Attempt] = field(default_factory=list)

    def box_of(self, exercise_id: str) -> int:
        for index, box in enumerate(self.boxes):
            if exercise_id in box:
                return index + 1
        raise UnknownExercise(f"exercise {exercise_id!r} not in this session")

    def box_counts(self) -> dict[str, int]:
        return {str(i + 1): len(box) for i, box in enumerate(self.boxes)}


class ExerciseService:
    """Session and scheduling layer over a fixed exercise set.

    Responses are a pure function of (exercise set, session history,
    request): next_exercise peeks without mutating, and the only state
    transitions happen in check_answer.  Each session's mutations are
    serialized under its own lock; distinct sessions proceed independently.
    """

    def __init__(self, exercises: list[Exercise]):
        self.exercises = {e.id: e for e in exercises}
        if len(self.exercises) != len(exercises):
            raise ValueError("exercise ids must be unique")
        self.order = [e.id for e in exercises]
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._service_lock = threading.Lock()
        self._counter = 0

    # -- sessions --

    def create_session(self) -> str:
        with self._service_lock:
            self._counter += 1
            session_id = f"s{self._counter:04d}"
            self._sessions[session_id] = Session(
                session_id=session_id,
                boxes=[list(self.order), [], []],
            )
            self._locks[session_id] = threading.Lock()
        return session_id

    def _session(self, session_id: str) -> tuple[Session, threading.Lock]:
        with self._service_lock:
            session = self._sessions.get(session_id)
            lock = self._locks.get(session_id)
        if session is None or lock is None:
            raise UnknownSession(f"unknown session {session_id!r}")
        return session, lock

    # -- scheduling --

    def next_exercise(
        self, session_id: str, dialect: str | None = None
    ) -> Exercise:
        """Peek the next item: lowest unlearned box, round-robin within it.

        Box 3 holds learned items and is not re-served; when boxes 1 and 2
        are both empty (under the dialect filter) the session is exhausted.
        """
        session, lock = self._session(session_id)
        with lock:
            for box in session.boxes[: LEARNED_BOX - 1]:
                for exercise_id in box:
                    exercise = self.exercises[exercise_id]
                    if dialect is not None:
                        group = exercise.dialect if exercise.dialect else UNMARKED
                        if group != dialect:
                            continue
                    return exercise
        raise SessionExhausted(
            f"session {session_id!r} has no remaining exercises"
            + (f" for dialect {dialect!r}" if dialect else "")
        )

    def check_answer(
        self, session_id: str, exercise_id: str, attempt: str
    ) -> dict:
        session, lock = self._session(session_id)
        exercise = self.exercises.get(exercise_id)
        if exercise is None:
            raise UnknownExercise(f"unknown exercise {exercise_id!r}")
        with lock:
            current = session.box_of(exercise_id)
            correct = normalize_answer(attempt) == normalize_answer(
                exercise.answer
            )
            destination = min(current + 1, NUM_BOXES) if correct else 1
            session.boxes[current - 1].remove(exercise_id)
            session.boxes[destination - 1].append(exercise_id)
            session.history.append(
                Attempt(
                    exercise_id=exercise_id,
                    attempt=attempt,
                    correct=correct,
                    timestamp=time.time(),
                )
            )
        return {"correct": correct, "expected": exercise.answer,
                "box": destination}

    def progress(self, session_id: str) -> dict:
        session, lock = self._session(session_id)
        with lock:
            attempts = len(session.history)
            correct = sum(1 for a in session.history if a.correct)
            counts = session.box_counts()
        remaining = sum(counts[str(i)] for i in range(1, LEARNED_BOX))
        return {
            "session_id": session_id,
            "boxes": counts,
            "attempts": attempts,
            "correct": correct,
            "accuracy": (correct / attempts) if attempts else 0.0,
            "remaining": remaining,
            "done": remaining == 0,
        }

    # -- snapshots --

    def snapshot(self) -> dict:
        with self._service_lock:
            sessions = list(self._sessions.values())
        return {
            "counter": self._counter,
            "sessions": [
                {
                    "session_id": s.session_id,
                    "boxes": s.boxes,
                    "history": [
                        [a.exercise_id, a.attempt, a.correct, a.timestamp]
                        for a in s.history
                    ],
                }
                for s in sessions
            ],
        }

    def save_snapshot(self, path) -> None:
        from pathlib import Path

        Path(path).write_text(
            json.dumps(self.snapshot(), ensure_ascii=False, sort_keys=True),
            encoding="utf-8",
        )

    def load_snapshot(self, path) -> None:
        from pathlib import Path

        data = json.loads(Path(path).read_text(encoding="utf-8"))
        with self._service_lock:
            self._counter = data["counter"]
            for raw in data["sessions"]:
                session = Session(
                    session_id=raw["session_id"],
                    boxes=[list(box) for box in raw["boxes"]],
                    history=[
                        Attempt(
                            exercise_id=h[0], attempt=h[1],
                            correct=h[2], timestamp=h[3],
                        )
                        for h in raw["history"]
                    ],
                )
                self._sessions[session.session_id] = session
                self._locks[session.session_id] = threading.Lock()
