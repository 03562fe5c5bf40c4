"""Event-sourced campaign state.

Every state change is validated, appended to the campaign's journal, and
only then applied to the in-memory state **through the same pure function
used for recovery** (:func:`apply_event`).  Rebuilding from the journal and
the live state therefore cannot diverge: they are literally the same code
path over the same event sequence.

All mutations run under one lock (single journal appender); lease issuance
and quota checks happen inside that critical section, so no interleaving of
workers can oversubscribe an image.
"""

from __future__ import annotations

import copy
import threading
import time
import uuid
from pathlib import Path

from .content import RATING_CRITERIA, default_guidelines
from .journal import Journal, read_snapshot, write_snapshot

CAPTION = "caption"
RATING = "rating"

MAX_CAPTION_CHARS = 500


class UnknownCampaign(KeyError):
    pass


class UnknownTask(KeyError):
    pass


class UnknownLease(KeyError):
    pass


class CampaignClosed(ValueError):
    pass


class WorkerIneligible(ValueError):
    pass


class NoTasksAvailable(LookupError):
    pass


class LeaseExpired(ValueError):
    pass


class EmptySubmission(ValueError):
    pass


class InvalidSubmission(ValueError):
    pass


class QuotaExceeded(ValueError):
    pass


class InvalidSpec(ValueError):
    def __init__(self, diagnostics: list[tuple[str, str]]):
        self.diagnostics = diagnostics
        detail = "; ".join(f"{field}: {message}" for field, message in diagnostics)
        super().__init__(f"invalid campaign spec ({detail})")


# ---------------------------------------------------------------------------
# Pure event application
# ---------------------------------------------------------------------------


def apply_event(state: dict | None, event: dict) -> dict:
    """Fold one journal event into a campaign state dict.

    Events are already-validated facts; this function never rejects one.
    ``state`` is None only for the campaign_created event.
    """
    kind = event["kind"]
    payload = event["payload"]
    if kind == "campaign_created":
        state = copy.deepcopy(payload["campaign"])
        state["state"] = "open"
        state["leases"] = {}
        state["next_seq"] = 1
    elif state is None:
        raise ValueError(f"event {kind!r} before campaign_created")
    if kind == "lease_issued":
        lease = dict(payload)
        lease["consumed"] = False
        state["leases"][lease["lease_id"]] = lease
    elif kind == "caption_submitted":
        state["leases"][payload["lease_id"]]["consumed"] = True
        task = _task(state, payload["task_id"])
        task["submissions"].append(
            {
                "worker_id": payload["worker_id"],
                "index": payload["index"],
                "text": payload["text"],
                "lease_id": payload["lease_id"],
            }
        )
    elif kind == "rating_submitted":
        state["leases"][payload["lease_id"]]["consumed"] = True
        task = _task(state, payload["task_id"])
        task["submissions"].append(
            {
                "worker_id": payload["worker_id"],
                "rating": payload["rating"],
                "lease_id": payload["lease_id"],
            }
        )
    elif kind == "image_quota_met":
        _task(state, payload["task_id"])["quota_met"] = True
    elif kind == "campaign_closed":
        state["state"] = "closed"
    state["next_seq"] = event["seq"] + 1
    return state


def _task(state: dict, task_id: str) -> dict:
    for task in state["tasks"]:
        if task["task_id"] == task_id:
            return task
    raise KeyError(task_id)


def replay(events: list[dict]) -> dict | None:
    state: dict | None = None
    for event in events:
        state = apply_event(state, event)
    return state


# ---------------------------------------------------------------------------
# Spec validation
# ---------------------------------------------------------------------------


def _validate_spec(spec: dict) -> tuple[dict, list[tuple[str, str]]]:
    problems: list[tuple[str, str]] = []
    kind = spec.get("kind")
    if kind not in (CAPTION, RATING):
        problems.append(("kind", f"must be '{CAPTION}' or '{RATING}', got {kind!r}"))
        return {}, problems
    quota = spec.get("quota")
    if not isinstance(quota, int) or quota < 1:
        problems.append(("quota", f"must be an integer >= 1, got {quota!r}"))
    eligibility = spec.get("eligibility") or {}
    if not isinstance(eligibility, dict):
        problems.append(("eligibility", "must be a mapping of attribute -> allowed values"))
        eligibility = {}
    normalized: dict = {
        "kind": kind,
        "quota": quota,
        "eligibility": {
            key: sorted(values) if isinstance(values, (list, tuple, set)) else [values]
            for key, values in eligibility.items()
        },
    }
    if kind == CAPTION:
        language = spec.get("language")
        if not language:
            problems.append(("language", "caption campaigns need a language code"))
        guidelines = spec.get("guidelines")
        if guidelines is None and language:
            guidelines = default_guidelines(language)
        if not guidelines:
            problems.append(
                ("guidelines", f"no guidelines supplied and no built-ins for {language!r}")
            )
        images = spec.get("images") or []
        if not images:
            problems.append(("images", "caption campaigns need a non-empty image list"))
        seen_ids: set[str] = set()
        tasks = []
        for i, image in enumerate(images):
            if isinstance(image, str):
                image = {"id": image}
            image_id = image.get("id")
            if not image_id:
                problems.append((f"images[{i}]", "missing image id"))
                continue
            if image_id in seen_ids:
                problems.append((f"images[{i}]", f"duplicate image id {image_id!r}"))
                continue
            seen_ids.add(image_id)
            tasks.append(
                {
                    "task_id": f"{{cid}}/img/{image_id}",
                    "image_id": image_id,
                    "uri": image.get("uri"),
                    "submissions": [],
                    "quota_met": False,
                }
            )
        normalized.update(language=language, guidelines=list(guidelines or []), tasks=tasks)
    else:
        criteria = spec.get("criteria") or RATING_CRITERIA
        pairs = spec.get("pairs") or []
        if not pairs:
            problems.append(("pairs", "rating campaigns need a non-empty pair list"))
        tasks = []
        for i, pair in enumerate(pairs):
            missing = [
                key
                for key in ("image_id", "src_index", "tgt_index", "src_text", "tgt_text")
                if key not in pair
            ]
            if missing:
                problems.append((f"pairs[{i}]", f"missing fields {missing}"))
                continue
            tasks.append(
                {
                    "task_id": f"{{cid}}/pair/{i}",
                    "image_id": pair["image_id"],
                    "src_index": pair["src_index"],
                    "tgt_index": pair["tgt_index"],
                    "src_text": pair["src_text"],
                    "tgt_text": pair["tgt_text"],
                    "submissions": [],
                    "quota_met": False,
                }
            )
        normalized.update(language=spec.get("language"), guidelines=list(criteria), tasks=tasks)
    return normalized, problems


# ---------------------------------------------------------------------------
# Store
# ---------------------------------------------------------------------------


class CampaignStore:
    """All campaigns under one data directory.

    One writer: every mutation is serialized through ``self._lock``, appended
    to the campaign journal (fsynced), then folded into memory with
    :func:`apply_event`.
    """

    def __init__(
        self,
        data_dir,
        lease_ttl: float = 900.0,
        lease_slack: int = 1,
        clock=time.time,
        fsync: bool = True,
    ):
        self.data_dir = Path(data_dir)
        self.lease_ttl = lease_ttl
        self.lease_slack = lease_slack
        self.clock = clock
        self.fsync = fsync
        self._lock = threading.RLock()
        self._states: dict[str, dict] = {}
        self._journals: dict[str, Journal] = {}
        self._task_index: dict[str, str] = {}  # task_id -> campaign_id
        self._load()

    # -- persistence --------------------------------------------------------

    def _journal_path(self, campaign_id: str) -> Path:
        return self.data_dir / f"{campaign_id}.journal.jsonl"

    def _snapshot_path(self, campaign_id: str) -> Path:
        return self.data_dir / f"{campaign_id}.snapshot.json"

    def _journal(self, campaign_id: str) -> Journal:
        if campaign_id not in self._journals:
            self._journals[campaign_id] = Journal(
                self._journal_path(campaign_id), fsync=self.fsync
            )
        return self._journals[campaign_id]

    def _load(self) -> None:
        if not self.data_dir.exists():
            return
        for path in sorted(self.data_dir.glob("*.journal.jsonl")):
            campaign_id = path.name[: -len(".journal.jsonl")]
            snapshot = read_snapshot(self._snapshot_path(campaign_id))
            state = snapshot["state"] if snapshot else None
            snap_seq = snapshot["last_seq"] if snapshot else 0
            for event in Journal(path).read_all():
                if event["seq"] > snap_seq:
                    state = apply_event(state, event)
            if state is not None:
                self._register(campaign_id, state)

    def _register(self, campaign_id: str, state: dict) -> None:
        self._states[campaign_id] = state
        for task in state["tasks"]:
            self._task_index[task["task_id"]] = campaign_id

    def _emit(self, campaign_id: str, kind: str, payload: dict) -> dict:
        state = self._states.get(campaign_id)
        seq = state["next_seq"] if state is not None else 1
        event = {"seq": seq, "ts": self.clock(), "kind": kind, "payload": payload}
        self._journal(campaign_id).append(event)
        new_state = apply_event(state, event)
        if state is None:
            self._register(campaign_id, new_state)
        return event

    def compact(self, campaign_id: str) -> None:
        """Write an atomic snapshot so recovery can skip replayed history."""
        with self._lock:
            state = self._state(campaign_id)
            write_snapshot(
                self._snapshot_path(campaign_id),
                {"last_seq": state["next_seq"] - 1, "state": state},
            )

    def close(self) -> None:
        with self._lock:
            for journal in self._journals.values():
                journal.close()

    # -- helpers ------------------------------------------------------------

    def _state(self, campaign_id: str) -> dict:
        try:
            return self._states[campaign_id]
        except KeyError:
            raise UnknownCampaign(campaign_id) from None

    def campaign_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._states)

    def state_dict(self, campaign_id: str) -> dict:
        """Deep copy of the campaign state, for inspection and tests."""
        with self._lock:
            return copy.deepcopy(self._state(campaign_id))

    def _active_leases(self, state: dict, task_id: str, now: float) -> list[dict]:
        return [
            lease
            for lease in state["leases"].values()
            if lease["task_id"] == task_id
            and not lease["consumed"]
            and lease["expires_at"] > now
        ]

    def _worker_submitted(self, state: dict, task_id: str, worker_id: str) -> bool:
        task = _task(state, task_id)
        return any(s["worker_id"] == worker_id for s in task["submissions"])

    def _worker_holds_lease(self, state: dict, task_id: str, worker_id: str, now: float) -> bool:
        return any(
            lease["worker_id"] == worker_id
            for lease in self._active_leases(state, task_id, now)
        )

    # -- commands -----------------------------------------------------------

    def create_campaign(self, spec: dict) -> dict:
        normalized, problems = _validate_spec(spec)
        if problems:
            raise InvalidSpec(problems)
        with self._lock:
            campaign_id = spec.get("id") or uuid.uuid4().hex[:12]
            if campaign_id in self._states:
                raise InvalidSpec([("id", f"campaign {campaign_id!r} already exists")])
            normalized["id"] = campaign_id
            for task in normalized["tasks"]:
                task["task_id"] = task["task_id"].format(cid=campaign_id)
            self._emit(campaign_id, "campaign_created", {"campaign": normalized})
            return self.state_dict(campaign_id)

    def close_campaign(self, campaign_id: str) -> None:
        with self._lock:
            state = self._state(campaign_id)
            if state["state"] != "closed":
                self._emit(campaign_id, "campaign_closed", {})

    def lease_task(
        self, campaign_id: str, worker_id: str, attributes: dict | None = None
    ) -> dict:
        """Issue a lease on the first available task and return its payload.

        Caption payloads contain the image, the guidelines, and progress
        counters; never any caption text.
        """
        if not worker_id:
            raise InvalidSubmission("worker_id must be non-empty")
        with self._lock:
            state = self._state(campaign_id)
            if state["state"] != "open":
                raise CampaignClosed(campaign_id)
            for attr, allowed in state["eligibility"].items():
                value = (attributes or {}).get(attr)
                if value not in allowed:
                    raise WorkerIneligible(
                        f"worker attribute {attr}={value!r} not in {allowed}"
                    )
            now = self.clock()
            quota = state["quota"]
            for task in state["tasks"]:
                submissions = len(task["submissions"])
                if submissions >= quota:
                    continue
                if self._worker_submitted(state, task["task_id"], worker_id):
                    continue
                if self._worker_holds_lease(state, task["task_id"], worker_id, now):
                    continue
                active = len(self._active_leases(state, task["task_id"], now))
                if active >= (quota - submissions) + self.lease_slack:
                    continue
                lease_id = uuid.uuid4().hex
                self._emit(
                    campaign_id,
                    "lease_issued",
                    {
                        "lease_id": lease_id,
                        "task_id": task["task_id"],
                        "worker_id": worker_id,
                        "issued_at": now,
                        "expires_at": now + self.lease_ttl,
                    },
                )
                return self._task_payload(state, task, lease_id)
            raise NoTasksAvailable(campaign_id)

    def _task_payload(self, state: dict, task: dict, lease_id: str) -> dict:
        lease = state["leases"][lease_id]
        base = {
            "campaign_id": state["id"],
            "kind": state["kind"],
            "task_id": task["task_id"],
            "lease_id": lease_id,
            "issued_at": lease["issued_at"],
            "expires_at": lease["expires_at"],
            "quota": state["quota"],
            "progress": self._progress(state),
        }
        if state["kind"] == CAPTION:
            base["language"] = state["language"]
            base["guidelines"] = list(state["guidelines"])
            base["image"] = {"id": task["image_id"], "uri": task["uri"]}
        else:
            base["criteria"] = list(state["guidelines"])
            base["pair"] = {
                "image_id": task["image_id"],
                "src_index": task["src_index"],
                "tgt_index": task["tgt_index"],
                "src_text": task["src_text"],
                "tgt_text": task["tgt_text"],
            }
        return base

    def _progress(self, state: dict) -> dict:
        collected = sum(len(t["submissions"]) for t in state["tasks"])
        expected = len(state["tasks"]) * state["quota"]
        return {"collected": collected, "expected": expected}

    def _checked_lease(self, task_id: str, lease_id: str) -> tuple[str, dict, dict]:
        campaign_id = self._task_index.get(task_id)
        if campaign_id is None:
            raise UnknownTask(task_id)
        state = self._state(campaign_id)
        lease = state["leases"].get(lease_id)
        if lease is None:
            raise UnknownLease(lease_id)
        if lease["task_id"] != task_id:
            raise UnknownLease(f"lease {lease_id} is not for task {task_id}")
        if state["state"] != "open":
            raise CampaignClosed(campaign_id)
        if lease["consumed"] or lease["expires_at"] <= self.clock():
            raise LeaseExpired(lease_id)
        return campaign_id, state, lease

    def submit_caption(self, task_id: str, lease_id: str, text: str) -> dict:
        with self._lock:
            campaign_id, state, lease = self._checked_lease(task_id, lease_id)
            if state["kind"] != CAPTION:
                raise InvalidSubmission("caption submitted to a rating campaign")
            if not text.strip():
                raise EmptySubmission("caption text is empty after trimming")
            if "\n" in text or "\r" in text:
                raise InvalidSubmission("caption must be a single line")
            if len(text) > MAX_CAPTION_CHARS:
                raise InvalidSubmission(
                    f"caption exceeds {MAX_CAPTION_CHARS} characters"
                )
            task = _task(state, task_id)
            if len(task["submissions"]) >= state["quota"]:
                raise QuotaExceeded(task_id)
            index = len(task["submissions"])
            self._emit(
                campaign_id,
                "caption_submitted",
                {
                    "lease_id": lease_id,
                    "task_id": task_id,
                    "worker_id": lease["worker_id"],
                    "index": index,
                    "text": text,
                },
            )
            if len(task["submissions"]) == state["quota"]:
                self._emit(campaign_id, "image_quota_met", {"task_id": task_id})
            return {
                "task_id": task_id,
                "image_id": task["image_id"],
                "index": index,
                "text": text,
                "worker_id": lease["worker_id"],
            }

    def submit_rating(self, task_id: str, lease_id: str, rating: int) -> dict:
        if not isinstance(rating, int) or not 1 <= rating <= 5:
            raise InvalidSubmission(f"rating must be an integer 1..5, got {rating!r}")
        with self._lock:
            campaign_id, state, lease = self._checked_lease(task_id, lease_id)
            if state["kind"] != RATING:
                raise InvalidSubmission("rating submitted to a caption campaign")
            task = _task(state, task_id)
            if len(task["submissions"]) >= state["quota"]:
                raise QuotaExceeded(task_id)
            self._emit(
                campaign_id,
                "rating_submitted",
                {
                    "lease_id": lease_id,
                    "task_id": task_id,
                    "worker_id": lease["worker_id"],
                    "rating": rating,
                },
            )
            if len(task["submissions"]) == state["quota"]:
                self._emit(campaign_id, "image_quota_met", {"task_id": task_id})
            return {
                "task_id": task_id,
                "rating": rating,
                "worker_id": lease["worker_id"],
            }

    # -- queries ------------------------------------------------------------

    def export_campaign(self, campaign_id: str, format: str) -> tuple[str, int, int]:
        """Render collected data; returns (content, collected, expected).

        Caption campaigns export the ``<image_id>#<index>\\t<text>`` caption
        file; rating campaigns export the Likert TSV.  Output depends only on
        the journal, so repeated exports are byte-identical.
        """
        with self._lock:
            state = self._state(campaign_id)
            progress = self._progress(state)
            if format == "captions":
                if state["kind"] != CAPTION:
                    raise InvalidSubmission("captions export of a rating campaign")
                lines = [
                    f"{task['image_id']}#{sub['index']}\t{sub['text']}"
                    for task in state["tasks"]
                    for sub in task["submissions"]
                ]
            elif format == "ratings":
                if state["kind"] != RATING:
                    raise InvalidSubmission("ratings export of a caption campaign")
                lines = ["\t".join(("image_id", "src_index", "tgt_index", "rating", "rater_id"))]
                lines.extend(
                    "\t".join(
                        (
                            task["image_id"],
                            str(task["src_index"]),
                            str(task["tgt_index"]),
                            str(sub["rating"]),
                            sub["worker_id"],
                        )
                    )
                    for task in state["tasks"]
                    for sub in task["submissions"]
                )
            else:
                raise ValueError(f"unknown export format {format!r}")
            content = "".join(line + "\n" for line in lines)
            return content, progress["collected"], progress["expected"]

    def stats(self, campaign_id: str) -> dict:
        with self._lock:
            state = self._state(campaign_id)
            now = self.clock()
            progress = self._progress(state)
            per_worker: dict[str, int] = {}
            for task in state["tasks"]:
                for sub in task["submissions"]:
                    per_worker[sub["worker_id"]] = per_worker.get(sub["worker_id"], 0) + 1
            active = sum(
                len(self._active_leases(state, task["task_id"], now))
                for task in state["tasks"]
            )
            return {
                "campaign_id": campaign_id,
                "kind": state["kind"],
                "state": state["state"],
                "tasks": len(state["tasks"]),
                "quota": state["quota"],
                "collected": progress["collected"],
                "expected": progress["expected"],
                "completion_percent": round(
                    100.0 * progress["collected"] / progress["expected"], 2
                )
                if progress["expected"]
                else 0.0,
                "tasks_at_quota": sum(
                    1 for t in state["tasks"] if len(t["submissions"]) >= state["quota"]
                ),
                "active_leases": active,
                "per_worker": per_worker,
            }
