"""Live session state: creation, optimistic edits, generate exclusion,
persistence.

Each session pairs an immutable engine config with a mutable InstructionSet
guarded by a revision counter.  Edits carry the revision they were based on
and are rejected on mismatch, so two clients cannot silently overwrite each
other.  Generation takes a snapshot under the session lock, runs outside it,
and refuses to overlap itself per session.
"""

from __future__ import annotations

import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import BusyError, CapacityError, ConflictError, ValidationError
from .instructions import ContentInstruction, ImageInstruction, InstructionSet, MotionInstruction
from .pipeline import EngineConfig, GenerationResult, generate
from .scenes import CONTENT_LABELS, MOTION_LABELS
from .serialization import (
    instructions_from_dict,
    load_session_file,
    result_digests,
    save_session_file,
)

ENV_PREFIX = "VIDEOLOOM_"


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    max_sessions: int = 64
    max_resolution: int = 512
    max_frames: int = 64
    data_dir: str = "videoloom-data"

    def __post_init__(self):
        for name in ("port", "max_sessions", "max_resolution", "max_frames"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v!r}")


# Environment names mirror the serve flags; flags beat env, env beats default.
_ENV_FIELDS = {
    "host": ("HOST", str),
    "port": ("PORT", int),
    "max_sessions": ("MAX_SESSIONS", int),
    "max_resolution": ("MAX_RESOLUTION", int),
    "max_frames": ("MAX_FRAMES", int),
    "data_dir": ("DATA_DIR", str),
}


def service_config_from_env(environ=None, **flags) -> ServiceConfig:
    """Resolve ServiceConfig with precedence flag > env > default.

    Keyword flags set to None count as absent.
    """
    environ = os.environ if environ is None else environ
    values = {}
    for name, (suffix, cast) in _ENV_FIELDS.items():
        raw = environ.get(ENV_PREFIX + suffix)
        if raw is not None:
            try:
                values[name] = cast(raw)
            except ValueError:
                raise ValidationError(
                    f"environment variable {ENV_PREFIX + suffix} must be "
                    f"{cast.__name__}, got {raw!r}"
                ) from None
    for name, value in flags.items():
        if name not in _ENV_FIELDS:
            raise ValidationError(f"unknown service flag {name!r}")
        if value is not None:
            values[name] = value
    return ServiceConfig(**values)


def default_instruction_set(config: EngineConfig) -> InstructionSet:
    return InstructionSet(
        image=ImageInstruction(pixels=config.blank_image()),
        content=ContentInstruction(text=CONTENT_LABELS[0]),
        motion=MotionInstruction(motion=MOTION_LABELS[0]),
        trajectory=None,
        lam=0.5,
    )


@dataclass
class Session:
    id: str
    config: EngineConfig
    instructions: InstructionSet
    seed: int
    revision: int = 0
    last_result: Optional[GenerationResult] = None
    stored_digests: Optional[dict] = None
    busy: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class SessionStore:
    """In-memory session table with per-session locking and server caps."""

    def __init__(self, service_config: Optional[ServiceConfig] = None):
        self.service_config = service_config or ServiceConfig()
        self._sessions: dict[str, Session] = {}
        self._table_lock = threading.Lock()

    def _check_caps(self, config: EngineConfig) -> None:
        caps = self.service_config
        if config.height > caps.max_resolution or config.width > caps.max_resolution:
            raise CapacityError(
                "max_resolution", caps.max_resolution, max(config.height, config.width)
            )
        if config.num_frames > caps.max_frames:
            raise CapacityError("max_frames", caps.max_frames, config.num_frames)

    def _admit(self, session: Session) -> Session:
        with self._table_lock:
            if len(self._sessions) >= self.service_config.max_sessions:
                raise CapacityError(
                    "max_sessions",
                    self.service_config.max_sessions,
                    len(self._sessions) + 1,
                )
            self._sessions[session.id] = session
        return session

    def create(
        self, config: Optional[EngineConfig] = None, seed: int = 0
    ) -> Session:
        config = config or EngineConfig()
        self._check_caps(config)
        session = Session(
            id=uuid.uuid4().hex,
            config=config,
            instructions=default_instruction_set(config),
            seed=int(seed),
        )
        return self._admit(session)

    def get(self, session_id: str) -> Session:
        with self._table_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise KeyError(f"unknown session {session_id!r}")
        return session

    def put_instructions(
        self, session_id: str, payload: dict, expected_revision: int
    ) -> int:
        session = self.get(session_id)
        with session.lock:
            if expected_revision != session.revision:
                raise ConflictError(
                    f"expected revision {expected_revision}, "
                    f"session is at {session.revision}"
                )
            updated = instructions_from_dict(payload, base=session.instructions)
            expected_shape = (
                session.config.channels,
                session.config.height,
                session.config.width,
            )
            if updated.image.shape != expected_shape:
                raise ValidationError(
                    f"image shape {updated.image.shape} does not match session "
                    f"config {expected_shape}",
                    path="instructions.image",
                )
            session.instructions = updated
            session.revision += 1
            return session.revision

    def run_generate(
        self, session_id: str, seed_override: Optional[int] = None
    ) -> GenerationResult:
        session = self.get(session_id)
        with session.lock:
            if session.busy:
                raise BusyError(f"session {session_id} is already generating")
            session.busy = True
            instructions = session.instructions
            config = session.config
            seed = session.seed if seed_override is None else int(seed_override)
        try:
            result = generate(instructions, config, seed)
        except BaseException:
            with session.lock:
                session.busy = False
            raise
        with session.lock:
            session.last_result = result
            session.busy = False
        return result

    def save(self, session_id: str, path: Path | str) -> Path:
        session = self.get(session_id)
        with session.lock:
            digests = (
                result_digests(session.last_result)
                if session.last_result is not None
                else session.stored_digests
            )
            return save_session_file(
                path, session.config, session.instructions, session.seed, digests
            )

    def load(self, path: Path | str) -> Session:
        config, instructions, seed, digests = load_session_file(path)
        self._check_caps(config)
        session = Session(
            id=uuid.uuid4().hex,
            config=config,
            instructions=instructions,
            seed=seed,
            stored_digests=digests,
        )
        return self._admit(session)
