from .session import (
    DETECTION_UPDATE,
    EVENT_KINDS,
    FINISHED,
    IDLE,
    RUNNING,
    STOPPED,
    TAP,
    TOUCH,
    ScheduledEvent,
    Session,
    SessionConfig,
    TickTrace,
    ValidationFailed,
    create_session,
    run,
    write_trace,
)

__all__ = [
    "DETECTION_UPDATE",
    "EVENT_KINDS",
    "FINISHED",
    "IDLE",
    "RUNNING",
    "STOPPED",
    "TAP",
    "TOUCH",
    "ScheduledEvent",
    "Session",
    "SessionConfig",
    "TickTrace",
    "ValidationFailed",
    "create_session",
    "run",
    "write_trace",
]
