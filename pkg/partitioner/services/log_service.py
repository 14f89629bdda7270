"""
Log service keeping recent solver, sweep and simulation events in memory.
"""
import logging
import threading
from collections import deque
from datetime import datetime
from typing import Any, Deque, Dict, List

from partitioner.core.config import settings

logger = logging.getLogger(__name__)


class LogService:
    """Service collecting structured run events and captured log records."""

    def __init__(self, max_logs: int = 1000, capture_level: int = logging.INFO):
        """
        Initialize the log service.

        Args:
            max_logs: Maximum number of events to keep in memory
            capture_level: Minimum level of `logging` records captured
        """
        self.max_logs = max_logs
        self.logs: Deque[Dict[str, Any]] = deque(maxlen=max_logs)
        self.lock = threading.Lock()
        self._setup_log_capture(capture_level)

        logger.debug("LogService initialized")

    def _setup_log_capture(self, capture_level: int) -> None:
        """Attach a handler to the package logger so every record is kept."""

        class LogCaptureHandler(logging.Handler):
            def __init__(self, log_service):
                super().__init__()
                self.log_service = log_service

            def emit(self, record):
                try:
                    self.log_service.add_log({
                        "type": "log",
                        "level": record.levelname,
                        "message": record.getMessage(),
                        "module": record.module,
                        "function": record.funcName,
                        "line": record.lineno,
                        "timestamp": datetime.fromtimestamp(record.created).isoformat(),
                        "thread_id": record.thread,
                    })
                except Exception:
                    pass  # never let logging break a solve

        handler = LogCaptureHandler(self)
        handler.setLevel(capture_level)
        logging.getLogger("partitioner").addHandler(handler)

    def add_log(self, log_entry: Dict[str, Any]) -> None:
        """Add a new event."""
        with self.lock:
            self.logs.append(log_entry)

    def add_custom_log(self, message: str, level: str = "INFO", **kwargs: Any) -> None:
        """
        Add a structured event.

        Args:
            message: Human-readable message
            level: Log level (INFO, DEBUG, WARNING, ERROR)
            **kwargs: Additional event data (action, gap, status, ...)
        """
        self.add_log({
            "type": "custom",
            "level": level,
            "message": message,
            "timestamp": datetime.now().isoformat(),
            "thread_id": threading.get_ident(),
            **kwargs,
        })

    def get_recent_logs(self, count: int = 100) -> List[Dict[str, Any]]:
        """Return the `count` most recent events, oldest first."""
        with self.lock:
            return list(self.logs)[-count:]

    def events(self, action: str) -> List[Dict[str, Any]]:
        """Return every kept custom event with the given action."""
        with self.lock:
            return [entry for entry in self.logs if entry.get("action") == action]

    def clear(self) -> None:
        with self.lock:
            self.logs.clear()

    def get_stats(self) -> Dict[str, Any]:
        """Statistics about the kept events."""
        with self.lock:
            return {
                "total_logs": len(self.logs),
                "max_logs": self.max_logs,
                "oldest_log": self.logs[0]["timestamp"] if self.logs else None,
                "newest_log": self.logs[-1]["timestamp"] if self.logs else None,
            }


# Instance globale du service de logs
log_service = LogService(max_logs=settings.MAX_LOGS)
