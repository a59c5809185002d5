"""The serve loop: newline-delimited JSON, one object per line.

stdout carries protocol objects only; everything else (startup notes,
per-request logs, tracebacks) goes to stderr. The loop never dies on a
bad line: whatever cannot be answered is answered with an error object,
and serving continues until stdin closes.
"""

from __future__ import annotations

import json
import logging
import sys
import time
from typing import IO

PROTOCOL_HELLO = "automc-eval/1"

logger = logging.getLogger(__name__)


def _write(stdout: IO[str], payload: dict) -> None:
    stdout.write(json.dumps(payload, separators=(",", ":")) + "\n")
    stdout.flush()


def _error_for(line: str) -> dict:
    """Error object for a line that is not a well-formed request.

    The request id is echoed when one can be salvaged, so the engine can
    still correlate the failure.
    """
    request_id = None
    try:
        obj = json.loads(line)
    except json.JSONDecodeError:
        return {"id": None, "error": "request is not valid JSON"}
    if not isinstance(obj, dict):
        return {"id": None, "error": "request is not a JSON object"}
    if isinstance(obj.get("id"), (int, str)):
        request_id = obj["id"]
    missing = [key for key in ("id", "scheme", "task", "pretrain_epochs") if key not in obj]
    if missing:
        return {"id": request_id, "error": f"request is missing fields: {', '.join(missing)}"}
    return {"id": request_id, "error": "request fields have the wrong types"}


def _parse_request(line: str) -> tuple[object, list[str], dict, int] | None:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError:
        return None
    if not isinstance(obj, dict) or "id" not in obj:
        return None
    scheme = obj.get("scheme")
    task = obj.get("task")
    pretrain = obj.get("pretrain_epochs")
    if not isinstance(scheme, list) or not all(isinstance(s, str) for s in scheme):
        return None
    if not isinstance(task, dict):
        return None
    if isinstance(pretrain, bool) or not isinstance(pretrain, int) or pretrain < 1:
        return None
    return obj["id"], scheme, task, pretrain


def serve(
    backend,
    stdin: IO[str] | None = None,
    stdout: IO[str] | None = None,
    respond_delay: float = 0.0,
) -> int:
    """Handle one session; returns the process exit code."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout

    greeting = stdin.readline()
    if not greeting:
        logger.info("stdin closed before the handshake")
        return 0
    try:
        hello = json.loads(greeting)
    except json.JSONDecodeError:
        logger.error("handshake is not valid JSON: %r", greeting.strip()[:200])
        return 2
    if not isinstance(hello, dict) or hello.get("hello") != PROTOCOL_HELLO:
        logger.error("unsupported protocol greeting: %r", greeting.strip()[:200])
        return 2
    _write(stdout, {"ready": True, "name": backend.name})
    logger.info("ready as %s", backend.name)

    served = 0
    errors = 0
    try:
        for line in stdin:
            if not line.strip():
                continue
            if respond_delay > 0:
                time.sleep(respond_delay)
            parsed = _parse_request(line)
            if parsed is None:
                errors += 1
                _write(stdout, _error_for(line))
                continue
            request_id, scheme, task, pretrain = parsed
            try:
                metrics = backend.evaluate(scheme, task, pretrain)
            except Exception as exc:
                # a bad request must never take the session down
                errors += 1
                logger.warning("request %r failed: %s", request_id, exc)
                _write(stdout, {"id": request_id, "error": str(exc)})
                continue
            served += 1
            _write(stdout, {"id": request_id, **metrics})
    except BrokenPipeError:
        logger.info("client closed the pipe")
        return 0
    logger.info("session over: %d evaluated, %d errors", served, errors)
    return 0
