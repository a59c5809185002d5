"""Client for external evaluator processes.

Wire protocol (newline-delimited JSON over the child's stdin/stdout):

    engine:    {"hello": "automc-eval/1"}
    evaluator: {"ready": true, "name": <string>}
    engine:    {"id": <int>, "scheme": [<canonical ids>],
                "task": {<7 task features>}, "pretrain_epochs": <int>}
    evaluator: {"id": <int>, "params": <num>, "flops": <num>, "accuracy": <num>}

One response line per request line, ids echoed, order preserved. The
evaluator's stderr is left alone (that is where its logs belong).
"""

from __future__ import annotations

import json
import os
import selectors
import shlex
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from .evaluation import ModelState, Scheme, TaskFeatures

PROTOCOL_HELLO = "automc-eval/1"
DEFAULT_TIMEOUT = 600.0

# lets deployments point `evaluator = "external"` runs at a subprocess
# without touching the config file
EVALUATOR_COMMAND_ENV = "COMPSEARCH_EVALUATOR"


class ProtocolError(RuntimeError):
    """Malformed, invalid, or out-of-order evaluator traffic."""

    def __init__(self, message: str, payload: bytes | str | None = None) -> None:
        if payload:
            text = payload.decode("utf-8", "replace") if isinstance(payload, bytes) else payload
            excerpt = text.strip()
            if len(excerpt) > 200:
                excerpt = excerpt[:200] + "..."
            message = f"{message}; payload: {excerpt!r}"
        super().__init__(message)


class HandshakeError(ProtocolError):
    pass


class EvaluatorTimeout(ProtocolError):
    pass


class ExternalEvaluator:
    """Spawns one evaluator process and talks the wire protocol to it.

    Access is serialized per instance: one outstanding request at a
    time. Use :class:`EvaluatorPool` to fan out across processes.
    """

    def __init__(
        self,
        command: str | Sequence[str],
        task: TaskFeatures,
        pretrain_epochs: int = 1,
        timeout: float = DEFAULT_TIMEOUT,
    ) -> None:
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.task = task
        self.pretrain_epochs = int(pretrain_epochs)
        self.timeout = timeout
        self.base_state = task.base_state()
        self._next_id = 0
        self._buffer = b""
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=None,
        )
        try:
            self._handshake()
        except Exception:
            self.close()
            raise

    # -- plumbing ---------------------------------------------------

    def _send(self, obj: dict) -> None:
        if self._proc.stdin is None or self._proc.poll() is not None:
            raise ProtocolError("evaluator process is not running")
        line = json.dumps(obj, separators=(",", ":")) + "\n"
        try:
            self._proc.stdin.write(line.encode("utf-8"))
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolError(f"evaluator pipe closed while sending: {exc}") from exc

    def _read_line(self, timeout: float) -> bytes:
        assert self._proc.stdout is not None
        fd = self._proc.stdout.fileno()
        deadline = time.monotonic() + timeout
        sel = selectors.DefaultSelector()
        sel.register(fd, selectors.EVENT_READ)
        try:
            while b"\n" not in self._buffer:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise EvaluatorTimeout(
                        f"no response within {timeout} s from {self.command}"
                    )
                if not sel.select(remaining):
                    continue
                chunk = os.read(fd, 65536)
                if not chunk:
                    raise ProtocolError("evaluator closed its output pipe", self._buffer)
                self._buffer += chunk
        finally:
            sel.close()
        line, self._buffer = self._buffer.split(b"\n", 1)
        return line

    def _read_object(self, timeout: float) -> dict:
        line = self._read_line(timeout)
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"evaluator sent invalid JSON: {exc}", line) from exc
        if not isinstance(obj, dict):
            raise ProtocolError("evaluator sent a non-object line", line)
        return obj

    def _handshake(self) -> None:
        self._send({"hello": PROTOCOL_HELLO})
        try:
            reply = self._read_object(self.timeout)
        except ProtocolError as exc:
            raise HandshakeError(f"handshake failed: {exc}") from exc
        if reply.get("ready") is not True or not isinstance(reply.get("name"), str):
            raise HandshakeError("evaluator did not announce readiness", json.dumps(reply))
        self.name: str = reply["name"]

    # -- public API -------------------------------------------------

    def evaluate(self, scheme: Scheme) -> ModelState:
        request_id = self._next_id
        self._next_id += 1
        self._send(
            {
                "id": request_id,
                "scheme": list(scheme.steps),
                "task": self.task.to_dict(),
                "pretrain_epochs": self.pretrain_epochs,
            }
        )
        reply = self._read_object(self.timeout)
        if "error" in reply:
            raise ProtocolError(
                f"evaluator reported an error for scheme {scheme}", json.dumps(reply)
            )
        if reply.get("id") != request_id:
            raise ProtocolError(
                f"response id {reply.get('id')!r} does not match request id {request_id}",
                json.dumps(reply),
            )
        try:
            return ModelState(
                params=float(reply["params"]),
                flops=float(reply["flops"]),
                accuracy=float(reply["accuracy"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"invalid response metrics: {exc}", json.dumps(reply)) from exc

    def evaluate_many(self, schemes: Sequence[Scheme]) -> list[ModelState]:
        return [self.evaluate(s) for s in schemes]

    def close(self) -> None:
        proc = self._proc
        if proc.stdin is not None:
            try:
                proc.stdin.close()
            except OSError:
                pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()

    def __enter__(self) -> "ExternalEvaluator":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


class EvaluatorPool:
    """Fans evaluate_many out over several evaluators, order-preserving.

    Each underlying evaluator still serializes its own requests; results
    are merged back in the order the schemes were given.
    """

    def __init__(self, evaluators: Sequence[ExternalEvaluator]) -> None:
        if not evaluators:
            raise ValueError("pool needs at least one evaluator")
        self.evaluators = list(evaluators)
        self.base_state = self.evaluators[0].base_state

    def evaluate(self, scheme: Scheme) -> ModelState:
        return self.evaluators[0].evaluate(scheme)

    def evaluate_many(self, schemes: Sequence[Scheme]) -> list[ModelState]:
        n = len(self.evaluators)
        if n == 1 or len(schemes) <= 1:
            return self.evaluators[0].evaluate_many(schemes)
        shards: list[list[Scheme]] = [[] for _ in range(n)]
        placement: list[tuple[int, int]] = []
        for i, scheme in enumerate(schemes):
            shard = i % n
            placement.append((shard, len(shards[shard])))
            shards[shard].append(scheme)
        with ThreadPoolExecutor(max_workers=n) as pool:
            futures = [
                pool.submit(ev.evaluate_many, shard)
                for ev, shard in zip(self.evaluators, shards)
            ]
            results = [f.result() for f in futures]
        return [results[shard][pos] for shard, pos in placement]

    def close(self) -> None:
        for ev in self.evaluators:
            ev.close()

    def __enter__(self) -> "EvaluatorPool":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
