"""Line-oriented JSON protocol for external translators, correctors and scorers.

The child process reads one JSON object per line on stdin and answers
each with exactly one line on stdout, in order, flushing as it goes:

    translator  {"src", "src_lang", "tgt_lang"}  ->  translated text
    corrector   {"src", "lang"}                  ->  corrected text
    scorer      {"src", "mt", "ref"?}            ->  decimal score
"""

from __future__ import annotations

import json
import math
import queue
import subprocess
import sys
import threading
import time
from dataclasses import dataclass
from typing import Sequence

KINDS = ("translator", "corrector", "scorer")


class ExternalSystemError(RuntimeError):
    """An external run failed; ``partial`` holds the responses received so far."""

    def __init__(self, message: str, kind: str, partial: Sequence = (), stderr: str = ""):
        super().__init__(message)
        self.kind = kind
        self.partial = list(partial)
        self.stderr = stderr


@dataclass(frozen=True)
class ExternalSystemSpec:
    id: str
    kind: str
    command: tuple[str, ...]
    timeout: float = 600.0
    batch_size: int = 64

    def __post_init__(self):
        object.__setattr__(self, "command", tuple(self.command))
        if not self.id:
            raise ValueError("system id must be nonempty")
        if self.kind not in KINDS:
            raise ValueError(f"system kind must be one of {KINDS}, got {self.kind!r}")
        if not self.command:
            raise ValueError(f"system {self.id}: command must be nonempty")
        if not self.timeout > 0:
            raise ValueError(f"system {self.id}: timeout must be positive")
        if self.batch_size < 1:
            raise ValueError(f"system {self.id}: batch_size must be >= 1")

    def argv(self) -> list[str]:
        """Command with ``{python}`` expanded to the running interpreter."""
        return [sys.executable if a == "{python}" else a for a in self.command]

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "command": list(self.command),
            "timeout": self.timeout,
            "batch_size": self.batch_size,
        }


def translator_request(src: str, src_lang: str, tgt_lang: str) -> dict:
    return {"src": src, "src_lang": src_lang, "tgt_lang": tgt_lang}


def corrector_request(src: str, lang: str) -> dict:
    return {"src": src, "lang": lang}


def scorer_request(src: str, mt: str, ref: str | None = None) -> dict:
    req = {"src": src, "mt": mt}
    if ref is not None:
        req["ref"] = ref
    return req


def _parse(kind: str, line: str, offset: int):
    if kind != "scorer":
        return line
    try:
        value = float(line.strip())
    except ValueError:
        raise ExternalSystemError(f"unparseable score {line!r} at offset {offset}", "parse") from None
    if not math.isfinite(value):
        raise ExternalSystemError(f"non-finite score at offset {offset}", "parse")
    return value


def run_external(spec: ExternalSystemSpec, requests: Sequence[dict]) -> list:
    """Send ``requests`` to the system and return one response per request.

    At most ``spec.batch_size`` requests are in flight at once. Any failure
    (nonzero exit, timeout, missing or extra lines, unparseable response)
    raises :class:`ExternalSystemError` with the partial output attached.
    """
    n = len(requests)
    deadline = time.monotonic() + spec.timeout
    proc = subprocess.Popen(
        spec.argv(),
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
    )
    window = threading.Semaphore(spec.batch_size)
    lines: queue.Queue = queue.Queue()
    stop = threading.Event()
    stderr_buf: list[str] = []

    def write():
        try:
            for req in requests:
                while not window.acquire(timeout=0.1):
                    if stop.is_set():
                        return
                if stop.is_set():
                    return
                proc.stdin.write((json.dumps(req, ensure_ascii=False) + "\n").encode("utf-8"))
                proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError):
            pass
        finally:
            try:
                proc.stdin.close()
            except (BrokenPipeError, OSError):
                pass

    def read():
        try:
            for line in proc.stdout:
                lines.put(line.decode("utf-8"))
        except (OSError, ValueError, UnicodeDecodeError) as e:
            lines.put(e)
        lines.put(None)

    def drain_stderr():
        try:
            stderr_buf.append(proc.stderr.read().decode("utf-8", errors="replace"))
        except (OSError, ValueError, UnicodeDecodeError):
            pass

    threads = [threading.Thread(target=f, daemon=True) for f in (write, read, drain_stderr)]
    for t in threads:
        t.start()

    outputs: list = []

    def fail(message, kind):
        stop.set()
        if proc.poll() is None:
            proc.kill()
        proc.wait()
        for t in threads:
            t.join(timeout=1)
        raise ExternalSystemError(f"{spec.id}: {message}", kind, outputs, "".join(stderr_buf))

    eof = False
    while not eof:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            fail(f"timed out after {spec.timeout}s with {len(outputs)}/{n} responses", "timeout")
        try:
            item = lines.get(timeout=remaining)
        except queue.Empty:
            continue
        if item is None:
            eof = True
            break
        if isinstance(item, Exception):
            fail(f"could not read output: {item}", "parse")
        if len(outputs) >= n:
            fail(f"line-count mismatch: extra response line at offset {len(outputs)}", "line_count")
        line = item[:-1] if item.endswith("\n") else item
        if line.endswith("\r"):
            line = line[:-1]
        try:
            outputs.append(_parse(spec.kind, line, len(outputs)))
        except ExternalSystemError as e:
            fail(str(e), "parse")
        window.release()

    try:
        code = proc.wait(timeout=max(0.0, deadline - time.monotonic()))
    except subprocess.TimeoutExpired:
        fail(f"timed out waiting for exit after {spec.timeout}s", "timeout")
    for t in threads:
        t.join(timeout=1)
    if code != 0:
        raise ExternalSystemError(
            f"{spec.id}: exited with status {code}", "exit", outputs, "".join(stderr_buf)
        )
    if len(outputs) != n:
        raise ExternalSystemError(
            f"{spec.id}: line-count mismatch: expected {n} responses, got {len(outputs)}; "
            f"first missing at offset {len(outputs)}",
            "line_count",
            outputs,
            "".join(stderr_buf),
        )
    return outputs
