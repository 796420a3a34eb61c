"""Trace events, the in-process recorder, and the on-disk trace format.

The recorder mirrors a small tracing runtime: a program opens a trace
region, opens and closes (possibly nested) task regions, and reports every
array-element access it performs.  Each access is attributed to the task
instance on top of the task stack.

Typical use::

    rec = Recorder()
    with rec.trace(1):
        with rec.task(1):
            rec.record_access(Address(0, 3), AccessKind.WRITE, instr_id=0)
    trace = rec.finalize()
"""

from __future__ import annotations

import enum
import io
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import IO, Iterator, Optional

from exg.errors import (
    EmptyTaskStack,
    MalformedTrace,
    NestedTrace,
    NoOpenTrace,
    UnclosedRegion,
)

FORMAT_MAGIC = "EXGTRACE"
FORMAT_VERSION = 1

# exec id 0 is never issued; it marks "no task" in the address table
INVALID_EXEC_ID = 0


class AccessKind(enum.Enum):
    READ = "R"
    WRITE = "W"


@dataclass(frozen=True, order=True)
class Address:
    """Symbolic memory location: an element ``offset`` of array ``array_id``."""

    array_id: int
    offset: int


@dataclass(frozen=True, eq=False)
class TaskInstance:
    """A task region paired with its unique execution id.

    Identity is the execution id alone; ``region_id`` is carried along as
    metadata so graphs can be labelled the way the source was annotated.
    """

    region_id: int
    exec_id: int

    def __eq__(self, other):
        if not isinstance(other, TaskInstance):
            return NotImplemented
        return self.exec_id == other.exec_id

    def __hash__(self):
        return hash(self.exec_id)

    def __lt__(self, other):
        return self.exec_id < other.exec_id

    def __repr__(self):
        return f"T{self.exec_id}@{self.region_id}"


@dataclass(frozen=True)
class AccessRecord:
    trace_id: int
    task: TaskInstance
    address: Address
    kind: AccessKind
    instr_id: int

    def key(self):
        """Every field as a flat tuple (``task`` equality alone ignores the region)."""
        return (
            self.trace_id,
            self.task.exec_id,
            self.task.region_id,
            self.address.array_id,
            self.address.offset,
            self.kind.value,
            self.instr_id,
        )


@dataclass(frozen=True)
class ProgramTrace:
    records: tuple = ()
    dropped_accesses: int = 0
    max_exec_id: int = 0

    def __len__(self):
        return len(self.records)

    def key(self):
        return (
            tuple(r.key() for r in self.records),
            self.dropped_accesses,
            self.max_exec_id,
        )

    def trace_ids(self):
        """Distinct trace ids in order of first appearance."""
        seen = {}
        for r in self.records:
            seen.setdefault(r.trace_id, None)
        return list(seen)

    def tasks(self):
        """Distinct task instances in order of first appearance."""
        seen = {}
        for r in self.records:
            seen.setdefault(r.task.exec_id, r.task)
        return list(seen.values())


@dataclass
class Recorder:
    """Single-threaded event sink producing a :class:`ProgramTrace`."""

    next_exec_id: int = INVALID_EXEC_ID + 1
    current_trace: Optional[int] = None
    task_stack: list = field(default_factory=list)
    buffer: list = field(default_factory=list)
    dropped_accesses: int = 0

    def begin_trace(self, trace_region_id: int) -> int:
        if self.current_trace is not None:
            raise NestedTrace(
                f"trace region {trace_region_id} opened inside region {self.current_trace}"
            )
        _check_id(trace_region_id, "trace region id")
        self.current_trace = trace_region_id
        return trace_region_id

    def end_trace(self) -> None:
        if self.current_trace is None:
            raise NoOpenTrace("end_trace without an open trace region")
        if self.task_stack:
            raise UnclosedRegion(
                f"trace region closed with {len(self.task_stack)} open task(s)"
            )
        self.current_trace = None

    def begin_task(self, region_id: int) -> TaskInstance:
        if self.current_trace is None:
            raise NoOpenTrace("begin_task outside a trace region")
        _check_id(region_id, "task region id")
        task = TaskInstance(region_id, self.next_exec_id)
        self.next_exec_id += 1
        self.task_stack.append(task)
        return task

    def end_task(self) -> None:
        if not self.task_stack:
            raise EmptyTaskStack("end_task with no open task")
        self.task_stack.pop()

    @property
    def current_task(self) -> Optional[TaskInstance]:
        return self.task_stack[-1] if self.task_stack else None

    def record_access(self, address: Address, kind: AccessKind, instr_id: int = 0) -> None:
        if self.current_trace is None:
            raise NoOpenTrace("memory access recorded outside a trace region")
        if not self.task_stack:
            self.dropped_accesses += 1
            return
        self.buffer.append(
            AccessRecord(self.current_trace, self.task_stack[-1], address, kind, instr_id)
        )

    def read(self, address: Address, instr_id: int = 0) -> None:
        self.record_access(address, AccessKind.READ, instr_id)

    def write(self, address: Address, instr_id: int = 0) -> None:
        self.record_access(address, AccessKind.WRITE, instr_id)

    @contextmanager
    def trace(self, trace_region_id: int) -> Iterator[int]:
        yield self.begin_trace(trace_region_id)
        self.end_trace()

    @contextmanager
    def task(self, region_id: int) -> Iterator[TaskInstance]:
        yield self.begin_task(region_id)
        self.end_task()

    def finalize(self) -> ProgramTrace:
        if self.task_stack:
            raise UnclosedRegion(f"{len(self.task_stack)} task region(s) still open")
        if self.current_trace is not None:
            raise UnclosedRegion(f"trace region {self.current_trace} still open")
        return ProgramTrace(
            records=tuple(self.buffer),
            dropped_accesses=self.dropped_accesses,
            max_exec_id=self.next_exec_id - 1,
        )


def _check_id(value, what):
    if not isinstance(value, int) or value < 0:
        raise ValueError(f"{what} must be a non-negative integer, got {value!r}")


# -- text format -----------------------------------------------------------


def write_trace(trace: ProgramTrace, sink: IO[bytes]) -> None:
    """Serialize ``trace`` as UTF-8 text, one access per line."""
    out = io.StringIO()
    out.write(f"{FORMAT_MAGIC} {FORMAT_VERSION}\n")
    for r in trace.records:
        out.write(
            f"T {r.trace_id} {r.task.exec_id} {r.task.region_id} "
            f"{r.address.array_id} {r.address.offset} {r.kind.value} {r.instr_id}\n"
        )
    out.write(f"END {len(trace.records)} {trace.dropped_accesses} {trace.max_exec_id}\n")
    sink.write(out.getvalue().encode("utf-8"))


def dumps_trace(trace: ProgramTrace) -> bytes:
    buf = io.BytesIO()
    write_trace(trace, buf)
    return buf.getvalue()


def _uint(token, lineno, what):
    if not token.isdigit() or not token.isascii():
        raise MalformedTrace(f"{what} is not a non-negative integer: {token!r}", lineno)
    return int(token)


def read_trace(source: IO[bytes]) -> ProgramTrace:
    """Parse a stream written by :func:`write_trace`."""
    try:
        text = source.read().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedTrace(f"not UTF-8 text: {exc}") from None
    return loads_trace(text)


def loads_trace(text) -> ProgramTrace:
    if isinstance(text, bytes):
        return read_trace(io.BytesIO(text))
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MalformedTrace("empty stream", 1)

    header = lines[0].split(" ")
    if len(header) != 2 or header[0] != FORMAT_MAGIC:
        raise MalformedTrace(f"bad header {lines[0]!r}", 1)
    version = _uint(header[1], 1, "format version")
    if version != FORMAT_VERSION:
        raise MalformedTrace(f"unsupported format version {version}", 1)

    records = []
    tasks = {}
    footer = None
    for lineno, line in enumerate(lines[1:], start=2):
        if footer is not None:
            raise MalformedTrace("content after END line", lineno)
        fields = line.split(" ")
        if fields[0] == "T":
            if len(fields) != 8:
                raise MalformedTrace(f"record has {len(fields) - 1} fields, expected 7", lineno)
            trace_id, exec_id, region_id, array_id, offset = (
                _uint(tok, lineno, name)
                for tok, name in zip(
                    fields[1:6], ("trace id", "exec id", "region id", "array id", "offset")
                )
            )
            if fields[6] not in ("R", "W"):
                raise MalformedTrace(f"access kind must be R or W, got {fields[6]!r}", lineno)
            instr_id = _uint(fields[7], lineno, "instruction id")
            if exec_id == INVALID_EXEC_ID:
                raise MalformedTrace("exec id 0 is reserved", lineno)
            task = tasks.get(exec_id)
            if task is None:
                task = tasks[exec_id] = TaskInstance(region_id, exec_id)
            elif task.region_id != region_id:
                raise MalformedTrace(
                    f"exec id {exec_id} seen with regions {task.region_id} and {region_id}",
                    lineno,
                )
            records.append(
                AccessRecord(
                    trace_id, task, Address(array_id, offset), AccessKind(fields[6]), instr_id
                )
            )
        elif fields[0] == "END":
            if len(fields) != 4:
                raise MalformedTrace("END line needs 3 fields", lineno)
            footer = [_uint(tok, lineno, "footer field") for tok in fields[1:]]
            count = footer[0]
            if count != len(records):
                raise MalformedTrace(
                    f"END declares {count} records but {len(records)} were read", lineno
                )
        else:
            raise MalformedTrace(f"unknown line tag {fields[0]!r}", lineno)

    if footer is None:
        raise MalformedTrace("missing END line (truncated stream?)", len(lines) + 1)
    _, dropped, max_exec_id = footer
    if tasks and max(tasks) > max_exec_id:
        raise MalformedTrace(f"max exec id {max_exec_id} below a recorded exec id", len(lines))
    return ProgramTrace(tuple(records), dropped, max_exec_id)
