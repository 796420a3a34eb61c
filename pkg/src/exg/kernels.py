"""Instrumented ports of the five sample kernels.

Each kernel does its real arithmetic on plain Python lists and reports every
named-array element access to a :class:`~exg.trace.Recorder`.  Loop indices
and scalar temporaries are not traced.  Task regions are opened either around
the innermost statement (fine grain) or around the innermost loop (coarse
grain).

Setup that the annotated sources perform before the trace region (zeroing,
initial/boundary conditions, the FFT bit-reversal copy) is done untraced.
"""

from __future__ import annotations

import cmath
import enum
import math
import random
from contextlib import nullcontext
from dataclasses import dataclass, field

from exg.errors import InvalidLength, InvalidParameter
from exg.trace import Address, ProgramTrace, Recorder

SEED = 20240521

# Smith-Waterman scores
SW_MATCH = 3
SW_MISS = -3
SW_GAP = -2
SW_ALPHABET = "ACGT"

FINE_REGION = 1
COARSE_REGION = 2

TRACE_REGIONS = {"madd": 1, "mmult": 2, "heat": 3, "fft": 4, "sw": 5}

KERNEL_PARAMS = {
    "madd": ("n",),
    "mmult": ("n",),
    "heat": ("nx", "nt"),
    "fft": ("len",),
    "sw": ("len1", "len2"),
}


class Grain(enum.Enum):
    FINE = "fine"
    COARSE = "coarse"


class TracedArray:
    """Row-major array whose element loads and stores are reported."""

    def __init__(self, rec, array_id, shape, fill=0):
        self.rec = rec
        self.array_id = array_id
        self.shape = tuple(shape)
        size = math.prod(self.shape)
        self.data = [fill] * size

    def _offset(self, idx):
        if len(idx) != len(self.shape):
            raise IndexError(f"expected {len(self.shape)} indices, got {len(idx)}")
        off = 0
        for i, dim in zip(idx, self.shape):
            if not 0 <= i < dim:
                raise IndexError(f"index {idx} out of bounds for shape {self.shape}")
            off = off * dim + i
        return off

    def load(self, *idx, instr=0):
        off = self._offset(idx)
        self.rec.read(Address(self.array_id, off), instr)
        return self.data[off]

    def store(self, value, *idx, instr=0):
        off = self._offset(idx)
        self.rec.write(Address(self.array_id, off), instr)
        self.data[off] = value

    # untraced access, for setup outside the trace region and for results
    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        return self.data[self._offset(idx)]

    def __setitem__(self, idx, value):
        if not isinstance(idx, tuple):
            idx = (idx,)
        self.data[self._offset(idx)] = value

    def tolist(self):
        if len(self.shape) == 1:
            return list(self.data)
        rows, cols = self.shape
        return [self.data[r * cols:(r + 1) * cols] for r in range(rows)]


@dataclass
class KernelRun:
    """A finished kernel execution: its trace plus the computed outputs."""

    trace: ProgramTrace
    inputs: dict = field(default_factory=dict)
    output: object = None


@dataclass(frozen=True)
class KernelSpec:
    name: str
    params: dict
    grain: Grain = Grain.FINE

    def __post_init__(self):
        if self.name not in KERNEL_PARAMS:
            raise InvalidParameter(f"unknown kernel {self.name!r}")
        object.__setattr__(self, "grain", Grain(self.grain))
        expected = set(KERNEL_PARAMS[self.name])
        if set(self.params) != expected:
            raise InvalidParameter(
                f"{self.name} takes parameters {sorted(expected)}, got {sorted(self.params)}"
            )
        for key, value in self.params.items():
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise InvalidParameter(f"{self.name}: {key} must be an integer >= 1")
        if self.name == "fft":
            _check_pow2(self.params["len"])

    @property
    def trace_region_id(self):
        return TRACE_REGIONS[self.name]

    @property
    def task_region_id(self):
        return FINE_REGION if self.grain is Grain.FINE else COARSE_REGION

    def run(self) -> KernelRun:
        params = dict(self.params)
        if self.name == "fft":
            params["length"] = params.pop("len")
        return _RUNNERS[self.name](**params, grain=self.grain)


def _check_pow2(length):
    if length < 2 or length & (length - 1):
        raise InvalidLength(f"fft length must be a power of two >= 2, got {length}")


def _tasks(rec, grain):
    """Return (coarse, fine) context factories for the chosen placement."""
    region = FINE_REGION if grain is Grain.FINE else COARSE_REGION

    def open_task():
        return rec.task(region)

    if grain is Grain.FINE:
        return nullcontext, open_task
    return open_task, nullcontext


def _random_matrix(rng, n, lo=-9, hi=9):
    return [[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)]


def madd(n, grain=Grain.FINE, seed=SEED) -> KernelRun:
    grain = Grain(grain)
    if n < 1:
        raise InvalidParameter("madd: n must be >= 1")
    rng = random.Random(seed)
    rec = Recorder()
    a = TracedArray(rec, 0, (n, n))
    b = TracedArray(rec, 1, (n, n))
    c = TracedArray(rec, 2, (n, n))
    a.data = sum(_random_matrix(rng, n), [])
    b.data = sum(_random_matrix(rng, n), [])
    coarse, fine = _tasks(rec, grain)

    with rec.trace(TRACE_REGIONS["madd"]):
        for i in range(n):
            with coarse():
                for j in range(n):
                    with fine():
                        c.store(a.load(i, j, instr=0) + b.load(i, j, instr=1), i, j, instr=2)

    return KernelRun(rec.finalize(), {"A": a.tolist(), "B": b.tolist()}, c.tolist())


def mmult(n, grain=Grain.FINE, seed=SEED) -> KernelRun:
    grain = Grain(grain)
    if n < 1:
        raise InvalidParameter("mmult: n must be >= 1")
    rng = random.Random(seed)
    rec = Recorder()
    a = TracedArray(rec, 0, (n, n))
    b = TracedArray(rec, 1, (n, n))
    c = TracedArray(rec, 2, (n, n), fill=0)
    a.data = sum(_random_matrix(rng, n), [])
    b.data = sum(_random_matrix(rng, n), [])
    coarse, fine = _tasks(rec, grain)

    with rec.trace(TRACE_REGIONS["mmult"]):
        for i in range(n):
            for j in range(n):
                with coarse():
                    for k in range(n):
                        with fine():
                            prod = a.load(i, k, instr=0) * b.load(k, j, instr=1)
                            c.store(c.load(i, j, instr=2) + prod, i, j, instr=3)

    return KernelRun(rec.finalize(), {"A": a.tolist(), "B": b.tolist()}, c.tolist())


def heat(nx, nt, grain=Grain.FINE, seed=SEED, h=1.0, k=0.25) -> KernelRun:
    """Explicit finite-difference scheme for the 1-D heat equation.

    ``u`` has ``nx + 2`` rows (grid points including both boundaries) and
    ``nt + 1`` columns (time levels).  Column 0 and the two boundary rows
    are initial/boundary data written before tracing starts.
    """
    grain = Grain(grain)
    if nx < 1 or nt < 1:
        raise InvalidParameter("heat: nx and nt must be >= 1")
    rng = random.Random(seed)
    rec = Recorder()
    u = TracedArray(rec, 0, (nx + 2, nt + 1), fill=0.0)
    for x in range(nx + 2):
        u[x, 0] = rng.uniform(0.0, 1.0)
    for t in range(1, nt + 1):
        u[0, t] = u[0, 0]
        u[nx + 1, t] = u[nx + 1, 0]
    initial = [u[x, 0] for x in range(nx + 2)]
    r = k / (h * h)
    coarse, fine = _tasks(rec, grain)

    with rec.trace(TRACE_REGIONS["heat"]):
        for t in range(1, nt + 1):
            with coarse():
                for x in range(1, nx + 1):
                    with fine():
                        value = (
                            (1 - 2 * r) * u.load(x, t - 1, instr=0)
                            + r * u.load(x + 1, t - 1, instr=1)
                            + r * u.load(x - 1, t - 1, instr=2)
                        )
                        u.store(value, x, t, instr=3)

    return KernelRun(rec.finalize(), {"u0": initial, "r": r}, u.tolist())


def bit_reverse_copy(x):
    n = len(x)
    bits = n.bit_length() - 1
    out = [0j] * n
    for i, v in enumerate(x):
        rev = int(format(i, f"0{bits}b")[::-1], 2) if bits else 0
        out[rev] = v
    return out


def fft(length, grain=Grain.FINE, seed=SEED, x=None) -> KernelRun:
    """Iterative radix-2 Cooley-Tukey transform.

    ``x`` overrides the seeded random input when given.
    """
    grain = Grain(grain)
    n = length
    _check_pow2(n)
    if x is None:
        rng = random.Random(seed)
        x = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(n)]
    else:
        x = [complex(v) for v in x]
        if len(x) != n:
            raise InvalidLength(f"input has {len(x)} samples, expected {n}")
    rec = Recorder()
    big_x = TracedArray(rec, 0, (n,), fill=0j)
    big_x.data = bit_reverse_copy(x)
    stages = n.bit_length() - 1
    coarse, fine = _tasks(rec, grain)

    with rec.trace(TRACE_REGIONS["fft"]):
        for s in range(1, stages + 1):
            m = 1 << s
            mh = m >> 1
            for k in range(0, n, m):
                with coarse():
                    for j in range(mh):
                        with fine():
                            w = cmath.exp(1j * ((-2 * j) * math.pi / m))
                            t = w * big_x.load(k + j + mh, instr=0)
                            u = big_x.load(k + j, instr=1)
                            big_x.store(u + t, k + j, instr=2)
                            big_x.store(u - t, k + j + mh, instr=3)

    return KernelRun(rec.finalize(), {"x": x}, big_x.tolist())


def sw(len1, len2, grain=Grain.FINE, seed=SEED, s1=None, s2=None) -> KernelRun:
    """Score matrix fill of the basic Smith-Waterman variant.

    The recurrence is the one in the annotated source: the diagonal term
    reads ``m(i, j)`` itself, which holds zero before the cell is written.
    """
    grain = Grain(grain)
    if len1 < 1 or len2 < 1:
        raise InvalidParameter("sw: len1 and len2 must be >= 1")
    rng = random.Random(seed)
    if s1 is None:
        s1 = "".join(rng.choice(SW_ALPHABET) for _ in range(len1))
    if s2 is None:
        s2 = "".join(rng.choice(SW_ALPHABET) for _ in range(len2))
    if len(s1) != len1 or len(s2) != len2:
        raise InvalidLength("sequence lengths do not match len1/len2")
    rec = Recorder()
    seq1 = TracedArray(rec, 0, (len1,))
    seq2 = TracedArray(rec, 1, (len2,))
    seq1.data = list(s1)
    seq2.data = list(s2)
    m = TracedArray(rec, 2, (len1 + 1, len2 + 1), fill=0)
    coarse, fine = _tasks(rec, grain)

    with rec.trace(TRACE_REGIONS["sw"]):
        for i in range(1, len1 + 1):
            with coarse():
                for j in range(1, len2 + 1):
                    with fine():
                        same = seq1.load(i - 1, instr=0) == seq2.load(j - 1, instr=1)
                        sc = SW_MATCH if same else SW_MISS
                        best = max(
                            m.load(i, j, instr=2) + sc,
                            m.load(i, j - 1, instr=3) + SW_GAP,
                            m.load(i - 1, j, instr=4) + SW_GAP,
                            0,
                        )
                        m.store(best, i, j, instr=5)

    return KernelRun(rec.finalize(), {"s1": s1, "s2": s2}, m.tolist())


_RUNNERS = {"madd": madd, "mmult": mmult, "heat": heat, "fft": fft, "sw": sw}


def run_madd(n, grain=Grain.FINE) -> ProgramTrace:
    return madd(n, grain).trace


def run_mmult(n, grain=Grain.FINE) -> ProgramTrace:
    return mmult(n, grain).trace


def run_heat(nx, nt, grain=Grain.FINE) -> ProgramTrace:
    return heat(nx, nt, grain).trace


def run_fft(length, grain=Grain.FINE) -> ProgramTrace:
    return fft(length, grain).trace


def run_sw(len1, len2, grain=Grain.FINE) -> ProgramTrace:
    return sw(len1, len2, grain).trace


def run_kernel(name, grain=Grain.FINE, **params) -> KernelRun:
    return KernelSpec(name, params, Grain(grain)).run()
