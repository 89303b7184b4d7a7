"""SoC-level ping-pong transfer model.

Data memory is split into a *first* and a *last* half. Chunk ``k`` lives in
half ``k % 2``. The host interface is a single serial resource carrying
WRITE (input) and READ (output) transfers in the order

    W0, W1, R0, W2, R1, W3, ... R(n-1)

and the core is a single serial resource running EXEC phases in chunk order.
A half is never touched by two phases at once: EXEC(k) waits for WRITE(k),
READ(k) waits for EXEC(k), and WRITE(k+2) waits for READ(k).
"""

from __future__ import annotations

import csv
import enum
import io
import math
import random
from dataclasses import dataclass, field

from aesrv.config import AesConfig
from aesrv.errors import CapacityFault, InvalidParams, OracleMismatch
from aesrv.sau import DEFAULT_LAYOUT


class Phase(enum.Enum):
    WRITE = "WRITE"
    EXEC = "EXEC"
    READ = "READ"


class Half(enum.Enum):
    FIRST = "First"
    LAST = "Last"


@dataclass(frozen=True)
class PhaseInterval:
    phase: Phase
    half: Half
    chunk: int
    start: int
    end: int


@dataclass
class SystemSchedule:
    phases: list
    chunks: int

    def by_phase(self, phase: Phase):
        return [p for p in self.phases if p.phase is phase]

    def same_half_overlaps(self):
        """All pairs of phases on the same half whose intervals intersect."""
        bad = []
        for half in Half:
            ivs = sorted((p for p in self.phases if p.half is half), key=lambda p: (p.start, p.end))
            for i, a in enumerate(ivs):
                for b in ivs[i + 1:]:
                    if b.start >= a.end:
                        break
                    bad.append((a, b))
        return bad


@dataclass(frozen=True)
class TimelineReport:
    total_cycles: int
    exec_busy_cycles: int
    transfer_hidden_cycles: int
    core_idle_cycles: int
    exec_bound: bool

    @property
    def utilization(self) -> float:
        return self.exec_busy_cycles / self.total_cycles


def _positive_int(name, value):
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise InvalidParams(f"{name} must be a positive integer, got {value!r}")


def _overlap(a0, a1, b0, b1):
    return max(0, min(a1, b1) - max(a0, b0))


def schedule(n_chunks: int, write_cycles: int, exec_cycles: int, read_cycles: int):
    """Event-driven ping-pong schedule; returns ``(SystemSchedule, TimelineReport)``."""
    for name, v in (("n_chunks", n_chunks), ("write_cycles", write_cycles),
                    ("exec_cycles", exec_cycles), ("read_cycles", read_cycles)):
        _positive_int(name, v)
    halves = (Half.FIRST, Half.LAST)
    w_end = [0] * n_chunks
    e_end = [0] * n_chunks
    r_end = [0] * n_chunks
    phases = []
    iface = 0
    core = 0

    def write(k):
        nonlocal iface
        start = max(iface, r_end[k - 2] if k >= 2 else 0)
        iface = w_end[k] = start + write_cycles
        phases.append(PhaseInterval(Phase.WRITE, halves[k % 2], k, start, iface))

    def execute(k):
        nonlocal core
        start = max(core, w_end[k])
        core = e_end[k] = start + exec_cycles
        phases.append(PhaseInterval(Phase.EXEC, halves[k % 2], k, start, core))

    def read(k):
        nonlocal iface
        start = max(iface, e_end[k])
        iface = r_end[k] = start + read_cycles
        phases.append(PhaseInterval(Phase.READ, halves[k % 2], k, start, iface))

    write(0)
    if n_chunks > 1:
        write(1)
    for k in range(n_chunks):
        execute(k)
        read(k)
        if k + 2 < n_chunks:
            write(k + 2)

    phases.sort(key=lambda p: (p.start, p.chunk, p.phase.value))
    total = max(p.end for p in phases)
    execs = [p for p in phases if p.phase is Phase.EXEC]
    hidden = sum(_overlap(t.start, t.end, x.start, x.end)
                 for t in phases if t.phase is not Phase.EXEC for x in execs)
    idle = sum(b.start - a.end for a, b in zip(execs, execs[1:]))
    report = TimelineReport(
        total_cycles=total,
        exec_busy_cycles=n_chunks * exec_cycles,
        transfer_hidden_cycles=hidden,
        core_idle_cycles=idle,
        exec_bound=write_cycles + read_cycles <= exec_cycles,
    )
    return SystemSchedule(phases, n_chunks), report


def serial_total(n_chunks, write_cycles, exec_cycles, read_cycles):
    return n_chunks * (write_cycles + exec_cycles + read_cycles)


def to_csv(sched: SystemSchedule) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["phase", "half", "chunk", "start", "end"])
    for p in sched.phases:
        w.writerow([p.phase.value, p.half.value, p.chunk, p.start, p.end])
    return out.getvalue()


def gantt(sched: SystemSchedule, width: int = 72) -> str:
    """Plain-text Gantt chart: one row per (half, resource)."""
    total = max(p.end for p in sched.phases)
    scale = width / total
    rows = []
    symbol = {Phase.WRITE: "W", Phase.EXEC: "E", Phase.READ: "R"}
    for half in Half:
        for phase in Phase:
            line = [" "] * width
            for p in sched.phases:
                if p.half is half and p.phase is phase:
                    a = int(p.start * scale)
                    b = max(a + 1, int(p.end * scale))
                    for i in range(a, min(b, width)):
                        line[i] = symbol[phase] if (i - a) else str(p.chunk % 10)
            rows.append(f"{half.value:>5} {phase.value:<5}|{''.join(line)}|")
    rows.append(f"{'':11} 0{'':{max(width - len(str(total)) - 1, 0)}}{total}")
    return "\n".join(rows)


# --------------------------------------------------------------------------
# co-simulation against the cycle model


@dataclass(frozen=True)
class TransferModel:
    pio_words_per_cycle: float = 0.25
    dma_words_per_cycle: float = 4.0
    dma_setup_cycles: int = 16

    def __post_init__(self):
        if self.pio_words_per_cycle <= 0 or self.dma_words_per_cycle <= 0 or self.dma_setup_cycles < 0:
            raise InvalidParams("transfer rates must be strictly positive")

    def dma_cycles(self, words: int) -> int:
        return self.dma_setup_cycles + math.ceil(words / self.dma_words_per_cycle)

    def pio_cycles(self, words: int) -> int:
        return math.ceil(words / self.pio_words_per_cycle)


@dataclass
class CosimReport:
    config: AesConfig
    n_chunks: int
    blocks_per_chunk: int
    model: TransferModel
    write_cycles: int
    exec_cycles: int
    read_cycles: int
    prologue_cycles: int
    timeline: TimelineReport
    schedule: SystemSchedule = field(repr=False)

    @property
    def exec_bound(self) -> bool:
        return self.timeline.exec_bound

    @property
    def transfer_bound(self) -> bool:
        return not self.timeline.exec_bound

    @property
    def total_with_prologue(self) -> int:
        return self.prologue_cycles + self.timeline.total_cycles


def measure_exec_cycles(config: AesConfig, blocks: int, dm_base: int, dm_size: int, rng: random.Random):
    """Run the accelerated program on the cycle model; returns (cycles, program words)."""
    from aesrv import aesref
    from aesrv.pipeline import run
    from aesrv.programs import generate_accelerated

    key = rng.randbytes(config.key_bytes)
    iv = rng.randbytes(16)
    pt = rng.randbytes(16 * blocks)
    prog = generate_accelerated(config, blocks, key, iv, pt, dm_base=dm_base)
    state = prog.make_state(dm_size=dm_size)
    report = run(state)
    if prog.ciphertext(state) != aesref.encrypt(config, key, iv, pt):
        raise OracleMismatch(f"accelerated {config} chunk disagrees with the reference")
    return report.cycles, len(prog.words)


def cosimulate(config: AesConfig, n_chunks: int, blocks_per_chunk: int, model: TransferModel | None = None,
               *, dm_size: int = 128 * 1024, seed: int = 0) -> CosimReport:
    """Schedule ``n_chunks`` chunks with EXEC latency measured on the cycle model."""
    from aesrv.programs import A_CT_OFFSET

    model = model or TransferModel()
    _positive_int("n_chunks", n_chunks)
    _positive_int("blocks_per_chunk", blocks_per_chunk)
    half = dm_size // 2
    footprint = A_CT_OFFSET + 16 * blocks_per_chunk
    if blocks_per_chunk > DEFAULT_LAYOUT.max_blocks or footprint > half:
        raise CapacityFault(f"{blocks_per_chunk} blocks per chunk do not fit a {half}-byte DM half "
                            f"and the {DEFAULT_LAYOUT.max_blocks}-block buffer")
    rng = random.Random(seed)
    e_first, words = measure_exec_cycles(config, blocks_per_chunk, 0, dm_size, rng)
    e_last, words_last = measure_exec_cycles(config, blocks_per_chunk, half, dm_size, rng)
    exec_cycles = max(e_first, e_last)
    in_words = DEFAULT_LAYOUT.plaintext[0] + 4 * blocks_per_chunk
    out_words = 4 * blocks_per_chunk
    write_cycles = model.dma_cycles(in_words)
    read_cycles = model.dma_cycles(out_words)
    sched, timeline = schedule(n_chunks, write_cycles, exec_cycles, read_cycles)
    return CosimReport(config, n_chunks, blocks_per_chunk, model, write_cycles, exec_cycles, read_cycles,
                       model.pio_cycles(max(words, words_last)), timeline, sched)
