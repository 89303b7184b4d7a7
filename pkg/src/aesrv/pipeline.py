"""Five-stage (IF/ID/EXE/MEM/WB) cycle model of the core.

Hazard policy:

* full EX/MEM and MEM/WB forwarding into EXE;
* one bubble when an instruction in ID needs the result of a load in EXE;
* branches and jumps resolve in EXE, predicted not-taken; a redirect squashes
  the two younger instructions in IF and ID;
* extension instructions are blocking and hold EXE for their latency
  (buffer transfer or SAU cost), stalling IF and ID behind them;
* ``ebreak`` stops fetch once it is decoded and ends the run when it retires.

Faults are raised at the stage where they occur: fetch/decode faults only
when the offending slot reaches EXE (so squashed wrong-path fetches are
harmless), data-memory faults in MEM.
"""

from __future__ import annotations

from dataclasses import dataclass

from aesrv.core import (
    LOAD_SPEC, MASK32, STORE_SIZE, CoreState, alu, branch_taken, check_target, execute_extension,
)
from aesrv.errors import CycleBudgetExceeded, IllegalInstruction, MemoryFault
from aesrv.isa import Kind, decode

_decode_cache: dict = {}


class Slot:
    """One instruction in flight; ``ins`` is None for a deferred fetch fault."""

    __slots__ = ("pc", "ins", "fault", "result", "addr", "store", "remaining", "started")

    def __init__(self, pc, ins, fault=None):
        self.pc = pc
        self.ins = ins
        self.fault = fault
        self.result = 0
        self.addr = 0
        self.store = 0
        self.remaining = 0
        self.started = False

    def __repr__(self):
        return f"Slot(0x{self.pc:x}, {self.ins.op if self.ins else self.fault!r})"


class PipelineState:
    """Stage latches (``None`` is a bubble) and counters."""

    __slots__ = ("if_id", "id_ex", "ex_mem", "mem_wb", "fetch_pc", "fetch_halted",
                 "cycle", "retired", "load_use_stalls", "flushed", "ext_stall_cycles")

    def __init__(self, pc=0):
        self.if_id = self.id_ex = self.ex_mem = self.mem_wb = None
        self.fetch_pc = pc
        self.fetch_halted = False
        self.cycle = 0
        self.retired = 0
        self.load_use_stalls = 0
        self.flushed = 0
        self.ext_stall_cycles = 0

    def stages(self):
        """Instruction (or None) in IF/ID, ID/EX, EX/MEM, MEM/WB latches."""
        return [s.ins if s else None for s in (self.if_id, self.id_ex, self.ex_mem, self.mem_wb)]


@dataclass(frozen=True)
class CycleReport:
    cycles: int
    retired: int
    load_use_stalls: int
    flushed: int
    ext_stall_cycles: int
    dm_digest: str

    @property
    def cpi(self) -> float:
        return self.cycles / self.retired if self.retired else float("nan")


def _fetch(state: CoreState, pc: int) -> Slot:
    try:
        word = state.mem.fetch(pc)
        ins = _decode_cache.get(word)
        if ins is None:
            ins = _decode_cache[word] = decode(word)
        return Slot(pc, ins)
    except (MemoryFault, IllegalInstruction) as exc:
        return Slot(pc, None, exc)


def step_cycle(state: CoreState) -> CoreState:
    """Advance every stage by one clock; mutates and returns ``state``."""
    p = state.pipeline
    if p is None:
        p = state.pipeline = PipelineState(state.pc)
    if state.halted:
        return state
    p.cycle += 1
    regs = state.regs

    # WB
    wb = p.mem_wb
    if wb is not None:
        ins = wb.ins
        if ins.dest:
            regs[ins.dest] = wb.result
        p.retired += 1
        state.retired += 1
        if ins.kind is Kind.SYSTEM:
            state.halted = True
            state.pc = wb.pc
            p.mem_wb = p.ex_mem = p.id_ex = p.if_id = None
            return state

    # MEM
    m = p.ex_mem
    if m is not None:
        kind = m.ins.kind
        if kind is Kind.LOAD:
            size, signed = LOAD_SPEC[m.ins.op]
            m.result = state.mem.load(m.addr, size, signed)
        elif kind is Kind.STORE:
            state.mem.store(m.addr, STORE_SIZE[m.ins.op], m.store)
    p.mem_wb = m

    # EXE
    e = p.id_ex
    redirect = None
    hold = False
    if e is not None:
        if e.fault is not None:
            raise e.fault
        ins = e.ins
        if not e.started:
            e.started = True
            kind = ins.kind
            fwd = m.ins.dest if m is not None else 0

            def read(r):
                if r and r == fwd:
                    return m.result
                return regs[r]

            pc = e.pc
            if kind is Kind.ALU_REG:
                e.result = alu(ins.op, read(ins.rs1), read(ins.rs2))
            elif kind is Kind.ALU_IMM:
                e.result = alu(ins.op, read(ins.rs1), ins.imm & MASK32)
            elif kind is Kind.LOAD:
                e.addr = (read(ins.rs1) + ins.imm) & MASK32
            elif kind is Kind.STORE:
                e.addr = (read(ins.rs1) + ins.imm) & MASK32
                e.store = read(ins.rs2)
            elif kind is Kind.BRANCH:
                if branch_taken(ins.op, read(ins.rs1), read(ins.rs2)):
                    redirect = (pc + ins.imm) & MASK32
            elif kind is Kind.JAL:
                redirect = (pc + ins.imm) & MASK32
                e.result = pc + 4
            elif kind is Kind.JALR:
                redirect = (read(ins.rs1) + ins.imm) & MASK32 & ~1
                e.result = pc + 4
            elif kind is Kind.LUI:
                e.result = ins.imm << 12
            elif kind is Kind.AUIPC:
                e.result = (pc + (ins.imm << 12)) & MASK32
            elif kind.is_extension:
                if kind is Kind.BUF_SET:
                    a, b = read(8), read(20)
                elif kind is Kind.AES_EXEC:
                    a, b = read(20), 0
                else:
                    a = b = 0
                e.remaining = execute_extension(state, ins, a, b) - 1
            if redirect is not None:
                check_target(redirect, ins)
        if e.remaining > 0:
            e.remaining -= 1
            hold = True
            p.ext_stall_cycles += 1
    if hold:
        p.ex_mem = None
        return state
    p.ex_mem = e

    # ID / IF
    d = p.if_id
    if redirect is not None:
        p.flushed += 2
        p.id_ex = p.if_id = None
        p.fetch_pc = redirect
        p.fetch_halted = False
        return state
    if d is not None and d.ins is not None and e is not None and e.ins.kind is Kind.LOAD:
        dest = e.ins.dest
        if dest and dest in d.ins.srcs:
            p.load_use_stalls += 1
            p.id_ex = None
            return state
    p.id_ex = d
    if d is not None and d.ins is not None and d.ins.kind is Kind.SYSTEM:
        p.fetch_halted = True
    if p.fetch_halted:
        p.if_id = None
    else:
        p.if_id = _fetch(state, p.fetch_pc)
        p.fetch_pc = (p.fetch_pc + 4) & MASK32
    return state


def run(state: CoreState, max_cycles: int = 50_000_000) -> CycleReport:
    """Step the pipeline until ``ebreak`` retires."""
    if state.pipeline is None:
        state.pipeline = PipelineState(state.pc)
    p = state.pipeline
    while not state.halted:
        if p.cycle >= max_cycles:
            raise CycleBudgetExceeded(f"program did not halt within {max_cycles} cycles")
        step_cycle(state)
    return CycleReport(p.cycle, p.retired, p.load_use_stalls, p.flushed, p.ext_stall_cycles, state.dm_digest())
