"""Architectural state and the single-cycle golden ISS.

Instruction and data memories are separate byte-addressed spaces, both based
at address 0. ``step_functional`` executes one instruction per call and is
the semantic oracle for the pipelined model in :mod:`aesrv.pipeline`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from aesrv import sau
from aesrv.errors import IllegalInstruction, MemoryFault
from aesrv.isa import Instr, Kind, decode

MASK32 = 0xFFFFFFFF
IM_SIZE = 64 * 1024
DM_SIZE = 128 * 1024


class RegisterFile:
    """x0..x31; x0 is hard-wired to zero and all values are 32-bit."""

    __slots__ = ("_x",)

    def __init__(self, values=None):
        self._x = [0] * 32
        if values is not None:
            for i, v in enumerate(values):
                self[i] = v

    def __getitem__(self, i):
        return self._x[i]

    def __setitem__(self, i, value):
        if i:
            self._x[i] = value & MASK32

    def __iter__(self):
        return iter(self._x)

    def __len__(self):
        return 32

    def __eq__(self, other):
        return list(self) == list(other)

    def __repr__(self):
        return "RegisterFile(" + ", ".join(f"x{i}=0x{v:x}" for i, v in enumerate(self._x) if v) + ")"

    def as_list(self):
        return list(self._x)


class MemoryImage:
    def __init__(self, im_size=IM_SIZE, dm_size=DM_SIZE):
        for name, size in (("IM", im_size), ("DM", dm_size)):
            if size <= 0 or size & (size - 1):
                raise ValueError(f"{name} size must be a power of two, got {size}")
        self.im = bytearray(im_size)
        self.dm = bytearray(dm_size)

    @property
    def dm_size(self):
        return len(self.dm)

    @property
    def half(self):
        """Byte size of each ping-pong half ("first" at 0, "last" at ``half``)."""
        return len(self.dm) // 2

    def fetch(self, pc: int) -> int:
        if pc % 4 or not 0 <= pc <= len(self.im) - 4:
            raise MemoryFault(f"instruction fetch at 0x{pc:x}")
        return int.from_bytes(self.im[pc:pc + 4], "little")

    def _check(self, addr, size):
        if addr % size:
            raise MemoryFault(f"unaligned {size}-byte access at 0x{addr:x}")
        if addr + size > len(self.dm):
            raise MemoryFault(f"{size}-byte access at 0x{addr:x} beyond data memory (0x{len(self.dm):x})")

    def load(self, addr: int, size: int, signed: bool) -> int:
        self._check(addr, size)
        v = int.from_bytes(self.dm[addr:addr + size], "little")
        if signed and v >> (8 * size - 1):
            v -= 1 << (8 * size)
        return v & MASK32

    def store(self, addr: int, size: int, value: int):
        self._check(addr, size)
        self.dm[addr:addr + size] = (value & ((1 << (8 * size)) - 1)).to_bytes(size, "little")

    def load_program(self, words, base=0):
        for i, w in enumerate(words):
            self.im[base + 4 * i:base + 4 * i + 4] = (w & MASK32).to_bytes(4, "little")

    def load_data(self, data: bytes, base=0):
        if base < 0 or base + len(data) > len(self.dm):
            raise MemoryFault("data preload does not fit in data memory")
        self.dm[base:base + len(data)] = data

    def copy(self):
        m = MemoryImage.__new__(MemoryImage)
        m.im = bytearray(self.im)
        m.dm = bytearray(self.dm)
        return m


@dataclass
class CoreState:
    regs: RegisterFile = field(default_factory=RegisterFile)
    pc: int = 0
    mem: MemoryImage = field(default_factory=MemoryImage)
    buffer: sau.BufferSet = field(default_factory=sau.BufferSet)
    sau: sau.SauState = field(default_factory=sau.SauState)
    halted: bool = False
    retired: int = 0
    pipeline: object = None  # aesrv.pipeline.PipelineState once stepped by cycle

    @classmethod
    def with_program(cls, words, dm_preload: bytes = b"", *, im_size=IM_SIZE, dm_size=DM_SIZE, timing=None):
        state = cls(mem=MemoryImage(im_size, dm_size))
        state.mem.load_program(words)
        if dm_preload:
            state.mem.load_data(dm_preload)
        if timing is not None:
            state.sau.timing = timing
        return state

    def copy(self) -> "CoreState":
        return CoreState(RegisterFile(self.regs), self.pc, self.mem.copy(), self.buffer.copy(),
                         self.sau.copy(), self.halted, self.retired, None)

    def dm_digest(self) -> str:
        return hashlib.sha256(self.mem.dm).hexdigest()

    def architectural(self):
        """Everything two correct executions of the same program must agree on."""
        return self.regs.as_list(), bytes(self.mem.dm), tuple(self.buffer.words)


# --------------------------------------------------------------------------
# shared execute-stage semantics


def alu(op: str, a: int, b: int) -> int:
    if op in ("add", "addi"):
        return (a + b) & MASK32
    if op == "sub":
        return (a - b) & MASK32
    if op in ("xor", "xori"):
        return a ^ b
    if op in ("or", "ori"):
        return a | b
    if op in ("and", "andi"):
        return a & b
    if op in ("sll", "slli"):
        return (a << (b & 31)) & MASK32
    if op in ("srl", "srli"):
        return a >> (b & 31)
    if op in ("sra", "srai"):
        sa = a - (1 << 32) if a >> 31 else a
        return (sa >> (b & 31)) & MASK32
    if op in ("slt", "slti"):
        sa = a - (1 << 32) if a >> 31 else a
        sb = b - (1 << 32) if b >> 31 else b
        return int(sa < sb)
    if op in ("sltu", "sltiu"):
        return int(a < b)
    raise ValueError(op)


def branch_taken(op: str, a: int, b: int) -> bool:
    if op == "beq":
        return a == b
    if op == "bne":
        return a != b
    if op in ("bltu", "bgeu"):
        return (a < b) == (op == "bltu")
    sa = a - (1 << 32) if a >> 31 else a
    sb = b - (1 << 32) if b >> 31 else b
    return (sa < sb) == (op == "blt")


LOAD_SPEC = {"lb": (1, True), "lh": (2, True), "lw": (4, False), "lbu": (1, False), "lhu": (2, False)}
STORE_SIZE = {"sb": 1, "sh": 2, "sw": 4}


def check_target(target: int, instr: Instr):
    if target % 4:
        raise MemoryFault(f"misaligned jump/branch target 0x{target:x} from 0x{instr.raw:08x}")


def execute_extension(core: CoreState, ins: Instr, a: int, b: int) -> int:
    """Run an extension instruction with source values ``a`` (first implicit
    source) and ``b``; returns its EXE occupancy in cycles."""
    kind = ins.kind
    if kind is Kind.BUF_SET:
        return sau.set_params(core, a, b, ins.imm)
    if kind is Kind.BUF_LOAD:
        return sau.buffer_load(core)
    if kind is Kind.BUF_STORE:
        return sau.buffer_store(core)
    return sau.aes_exec(core, ins.aes, a)


def _src_values(regs, ins: Instr):
    if ins.kind is Kind.BUF_SET:
        return regs[8], regs[20]
    if ins.kind is Kind.AES_EXEC:
        return regs[20], 0
    return regs[ins.rs1], regs[ins.rs2]


def step_functional(state: CoreState) -> CoreState:
    """Execute exactly one instruction; mutates and returns ``state``."""
    if state.halted:
        return state
    pc = state.pc
    ins = decode(state.mem.fetch(pc))
    regs = state.regs
    kind = ins.kind
    a, b = _src_values(regs, ins)
    next_pc = (pc + 4) & MASK32

    if kind is Kind.ALU_REG:
        regs[ins.rd] = alu(ins.op, a, b)
    elif kind is Kind.ALU_IMM:
        regs[ins.rd] = alu(ins.op, a, ins.imm & MASK32)
    elif kind is Kind.LOAD:
        size, signed = LOAD_SPEC[ins.op]
        regs[ins.rd] = state.mem.load((a + ins.imm) & MASK32, size, signed)
    elif kind is Kind.STORE:
        state.mem.store((a + ins.imm) & MASK32, STORE_SIZE[ins.op], b)
    elif kind is Kind.BRANCH:
        if branch_taken(ins.op, a, b):
            next_pc = (pc + ins.imm) & MASK32
            check_target(next_pc, ins)
    elif kind is Kind.JAL:
        next_pc = (pc + ins.imm) & MASK32
        check_target(next_pc, ins)
        regs[ins.rd] = pc + 4
    elif kind is Kind.JALR:
        next_pc = (a + ins.imm) & MASK32 & ~1
        check_target(next_pc, ins)
        regs[ins.rd] = pc + 4
    elif kind is Kind.LUI:
        regs[ins.rd] = ins.imm << 12
    elif kind is Kind.AUIPC:
        regs[ins.rd] = pc + (ins.imm << 12)
    elif kind is Kind.SYSTEM:
        state.halted = True
        next_pc = pc
    elif kind.is_extension:
        execute_extension(state, ins, a, b)
    else:  # pragma: no cover - decode() only returns the kinds above
        raise IllegalInstruction(ins.raw)
    state.pc = next_pc
    state.retired += 1
    return state


def run_functional(state: CoreState, max_steps: int = 10_000_000) -> CoreState:
    from aesrv.errors import CycleBudgetExceeded

    for _ in range(max_steps):
        if state.halted:
            return state
        step_functional(state)
    if not state.halted:
        raise CycleBudgetExceeded(f"no EBREAK within {max_steps} instructions")
    return state


# --------------------------------------------------------------------------
# hex memory images: one 32-bit word per line, stored little-endian


def read_hex(path) -> list[int]:
    words = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].split("//", 1)[0].strip()
        if not line:
            continue
        try:
            words.append(int(line, 16) & MASK32)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not a hex word: {line!r}") from None
    return words


def write_hex(path, words):
    Path(path).write_text("".join(f"{w & MASK32:08x}\n" for w in words))


def words_to_bytes(words) -> bytes:
    return b"".join((w & MASK32).to_bytes(4, "little") for w in words)


def bytes_to_words(data: bytes) -> list[int]:
    data = bytes(data) + bytes(-len(data) % 4)
    return [int.from_bytes(data[i:i + 4], "little") for i in range(0, len(data), 4)]
