"""RV32I + AES-extension instruction decoding and encoding.

Decoding is strict: every bit of a word is either an opcode/funct field or an
operand field, so ``encode(decode(w)) == w`` for every word that decodes.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from importlib import resources

from aesrv.config import AesConfig, Mode
from aesrv.errors import IllegalInstruction

MASK32 = 0xFFFFFFFF


def _load_encoding():
    with resources.files("aesrv.data").joinpath("extension_encoding.json").open() as fh:
        return json.load(fh)


EXTENSION_ENCODING = _load_encoding()

AES_OPCODES = {int(k): v for k, v in EXTENSION_ENCODING["aes"]["opcodes"].items()}
AES_FUNC3 = {Mode(k): v for k, v in EXTENSION_ENCODING["aes"]["func3"].items()}
BUF_OPCODE = EXTENSION_ENCODING["buffer"]["opcode"]
BUF_FUNC3 = dict(EXTENSION_ENCODING["buffer"]["func3"])

OP_LUI = 0x37
OP_AUIPC = 0x17
OP_JAL = 0x6F
OP_JALR = 0x67
OP_BRANCH = 0x63
OP_LOAD = 0x03
OP_STORE = 0x23
OP_IMM = 0x13
OP_REG = 0x33
OP_SYSTEM = 0x73
EBREAK_WORD = 0x00100073

BASE_OPCODES = frozenset(
    {OP_LUI, OP_AUIPC, OP_JAL, OP_JALR, OP_BRANCH, OP_LOAD, OP_STORE, OP_IMM, OP_REG, OP_SYSTEM,
     0x0F}  # MISC-MEM (fence) is reserved even though unimplemented
)


class Kind(enum.Enum):
    LUI = "lui"
    AUIPC = "auipc"
    JAL = "jal"
    JALR = "jalr"
    BRANCH = "branch"
    LOAD = "load"
    STORE = "store"
    ALU_IMM = "alu-imm"
    ALU_REG = "alu-reg"
    SYSTEM = "system"
    BUF_SET = "buffer-set"
    BUF_LOAD = "buffer-load"
    BUF_STORE = "buffer-store"
    AES_EXEC = "aes-exec"

    @property
    def is_extension(self):
        return self in _EXTENSION_KINDS


_EXTENSION_KINDS = frozenset({Kind.BUF_SET, Kind.BUF_LOAD, Kind.BUF_STORE, Kind.AES_EXEC})

BRANCH_F3 = {0: "beq", 1: "bne", 4: "blt", 5: "bge", 6: "bltu", 7: "bgeu"}
LOAD_F3 = {0: "lb", 1: "lh", 2: "lw", 4: "lbu", 5: "lhu"}
STORE_F3 = {0: "sb", 1: "sh", 2: "sw"}
IMM_F3 = {0: "addi", 2: "slti", 3: "sltiu", 4: "xori", 6: "ori", 7: "andi"}
SHIFT_IMM = {(1, 0x00): "slli", (5, 0x00): "srli", (5, 0x20): "srai"}
REG_OPS = {
    (0, 0x00): "add", (0, 0x20): "sub", (1, 0x00): "sll", (2, 0x00): "slt",
    (3, 0x00): "sltu", (4, 0x00): "xor", (5, 0x00): "srl", (5, 0x20): "sra",
    (6, 0x00): "or", (7, 0x00): "and",
}
AES_MNEMONICS = {
    f"aes{bits}.{mode.value}": AesConfig(mode, bits) for bits in AES_OPCODES for mode in AES_FUNC3
}

# mnemonic -> (kind, opcode, funct3, funct7); funct7 only meaningful for R-type and shift-imm
ENCODINGS: dict[str, tuple[Kind, int, int, int]] = {
    "lui": (Kind.LUI, OP_LUI, 0, 0),
    "auipc": (Kind.AUIPC, OP_AUIPC, 0, 0),
    "jal": (Kind.JAL, OP_JAL, 0, 0),
    "jalr": (Kind.JALR, OP_JALR, 0, 0),
    "ebreak": (Kind.SYSTEM, OP_SYSTEM, 0, 0),
}
ENCODINGS.update({m: (Kind.BRANCH, OP_BRANCH, f3, 0) for f3, m in BRANCH_F3.items()})
ENCODINGS.update({m: (Kind.LOAD, OP_LOAD, f3, 0) for f3, m in LOAD_F3.items()})
ENCODINGS.update({m: (Kind.STORE, OP_STORE, f3, 0) for f3, m in STORE_F3.items()})
ENCODINGS.update({m: (Kind.ALU_IMM, OP_IMM, f3, 0) for f3, m in IMM_F3.items()})
ENCODINGS.update({m: (Kind.ALU_IMM, OP_IMM, f3, f7) for (f3, f7), m in SHIFT_IMM.items()})
ENCODINGS.update({m: (Kind.ALU_REG, OP_REG, f3, f7) for (f3, f7), m in REG_OPS.items()})
ENCODINGS["buf.cfg"] = (Kind.BUF_SET, BUF_OPCODE, BUF_FUNC3["buf.cfg"], 0)
ENCODINGS["buf.ld"] = (Kind.BUF_LOAD, BUF_OPCODE, BUF_FUNC3["buf.ld"], 0)
ENCODINGS["buf.st"] = (Kind.BUF_STORE, BUF_OPCODE, BUF_FUNC3["buf.st"], 0)
ENCODINGS.update(
    {m: (Kind.AES_EXEC, AES_OPCODES[c.key_bits], AES_FUNC3[c.mode], 0) for m, c in AES_MNEMONICS.items()}
)


@dataclass(frozen=True, slots=True)
class Instr:
    """A decoded instruction. ``op`` is the lower-case mnemonic."""

    op: str
    kind: Kind
    rd: int = 0
    rs1: int = 0
    rs2: int = 0
    imm: int = 0
    raw: int = 0
    srcs: tuple = ()
    dest: int = 0
    aes: AesConfig | None = None

    def __str__(self):
        from aesrv.asm import format_instr

        return format_instr(self)


def sext(value, bits):
    sign = 1 << (bits - 1)
    return (value & (sign - 1)) - (value & sign)


def _make(op, kind, raw, rd=0, rs1=0, rs2=0, imm=0, aes=None):
    if kind in (Kind.LUI, Kind.AUIPC, Kind.JAL):
        srcs = ()
    elif kind in (Kind.JALR, Kind.LOAD, Kind.ALU_IMM):
        srcs = (rs1,)
    elif kind in (Kind.BRANCH, Kind.STORE, Kind.ALU_REG):
        srcs = (rs1, rs2)
    elif kind is Kind.BUF_SET:
        srcs = (8, 20)
    elif kind is Kind.AES_EXEC:
        srcs = (20,)
    else:
        srcs = ()
    writes = kind in (Kind.LUI, Kind.AUIPC, Kind.JAL, Kind.JALR, Kind.LOAD, Kind.ALU_IMM, Kind.ALU_REG)
    return Instr(op, kind, rd, rs1, rs2, imm, raw, tuple(s for s in srcs if s), rd if writes else 0, aes)


def decode(word: int) -> Instr:
    """Decode one 32-bit word; raises :class:`IllegalInstruction` for anything unimplemented."""
    w = word & MASK32
    opcode = w & 0x7F
    rd = (w >> 7) & 0x1F
    f3 = (w >> 12) & 0x7
    rs1 = (w >> 15) & 0x1F
    rs2 = (w >> 20) & 0x1F
    f7 = w >> 25

    if opcode == OP_LUI:
        return _make("lui", Kind.LUI, w, rd=rd, imm=w >> 12)
    if opcode == OP_AUIPC:
        return _make("auipc", Kind.AUIPC, w, rd=rd, imm=w >> 12)
    if opcode == OP_JAL:
        imm = (((w >> 31) & 1) << 20) | (((w >> 12) & 0xFF) << 12) | (((w >> 20) & 1) << 11) | (((w >> 21) & 0x3FF) << 1)
        return _make("jal", Kind.JAL, w, rd=rd, imm=sext(imm, 21))
    if opcode == OP_JALR and f3 == 0:
        return _make("jalr", Kind.JALR, w, rd=rd, rs1=rs1, imm=sext(w >> 20, 12))
    if opcode == OP_BRANCH and f3 in BRANCH_F3:
        imm = (((w >> 31) & 1) << 12) | (((w >> 7) & 1) << 11) | (((w >> 25) & 0x3F) << 5) | (((w >> 8) & 0xF) << 1)
        return _make(BRANCH_F3[f3], Kind.BRANCH, w, rs1=rs1, rs2=rs2, imm=sext(imm, 13))
    if opcode == OP_LOAD and f3 in LOAD_F3:
        return _make(LOAD_F3[f3], Kind.LOAD, w, rd=rd, rs1=rs1, imm=sext(w >> 20, 12))
    if opcode == OP_STORE and f3 in STORE_F3:
        imm = (f7 << 5) | rd
        return _make(STORE_F3[f3], Kind.STORE, w, rs1=rs1, rs2=rs2, imm=sext(imm, 12))
    if opcode == OP_IMM:
        if f3 in IMM_F3:
            return _make(IMM_F3[f3], Kind.ALU_IMM, w, rd=rd, rs1=rs1, imm=sext(w >> 20, 12))
        if (f3, f7) in SHIFT_IMM:
            return _make(SHIFT_IMM[(f3, f7)], Kind.ALU_IMM, w, rd=rd, rs1=rs1, imm=rs2)
    if opcode == OP_REG and (f3, f7) in REG_OPS:
        return _make(REG_OPS[(f3, f7)], Kind.ALU_REG, w, rd=rd, rs1=rs1, rs2=rs2)
    if w == EBREAK_WORD:
        return _make("ebreak", Kind.SYSTEM, w)
    if opcode == BUF_OPCODE:
        if f3 == BUF_FUNC3["buf.cfg"] and rd == 0 and rs1 == 0:
            return _make("buf.cfg", Kind.BUF_SET, w, imm=w >> 20)
        if w >> 7 == f3 << 5:
            if f3 == BUF_FUNC3["buf.ld"]:
                return _make("buf.ld", Kind.BUF_LOAD, w)
            if f3 == BUF_FUNC3["buf.st"]:
                return _make("buf.st", Kind.BUF_STORE, w)
    for bits, aes_opcode in AES_OPCODES.items():
        if opcode == aes_opcode and w >> 7 == f3 << 5:
            for mode, mode_f3 in AES_FUNC3.items():
                if f3 == mode_f3:
                    cfg = AesConfig(mode, bits)
                    return _make(f"aes{bits}.{mode.value}", Kind.AES_EXEC, w, aes=cfg)
    raise IllegalInstruction(w)


def try_decode(word: int) -> Instr | None:
    try:
        return decode(word)
    except IllegalInstruction:
        return None


def encode_fields(op: str, rd=0, rs1=0, rs2=0, imm=0) -> int:
    """Encode an instruction from its mnemonic and operand fields.

    Immediates must already be in range; branch/jump immediates are byte
    offsets (even).
    """
    try:
        kind, opcode, f3, f7 = ENCODINGS[op]
    except KeyError:
        raise ValueError(f"unknown mnemonic {op!r}") from None
    for r in (rd, rs1, rs2):
        if not 0 <= r < 32:
            raise ValueError(f"register index {r} out of range")
    if kind in (Kind.LUI, Kind.AUIPC):
        return ((imm & 0xFFFFF) << 12) | (rd << 7) | opcode
    if kind is Kind.JAL:
        i = imm & 0x1FFFFF
        return (((i >> 20) & 1) << 31) | (((i >> 1) & 0x3FF) << 21) | (((i >> 11) & 1) << 20) \
            | (((i >> 12) & 0xFF) << 12) | (rd << 7) | opcode
    if kind is Kind.BRANCH:
        i = imm & 0x1FFF
        return (((i >> 12) & 1) << 31) | (((i >> 5) & 0x3F) << 25) | (rs2 << 20) | (rs1 << 15) \
            | (f3 << 12) | (((i >> 1) & 0xF) << 8) | (((i >> 11) & 1) << 7) | opcode
    if kind is Kind.STORE:
        i = imm & 0xFFF
        return ((i >> 5) << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) | ((i & 0x1F) << 7) | opcode
    if kind is Kind.ALU_IMM and op in ("slli", "srli", "srai"):
        return (f7 << 25) | ((imm & 0x1F) << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | opcode
    if kind in (Kind.JALR, Kind.LOAD, Kind.ALU_IMM):
        return ((imm & 0xFFF) << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | opcode
    if kind is Kind.ALU_REG:
        return (f7 << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | opcode
    if kind is Kind.SYSTEM:
        return EBREAK_WORD
    if kind is Kind.BUF_SET:
        return ((imm & 0xFFF) << 20) | (f3 << 12) | opcode
    return (f3 << 12) | opcode


def encode(instr: Instr) -> int:
    return encode_fields(instr.op, instr.rd, instr.rs1, instr.rs2, instr.imm)
