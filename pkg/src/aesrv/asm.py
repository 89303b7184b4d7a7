"""Two-pass assembler and disassembler for RV32I plus the AES extension.

Grammar, one statement per line::

    [label:] [mnemonic operand, operand, ...] [# comment]

Registers are ``x0``..``x31`` or ABI names. Immediates are decimal or
``0x``/``0b`` prefixed, optionally negative. Branch and jump targets are a
label or a numeric byte offset relative to the instruction. ``.word V``
emits a raw word. Supported pseudo-instructions: ``nop``, ``li``, ``mv``,
``j``, ``jr``, ``ret``, ``call``, ``beqz``, ``bnez``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from aesrv.errors import ParseError, RangeError, UnknownMnemonic
from aesrv.isa import AES_MNEMONICS, ENCODINGS, Instr, Kind, encode_fields, sext, try_decode

ABI_NAMES = "zero ra sp gp tp t0 t1 t2 s0 s1 a0 a1 a2 a3 a4 a5 a6 a7 s2 s3 s4 s5 s6 s7 s8 s9 s10 s11 t3 t4 t5 t6".split()
REGISTERS = {f"x{i}": i for i in range(32)}
REGISTERS.update({name: i for i, name in enumerate(ABI_NAMES)})
REGISTERS["fp"] = 8

PSEUDO = {"nop", "li", "mv", "j", "jr", "ret", "call", "beqz", "bnez"}
_LABEL = re.compile(r"^\s*([A-Za-z_.$][\w.$]*)\s*:")
_MEM = re.compile(r"^(.*)\(\s*([\w$]+)\s*\)$")
_SYMBOL = re.compile(r"^[A-Za-z_.$][\w.$]*$")


@dataclass
class Statement:
    line: int
    mnemonic: str
    operands: list
    address: int = 0
    column: int = 1
    labels: list = field(default_factory=list)


@dataclass
class Program:
    statements: list
    symbol_table: dict
    origin: int = 0
    words: list = field(default_factory=list)

    @property
    def image(self) -> bytes:
        return b"".join(w.to_bytes(4, "little") for w in self.words)

    def __len__(self):
        return len(self.words)


def _li_parts(value: int):
    if -2048 <= value < 2048:
        return None, value
    hi = ((value + 0x800) >> 12) & 0xFFFFF
    lo = sext(value & 0xFFF, 12)
    return hi, lo


def _size(st: Statement) -> int:
    if st.mnemonic == "li":
        if len(st.operands) != 2:
            raise ParseError("li expects 'rd, imm'", st.line, st.column)
        value = _parse_int(st.operands[1], st)
        if not -(1 << 31) <= value < (1 << 32):
            raise RangeError(f"li immediate {value} does not fit in 32 bits", st.line, st.column)
        hi, lo = _li_parts(value)
        return 4 if hi is None or lo == 0 else 8
    return 4


def _parse_int(text: str, st: Statement) -> int:
    try:
        return int(text.strip().replace("_", ""), 0)
    except ValueError:
        raise ParseError(f"bad immediate {text.strip()!r}", st.line, st.column) from None


def _reg(text: str, st: Statement) -> int:
    r = REGISTERS.get(text.strip().lower())
    if r is None:
        raise ParseError(f"unknown register {text.strip()!r}", st.line, st.column)
    return r


def _check_range(value, lo, hi, what, st):
    if not lo <= value <= hi:
        raise RangeError(f"{what} {value} out of range [{lo}, {hi}]", st.line, st.column)
    return value


def _imm12(text, st):
    return _check_range(_parse_int(text, st), -2048, 2047, "12-bit immediate", st)


def _mem_operand(text, st):
    m = _MEM.match(text.strip())
    if not m:
        raise ParseError(f"expected offset(register), got {text.strip()!r}", st.line, st.column)
    off = m.group(1).strip()
    return (_imm12(off, st) if off else 0), _reg(m.group(2), st)


def _target(text, st, symbols, bits):
    t = text.strip()
    if _SYMBOL.match(t) and t.lower() not in REGISTERS:
        if t not in symbols:
            raise ParseError(f"undefined label {t!r}", st.line, st.column)
        off = symbols[t] - st.address
    else:
        off = _parse_int(t, st)
    if off % 2:
        raise RangeError(f"branch/jump offset {off} is odd", st.line, st.column)
    lim = 1 << (bits - 1)
    return _check_range(off, -lim, lim - 2, f"{bits}-bit offset", st)


def _expect(st, n):
    if len(st.operands) != n:
        raise ParseError(f"{st.mnemonic} expects {n} operand(s), got {len(st.operands)}", st.line, st.column)


def _encode_statement(st: Statement, symbols) -> list[int]:
    mn, ops = st.mnemonic, st.operands
    if mn == ".word":
        _expect(st, 1)
        v = _parse_int(ops[0], st)
        return [_check_range(v, -(1 << 31), (1 << 32) - 1, ".word value", st) & 0xFFFFFFFF]
    if mn in PSEUDO:
        return _encode_pseudo(st, symbols)
    if mn not in ENCODINGS:
        raise UnknownMnemonic(f"unknown mnemonic {mn!r}", st.line, st.column)
    kind = ENCODINGS[mn][0]
    if kind is Kind.ALU_REG:
        _expect(st, 3)
        return [encode_fields(mn, rd=_reg(ops[0], st), rs1=_reg(ops[1], st), rs2=_reg(ops[2], st))]
    if kind is Kind.ALU_IMM:
        _expect(st, 3)
        if mn in ("slli", "srli", "srai"):
            imm = _check_range(_parse_int(ops[2], st), 0, 31, "shift amount", st)
        else:
            imm = _imm12(ops[2], st)
        return [encode_fields(mn, rd=_reg(ops[0], st), rs1=_reg(ops[1], st), imm=imm)]
    if kind is Kind.LOAD:
        _expect(st, 2)
        off, base = _mem_operand(ops[1], st)
        return [encode_fields(mn, rd=_reg(ops[0], st), rs1=base, imm=off)]
    if kind is Kind.STORE:
        _expect(st, 2)
        off, base = _mem_operand(ops[1], st)
        return [encode_fields(mn, rs2=_reg(ops[0], st), rs1=base, imm=off)]
    if kind is Kind.BRANCH:
        _expect(st, 3)
        return [encode_fields(mn, rs1=_reg(ops[0], st), rs2=_reg(ops[1], st), imm=_target(ops[2], st, symbols, 13))]
    if kind is Kind.JAL:
        if len(ops) == 1:
            return [encode_fields("jal", rd=1, imm=_target(ops[0], st, symbols, 21))]
        _expect(st, 2)
        return [encode_fields("jal", rd=_reg(ops[0], st), imm=_target(ops[1], st, symbols, 21))]
    if kind is Kind.JALR:
        if len(ops) == 1:
            return [encode_fields("jalr", rd=1, rs1=_reg(ops[0], st))]
        if len(ops) == 2:
            off, base = _mem_operand(ops[1], st)
            return [encode_fields("jalr", rd=_reg(ops[0], st), rs1=base, imm=off)]
        _expect(st, 3)
        return [encode_fields("jalr", rd=_reg(ops[0], st), rs1=_reg(ops[1], st), imm=_imm12(ops[2], st))]
    if kind in (Kind.LUI, Kind.AUIPC):
        _expect(st, 2)
        v = _check_range(_parse_int(ops[1], st), -(1 << 19), (1 << 20) - 1, "20-bit immediate", st)
        return [encode_fields(mn, rd=_reg(ops[0], st), imm=v & 0xFFFFF)]
    if kind is Kind.BUF_SET:
        _expect(st, 1)
        return [encode_fields(mn, imm=_check_range(_parse_int(ops[0], st), 0, 4095, "buffer index", st))]
    _expect(st, 0)
    return [encode_fields(mn)]


def _encode_pseudo(st: Statement, symbols) -> list[int]:
    mn, ops = st.mnemonic, st.operands
    if mn == "nop":
        _expect(st, 0)
        return [encode_fields("addi")]
    if mn == "li":
        rd = _reg(ops[0], st)
        hi, lo = _li_parts(_parse_int(ops[1], st))
        if hi is None:
            return [encode_fields("addi", rd=rd, imm=lo)]
        out = [encode_fields("lui", rd=rd, imm=hi)]
        if lo:
            out.append(encode_fields("addi", rd=rd, rs1=rd, imm=lo))
        return out
    if mn == "mv":
        _expect(st, 2)
        return [encode_fields("addi", rd=_reg(ops[0], st), rs1=_reg(ops[1], st))]
    if mn == "j":
        _expect(st, 1)
        return [encode_fields("jal", rd=0, imm=_target(ops[0], st, symbols, 21))]
    if mn == "call":
        _expect(st, 1)
        return [encode_fields("jal", rd=1, imm=_target(ops[0], st, symbols, 21))]
    if mn == "jr":
        _expect(st, 1)
        return [encode_fields("jalr", rd=0, rs1=_reg(ops[0], st))]
    if mn == "ret":
        _expect(st, 0)
        return [encode_fields("jalr", rd=0, rs1=1)]
    _expect(st, 2)  # beqz / bnez
    op = "beq" if mn == "beqz" else "bne"
    return [encode_fields(op, rs1=_reg(ops[0], st), rs2=0, imm=_target(ops[1], st, symbols, 13))]


def parse(source: str) -> list[Statement]:
    statements = []
    pending = []
    for lineno, raw in enumerate(source.splitlines(), 1):
        text = raw.split("#", 1)[0]
        col = 1
        while True:
            m = _LABEL.match(text)
            if not m:
                break
            pending.append((m.group(1), lineno, col + m.start(1)))
            col += m.end()
            text = text[m.end():]
        body = text.strip()
        if not body:
            continue
        col += len(text) - len(text.lstrip())
        parts = body.split(None, 1)
        mnemonic = parts[0].lower()
        operands = [o.strip() for o in parts[1].split(",")] if len(parts) > 1 else []
        if any(o == "" for o in operands):
            raise ParseError("empty operand", lineno, col)
        statements.append(Statement(lineno, mnemonic, operands, column=col, labels=[n for n, _, _ in pending]))
        pending = []
    if pending:
        # trailing labels point one past the last instruction
        statements.append(Statement(pending[0][1], "", [], labels=[n for n, _, _ in pending]))
    return statements


def assemble(source: str, origin: int = 0) -> Program:
    """Assemble ``source`` into an IM word stream plus symbol table."""
    statements = parse(source)
    symbols: dict[str, int] = {}
    addr = origin
    for st in statements:
        for name in st.labels:
            if name in symbols:
                raise ParseError(f"duplicate label {name!r}", st.line, st.column)
            symbols[name] = addr
        st.address = addr
        if st.mnemonic:
            if st.mnemonic not in ENCODINGS and st.mnemonic not in PSEUDO and st.mnemonic != ".word":
                raise UnknownMnemonic(f"unknown mnemonic {st.mnemonic!r}", st.line, st.column)
            addr += _size(st)
    words = []
    for st in statements:
        if st.mnemonic:
            words.extend(_encode_statement(st, symbols))
    return Program([s for s in statements if s.mnemonic], symbols, origin, words)


# --------------------------------------------------------------------------
# disassembly


def format_instr(ins: Instr) -> str:
    k, op = ins.kind, ins.op
    x = lambda r: f"x{r}"  # noqa: E731
    if k is Kind.ALU_REG:
        return f"{op} {x(ins.rd)}, {x(ins.rs1)}, {x(ins.rs2)}"
    if k is Kind.ALU_IMM:
        return f"{op} {x(ins.rd)}, {x(ins.rs1)}, {ins.imm}"
    if k is Kind.LOAD:
        return f"{op} {x(ins.rd)}, {ins.imm}({x(ins.rs1)})"
    if k is Kind.STORE:
        return f"{op} {x(ins.rs2)}, {ins.imm}({x(ins.rs1)})"
    if k is Kind.BRANCH:
        return f"{op} {x(ins.rs1)}, {x(ins.rs2)}, {ins.imm}"
    if k is Kind.JAL:
        return f"jal {x(ins.rd)}, {ins.imm}"
    if k is Kind.JALR:
        return f"jalr {x(ins.rd)}, {ins.imm}({x(ins.rs1)})"
    if k in (Kind.LUI, Kind.AUIPC):
        return f"{op} {x(ins.rd)}, 0x{ins.imm:x}"
    if k is Kind.BUF_SET:
        return f"buf.cfg {ins.imm}"
    return op


def disassemble_word(word: int) -> str:
    ins = try_decode(word)
    return format_instr(ins) if ins is not None else f".word 0x{word & 0xFFFFFFFF:08x}"


def disassemble(image, *, addresses: bool = False, origin: int = 0) -> str:
    """One line per word; ``image`` is a list of words or little-endian bytes."""
    if isinstance(image, (bytes, bytearray)):
        image = [int.from_bytes(image[i:i + 4], "little") for i in range(0, len(image) - 3, 4)]
    lines = []
    for i, w in enumerate(image):
        text = disassemble_word(w)
        lines.append(f"{origin + 4 * i:08x}:  {w & 0xFFFFFFFF:08x}  {text}" if addresses else text)
    return "\n".join(lines) + ("\n" if lines else "")


def is_extension_word(word: int) -> bool:
    ins = try_decode(word)
    return ins is not None and ins.kind.is_extension


__all__ = ["AES_MNEMONICS", "Program", "assemble", "disassemble", "disassemble_word", "format_instr"]
