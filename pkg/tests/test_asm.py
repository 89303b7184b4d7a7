import random

import pytest
from hypothesis import given, strategies as st

from aesrv.asm import assemble, disassemble, disassemble_word, is_extension_word, parse
from aesrv.errors import ParseError, RangeError, UnknownMnemonic
from aesrv.isa import AES_MNEMONICS, ENCODINGS, Kind, decode, encode_fields, try_decode


def test_addi():
    assert assemble("addi x1, x0, 5").words == [0x00500093]


def test_aes_word():
    (w,) = assemble("aes128.ecb").words
    assert w & 0x7F == 0x0B and (w >> 12) & 7 == 0


def test_range_error():
    with pytest.raises(RangeError) as e:
        assemble("addi x1, x0, 99999")
    assert e.value.line == 1


def test_unknown_mnemonic_and_parse_errors():
    with pytest.raises(UnknownMnemonic):
        assemble("nop\nfrobnicate x1")
    with pytest.raises(ParseError) as e:
        assemble("nop\naddi x1, x0")
    assert e.value.line == 2
    with pytest.raises(ParseError):
        assemble("addi x99, x0, 1")
    with pytest.raises(ParseError):
        assemble("j nowhere")
    with pytest.raises(ParseError):
        assemble("a: nop\na: nop")


def test_disassembly_examples():
    assert disassemble_word(0x00000013) == "addi x0, x0, 0"
    assert disassemble_word(encode_fields("aes256.ctr")) == "aes256.ctr"
    assert disassemble_word(0xFFFFFFFF) == ".word 0xffffffff"


def test_labels_comments_and_pseudos():
    prog = assemble("""
    start:  li a0, 0x12345678   # two words
            li a1, -3
            mv a2, a0
    loop:   addi a1, a1, 1
            bnez a1, loop
            call fn
            j end
    fn:     ret
    end:    ebreak
    """)
    assert prog.symbol_table["start"] == 0
    assert prog.symbol_table["loop"] == 16
    from aesrv.core import CoreState, run_functional
    s = CoreState.with_program(prog.words)
    run_functional(s)
    assert s.regs[10] == 0x12345678 and s.regs[12] == 0x12345678 and s.regs[11] == 0


def test_origin_shifts_labels():
    prog = assemble("x: j x", origin=0x100)
    assert prog.symbol_table["x"] == 0x100 and prog.words == assemble("x: j x").words


def test_parse_keeps_statements():
    sts = parse("a: addi x1, x0, 1 # c\n\n.word 5")
    assert [s.mnemonic for s in sts] == ["addi", ".word"]


def test_disassemble_listing_reassembles():
    src = "li x1, 100000\nloop: addi x1, x1, -1\nbnez x1, loop\nbuf.cfg 12\nbuf.ld\naes192.cfb\nebreak"
    prog = assemble(src)
    text = disassemble(prog.words, addresses=True)
    assert text.splitlines()[3].startswith("0000000c:  ")
    assert assemble(disassemble(prog.words)).words == prog.words


def test_is_extension_word():
    assert is_extension_word(encode_fields("buf.st"))
    assert not is_extension_word(0x00000013)
    assert not is_extension_word(0xFFFFFFFF)


def random_encoding(rng):
    """A random valid word built from the encoding table with random fields."""
    op = rng.choice(sorted(ENCODINGS))
    kind = ENCODINGS[op][0]
    fields = dict(rd=rng.randrange(32), rs1=rng.randrange(32), rs2=rng.randrange(32))
    if kind in (Kind.LUI, Kind.AUIPC):
        fields["imm"] = rng.randrange(1 << 20)
    elif kind is Kind.JAL:
        fields["imm"] = rng.randrange(-(1 << 19), 1 << 19) * 2
    elif kind is Kind.BRANCH:
        fields["imm"] = rng.randrange(-(1 << 11), 1 << 11) * 2
    elif op in ("slli", "srli", "srai"):
        fields["imm"] = rng.randrange(32)
    elif kind is Kind.BUF_SET:
        fields["imm"] = rng.randrange(256)
    else:
        fields["imm"] = rng.randrange(-2048, 2048)
    if kind.is_extension or kind is Kind.SYSTEM:
        fields = {"imm": fields["imm"]} if kind is Kind.BUF_SET else {}
    return encode_fields(op, **fields)


def test_structured_roundtrip_covers_all_mnemonics():
    rng = random.Random(11)
    seen = set()
    for _ in range(3000):
        w = random_encoding(rng)
        seen.add(decode(w).op)
        assert assemble(disassemble_word(w)).words == [w]
    assert set(AES_MNEMONICS) <= seen and {"buf.cfg", "buf.ld", "buf.st"} <= seen


@given(st.integers(0, 0xFFFFFFFF))
def test_roundtrip_any_word(w):
    assert assemble(disassemble_word(w)).words == [w]
    assert (try_decode(w) is None) == disassemble_word(w).startswith(".word")
