"""Workload generators: a pure-RV32I software AES and the accelerated program.

The baseline is written the way a small C library compiles for a bare RV32I
core: byte-oriented state in memory, a subroutine call per S-box lookup and
per ``xtime``, nested ``for`` loops with recomputed ``i*4 + j`` indexing,
callee-saved register spills on every call. It deliberately uses no
extension instruction.
"""

from __future__ import annotations

from dataclasses import dataclass

from aesrv.asm import Program, assemble
from aesrv.config import AesConfig, Mode
from aesrv.errors import LayoutFault
from aesrv.isa import decode
from aesrv.sau import DEFAULT_LAYOUT, SBOX

# baseline DM map (byte addresses)
B_SBOX = 0x000
B_RCON = 0x100
B_KEY = 0x200
B_IV = 0x220
B_RK = 0x240
B_STATE = 0x340
B_CHAIN = 0x350
B_PT = 0x400
B_CT = 0x8000

RCON_TABLE = bytes([0x8D, 0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36])

# accelerated DM map, relative to the program's data base
A_CT_OFFSET = 0x400


@dataclass
class GeneratedProgram:
    config: AesConfig
    n_blocks: int
    kind: str
    source: str
    program: Program
    dm_preload: bytes
    ct_addr: int
    dm_base: int = 0

    @property
    def words(self):
        return self.program.words

    @property
    def ct_len(self):
        return 16 * self.n_blocks

    def ciphertext(self, state) -> bytes:
        return bytes(state.mem.dm[self.ct_addr:self.ct_addr + self.ct_len])

    def make_state(self, **kw):
        from aesrv.core import CoreState

        return CoreState.with_program(self.words, self.dm_preload, **kw)


def _check_inputs(config, n_blocks, key, iv, plaintext):
    if n_blocks < 1:
        raise ValueError("n_blocks must be >= 1")
    if len(key) != config.key_bytes:
        raise ValueError(f"{config} needs a {config.key_bytes}-byte key")
    if len(iv) != 16:
        raise ValueError("IV must be 16 bytes")
    if len(plaintext) != 16 * n_blocks:
        raise ValueError(f"plaintext must be {16 * n_blocks} bytes")


def _stack_frame(saved):
    size = 4 * (len(saved) + 1 + 3) // 16 * 16 + 16
    push = [f"    addi sp, sp, -{size}", f"    sw ra, {size - 4}(sp)"]
    pop = []
    for i, r in enumerate(saved):
        push.append(f"    sw {r}, {size - 8 - 4 * i}(sp)")
        pop.append(f"    lw {r}, {size - 8 - 4 * i}(sp)")
    pop += [f"    lw ra, {size - 4}(sp)", f"    addi sp, sp, {size}", "    ret"]
    return "\n".join(push), "\n".join(pop)


def _function(name, saved, body):
    push, pop = _stack_frame(saved)
    return f"{name}:\n{push}\n{body.strip(chr(10))}\n{pop}\n"


def baseline_source(config: AesConfig, n_blocks: int, *, stack_top: int) -> str:
    nk, nr = config.nk, config.rounds
    parts = [f"""# software AES, {config}, {n_blocks} block(s)
_start:
    li sp, {stack_top}
    call key_expansion
    call encrypt_blocks
    ebreak
"""]

    parts.append(_function("get_sbox", ["s0"], f"""
    addi s0, sp, 16
    li t0, {B_SBOX}
    add t0, t0, a0
    lbu a0, 0(t0)
"""))
    parts.append(_function("xtime", ["s0"], """
    addi s0, sp, 16
    andi t0, a0, 0x80
    slli a0, a0, 1
    andi a0, a0, 0xff
    beqz t0, xtime_done
    xori a0, a0, 0x1b
xtime_done:
"""))

    sub_word = "\n".join(
        f"    lbu a0, {b}(sp)\n    call get_sbox\n    sb a0, {b}(sp)" for b in range(4)
    )
    nk8_branch = ""
    if nk == 8:
        nk8_branch = f"""
    li t0, 4
    bne s2, t0, ke_xor
{sub_word}
"""
    xor_word = "\n".join(
        f"    lbu t3, {b}(t2)\n    lbu t4, {b}(sp)\n    xor t3, t3, t4\n    sb t3, {b}(t0)" for b in range(4)
    )
    parts.append(f"""key_expansion:
    addi sp, sp, -32
    sw ra, 28(sp)
    sw s0, 24(sp)
    sw s1, 20(sp)
    sw s2, 16(sp)
    sw s3, 12(sp)
    sw s4, 8(sp)
    addi sp, sp, -16
    li s0, 0
    li s1, {4 * nk}
ke_copy:
    li t0, {B_KEY}
    add t0, t0, s0
    lbu t1, 0(t0)
    li t0, {B_RK}
    add t0, t0, s0
    sb t1, 0(t0)
    addi s0, s0, 1
    blt s0, s1, ke_copy
    li s0, {nk}
    li s2, 0
    li s3, 1
    li s4, {4 * (nr + 1)}
ke_loop:
    addi t0, s0, -1
    slli t0, t0, 2
    li t1, {B_RK}
    add t0, t0, t1
    lbu t2, 0(t0)
    sb t2, 0(sp)
    lbu t2, 1(t0)
    sb t2, 1(sp)
    lbu t2, 2(t0)
    sb t2, 2(sp)
    lbu t2, 3(t0)
    sb t2, 3(sp)
    bnez s2, ke_not_first
    lbu t0, 0(sp)
    lbu t1, 1(sp)
    lbu t2, 2(sp)
    lbu t3, 3(sp)
    sb t1, 0(sp)
    sb t2, 1(sp)
    sb t3, 2(sp)
    sb t0, 3(sp)
{sub_word}
    li t0, {B_RCON}
    add t0, t0, s3
    lbu t1, 0(t0)
    lbu t2, 0(sp)
    xor t2, t2, t1
    sb t2, 0(sp)
    addi s3, s3, 1
    j ke_xor
ke_not_first:
{nk8_branch}
ke_xor:
    slli t0, s0, 2
    li t1, {B_RK}
    add t0, t0, t1
    addi t2, t0, -{4 * nk}
{xor_word}
    addi s2, s2, 1
    li t0, {nk}
    bne s2, t0, ke_next
    li s2, 0
ke_next:
    addi s0, s0, 1
    blt s0, s4, ke_loop
    addi sp, sp, 16
    lw s4, 8(sp)
    lw s3, 12(sp)
    lw s2, 16(sp)
    lw s1, 20(sp)
    lw s0, 24(sp)
    lw ra, 28(sp)
    addi sp, sp, 32
    ret
""")

    parts.append(_function("add_round_key", ["s0", "s1", "s2"], f"""
    mv s2, a0
    li s0, 0
ark_col:
    li s1, 0
ark_row:
    slli t0, s0, 2
    add t0, t0, s1
    slli t1, s2, 4
    add t1, t1, t0
    li t2, {B_RK}
    add t1, t1, t2
    lbu t3, 0(t1)
    li t2, {B_STATE}
    add t0, t0, t2
    lbu t4, 0(t0)
    xor t4, t4, t3
    sb t4, 0(t0)
    addi s1, s1, 1
    li t5, 4
    blt s1, t5, ark_row
    addi s0, s0, 1
    blt s0, t5, ark_col
"""))
    parts.append(_function("sub_bytes", ["s0", "s1"], f"""
    li s0, 0
sb_row:
    li s1, 0
sb_col:
    slli t0, s1, 2
    add t0, t0, s0
    li t1, {B_STATE}
    add t0, t0, t1
    lbu a0, 0(t0)
    call get_sbox
    slli t0, s1, 2
    add t0, t0, s0
    li t1, {B_STATE}
    add t0, t0, t1
    sb a0, 0(t0)
    addi s1, s1, 1
    li t2, 4
    blt s1, t2, sb_col
    addi s0, s0, 1
    blt s0, t2, sb_row
"""))

    def mv_byte(dst, src):
        return f"    lbu t1, {src}(t6)\n    sb t1, {dst}(t6)"

    def idx(c, r):
        return 4 * c + r

    shift = [f"    li t6, {B_STATE}"]
    # row 1: rotate left by one
    shift += [f"    lbu t0, {idx(0, 1)}(t6)", mv_byte(idx(0, 1), idx(1, 1)), mv_byte(idx(1, 1), idx(2, 1)),
              mv_byte(idx(2, 1), idx(3, 1)), f"    sb t0, {idx(3, 1)}(t6)"]
    # row 2: swap 0<->2 and 1<->3
    shift += [f"    lbu t0, {idx(0, 2)}(t6)", mv_byte(idx(0, 2), idx(2, 2)), f"    sb t0, {idx(2, 2)}(t6)",
              f"    lbu t0, {idx(1, 2)}(t6)", mv_byte(idx(1, 2), idx(3, 2)), f"    sb t0, {idx(3, 2)}(t6)"]
    # row 3: rotate left by three
    shift += [f"    lbu t0, {idx(0, 3)}(t6)", mv_byte(idx(0, 3), idx(3, 3)), mv_byte(idx(3, 3), idx(2, 3)),
              mv_byte(idx(2, 3), idx(1, 3)), f"    sb t0, {idx(1, 3)}(t6)"]
    parts.append(_function("shift_rows", [], "\n".join(shift)))

    def mc_byte(i, j):
        other = f"    lbu t1, {j}(s1)\n    xor a0, t0, t1" if j is not None else "    xor a0, t0, s2"
        return f"""    lbu t0, {i}(s1)
{other}
    call xtime
    xor a0, a0, s3
    lbu t0, {i}(s1)
    xor t0, t0, a0
    sb t0, {i}(s1)"""

    parts.append(_function("mix_columns", ["s0", "s1", "s2", "s3"], f"""
    li s0, 0
mc_col:
    slli s1, s0, 2
    li t0, {B_STATE}
    add s1, s1, t0
    lbu s2, 0(s1)
    lbu t1, 1(s1)
    lbu t2, 2(s1)
    lbu t3, 3(s1)
    xor s3, s2, t1
    xor s3, s3, t2
    xor s3, s3, t3
{mc_byte(0, 1)}
{mc_byte(1, 2)}
{mc_byte(2, 3)}
{mc_byte(3, None)}
    addi s0, s0, 1
    li t0, 4
    blt s0, t0, mc_col
"""))

    parts.append(_function("cipher", ["s0"], f"""
    li a0, 0
    call add_round_key
    li s0, 1
cipher_round:
    call sub_bytes
    call shift_rows
    li t0, {nr}
    beq s0, t0, cipher_last
    call mix_columns
    mv a0, s0
    call add_round_key
    addi s0, s0, 1
    j cipher_round
cipher_last:
    li a0, {nr}
    call add_round_key
"""))

    # copy16(a0 = dst, a1 = src) and xor16(a0 = dst ^= a1)
    parts.append(_function("copy16", ["s0"], """
    li s0, 0
cp_loop:
    add t0, a1, s0
    lbu t1, 0(t0)
    add t0, a0, s0
    sb t1, 0(t0)
    addi s0, s0, 1
    li t2, 16
    blt s0, t2, cp_loop
"""))
    parts.append(_function("xor16", ["s0"], """
    li s0, 0
xr_loop:
    add t0, a1, s0
    lbu t1, 0(t0)
    add t0, a0, s0
    lbu t3, 0(t0)
    xor t3, t3, t1
    sb t3, 0(t0)
    addi s0, s0, 1
    li t2, 16
    blt s0, t2, xr_loop
"""))
    parts.append(_function("ctr_increment", [], f"""
    li t0, 15
ci_loop:
    li t1, {B_CHAIN}
    add t1, t1, t0
    lbu t2, 0(t1)
    addi t2, t2, 1
    andi t2, t2, 0xff
    sb t2, 0(t1)
    bnez t2, ci_done
    addi t0, t0, -1
    bge t0, zero, ci_loop
ci_done:
"""))

    block_addr = f"""    slli t0, s0, 4
    li t1, {{base}}
    add {{reg}}, t1, t0"""

    def addr(reg, base):
        return block_addr.format(reg=reg, base=base)

    mode = config.mode
    if mode is Mode.ECB:
        body = f"""
{addr("a1", B_PT)}
    li a0, {B_STATE}
    call copy16
    call cipher
{addr("a0", B_CT)}
    li a1, {B_STATE}
    call copy16
"""
    elif mode is Mode.CBC:
        body = f"""
{addr("a1", B_PT)}
    li a0, {B_STATE}
    call copy16
    li a0, {B_STATE}
    li a1, {B_CHAIN}
    call xor16
    call cipher
{addr("a0", B_CT)}
    li a1, {B_STATE}
    call copy16
    li a0, {B_CHAIN}
    li a1, {B_STATE}
    call copy16
"""
    elif mode is Mode.CTR:
        body = f"""
    li a0, {B_STATE}
    li a1, {B_CHAIN}
    call copy16
    call cipher
{addr("a1", B_PT)}
    li a0, {B_STATE}
    call xor16
{addr("a0", B_CT)}
    li a1, {B_STATE}
    call copy16
    call ctr_increment
"""
    else:
        body = f"""
    li a0, {B_STATE}
    li a1, {B_CHAIN}
    call copy16
    call cipher
{addr("a1", B_PT)}
    li a0, {B_STATE}
    call xor16
{addr("a0", B_CT)}
    li a1, {B_STATE}
    call copy16
    li a0, {B_CHAIN}
    li a1, {B_STATE}
    call copy16
"""
    prologue = "" if mode is Mode.ECB else f"""
    li a0, {B_CHAIN}
    li a1, {B_IV}
    call copy16
"""
    parts.append(_function("encrypt_blocks", ["s0", "s1"], f"""{prologue}
    li s0, 0
    li s1, {n_blocks}
eb_loop:
{body.strip(chr(10))}
    addi s0, s0, 1
    blt s0, s1, eb_loop
"""))
    return "\n".join(parts)


def generate_baseline(config: AesConfig, n_blocks: int, key: bytes | None = None, iv: bytes | None = None,
                      plaintext: bytes | None = None, *, dm_size: int = 128 * 1024) -> GeneratedProgram:
    """Pure-RV32I AES program plus its DM preload (S-box, Rcon, key, IV, plaintext)."""
    key = bytes(config.key_bytes) if key is None else bytes(key)
    iv = bytes(16) if iv is None else bytes(iv)
    plaintext = bytes(16 * n_blocks) if plaintext is None else bytes(plaintext)
    _check_inputs(config, n_blocks, key, iv, plaintext)
    if B_CT + 16 * n_blocks > dm_size - 1024 or B_PT + 16 * n_blocks > B_CT:
        raise LayoutFault(f"{n_blocks} blocks do not fit the baseline data layout")
    source = baseline_source(config, n_blocks, stack_top=dm_size)
    program = assemble(source)
    image = bytearray(B_PT + 16 * n_blocks)
    image[B_SBOX:B_SBOX + 256] = SBOX
    image[B_RCON:B_RCON + len(RCON_TABLE)] = RCON_TABLE
    image[B_KEY:B_KEY + len(key)] = key
    image[B_IV:B_IV + 16] = iv
    image[B_PT:B_PT + len(plaintext)] = plaintext
    return GeneratedProgram(config, n_blocks, "baseline", source, program, bytes(image), B_CT)


def accelerated_source(config: AesConfig, n_blocks: int, dm_base: int = 0) -> str:
    lay = DEFAULT_LAYOUT
    in_words = lay.plaintext[0] + 4 * n_blocks
    return f"""# {config}, {n_blocks} block(s) on the SAU
    li x8, {dm_base}
    li x20, {in_words}
    buf.cfg {lay.key[0]}
    buf.ld
    li x20, {4 * n_blocks}
    aes{config.key_bits}.{config.mode.value}
    li x8, {dm_base + A_CT_OFFSET}
    buf.cfg {lay.ciphertext[0]}
    buf.st
    ebreak
"""


def accelerated_image(config: AesConfig, key: bytes, iv: bytes, plaintext: bytes) -> bytes:
    """Data image mirroring the buffer layout: key (8 words, zero padded), IV, plaintext."""
    lay = DEFAULT_LAYOUT
    image = bytearray(4 * lay.plaintext[0] + len(plaintext))
    image[4 * lay.key[0]:4 * lay.key[0] + len(key)] = key
    image[4 * lay.iv[0]:4 * lay.iv[0] + 16] = iv
    image[4 * lay.plaintext[0]:] = plaintext
    return bytes(image)


def generate_accelerated(config: AesConfig, n_blocks: int, key: bytes | None = None, iv: bytes | None = None,
                         plaintext: bytes | None = None, *, dm_base: int = 0) -> GeneratedProgram:
    """Buffer-load / one AES instruction / buffer-store program plus DM preload."""
    if n_blocks > DEFAULT_LAYOUT.max_blocks:
        raise LayoutFault(f"{n_blocks} blocks exceed the buffer capacity of {DEFAULT_LAYOUT.max_blocks}")
    key = bytes(config.key_bytes) if key is None else bytes(key)
    iv = bytes(16) if iv is None else bytes(iv)
    plaintext = bytes(16 * n_blocks) if plaintext is None else bytes(plaintext)
    _check_inputs(config, n_blocks, key, iv, plaintext)
    source = accelerated_source(config, n_blocks, dm_base)
    program = assemble(source)
    preload = bytes(dm_base) + accelerated_image(config, key, iv, plaintext)
    return GeneratedProgram(config, n_blocks, "accelerated", source, program, preload,
                            dm_base + A_CT_OFFSET, dm_base)


def uses_only_base_isa(words) -> bool:
    return all(not decode(w).kind.is_extension for w in words)
