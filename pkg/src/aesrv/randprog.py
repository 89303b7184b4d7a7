"""Random terminating programs for differential testing of the cycle model.

Register conventions inside generated programs:
x30 holds the data base, x29 is the loop counter, x8/x20 are written only by
buffer/AES sequences. Forward branches never leave the loop body they start in,
so every program halts.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from aesrv.asm import assemble
from aesrv.config import ALL_CONFIGS

DATA_BASE = 0x800
DATA_BYTES = 0x400
DM_SIZE = 0x1000
IM_SIZE = 0x1000

_FREE = [r for r in range(1, 29) if r not in (8, 20)]
_ALU_R = ["add", "sub", "sll", "slt", "sltu", "xor", "srl", "sra", "or", "and"]
_ALU_I = ["addi", "slti", "sltiu", "xori", "ori", "andi"]
_SHIFT_I = ["slli", "srli", "srai"]
_BRANCH = ["beq", "bne", "blt", "bge", "bltu", "bgeu"]
_LOADS = {"lb": 1, "lbu": 1, "lh": 2, "lhu": 2, "lw": 4}
_STORES = {"sb": 1, "sh": 2, "sw": 4}


@dataclass
class RandomProgram:
    source: str
    words: list
    dm_preload: bytes


class _Gen:
    def __init__(self, rng: random.Random, max_instrs: int, extension: bool):
        self.rng = rng
        self.budget = max_instrs
        self.extension = extension
        self.labels = 0

    def label(self):
        self.labels += 1
        return f"L{self.labels}"

    def reg(self):
        return self.rng.choice(_FREE)

    def src(self):
        return self.rng.choice(_FREE + [0, 8, 20, 29, 30])

    def simple(self):
        rng = self.rng
        k = rng.random()
        if k < 0.30:
            return [f"{rng.choice(_ALU_R)} x{self.reg()}, x{self.src()}, x{self.src()}"]
        if k < 0.50:
            return [f"{rng.choice(_ALU_I)} x{self.reg()}, x{self.src()}, {rng.randint(-2048, 2047)}"]
        if k < 0.57:
            return [f"{rng.choice(_SHIFT_I)} x{self.reg()}, x{self.src()}, {rng.randint(0, 31)}"]
        if k < 0.62:
            op = rng.choice(["lui", "auipc"])
            return [f"{op} x{self.reg()}, {rng.randint(0, 0xFFFFF)}"]
        if k < 0.82:
            op, size = rng.choice(list(_LOADS.items()))
            off = rng.randrange(0, DATA_BYTES, size)
            return [f"{op} x{self.reg()}, {off}(x30)"]
        op, size = rng.choice(list(_STORES.items()))
        off = rng.randrange(0, DATA_BYTES, size)
        return [f"{op} x{self.src()}, {off}(x30)"]

    def extension_seq(self):
        rng = self.rng
        if rng.random() < 0.5:
            words = rng.randint(0, 16)
            start = rng.randint(0, 256 - words)
            addr = DATA_BASE + 4 * rng.randint(0, DATA_BYTES // 4 - words)
            op = rng.choice(["buf.ld", "buf.st"])
            return [f"li x8, {addr}", f"li x20, {words}", f"buf.cfg {start}", op]
        cfg = rng.choice(ALL_CONFIGS)
        return [f"li x20, {4 * rng.randint(1, 2)}", f"aes{cfg.key_bits}.{cfg.mode.value}"]

    def region(self, budget, depth):
        """Straight-line code with forward branches and nested bounded loops."""
        out, pending = [], []
        used = 0
        while used < budget:
            rng = self.rng
            k = rng.random()
            if k < 0.10 and budget - used > 3:
                lab = self.label()
                pending.append([lab, rng.randint(1, 6)])
                if rng.random() < 0.8:
                    out.append(f"{rng.choice(_BRANCH)} x{self.src()}, x{self.src()}, {lab}")
                else:
                    out.append(f"jal x{rng.choice([0] + _FREE)}, {lab}")
                used += 1
            elif k < 0.15 and depth == 0 and budget - used > 8:
                inner = rng.randint(2, min(12, budget - used - 4))
                top = self.label()
                body = self.region(inner, depth + 1)
                lines = [f"li x29, {rng.randint(1, 4)}", f"{top}:", *body,
                         "addi x29, x29, -1", f"bnez x29, {top}"]
                out.extend(lines)
                used += sum(1 for ln in lines if not ln.endswith(":")) + 1
            elif k < 0.20 and self.extension and budget - used > 5:
                seq = self.extension_seq()
                out.extend(seq)
                used += len(seq) + 1
            else:
                out.extend(self.simple())
                used += 1
            for p in pending:
                p[1] -= 1
            for p in [p for p in pending if p[1] <= 0]:
                out.append(f"{p[0]}:")
                pending.remove(p)
        out.extend(f"{p[0]}:" for p in pending)
        return out


def random_program(seed, max_instrs: int = 200, extension: bool = True) -> RandomProgram:
    """A random program of at most ``max_instrs`` instructions ending in ebreak."""
    rng = random.Random(seed)
    gen = _Gen(rng, max_instrs, extension)
    body = gen.region(max_instrs - 3 - max_instrs // 10, 0)
    src = "\n".join([f"li x30, {DATA_BASE}", *body, "ebreak"]) + "\n"
    prog = assemble(src)
    if len(prog.words) > max_instrs:
        raise ValueError(f"generated {len(prog.words)} words, limit {max_instrs}")
    preload = bytes(DATA_BASE) + rng.randbytes(DATA_BYTES)
    return RandomProgram(src, prog.words, preload)
