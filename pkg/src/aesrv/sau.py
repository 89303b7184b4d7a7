"""Specialized AES Unit (SAU) and the 256-word high-bandwidth buffer set.

The buffer set sits between data memory and the SAU. Two buffer-access
instructions move words between them: ``buf.cfg`` latches the transfer
parameters (DM address from x8, word count from x20, buffer start index from
its immediate) and ``buf.ld`` / ``buf.st`` start the transfer. An
``aesNNN.mode`` instruction then runs key expansion and the cipher over the
plaintext region and fills the ciphertext region.

Buffer words hold data-memory words verbatim, so byte ``i`` of the buffer
(little-endian within each word) is byte ``i`` of the DM image it came from.

The round datapath here is the hardware-style one (fixed S-box ROM, xtime
table, flat column-major byte state). The independent oracle lives in
:mod:`aesrv.aesref`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from aesrv.config import AesConfig, Mode
from aesrv.errors import BufferOverflow, LayoutFault, MemoryFault

BUFFER_WORDS = 256

# fmt: off
SBOX = bytes.fromhex(
    "637c777bf26b6fc53001672bfed7ab76" "ca82c97dfa5947f0add4a2af9ca472c0"
    "b7fd9326363ff7cc34a5e5f171d83115" "04c723c31896059a071280e2eb27b275"
    "09832c1a1b6e5aa0523bd6b329e32f84" "53d100ed20fcb15b6acbbe394a4c58cf"
    "d0efaafb434d338545f9027f503c9fa8" "51a3408f929d38f5bcb6da2110fff3d2"
    "cd0c13ec5f974417c4a77e3d645d1973" "60814fdc222a908846eeb814de5e0bdb"
    "e0323a0a4906245cc2d3ac629195e479" "e7c8376d8dd54ea96c56f4ea657aae08"
    "ba78252e1ca6b4c6e8dd741f4bbd8b8a" "703eb5664803f60e613557b986c11d9e"
    "e1f8981169d98e949b1e87e9ce5528df" "8ca1890dbfe6426841992d0fb054bb16"
)
# fmt: on
RCON = (0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36)
XTIME = bytes(((b << 1) ^ (0x1B if b & 0x80 else 0)) & 0xFF for b in range(256))

# state byte index r + 4c; after ShiftRows row r is rotated left by r
_SHIFT = tuple((r + 4 * ((c + r) % 4)) for c in range(4) for r in range(4))
_SHIFT_ORDER = sorted(range(16), key=lambda i: (i // 4, i % 4))
SHIFT_ROWS_SRC = tuple(_SHIFT[i] for i in _SHIFT_ORDER)


# --------------------------------------------------------------------------
# round transforms (one per cipher pipeline stage)


def sub_bytes(state: bytes) -> bytes:
    return bytes(SBOX[b] for b in state)


def shift_rows(state: bytes) -> bytes:
    return bytes(state[i] for i in SHIFT_ROWS_SRC)


def mix_column(col) -> bytes:
    a0, a1, a2, a3 = col
    t = a0 ^ a1 ^ a2 ^ a3
    return bytes((
        a0 ^ t ^ XTIME[a0 ^ a1],
        a1 ^ t ^ XTIME[a1 ^ a2],
        a2 ^ t ^ XTIME[a2 ^ a3],
        a3 ^ t ^ XTIME[a3 ^ a0],
    ))


def mix_columns(state: bytes) -> bytes:
    return b"".join(mix_column(state[c:c + 4]) for c in range(0, 16, 4))


def add_round_key(state: bytes, round_key: bytes) -> bytes:
    return bytes(a ^ b for a, b in zip(state, round_key))


# --------------------------------------------------------------------------
# key expansion


def sub_word(w: int) -> int:
    return (SBOX[w >> 24] << 24) | (SBOX[(w >> 16) & 0xFF] << 16) | (SBOX[(w >> 8) & 0xFF] << 8) | SBOX[w & 0xFF]


def rot_word(w: int) -> int:
    return ((w << 8) | (w >> 24)) & 0xFFFFFFFF


def key_words(key: bytes, config: AesConfig) -> list[int]:
    """Expanded key as 4*(rounds+1) big-endian words w[0..]."""
    nk = config.nk
    if len(key) != 4 * nk:
        raise ValueError(f"{config} expects a {4 * nk}-byte key, got {len(key)}")
    w = [int.from_bytes(key[4 * i:4 * i + 4], "big") for i in range(nk)]
    for i in range(nk, 4 * (config.rounds + 1)):
        temp = w[i - 1]
        if i % nk == 0:
            temp = sub_word(rot_word(temp)) ^ (RCON[i // nk - 1] << 24)
        elif nk > 6 and i % nk == 4:
            temp = sub_word(temp)
        w.append(w[i - nk] ^ temp)
    return w


def key_expand(key: bytes, config: AesConfig) -> list[bytes]:
    """Round key schedule: ``rounds + 1`` 16-byte round keys."""
    w = key_words(key, config)
    return [b"".join(x.to_bytes(4, "big") for x in w[4 * r:4 * r + 4]) for r in range(config.rounds + 1)]


def cipher_block(block: bytes, schedule: list[bytes], config: AesConfig) -> bytes:
    if len(schedule) != config.rounds + 1:
        raise ValueError("incomplete round key schedule")
    sbox, xt, src = SBOX, XTIME, SHIFT_ROWS_SRC
    s = [a ^ b for a, b in zip(block, schedule[0])]
    for rnd in range(1, config.rounds + 1):
        s = [sbox[s[i]] for i in src]  # SubBytes and ShiftRows commute
        if rnd != config.rounds:
            m = []
            for c in range(0, 16, 4):
                a0, a1, a2, a3 = s[c], s[c + 1], s[c + 2], s[c + 3]
                t = a0 ^ a1 ^ a2 ^ a3
                m += (a0 ^ t ^ xt[a0 ^ a1], a1 ^ t ^ xt[a1 ^ a2], a2 ^ t ^ xt[a2 ^ a3], a3 ^ t ^ xt[a3 ^ a0])
            s = m
        rk = schedule[rnd]
        s = [a ^ b for a, b in zip(s, rk)]
    return bytes(s)


# --------------------------------------------------------------------------
# buffer set and unit state


@dataclass(frozen=True)
class BufferLayout:
    """Word ranges ``[start, end)`` of each buffer region."""

    key: tuple = (0, 8)
    iv: tuple = (8, 12)
    plaintext: tuple = (12, 134)
    ciphertext: tuple = (134, 256)

    def __post_init__(self):
        regions = sorted((self.key, self.iv, self.plaintext, self.ciphertext))
        for (s, e) in regions:
            if not 0 <= s <= e <= BUFFER_WORDS:
                raise ValueError(f"region {(s, e)} outside the buffer")
        for (_, e0), (s1, _) in zip(regions, regions[1:]):
            if s1 < e0:
                raise ValueError("buffer regions overlap")

    @property
    def max_blocks(self) -> int:
        pt = (self.plaintext[1] - self.plaintext[0]) // 4
        ct = (self.ciphertext[1] - self.ciphertext[0]) // 4
        return min(pt, ct)


DEFAULT_LAYOUT = BufferLayout()


@dataclass(frozen=True)
class SauTiming:
    """Latency constants for the buffer transfers and the AES core."""

    round_keys_per_cycle: int = 1
    stages: int = 4
    initiation_interval: int = 4
    handshake: int = 0
    buffer_setup: int = 1
    buffer_words_per_cycle: int = 1


DEFAULT_TIMING = SauTiming()


@dataclass
class BufferSet:
    words: list = field(default_factory=lambda: [0] * BUFFER_WORDS)
    layout: BufferLayout = DEFAULT_LAYOUT
    # latched by buf.cfg: (dm address, word count, buffer start index)
    params: tuple = (0, 0, 0)

    def read_bytes(self, start: int, end: int) -> bytes:
        return b"".join(w.to_bytes(4, "little") for w in self.words[start:end])

    def write_bytes(self, start: int, data: bytes):
        n = len(data) // 4
        if start + n > BUFFER_WORDS:
            raise BufferOverflow(f"buffer write [{start}, {start + n}) exceeds {BUFFER_WORDS} words")
        self.words[start:start + n] = [int.from_bytes(data[4 * i:4 * i + 4], "little") for i in range(n)]

    def copy(self) -> "BufferSet":
        return BufferSet(list(self.words), self.layout, self.params)


@dataclass
class SauState:
    round_keys: list = field(default_factory=list)
    iv_or_counter: bytes = bytes(16)
    busy: bool = False
    config: AesConfig | None = None
    cycle_cost: int = 0
    timing: SauTiming = DEFAULT_TIMING

    def copy(self) -> "SauState":
        return SauState(list(self.round_keys), self.iv_or_counter, self.busy, self.config, self.cycle_cost, self.timing)


def sau_cycle_cost(config: AesConfig, n_blocks: int, timing: SauTiming = DEFAULT_TIMING) -> int:
    """Cycles the blocking AES instruction occupies in EXE.

    key expansion (one round key per cycle) + per-block latency of
    ``rounds`` passes through the 4-stage round pipeline. ECB/CTR blocks are
    independent and enter every ``initiation_interval`` cycles; CBC/CFB
    blocks wait for the previous ciphertext.
    """
    if n_blocks < 1:
        raise ValueError("n_blocks must be >= 1")
    kexp = math.ceil((config.rounds + 1) / timing.round_keys_per_cycle)
    per_block = config.rounds * timing.stages
    if config.mode.chained:
        body = n_blocks * per_block
    else:
        body = per_block + (n_blocks - 1) * timing.initiation_interval
    return timing.handshake + kexp + body


def buffer_cycle_cost(n_words: int, timing: SauTiming = DEFAULT_TIMING) -> int:
    return timing.buffer_setup + math.ceil(n_words / timing.buffer_words_per_cycle)


# --------------------------------------------------------------------------
# extension instruction semantics; ``core`` is an aesrv.core.CoreState


def set_params(core, addr: int, count: int, offset: int = 0) -> int:
    """``buf.cfg``: latch DM address, word count and buffer start index."""
    core.buffer.params = (addr & 0xFFFFFFFF, count & 0xFFFFFFFF, offset)
    return 1


def _check_transfer(core):
    addr, count, offset = core.buffer.params
    if count > BUFFER_WORDS or offset + count > BUFFER_WORDS:
        raise BufferOverflow(f"transfer of {count} words at buffer index {offset} exceeds {BUFFER_WORDS} words")
    if addr % 4:
        raise MemoryFault(f"unaligned buffer transfer address 0x{addr:x}")
    if addr + 4 * count > len(core.mem.dm):
        raise MemoryFault(f"buffer transfer [0x{addr:x}, 0x{addr + 4 * count:x}) outside data memory")
    return addr, count, offset


def buffer_load(core) -> int:
    """``buf.ld``: buffer[offset .. offset+count) <- DM[addr .. addr+4*count)."""
    addr, count, offset = _check_transfer(core)
    if count:
        core.buffer.write_bytes(offset, bytes(core.mem.dm[addr:addr + 4 * count]))
    return buffer_cycle_cost(count, core.sau.timing)


def buffer_store(core) -> int:
    """``buf.st``: DM[addr .. addr+4*count) <- buffer[offset .. offset+count)."""
    addr, count, offset = _check_transfer(core)
    if count:
        core.mem.dm[addr:addr + 4 * count] = core.buffer.read_bytes(offset, offset + count)
    return buffer_cycle_cost(count, core.sau.timing)


def run_mode(config: AesConfig, schedule: list[bytes], iv: bytes, plaintext: bytes) -> tuple[bytes, bytes]:
    """Encrypt whole blocks; returns (ciphertext, next chaining value)."""
    out = []
    chain = iv
    mode = config.mode
    for i in range(0, len(plaintext), 16):
        p = plaintext[i:i + 16]
        if mode is Mode.ECB:
            out.append(cipher_block(p, schedule, config))
        elif mode is Mode.CBC:
            chain = cipher_block(bytes(a ^ b for a, b in zip(p, chain)), schedule, config)
            out.append(chain)
        elif mode is Mode.CTR:
            ks = cipher_block(chain, schedule, config)
            out.append(bytes(a ^ b for a, b in zip(p, ks)))
            chain = ((int.from_bytes(chain, "big") + 1) & ((1 << 128) - 1)).to_bytes(16, "big")
        else:
            ks = cipher_block(chain, schedule, config)
            chain = bytes(a ^ b for a, b in zip(p, ks))
            out.append(chain)
    return b"".join(out), chain


def aes_exec(core, config: AesConfig, n_words: int | None = None) -> int:
    """``aesNNN.mode``: encrypt ``n_words`` (x20) plaintext words from the buffer.

    Returns the SAU cycle cost. ``n_words`` must be a positive multiple of 4
    that fits the plaintext and ciphertext regions.
    """
    if n_words is None:
        n_words = core.regs[20]
    buf = core.buffer
    lay = buf.layout
    if n_words == 0 or n_words % 4 or n_words // 4 > lay.max_blocks:
        raise LayoutFault(f"{n_words} plaintext words do not form 1..{lay.max_blocks} whole blocks")
    sau = core.sau
    sau.busy = True
    sau.config = config
    key = buf.read_bytes(lay.key[0], lay.key[0] + config.nk)
    iv = buf.read_bytes(lay.iv[0], lay.iv[0] + 4)
    pt = buf.read_bytes(lay.plaintext[0], lay.plaintext[0] + n_words)
    sau.round_keys = key_expand(key, config)
    ct, sau.iv_or_counter = run_mode(config, sau.round_keys, iv, pt)
    buf.write_bytes(lay.ciphertext[0], ct)
    cost = sau_cycle_cost(config, n_words // 4, sau.timing)
    sau.cycle_cost += cost
    sau.busy = False
    return cost
