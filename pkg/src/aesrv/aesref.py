"""Reference AES: a deliberately plain cipher plus the four block modes.

This module is the oracle the simulated hardware is checked against, so it
shares nothing with :mod:`aesrv.sau`. The S-box is derived at import time from
the GF(2^8) inverse and affine map rather than copied from a table, and the
state is kept as a 4x4 row-major matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from aesrv.config import AesConfig, Mode
from aesrv.errors import LengthError

BLOCK = 16


def gf_mul(a: int, b: int) -> int:
    """Multiply in GF(2^8) modulo x^8 + x^4 + x^3 + x + 1 (shift-and-add)."""
    p = 0
    while b:
        if b & 1:
            p ^= a
        a <<= 1
        if a & 0x100:
            a ^= 0x11B
        b >>= 1
    return p


def gf_inv(a: int) -> int:
    # a^254 == a^-1 for a != 0; 0 maps to 0
    result = 1
    base = a
    e = 254
    while e:
        if e & 1:
            result = gf_mul(result, base)
        base = gf_mul(base, base)
        e >>= 1
    return result if a else 0


def _affine(b: int) -> int:
    out = 0x63
    for i in range(8):
        bit = (b >> i) ^ (b >> ((i + 4) % 8)) ^ (b >> ((i + 5) % 8)) ^ (b >> ((i + 6) % 8)) ^ (b >> ((i + 7) % 8))
        out ^= (bit & 1) << i
    return out


SBOX = [_affine(gf_inv(x)) for x in range(256)]
MUL2 = [gf_mul(x, 2) for x in range(256)]
MUL3 = [gf_mul(x, 3) for x in range(256)]


def _to_matrix(block: bytes) -> list[list[int]]:
    # state[r][c] = in[r + 4c]
    return [[block[r + 4 * c] for c in range(4)] for r in range(4)]


def _from_matrix(state) -> bytes:
    return bytes(state[r][c] for c in range(4) for r in range(4))


def expand_key(key: bytes) -> list[list[list[int]]]:
    """Return the round keys, each as a 4x4 matrix laid out like the state."""
    nk = len(key) // 4
    if len(key) not in (16, 24, 32):
        raise LengthError(f"key must be 16, 24 or 32 bytes, got {len(key)}")
    nr = nk + 6
    sbox = SBOX
    words = [list(key[4 * i:4 * i + 4]) for i in range(nk)]
    rcon = 1
    for i in range(nk, 4 * (nr + 1)):
        t0, t1, t2, t3 = words[i - 1]
        if i % nk == 0:
            t0, t1, t2, t3 = sbox[t1] ^ rcon, sbox[t2], sbox[t3], sbox[t0]
            rcon = MUL2[rcon]
        elif nk > 6 and i % nk == 4:
            t0, t1, t2, t3 = sbox[t0], sbox[t1], sbox[t2], sbox[t3]
        p0, p1, p2, p3 = words[i - nk]
        words.append([p0 ^ t0, p1 ^ t1, p2 ^ t2, p3 ^ t3])
    # round key rnd, row r = byte r of words 4*rnd .. 4*rnd+3
    return [[list(col) for col in zip(*words[4 * rnd:4 * rnd + 4])] for rnd in range(nr + 1)]


def encrypt_block(block: bytes, round_keys) -> bytes:
    nr = len(round_keys) - 1
    sbox, m2, m3 = SBOX, MUL2, MUL3
    state = [[a ^ b for a, b in zip(row, krow)] for row, krow in zip(_to_matrix(block), round_keys[0])]
    for rnd in range(1, nr + 1):
        # SubBytes then ShiftRows (row r rotates left by r)
        s0, s1, s2, s3 = ([sbox[b] for b in row[r:] + row[:r]] for r, row in enumerate(state))
        if rnd != nr:
            s0, s1, s2, s3 = (
                [m2[s0[c]] ^ m3[s1[c]] ^ s2[c] ^ s3[c] for c in range(4)],
                [s0[c] ^ m2[s1[c]] ^ m3[s2[c]] ^ s3[c] for c in range(4)],
                [s0[c] ^ s1[c] ^ m2[s2[c]] ^ m3[s3[c]] for c in range(4)],
                [m3[s0[c]] ^ s1[c] ^ s2[c] ^ m2[s3[c]] for c in range(4)],
            )
        k0, k1, k2, k3 = round_keys[rnd]
        state = [[a ^ b for a, b in zip(s0, k0)], [a ^ b for a, b in zip(s1, k1)],
                 [a ^ b for a, b in zip(s2, k2)], [a ^ b for a, b in zip(s3, k3)]]
    return _from_matrix(state)


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


@dataclass
class ModeStream:
    """Incremental encryptor: feed whole blocks, one at a time."""

    config: AesConfig
    key: bytes
    iv: bytes = bytes(BLOCK)
    position: int = 0
    _round_keys: list = field(init=False, repr=False)
    _chain: bytes = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.key) != self.config.key_bytes:
            raise LengthError(f"{self.config} needs a {self.config.key_bytes}-byte key")
        if len(self.iv) != BLOCK:
            raise LengthError("IV must be 16 bytes")
        self._round_keys = expand_key(self.key)
        self._chain = bytes(self.iv)

    def process(self, block: bytes) -> bytes:
        if len(block) != BLOCK:
            raise LengthError("blocks are 16 bytes")
        mode = self.config.mode
        if mode is Mode.ECB:
            out = encrypt_block(block, self._round_keys)
        elif mode is Mode.CBC:
            out = encrypt_block(_xor(block, self._chain), self._round_keys)
            self._chain = out
        elif mode is Mode.CTR:
            out = _xor(block, encrypt_block(self._chain, self._round_keys))
            counter = (int.from_bytes(self._chain, "big") + 1) % (1 << 128)
            self._chain = counter.to_bytes(BLOCK, "big")
        else:  # CFB, full 128-bit segments
            out = _xor(block, encrypt_block(self._chain, self._round_keys))
            self._chain = out
        self.position += 1
        return out


def encrypt(config: AesConfig, key: bytes, iv: bytes | None, plaintext: bytes) -> bytes:
    """Encrypt whole blocks of ``plaintext``. ``iv`` is ignored for ECB."""
    if len(plaintext) % BLOCK:
        raise LengthError(f"plaintext length {len(plaintext)} is not a multiple of {BLOCK}")
    stream = ModeStream(config, bytes(key), bytes(iv) if iv is not None else bytes(BLOCK))
    return b"".join(stream.process(plaintext[i:i + BLOCK]) for i in range(0, len(plaintext), BLOCK))


# ---------------------------------------------------------------------------
# known-answer corpus


@dataclass(frozen=True)
class KatVector:
    name: str
    config: AesConfig
    key: bytes
    iv: bytes | None
    plaintext: bytes
    ciphertext: bytes


def parse_kat(text: str) -> list[KatVector]:
    """Parse the vector file format: ``name mode keybits key iv pt ct`` (hex, ``-`` for no IV)."""
    vectors = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 7:
            raise ValueError(f"KAT line {lineno}: expected 7 fields, got {len(fields)}")
        name, mode, bits, key, iv, pt, ct = fields
        vectors.append(KatVector(
            name=name,
            config=AesConfig(Mode(mode.lower()), int(bits)),
            key=bytes.fromhex(key),
            iv=None if iv == "-" else bytes.fromhex(iv),
            plaintext=bytes.fromhex(pt),
            ciphertext=bytes.fromhex(ct),
        ))
    return vectors


def load_kats() -> list[KatVector]:
    text = resources.files("aesrv.data").joinpath("kat_vectors.txt").read_text()
    return parse_kat(text)


@dataclass
class SelfTestReport:
    entries: list = field(default_factory=list)  # (vector name, config name, passed)

    @property
    def passed(self) -> bool:
        return bool(self.entries) and all(ok for _, _, ok in self.entries)

    @property
    def groups(self) -> dict:
        out: dict[str, list] = {}
        for name, combo, ok in self.entries:
            out.setdefault(combo, []).append((name, ok))
        return out

    def failures(self):
        return [(n, c) for n, c, ok in self.entries if not ok]


def self_test(vectors=None) -> SelfTestReport:
    """Run every known-answer vector through :func:`encrypt`."""
    report = SelfTestReport()
    for v in vectors if vectors is not None else load_kats():
        try:
            ok = encrypt(v.config, v.key, v.iv, v.plaintext) == v.ciphertext
        except Exception:
            ok = False
        report.entries.append((v.name, v.config.name, ok))
    return report
