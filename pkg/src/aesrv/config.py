"""AES mode / key-size selector shared by every module."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Mode(enum.Enum):
    ECB = "ecb"
    CBC = "cbc"
    CTR = "ctr"
    CFB = "cfb"

    @property
    def chained(self) -> bool:
        """Chained modes feed each ciphertext into the next block's cipher input."""
        return self in (Mode.CBC, Mode.CFB)

    @property
    def uses_iv(self) -> bool:
        return self is not Mode.ECB


KEY_SIZES = (128, 192, 256)
_ROUNDS = {128: 10, 192: 12, 256: 14}


@dataclass(frozen=True)
class AesConfig:
    mode: Mode
    key_bits: int

    def __post_init__(self):
        if not isinstance(self.mode, Mode):
            object.__setattr__(self, "mode", Mode(str(self.mode).lower()))
        if self.key_bits not in _ROUNDS:
            raise ValueError(f"unsupported key size {self.key_bits}")

    @property
    def rounds(self) -> int:
        return _ROUNDS[self.key_bits]

    @property
    def nk(self) -> int:
        """Key length in 32-bit words."""
        return self.key_bits // 32

    @property
    def key_bytes(self) -> int:
        return self.key_bits // 8

    @property
    def name(self) -> str:
        return f"{self.mode.name}-{self.key_bits}"

    @classmethod
    def parse(cls, text: str) -> "AesConfig":
        """Parse ``"cbc-192"`` / ``"CBC192"`` / ``"aes192.cbc"`` style names."""
        t = text.strip().lower().replace("aes", "").replace("_", "-").replace(".", "-")
        parts = [p for p in t.split("-") if p]
        if len(parts) == 1:
            p = parts[0]
            parts = [p[:3], p[3:]] if p[:3].isalpha() else [p[3:], p[:3]]
        a, b = parts
        if a.isdigit():
            a, b = b, a
        return cls(Mode(a), int(b))

    def __str__(self):
        return self.name


ALL_CONFIGS = tuple(AesConfig(m, k) for m in Mode for k in KEY_SIZES)
