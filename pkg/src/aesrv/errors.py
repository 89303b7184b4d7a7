"""Exception types raised by the simulator, assembler and harness."""


class AesRvError(Exception):
    pass


class IllegalInstruction(AesRvError):
    def __init__(self, word, reason="unimplemented opcode/funct combination"):
        self.word = word & 0xFFFFFFFF
        super().__init__(f"illegal instruction 0x{self.word:08x}: {reason}")


class MemoryFault(AesRvError):
    pass


class BufferOverflow(AesRvError):
    pass


class LayoutFault(AesRvError):
    pass


class CycleBudgetExceeded(AesRvError):
    pass


class LengthError(AesRvError, ValueError):
    pass


class InvalidParams(AesRvError, ValueError):
    pass


class CapacityFault(AesRvError):
    pass


class OracleMismatch(AesRvError):
    pass


class AsmError(AesRvError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.message = message


class ParseError(AsmError):
    pass


class UnknownMnemonic(AsmError):
    pass


class RangeError(AsmError):
    pass
