"""Software model of an RV32I core with an AES instruction extension."""

__version__ = "0.1.0"

from aesrv.config import ALL_CONFIGS, AesConfig, Mode

__all__ = ["ALL_CONFIGS", "AesConfig", "Mode", "__version__"]
