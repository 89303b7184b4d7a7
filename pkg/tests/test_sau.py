import pytest
from hypothesis import given, strategies as st

from aesrv import aesref
from aesrv.config import ALL_CONFIGS, AesConfig, Mode
from aesrv.core import CoreState, MemoryImage
from aesrv.errors import BufferOverflow, LayoutFault, MemoryFault
from aesrv.programs import accelerated_image
from aesrv.sau import (DEFAULT_LAYOUT, SBOX, BufferLayout, add_round_key, aes_exec, buffer_cycle_cost,
                       buffer_load, buffer_store, cipher_block, key_expand, key_words, mix_column,
                       mix_columns, rot_word, sau_cycle_cost, set_params, shift_rows, sub_bytes, sub_word)

PT = bytes.fromhex("00112233445566778899aabbccddeeff")
ECB128 = AesConfig.parse("ecb-128")
ECB192 = AesConfig.parse("ecb-192")
ECB256 = AesConfig.parse("ecb-256")


def gf_mul(a, b):
    # shift-and-add multiply, kept local so the test does not lean on either AES module
    p = 0
    for _ in range(8):
        if b & 1:
            p ^= a
        a = ((a << 1) ^ (0x11B if a & 0x80 else 0)) & 0x1FF
        b >>= 1
    return p & 0xFF


@pytest.mark.parametrize("cfg,key,ct", [
    (ECB128, bytes(range(16)), "69c4e0d86a7b0430d8cdb78070b4c55a"),
    (ECB192, bytes(range(24)), "dda97ca4864cdfe06eaf70a0ec0d7191"),
    (ECB256, bytes(range(32)), "8ea2b7ca516745bfeafc49904b496089"),
])
def test_fips197_appendix_c(cfg, key, ct):
    assert cipher_block(PT, key_expand(key, cfg), cfg).hex() == ct


def test_key_schedule_w4():
    key = bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c")
    assert key_words(key, ECB128)[4] == 0xA0FAFE17


def test_zero_key_w4_to_w8():
    assert key_words(bytes(16), ECB128)[4:8] == [0x62636363] * 4


@pytest.mark.parametrize("bits,n", [(128, 11), (192, 13), (256, 15)])
def test_schedule_lengths(bits, n):
    cfg = AesConfig(Mode.ECB, bits)
    sched = key_expand(bytes(bits // 8), cfg)
    assert len(sched) == n and all(len(rk) == 16 for rk in sched)


def test_sbox_known_values_and_bijective():
    assert SBOX[0x00] == 0x63 and SBOX[0x53] == 0xED and SBOX[0xFF] == 0x16
    assert sorted(SBOX) == list(range(256))
    assert bytes(aesref.SBOX) == SBOX


def test_word_helpers():
    assert rot_word(0x09CF4F3C) == 0xCF4F3C09
    assert sub_word(0xCF4F3C09) == 0x8A84EB01


def test_mix_column_example():
    assert mix_column(bytes([0xDB, 0x13, 0x53, 0x45])) == bytes([0x8E, 0x4D, 0xA1, 0xBC])


@given(st.binary(min_size=4, max_size=4))
def test_mix_column_matches_matrix_product(col):
    m = [[2, 3, 1, 1], [1, 2, 3, 1], [1, 1, 2, 3], [3, 1, 1, 2]]
    want = bytes(gf_mul(m[r][0], col[0]) ^ gf_mul(m[r][1], col[1]) ^ gf_mul(m[r][2], col[2])
                 ^ gf_mul(m[r][3], col[3]) for r in range(4))
    assert mix_column(col) == want


@given(st.binary(min_size=16, max_size=16), st.binary(min_size=16, max_size=16))
def test_mix_columns_is_linear(a, b):
    x = bytes(p ^ q for p, q in zip(a, b))
    lhs = mix_columns(x)
    rhs = bytes(p ^ q for p, q in zip(mix_columns(a), mix_columns(b)))
    assert lhs == rhs


def test_shift_rows_moves_rows_left():
    state = bytes(range(16))  # column-major: byte r + 4c
    out = shift_rows(state)
    for r in range(4):
        for c in range(4):
            assert out[r + 4 * c] == state[r + 4 * ((c + r) % 4)]


@given(st.binary(min_size=16, max_size=16))
def test_round_pieces(state):
    assert add_round_key(state, bytes(16)) == state
    assert sub_bytes(state) == bytes(SBOX[b] for b in state)


def core_with_dm(dm_size=4096):
    return CoreState(mem=MemoryImage(im_size=4096, dm_size=dm_size))


def test_buffer_load_example():
    c = core_with_dm()
    words = [0x11111111, 0x22222222, 0x33333333, 0x44444444]
    for i, w in enumerate(words):
        c.mem.store(0x100 + 4 * i, 4, w)
    set_params(c, 0x100, 4)
    assert buffer_load(c) == buffer_cycle_cost(4) == 5
    assert c.buffer.words[:4] == words


def test_empty_transfer():
    c = core_with_dm()
    c.buffer.words[0] = 7
    set_params(c, 0, 0)
    assert buffer_load(c) == 1
    assert c.buffer.words[0] == 7


def test_buffer_overflow():
    c = core_with_dm()
    set_params(c, 0, 257)
    with pytest.raises(BufferOverflow):
        buffer_load(c)
    set_params(c, 0, 4, offset=254)
    with pytest.raises(BufferOverflow):
        buffer_store(c)


def test_full_store_and_range_fault():
    c = core_with_dm()
    c.buffer.words = list(range(256))
    set_params(c, 0, 256)
    buffer_store(c)
    assert [c.mem.load(4 * i, 4, False) for i in range(256)] == list(range(256))
    set_params(c, len(c.mem.dm) - 8, 4)
    with pytest.raises(MemoryFault):
        buffer_load(c)


@given(st.binary(min_size=64, max_size=64), st.integers(0, 240))
def test_store_then_load_roundtrip(data, start):
    c = core_with_dm()
    c.buffer.write_bytes(start, data)
    set_params(c, 0x200, 16, start)
    buffer_store(c)
    assert bytes(c.mem.dm[0x200:0x240]) == data
    c.buffer.words = [0] * 256
    buffer_load(c)
    assert c.buffer.read_bytes(start, start + 16) == data


def test_layout_capacity():
    assert DEFAULT_LAYOUT.max_blocks == 30
    with pytest.raises(ValueError):
        BufferLayout(key=(0, 10))


def exec_on(cfg, key, iv, pt):
    c = core_with_dm()
    c.buffer.write_bytes(0, accelerated_image(cfg, key, iv, pt))
    cost = aes_exec(c, cfg, len(pt) // 4)
    lay = DEFAULT_LAYOUT
    return c.buffer.read_bytes(lay.ciphertext[0], lay.ciphertext[0] + len(pt) // 4), cost


def test_cbc_with_zero_iv_equals_ecb():
    key = bytes(range(16))
    cbc, _ = exec_on(AesConfig.parse("cbc-128"), key, bytes(16), PT)
    ecb, _ = exec_on(ECB128, key, bytes(16), PT)
    assert cbc == ecb


def test_ctr_zero_plaintext_is_keystream():
    key, iv = bytes(range(16)), bytes(range(16, 32))
    ct, _ = exec_on(AesConfig.parse("ctr-128"), key, iv, bytes(16))
    assert ct == cipher_block(iv, key_expand(key, ECB128), ECB128)


def test_cbc_sp800_38a_f21():
    key = bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c")
    iv = bytes(range(16))
    pt = bytes.fromhex(
        "6bc1bee22e409f96e93d7e117393172aae2d8a571e03ac9c9eb76fac45af8e51"
        "30c81c46a35ce411e5fbc1191a0a52eff69f2445df4f9b17ad2b417be66c3710")
    ct, _ = exec_on(AesConfig.parse("cbc-128"), key, iv, pt)
    assert ct.hex() == ("7649abac8119b246cee98e9b12e9197d5086cb9b507219ee95db113a917678b2"
                        "73bed6b8e3c1743b7116e69e222295163ff1caa1681fac09120eca307586e1a7")


@given(st.sampled_from([c for c in ALL_CONFIGS if c.mode is Mode.CTR]),
       st.binary(min_size=32, max_size=32), st.binary(min_size=16, max_size=16),
       st.binary(min_size=16, max_size=64).map(lambda b: b[: len(b) - len(b) % 16]))
def test_ctr_applied_twice_is_identity(cfg, key, iv, pt):
    key = key[: cfg.key_bytes]
    ct, _ = exec_on(cfg, key, iv, pt)
    back, _ = exec_on(cfg, key, iv, ct)
    assert back == pt


@given(st.sampled_from([c for c in ALL_CONFIGS if c.mode is Mode.ECB]), st.binary(min_size=32, max_size=32),
       st.binary(min_size=16, max_size=16), st.binary(min_size=16, max_size=16))
def test_ecb_is_injective(cfg, key, a, b):
    sched = key_expand(key[: cfg.key_bytes], cfg)
    assert (cipher_block(a, sched, cfg) == cipher_block(b, sched, cfg)) == (a == b)


@pytest.mark.parametrize("n", [0, 3, 124])
def test_aes_exec_layout_fault(n):
    with pytest.raises(LayoutFault):
        aes_exec(core_with_dm(), ECB128, n)


def test_cost_formula():
    assert sau_cycle_cost(ECB128, 1) == 11 + 10 * 4
    assert sau_cycle_cost(ECB128, 4) == 11 + 40 + 3 * 4
    assert sau_cycle_cost(AesConfig.parse("cbc-128"), 4) == 11 + 4 * 40
    assert sau_cycle_cost(AesConfig.parse("cfb-256"), 2) == 15 + 2 * 56


@pytest.mark.parametrize("bits", [128, 192, 256])
def test_chained_modes_never_cheaper(bits):
    for n in range(1, 31):
        stream = sau_cycle_cost(AesConfig(Mode.ECB, bits), n)
        assert sau_cycle_cost(AesConfig(Mode.CTR, bits), n) == stream
        assert sau_cycle_cost(AesConfig(Mode.CBC, bits), n) >= stream
        assert sau_cycle_cost(AesConfig(Mode.CFB, bits), n) >= stream


def test_exec_cost_reported_and_accumulated():
    _, cost = exec_on(ECB128, bytes(16), bytes(16), bytes(64))
    assert cost == sau_cycle_cost(ECB128, 4)
