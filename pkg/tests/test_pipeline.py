import pytest

from aesrv.asm import assemble
from aesrv.core import CoreState, run_functional
from aesrv.errors import CycleBudgetExceeded, MemoryFault
from aesrv.pipeline import run
from aesrv.randprog import DM_SIZE, IM_SIZE, random_program
from aesrv.sau import buffer_cycle_cost, sau_cycle_cost
from aesrv.config import AesConfig


def cycles(src, dm=b""):
    s = CoreState.with_program(assemble(src).words, dm)
    return run(s), s


def test_lone_ebreak_fills_in_five():
    rep, _ = cycles("ebreak")
    assert rep.cycles == 5 and rep.retired == 1


def test_one_addi_then_halt():
    rep, s = cycles("addi x1, x0, 1\nebreak")
    assert rep.cycles == 6 and s.regs[1] == 1


def test_ten_independent_alu_ops():
    src = "\n".join(f"addi x{i}, x0, {i}" for i in range(1, 11)) + "\nebreak"
    rep, _ = cycles(src)
    assert rep.retired == 11
    assert rep.cycles == rep.retired + 4


def test_dependent_alu_chain_is_fully_forwarded():
    src = "addi x1, x0, 1\n" + "add x1, x1, x1\n" * 6 + "ebreak"
    rep, s = cycles(src)
    assert s.regs[1] == 64 and rep.cycles == rep.retired + 4


def test_load_use_inserts_exactly_one_bubble():
    base, _ = cycles("lw x1, 0(x0)\nnop\nadd x2, x1, x1\nebreak")
    rep, s = cycles("lw x1, 0(x0)\nadd x2, x1, x1\nnop\nebreak", b"\x05\0\0\0")
    assert rep.load_use_stalls == 1 and base.load_use_stalls == 0
    assert rep.cycles == base.cycles + 1
    assert s.regs[2] == 10


def test_store_after_load_forwards_data():
    rep, s = cycles("lw x1, 0(x0)\nsw x1, 8(x0)\nebreak", b"\x2a\0\0\0")
    assert s.mem.load(8, 4, False) == 42 and rep.load_use_stalls == 1


def test_taken_branch_flushes_two():
    nt, _ = cycles("beq x0, x1, t\nnop\nnop\nt: ebreak".replace("x1", "x0").replace("beq", "bne"))
    tk, _ = cycles("beq x0, x0, t\nnop\nnop\nt: ebreak")
    assert tk.flushed == 2 and nt.flushed == 0
    # taken path retires 2 fewer instructions, but pays the same 2 cycles back
    assert tk.retired == nt.retired - 2
    assert tk.cycles == nt.cycles


def test_jal_flushes_two():
    rep, s = cycles("jal x1, t\naddi x5, x0, 1\naddi x5, x0, 2\nt: ebreak")
    assert rep.flushed == 2 and s.regs[5] == 0 and s.regs[1] == 4


def test_budget_exceeded_on_infinite_loop():
    s = CoreState.with_program(assemble("loop: j loop").words)
    with pytest.raises(CycleBudgetExceeded):
        run(s, max_cycles=10)


def test_fault_surfaces():
    s = CoreState.with_program(assemble("lw x1, 1(x0)\nebreak").words)
    with pytest.raises(MemoryFault):
        run(s)


def test_wrong_path_fault_is_squashed():
    # the misaligned load sits in the shadow of a taken branch
    rep, s = cycles("beq x0, x0, t\nlw x1, 1(x0)\nt: ebreak")
    assert rep.flushed >= 1 and s.halted


def test_extension_instruction_holds_exe_for_its_cost():
    cfg = AesConfig.parse("ecb-128")
    src = "li x8, 0\nli x20, 16\nbuf.cfg 0\nbuf.ld\nli x20, 4\naes128.ecb\nebreak"
    rep, _ = cycles(src)
    retired = 7
    extra = (buffer_cycle_cost(16) - 1) + (sau_cycle_cost(cfg, 1) - 1)
    assert sau_cycle_cost(cfg, 1) == 51
    assert rep.retired == retired
    assert rep.ext_stall_cycles == extra
    assert rep.cycles == retired + 4 + extra


def test_cpi_and_digest():
    rep, s = cycles("addi x1, x0, 1\nsw x1, 0(x0)\nebreak")
    assert rep.cpi == pytest.approx(rep.cycles / rep.retired)
    assert rep.dm_digest == s.dm_digest()


@pytest.mark.parametrize("seed", range(40))
def test_random_programs_match_iss(seed):
    p = random_program(seed)
    a = CoreState.with_program(p.words, p.dm_preload, im_size=IM_SIZE, dm_size=DM_SIZE)
    b = a.copy()
    run_functional(a, 100_000)
    rep = run(b, 1_000_000)
    assert a.architectural() == b.architectural()
    assert rep.retired == a.retired


def test_cycle_model_is_deterministic():
    p = random_program(1234)
    reps = []
    for _ in range(2):
        s = CoreState.with_program(p.words, p.dm_preload, im_size=IM_SIZE, dm_size=DM_SIZE)
        reps.append(run(s))
    assert reps[0] == reps[1]
