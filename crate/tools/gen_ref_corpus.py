#!/usr/bin/env python3
"""Generates the frozen reference corpus used by the simulator cross-check.

Self-contained RISC-V interpreter and assembler: builds small RV32/RV64
IM+Zicsr programs, runs them to their terminal self-jump, and writes the
final register dumps to crates/core/tests/fixtures/ref_corpus.json.

The JSON is committed; tests consume it as-is. Rerun this script only to
extend the corpus.
"""

import json
import random
from pathlib import Path

MEM_BASE = 0x8000_0000
MEM_SIZE = 64 * 1024
DATA_BASE = MEM_BASE + 0x8000  # scratch area for load/store programs
SEED = 20260814
STEP_LIMIT = 100_000

# --- encoding ---------------------------------------------------------------


def r_type(funct7, rs2, rs1, funct3, rd, opcode):
    return funct7 << 25 | rs2 << 20 | rs1 << 15 | funct3 << 12 | rd << 7 | opcode


def i_type(imm, rs1, funct3, rd, opcode):
    return (imm & 0xFFF) << 20 | rs1 << 15 | funct3 << 12 | rd << 7 | opcode


def s_type(imm, rs2, rs1, funct3):
    imm &= 0xFFF
    return (imm >> 5) << 25 | rs2 << 20 | rs1 << 15 | funct3 << 12 | (imm & 0x1F) << 7 | 0x23


def b_type(imm, rs2, rs1, funct3):
    imm &= 0x1FFF
    return (
        (imm >> 12 & 1) << 31
        | (imm >> 5 & 0x3F) << 25
        | rs2 << 20
        | rs1 << 15
        | funct3 << 12
        | (imm >> 1 & 0xF) << 8
        | (imm >> 11 & 1) << 7
        | 0x63
    )


def u_type(imm, rd, opcode):
    return (imm & 0xFFFFF000) | rd << 7 | opcode


def j_type(imm, rd):
    imm &= 0x1FFFFF
    return (
        (imm >> 20 & 1) << 31
        | (imm >> 1 & 0x3FF) << 21
        | (imm >> 11 & 1) << 20
        | (imm >> 12 & 0xFF) << 12
        | rd << 7
        | 0x6F
    )


R_OPS = {
    "add": (0x00, 0), "sub": (0x20, 0), "sll": (0x00, 1), "slt": (0x00, 2),
    "sltu": (0x00, 3), "xor": (0x00, 4), "srl": (0x00, 5), "sra": (0x20, 5),
    "or": (0x00, 6), "and": (0x00, 7),
    "mul": (0x01, 0), "mulh": (0x01, 1), "mulhsu": (0x01, 2), "mulhu": (0x01, 3),
    "div": (0x01, 4), "divu": (0x01, 5), "rem": (0x01, 6), "remu": (0x01, 7),
}
RW_OPS = {
    "addw": (0x00, 0), "subw": (0x20, 0), "sllw": (0x00, 1), "srlw": (0x00, 5),
    "sraw": (0x20, 5),
    "mulw": (0x01, 0), "divw": (0x01, 4), "divuw": (0x01, 5), "remw": (0x01, 6),
    "remuw": (0x01, 7),
}
I_OPS = {"addi": 0, "slti": 2, "sltiu": 3, "xori": 4, "ori": 6, "andi": 7}
LOADS = {"lb": 0, "lh": 1, "lw": 2, "ld": 3, "lbu": 4, "lhu": 5, "lwu": 6}
STORES = {"sb": 0, "sh": 1, "sw": 2, "sd": 3}
CSR_OPS = {"csrrw": 1, "csrrs": 2, "csrrc": 3, "csrrwi": 5, "csrrsi": 6, "csrrci": 7}
CSRS = [0x300, 0x305, 0x340, 0x341, 0x342, 0x343]


def enc(op, *a):
    if op in R_OPS:
        f7, f3 = R_OPS[op]
        return r_type(f7, a[2], a[1], f3, a[0], 0x33)
    if op in RW_OPS:
        f7, f3 = RW_OPS[op]
        return r_type(f7, a[2], a[1], f3, a[0], 0x3B)
    if op in I_OPS:
        return i_type(a[2], a[1], I_OPS[op], a[0], 0x13)
    if op in ("slli", "srli", "srai"):
        base = {"slli": 1, "srli": 5, "srai": 5}[op]
        top = 0x10 if op == "srai" else 0
        return i_type(top << 6 | a[2], a[1], base, a[0], 0x13)
    if op in ("slliw", "srliw", "sraiw"):
        base = {"slliw": 1, "srliw": 5, "sraiw": 5}[op]
        top = 0x20 if op == "sraiw" else 0
        return i_type(top << 5 | a[2], a[1], base, a[0], 0x1B)
    if op in LOADS:
        return i_type(a[2], a[1], LOADS[op], a[0], 0x03)
    if op in STORES:
        return s_type(a[2], a[0], a[1], STORES[op])  # sb rs2, imm(rs1)
    if op in ("beq", "bne", "blt", "bge", "bltu", "bgeu"):
        f3 = {"beq": 0, "bne": 1, "blt": 4, "bge": 5, "bltu": 6, "bgeu": 7}[op]
        return b_type(a[2], a[1], a[0], f3)
    if op == "lui":
        return u_type(a[1], a[0], 0x37)
    if op == "auipc":
        return u_type(a[1], a[0], 0x17)
    if op == "jal":
        return j_type(a[1], a[0])
    if op == "jalr":
        return i_type(a[2], a[1], 0, a[0], 0x67)
    if op in CSR_OPS:
        # csrrw rd, csr, rs1/zimm
        return i_type(a[1], a[2], CSR_OPS[op], a[0], 0x73)
    raise ValueError(op)


# --- interpretation ---------------------------------------------------------


def sext(v, bits):
    v &= (1 << bits) - 1
    return v - (1 << bits) if v >= 1 << (bits - 1) else v


def sdiv(a, b, bits):
    mask = (1 << bits) - 1
    if b == 0:
        return mask
    if a == -(1 << (bits - 1)) and b == -1:
        return a & mask
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return q & mask


def srem(a, b, bits):
    mask = (1 << bits) - 1
    if b == 0:
        return a & mask
    if a == -(1 << (bits - 1)) and b == -1:
        return 0
    r = abs(a) % abs(b)
    if a < 0:
        r = -r
    return r & mask


CSR_WRITE_MASKS = {0x300: 0x1888}  # mstatus keeps MIE, MPIE, MPP only


class Cpu:
    def __init__(self, xlen, words, init_regs):
        self.xlen = xlen
        self.mask = (1 << xlen) - 1
        self.regs = [v & self.mask for v in init_regs]
        self.regs[0] = 0
        self.pc = MEM_BASE
        self.mem = bytearray(MEM_SIZE)
        for i, w in enumerate(words):
            self.mem[4 * i : 4 * i + 4] = w.to_bytes(4, "little")
        self.csr = {}

    def wr(self, rd, v):
        if rd:
            self.regs[rd] = v & self.mask

    def s(self, r):
        return sext(self.regs[r], self.xlen)

    def load(self, addr, size):
        off = addr - MEM_BASE
        assert 0 <= off and off + size <= MEM_SIZE, hex(addr)
        return int.from_bytes(self.mem[off : off + size], "little")

    def store(self, addr, size, v):
        off = addr - MEM_BASE
        assert 0 <= off and off + size <= MEM_SIZE, hex(addr)
        self.mem[off : off + size] = (v & (1 << 8 * size) - 1).to_bytes(size, "little")

    def csr_read(self, a):
        return self.csr.get(a, 0)

    def csr_write(self, a, v):
        v &= self.mask
        if a in CSR_WRITE_MASKS:
            v &= CSR_WRITE_MASKS[a]
        elif a == 0x305:  # mtvec, direct mode: low bits always zero
            v &= ~3
        self.csr[a] = v

    def step(self):
        """Executes one instruction; returns False on a jump-to-self."""
        pc = self.pc
        w = self.load(pc, 4)
        opcode = w & 0x7F
        rd = w >> 7 & 0x1F
        f3 = w >> 12 & 7
        rs1 = w >> 15 & 0x1F
        rs2 = w >> 20 & 0x1F
        f7 = w >> 25
        iimm = sext(w >> 20, 12)
        a, b = self.regs[rs1], self.regs[rs2]
        sa, sb = self.s(rs1), self.s(rs2)
        next_pc = (pc + 4) & self.mask

        if opcode == 0x37:  # lui
            self.wr(rd, sext(w & 0xFFFFF000, 32))
        elif opcode == 0x17:  # auipc
            self.wr(rd, pc + sext(w & 0xFFFFF000, 32))
        elif opcode == 0x6F:  # jal
            imm = sext(
                (w >> 31) << 20 | (w >> 12 & 0xFF) << 12 | (w >> 20 & 1) << 11 | (w >> 21 & 0x3FF) << 1,
                21,
            )
            self.wr(rd, pc + 4)
            next_pc = (pc + imm) & self.mask
        elif opcode == 0x67:  # jalr
            target = (a + iimm) & self.mask & ~1
            self.wr(rd, pc + 4)
            next_pc = target
        elif opcode == 0x63:  # branches
            imm = sext(
                (w >> 31) << 12 | (w >> 7 & 1) << 11 | (w >> 25 & 0x3F) << 5 | (w >> 8 & 0xF) << 1,
                13,
            )
            taken = {
                0: a == b, 1: a != b, 4: sa < sb, 5: sa >= sb, 6: a < b, 7: a >= b,
            }[f3]
            if taken:
                next_pc = (pc + imm) & self.mask
        elif opcode == 0x03:  # loads
            addr = (a + iimm) & self.mask
            size = 1 << (f3 & 3)
            v = self.load(addr, size)
            if f3 < 4:
                v = sext(v, 8 * size)
            self.wr(rd, v)
        elif opcode == 0x23:  # stores
            imm = sext(f7 << 5 | rd, 12)
            addr = (a + imm) & self.mask
            self.store(addr, 1 << f3, b)
        elif opcode == 0x13:  # op-imm
            sh = w >> 20 & (self.xlen - 1)
            v = {
                0: a + iimm,
                2: int(sa < iimm),
                3: int(a < iimm & self.mask),
                4: a ^ iimm,
                6: a | iimm,
                7: a & iimm,
                1: a << sh,
                5: (self.s(rs1) >> sh) if w >> 30 & 1 else a >> sh,
            }[f3]
            self.wr(rd, v)
        elif opcode == 0x1B:  # op-imm-32
            sh = w >> 20 & 31
            a32 = a & 0xFFFFFFFF
            v = {
                0: sext(a + iimm, 32),
                1: sext(a32 << sh, 32),
                5: sext(sext(a, 32) >> sh, 32) if w >> 30 & 1 else sext(a32 >> sh, 32),
            }[f3]
            self.wr(rd, v)
        elif opcode == 0x33 and f7 == 1:  # mul/div
            x = self.xlen
            v = {
                0: a * b,
                1: (sa * sb) >> x,
                2: (sa * b) >> x,
                3: (a * b) >> x,
                4: sdiv(sa, sb, x),
                5: self.mask if b == 0 else a // b,
                6: srem(sa, sb, x),
                7: a if b == 0 else a % b,
            }[f3]
            self.wr(rd, v)
        elif opcode == 0x33:  # op
            sh = b & (self.xlen - 1)
            v = {
                (0x00, 0): a + b, (0x20, 0): a - b,
                (0x00, 1): a << sh,
                (0x00, 2): int(sa < sb), (0x00, 3): int(a < b),
                (0x00, 4): a ^ b,
                (0x00, 5): a >> sh, (0x20, 5): sa >> sh,
                (0x00, 6): a | b, (0x00, 7): a & b,
            }[(f7, f3)]
            self.wr(rd, v)
        elif opcode == 0x3B and f7 == 1:  # mul/div, 32-bit views
            sa32, sb32 = sext(a, 32), sext(b, 32)
            v = {
                0: sext(a * b, 32),
                4: sext(sdiv(sa32, sb32, 32), 32),
                5: sext(sdiv_u32(a, b), 32),
                6: sext(srem(sa32, sb32, 32), 32),
                7: sext(srem_u32(a, b), 32),
            }[f3]
            self.wr(rd, v)
        elif opcode == 0x3B:  # op-32
            sh = b & 31
            a32 = a & 0xFFFFFFFF
            v = {
                (0x00, 0): sext(a + b, 32), (0x20, 0): sext(a - b, 32),
                (0x00, 1): sext(a32 << sh, 32),
                (0x00, 5): sext(a32 >> sh, 32), (0x20, 5): sext(sext(a, 32) >> sh, 32),
            }[(f7, f3)]
            self.wr(rd, v)
        elif opcode == 0x73:  # csr ops
            csr = w >> 20
            old = self.csr_read(csr)
            if f3 in (1, 2, 3):
                src = a
                write = f3 == 1 or rs1 != 0
            else:
                src = rs1
                write = f3 == 5 or rs1 != 0
            if write:
                new = {1: src, 2: old | src, 3: old & ~src, 5: src, 6: old | src, 7: old & ~src}[f3]
                self.csr_write(csr, new)
            self.wr(rd, old)
        else:
            raise ValueError(f"cannot interpret {w:#010x} at {pc:#x}")

        self.pc = next_pc
        return next_pc != pc


def sdiv_u32(a, b):
    a &= 0xFFFFFFFF
    b &= 0xFFFFFFFF
    return 0xFFFFFFFF if b == 0 else a // b


def srem_u32(a, b):
    a &= 0xFFFFFFFF
    b &= 0xFFFFFFFF
    return a if b == 0 else a % b


# --- program generation -----------------------------------------------------


def work_reg(rng):
    return rng.choice(range(1, 32))


def rand_arith(rng, xlen):
    rd, rs1, rs2 = work_reg(rng), work_reg(rng), work_reg(rng)
    imm = rng.randrange(-2048, 2048)
    pool = list(R_OPS)[:10] + list(I_OPS)
    if xlen == 64:
        pool += ["addw", "subw", "sllw", "srlw", "sraw"]
    op = rng.choice(pool)
    if op in I_OPS:
        return enc(op, rd, rs1, imm)
    if op in ("slli", "srli", "srai"):
        return enc(op, rd, rs1, rng.randrange(xlen))
    return enc(op, rd, rs1, rs2)


def gen_arith(rng, xlen, n):
    words = [rand_arith(rng, xlen) for _ in range(n)]
    for _ in range(3):
        words.insert(rng.randrange(n), enc("lui", work_reg(rng), rng.getrandbits(32) & 0xFFFFF000))
        words.insert(rng.randrange(n), enc("auipc", work_reg(rng), rng.getrandbits(32) & 0xFFFFF000))
    if xlen == 64:
        words.append(enc("slliw", work_reg(rng), work_reg(rng), rng.randrange(32)))
        words.append(enc("sraiw", work_reg(rng), work_reg(rng), rng.randrange(32)))
    return words


def gen_branch(rng, xlen, n):
    words = []
    for i in range(n):
        if rng.random() < 0.4 and n - i >= 2:
            k = rng.randrange(1, min(3, n - i) + 1)
            op = rng.choice(["beq", "bne", "blt", "bge", "bltu", "bgeu"])
            words.append(enc(op, work_reg(rng), work_reg(rng), 4 * k))
        else:
            words.append(rand_arith(rng, xlen))
    return words


def arith_sparing(rng, xlen, keep):
    """Random arithmetic whose destination avoids the pinned registers."""
    while True:
        w = rand_arith(rng, xlen)
        if (w >> 7 & 0x1F) not in keep:
            return w


def gen_mem(rng, xlen, n):
    # x10 = data area; every offset is 8-aligned so no width can fault.
    # lui sign-extends on rv64, so shift out the copies of bit 31 there.
    words = [enc("lui", 10, DATA_BASE & 0xFFFFF000), enc("addi", 10, 10, DATA_BASE & 0xFFF)]
    if xlen == 64:
        words += [enc("slli", 10, 10, 32), enc("srli", 10, 10, 32)]
    stores = list(STORES)[: 4 if xlen == 64 else 3]
    loads = [l for l in LOADS if xlen == 64 or l not in ("ld", "lwu")]
    for _ in range(n):
        off = 8 * rng.randrange(0, 0x100)
        if rng.random() < 0.5:
            words.append(enc(rng.choice(stores), work_reg(rng), 10, off))
        else:
            rd = rng.choice([r for r in range(1, 32) if r != 10])
            words.append(enc(rng.choice(loads), rd, 10, off))
        if rng.random() < 0.3:
            words.append(arith_sparing(rng, xlen, {10}))
    return words


def gen_csr(rng, xlen, n):
    words = []
    for _ in range(n):
        op = rng.choice(list(CSR_OPS))
        csr = rng.choice(CSRS)
        rd = work_reg(rng)
        if op.endswith("i"):
            words.append(enc(op, rd, csr, rng.randrange(32)))
        else:
            words.append(enc(op, rd, csr, work_reg(rng)))
        if rng.random() < 0.4:
            words.append(rand_arith(rng, xlen))
    return words


def gen_jump(rng, xlen, n):
    # auipc anchors a forward jalr; jal hops over dead slots.
    words = [enc("auipc", 6, 0)]
    for _ in range(n):
        words.append(arith_sparing(rng, xlen, {6}))
    jalr_slot = len(words)
    words.append(None)  # patched below
    for _ in range(2):
        words.append(rand_arith(rng, xlen))  # skipped
    target = len(words)
    words[jalr_slot] = enc("jalr", 1, 6, 4 * target)
    for _ in range(n):
        words.append(rand_arith(rng, xlen))
    words.append(enc("jal", 2, 8))
    words.append(rand_arith(rng, xlen))  # skipped
    words.append(rand_arith(rng, xlen))
    return words


MULDIV_EDGES32 = [(0, 5), (5, 0), (0x80000000, 0xFFFFFFFF), (0xFFFFFFFF, 0xFFFFFFFF), (1, 0x80000000)]


def gen_muldiv(rng, xlen, n):
    words = []
    ops = [o for o in R_OPS if R_OPS[o][0] == 1]
    wops = [o for o in RW_OPS if RW_OPS[o][0] == 1]
    for a, b in MULDIV_EDGES32:
        words += li(rng, 5, a) + li(rng, 6, b)
        words.append(enc(rng.choice(ops), work_reg(rng), 5, 6))
        if xlen == 64:
            words.append(enc(rng.choice(wops), work_reg(rng), 5, 6))
    for _ in range(n):
        words.append(enc(rng.choice(ops + (wops if xlen == 64 else [])), work_reg(rng), work_reg(rng), work_reg(rng)))
    return words


def li(rng, rd, value):
    """Loads a sign-extended 32-bit constant."""
    hi = (value + 0x800) & 0xFFFFF000
    lo = sext(value - hi, 12)
    return [enc("lui", rd, hi), enc("addi", rd, rd, lo)]


def run_program(name, xlen, words, init_regs):
    words = words + [enc("jal", 0, 0)]
    cpu = Cpu(xlen, words, init_regs)
    steps = 0
    while True:
        live = cpu.step()
        steps += 1
        assert steps < STEP_LIMIT, name
        if not live:
            break
    return {
        "name": name,
        "isa": f"rv{xlen}im_zicsr",
        "words": [f"{w:#010x}" for w in words],
        "init_regs": [f"{v:#x}" for v in init_regs],
        "final_regs": [f"{v:#x}" for v in cpu.regs],
        "final_pc": f"{cpu.pc:#x}",
        "steps": steps,
    }


def main():
    kinds = [
        ("arith", gen_arith, 8, 24),
        ("branch", gen_branch, 5, 20),
        ("mem", gen_mem, 5, 24),
        ("csr", gen_csr, 4, 12),
        ("jump", gen_jump, 3, 5),
        ("muldiv", gen_muldiv, 5, 10),
    ]
    programs = []
    for kind, gen, count, size in kinds:
        for xlen in (32, 64):
            for i in range(count):
                rng = random.Random(f"{SEED}/{kind}/{xlen}/{i}")
                init_regs = [0] + [rng.getrandbits(xlen) for _ in range(31)]
                words = gen(rng, xlen, size)
                programs.append(run_program(f"{kind}_rv{xlen}_{i:02}", xlen, words, init_regs))

    out = Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures/ref_corpus.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    corpus = {"generator": "tools/gen_ref_corpus.py", "seed": SEED, "programs": programs}
    out.write_text(json.dumps(corpus, indent=1) + "\n")
    print(f"{len(programs)} programs -> {out}")


if __name__ == "__main__":
    main()
