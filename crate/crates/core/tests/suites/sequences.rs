//! Instruction-sequence equivalences: the shipped table programs, hardware
//! loops against their branch rewrites, and timing-model invariants.

use crate::common::{r, run_program, CASES};
use rand::Rng;
use xdsp::exec::MemorySystem;
use xdsp::pipeline::Termination;
use xdsp::{parse, run_timed, CoreState, Program, TimingConfig};

fn program_text(name: &str) -> String {
    let path = format!("{}/../../programs/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn load(name: &str) -> Program {
    parse(&program_text(name)).unwrap()
}

fn q11(rng: &mut impl Rng) -> i32 {
    rng.gen_range(-2048..=2047)
}

fn write_halves(mem: &mut MemorySystem, addr: u32, values: &[i32]) {
    for (k, &v) in values.iter().enumerate() {
        mem.write(addr + 2 * k as u32, 2, v as u32).unwrap();
    }
}

fn read_words(mem: &MemorySystem, addr: u32, n: usize) -> Vec<i32> {
    (0..n)
        .map(|k| mem.read_word(addr + 4 * k as u32).unwrap() as i32)
        .collect()
}

pub fn add_round_normalize_replaces_add_addi_srai() {
    let plain = load("addq111_plain.s");
    let fused = load("addq111_addrn.s");
    assert_eq!(plain.len(), 5);
    assert_eq!(fused.len(), 3);
    let mut rng = crate::common::rng(20);
    let mut mem = MemorySystem::new(64, 8).unwrap();
    for _ in 0..CASES {
        // Q1.11 operands, plus occasional full-width values
        let regs: Vec<(u8, u32)> = (4..=7)
            .map(|i| {
                (
                    i,
                    if rng.gen_ratio(1, 8) {
                        rng.gen()
                    } else {
                        q11(&mut rng) as u32
                    },
                )
            })
            .collect();
        let a = run_program(&plain, &mut mem, &regs).reg(r(3));
        let b = run_program(&fused, &mut mem, &regs).reg(r(3));
        assert_eq!(a, b, "{regs:?}");
        let sum: i64 = regs.iter().map(|&(_, v)| v as i32 as i64).sum();
        if regs
            .iter()
            .all(|&(_, v)| (-2048..=2047).contains(&(v as i32)))
        {
            assert_eq!(a as i32 as i64, (sum + 2) >> 2);
        }
    }
}

pub fn multiply_round_normalize_replaces_mul_add_srai() {
    let mut rng = crate::common::rng(21);
    let mut sim = crate::common::OneShot::new();
    for _ in 0..CASES {
        let (x, y) = (
            rng.gen::<i16>() as i32 as u32,
            rng.gen::<i16>() as i32 as u32,
        );
        let fused = sim.rd("p.mulsRN x5, x6, x7, 12", 0, x, y, 0);
        let mut mem = MemorySystem::new(64, 8).unwrap();
        let seq = parse("li x8, 0x800\nmul x5, x6, x7\nadd x5, x5, x8\nsrai x5, x5, 12").unwrap();
        let plain = run_program(&seq, &mut mem, &[(6, x), (7, y)]).reg(r(5));
        assert_eq!(fused, plain, "{x:#x} * {y:#x}");
    }
}

/// Runs one of the 16-element table loops on random Q1.11 inputs.
fn run_table(p: &Program, a: &[i32], b: &[i32], timing: &TimingConfig) -> (Vec<i32>, u64) {
    let mut mem = MemorySystem::default();
    write_halves(&mut mem, 0, a);
    write_halves(&mut mem, 0x400, b);
    let mut core = CoreState::new(p);
    let run = run_timed(p, &mut core, &mut mem, timing, 1_000_000);
    assert_eq!(run.termination, Termination::Halted);
    (read_words(&mem, 0x800, a.len()), run.cycles)
}

fn with_count(text: &str, n: usize) -> Program {
    parse(&text.replace("addi r3, r0, 16", &format!("addi r3, r0, {n}"))).unwrap()
}

pub fn clip_table_programs_agree() {
    let branch = program_text("clip_branch.s");
    let builtin = program_text("clip_builtin.s");
    let mut rng = crate::common::rng(22);
    for n in [16usize, 64] {
        let (pb, pc) = (with_count(&branch, n), with_count(&builtin, n));
        for _ in 0..200 {
            let a: Vec<i32> = (0..n).map(|_| q11(&mut rng)).collect();
            let b: Vec<i32> = (0..n).map(|_| q11(&mut rng)).collect();
            let (ob, cb) = run_table(&pb, &a, &b, &TimingConfig::default());
            let (oc, cc) = run_table(&pc, &a, &b, &TimingConfig::default());
            let want: Vec<i32> = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x + y).clamp(-2048, 2047))
                .collect();
            assert_eq!(ob, want);
            assert_eq!(oc, want);
            assert!(cc < cb, "clip loop {cc} cycles vs branch loop {cb}");
        }
    }
}

pub fn mulq_table_programs_agree() {
    let plain = load("mulq211_plain.s");
    let fused = load("mulq211_mulsrn.s");
    let mut rng = crate::common::rng(23);
    for _ in 0..500 {
        let a: Vec<i32> = (0..16).map(|_| q11(&mut rng)).collect();
        let b: Vec<i32> = (0..16).map(|_| q11(&mut rng)).collect();
        let (op, cp) = run_table(&plain, &a, &b, &TimingConfig::default());
        let (of, cf) = run_table(&fused, &a, &b, &TimingConfig::default());
        let want: Vec<i32> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x * y + 2048) >> 12)
            .collect();
        assert_eq!(op, want);
        assert_eq!(of, want);
        assert!(cf < cp);
    }
    // Q1.11 0.5 * 0.5 = Q2.10 0.25
    let (o, _) = run_table(&fused, &[1024; 16], &[1024; 16], &TimingConfig::default());
    assert!(o.iter().all(|&v| v == 256));
}

// ---- hardware loops vs branch loops ----------------------------------------

/// Random straight-line body over x5..x9 with post-increment stores to x21.
fn body(rng: &mut impl Rng, len: std::ops::Range<usize>) -> Vec<String> {
    let len = rng.gen_range(len);
    (0..len)
        .map(|_| {
            let d = rng.gen_range(5..=9);
            let s = rng.gen_range(5..=9);
            let t = rng.gen_range(5..=9);
            match rng.gen_range(0..8) {
                0 => format!("addi x{d}, x{s}, {}", rng.gen_range(-50..50)),
                1 => format!("add x{d}, x{s}, x{t}"),
                2 => format!("xor x{d}, x{s}, x{t}"),
                3 => format!("mul x{d}, x{s}, x{t}"),
                4 => format!("pv.sdotp.sb x{d}, x{s}, x{t}"),
                5 => format!("p.sw x{s}, 4(x21!)"),
                6 => format!("slli x{d}, x{s}, {}", rng.gen_range(0..5)),
                _ => format!("p.mac x{d}, x{s}, x{t}"),
            }
        })
        .collect()
}

struct LoopPair {
    hw: String,
    sw: String,
}

/// One counted loop, optionally wrapping a nested inner loop.
fn loop_pair(rng: &mut impl Rng, counter: &str) -> LoopPair {
    let outer = rng.gen_range(1..6);
    let pre = body(rng, 1..4);
    let mut hw = vec!["li x21, 0x100".to_string()];
    let mut sw = hw.clone();
    let nested = rng.gen::<bool>();
    if nested {
        let inner = rng.gen_range(1..5);
        let inner_body = body(rng, 1..4);
        let post = body(rng, 1..3);
        hw.push(format!("lp.setupi L1, {outer}, o_end"));
        hw.extend(pre.iter().cloned());
        hw.push(format!("lp.setupi L0, {inner}, i_end"));
        hw.extend(inner_body[..inner_body.len() - 1].iter().cloned());
        hw.push(format!("i_end: {}", inner_body.last().unwrap()));
        hw.extend(post[..post.len() - 1].iter().cloned());
        hw.push(format!("o_end: {}", post.last().unwrap()));

        sw.push(format!("addi x20, x0, {outer}"));
        sw.push(format!("o_top: {}", pre[0]));
        sw.extend(pre[1..].iter().cloned());
        sw.push(format!("addi x22, x0, {inner}"));
        sw.push(format!("i_top: {}", inner_body[0]));
        sw.extend(inner_body[1..].iter().cloned());
        sw.push("addi x22, x22, -1".into());
        sw.push("bne x22, x0, i_top".into());
        sw.extend(post.iter().cloned());
        sw.push("addi x20, x20, -1".into());
        sw.push("bne x20, x0, o_top".into());
    } else {
        hw.push(format!("addi x23, x0, {outer}"));
        hw.push(format!("lp.setup L0, x23, {counter}"));
        hw.extend(pre[..pre.len() - 1].iter().cloned());
        hw.push(format!("{counter}: {}", pre.last().unwrap()));

        sw.push(format!("addi x23, x0, {outer}"));
        sw.push(format!("addi x20, x0, {outer}"));
        sw.push(format!("top: {}", pre[0]));
        sw.extend(pre[1..].iter().cloned());
        sw.push("addi x20, x20, -1".into());
        sw.push("bne x20, x0, top".into());
    }
    LoopPair {
        hw: hw.join("\n"),
        sw: sw.join("\n"),
    }
}

pub fn hardware_loops_equal_branch_loops() {
    let mut rng = crate::common::rng(24);
    for case in 0..2_000 {
        let pair = loop_pair(&mut rng, "endL");
        let init: Vec<(u8, u32)> = (5..=9).map(|i| (i, rng.gen())).collect();
        let (hw, sw) = (parse(&pair.hw).unwrap(), parse(&pair.sw).unwrap());
        let mut mh = MemorySystem::new(4096, 8).unwrap();
        let mut ms = MemorySystem::new(4096, 8).unwrap();
        let ch = run_program(&hw, &mut mh, &init);
        let cs = run_program(&sw, &mut ms, &init);
        for i in (1..32).filter(|i| ![20, 22].contains(i)) {
            assert_eq!(
                ch.reg(r(i)),
                cs.reg(r(i)),
                "case {case} x{i}\n{}\n--\n{}",
                pair.hw,
                pair.sw
            );
        }
        assert_eq!(mh.bytes(), ms.bytes(), "case {case} memory");

        let timing = TimingConfig::default();
        let th = run_timed(
            &hw,
            &mut CoreState::new(&hw),
            &mut MemorySystem::new(4096, 8).unwrap(),
            &timing,
            1 << 20,
        );
        let ts = run_timed(
            &sw,
            &mut CoreState::new(&sw),
            &mut MemorySystem::new(4096, 8).unwrap(),
            &timing,
            1 << 20,
        );
        assert!(
            th.cycles < ts.cycles,
            "case {case}: hwloop {} vs branch {}",
            th.cycles,
            ts.cycles
        );
    }
}

pub fn hardware_loop_counts() {
    let run = |src: &str| {
        let p = parse(src).unwrap();
        let mut mem = MemorySystem::new(256, 8).unwrap();
        run_program(&p, &mut mem, &[])
    };
    let c = run("lp.setupi L0, 3, e\naddi x5, x5, 1\ne: addi x6, x6, 1");
    assert_eq!((c.reg(r(5)), c.reg(r(6))), (3, 3));
    let c = run("lp.setupi L0, 1, e\naddi x5, x5, 1\ne: addi x6, x6, 1");
    assert_eq!(c.reg(r(5)), 1);
    let c = run("lp.setupi L1, 2, o\nlp.setupi L0, 4, i\ni: addi x5, x5, 1\no: addi x6, x6, 1");
    assert_eq!((c.reg(r(5)), c.reg(r(6))), (8, 2));
}

// ---- timing invariants -----------------------------------------------------

pub fn timing_never_changes_architectural_state() {
    let mut rng = crate::common::rng(25);
    for _ in 0..500 {
        let pair = loop_pair(&mut rng, "endL");
        for src in [&pair.hw, &pair.sw] {
            let p = parse(src).unwrap();
            let init: Vec<(u8, u32)> = (5..=9).map(|i| (i, rng.gen())).collect();
            let mut mf = MemorySystem::new(4096, 8).unwrap();
            let functional = run_program(&p, &mut mf, &init);
            for timing in [TimingConfig::default(), TimingConfig::zero()] {
                let mut core = CoreState::new(&p);
                for &(i, v) in &init {
                    core.set_reg(r(i), v);
                }
                let mut mt = MemorySystem::new(4096, 8).unwrap();
                let run = run_timed(&p, &mut core, &mut mt, &timing, 1 << 20);
                assert_eq!(core.regs(), functional.regs());
                assert_eq!(mt.bytes(), mf.bytes());
                assert!(run.cycles >= run.retired);
                if timing == TimingConfig::zero() {
                    assert_eq!(run.cycles, run.retired);
                }
            }
        }
    }
}

pub fn instruction_energy_microbench_shape() {
    // 100 iterations of a 100-instruction body
    let body = "add x5, x5, x6\n".repeat(99);
    let src = format!("lp.setupi L0, 100, e\n{body}e: add x5, x5, x6");
    let p = parse(&src).unwrap();
    let mut core = CoreState::new(&p);
    let run = run_timed(
        &p,
        &mut core,
        &mut MemorySystem::new(256, 8).unwrap(),
        &TimingConfig::default(),
        1 << 20,
    );
    assert_eq!(run.retired, 1 + 100 * 100);
}
