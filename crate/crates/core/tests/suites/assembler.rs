//! Assembler round trip and label-resolution fuzzing over random programs
//! drawn from the whole vocabulary.

use rand::seq::SliceRandom;
use rand::Rng;
use xdsp::isa::{AddrMode, Form, Size};
use xdsp::{parse, print, Op, SourceErrorKind};

const PROGRAMS: usize = 10_000;

fn reg(rng: &mut impl Rng) -> String {
    let i = rng.gen_range(0..32);
    // both spellings are accepted
    if rng.gen_ratio(1, 4) {
        format!("r{i}")
    } else {
        format!("x{i}")
    }
}

fn mem_operand(rng: &mut impl Rng, mode: AddrMode) -> String {
    let base = reg(rng);
    let imm = rng.gen_range(-2048..=2047);
    match mode {
        AddrMode::Offset => format!("{imm}({base})"),
        AddrMode::PostInc => format!("{imm}({base}!)"),
        AddrMode::RegOffset => format!("{}({base})", reg(rng)),
        AddrMode::RegPostInc => format!("{}({base}!)", reg(rng)),
    }
}

/// A random valid instruction at `index` of `count`; labels are `t<k>`
/// placed before instruction `k`.
fn instruction(rng: &mut impl Rng, index: usize, count: usize) -> String {
    let op = *Op::all().choose(rng).unwrap();
    let m = op.mnemonic();
    let lp = if rng.gen() { "L0" } else { "L1" };
    let any_label = format!("t{}", rng.gen_range(0..=count));
    let fwd_label = format!("t{}", rng.gen_range(index..count));
    let (rd, rs1, rs2, rs3) = (reg(rng), reg(rng), reg(rng), reg(rng));
    match op.form() {
        Form::Empty => m,
        Form::R2 => format!("{m} {rd}, {rs1}"),
        Form::R3 => format!("{m} {rd}, {rs1}, {rs2}"),
        Form::R4 => format!("{m} {rd}, {rs1}, {rs2}, {rs3}"),
        Form::RegImm => {
            let imm = match op {
                Op::Slli | Op::Srli | Op::Srai => rng.gen_range(0..32),
                Op::Vec { .. } => rng.gen_range(-32..32),
                // small immediates exercise the compressed forms
                _ if rng.gen() => rng.gen_range(-32..32),
                _ => rng.gen_range(-2048..2048),
            };
            format!("{m} {rd}, {rs1}, {imm}")
        }
        Form::Upper => format!("{m} {rd}, {:#x}", rng.gen_range(0..1 << 20)),
        Form::Branch => format!("{m} {rs1}, {rs2}, {any_label}"),
        Form::Jump => format!("{m} {rd}, {any_label}"),
        Form::JumpReg => format!("{m} {rd}, {}({rs1})", rng.gen_range(-2048..2048)),
        Form::Load | Form::Store => {
            let mode = match op {
                Op::Load { mode, .. } | Op::Store { mode, .. } => mode,
                _ => unreachable!(),
            };
            format!("{m} {rd}, {}", mem_operand(rng, mode))
        }
        Form::LoopReg => format!("{m} {lp}, {rs1}, {fwd_label}"),
        Form::LoopImm => format!("{m} {lp}, {}, {fwd_label}", rng.gen_range(0..4096)),
        Form::LoopLabel if op == Op::LpEnd => format!("{m} {lp}, {fwd_label}"),
        Form::LoopLabel => format!("{m} {lp}, t{}", rng.gen_range(0..count)),
        Form::LoopCountReg => format!("{m} {lp}, {rs1}"),
        Form::LoopCountImm => format!("{m} {lp}, {}", rng.gen_range(0..4096)),
        Form::R3Shift => format!("{m} {rd}, {rs1}, {rs2}, {}", rng.gen_range(0..32)),
        Form::R2Shift => format!("{m} {rd}, {rs1}, {}", rng.gen_range(1..32)),
        Form::Field => {
            let len = rng.gen_range(1..=32);
            let off = rng.gen_range(0..=32 - len).min(31);
            format!("{m} {rd}, {rs1}, {len}, {off}")
        }
        Form::Lane => {
            let lanes = if m.ends_with(".b") { 4 } else { 2 };
            format!("{m} {rd}, {rs1}, {}", rng.gen_range(0..lanes))
        }
    }
}

fn program_source(rng: &mut impl Rng) -> String {
    let count = rng.gen_range(1..40);
    let mut lines = Vec::new();
    if rng.gen_ratio(1, 4) {
        lines.push(format!(".text {:#x}", 2 * rng.gen_range(0..0x8000)));
    }
    if rng.gen_ratio(1, 4) {
        lines.push(format!(".entry t{}", rng.gen_range(0..count)));
    }
    for k in 0..count {
        if rng.gen_ratio(1, 10) {
            lines.push(
                if rng.gen() {
                    ".nocompress"
                } else {
                    ".compress"
                }
                .into(),
            );
        }
        lines.push(format!("t{k}: {}", instruction(rng, k, count)));
    }
    lines.push(format!("t{count}:"));
    for _ in 0..rng.gen_range(0..3) {
        lines.push(format!(".data {:#x}", rng.gen_range(0..0x10000)));
        for _ in 0..rng.gen_range(0..4) {
            let (d, v) = match rng.gen_range(0..3) {
                0 => (".byte", rng.gen_range(-128..256)),
                1 => (".half", rng.gen_range(-32768..65536)),
                _ => (".word", rng.gen::<u32>() as i64),
            };
            lines.push(format!("{d} {v}"));
        }
    }
    lines.join("\n")
}

pub fn print_then_parse_is_identity() {
    let mut rng = crate::common::rng(30);
    for case in 0..PROGRAMS {
        let src = program_source(&mut rng);
        let p = parse(&src)
            .unwrap_or_else(|e| panic!("case {case}: generator emitted bad text: {e}\n{src}"));
        let text = print(&p);
        let q = parse(&text).unwrap_or_else(|e| panic!("case {case}: {e}\n{text}"));
        assert_eq!(p, q, "case {case}\n{src}\n--\n{text}");
        assert_eq!(print(&q), text);
    }
}

pub fn addresses_increase_by_instruction_size() {
    let mut rng = crate::common::rng(31);
    for _ in 0..PROGRAMS {
        let p = parse(&program_source(&mut rng)).unwrap();
        for (k, instr) in p.instrs.iter().enumerate() {
            let step = p.address_of(k + 1) - p.address_of(k);
            assert_eq!(step, instr.size.bytes());
            assert!(step == 2 || step == 4);
            if instr.size == Size::Compressed {
                assert!(!instr.op.is_extension(), "{} compressed", instr.op);
            }
        }
        assert_eq!(p.address_of(0), p.base);
    }
}

pub fn mutated_labels_never_yield_a_program() {
    let mut rng = crate::common::rng(32);
    let mut checked = 0;
    for _ in 0..PROGRAMS {
        let src = program_source(&mut rng);
        // rename one defined label; every reference to it becomes dangling
        let count = src.lines().filter(|l| l.starts_with('t')).count();
        let refs: Vec<&str> = src
            .split([' ', ',', '\n'])
            .filter(|w| {
                w.len() > 1 && w.starts_with('t') && w[1..].bytes().all(|b| b.is_ascii_digit())
            })
            .collect();
        let victim = match refs.choose(&mut rng) {
            Some(v) if rng.gen_ratio(3, 4) => v.to_string(),
            _ => format!("t{}", rng.gen_range(0..count)),
        };
        let defined = format!("{victim}:");
        let mutated: Vec<String> = src
            .lines()
            .map(|l| match l.strip_prefix(&defined) {
                Some(rest) => format!("{victim}_gone:{rest}"),
                None => l.to_string(),
            })
            .collect();
        let referenced = mutated
            .iter()
            .any(|l| l.split([' ', ',']).any(|w| w == victim));
        let result = parse(&mutated.join("\n"));
        if referenced {
            checked += 1;
            let e = result.expect_err("dangling label accepted");
            assert_eq!(e.kind, SourceErrorKind::UnresolvedLabel, "{e}");
        } else {
            assert!(result.is_ok());
        }
    }
    assert!(checked > PROGRAMS / 2, "{checked}");
}

pub fn syntax_errors_report_their_line() {
    let cases = [
        ("nop\nfrob x1, x2\n", 2, SourceErrorKind::UnknownMnemonic),
        ("add x1, x2\n", 1, SourceErrorKind::Arity),
        (
            "nop\nnop\naddi x1, x1, 5000",
            3,
            SourceErrorKind::ImmediateRange,
        ),
        ("a: nop\na: nop", 2, SourceErrorKind::DuplicateLabel),
        ("lp.setupi L0, 4, endL", 1, SourceErrorKind::UnresolvedLabel),
        ("add x1, x2, x99", 1, SourceErrorKind::BadRegister),
    ];
    for (src, line, kind) in cases {
        let e = parse(src).unwrap_err();
        assert_eq!((e.line, e.kind), (line, kind), "{src:?}");
    }
}
