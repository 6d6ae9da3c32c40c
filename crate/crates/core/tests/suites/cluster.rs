//! Cluster arbitration, determinism and conservation; energy accounting
//! algebra.

use rand::Rng;
use xdsp::cluster::Arbiter;
use xdsp::exec::MemorySystem;
use xdsp::{
    account, parse, run_cluster, run_timed, ClusterConfig, CoreState, EnergyTable, Program,
    TimingConfig,
};

const BANKS: u32 = 8;

pub fn arbiter_grants_at_most_one_request_per_bank() {
    let mut rng = crate::common::rng(40);
    for cores in 1..=8usize {
        let mut arb = Arbiter::new(BANKS as usize, cores);
        for _ in 0..crate::common::CASES / 8 {
            let req: Vec<Option<u32>> = (0..cores)
                .map(|_| rng.gen_bool(0.7).then(|| rng.gen_range(0..BANKS)))
                .collect();
            let granted = arb.arbitrate(&req);
            for bank in 0..BANKS {
                let asked = req.iter().filter(|&&r| r == Some(bank)).count();
                let won = (0..cores)
                    .filter(|&c| granted[c] && req[c] == Some(bank))
                    .count();
                assert_eq!(won, asked.min(1), "bank {bank}: {req:?} -> {granted:?}");
            }
            // nobody is granted without asking; grants + losers == requests
            assert!((0..cores).all(|c| !granted[c] || req[c].is_some()));
            let asked = req.iter().flatten().count();
            let won = granted.iter().filter(|&&g| g).count();
            let lost = (0..cores)
                .filter(|&c| req[c].is_some() && !granted[c])
                .count();
            assert_eq!(won + lost, asked);
        }
    }
}

pub fn arbiter_is_round_robin_fair() {
    // n cores persistently requesting one bank are all served within n cycles
    let mut rng = crate::common::rng(41);
    for _ in 0..10_000 {
        let cores = rng.gen_range(1..=8usize);
        let bank = rng.gen_range(0..BANKS);
        let mut arb = Arbiter::new(BANKS as usize, cores);
        // random history moves the pointer
        for _ in 0..rng.gen_range(0..5) {
            let req: Vec<Option<u32>> = (0..cores).map(|_| Some(rng.gen_range(0..BANKS))).collect();
            arb.arbitrate(&req);
        }
        let mut pending: Vec<bool> = vec![true; cores];
        for _ in 0..cores {
            let req: Vec<Option<u32>> = pending.iter().map(|&p| p.then_some(bank)).collect();
            let g = arb.arbitrate(&req);
            assert_eq!(g.iter().filter(|&&x| x).count(), 1);
            for c in 0..cores {
                pending[c] &= !g[c];
            }
        }
        assert!(pending.iter().all(|&p| !p));
    }
}

pub fn distinct_banks_never_conflict() {
    let mut arb = Arbiter::new(8, 4);
    for k in 0..100u32 {
        let req = [
            Some(k % 8),
            Some((k + 1) % 8),
            Some((k + 2) % 8),
            Some((k + 3) % 8),
        ];
        assert_eq!(arb.arbitrate(&req), vec![true; 4]);
    }
}

/// Random per-core program: reads the shared region `[0, 0x400)`, writes
/// only to its own region at `0x1000 + 0x400 * a0`.
fn core_program(rng: &mut impl Rng) -> String {
    let mut lines = vec![
        "li x20, 0x1000".to_string(),
        "slli x21, x10, 10".into(),
        "add x20, x20, x21".into(),
    ];
    let count = rng.gen_range(1..6);
    let len = rng.gen_range(1..12);
    lines.push(format!("lp.setupi L0, {count}, end"));
    for k in 0..len {
        let d = rng.gen_range(5..=9);
        let s = rng.gen_range(5..=9);
        let line = match rng.gen_range(0..7) {
            0 => format!("lw x{d}, {}(x0)", 4 * rng.gen_range(0..0x100)),
            1 => format!("lh x{d}, {}(x0)", 2 * rng.gen_range(0..0x1FF)),
            // unaligned word load: two bank accesses
            2 => format!(
                "lw x{d}, {}(x0)",
                4 * rng.gen_range(0..0xFF) + rng.gen_range(1..4)
            ),
            3 | 4 => format!("p.sw x{s}, 4(x20!)"),
            5 => format!("mul x{d}, x{s}, x{}", rng.gen_range(5..=9)),
            _ => format!("add x{d}, x{s}, x10"),
        };
        lines.push(if k == len - 1 {
            format!("end: {line}")
        } else {
            line
        });
    }
    lines.join("\n")
}

fn shared_memory(rng: &mut impl Rng) -> MemorySystem {
    let mut mem = MemorySystem::new(0x3000, BANKS).unwrap();
    let data: Vec<u8> = (0..0x400).map(|_| rng.gen()).collect();
    mem.write_bytes(0, &data).unwrap();
    mem
}

pub fn cluster_runs_are_deterministic_and_conserve_requests() {
    let mut rng = crate::common::rng(42);
    for _ in 0..300 {
        let cores = rng.gen_range(1..=4usize);
        let programs: Vec<Program> = (0..cores)
            .map(|_| parse(&core_program(&mut rng)).unwrap())
            .collect();
        let refs: Vec<&Program> = programs.iter().collect();
        let mem = shared_memory(&mut rng);
        let cfg = ClusterConfig {
            cores,
            ..Default::default()
        };
        let a = run_cluster(&refs, mem.clone(), &cfg, &TimingConfig::default()).unwrap();
        let b = run_cluster(&refs, mem.clone(), &cfg, &TimingConfig::default()).unwrap();
        assert_eq!(a.cycles, b.cycles);
        assert_eq!(a.contention, b.contention);
        assert_eq!(a.memory.bytes(), b.memory.bytes());
        for (x, y) in a.cores.iter().zip(&b.cores) {
            assert_eq!(x.trace, y.trace);
            assert_eq!(x.cycles, y.cycles);
        }

        let mut merged = xdsp::ContentionStats::default();
        for c in &a.cores {
            let s = c.contention;
            assert!(s.contended_accesses <= s.total_accesses);
            assert!(s.stall_cycles >= s.contended_accesses);
            let bank_accesses: u64 = c
                .trace
                .iter()
                .map(|r| (r.sram_accesses + r.scm_accesses) as u64)
                .sum();
            assert_eq!(
                s.total_accesses, bank_accesses,
                "every access is granted exactly once"
            );
            let lost: u64 = c.trace.iter().map(|r| r.contention as u64).sum();
            assert_eq!(s.stall_cycles, lost);
            assert!(c.cycles >= c.retired);
            merged.merge(&s);
        }
        assert_eq!(merged, a.contention);
        assert_eq!(a.cycles, a.cores.iter().map(|c| c.cycles).max().unwrap());
    }
}

pub fn disjoint_writers_match_sequential_runs() {
    let mut rng = crate::common::rng(43);
    for _ in 0..300 {
        let cores = rng.gen_range(1..=4usize);
        let programs: Vec<Program> = (0..cores)
            .map(|_| parse(&core_program(&mut rng)).unwrap())
            .collect();
        let refs: Vec<&Program> = programs.iter().collect();
        let mem = shared_memory(&mut rng);
        let cfg = ClusterConfig {
            cores,
            ..Default::default()
        };
        let par = run_cluster(&refs, mem.clone(), &cfg, &TimingConfig::default()).unwrap();
        let mut seq = mem.clone();
        for (c, p) in programs.iter().enumerate() {
            crate::common::run_program(p, &mut seq, &[(10, c as u32), (11, cores as u32)]);
        }
        assert_eq!(par.memory.bytes(), seq.bytes());
    }
}

pub fn single_core_cluster_matches_pipeline() {
    let mut rng = crate::common::rng(44);
    for _ in 0..300 {
        let p = parse(&core_program(&mut rng)).unwrap();
        let mem = shared_memory(&mut rng);
        let cfg = ClusterConfig {
            cores: 1,
            ..Default::default()
        };
        let cl = run_cluster(&[&p], mem.clone(), &cfg, &TimingConfig::default()).unwrap();
        let mut core = CoreState::new(&p);
        core.set_reg(crate::common::r(11), 1);
        let mut m = mem.clone();
        let t = run_timed(&p, &mut core, &mut m, &TimingConfig::default(), 1 << 20);
        assert_eq!(cl.cycles, t.cycles);
        assert_eq!(cl.contention.stall_cycles, 0);
        assert_eq!(cl.memory.bytes(), m.bytes());
    }
}

pub fn one_bank_hammered_by_four_cores() {
    // every core stores to bank 0 in the same cycle
    let p = parse(".nocompress\nslli x5, x10, 5\nsw x10, 0(x5)").unwrap();
    let cfg = ClusterConfig {
        cores: 4,
        ..Default::default()
    };
    let mem = MemorySystem::new(1024, 8).unwrap();
    let run = run_cluster(&[&p; 4], mem, &cfg, &TimingConfig::default()).unwrap();
    // round robin from core 0: losers wait 3, 2 and 1 cycles
    assert_eq!(run.contention.contended_accesses, 3);
    assert_eq!(run.contention.stall_cycles, 3 + 2 + 1);
    assert_eq!(run.contention.total_accesses, 4);
    for c in 0..4u32 {
        assert_eq!(run.memory.read_word(32 * c).unwrap(), c);
    }
}

// ---- energy ----------------------------------------------------------------

fn trace_of(p: &Program, mem: MemorySystem) -> Vec<xdsp::CycleRecord> {
    let cfg = ClusterConfig {
        cores: 1,
        ..Default::default()
    };
    run_cluster(&[p], mem, &cfg, &TimingConfig::default())
        .unwrap()
        .cores[0]
        .trace
        .clone()
}

pub fn energy_is_additive_over_trace_concatenation() {
    let mut rng = crate::common::rng(45);
    let table = EnergyTable::default();
    for _ in 0..300 {
        let p = parse(&core_program(&mut rng)).unwrap();
        let trace = trace_of(&p, shared_memory(&mut rng));
        let cut = rng.gen_range(0..=trace.len());
        let whole = account(&trace, &table).unwrap();
        let parts =
            account(&trace[..cut], &table).unwrap() + account(&trace[cut..], &table).unwrap();
        assert_eq!(whole, parts);
        let by_class: u64 = whole.by_class_fj.values().sum();
        assert_eq!(whole.total_fj, by_class + whole.memory_fj + whole.idle_fj);
    }
    assert_eq!(account(&[], &table).unwrap().total_fj, 0);
}

pub fn scm_never_costs_more_than_sram() {
    let mut rng = crate::common::rng(46);
    let table = EnergyTable::default();
    for _ in 0..300 {
        let p = parse(&core_program(&mut rng)).unwrap();
        let mem = shared_memory(&mut rng);
        let size = mem.size();
        let sram = account(&trace_of(&p, mem.clone()), &table).unwrap();
        let scm = account(&trace_of(&p, mem.with_scm(0..size).unwrap()), &table).unwrap();
        assert!(scm.total_fj <= sram.total_fj);
        if sram.memory_fj > 0 {
            assert!(scm.total_fj < sram.total_fj);
        }
    }
}

pub fn shuffle_is_cheaper_than_the_alu_ops_it_replaces() {
    let table = EnergyTable::default();
    let e = |src: &str| {
        let p = parse(src).unwrap();
        let mut core = CoreState::new(&p);
        let t = run_timed(
            &p,
            &mut core,
            &mut MemorySystem::new(256, 8).unwrap(),
            &TimingConfig::default(),
            100,
        );
        account(&t.trace, &table).unwrap().total_pj()
    };
    let shuffle = e("pv.shuffle2.b x5, x6, x7, x8");
    assert_eq!(shuffle, 50.0);
    // the same byte move done with shifts and masks
    let alu3 = e("srli x5, x6, 8\nandi x5, x5, 255\nor x5, x5, x7");
    let alu4 = e("srli x5, x6, 8\nandi x5, x5, 255\nslli x5, x5, 8\nor x5, x5, x7");
    assert_eq!((alu3, alu4), (90.0, 120.0));
    assert!(shuffle < alu3);
}
