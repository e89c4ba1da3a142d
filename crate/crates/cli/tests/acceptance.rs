//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use divim_core::cascade::{RngSpec, SpreadEstimator, SpreadModel, SpreadVector};
use divim_core::graph::{
    load_communities, load_embeddings, load_network, random_instance, CommunityStructure,
    EdgeListFormat, EmbeddingTable, Network, SyntheticInstance, SyntheticSpec,
};
use divim_core::objective::{
    adim_upper_bounds, AdimObjective, CesPower, Objective, SdimObjective,
};
use divim_core::optimize::{greedy, random_greedy, upper_greedy};
use divim_core::oracle::{exact_spread, exhaustive_best, SpreadTable};
use divim_core::utility::{
    ces, cobb_douglas, diversity_tilde, g_cobb_douglas, g_complements, g_substitutes, leontief,
    AdimFamily, AdimUtility, CommunitySimilarity, EmbeddingSimilarity, SdimFamily, SdimUtility,
    Similarity,
};
use divim_core::NodeId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INV_E: f64 = 0.367_879_441_171_442_3;
const MODELS: [SpreadModel; 2] = [SpreadModel::IndependentCascade, SpreadModel::LinearThreshold];

struct Outcome {
    pass: bool,
    detail: String,
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

struct Fixture {
    name: &'static str,
    network: Network,
    communities: CommunityStructure,
    embeddings: Option<EmbeddingTable>,
}

fn fixture(name: &'static str, communities: usize) -> Fixture {
    let dir = fixtures();
    let network = load_network(dir.join(format!("{name}.edges")), EdgeListFormat::default()).unwrap();
    let cs = load_communities(dir.join(format!("{name}.comm")), communities, network.ids()).unwrap();
    let emb = dir.join(format!("{name}.emb"));
    let embeddings = emb.exists().then(|| load_embeddings(&emb, network.ids()).unwrap());
    Fixture {
        name,
        network,
        communities: cs,
        embeddings,
    }
}

fn members(mask: usize) -> Vec<NodeId> {
    (0..usize::BITS as usize).filter(|i| mask >> i & 1 == 1).collect()
}

fn components(sv: &SpreadVector) -> Vec<(f64, f64)> {
    let mut v = vec![(sv.global, sv.global_std_err), (sv.in_targets, sv.in_targets_std_err)];
    v.extend(sv.per_community.iter().copied().zip(sv.per_community_std_err.iter().copied()));
    v
}

/// Monte-Carlo estimates at M = 10^5 against exact enumeration.
fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let cases = [
        (fixture("path", 2), vec![0]),
        (fixture("two_cliques", 2), vec![1, 4]),
        (fixture("eight", 2), vec![0, 4]),
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for (fx, seeds) in &cases {
        for model in MODELS {
            let exact = exact_spread(&fx.network, model, seeds, &fx.communities).unwrap();
            let (mut checks, mut within, mut reps_all) = (0usize, 0usize, 0usize);
            for rep in 0..100u64 {
                let est = SpreadEstimator::new(&fx.network, &fx.communities, model, 100_000, RngSpec::new(rep))
                    .unwrap()
                    .estimate(seeds)
                    .unwrap();
                let mut all = true;
                for ((e, se), (x, _)) in components(&est).into_iter().zip(components(&exact)) {
                    checks += 1;
                    if (e - x).abs() <= 3.0 * se + 1e-12 {
                        within += 1;
                    } else {
                        all = false;
                    }
                }
                reps_all += usize::from(all);
            }
            let rate = within as f64 / checks as f64;
            pass &= rate >= 0.99;
            lines.push(format!(
                "{}/{model}: {within}/{checks} components ({:.1}%), {reps_all}/100 repetitions fully within",
                fx.name,
                100.0 * rate
            ));
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(30);
    Outcome {
        pass,
        detail: format!("{}; {:.1}s", lines.join("; "), elapsed.as_secs_f64()),
    }
}

fn lemma_check(sim: &dyn Similarity, n: usize, budget: usize) -> Result<usize, String> {
    let valid = |m: usize| m.count_ones() as usize <= budget;
    let d: Vec<Option<f64>> = (0..1usize << n)
        .map(|m| valid(m).then(|| diversity_tilde(sim, &members(m), budget).unwrap()))
        .collect();
    let mut checked = 0;
    for s in (0..1usize << n).filter(|&s| valid(s)) {
        let ds = d[s].unwrap();
        if !(-1e-9..=1.0 + 1e-9).contains(&ds) {
            return Err(format!("d̃({s:b}) = {ds}"));
        }
        for t in (0..1usize << n).filter(|&t| t & s == s && valid(t)) {
            let dt = d[t].unwrap();
            if dt > ds + 1e-9 {
                return Err(format!("not non-increasing at {s:b} ⊆ {t:b}"));
            }
            for x in (0..n).filter(|x| t >> x & 1 == 0) {
                if let (Some(dsx), Some(dtx)) = (d[s | 1 << x], d[t | 1 << x]) {
                    checked += 1;
                    if dsx - ds < dtx - dt - 1e-9 {
                        return Err(format!("submodularity fails at {s:b} ⊆ {t:b}, x = {x}"));
                    }
                }
            }
        }
    }
    Ok(checked)
}

/// Seed diversity is bounded, non-increasing and submodular on all subsets.
fn diversity_lemma() -> Outcome {
    let start = Instant::now();
    let fx = fixture("eight", 2);
    let n = fx.network.node_count();
    let emb = fx.embeddings.as_ref().unwrap();
    let sims: [(&str, Box<dyn Similarity>); 2] = [
        ("community", Box::new(CommunitySimilarity(&fx.communities))),
        ("embedding", Box::new(EmbeddingSimilarity(emb))),
    ];
    let mut total = 0;
    for (name, sim) in &sims {
        for budget in 2..=n {
            match lemma_check(sim.as_ref(), n, budget) {
                Ok(c) => total += c,
                Err(e) => {
                    return Outcome {
                        pass: false,
                        detail: format!("{name} similarity, k = {budget}: {e}"),
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: elapsed < Duration::from_secs(10),
        detail: format!("{total} (S ⊆ T, x) triples, both similarities, k = 2..8; {:.2}s", elapsed.as_secs_f64()),
    }
}

/// Lattice submodularity of the three seed utilities with exact spreads.
fn seed_utility_submodularity() -> Outcome {
    let start = Instant::now();
    let mut pairs = 0usize;
    for fx in [fixture("two_cliques", 2), fixture("eight", 2)] {
        let n = fx.network.node_count();
        let emb = fx.embeddings.as_ref().unwrap();
        let sims: [Box<dyn Similarity>; 2] = [
            Box::new(CommunitySimilarity(&fx.communities)),
            Box::new(EmbeddingSimilarity(emb)),
        ];
        for model in MODELS {
            let table = SpreadTable::build(&fx.network, model, &fx.communities).unwrap();
            for sim in &sims {
                for budget in [2, 3, n / 2, n] {
                    for beta in [0.05 * n as f64, 1.0, 5.0] {
                        for family in [
                            SdimFamily::Substitutes,
                            SdimFamily::Complements,
                            SdimFamily::CobbDouglas { a: 0.5, b: 0.5 },
                        ] {
                            let u = SdimUtility::new(family, beta, budget).unwrap();
                            let g = SdimObjective::new(&table, sim.as_ref(), u);
                            let vals: Vec<Option<f64>> = (0..1usize << n)
                                .map(|m| (m.count_ones() as usize <= budget).then(|| g.value(&members(m))))
                                .collect();
                            for s in 0..1usize << n {
                                let Some(fs) = vals[s] else { continue };
                                for t in 0..1usize << n {
                                    let (Some(ft), Some(fu)) = (vals[t], vals[s | t]) else { continue };
                                    let fi = vals[s & t].unwrap();
                                    pairs += 1;
                                    if fs + ft < fu + fi - 1e-9 {
                                        return Outcome {
                                            pass: false,
                                            detail: format!(
                                                "{}: {family:?}, k = {budget}, β = {beta}, S = {s:b}, T = {t:b}",
                                                fx.name
                                            ),
                                        };
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: elapsed < Duration::from_secs(60),
        detail: format!("{pairs} set pairs over both fixtures, models, similarities; {:.1}s", elapsed.as_secs_f64()),
    }
}

/// Pareto efficiency, balance and diminishing substitution on random tuples.
fn utility_properties() -> Outcome {
    const TUPLES: usize = 10_000;
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures: Vec<String> = Vec::new();
    let audience: [(&str, Box<dyn Fn(&[f64], f64) -> f64>); 3] = [
        ("CES", Box::new(|x: &[f64], rho: f64| ces(x, rho))),
        ("complements", Box::new(|x: &[f64], _| leontief(x))),
        ("Cobb-Douglas", Box::new(|x: &[f64], _| cobb_douglas(x))),
    ];
    for (name, f) in &audience {
        let (mut p1, mut p2) = (0, 0);
        for _ in 0..TUPLES {
            let c = rng.random_range(1..=6);
            let x: Vec<f64> = (0..c).map(|_| rng.random_range(0.0..20.0)).collect();
            let rho = rng.random_range(0.01..=1.0);
            let base = f(&x, rho);
            let tol = TOL * base.abs().max(1.0);
            let mut up = x.clone();
            up[rng.random_range(0..c)] += rng.random_range(0.0..5.0);
            if f(&up, rho) < base - tol {
                p1 += 1;
            }
            let subset: Vec<usize> = (0..c).filter(|_| rng.random_bool(0.5)).collect();
            if !subset.is_empty() {
                let mean = subset.iter().map(|&i| x[i]).sum::<f64>() / subset.len() as f64;
                let mut avg = x.clone();
                for &i in &subset {
                    avg[i] = mean;
                }
                if f(&avg, rho) < base - tol {
                    p2 += 1;
                }
            }
        }
        if p1 + p2 > 0 {
            failures.push(format!("{name}: {p1} P1 and {p2} P2 violations"));
        }
    }

    let skewed = |x1: f64, x2: f64| x1.powf(0.9) * x2.powf(0.1);
    let seed_fams: [(&str, Box<dyn Fn(f64, f64) -> f64>); 4] = [
        ("substitutes", Box::new(g_substitutes)),
        ("complements", Box::new(g_complements)),
        ("Cobb-Douglas", Box::new(|a, b| g_cobb_douglas(a, b, 0.5, 0.5))),
        ("x1^0.9 x2^0.1", Box::new(skewed)),
    ];
    let mut p3_trades = 0;
    for (name, g) in &seed_fams {
        let (mut p1, mut p3) = (0, 0);
        for _ in 0..TUPLES {
            let x1 = rng.random_range(0.1..20.0);
            let x2 = rng.random_range(0.0..20.0);
            let base = g(x1, x2);
            let bump = rng.random_range(0.0..5.0);
            if g(x1 + bump, x2) < base - TOL || g(x1, x2 + bump) < base - TOL {
                p1 += 1;
            }
            let eps = rng.random_range(0.0..0.45) * x1;
            if let Some(delta) = compensating_delta(g.as_ref(), x1, x2, eps) {
                p3_trades += 1;
                let once = g(x1 - eps, x2 + delta);
                if g(x1 - 2.0 * eps, x2 + 2.0 * delta) > once + TOL * once.max(1.0) {
                    p3 += 1;
                }
            }
        }
        if p1 + p3 > 0 {
            failures.push(format!("{name}: {p1} P1 and {p3} P3 violations"));
        }
    }

    // x1^0.9 x2^0.1 must break balance somewhere.
    let mut broken = 0;
    for _ in 0..TUPLES {
        let x = [rng.random_range(0.1..20.0), rng.random_range(0.1..20.0)];
        let m = 0.5 * (x[0] + x[1]);
        if skewed(m, m) < skewed(x[0], x[1]) - TOL {
            broken += 1;
        }
    }
    if broken == 0 {
        failures.push("x1^0.9 x2^0.1 never violated P2".into());
    }
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!(
                "{TUPLES} tuples per family, {p3_trades} equal-utility trades checked, x1^0.9 x2^0.1 violated P2 on {broken}/{TUPLES}"
            )
        } else {
            failures.join("; ")
        },
    }
}

/// Smallest δ ≥ 0 with g(x1 − ε, x2 + δ) = g(x1, x2), if one exists.
fn compensating_delta(g: &dyn Fn(f64, f64) -> f64, x1: f64, x2: f64, eps: f64) -> Option<f64> {
    let target = g(x1, x2);
    let mut hi = 1.0;
    while g(x1 - eps, x2 + hi) < target {
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(x1 - eps, x2 + mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ((g(x1 - eps, x2 + hi) - target).abs() <= 1e-9 * target.max(1.0)).then_some(hi)
}

fn small_instances(count: u64) -> Vec<(SyntheticInstance, SpreadModel, SpreadTable)> {
    (0..count)
        .map(|i| {
            let spec = SyntheticSpec {
                nodes: 5 + (i % 4) as usize,
                density: 0.3,
                max_edges: 12,
                ..SyntheticSpec::default()
            };
            let inst = random_instance(&spec, 1000 + i).unwrap();
            let model = MODELS[(i % 2) as usize];
            let table = SpreadTable::build(&inst.network, model, &inst.communities).unwrap();
            (inst, model, table)
        })
        .collect()
}

/// Greedy on the ρ-th power of CES is within (1 − 1/e)^(1/ρ) of the optimum.
fn greedy_guarantee() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut runs = 0;
    for (inst, _, table) in small_instances(50) {
        let universe: Vec<NodeId> = (0..inst.network.node_count()).collect();
        for rho in [1.0, 0.5] {
            let u = AdimUtility::new(AdimFamily::Ces { rho }, vec![0.5, 0.5]).unwrap();
            let f = AdimObjective::new(&table, u.clone());
            let power = CesPower::new(&table, &u).unwrap();
            for k in 1..=3 {
                let r = greedy(&power, k, &universe).unwrap();
                let (_, opt) = exhaustive_best(&f, k, &universe).unwrap();
                let got = f.value(&r.seeds);
                let bound = (1.0 - INV_E).powf(1.0 / rho);
                runs += 1;
                if opt > 0.0 {
                    worst = worst.min(got / opt / bound);
                }
                if got < bound * opt - 1e-9 {
                    return Outcome {
                        pass: false,
                        detail: format!("ρ = {rho}, k = {k}: {got} < {bound} × {opt}"),
                    };
                }
            }
        }
    }
    Outcome {
        pass: true,
        detail: format!("{runs} runs on 50 instances; smallest value/(bound × optimum) = {worst:.3}"),
    }
}

/// The sandwich strategy's reported ratio holds against the exact optimum.
fn sandwich_certificate() -> Outcome {
    let mut runs = 0;
    let mut mean_ratio = 0.0;
    for (inst, _, table) in small_instances(50) {
        let universe: Vec<NodeId> = (0..inst.network.node_count()).collect();
        for family in [AdimFamily::Complements, AdimFamily::CobbDouglas] {
            let u = AdimUtility::new(family, vec![1.0, 1.0]).unwrap();
            let f = AdimObjective::new(&table, u.clone());
            let uppers = adim_upper_bounds(&table, &u);
            for k in 1..=3 {
                let r = upper_greedy(&f, &uppers, k, &universe).unwrap();
                let (_, opt) = exhaustive_best(&f, k, &universe).unwrap();
                let ratio = r.ratio_bound.unwrap();
                runs += 1;
                mean_ratio += ratio;
                if r.objective < ratio * opt - 1e-9 {
                    return Outcome {
                        pass: false,
                        detail: format!("{family:?}, k = {k}: {} < {ratio} × {opt}", r.objective),
                    };
                }
            }
        }
    }
    Outcome {
        pass: true,
        detail: format!("{runs} runs; mean certified ratio {:.3}", mean_ratio / runs as f64),
    }
}

/// Randomized greedy averages at least 1/e of the optimum.
fn random_greedy_guarantee() -> Outcome {
    let mut worst = f64::INFINITY;
    for (i, (inst, _, table)) in small_instances(20).into_iter().enumerate() {
        let n = inst.network.node_count();
        let universe: Vec<NodeId> = (0..n).collect();
        let k = 2;
        let sim: Box<dyn Similarity> = if i % 2 == 0 {
            Box::new(CommunitySimilarity(&inst.communities))
        } else {
            Box::new(EmbeddingSimilarity(&inst.embeddings))
        };
        for family in [
            SdimFamily::Substitutes,
            SdimFamily::Complements,
            SdimFamily::CobbDouglas { a: 0.5, b: 0.5 },
        ] {
            let u = SdimUtility::new(family, 0.05 * n as f64, k).unwrap();
            let g = SdimObjective::new(&table, sim.as_ref(), u);
            let (_, opt) = exhaustive_best(&g, k, &universe).unwrap();
            let mean = (0..500)
                .map(|run| random_greedy(&g, k, &universe, RngSpec::new(run)).unwrap().objective)
                .sum::<f64>()
                / 500.0;
            if opt > 0.0 {
                worst = worst.min(mean / opt);
            }
            if mean < INV_E * opt {
                return Outcome {
                    pass: false,
                    detail: format!("instance {i}, {family:?}: mean {mean} < {opt}/e"),
                };
            }
        }
    }
    Outcome {
        pass: true,
        detail: format!("20 instances × 3 families × 500 runs; smallest mean/optimum = {worst:.3}"),
    }
}

fn divim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_divim"))
}

fn run_json(args: &[&str]) -> serde_json::Value {
    let out = divim().args(args).output().expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

/// Diversified objectives spread across the barbell's two bells.
fn directional_diversification() -> Outcome {
    let dir = fixtures();
    let net = dir.join("barbell.edges");
    let comm = dir.join("barbell.comm");
    let base = [
        "select",
        "--network",
        net.to_str().unwrap(),
        "--communities",
        comm.to_str().unwrap(),
        "-k",
        "2",
        "-m",
        "10000",
        "--eval-trials",
        "100000",
        "--master-seed",
        "7",
    ];
    let run = |extra: &[&str]| {
        let v = run_json(&[&base[..], extra].concat());
        let d = &v["diagnostics"];
        (
            v["seeds"].clone(),
            d["entropy"].as_f64().unwrap_or(0.0),
            d["spread_in_targets"].as_f64().unwrap(),
        )
    };
    let im = run(&["--task", "im"]);
    let pc = run(&["--task", "adim", "--family", "complements"]);
    let ces = run(&["--task", "adim", "--family", "ces", "--rho", "0.5"]);
    let cd = run(&["--task", "adim", "--family", "cobb-douglas"]);
    let close = |x: f64| (x - im.2).abs() <= 0.05 * im.2;
    let pass = pc.1 > im.1 && ces.1 >= im.1 && cd.1 >= im.1 && close(ces.2) && close(cd.2);
    let fmt = |name: &str, r: &(serde_json::Value, f64, f64)| {
        format!("{name} {} H={:.3} spread={:.2}", r.0, r.1, r.2)
    };
    Outcome {
        pass,
        detail: [fmt("IM", &im), fmt("PC", &pc), fmt("CES", &ces), fmt("CD", &cd)].join("; "),
    }
}

/// Every subcommand reproduces its output file byte for byte.
fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let dir = fixtures();
    let seeds = tmp.path().join("seeds.txt");
    std::fs::write(&seeds, "1 4\n").unwrap();
    let p = |name: &str| dir.join(name).to_str().unwrap().to_owned();
    let common = vec![
        "--network".to_owned(),
        p("two_cliques.edges"),
        "--communities".to_owned(),
        p("two_cliques.comm"),
        "--embeddings".to_owned(),
        p("two_cliques.emb"),
        "--master-seed".to_owned(),
        "11".to_owned(),
        "-m".to_owned(),
        "3000".to_owned(),
    ];
    let seeds_arg = vec!["--seeds".to_owned(), seeds.to_str().unwrap().to_owned()];
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("select-ces", [vec!["select".into(), "-k".into(), "2".into()], common.clone()].concat()),
        (
            "select-pc",
            [vec!["select".into(), "-k".into(), "2".into(), "--family".into(), "complements".into()], common.clone()].concat(),
        ),
        (
            "select-sdim",
            [
                vec!["select".into(), "-k".into(), "2".into(), "--task".into(), "sdim".into(), "--family".into(), "complements".into(), "--similarity".into(), "embedding".into()],
                common.clone(),
            ]
            .concat(),
        ),
        ("evaluate", [vec!["evaluate".into(), "-k".into(), "2".into()], common.clone(), seeds_arg.clone()].concat()),
        ("simulate", [vec!["simulate".into()], common.clone(), seeds_arg.clone()].concat()),
        (
            "oracle",
            [vec!["oracle".into(), "--optimum".into(), "-k".into(), "2".into()], common.clone(), seeds_arg.clone()].concat(),
        ),
    ];
    let mut checked = Vec::new();
    for (name, args) in &commands {
        let mut outputs = Vec::new();
        for (i, threads) in ["1", "2"].iter().enumerate() {
            let path = tmp.path().join(format!("{name}-{i}.out"));
            let status = divim()
                .args(args)
                .args(["--threads", threads, "--output", path.to_str().unwrap()])
                .output()
                .unwrap();
            if !status.status.success() {
                return Outcome {
                    pass: false,
                    detail: format!("{name} failed: {}", String::from_utf8_lossy(&status.stderr)),
                };
            }
            outputs.push(std::fs::read(&path).unwrap());
        }
        if outputs[0] != outputs[1] {
            return Outcome {
                pass: false,
                detail: format!("{name} output differs between runs"),
            };
        }
        checked.push(*name);
    }
    Outcome {
        pass: true,
        detail: format!("identical bytes across two runs (1 and 2 threads) for {}", checked.join(", ")),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("seed diversity lemma", diversity_lemma),
        ("seed utility submodularity", seed_utility_submodularity),
        ("utility family properties", utility_properties),
        ("greedy guarantee", greedy_guarantee),
        ("sandwich certificate", sandwich_certificate),
        ("random greedy guarantee", random_greedy_guarantee),
        ("directional diversification", directional_diversification),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name} [{:.1}s] {}",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
