//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use dispkit::bounds::{self, LowerVariant};
use dispkit::exact::{
    brute_force_oracle, dispersion_exact, k_dispersion_exact, torus_dispersion_exact, DispersionResult,
};
use dispkit::montecarlo::{run_net_experiment_on, sample_uniform};
use dispkit::nets::{
    build_anchored_net, build_net, cardinality_bound, lattice_cardinality_bound, lattice_size, net_certifies,
    verify_approximation, NetKind, NetParams,
};
use dispkit::PointSet;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Random instance `i`: odd instances snap coordinates to a grid of 1/8 so
/// that ties and shared coordinates are common.
fn instance(seed: u64, i: u64, d: usize, n: usize) -> PointSet {
    let p = sample_uniform(n, d, seed, i).unwrap();
    if i % 2 == 1 {
        let snapped = p.coords().iter().map(|&c| (c * 8.0).floor() / 8.0).collect();
        PointSet::new(d, snapped).unwrap()
    } else {
        p
    }
}

fn same(a: &DispersionResult, b: &DispersionResult) -> bool {
    a.value == b.value && a.witness == b.witness && a.attained == b.attained
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for i in 0..200u64 {
        let d = 1 + (i % 3) as usize;
        let n = (i % 9) as usize;
        let p = instance(1001, i, d, n);
        let checks = [
            ("disp", dispersion_exact(&p), brute_force_oracle(&p, 0, false).unwrap()),
            ("k=1", k_dispersion_exact(&p, 1), brute_force_oracle(&p, 1, false).unwrap()),
            ("k=2", k_dispersion_exact(&p, 2), brute_force_oracle(&p, 2, false).unwrap()),
            ("torus", torus_dispersion_exact(&p), brute_force_oracle(&p, 0, true).unwrap()),
        ];
        for (what, fast, slow) in checks {
            compared += 1;
            if !same(&fast, &slow) {
                mismatches.push(format!("instance {i} {what}: {} vs {}", fast.value, slow.value));
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "{compared} comparisons on 200 instances, {} mismatches {:?}, {:.2?}",
            mismatches.len(),
            mismatches.first(),
            elapsed
        ),
    )
}

fn known_values() -> Outcome {
    let mut bad = Vec::new();
    for d in 1..=4 {
        let v = dispersion_exact(&PointSet::new(d, vec![0.5; d]).unwrap()).value;
        if (v - 0.5).abs() > 1e-12 {
            bad.push(format!("midpoint d={d}: {v}"));
        }
    }
    for n in 1..=20usize {
        let p = PointSet::new(1, (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()).unwrap();
        let v = dispersion_exact(&p).value;
        if (v - 1.0 / (n + 1) as f64).abs() > 1e-12 {
            bad.push(format!("equispaced n={n}: {v}"));
        }
    }
    let diag = PointSet::from_points(2, &[[1.0 / 3.0, 1.0 / 3.0], [2.0 / 3.0, 2.0 / 3.0]]).unwrap();
    let r = dispersion_exact(&diag);
    if (r.value - 4.0 / 9.0).abs() > 1e-12 || r.attained {
        bad.push(format!("diagonal pair: {} attained {}", r.value, r.attained));
    }
    let t = torus_dispersion_exact(&PointSet::new(2, vec![0.3, 0.7]).unwrap()).value;
    if t != 1.0 {
        bad.push(format!("torus single point: {t}"));
    }
    let five = PointSet::new(1, (1..=5).map(|i| i as f64 / 6.0).collect()).unwrap();
    let k = k_dispersion_exact(&five, 2).value;
    if (k - 0.5).abs() > 1e-12 {
        bad.push(format!("k-dispersion of five points: {k}"));
    }
    outcome(bad.is_empty(), if bad.is_empty() { "all values match".into() } else { bad.join("; ") })
}

fn universal_lower_bound() -> Outcome {
    let mut violations = Vec::new();
    for i in 0..500u64 {
        let d = 1 + (i % 3) as usize;
        let n = (i % 31) as usize;
        let p = instance(3003, i, d, n);
        let cube = dispersion_exact(&p).value;
        let torus = torus_dispersion_exact(&p).value;
        if cube < 1.0 / (n as f64 + 1.0) - 1e-12 {
            violations.push(format!("instance {i}: {cube} < 1/(n+1)"));
        }
        if torus < cube {
            violations.push(format!("instance {i}: torus {torus} < cube {cube}"));
        }
    }
    outcome(
        violations.is_empty(),
        format!("500 sets, {} violations {:?}", violations.len(), violations.first()),
    )
}

const NET_CASES: [(usize, f64); 6] = [(2, 0.05), (2, 0.1), (2, 0.2), (3, 0.05), (3, 0.1), (3, 0.2)];

fn net_property() -> Outcome {
    let start = Instant::now();
    let mut failures = 0;
    let mut parts = Vec::new();
    for (d, eps) in NET_CASES {
        let params = NetParams::new(d, eps, None).unwrap();
        for kind in [NetKind::General, NetKind::Torus] {
            let net = build_net(&params, kind).unwrap();
            let r = verify_approximation(&net, 10_000, 4004).unwrap();
            failures += r.failures;
            parts.push(format!("d={d} eps={eps} {}: {}", kind.name(), r.failures));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && elapsed < Duration::from_secs(600),
        format!("{failures} failures in 12 x 10^4 boxes [{}], {:.2?}", parts.join(", "), elapsed),
    )
}

fn net_soundness() -> Outcome {
    let eps = 0.2;
    let params = NetParams::new(2, eps, None).unwrap();
    let net = build_net(&params, NetKind::General).unwrap();
    let (mut wide, mut certified, mut violations) = (0, 0, Vec::new());
    for i in 0..200u64 {
        let n = 1 + (i % 60) as usize;
        let p = sample_uniform(n, 2, 5005, i).unwrap();
        let disp = dispersion_exact(&p).value;
        let cert = net_certifies(&net, &p, 0).unwrap();
        if disp >= eps {
            wide += 1;
            if cert.deficient.is_empty() {
                violations.push(format!("set {i}: disp {disp} but no empty element"));
            }
        }
        if cert.certified {
            certified += 1;
            if disp >= eps {
                violations.push(format!("set {i}: certified with disp {disp}"));
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "200 sets: {wide} with disp >= eps, {certified} certified, {} violations {:?}",
            violations.len(),
            violations.first()
        ),
    )
}

fn cardinality() -> Outcome {
    let mut bad = Vec::new();
    let mut ratios = Vec::new();
    for (d, eps) in NET_CASES {
        let params = NetParams::new(d, eps, None).unwrap();
        let anchored = build_anchored_net(&params).unwrap();
        let cube_cap = lattice_cardinality_bound(&params, false);
        let torus_cap = lattice_cardinality_bound(&params, true);
        for e in anchored.elements() {
            if e.volume() < params.delta0 * (1.0 - 1e-12) {
                bad.push(format!("d={d} eps={eps}: anchored volume {}", e.volume()));
            }
            let (lc, lt) = (lattice_size(e.sides, false).unwrap(), lattice_size(e.sides, true).unwrap());
            if lc > cube_cap || lt > torus_cap {
                bad.push(format!("d={d} eps={eps}: lattice {lc}/{lt} above {cube_cap}/{torus_cap}"));
            }
        }
        for kind in [NetKind::Anchored, NetKind::General, NetKind::Torus] {
            let size = build_net(&params, kind).unwrap().len() as f64;
            ratios.push(format!("{}:{:.3}", kind.name(), size / cardinality_bound(&params, kind)));
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} violations; size/bound ratios {}", bad.len(), ratios.join(" ")),
    )
}

fn cube_bound_end_to_end() -> Outcome {
    let start = Instant::now();
    let params = NetParams::new(2, 0.2, None).unwrap();
    let n = bounds::thm_main_bound(0.2, 2).unwrap().integer_value as usize;
    let net = build_net(&params, NetKind::General).unwrap();
    let r = run_net_experiment_on(&net, 0, n, 100, 7007).unwrap();
    let elapsed = start.elapsed();
    outcome(
        n == 1966 && r.fraction >= 0.98 && elapsed < Duration::from_secs(300),
        format!(
            "n = {n}, |N| = {}, success {}/{} = {}, {:.2?}",
            net.len(),
            r.successes,
            r.trials,
            r.fraction,
            elapsed
        ),
    )
}

fn k_lemma_end_to_end() -> Outcome {
    let params = NetParams::new(2, 0.2, None).unwrap();
    let net = build_net(&params, NetKind::General).unwrap();
    let n = bounds::lemma_k_unb_bound(net.len() as u64, params.delta, 2).unwrap().integer_value as usize;
    let r = run_net_experiment_on(&net, 2, n, 100, 8008).unwrap();
    outcome(
        r.fraction >= 0.98,
        format!("n = {n}, |N| = {}, success {}/{} = {}", net.len(), r.successes, r.trials, r.fraction),
    )
}

#[allow(clippy::excessive_precision)]
fn bound_evaluators() -> Outcome {
    let v = |b: dispkit::Result<bounds::BoundValue>| b.unwrap().value;
    let theta = |m: usize| bounds::theta_m_bound(m).unwrap();
    let reference: Vec<(&str, f64, f64)> = vec![
        ("thm_main(0.1,2)", v(bounds::thm_main_bound(0.1, 2)), 4606.7295099277704926),
        ("thm_main(0.5,2)", v(bounds::thm_main_bound(0.5, 2)), 577.45431014118026756),
        ("thm_main(0.2,2)", v(bounds::thm_main_bound(0.2, 2)), 1965.6471916608259704),
        ("thm_main(0.05,3)", v(bounds::thm_main_bound(0.05, 3)), 14670.933381258078821),
        ("thm_main(0.01,10)", v(bounds::thm_main_bound(0.01, 10)), 262904.04825762740593),
        ("thm_main(1e-6,5)", v(bounds::thm_main_bound(1e-6, 5)), 2255158655.9120552702),
        ("thm_torus(0.1,2)", v(bounds::thm_torus_bound(0.1, 2)), 5772.1709107524483181),
        ("thm_torus(0.2,3)", v(bounds::thm_torus_bound(0.2, 3)), 4357.9477076272793759),
        ("thm_torus(0.5,4)", v(bounds::thm_torus_bound(0.5, 4)), 2391.4807902024983032),
        ("thm_torus(0.001,8)", v(bounds::thm_torus_bound(0.001, 8)), 3409976.3554088716297),
        ("thm_k(0.1,2,3)", v(bounds::thm_k_bound(0.1, 2, 3)), 27971.724381734062184),
        ("thm_k(0.1,2,0)", v(bounds::thm_k_bound(0.1, 2, 0)), 6426.0674731930051122),
        ("thm_k(0.2,2,2)", v(bounds::thm_k_bound(0.2, 2, 2)), 8513.1381975171520431),
        ("thm_k(0.05,5,10)", v(bounds::thm_k_bound(0.05, 5, 10)), 209108.1858803900443),
        ("lemma_unb(20,0.05)", v(bounds::lemma_unb_bound(20, 0.05)), 179.74393641323945961),
        ("lemma_unb(1000,0.01)", v(bounds::lemma_unb_bound(1000, 0.01)), 2072.3265836946411156),
        ("lemma_unb(3,0.5)", v(bounds::lemma_unb_bound(3, 0.5)), 6.5916737320086581484),
        ("lemma_k_unb(100,0.05,2)", v(bounds::lemma_k_unb_bound(100, 0.05, 2)), 1259.6634733096073355),
        ("lemma_k_unb(20,0.05,0)", v(bounds::lemma_k_unb_bound(20, 0.05, 0)), 299.57322735539909934),
        ("lemma_k_unb(1000,0.02,5)", v(bounds::lemma_k_unb_bound(1000, 0.02, 5)), 7866.9675765307168363),
        ("rz_cover(3,1)", v(bounds::rz_cover_bound(3, 1.0)), 184.56686449624242815),
        ("rz_cover(2,0.5)", v(bounds::rz_cover_bound(2, 0.5)), 87.336544750553108987),
        ("rz_cover(5,0.25)", v(bounds::rz_cover_bound(5, 0.25)), 176032.27167247972847),
        ("theta(3)", theta(3).infimum.value, 10.064122438515164402),
        ("theta_cap(3)", theta(3).cap.value, 18.577980348854426123),
        ("theta(4)", theta(4).infimum.value, 14.916983967760166737),
        ("theta_cap(4)", theta(4).cap.value, 26.851714484392686405),
        ("theta(10)", theta(10).infimum.value, 48.445502642834146561),
        ("theta_cap(10)", theta(10).cap.value, 81.366175382420014838),
        ("theta(50)", theta(50).infimum.value, 337.90848427916324211),
        ("theta_cap(50)", theta(50).cap.value, 513.80388191582958436),
        ("ahr(0.1,16)", v(bounds::lower_bound(0.1, 16, LowerVariant::Ahr)), 5.0),
        ("ahr(0.01,2)", v(bounds::lower_bound(0.01, 2, LowerVariant::Ahr)), 12.5),
        ("ahr(0.2,1024)", v(bounds::lower_bound(0.2, 1024, LowerVariant::Ahr)), 6.25),
        ("bc(1/64,2)", v(bounds::lower_bound(1.0 / 64.0, 2, LowerVariant::Bc)), 47.088568469944617164),
        ("bc(1e-5,3)", v(bounds::lower_bound(1e-5, 3, LowerVariant::Bc)), 110363.83235143269648),
        ("ullrich(0.1,2)", v(bounds::lower_bound(0.1, 2, LowerVariant::Ullrich)), 20.0),
        ("ullrich(0.03,7)", v(bounds::lower_bound(0.03, 7, LowerVariant::Ullrich)), 233.33333333333333333),
        ("trivial(0.1)", v(bounds::lower_bound(0.1, 2, LowerVariant::Trivial)), 9.0),
        ("trivial(0.3)", v(bounds::lower_bound(0.3, 2, LowerVariant::Trivial)), 2.3333333333333333333),
        ("hkkr(0.1,2)", v(bounds::lower_bound(0.1, 2, LowerVariant::Hkkr)), 23.02585092994045684),
        ("hkkr(0.1,20)", v(bounds::lower_bound(0.1, 20, LowerVariant::Hkkr)), 100.0),
        ("mackay(0.3)", v(bounds::mackay_bound(0.3)), 11.049629462081452786),
        ("mackay(0.26)", v(bounds::mackay_bound(0.26)), 28.415926535897932385),
        ("mackay(0.45)", v(bounds::mackay_bound(0.45)), 4.0248147310407263932),
        ("sosnovec(0.3)", v(bounds::sosnovec_bound(0.3)), 21.0),
        ("sosnovec(0.26)", v(bounds::sosnovec_bound(0.26)), 101.0),
        ("best_known(1e-10,8)", v(bounds::best_known_upper(1e-10, 8)), 230258509299.4045684),
        ("best_known(0.3,2)", v(bounds::best_known_upper(0.3, 2)), 1.2375117257491042919),
        ("best_known(0.3,64)", v(bounds::best_known_upper(0.3, 64)), 55.63535698595821724),
        ("best_known(1e-10,3)", v(bounds::best_known_upper(1e-10, 3)), 98875105980.129872226),
        ("best_known(1e-3,4)", v(bounds::best_known_upper(1e-3, 4)), 6907.7552789821370521),
    ];
    let mut bad: Vec<String> = reference
        .iter()
        .filter(|(_, got, want)| ((got - want) / want).abs() > 1e-9)
        .map(|(name, got, want)| format!("{name}: {got} vs {want}"))
        .collect();
    let integers = [
        (bounds::thm_main_bound(0.1, 2).unwrap().integer_value, 4607.0),
        (bounds::thm_torus_bound(0.1, 2).unwrap().integer_value, 5773.0),
        (bounds::thm_k_bound(0.1, 2, 3).unwrap().integer_value, 27972.0),
    ];
    for (got, want) in integers {
        if got != want {
            bad.push(format!("integer value {got} vs {want}"));
        }
    }
    for eps in [0.5, 0.6, 0.75, 0.99] {
        let b = bounds::large_eps_bounds(eps).unwrap();
        if b.value != 1.0 {
            bad.push(format!("large_eps({eps}) = {}", b.value));
        }
    }
    outcome(
        bad.is_empty() && reference.len() >= 50,
        format!("{} reference values, {} mismatches {:?}", reference.len(), bad.len(), bad.first()),
    )
}

fn cli_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("dispkit-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let points = dir.join("points.txt");
    let p = sample_uniform(40, 2, 9009, 0).unwrap();
    dispkit::io::write_points(&points, &p, &[]).unwrap();
    let points = points.to_str().unwrap().to_string();
    let commands: Vec<Vec<&str>> = vec![
        vec!["disp", "--points", &points],
        vec!["disp", "--points", &points, "--torus", "--k", "1", "--format", "jsonl"],
        vec!["net", "verify", "--d", "3", "--eps", "0.1", "--trials", "3000", "--seed", "11"],
        vec!["net", "verify", "--d", "2", "--eps", "0.1", "--torus", "--trials", "3000", "--seed", "12"],
        vec!["net", "certify", "--d", "2", "--eps", "0.2", "--points", &points, "--format", "jsonl"],
        vec!["mc", "net", "--d", "2", "--eps", "0.2", "--trials", "40", "--seed", "13", "--format", "jsonl"],
        vec!["mc", "net", "--d", "2", "--eps", "0.2", "--k", "2", "--trials", "20", "--seed", "14"],
        vec!["mc", "disp", "--d", "2", "--eps", "0.2", "--n", "40", "--trials", "30", "--method", "both", "--seed", "15", "--format", "jsonl"],
        vec!["mc", "invert", "--d", "1", "--eps", "0.26", "--target", "0.5", "--trials", "40", "--seed", "16", "--format", "jsonl"],
        vec!["bounds", "eval", "--eps", "0.05:0.5:4", "--d", "2:4", "--k", "0,2"],
    ];
    let mut differing = Vec::new();
    let mut failed = Vec::new();
    for args in &commands {
        let mut outputs = Vec::new();
        for threads in ["1", "2", "8", "8"] {
            let out = Command::new(env!("CARGO_BIN_EXE_dispkit"))
                .args(args)
                .args(["--threads", threads])
                .env_remove("DISPKIT_SEED")
                .output()
                .unwrap();
            if !out.status.success() {
                failed.push(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
            }
            outputs.push(out.stdout);
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            differing.push(args.join(" "));
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(
        differing.is_empty() && failed.is_empty(),
        format!(
            "{} commands x threads 1/2/8/8: {} differ {:?}, {} failed {:?}",
            commands.len(),
            differing.len(),
            differing.first(),
            failed.len(),
            failed.first()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("known values", known_values),
        ("universal lower bound", universal_lower_bound),
        ("net approximation property", net_property),
        ("net soundness vs exact", net_soundness),
        ("cardinality bounds", cardinality),
        ("random points at the cube bound", cube_bound_end_to_end),
        ("k+1 points per net box", k_lemma_end_to_end),
        ("bound evaluators", bound_evaluators),
        ("determinism across workers", cli_determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let r = check();
        if !r.pass {
            failures += 1;
        }
        println!("{} [{}] {name}: {}", if r.pass { "PASS" } else { "FAIL" }, i + 1, r.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
