//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::error::Error;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use filtra_core::bratteli::{
    bernoulli_pascal_chain, closed_form_intrinsic, euler_conditional, euler_graph, eulerian, generalized_eulerian_a01,
    multinomial_multipascal_chain, pascal_graph, path_counts, paths_to, symmetric_euler_chain,
    symmetric_euler_forward_kernel, symmetric_euler_marginals, wellordered_coupling_multipascal,
};
use filtra_core::chain::{
    binomial_poisson_check, choose_start, exact_pw_expectation, poisson_chain, poisson_distance_bound,
    poisson_truncation, square_walk_chain, truncated_poisson, LambdaRule, ProppWilson, StartPolicy,
    DEFAULT_PRODUCT_CAP, DEFAULT_TAIL_BOUND,
};
use filtra_core::probcore::total_variation;
use filtra_core::scalar::{Exact, Scalar};
use filtra_core::standardness::{
    intrinsic_metrics, metric_decomposition_check, tail_criterion_statistic, vprime_equals_conditional_kantorovich,
    vprime_statistic, well_ordered_check, CoordinateWeights, MultipascalCoupler,
};
use filtra_core::transport::{transport_simplex, LevelMetric, LiftStrategy};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String), Box<dyn Error>>;

fn q(n: i64, d: i64) -> Exact {
    Exact::from_ratio(n, d)
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.5}")).collect::<Vec<_>>().join(", ")
}

fn c1_pascal_metrics() -> Check {
    let t = Instant::now();
    let c = bernoulli_pascal_chain(q(1, 2), -30)?;
    let rho0 = LevelMetric::discrete(c.chain.space(-1)?.clone());
    let ladder = intrinsic_metrics(&c.chain, -1, rho0, -30, LiftStrategy::Embedding)?;
    let (mut ok, mut pairs) = (true, 0usize);
    for (level, m) in ladder.iter() {
        let absn = level.unsigned_abs() as i64;
        let n = m.space().len();
        for v in 0..n {
            for w in v..n {
                pairs += 1;
                ok &= m.get(v, w) == q((w - v) as i64, absn);
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Ok((
        ok && secs < 10.0,
        format!("{pairs} pairs to level -30 exact, {secs:.2} s"),
    ))
}

fn c2_euler_metrics() -> Check {
    let t = Instant::now();
    let c = symmetric_euler_chain::<Exact>(-12)?;
    let rho0 = LevelMetric::discrete(c.chain.space(-1)?.clone());
    let ladder = intrinsic_metrics(&c.chain, -1, rho0, -12, LiftStrategy::Embedding)?;
    let mut ok = true;
    for (level, m) in ladder.iter() {
        ok &= m.to_matrix() == closed_form_intrinsic::<Exact>(&c.graph, level, None)?.to_matrix();
    }
    let to_top = paths_to(&c.graph, -1, 1)?;
    let mut a01_ok = true;
    for level in -12i32..=-1 {
        let absn = level.unsigned_abs() as i64;
        for v in 0..=absn {
            a01_ok &= generalized_eulerian_a01(absn - v, v - 1) == to_top[(level + 12) as usize][v as usize];
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Ok((
        ok && a01_ok && secs < 30.0,
        format!("ladder = closed form: {ok}, A01 = path counts: {a01_ok}, {secs:.2} s"),
    ))
}

fn c3_eulerian_identities() -> Check {
    let e = path_counts(&euler_graph(-12)?);
    let p = path_counts(&pascal_graph(-12)?);
    let binom = |n: u128, k: u128| (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1));
    let (mut euler_ok, mut pascal_ok) = (true, true);
    for level in -12i32..=-1 {
        let absn = level.unsigned_abs();
        for v in 0..=absn as usize {
            euler_ok &= *e.dim(level, v) == eulerian(absn + 1, v as i64);
            pascal_ok &= p.dim(level, v).to_string() == binom(absn as u128, v as u128).to_string();
        }
    }
    let mut fact_ok = true;
    let mut fact = 1u128;
    for n in 1..=12u32 {
        fact *= n as u128;
        let sum: u128 = (0..n as i64)
            .map(|k| eulerian(n, k).to_string().parse::<u128>().unwrap())
            .sum();
        fact_ok &= sum == fact;
    }
    Ok((
        euler_ok && pascal_ok && fact_ok,
        format!("Euler dims: {euler_ok}, Pascal dims: {pascal_ok}, sum A(n,k) = n!: {fact_ok}"),
    ))
}

fn c4_centrality() -> Check {
    let c = symmetric_euler_chain::<Exact>(-12)?;
    let marg = symmetric_euler_marginals::<Exact>(-12);
    let mut ok = true;
    for n in -12..=-1 {
        let fwd = symmetric_euler_forward_kernel(&c.graph, n, &marg)?;
        ok &= &fwd == c.chain.kernel(n + 1)?.as_ref();
    }
    Ok((
        ok,
        "forward kernels from the backward rule equal the dimension-ratio kernels, levels -12..-1".into(),
    ))
}

fn c5_euler_limit() -> Check {
    let t = Instant::now();
    let c = symmetric_euler_chain::<f64>(-200)?;
    let v = c.chain.space(-200)?.index_of_label(100).ok_or("vertex 100 missing")?;
    let one = c.chain.space(-1)?.index_of_label(1).ok_or("vertex 1 missing")?;
    let p = c.chain.compose_kernels(-200, -1)?.get(v, one);
    let closed: f64 = euler_conditional(100, 200);
    let secs = t.elapsed().as_secs_f64();
    let ok = (p - 0.5).abs() <= 0.05 && (p - closed).abs() < 1e-9 && secs < 60.0;
    Ok((
        ok,
        format!("P(V_-1 = 1 | V_-200 = 100) = {p:.6} (closed form {closed:.6}), {secs:.2} s"),
    ))
}

fn c6_vprime_pascal() -> Check {
    let c = bernoulli_pascal_chain(q(1, 2), -100)?;
    let rho0 = LevelMetric::discrete(c.chain.space(-1)?.clone());
    let ladder = intrinsic_metrics(&c.chain, -1, rho0, -100, LiftStrategy::Embedding)?;
    let levels = [8, 16, 32, 64, 100];
    let mut values = Vec::new();
    for &a in &levels {
        values.push(vprime_statistic(&c.chain, &ladder, -a)?);
    }
    let mu = c.chain.marginal_at(-100)?;
    let m = ladder.metric(-100)?;
    let mut oracle = q(0, 1);
    for v in 0..mu.len() {
        for w in 0..mu.len() {
            oracle += &(mu.weight(v).clone() * mu.weight(w).clone() * m.get(v, w));
        }
    }
    let floats: Vec<f64> = values.iter().map(Scalar::to_f64).collect();
    let last = values.last().expect("nonempty");
    let ok = *last == oracle && *last < q(1, 10) && strictly_decreasing(&floats);
    Ok((
        ok,
        format!(
            "V' at |n| = 8..100: [{}], equals double sum: {}",
            fmt_list(&floats),
            *last == oracle
        ),
    ))
}

fn c7_non_standard() -> Check {
    let sq = square_walk_chain::<Exact>(-64)?;
    let rho0 = LevelMetric::discrete(sq.space(0)?.clone());
    let ladder = intrinsic_metrics(&sq, 0, rho0, -64, LiftStrategy::Auto)?;
    let mut sq_ok = true;
    for level in -64..=-1 {
        sq_ok &= vprime_statistic(&sq, &ladder, level)? == q(1, 2);
    }
    let pc = poisson_chain(&LambdaRule::constant(1.0), -400, None, DEFAULT_TAIL_BOUND)?;
    let rho = LevelMetric::discrete(pc.chain.space(0)?.clone());
    let mut s = Vec::new();
    for m in [-50, -100, -200, -400] {
        s.push(tail_criterion_statistic(&pc.chain, 0, m, &rho)?);
    }
    let constant = s.iter().all(|x| (x - s[0]).abs() < 1e-12);
    let ok = sq_ok && constant && s[0] > 0.05;
    Ok((
        ok,
        format!(
            "square walk V' = 1/2 on -64..-1: {sq_ok}; Poisson(1) s_m = [{}]",
            fmt_list(&s)
        ),
    ))
}

fn c8_poisson_bounds() -> Check {
    let k = poisson_truncation(4.0, 1e-12).max(40);
    let (mut ok, mut worst_slack, mut checks) = (true, 0.0f64, 0);
    for kk in 1..=20 {
        for theta in [0.05, 0.1, 0.2] {
            let c = binomial_poisson_check(kk, theta, k)?;
            ok &= c.holds;
            worst_slack = worst_slack.max(c.slack);
            checks += 1;
        }
    }
    for lam in [1.0, 2.0, 4.0] {
        for lam_p in [0.5, 1.0, 2.0] {
            if lam >= lam_p {
                let c = poisson_distance_bound(lam, lam_p, k)?;
                ok &= c.holds;
                worst_slack = worst_slack.max(c.slack);
                checks += 1;
            }
        }
    }
    let ok = ok && worst_slack <= 1e-9;
    Ok((
        ok,
        format!("{checks} bounds hold at truncation {k}, largest slack {worst_slack:.1e}"),
    ))
}

fn c9_poisson_convergence() -> Check {
    let rule = LambdaRule::from_fn("|n|+1", |n| n.unsigned_abs() as f64 + 1.0);
    let pc = poisson_chain(&rule, -400, None, DEFAULT_TAIL_BOUND)?;
    let target = truncated_poisson(pc.chain.space(0)?.clone(), 1.0)?;
    let mut values = Vec::new();
    for n in [-50, -100, -200, -400] {
        let k = pc.chain.compose_kernels(n, 0)?;
        let mut acc = 0.0;
        for (x, w) in pc.chain.marginal_at(n)?.support() {
            acc += w * total_variation(&k.row_dist(x), &target)?;
        }
        values.push(acc);
    }
    let ok = values[3] <= 0.06 && strictly_decreasing(&values) && pc.tail < 1e-9;
    Ok((
        ok,
        format!(
            "E TV at |n| = 50..400: [{}], truncation {} with tail {:.1e}",
            fmt_list(&values),
            pc.truncation,
            pc.tail
        ),
    ))
}

fn c10_triple_agreement() -> Check {
    let mut checked = 0;
    let mut ok = true;
    let pascal = bernoulli_pascal_chain(q(1, 2), -10)?.chain;
    let euler = symmetric_euler_chain::<Exact>(-8)?.chain;
    for chain in [&pascal, &euler] {
        let rho0 = LevelMetric::discrete(chain.space(-1)?.clone());
        let ladder = intrinsic_metrics(chain, -1, rho0, chain.depth(), LiftStrategy::Embedding)?;
        for level in chain.depth()..-1 {
            let out = vprime_equals_conditional_kantorovich(chain, &ladder, level, DEFAULT_PRODUCT_CAP)?;
            if let filtra_core::standardness::CheckOutcome::Pass { checked: c } = out {
                checked += c;
            } else {
                ok = false;
            }
        }
    }
    Ok((
        ok,
        format!("{checked} pairs agree three ways (Pascal depth 10, Euler depth 8)"),
    ))
}

fn c11_propp_wilson() -> Check {
    let chain = bernoulli_pascal_chain(0.5f64, -200)?.chain;
    let rho = LevelMetric::discrete(chain.space(-1)?.clone());
    let x_m = choose_start(&chain, -200, -1, &rho, StartPolicy::MinKantorovich)?;
    let exact = exact_pw_expectation(&chain, -200, x_m, -1, &rho, DEFAULT_PRODUCT_CAP)?;
    let est = ProppWilson::new(&chain, -200, -1, 20_240_611)?.estimate(x_m, &rho, 10_000)?;
    let ok = exact < 0.05 && (est.mean - exact).abs() <= 3.0 * est.stderr;
    Ok((
        ok,
        format!(
            "exact {exact:.5}, Monte Carlo {:.5} +- {:.5} over {} trials",
            est.mean, est.stderr, est.trials
        ),
    ))
}

fn c12_multipascal() -> Check {
    let third = q(1, 3);
    let theta = [third.clone(), third.clone(), third];
    let small = multinomial_multipascal_chain(&theta, -10)?;
    let weights = CoordinateWeights::uniform(3)?;
    let decomposition = metric_decomposition_check(&small.chain, -1, &weights, Some(&MultipascalCoupler))?;

    let c = multinomial_multipascal_chain(&theta, -24)?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut coupling_ok = true;
    for _ in 0..100 {
        let level = rng.random_range(-24..=-2);
        let (from, to) = (c.chain.space(level)?, c.chain.space(level + 1)?);
        let (v, vp) = (rng.random_range(0..from.len()), rng.random_range(0..from.len()));
        let plan = wellordered_coupling_multipascal::<Exact>(from, to, v, vp)?;
        let k = c.chain.kernel(level + 1)?;
        coupling_ok &= plan.check_margins(&k.row_dist(v), &k.row_dist(vp));
        coupling_ok &= well_ordered_check(&plan, from.coord(v).expect("coords"), from.coord(vp).expect("coords"))?;
    }

    let rho0 = LevelMetric::weighted_l1(c.chain.space(-1)?.clone(), weights.weights())?;
    let ladder = intrinsic_metrics(&c.chain, -1, rho0, -24, LiftStrategy::Embedding)?;
    let mut values = Vec::new();
    for a in [6, 12, 24] {
        values.push(vprime_statistic(&c.chain, &ladder, -a)?.to_f64());
    }
    let ok = decomposition.passed() && coupling_ok && strictly_decreasing(&values);
    Ok((
        ok,
        format!(
            "decomposition at depth 10: {}, 100 couplings well ordered: {coupling_ok}, V' at 6, 12, 24: [{}]",
            decomposition.passed(),
            fmt_list(&values)
        ),
    ))
}

/// Minimum cost over all integer tables with the given margins.
fn brute_force_min(supply: &[i64], demand: &[i64], cost: &[i64]) -> i64 {
    fn go(i: usize, j: usize, row_left: i64, cols: &mut [i64], supply: &[i64], cost: &[i64], acc: i64, best: &mut i64) {
        let n = cols.len();
        if i == supply.len() {
            if cols.iter().all(|&c| c == 0) {
                *best = (*best).min(acc);
            }
            return;
        }
        if j == n - 1 {
            // The last cell of a row is forced.
            if row_left <= cols[j] {
                cols[j] -= row_left;
                let next_row = supply.get(i + 1).copied().unwrap_or(0);
                go(
                    i + 1,
                    0,
                    next_row,
                    cols,
                    supply,
                    cost,
                    acc + row_left * cost[i * n + j],
                    best,
                );
                cols[j] += row_left;
            }
            return;
        }
        for x in 0..=row_left.min(cols[j]) {
            cols[j] -= x;
            go(
                i,
                j + 1,
                row_left - x,
                cols,
                supply,
                cost,
                acc + x * cost[i * n + j],
                best,
            );
            cols[j] += x;
        }
    }
    let mut best = i64::MAX;
    let mut cols = demand.to_vec();
    go(0, 0, supply[0], &mut cols, supply, cost, 0, &mut best);
    best
}

fn random_masses(rng: &mut ChaCha8Rng, len: usize, total: i64) -> Vec<i64> {
    let mut out = vec![0; len];
    for _ in 0..total {
        out[rng.random_range(0..len)] += 1;
    }
    out
}

fn c13_transport_oracle() -> Check {
    const GRID: i64 = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut float_ok, mut exact_ok, mut worst) = (true, true, 0.0f64);
    for _ in 0..100 {
        let (m, n) = (rng.random_range(3..=5), rng.random_range(3..=5));
        let supply = random_masses(&mut rng, m, GRID);
        let demand = random_masses(&mut rng, n, GRID);
        let cost: Vec<i64> = (0..m * n).map(|_| rng.random_range(0..10)).collect();
        let best = brute_force_min(&supply, &demand, &cost);
        let ex = |v: &[i64], d: i64| v.iter().map(|&x| q(x, d)).collect::<Vec<Exact>>();
        let exact = transport_simplex(&ex(&supply, GRID), &ex(&demand, GRID), &ex(&cost, 1))?.value;
        exact_ok &= exact == q(best, GRID);
        let fl = |v: &[i64], d: f64| v.iter().map(|&x| x as f64 / d).collect::<Vec<f64>>();
        let float = transport_simplex(&fl(&supply, GRID as f64), &fl(&demand, GRID as f64), &fl(&cost, 1.0))?.value;
        let gap = (float - best as f64 / GRID as f64).abs();
        worst = worst.max(gap);
        float_ok &= gap <= 1e-6;
    }

    // Linearity of lifted metrics along the order, on ladders computed by LP.
    let pascal = bernoulli_pascal_chain(q(1, 3), -16)?.chain;
    let euler = symmetric_euler_chain::<Exact>(-10)?.chain;
    let ladders = [&pascal, &euler]
        .iter()
        .map(|ch| {
            let rho0 = LevelMetric::discrete(ch.space(-1)?.clone());
            intrinsic_metrics(ch, -1, rho0, ch.depth(), LiftStrategy::Lp)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut linear_ok = true;
    for t in 0..100 {
        let ladder = &ladders[t % 2];
        let level = rng.random_range(ladder.bottom()..=-1);
        let m = ladder.metric(level)?;
        let len = m.space().len();
        let mut abc = [
            rng.random_range(0..len),
            rng.random_range(0..len),
            rng.random_range(0..len),
        ];
        abc.sort_unstable();
        let [a, b, c] = abc;
        linear_ok &= m.get(a, c) == m.get(a, b) + m.get(b, c);
    }
    Ok((
        float_ok && exact_ok && linear_ok,
        format!(
            "100 instances: exact = brute force: {exact_ok}, float gap {worst:.1e}; 100 triples linear: {linear_ok}"
        ),
    ))
}

fn run_filtra(args: &[&str], threads: &str, out: &Path) -> Result<Vec<u8>, Box<dyn Error>> {
    let status = Command::new(env!("CARGO_BIN_EXE_filtra"))
        .args(args)
        .arg("--output")
        .arg(out)
        .env("FILTRA_THREADS", threads)
        .status()?;
    if !status.success() {
        return Err(format!("filtra {args:?} exited with {status}").into());
    }
    Ok(std::fs::read(out)?)
}

fn c14_determinism() -> Check {
    let dir = tempfile::tempdir()?;
    let runs: [&[&str]; 4] = [
        &[
            "simulate",
            "pw",
            "--chain",
            "pascal",
            "--ms",
            "25,50,100",
            "--trials",
            "2000",
            "--seed",
            "7",
            "--format",
            "json",
        ],
        &[
            "simulate", "pw", "--chain", "euler", "--ms", "20,40", "--trials", "1000", "--seed", "11", "--format",
            "csv",
        ],
        &[
            "simulate", "cascade", "--chain", "pascal", "--starts", "10,20,30", "--trials", "500", "--seed", "7",
            "--format", "json",
        ],
        &[
            "simulate",
            "cascade",
            "--chain",
            "square-walk",
            "--starts",
            "5,10",
            "--trials",
            "300",
            "--seed",
            "3",
            "--format",
            "csv",
        ],
    ];
    let mut same = 0;
    for (i, args) in runs.iter().enumerate() {
        let a = run_filtra(args, "1", &dir.path().join(format!("{i}-a")))?;
        let b = run_filtra(args, "4", &dir.path().join(format!("{i}-b")))?;
        if a == b && !a.is_empty() {
            same += 1;
        }
    }
    Ok((
        same == runs.len(),
        format!("{same}/{} stochastic commands byte-identical across reruns", runs.len()),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 14] = [
        ("Pascal intrinsic metrics", c1_pascal_metrics),
        ("Euler intrinsic metrics", c2_euler_metrics),
        ("Eulerian identities", c3_eulerian_identities),
        ("centrality cross-check", c4_centrality),
        ("Euler limit", c5_euler_limit),
        ("V' decay, Pascal", c6_vprime_pascal),
        ("non-standardness witnesses", c7_non_standard),
        ("Poisson bounds", c8_poisson_bounds),
        ("Poisson convergence", c9_poisson_convergence),
        ("triple agreement", c10_triple_agreement),
        ("Propp-Wilson decay", c11_propp_wilson),
        ("d-Pascal", c12_multipascal),
        ("transport solver oracle", c13_transport_oracle),
        ("determinism", c14_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "acceptance: {}/{} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
