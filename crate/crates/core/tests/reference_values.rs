use filtra_core::bratteli::{
    bernoulli_pascal_chain, closed_form_intrinsic, euler_graph, eulerian, pascal_graph, path_counts,
    symmetric_euler_chain,
};
use filtra_core::chain::{binomial_dist, poisson_pmf, square_walk_chain, truncated_poisson, LambdaRule};
use filtra_core::probcore::{total_variation, Dist, OrderedStateSpace};
use filtra_core::scalar::{Exact, Scalar};
use filtra_core::standardness::{expected_distance, intrinsic_metrics, tail_criterion_statistic, vprime_statistic};
use filtra_core::transport::{kantorovich, transport_simplex, LevelMetric, LiftStrategy};
use num_bigint::BigUint;

fn q(n: i64, d: i64) -> Exact {
    Exact::from_ratio(n, d)
}

#[test]
fn eulerian_rows() {
    let row = |n: u32| (0..n as i64).map(|k| eulerian(n, k)).collect::<Vec<_>>();
    let as_big = |v: &[u64]| v.iter().map(|&x| BigUint::from(x)).collect::<Vec<_>>();
    assert_eq!(row(1), as_big(&[1]));
    assert_eq!(row(3), as_big(&[1, 4, 1]));
    assert_eq!(row(4), as_big(&[1, 11, 11, 1]));
    assert_eq!(row(5), as_big(&[1, 26, 66, 26, 1]));
    assert_eq!(row(6), as_big(&[1, 57, 302, 302, 57, 1]));
}

#[test]
fn small_graph_dimensions() {
    let p = path_counts(&pascal_graph(-4).unwrap());
    let binom: Vec<BigUint> = [1u32, 4, 6, 4, 1].iter().map(|&x| BigUint::from(x)).collect();
    assert_eq!(p.level(-4), binom.as_slice());
    let e = path_counts(&euler_graph(-3).unwrap());
    let eul: Vec<BigUint> = [1u32, 11, 11, 1].iter().map(|&x| BigUint::from(x)).collect();
    assert_eq!(e.level(-3), eul.as_slice());
}

#[test]
fn pascal_level_two_metric() {
    let c = bernoulli_pascal_chain(q(1, 2), -2).unwrap();
    let rho0 = LevelMetric::discrete(c.chain.space(-1).unwrap().clone());
    let ladder = intrinsic_metrics(&c.chain, -1, rho0, -2, LiftStrategy::Lp).unwrap();
    let m = ladder.metric(-2).unwrap();
    assert_eq!(m.get(0, 1), q(1, 2));
    assert_eq!(m.get(0, 2), q(1, 1));
    assert_eq!(m.get(1, 2), q(1, 2));
    assert_eq!(
        m.to_matrix(),
        closed_form_intrinsic::<Exact>(&c.graph, -2, None).unwrap().to_matrix()
    );
    // Bin(2, 1/2): P(|X - Y| = 1) = 1/2, P(|X - Y| = 2) = 1/8.
    assert_eq!(vprime_statistic(&c.chain, &ladder, -2).unwrap(), q(3, 8));
}

#[test]
fn euler_level_two_positions() {
    let c = symmetric_euler_chain::<Exact>(-2).unwrap();
    let m = closed_form_intrinsic::<Exact>(&c.graph, -2, None).unwrap();
    // P(V_-1 = 1 | V_-2 = v) = 0, 1/2, 1 for v = 0, 1, 2.
    assert_eq!(m.get(0, 1), q(1, 2));
    assert_eq!(m.get(0, 2), q(1, 1));
}

#[test]
fn square_walk_is_half_everywhere() {
    let chain = square_walk_chain::<Exact>(-5).unwrap();
    let rho0 = LevelMetric::discrete(chain.space(0).unwrap().clone());
    let ladder = intrinsic_metrics(&chain, 0, rho0.clone(), -5, LiftStrategy::Auto).unwrap();
    for level in -5..=-1 {
        assert_eq!(
            vprime_statistic(&chain, &ladder, level).unwrap(),
            q(1, 2),
            "level {level}"
        );
        assert_eq!(tail_criterion_statistic(&chain, 0, level, &rho0).unwrap(), q(1, 2));
    }
}

#[test]
fn kantorovich_of_point_masses_is_the_ground_distance() {
    let sp = OrderedStateSpace::range(0, 3).unwrap();
    let rho = LevelMetric::from_positions(sp.clone(), vec![q(0, 1), q(1, 3), q(1, 1), q(5, 2)]).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let d = kantorovich(&Dist::point_mass(sp.clone(), i), &Dist::point_mass(sp.clone(), j), &rho).unwrap();
            assert_eq!(d, rho.get(i, j));
        }
    }
    assert_eq!(
        expected_distance::<Exact>(&Dist::uniform(sp.clone()), &LevelMetric::discrete(sp)).unwrap(),
        q(3, 4)
    );
}

#[test]
fn textbook_transportation_problem() {
    // Optimal by complementary slackness with potentials u = (0, -1, -2), v = (2, 3, 4).
    let supply = [q(20, 1), q(30, 1), q(25, 1)];
    let demand = [q(10, 1), q(35, 1), q(30, 1)];
    let cost: Vec<Exact> = [2, 3, 4, 3, 2, 5, 4, 5, 2].iter().map(|&c| q(c, 1)).collect();
    let sol = transport_simplex(&supply, &demand, &cost).unwrap();
    // 10@(0,0) + 5@(0,1) + 5@(0,2) + 30@(1,1) + 25@(2,2).
    assert_eq!(sol.value, q(165, 1));
}

#[test]
fn poisson_and_binomial_values() {
    assert!((poisson_pmf(2.0, 0) - (-2.0f64).exp()).abs() < 1e-15);
    assert!((poisson_pmf(2.0, 3) - 8.0 / 6.0 * (-2.0f64).exp()).abs() < 1e-15);
    let sp = OrderedStateSpace::range(0, 40).unwrap();
    // Bin(1, θ) against Poisson(θ): TV = θ(1 - e^{-θ}).
    for theta in [0.05, 0.1, 0.2] {
        let b = binomial_dist(sp.clone(), 1, theta).unwrap();
        let p = truncated_poisson(sp.clone(), theta).unwrap();
        let tv = total_variation(&b, &p).unwrap();
        assert!((tv - theta * (1.0 - (-theta).exp())).abs() < 1e-12, "θ = {theta}: {tv}");
    }
}

#[test]
fn lambda_rule_indexing() {
    let r = LambdaRule::from_values(vec![4.0, 3.0, 1.0]);
    assert_eq!(r.at(-2), 4.0);
    assert_eq!(r.at(0), 1.0);
    assert_eq!(r.at(-9), 4.0);
    assert!(r.validate(-2).is_ok());
}
