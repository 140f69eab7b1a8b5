use filtra_core::chain::{quantile_updating, LevelKernel, LeveledChain};
use filtra_core::probcore::{
    quantile_coupling, stochastically_dominates, total_variation, Dist, OrderedStateSpace, Space,
};
use filtra_core::scalar::{Exact, Scalar};
use filtra_core::standardness::coordinate_immersion_check;
use filtra_core::transport::{kantorovich, kantorovich_line, kantorovich_lp, lift_metric, LevelMetric, LiftStrategy};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Exact {
    Exact::from_ratio(n, d)
}

fn space(n: usize) -> Space {
    OrderedStateSpace::range(0, n as i64 - 1).unwrap()
}

fn exact_dist(sp: &Space, w: &[u32]) -> Dist<Exact> {
    Dist::new(sp.clone(), w.iter().map(|&x| q(x as i64, 1)).collect()).unwrap()
}

/// Nonnegative integer weights with at least one positive entry.
fn weights(n: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..6, n).prop_map(|mut w| {
        if w.iter().all(|&x| x == 0) {
            w[0] = 1;
        }
        w
    })
}

/// Strictly increasing integer positions, as a line metric.
fn positions(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(1i64..5, n).prop_map(|steps| {
        steps
            .iter()
            .scan(0i64, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect()
    })
}

fn line_metric(sp: &Space, pos: &[i64]) -> LevelMetric<Exact> {
    LevelMetric::from_positions(sp.clone(), pos.iter().map(|&p| q(p, 1)).collect()).unwrap()
}

/// L1 distances between random points of Z², a generally non-linear metric.
fn planar_metric(sp: &Space, pts: &[(i64, i64)]) -> LevelMetric<Exact> {
    let n = pts.len();
    let values = (0..n * n)
        .map(|k| {
            let (a, b) = (pts[k / n], pts[k % n]);
            q((a.0 - b.0).abs() + (a.1 - b.1).abs(), 1)
        })
        .collect();
    LevelMetric::from_matrix(sp.clone(), values).unwrap()
}

/// Rows of a monotone kernel as integer masses summing to `total`: the CDF
/// grid is nondecreasing along each row and nonincreasing down the rows.
fn monotone_rows(src: usize, dst: usize, total: u32) -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec(prop::collection::vec(0..=total, dst), src).prop_map(move |raw| {
        let mut cdf: Vec<Vec<u32>> = raw
            .iter()
            .map(|r| {
                let mut run = 0;
                let mut row: Vec<u32> = r
                    .iter()
                    .map(|&c| {
                        run = run.max(c);
                        run
                    })
                    .collect();
                *row.last_mut().unwrap() = total;
                row
            })
            .collect();
        for x in 1..src {
            for t in 0..dst {
                cdf[x][t] = cdf[x][t].min(cdf[x - 1][t]);
            }
        }
        cdf.iter()
            .map(|row| {
                let mut prev = 0;
                row.iter()
                    .map(|&c| {
                        let m = c - prev;
                        prev = c;
                        m
                    })
                    .collect()
            })
            .collect()
    })
}

fn kernel_from_masses(src: &Space, dst: &Space, rows: &[Vec<u32>]) -> LevelKernel<Exact> {
    let dists: Vec<Dist<Exact>> = rows.iter().map(|r| exact_dist(dst, r)).collect();
    LevelKernel::from_dists(src.clone(), dst.clone(), &dists).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dominance_iff_quantile_coupling_is_ordered(n in 2usize..7, seed in any::<u64>()) {
        let sp = space(n);
        let mut rng = seed;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng >> 33) % 5) as u32
        };
        let mut wa: Vec<u32> = (0..n).map(|_| next()).collect();
        let mut wb: Vec<u32> = (0..n).map(|_| next()).collect();
        wa[0] += 1;
        wb[n - 1] += 1;
        let (mu, nu) = (exact_dist(&sp, &wa), exact_dist(&sp, &wb));
        let plan = quantile_coupling(&mu, &nu).unwrap();
        prop_assert!(plan.check_margins(&mu, &nu));
        prop_assert_eq!(stochastically_dominates(&nu, &mu).unwrap(), plan.is_below());
    }

    #[test]
    fn total_variation_is_a_metric(wa in weights(5), wb in weights(5), wc in weights(5)) {
        let sp = space(5);
        let (a, b, c) = (exact_dist(&sp, &wa), exact_dist(&sp, &wb), exact_dist(&sp, &wc));
        let ab = total_variation(&a, &b).unwrap();
        prop_assert_eq!(&ab, &total_variation(&b, &a).unwrap());
        prop_assert!(ab <= total_variation(&a, &c).unwrap() + total_variation(&c, &b).unwrap());
        prop_assert_eq!(ab.is_negligible(), a == b);
        prop_assert!(ab <= q(1, 1));
    }

    #[test]
    fn kantorovich_is_symmetric_and_triangular(
        pts in prop::collection::vec((0i64..6, 0i64..6), 4),
        wa in weights(4), wb in weights(4), wc in weights(4),
    ) {
        let sp = space(4);
        let rho = planar_metric(&sp, &pts);
        let (a, b, c) = (exact_dist(&sp, &wa), exact_dist(&sp, &wb), exact_dist(&sp, &wc));
        let ab = kantorovich(&a, &b, &rho).unwrap();
        prop_assert_eq!(&ab, &kantorovich(&b, &a, &rho).unwrap());
        prop_assert_eq!(&ab, &kantorovich_lp(&a, &b, &rho).unwrap());
        prop_assert!(ab <= kantorovich(&a, &c, &rho).unwrap() + kantorovich(&c, &b, &rho).unwrap());
        prop_assert!(kantorovich(&a, &a, &rho).unwrap().is_negligible());
    }

    #[test]
    fn line_formula_matches_lp(pos in positions(6), wa in weights(6), wb in weights(6)) {
        let sp = space(6);
        let rho = line_metric(&sp, &pos);
        let (a, b) = (exact_dist(&sp, &wa), exact_dist(&sp, &wb));
        prop_assert_eq!(kantorovich_line(&a, &b, &rho).unwrap(), kantorovich_lp(&a, &b, &rho).unwrap());
    }

    #[test]
    fn monotone_lift_of_a_line_metric_is_linear(rows in monotone_rows(5, 4, 12), pos in positions(4)) {
        let (src, dst) = (space(5), space(4));
        let k = kernel_from_masses(&src, &dst, &rows);
        prop_assert!(k.is_monotonic().unwrap());
        let rho = line_metric(&dst, &pos);
        let lp = lift_metric(&rho, &k, LiftStrategy::Lp).unwrap();
        prop_assert!(lp.linearity_holds());
        let emb = lift_metric(&rho, &k, LiftStrategy::Embedding).unwrap();
        prop_assert_eq!(lp.to_matrix(), emb.to_matrix());
    }

    #[test]
    fn quantile_updating_pushes_forward_to_the_row(rows in prop::collection::vec(weights(5), 4)) {
        let (src, dst) = (space(4), space(5));
        let k = kernel_from_masses(&src, &dst, &rows);
        let f = quantile_updating(&k).unwrap();
        for x in 0..4 {
            let mut push = vec![q(0, 1); 5];
            for (y, w) in f.pushforward(x) {
                push[y] += &w;
            }
            let row: Vec<Exact> = (0..5).map(|y| k.get(x, y)).collect();
            prop_assert_eq!(push, row);
        }
    }

    #[test]
    fn immersion_check_matches_brute_force(
        first in prop::collection::vec(weights(2), 2),
        second in prop::collection::vec(weights(2), 4),
        free in prop::collection::vec(weights(4), 4),
        scramble in prop::collection::vec(any::<bool>(), 4),
    ) {
        // States (a, b) with a, b in {0, 1}. A structured row factorizes as
        // P_a(a') Q_ab(b'); a scrambled row is arbitrary.
        let coords: Vec<Vec<i64>> = (0..2).flat_map(|a| (0..2).map(move |b| vec![a, b])).collect();
        let src = OrderedStateSpace::coordinates(-1, coords.clone()).unwrap();
        let dst = OrderedStateSpace::coordinates(0, coords.clone()).unwrap();
        let rows: Vec<Vec<u32>> = (0..4)
            .map(|x| {
                if scramble[x] {
                    free[x].clone()
                } else {
                    let a = coords[x][0] as usize;
                    (0..4).map(|y| first[a][coords[y][0] as usize] * second[x][coords[y][1] as usize]).collect()
                }
            })
            .map(|mut r: Vec<u32>| {
                if r.iter().all(|&m| m == 0) {
                    r[0] = 1;
                }
                r
            })
            .collect();
        let k = kernel_from_masses(&src, &dst, &rows);
        let chain = LeveledChain::from_kernels("blocks", Dist::uniform(src.clone()), vec![k.clone()]).unwrap();
        // Brute force: the first-coordinate law of a row depends only on the first coordinate.
        let law = |x: usize| -> Vec<Exact> {
            let mut out = vec![q(0, 1); 2];
            for y in 0..4 {
                out[coords[y][0] as usize] += &k.get(x, y);
            }
            out
        };
        let brute = (0..4).all(|x| (0..4).all(|xp| coords[x][0] != coords[xp][0] || law(x) == law(xp)));
        prop_assert_eq!(coordinate_immersion_check(&chain, 0).unwrap(), brute);
    }
}
