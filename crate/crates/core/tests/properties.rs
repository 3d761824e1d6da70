use num_traits::One;
use proptest::prelude::*;
use walklab::cartan::{cartan_projection_exact, iwasawa_cocycle, transport, Flag, Mat};
use walklab::empirical::{weyl_sum, EmpiricalMeasure};
use walklab::llt::{lattice_dp, LatticeDist};
use walklab::model::{apply, chi_of_word, torus_distance, word_product, ExactPoint, StateXT, TorusPoint, WalkConfig, Word};
use walklab::orbits::rational_orbit;
use walklab::walk::run_word;

fn word(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0usize..4, 0..=max_len).prop_map(Word::new)
}

fn nonempty_word(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0usize..4, 1..=max_len).prop_map(Word::new)
}

fn float_product(cfg: &WalkConfig, w: &Word) -> Mat {
    let g = word_product(w, cfg).unwrap();
    Mat::square(cfg.dim, g.matrix.to_f64())
}

fn line_dist(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    u.iter().zip(v).map(|(a, b)| (b - dot * a).powi(2)).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn products_have_unit_determinant(w in nonempty_word(40)) {
        let cfg = WalkConfig::reference();
        prop_assert!(word_product(&w, &cfg).unwrap().matrix.det().is_one());
    }

    #[test]
    fn chi_is_additive(a in word(30), b in word(30)) {
        let cfg = WalkConfig::reference();
        prop_assert_eq!(chi_of_word(&a.concat(&b), &cfg), chi_of_word(&a, &cfg) + chi_of_word(&b, &cfg));
    }

    #[test]
    fn exact_and_float_actions_agree(p0 in 0i64..50, p1 in 0i64..50, q in 1i64..50, w in word(20)) {
        let cfg = WalkConfig::reference();
        let exact = StateXT::new(TorusPoint::exact(&[(p0 % q, q), (p1 % q, q)]).unwrap(), 0.0);
        let float = StateXT::new(TorusPoint::float(&exact.x.to_f64()), 0.0);
        let a = run_word(&cfg, &exact, &w).unwrap();
        let b = run_word(&cfg, &float, &w).unwrap();
        for (s, t) in a.states.iter().zip(&b.states) {
            let (x, y) = (s.x.to_f64(), t.x.to_f64());
            for i in 0..2 {
                prop_assert!(torus_distance(&[x[i]], &[y[i]]) <= 1e-9);
            }
            prop_assert_eq!(s.t, t.t);
        }
    }

    #[test]
    fn action_composes(g in 0usize..4, h in 0usize..4, p in 0i64..12, q in 1i64..12) {
        let cfg = WalkConfig::reference();
        let s = StateXT::new(TorusPoint::exact(&[(p % q, q), (1, q + 1)]).unwrap(), 0.5);
        let single = |l| word_product(&Word::new(vec![l]), &cfg).unwrap();
        let twice = apply(&single(g), &apply(&single(h), &s).unwrap()).unwrap();
        let once = apply(&word_product(&Word::new(vec![g, h]), &cfg).unwrap(), &s).unwrap();
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn transpose_swaps_bases_and_keeps_kappa(w in nonempty_word(25)) {
        let cfg = WalkConfig::reference();
        let g = word_product(&w, &cfg).unwrap().matrix;
        let f = cartan_projection_exact(&g).unwrap();
        let ft = cartan_projection_exact(&g.transpose()).unwrap();
        for (a, b) in f.kappa.iter().zip(&ft.kappa) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
        if f.gap(0) > 1e-6 {
            prop_assert!(line_dist(&f.left_basis.col(0), &ft.right_basis.col(0)) <= 1e-8);
            prop_assert!(line_dist(&f.right_basis.col(0), &ft.left_basis.col(0)) <= 1e-8);
        }
    }

    #[test]
    fn top_kappa_is_subadditive(a in nonempty_word(25), b in nonempty_word(25)) {
        let cfg = WalkConfig::reference();
        let (g, h) = (word_product(&a, &cfg).unwrap().matrix, word_product(&b, &cfg).unwrap().matrix);
        let k = |m: &walklab::model::IntMatrix| cartan_projection_exact(m).unwrap().kappa[0];
        prop_assert!(k(&g.mul(&h).unwrap()) <= k(&g) + k(&h) + 1e-9);
    }

    #[test]
    fn iwasawa_cocycle_identity(a in nonempty_word(15), b in nonempty_word(15)) {
        let cfg = WalkConfig::reference();
        let (g, h) = (float_product(&cfg, &a), float_product(&cfg, &b));
        let xi = Flag::generic(2);
        let (h_xi, sigma_h) = transport(&h, &xi).unwrap();
        let lhs = iwasawa_cocycle(&g.mul(&h), &xi).unwrap();
        let sigma_g = iwasawa_cocycle(&g, &h_xi).unwrap();
        for i in 0..2 {
            let rhs = sigma_g[i] + sigma_h[i];
            prop_assert!((lhs[i] - rhs).abs() <= 1e-8 * (1.0 + lhs[i].abs()));
        }
    }

    #[test]
    fn orbits_are_closed_and_bounded(p0 in 0i64..9, p1 in 0i64..9, q in 1i64..9) {
        let cfg = WalkConfig::reference();
        let x = ExactPoint::from_fractions(&[(p0 % q, q), (p1 % q, q)]).unwrap();
        let orbit = rational_orbit(&x, &cfg).unwrap();
        prop_assert!(orbit.len() as i64 <= q * q);
        for p in &orbit.points {
            for l in 0..cfg.num_generators() {
                prop_assert!(orbit.contains(&p.apply(&cfg.generators[l].matrix).unwrap()));
            }
        }
    }
}

#[test]
fn lattice_dp_is_exactly_normalized() {
    let dist = LatticeDist::from_config(&WalkConfig::reference()).unwrap();
    for n in [1, 2, 7, 50, 300] {
        assert!(lattice_dp(&dist, n).unwrap().exact_total().unwrap().is_one(), "n = {n}");
    }
}

#[test]
fn weyl_sum_at_zero_frequency_is_one() {
    let states = (0..37).map(|i| StateXT::new(TorusPoint::float(&[i as f64 * 0.1, 0.3]), i as f64)).collect();
    let m = EmpiricalMeasure::uniform(states);
    let z = weyl_sum(&m, &[0, 0]);
    assert_eq!((z.re, z.im), (1.0, 0.0));
}
