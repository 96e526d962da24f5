use proptest::prelude::*;

use k3cert_core::algebra::{gcd_poly, resultant};
use k3cert_core::bezout::{common_component, intersect, random_curve};
use k3cert_core::hyperkahler::{
    angle_matrices, build_jtriple, build_metric_raw, check_quaternion, check_quaternion_detail, identity, HKParams,
    KahlerAngles,
};
use k3cert_core::modp::{certify_coprime, certify_squarefree};
use k3cert_core::par::item_rng;
use k3cert_core::parse::{default_vars, parse_poly, render_poly};
use k3cert_core::projective::{ChartId, ProjPoint};
use k3cert_core::roots::UPoly;
use k3cert_core::{GaussRat, MultiPoly};

fn gauss() -> impl Strategy<Value = GaussRat> {
    (-6i64..=6, 1i64..=4, -6i64..=6, 1i64..=4).prop_map(|(a, b, c, d)| GaussRat::from_fracs(a, b, c, d))
}

fn nonzero_gauss() -> impl Strategy<Value = GaussRat> {
    gauss().prop_filter("nonzero", |g| !g.is_zero())
}

fn poly(nvars: usize, max_exp: u32, max_terms: usize) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((prop::collection::vec(0..=max_exp, nvars), gauss()), 0..=max_terms)
        .prop_map(move |terms| MultiPoly::from_terms(nvars, terms))
}

/// Homogeneous polynomial of degree `d` in `nvars` variables with a sparse
/// random support.
fn homogeneous(nvars: usize, d: u32) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((prop::collection::vec(0..=d, nvars - 1), gauss()), 1..=6).prop_map(move |terms| {
        let terms = terms.into_iter().filter_map(|(mut e, c)| {
            let s: u32 = e.iter().sum();
            (s <= d).then(|| {
                e.push(d - s);
                (e, c)
            })
        });
        MultiPoly::from_terms(nvars, terms)
    })
}

fn exact_point(n: usize) -> impl Strategy<Value = ProjPoint<GaussRat>> {
    prop::collection::vec(gauss(), n).prop_filter_map("nonzero point", |c| ProjPoint::new(c).ok())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn ring_laws(a in poly(3, 3, 5), b in poly(3, 3, 5), c in poly(3, 3, 5)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn euler_identity(f in homogeneous(4, 4)) {
        let vars: Vec<MultiPoly> = (0..4).map(|k| MultiPoly::var(4, k)).collect();
        let lhs = (0..4).fold(MultiPoly::zero(4), |acc, k| &acc + &(&vars[k] * &f.partial_derivative(k)));
        prop_assert_eq!(lhs, f.scale(&GaussRat::from_int(4)));
    }

    #[test]
    fn parse_render_round_trip(p in poly(4, 4, 6)) {
        let vars = default_vars(4);
        let text = render_poly(&p, &vars);
        prop_assert_eq!(parse_poly(&text, &vars).unwrap(), p);
    }

    #[test]
    fn projective_scaling(p in exact_point(4), s in nonzero_gauss(), f in homogeneous(4, 4)) {
        let q = p.scale(&s).unwrap();
        prop_assert!(p.proj_eq(&q));
        prop_assert_eq!(p.normalize(), q.normalize());
        let fp = f.evaluate_exact(p.coords()).unwrap();
        let fq = f.evaluate_exact(q.coords()).unwrap();
        prop_assert_eq!(fq, &fp * &s.pow(4));
    }

    #[test]
    fn chart_composition(p in exact_point(4), a in 0usize..4, b in 0usize..4, c in 0usize..4) {
        let nonzero = |k: usize| !p.coords()[k].is_zero();
        prop_assume!(nonzero(a) && nonzero(b) && nonzero(c));
        let ua = p.to_chart(ChartId(a)).unwrap();
        prop_assert!(ua.from_chart().proj_eq(&p));
        let via = ua.transition(ChartId(b)).unwrap().transition(ChartId(c)).unwrap();
        prop_assert_eq!(via, ua.transition(ChartId(c)).unwrap());
    }

    #[test]
    fn quaternion_relations(seed in any::<u64>(), s in 1.0f64..6.0, f1abs in 0.05f64..20.0) {
        let params = HKParams::random(&mut item_rng(seed, 0));
        let t = build_jtriple(&params).unwrap();
        let m = build_metric_raw(&params, s, f1abs).unwrap();
        prop_assert!(check_quaternion(&t, &m) <= 1e-12);
        let angles = KahlerAngles::random_valid(&mut item_rng(seed, 1));
        prop_assert!(check_quaternion_detail(&angle_matrices(&angles).unwrap(), &identity()).max() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn resultant_vanishes_iff_common_factor(
        a in homogeneous(3, 2),
        b in homogeneous(3, 2),
        g in homogeneous(3, 1),
    ) {
        let z = 2;
        prop_assume!(a.involves(z) && b.involves(z));
        let r = resultant(&a, &b, z).unwrap();
        let shared = gcd_poly(&a, &b).unwrap().involves(z);
        prop_assert_eq!(r.is_zero(), shared);

        prop_assume!(g.involves(z));
        prop_assert!(resultant(&(&a * &g), &(&b * &g), z).unwrap().is_zero());
    }

    #[test]
    fn modular_certificates_never_miss_a_shared_factor(
        a in homogeneous(3, 2),
        b in homogeneous(3, 2),
        g in homogeneous(3, 1),
        u in prop::collection::vec(gauss(), 2..5),
    ) {
        prop_assume!(!a.is_zero() && !b.is_zero() && !g.is_zero());
        prop_assert!(!certify_coprime(&(&a * &g), &(&b * &g)));
        let u = UPoly::new(u);
        prop_assume!(u.degree() >= 1);
        let square = UPoly::new(
            (0..=2 * u.degree())
                .map(|k| {
                    (0..=k).filter(|&i| i <= u.degree() && k - i <= u.degree())
                        .fold(GaussRat::zero(), |acc, i| &acc + &(&u.0[i] * &u.0[k - i]))
                })
                .collect(),
        );
        prop_assert!(!certify_squarefree(&square));
    }

    #[test]
    fn multiplicities_sum_to_degree_product(seed in any::<u64>(), n in 1u32..=3, m in 1u32..=3) {
        let mut rng = item_rng(seed, 0);
        let c = random_curve(&mut rng, n);
        let d = random_curve(&mut rng, m);
        prop_assume!(common_component(&c, &d).is_none());
        let r = intersect(&c, &d, seed).unwrap();
        prop_assert_eq!(r.total, (n * m) as usize);
        prop_assert_eq!(r.points.iter().map(|p| p.multiplicity).sum::<usize>(), r.total);
    }

    #[test]
    fn product_curves_count_with_multiplicity(seed in any::<u64>()) {
        // A doubled line meets a conic in the same points as the line, each twice.
        let mut rng = item_rng(seed, 1);
        let line = random_curve(&mut rng, 1);
        let conic = random_curve(&mut rng, 2);
        prop_assume!(common_component(&line, &conic).is_none());
        let doubled = k3cert_core::bezout::PlaneCurve::new(line.poly() * line.poly()).unwrap();
        let single = intersect(&line, &conic, seed).unwrap();
        let double = intersect(&doubled, &conic, seed).unwrap();
        prop_assert_eq!(double.total, 2 * single.total);
        for p in &single.points {
            let twin = double.points.iter().find(|q| q.point.approx_eq(&p.point, 1e-6));
            prop_assert!(twin.is_some_and(|q| q.multiplicity == 2 * p.multiplicity));
        }
    }
}
