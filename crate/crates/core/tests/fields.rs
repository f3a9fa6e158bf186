use std::f64::consts::{PI, TAU};

use nodal_core::fields::syntax::parse_field;
use nodal_core::fields::{
    eval_chart_jet, expand_random, nondegeneracy_scan, Field, FieldSpec, HarmonicTerm, RandomTrig,
    SphericalHarmonicSum,
};
use nodal_core::geometry::{metric_at, ManifoldSpec, Vector, ZERO_VECTOR};
use nodal_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn chart_jet_examples() {
    let m1 = ManifoldSpec::torus(1).unwrap();
    let j = eval_chart_jet(&parse_field("trig:[k=1,a=0,b=1]").unwrap(), &m1, &[0.25]).unwrap();
    assert!(close(j.f, 1.0, 1e-15));
    assert!(close(j.df[0], 0.0, 1e-12));
    assert!(close(j.d2f[0][0], -4.0 * PI * PI, 1e-12));

    let m2 = ManifoldSpec::torus(2).unwrap();
    let j = eval_chart_jet(&parse_field("trig:[k=(1,0),a=1,b=0]").unwrap(), &m2, &[0.0, 0.5]).unwrap();
    assert_eq!(j.f, 1.0);
    assert_eq!(&j.df[..2], &[0.0, 0.0]);
    assert!(close(j.d2f[0][0], -4.0 * PI * PI, 1e-12));
    assert_eq!((j.d2f[0][1], j.d2f[1][0], j.d2f[1][1]), (0.0, 0.0, 0.0));

    let s = ManifoldSpec::UnitSphere2;
    let j = eval_chart_jet(&parse_field("sph:[l=1,m=0,c=1]").unwrap(), &s, &[PI / 3.0, 0.0]).unwrap();
    assert!(close(j.f, 0.5, 1e-15));
    assert!(close(j.df[0], -(3f64.sqrt()) / 2.0, 1e-15));
    assert!(close(j.df[1], 0.0, 1e-15));
    assert!(close(j.d2f[0][0], -0.5, 1e-15));
}

#[test]
fn dimension_mismatch_is_a_config_error() {
    let m3 = ManifoldSpec::torus(3).unwrap();
    let err = eval_chart_jet(&parse_field("trig:[k=(1,0),b=1]").unwrap(), &m3, &[0.1, 0.2, 0.3]);
    assert!(matches!(err, Err(Error::Config(_))));
    let err = Field::new(&parse_field("sph:[l=1,c=1]").unwrap(), &m3);
    assert!(matches!(err, Err(Error::Config(_))));
    let err = Field::new(&parse_field("sph:[l=7,c=1]").unwrap(), &ManifoldSpec::UnitSphere2);
    assert!(matches!(err, Err(Error::Config(_))));
    let err = Field::new(&parse_field("trig:[k=0.5,b=1]").unwrap(), &ManifoldSpec::torus(1).unwrap());
    assert!(matches!(err, Err(Error::Config(_))));
}

#[test]
fn covariant_jet_examples() {
    let s = ManifoldSpec::UnitSphere2;
    let f = Field::new(&parse_field("sph:[l=1,c=1]").unwrap(), &s).unwrap();

    let j = f.covariant_jet(&[PI / 3.0, 0.0, 0.0]);
    assert!(close(j.laplacian, -1.0, 1e-14));
    let sin = (PI / 3.0).sin();
    assert!(close(j.hess[1][1], -sin * sin * 0.5, 1e-15));

    let j = f.covariant_jet(&[PI / 2.0, 0.0, 0.0]);
    assert!(close(j.f, 0.0, 1e-16));
    assert!(close(j.grad_norm, 1.0, 1e-15));
    assert!(close(j.eta, 1.0, 1e-15));
    let exact = eval_chart_jet(&parse_field("sph:[l=1,c=0]").unwrap(), &s, &[PI / 2.0, 0.0]).unwrap();
    assert_eq!(exact.f, 0.0);

    // Flat charts: hess = d2f, grad = df.
    let t = ManifoldSpec::torus(2).unwrap();
    let spec = parse_field("random:[dim=2,max_freq=2,seed=5]").unwrap();
    let f = Field::new(&spec, &t).unwrap();
    let p = [0.31, 0.77, 0.0];
    let (c, j) = (f.chart_jet(&p), f.covariant_jet(&p));
    assert_eq!(j.grad, c.df);
    assert_eq!(j.hess, c.d2f);
    assert_eq!(j.laplacian, c.d2f[0][0] + c.d2f[1][1]);
    assert_eq!(j.ric_qf, 0.0);
}

#[test]
fn sigma_follows_the_sign_of_f() {
    let t = ManifoldSpec::torus(1).unwrap();
    let f = Field::new(&parse_field("trig:[k=1,a=1]").unwrap(), &t).unwrap();
    assert_eq!(f.covariant_jet(&[0.0, 0.0, 0.0]).sigma, 1);
    assert_eq!(f.covariant_jet(&[0.5, 0.0, 0.0]).sigma, -1);
    let zero = Field::new(&parse_field("trig:[k=1,a=0,b=0]").unwrap(), &t).unwrap();
    assert_eq!(zero.covariant_jet(&[0.3, 0.0, 0.0]).sigma, 0);
}

/// Every builtin family on the manifolds it lives on, with a sampler for
/// chart points well inside the chart.
fn families() -> Vec<(ManifoldSpec, FieldSpec)> {
    let mut out = vec![
        (ManifoldSpec::torus(1).unwrap(), parse_field("trig:[k=1,b=1;k=3,a=0.4,b=-0.2]").unwrap()),
        (ManifoldSpec::torus(2).unwrap(), parse_field("trig:[k=(1,0),b=1;k=(2,-1),a=0.5;k=(0,1),a=0.4,b=0.2]").unwrap()),
        (ManifoldSpec::torus(3).unwrap(), parse_field("trig:[k=(0,0,1),b=1;k=(1,-1,2),a=0.3]").unwrap()),
        (ManifoldSpec::flat_box(1).unwrap(), parse_field("trig:[k=1.25,a=0.9,b=-0.3]").unwrap()),
        (ManifoldSpec::flat_box(2).unwrap(), parse_field("trig:[k=(0.7,1.3),a=1,b=0.2;k=(0,0),a=0.1]").unwrap()),
        (ManifoldSpec::flat_box(1).unwrap(), parse_field("poly:[e=(3),c=2;e=(1),c=-1;e=(0),c=0.1]").unwrap()),
        (ManifoldSpec::flat_box(2).unwrap(), parse_field("poly:[e=(2,1),c=1;e=(0,3),c=-0.5;e=(1,0),c=0.3]").unwrap()),
    ];
    for dim in 1..=3 {
        out.push((
            ManifoldSpec::torus(dim).unwrap(),
            FieldSpec::Random(RandomTrig { dim, max_freq: 3, seed: 11 + dim as u64, scale: 1.0 }),
        ));
    }
    for l in 0..=6u32 {
        for m in -(l as i32)..=(l as i32) {
            out.push((
                ManifoldSpec::UnitSphere2,
                FieldSpec::Sph(SphericalHarmonicSum { terms: vec![HarmonicTerm { l, m, c: 1.0 }] }),
            ));
        }
    }
    out
}

fn sample_point(m: &ManifoldSpec, rng: &mut ChaCha8Rng) -> Vector {
    let mut p = ZERO_VECTOR;
    match m {
        ManifoldSpec::UnitSphere2 => {
            p[0] = rng.random_range(0.1..PI - 0.1);
            p[1] = rng.random_range(0.0..TAU);
        }
        _ => {
            for x in p.iter_mut().take(m.dim()) {
                *x = rng.random_range(0.05..0.95);
            }
        }
    }
    p
}

/// `df` is checked against central differences of values and `d2f` against
/// central differences of the (so verified) `df`, both with step `H`. A
/// second difference of values would sit at the rounding floor
/// `4 eps |f| / H^2 ~ 1e-6 |f|` for slowly varying fields.
///
/// Relative errors are measured against the largest first (second)
/// derivative seen for the family, so points where the derivatives cancel
/// do not turn round-off into large ratios.
#[test]
fn jets_match_central_differences() {
    const H: f64 = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (m, spec) in families() {
        let field = Field::new(&spec, &m).unwrap();
        let n = m.dim();
        let shifted = |p: &Vector, d: usize, h: f64| {
            let mut q = *p;
            q[d] += h;
            q
        };
        let (mut df_scale, mut d2_scale) = (1.0f64, 1.0f64);
        let (mut df_err, mut d2_err) = (0.0f64, 0.0f64);
        for _ in 0..100 {
            let p = sample_point(&m, &mut rng);
            let jet = field.chart_jet(&p);
            assert_eq!(jet.f, field.value(&p), "{spec:?}");
            for i in 0..n {
                let (qp, qm) = (shifted(&p, i, H), shifted(&p, i, -H));
                let step = qp[i] - qm[i];
                df_scale = df_scale.max(jet.df[i].abs());
                let fd = (field.value(&qp) - field.value(&qm)) / step;
                df_err = df_err.max((fd - jet.df[i]).abs());
                let (up, down) = (field.chart_jet(&qp), field.chart_jet(&qm));
                for j in 0..n {
                    d2_scale = d2_scale.max(jet.d2f[i][j].abs());
                    let fd2 = (up.df[j] - down.df[j]) / step;
                    d2_err = d2_err.max((fd2 - jet.d2f[i][j]).abs());
                    assert_eq!(jet.d2f[i][j], jet.d2f[j][i]);
                }
            }
        }
        let (rel1, rel2) = (df_err / df_scale, d2_err / d2_scale);
        assert!(rel1 < 1e-6 && rel2 < 1e-6, "{m} {spec:?}: relative errors {rel1:e}, {rel2:e}");
    }
}

#[test]
fn covariant_identities_hold_at_sampled_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (m, spec) in families() {
        let field = Field::new(&spec, &m).unwrap();
        let n = m.dim();
        for _ in 0..100 {
            let p = sample_point(&m, &mut rng);
            let j = field.covariant_jet(&p);
            let g = metric_at(&m, &p[..n]).unwrap();

            let scale = 1.0 + j.hess_hs_sq;
            // Tracefree part with indices raised by g_inv.
            let mut trace_free = [[0.0; 3]; 3];
            for a in 0..n {
                for b in 0..n {
                    trace_free[a][b] = j.hess[a][b] - j.laplacian / n as f64 * g.g[a][b];
                }
            }
            let mut tf_sq = 0.0;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            tf_sq += g.g_inv[a][c] * g.g_inv[b][d] * trace_free[a][b] * trace_free[c][d];
                        }
                    }
                }
            }
            let defect = j.hess_hs_sq - j.laplacian * j.laplacian / n as f64 - tf_sq;
            assert!(defect.abs() <= 1e-10 * scale, "tracefree defect {defect:e} for {spec:?}");

            let pairing = g.inner(&j.grad, &j.nabla_grad);
            let tol = 1e-10 * (1.0 + j.hess_qf.abs() + j.grad_norm.powi(2) * j.hess_hs_sq.sqrt());
            assert!(close(pairing, j.hess_qf, tol), "pairing {pairing} vs {}", j.hess_qf);

            let eta = (j.f * j.f + j.grad_norm * j.grad_norm).sqrt();
            assert!(close(j.eta, eta, 4.0 * f64::EPSILON * eta));
            assert_eq!(j.sigma, if j.f > 0.0 { 1 } else if j.f < 0.0 { -1 } else { 0 });

            if let FieldSpec::Sph(s) = &spec {
                let l = s.terms[0].l as f64;
                let residual = j.laplacian + l * (l + 1.0) * j.f;
                assert!(residual.abs() <= 1e-8, "eigenfunction residual {residual:e} for {spec:?}");
            }
        }
    }
}

#[test]
fn nondegeneracy_scan_examples() {
    let t2 = ManifoldSpec::torus(2).unwrap();
    let product = parse_field("trig:[k=(1,1),a=0.5;k=(1,-1),a=-0.5]").unwrap();
    let scan = nondegeneracy_scan(&product, &t2, 64).unwrap();
    assert!(scan.min_eta < 1e-12);
    assert!(scan.is_degenerate());
    assert!(matches!(scan.check(), Err(Error::Degenerate { .. })));

    let lines = parse_field("trig:[k=(1,0),b=1]").unwrap();
    let scan = nondegeneracy_scan(&lines, &t2, 64).unwrap();
    assert!(close(scan.min_eta, 1.0, 1e-12));
    assert!(scan.check().is_ok());

    let t1 = ManifoldSpec::torus(1).unwrap();
    let lifted = parse_field("trig:[k=0,a=2;k=1,b=1]").unwrap();
    let scan = nondegeneracy_scan(&lifted, &t1, 64).unwrap();
    assert!(close(scan.min_eta, 1.0, 1e-12));
    assert!(close(scan.argmin[0], 0.75, 1e-15));

    assert!(matches!(nondegeneracy_scan(&lines, &t2, 4), Err(Error::Usage(_))));
}

#[test]
fn random_expansion_matches_golden_file() {
    let golden = FieldSpec::from_json(include_str!("data/random_dim2_freq3_seed42.json")).unwrap();
    let spec = RandomTrig { dim: 2, max_freq: 3, seed: 42, scale: 1.0 };
    let expanded = FieldSpec::Trig(expand_random(&spec));
    assert_eq!(expanded, golden);
    // Bitwise, including the serialized form.
    assert_eq!(expanded.to_json(), FieldSpec::Trig(expand_random(&spec)).to_json());
}

#[test]
fn random_expansion_depends_only_on_its_parameters() {
    let base = RandomTrig { dim: 3, max_freq: 2, seed: 9, scale: 2.5 };
    assert_eq!(expand_random(&base), expand_random(&base.clone()));
    let other_seed = RandomTrig { seed: 10, ..base.clone() };
    assert_ne!(expand_random(&base), expand_random(&other_seed));
    let zero = expand_random(&RandomTrig { scale: 0.0, ..base.clone() });
    assert!(zero.terms.iter().all(|t| t.a == 0.0 && t.b == 0.0));
    // Zero fields are rejected downstream.
    let scan = nondegeneracy_scan(
        &FieldSpec::Random(RandomTrig { scale: 0.0, ..base }),
        &ManifoldSpec::torus(3).unwrap(),
        8,
    )
    .unwrap();
    assert!(scan.is_degenerate());
}

#[test]
fn json_round_trip_for_every_family() {
    for (_, spec) in families() {
        let back = FieldSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
    }
}

#[test]
fn evaluation_is_bitwise_deterministic() {
    let t3 = ManifoldSpec::torus(3).unwrap();
    let spec = parse_field("random:[dim=3,max_freq=2,seed=7]").unwrap();
    let a = Field::new(&spec, &t3).unwrap();
    let b = Field::new(&spec, &t3).unwrap();
    let p = [0.123, 0.456, 0.789];
    assert_eq!(a.covariant_jet(&p), b.covariant_jet(&p));
}
