use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use super::pde::{scenario_terms, unified_terms};
use super::*;
use crate::grid::{Grid2, Hessian2};
use crate::optics::{reflect, refract};

fn assert_dir(t: &UnitDirection, e: [f64; 3]) {
    for k in 0..3 {
        assert_abs_diff_eq!(t.to_array()[k], e[k], epsilon = 1e-12);
    }
}

fn uniform_cap(axis: CapAxis, theta_max: f64, g: f64) -> TargetSpec {
    TargetSpec {
        axis,
        theta_min: 0.0,
        theta_max,
        intensity: TargetIntensity::Uniform(g),
    }
}

fn scenario(transport: Transport, kind: SourceKind, n1: f64, n2: f64) -> Scenario {
    let axis = if transport == Transport::Reflect { CapAxis::Down } else { CapAxis::Up };
    Scenario {
        transport,
        source: SourceSpec {
            kind,
            domain: PlanarRegion::disk(0.5),
            intensity: SourceIntensity::Gaussian { peak: 1.3, sigma: 0.4 },
        },
        target: TargetSpec {
            axis,
            theta_min: 0.0,
            theta_max: 0.7,
            intensity: TargetIntensity::Gaussian { peak: 0.8, sigma: 0.5 },
        },
        media: MediumPair::new(n1, n2).unwrap(),
    }
}

fn all_scenarios() -> Vec<Scenario> {
    vec![
        scenario(Transport::Reflect, SourceKind::Collimated, 1.0, 1.0),
        scenario(Transport::Reflect, SourceKind::Point, 1.0, 1.0),
        scenario(Transport::Refract, SourceKind::Collimated, 1.0, 1.5),
        scenario(Transport::Refract, SourceKind::Point, 1.0, 1.5),
        scenario(Transport::Reflect, SourceKind::Point, 1.33, 1.33),
        scenario(Transport::Refract, SourceKind::Point, 1.5, 1.0),
    ]
}

#[test]
fn collimated_reflection_examples() {
    assert_dir(&collimated_reflection_t([0.0, 0.0].into()).unwrap(), [0.0, 0.0, -1.0]);
    let t = collimated_reflection_t([0.6, 0.0].into()).unwrap();
    assert_dir(&t, [-0.6, 0.0, -0.8]);
    let oracle = reflect(&UnitDirection::E3, &UnitDirection::E3, [0.6, 0.0].into(), 1.0).unwrap();
    assert_dir(&t, oracle.m.to_array());
    let t = collimated_reflection_t([0.3, 0.4].into()).unwrap();
    assert_dir(&t, [-0.3, -0.4, -0.75f64.sqrt()]);
    assert_abs_diff_eq!(t.as_vector().norm(), 1.0, epsilon = 1e-15);
    assert!(matches!(collimated_reflection_t([0.6, 0.8].into()), Err(Error::EvanescentRay { .. })));
}

#[test]
fn point_reflection_examples() {
    assert_dir(&point_reflection_t(0.0, 0.0, TangentialGradient::ZERO).unwrap(), [0.0, 0.0, -1.0]);
    let s = 0.5f64.sqrt();
    let t = point_reflection_t(1.0, 0.0, TangentialGradient::ZERO).unwrap();
    assert_dir(&t, [s, 0.0, -s]);
    let x = UnitDirection::through_plane_point(1.0, 0.0);
    assert_dir(&t, reflect(&x, &UnitDirection::E3, TangentialGradient::ZERO, 1.0).unwrap().m.to_array());
    assert_dir(&point_reflection_t(1.0, 0.0, [s, 0.0].into()).unwrap(), [0.0, 0.0, -1.0]);
}

#[test]
fn collimated_refraction_examples() {
    let glass = MediumPair::new(1.0, 1.5).unwrap();
    assert_dir(&collimated_refraction_t(TangentialGradient::ZERO, &glass).unwrap(), [0.0, 0.0, 1.0]);
    let t = collimated_refraction_t([-0.75, 0.0].into(), &glass).unwrap();
    assert_dir(&t, [0.5, 0.0, 0.75f64.sqrt()]);
    for n1 in [1.0, 1.2, 2.0] {
        let media = MediumPair::new(n1, 1.5).unwrap();
        let oracle = refract(&UnitDirection::E3, &UnitDirection::E3, [-0.75, 0.0].into(), &media).unwrap();
        assert_dir(&t, oracle.m.to_array());
    }
    assert!(matches!(
        collimated_refraction_t([0.9, 1.2].into(), &glass),
        Err(Error::EvanescentRay { .. })
    ));
}

#[test]
fn point_refraction_examples() {
    let glass = MediumPair::new(1.0, 1.5).unwrap();
    assert_dir(&point_refraction_t(0.0, 0.0, TangentialGradient::ZERO, &glass).unwrap(), [0.0, 0.0, 1.0]);
    let s = 0.5f64.sqrt();
    let same = MediumPair::new(1.5, 1.5).unwrap();
    assert_dir(&point_refraction_t(1.0, 0.0, TangentialGradient::ZERO, &same).unwrap(), [s, 0.0, s]);
    let t = point_refraction_t(1.0, 0.0, TangentialGradient::ZERO, &glass).unwrap();
    assert_dir(&t, [1.0 / (1.5 * 2f64.sqrt()), 0.0, (1.0 - 1.0 / 4.5f64).sqrt()]);
    let x = UnitDirection::through_plane_point(1.0, 0.0);
    assert_dir(&t, refract(&x, &UnitDirection::E3, TangentialGradient::ZERO, &glass).unwrap().m.to_array());
}

#[test]
fn t_map_matches_generic_laws_on_a_grid() {
    for s in all_scenarios() {
        let n1 = s.media.n1();
        for j in 0..9 {
            for i in 0..9 {
                let (x, y) = (-0.5 + 0.125 * i as f64, -0.5 + 0.125 * j as f64);
                let g = TangentialGradient::new(0.2 * (x + y).sin(), -0.15 * x * y + 0.05);
                let t = s.t_map(x, y, g).unwrap();
                let inc = s.incident(x, y);
                let m = match s.transport {
                    Transport::Reflect => reflect(&inc, &UnitDirection::E3, g, n1).unwrap().m,
                    Transport::Refract => refract(&inc, &UnitDirection::E3, g, &s.media).unwrap().m,
                };
                assert_dir(&t, m.to_array());
            }
        }
    }
}

#[test]
fn unified_form_reproduces_t_map() {
    for s in all_scenarios() {
        let (n1, n2) = (s.media.n1(), s.media.n2());
        for &(x, y) in &[(0.1, -0.3), (0.4, 0.2), (0.0, 0.0), (-0.35, 0.05)] {
            let g = [0.1 * x - 0.07, 0.2 * y + 0.03];
            let t = s.t_map(x, y, g.into()).unwrap();
            let d = s.d_q(x, y);
            // grad phi = (n1 grad d_Q - grad psi) / n2
            let (dx, dy) = match s.source.kind {
                SourceKind::Collimated => (0.0, 0.0),
                SourceKind::Point => (x / d, y / d),
            };
            let p = [(n1 * dx - g[0]) / n2, (n1 * dy - g[1]) / n2];
            let z = s.sigma() * (1.0 - p[0] * p[0] - p[1] * p[1]).sqrt();
            assert_dir(&t, [p[0], p[1], z]);
        }
    }
}

#[test]
fn reduce_to_ma_balances_collimated_reflection() {
    let theta: f64 = 0.5;
    let sigma = 2.0 * PI * (1.0 - theta.cos());
    let s = Scenario::new(
        Transport::Reflect,
        SourceSpec {
            kind: SourceKind::Collimated,
            domain: PlanarRegion::disk(1.0),
            intensity: SourceIntensity::Uniform(1.0 / PI),
        },
        uniform_cap(CapAxis::Down, theta, 1.0 / sigma),
        MediumPair::reflective(1.0).unwrap(),
    )
    .unwrap();
    let p = reduce_to_ma(&s, 48).unwrap();
    assert_abs_diff_eq!(p.total_mass, 1.0, epsilon = 1e-6);

    // independent midpoint sums over the plane and over the sphere
    let n = 2000;
    let h = 2.0 / n as f64;
    let mut src = 0.0;
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h);
            if x * x + y * y <= 1.0 {
                src += h * h / PI;
            }
        }
    }
    let nt = 20000;
    let dt = theta / nt as f64;
    let tgt: f64 = (0..nt).map(|k| 2.0 * PI * ((k as f64 + 0.5) * dt).sin() * dt / sigma).sum();
    assert!((src - 1.0).abs() < 2e-3);
    assert!((tgt - 1.0).abs() < 1e-6);

    // projected density integrates to the same mass
    let r = theta.sin();
    let m = 4000;
    let dr = r / m as f64;
    let f2_mass: f64 = (0..m)
        .map(|k| {
            let rr = (k as f64 + 0.5) * dr;
            2.0 * PI * rr * dr * s.target.projected_density([rr, 0.0])
        })
        .sum();
    assert!((f2_mass - 1.0).abs() < 1e-5);
}

#[test]
fn point_source_density_pullback() {
    let s = SourceSpec {
        kind: SourceKind::Point,
        domain: PlanarRegion::disk(1.0),
        intensity: SourceIntensity::Uniform(1.0),
    };
    for &(x, y) in &[(0.0, 0.0), (0.3, 0.4), (-0.7, 0.1)] {
        let q: f64 = x * x + y * y + 1.0;
        assert_abs_diff_eq!(s.planar_density([x, y]), q.powf(-1.5), epsilon = 1e-15);
    }
    // solid angle of the cone through the unit disk: 2 pi (1 - cos 45 deg)
    assert_abs_diff_eq!(s.power(), 2.0 * PI * (1.0 - 0.5f64.sqrt()), epsilon = 1e-10);
}

#[test]
fn doubled_target_is_a_mass_imbalance() {
    for s in all_scenarios() {
        let (balanced, _) = s.normalized();
        assert!(reduce_to_ma(&balanced, 24).is_ok());
        let mut doubled = balanced.clone();
        doubled.target = balanced.target.scaled(2.0);
        match reduce_to_ma(&doubled, 24) {
            Err(Error::MassImbalance { relative, .. }) => assert_abs_diff_eq!(relative, 1.0, epsilon = 1e-9),
            other => panic!("expected MassImbalance, got {other:?}"),
        }
    }
}

#[test]
fn validation_rules() {
    let mut s = scenario(Transport::Reflect, SourceKind::Collimated, 1.0, 1.0);
    s.media = MediumPair::new(1.0, 1.5).unwrap();
    assert!(matches!(s.validate(), Err(Error::InvalidMedia(_))));

    let mut s = scenario(Transport::Reflect, SourceKind::Collimated, 1.0, 1.0);
    s.target.axis = CapAxis::Up;
    assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));

    let mut s = scenario(Transport::Refract, SourceKind::Point, 1.0, 1.5);
    s.target.theta_max = 1.6;
    assert!(matches!(s.validate(), Err(Error::DomainTouchesEquator { .. })));
    s.target.theta_max = 85f64.to_radians();
    assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));
    s.target.theta_max = 0.5;
    s.target.theta_min = 0.6;
    assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));
}

#[test]
fn annular_cap_projects_to_annulus() {
    let t = TargetSpec {
        axis: CapAxis::Up,
        theta_min: 0.2,
        theta_max: 0.6,
        intensity: TargetIntensity::Uniform(1.0),
    };
    match t.projected_region() {
        PlanarRegion::Annulus { inner, outer, .. } => {
            assert_abs_diff_eq!(inner, 0.2f64.sin(), epsilon = 1e-15);
            assert_abs_diff_eq!(outer, 0.6f64.sin(), epsilon = 1e-15);
        }
        other => panic!("{other:?}"),
    }
    assert_abs_diff_eq!(t.power(), t.solid_angle(), epsilon = 1e-12);
}

fn field(f: impl Fn(f64, f64) -> f64) -> PotentialField {
    let grid = Grid2::cell_centered([0.0, 0.0], 1.0, 17, 0);
    PotentialField(ScalarField::from_fn(grid, f))
}

#[test]
fn phase_from_potential_examples() {
    let psi0 = |x: f64, y: f64| 0.1 * x * x - 0.3 * x * y + 0.2 * y;
    let s = scenario(Transport::Reflect, SourceKind::Collimated, 1.0, 1.0);
    let psi = phase_from_potential(&field(|x, y| 1.0 - psi0(x, y)), &s);
    let c = psi0(0.0, 0.0);
    for (i, j, k) in psi.grid.nodes() {
        let [x, y] = psi.grid.coords(i, j);
        assert_abs_diff_eq!(psi.values[k], psi0(x, y) - c, epsilon = 1e-12);
    }

    let s = scenario(Transport::Reflect, SourceKind::Point, 1.0, 1.0);
    let psi = phase_from_potential(&field(|x, y| (x * x + y * y + 1.0).sqrt()), &s);
    assert!(psi.values.iter().all(|v| v.abs() < 1e-12));

    // psi = 1 - 1.5 phi: phi = 2/3 (1 - x) gives psi = x, and psi = 1.5 x
    // comes from phi = 2/3 - x
    let s = scenario(Transport::Refract, SourceKind::Collimated, 1.0, 1.5);
    let psi = phase_from_potential(&field(|x, _| 2.0 / 3.0 * (1.0 - x)), &s);
    for (i, j, k) in psi.grid.nodes() {
        let [x, _] = psi.grid.coords(i, j);
        assert_abs_diff_eq!(psi.values[k], x, epsilon = 1e-12);
    }
    let psi = phase_from_potential(&field(|x, _| 2.0 / 3.0 - x), &s);
    for (i, j, k) in psi.grid.nodes() {
        let [x, _] = psi.grid.coords(i, j);
        assert_abs_diff_eq!(psi.values[k], 1.5 * x, epsilon = 1e-12);
    }
    let back = potential_from_phase(&psi, &s);
    let diff: Vec<f64> = back
        .grid
        .nodes()
        .map(|(i, j, k)| back.values[k] - (2.0 / 3.0 - back.grid.coords(i, j)[0]))
        .collect();
    assert!(diff.iter().all(|d| (d - diff[0]).abs() < 1e-12));
}

#[test]
fn scenario_and_unified_equations_agree() {
    for s in all_scenarios() {
        for &(x, y) in &[(0.11, -0.23), (0.4, 0.2), (-0.3, 0.35)] {
            let grad = [0.05 * x - 0.02, -0.04 * y + 0.01];
            let hess = Hessian2 {
                xx: -0.3,
                xy: 0.07,
                yy: -0.2,
            };
            let a = scenario_terms(&s, [x, y], grad, &hess).unwrap();
            let b = unified_terms(&s, [x, y], grad, &hess).unwrap();
            assert!((a.lhs - b.lhs).abs() <= 1e-12 * a.lhs.abs().max(1.0), "{:?} {a:?} {b:?}", s.transport);
            assert!((a.rhs - b.rhs).abs() <= 1e-12 * a.rhs.abs().max(1.0));
        }
    }
}

proptest! {
    #[test]
    fn t_maps_are_unit_and_on_the_right_side(
        x in -0.3f64..0.3, y in -0.3f64..0.3, gx in -0.15f64..0.15, gy in -0.15f64..0.15,
    ) {
        for s in all_scenarios() {
            let t = s.t_map(x, y, TangentialGradient::new(gx, gy)).unwrap();
            prop_assert!((t.as_vector().norm() - 1.0).abs() < 1e-12);
            prop_assert!(t.z() * s.sigma() > 0.0);
        }
    }
}
