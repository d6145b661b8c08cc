use proptest::prelude::*;

use csn::field::{in_range, FieldSpec, Source};
use csn::network::Sensor;
use csn::num::{Amount, Num};
use csn::syntax::ast::{Module, Pos, Program};

fn at(f: &FieldSpec, x: f64, y: f64) -> Vec<f64> {
    f.at(&Pos::new(x, y)).into_iter().map(Num::get).collect()
}

fn sensor_at(x: f64, y: f64, r: f64) -> Sensor {
    Sensor::new("s", Program::Idle, Module::new(), Pos::new(x, y), r, Amount::from_units(10))
}

#[test]
fn constant_field() {
    let f = FieldSpec::constant(vec![21.5]).unwrap();
    assert_eq!(at(&f, -3.0, 100.0), vec![21.5]);
    assert!(FieldSpec::constant(vec![]).is_err());
    assert!(FieldSpec::constant(vec![f64::NAN]).is_err());
}

#[test]
fn grid_picks_the_nearest_cell() {
    let f = FieldSpec::grid(Pos::new(0.0, 0.0), 1.0, vec![vec![vec![1.0], vec![2.0]]]).unwrap();
    assert_eq!(at(&f, 0.2, 0.0), vec![1.0]);
    assert_eq!(at(&f, 0.8, 0.0), vec![2.0]);
    // outside the grid the border cell answers
    assert_eq!(at(&f, 50.0, -7.0), vec![2.0]);
    assert!(FieldSpec::grid(Pos::new(0.0, 0.0), 0.0, vec![vec![vec![1.0]]]).is_err());
    assert!(FieldSpec::grid(Pos::new(0.0, 0.0), 1.0, vec![vec![vec![1.0]], vec![]]).is_err());
    assert!(FieldSpec::grid(Pos::new(0.0, 0.0), 1.0, vec![vec![vec![1.0], vec![1.0, 2.0]]]).is_err());
}

#[test]
fn analytic_sources() {
    let f = FieldSpec::analytic(vec![Source::Gaussian { cx: 0.0, cy: 0.0, peak: 10.0, sigma: 1.0 }]).unwrap();
    assert_eq!(at(&f, 0.0, 0.0), vec![10.0]);
    let expected = 10.0 * (-0.5f64).exp();
    assert!((at(&f, 1.0, 0.0)[0] - expected).abs() < 1e-12);

    let f = FieldSpec::parse("analytic linear(1, 2, 3) + radial(0, 0, 8, 1)", None).unwrap();
    assert!((at(&f, 1.0, 1.0)[0] - (6.0 + 8.0 / 3.0)).abs() < 1e-12);
    assert!(FieldSpec::parse("analytic gaussian(0, 0, 1, 0)", None).is_err());
    assert!(FieldSpec::parse("wobbly [1]", None).is_err());
}

#[test]
fn grid_spec_parses_inline_data() {
    let f = FieldSpec::parse("grid origin=(0, 0) cell=2 data=\"1,10 2,20; 3,30 4,40\"", None).unwrap();
    assert_eq!(f.arity(), 2);
    assert_eq!(at(&f, 2.1, 1.9), vec![4.0, 40.0]);
    assert_eq!(FieldSpec::parse(&f.to_string(), None).unwrap(), f);
}

#[test]
fn grid_spec_reads_a_relative_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("temps.txt"), "5 6\n7 8\n").unwrap();
    let f = FieldSpec::parse("grid origin=(0, 0) cell=1 file=temps.txt", Some(dir.path())).unwrap();
    assert_eq!(at(&f, 1.0, 1.0), vec![8.0]);
    assert!(FieldSpec::parse("grid cell=1 file=missing.txt", Some(dir.path())).is_err());
}

#[test]
fn range_is_strict_and_uses_the_sender_radius() {
    assert!(in_range(&sensor_at(0.0, 0.0, 6.0), &sensor_at(3.0, 4.0, 1.0)));
    assert!(!in_range(&sensor_at(0.0, 0.0, 5.0), &sensor_at(3.0, 4.0, 1.0)));
    assert!(!in_range(&sensor_at(0.0, 0.0, 1.0), &sensor_at(2.0, 0.0, 100.0)));
}

proptest! {
    #[test]
    fn grid_matches_an_exhaustive_scan(
        w in 1usize..6,
        h in 1usize..6,
        cell in prop::sample::select(vec![0.5, 1.0, 2.5]),
        ox in -5i32..5,
        oy in -5i32..5,
        px in -20.0f64..20.0,
        py in -20.0f64..20.0,
    ) {
        let rows: Vec<Vec<Vec<f64>>> = (0..h).map(|j| (0..w).map(|i| vec![(j * w + i) as f64]).collect()).collect();
        let origin = Pos::new(f64::from(ox), f64::from(oy));
        let f = FieldSpec::grid(origin, cell, rows).unwrap();
        let center = |k: usize| (f64::from(ox) + (k % w) as f64 * cell, f64::from(oy) + (k / w) as f64 * cell);
        let dist = |k: usize| {
            let (cx, cy) = center(k);
            (px - cx).hypot(py - cy)
        };
        let best = (0..w * h).map(dist).fold(f64::INFINITY, f64::min);
        let got = at(&f, px, py)[0] as usize;
        // ties may go either way; the chosen cell must be at minimal distance
        prop_assert!((dist(got) - best).abs() < 1e-9, "chose {} at {}, best {}", got, dist(got), best);
    }
}
