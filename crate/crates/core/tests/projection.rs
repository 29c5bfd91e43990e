use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rfps_core::rng;
use rfps_core::sft::{extract_line, line_dft, lcm_length, project_bin, project_set, subtract_recovered, LineSpec};
use rfps_core::{Dims, GridSet, SampleSource, Scene, Sinusoid, WindowSpec};

fn random_grid_set(dims: &Dims, k: usize, r: &mut impl Rng) -> GridSet {
    let mut set = GridSet::new();
    while set.len() < k {
        let m: Vec<usize> = dims.as_slice().iter().map(|&n| r.gen_range(0..n)).collect();
        set.insert(m, Complex64::from_polar(r.gen_range(0.5..3.0), r.gen_range(0.0..TAU)));
    }
    set
}

fn source_of(dims: &Dims, set: &GridSet) -> SampleSource {
    let sinusoids = set.iter().map(|(m, a)| Sinusoid::grid(*a, m.clone())).collect();
    SampleSource::new(Scene::new(dims.clone(), sinusoids, 0.0, 0).unwrap())
}

fn units(n: usize) -> Vec<usize> {
    (1..n).filter(|&a| rfps_core::sft::gcd(a, n) == 1).collect()
}

#[test]
fn orthogonality_exhaustive_8x6() {
    let dims = Dims::new(vec![8, 6]).unwrap();
    let l = lcm_length(&dims);
    let mut checked = 0;
    for &a0 in &units(8) {
        for &a1 in &units(6) {
            let line = LineSpec::new(&dims, vec![a0, a1], vec![0, 0]).unwrap();
            for m_vec in dims.indices() {
                let bin = project_bin(&m_vec, &line, &dims);
                for m in 0..l {
                    let sum: Complex64 = (0..l)
                        .map(|t| {
                            let turns = t as f64
                                * (m_vec[0] as f64 * a0 as f64 / 8.0 + m_vec[1] as f64 * a1 as f64 / 6.0
                                    - m as f64 / l as f64);
                            Complex64::from_polar(1.0, TAU * turns)
                        })
                        .sum::<Complex64>()
                        / l as f64;
                    let expected = if m == bin { 1.0 } else { 0.0 };
                    assert!((sum - expected).norm() < 1e-9, "α=({a0},{a1}) m_vec={m_vec:?} m={m}");
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 4 * 2 * 48 * 24);
}

#[test]
fn projection_slice_identity_random_scenes() {
    let mut r = rng::stream(&[11]);
    for trial in 0..50 {
        let dims = if trial % 2 == 0 { Dims::new(vec![16, 12]).unwrap() } else { Dims::new(vec![8, 6, 4]).unwrap() };
        let set = random_grid_set(&dims, r.gen_range(1..8), &mut r);
        let src = source_of(&dims, &set);
        let w = WindowSpec::rectangular(&dims);
        let line = rfps_core::sft::draw_line(&dims, &mut r);
        let measured = line_dft(&extract_line(&src, &w, &line));
        let projected = project_set(&set, &line, &dims);
        for (a, b) in measured.iter().zip(&projected) {
            assert!((a - b).norm() < 1e-9, "trial {trial}");
        }
    }
}

#[test]
fn extract_line_matches_direct_evaluation() {
    let dims = Dims::new(vec![16, 12]).unwrap();
    let mut r = rng::stream(&[12]);
    let set = random_grid_set(&dims, 4, &mut r);
    let src = source_of(&dims, &set);
    let line = LineSpec::new(&dims, vec![3, 5], vec![7, 2]).unwrap();
    let values = extract_line(&src, &WindowSpec::rectangular(&dims), &line);
    for (l, v) in values.iter().enumerate() {
        let n = [(3 * l + 7) % 16, (5 * l + 2) % 12];
        let direct: Complex64 = set
            .iter()
            .map(|(m, a)| {
                a * Complex64::from_polar(1.0, TAU * (m[0] as f64 * n[0] as f64 / 16.0 + m[1] as f64 * n[1] as f64 / 12.0))
            })
            .sum();
        assert!((v - direct).norm() < 1e-9);
    }
}

#[test]
fn extract_line_dc_and_offset_wrap() {
    let dims = Dims::new(vec![16, 12]).unwrap();
    let dc: GridSet = [(vec![0, 0], Complex64::new(1.0, 0.0))].into_iter().collect();
    let src = source_of(&dims, &dc);
    let w = WindowSpec::rectangular(&dims);
    let line = LineSpec::new(&dims, vec![1, 1], vec![0, 0]).unwrap();
    assert!(extract_line(&src, &w, &line).iter().all(|v| (v - 1.0).norm() < 1e-12));

    let mut r = rng::stream(&[13]);
    let src = source_of(&dims, &random_grid_set(&dims, 3, &mut r));
    let a = LineSpec::new(&dims, vec![5, 7], vec![3, 4]).unwrap();
    // A full turn of the offset in one dimension lands on the same positions.
    let mut b = a.clone();
    for _ in 0..16 {
        b = b.shifted(&dims, 0);
    }
    assert_eq!(a, b);
    assert_eq!(extract_line(&src, &w, &a), extract_line(&src, &w, &b));
}

#[test]
fn subtraction_matches_time_domain() {
    let dims = Dims::new(vec![16, 12]).unwrap();
    let mut r = rng::stream(&[14]);
    let w = WindowSpec::rectangular(&dims);
    for _ in 0..20 {
        let truth = random_grid_set(&dims, 6, &mut r);
        let partial: GridSet = truth.iter().filter(|_| r.gen_bool(0.5)).map(|(m, a)| (m.clone(), *a)).collect();
        let src = source_of(&dims, &truth);
        let line = rfps_core::sft::draw_line(&dims, &mut r);
        let values = extract_line(&src, &w, &line);

        let residual = subtract_recovered(&values, &partial, &line, &dims);
        let rest: GridSet = truth.iter().filter(|(m, _)| !partial.contains_key(*m)).map(|(m, a)| (m.clone(), *a)).collect();
        let expected = extract_line(&source_of(&dims, &rest), &w, &line);
        for (a, b) in residual.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-9);
        }

        assert_eq!(subtract_recovered(&values, &GridSet::new(), &line, &dims), values);
        let cancelled = subtract_recovered(&values, &truth, &line, &dims);
        assert!(cancelled.iter().all(|v| v.norm() < 1e-9));
    }
}
