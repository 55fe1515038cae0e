use bundle_degrees::manifold::{
    chart_eval, chart_inverse, chordal_distance, deviation, is_on_manifold, retract, sample,
    tangency_residual, tangent_frame, tangent_frame_with_order, ManifoldId, Point, Seed,
};
use bundle_degrees::maps;
use nalgebra::DMatrix;

const SAMPLES: u64 = 1000;

fn manifolds() -> Vec<ManifoldId> {
    vec![
        ManifoldId::S3,
        ManifoldId::S5,
        ManifoldId::SU3,
        ManifoldId::S3xS5,
        maps::pullback_total_space(&maps::map_f()).unwrap(),
        maps::pullback_total_space(&maps::suspension_power(5, -3).unwrap()).unwrap(),
    ]
}

#[test]
fn samples_lie_on_the_manifold() {
    for m in manifolds() {
        for s in 0..SAMPLES {
            let x = sample(&m, Seed(s));
            assert!(
                is_on_manifold(&m, &x, 1e-12),
                "{m} seed {s}: {}",
                deviation(&m, &x)
            );
        }
    }
}

#[test]
fn pullback_samples_satisfy_the_constraint() {
    let base = maps::suspension_power(5, 3).unwrap();
    let m = maps::pullback_total_space(&base).unwrap();
    for s in 0..SAMPLES {
        let x = sample(&m, Seed(s)).ambient();
        let image = base.eval_ambient::<f64>(&x[..6]).unwrap();
        let third_column: Vec<f64> = (0..3)
            .flat_map(|i| [x[6 + 2 * (3 * i + 2)], x[6 + 2 * (3 * i + 2) + 1]])
            .collect();
        let gap = image
            .iter()
            .zip(&third_column)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(gap < 1e-12, "seed {s}: {gap}");
    }
}

#[test]
fn frames_are_orthonormal_and_tangent() {
    for m in manifolds() {
        for s in 0..SAMPLES / 4 {
            let x = sample(&m, Seed(s));
            let f = tangent_frame(&m, &x).unwrap();
            let gram = f.vectors.transpose() * &f.vectors;
            let err = (gram - DMatrix::identity(m.dim(), m.dim())).abs().max();
            assert!(err < 1e-10, "{m}: {err}");
            for k in 0..m.dim() {
                assert!(tangency_residual(&m, &x, &f.vector(k)).unwrap() < 1e-10);
            }
        }
    }
}

#[test]
fn orientation_does_not_depend_on_completion_order() {
    let orders = [[5, 4, 3, 2, 1, 0], [2, 0, 4, 1, 5, 3], [1, 3, 5, 0, 2, 4]];
    for m in manifolds() {
        for s in 0..100 {
            let x = sample(&m, Seed(s));
            let f = tangent_frame(&m, &x).unwrap();
            for order in &orders {
                let g = tangent_frame_with_order(&m, &x, order).unwrap();
                let det = (f.vectors.transpose() * &g.vectors).determinant();
                assert!(
                    (det - 1.0).abs() < 1e-8,
                    "{m} seed {s} order {order:?}: {det}"
                );
            }
        }
    }
}

#[test]
fn retraction_fixes_points_on_the_manifold() {
    for m in manifolds() {
        for s in 0..200 {
            let x = sample(&m, Seed(s));
            let y = retract(&m, &x.ambient()).unwrap();
            assert!(chordal_distance(&x, &y) < 1e-12, "{m}");
            let z = retract(&m, &y.ambient()).unwrap();
            assert!(chordal_distance(&y, &z) < 1e-14);
        }
    }
}

#[test]
fn chart_round_trip() {
    for m in manifolds() {
        let x = sample(&m, Seed(11));
        let f = tangent_frame(&m, &x).unwrap();
        let coords: Vec<f64> = (0..m.dim()).map(|k| 0.01 * (k as f64 + 1.0)).collect();
        let y: Point = chart_eval(&m, &f, &coords).unwrap();
        let back = chart_inverse(&m, &f, &y).unwrap();
        let err = back
            .iter()
            .zip(&coords)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{m}: {err}");
    }
}
