mod common;

use deepradar::lstm::{decode_checkpoint, encode_checkpoint, init_model, CellUpdate, Model};

fn tiny_model(update: CellUpdate) -> Model<f64> {
    let mut m = init_model::<f64>(2, 2, &[2], 0).unwrap();
    m.cell_update = update;
    for (ti, t) in m.tensors_mut().into_iter().enumerate() {
        for (i, v) in t.iter_mut().enumerate() {
            *v = ((ti * 31 + i * 7) as f64 * 0.61).sin() * 0.8;
        }
    }
    m
}

const INPUT: [f64; 6] = [0.5, -0.25, 1.0, 0.75, -0.5, 0.125];

#[test]
fn hidden2_three_steps_matches_reference() {
    for update in [CellUpdate::Standard, CellUpdate::Swapped] {
        let m = tiny_model(update);
        let got = m.forward(&INPUT).unwrap();
        let want = common::reference_probs(&m, &INPUT);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{update:?}: {got:?} vs {want:?}");
        }
        assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn single_precision_tracks_reference() {
    let m = tiny_model(CellUpdate::Standard);
    let want = common::reference_probs(&m, &INPUT);
    let m32 = m.cast::<f32>();
    let x32: Vec<f32> = INPUT.iter().map(|&v| v as f32).collect();
    for (g, w) in m32.forward(&x32).unwrap().iter().zip(&want) {
        assert!((*g as f64 - w).abs() < 1e-5);
    }
}

#[test]
fn stacked_model_matches_reference() {
    let mut m = init_model::<f64>(3, 2, &[3, 2, 4], 9).unwrap();
    for t in m.tensors_mut() {
        for (i, v) in t.iter_mut().enumerate() {
            *v += (i as f64 * 0.13).cos() * 0.1;
        }
    }
    let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin()).collect();
    let got = m.forward(&x).unwrap();
    let want = common::reference_probs(&m, &x);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12);
    }
}

#[test]
fn checkpoint_preserves_predictions() {
    let m = tiny_model(CellUpdate::Swapped).cast::<f32>();
    let back = decode_checkpoint(&encode_checkpoint(&m).unwrap()).unwrap();
    let x: Vec<f32> = INPUT.iter().map(|&v| v as f32).collect();
    assert_eq!(m.forward(&x).unwrap(), back.forward(&x).unwrap());
    assert_eq!(back.cell_update, CellUpdate::Swapped);
}
