use ndarray::Array2;
use neurofuse::nn::{forward, ArchConfig, ModelParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stage_lengths_follow_conv_and_pool_laws(
        len in 8usize..400,
        k1 in 1usize..6,
        k2 in 1usize..6,
        pool1 in 1usize..4,
        pool2 in 1usize..4,
    ) {
        let arch = ArchConfig {
            input_len: len,
            conv1_kernel: k1,
            conv2_kernel: k2,
            pool1,
            pool2,
            conv1_filters: 3,
            conv2_filters: 2,
            dense_units: 4,
            ..ArchConfig::default()
        };
        let c1 = len as i64 - k1 as i64 + 1;
        let p1 = c1.max(0) / pool1 as i64;
        let c2 = p1 - k2 as i64 + 1;
        let p2 = c2.max(0) / pool2 as i64;
        if c1 < 1 || p1 < 1 || c2 < 1 || p2 < 1 {
            prop_assert!(arch.validate().is_err());
        } else {
            prop_assert_eq!(
                arch.stage_lengths(),
                [c1 as usize, p1 as usize, c2 as usize, p2 as usize]
            );
            prop_assert_eq!(arch.flat_len(), p2 as usize * 2);
            let m = ModelParams::init(arch, 1).unwrap();
            let x = Array2::from_shape_fn((2, len), |(r, c)| ((r + 3 * c) % 7) as f64 - 3.0);
            let (p, _) = forward(&m, x.view()).unwrap();
            prop_assert_eq!(p.dim(), (2, 5));
            for row in p.rows() {
                prop_assert!((row.sum() - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn default_stack_lengths() {
    let arch = ArchConfig::default();
    assert_eq!(arch.stage_lengths(), [735, 367, 363, 181]);
    assert_eq!(arch.flat_len(), 11584);
}
