use aes_pipeline::aes::{self, Block, State, INV_MIX, MIX};
use aes_pipeline::cost::{flowshop_makespan, metrics, model_report, paper_pipeline_time, CostParams, Mode, PipelineConfig};
use aes_pipeline::gf::gf_mul;
use aes_pipeline::{Rational, TimeQuantum};
use proptest::prelude::*;

fn state(bytes: [u8; 16]) -> State {
    State::from_block(&Block(bytes))
}

fn parallel_pes(mode: Mode) -> Vec<usize> {
    match mode {
        Mode::Encrypt => vec![2, 4, 8, 16, 32],
        Mode::Decrypt => vec![4, 8, 16, 32, 64],
    }
}

#[test]
fn inverse_mix_matrix_times_forward_is_identity() {
    for i in 0..4 {
        for j in 0..4 {
            let v = (0..4).fold(0u8, |acc, k| acc ^ gf_mul(INV_MIX[i][k], MIX[k][j]));
            assert_eq!(v, u8::from(i == j), "({i},{j})");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn decrypt_inverts_encrypt(block in any::<[u8; 16]>(), key in any::<[u8; 16]>()) {
        let ks = aes::key_expand(&key).unwrap();
        let b = Block(block);
        prop_assert_eq!(aes::decrypt_block(&aes::encrypt_block(&b, &ks), &ks), b);
    }
}

proptest! {
    #[test]
    fn mix_column_is_linear(a in any::<[u8; 16]>(), b in any::<[u8; 16]>()) {
        let (sa, sb) = (state(a), state(b));
        prop_assert_eq!(aes::mix_column(sa ^ sb), aes::mix_column(sa) ^ aes::mix_column(sb));
        prop_assert_eq!(aes::inv_mix_column(sa ^ sb), aes::inv_mix_column(sa) ^ aes::inv_mix_column(sb));
        prop_assert_eq!(aes::inv_mix_column(aes::mix_column(sa)), sa);
    }

    #[test]
    fn constant_columns_are_fixed(cols in any::<[u8; 4]>()) {
        let mut bytes = [0u8; 16];
        for (j, b) in bytes.iter_mut().enumerate() {
            *b = cols[j / 4];
        }
        let s = state(bytes);
        prop_assert_eq!(aes::mix_column(s), s);
        prop_assert_eq!(aes::inv_mix_column(s), s);
    }

    #[test]
    fn pipeline_time_never_grows_with_more_pes(
        dec in any::<bool>(),
        l in 1usize..60,
        ov in 0i64..40,
    ) {
        let mode = if dec { Mode::Decrypt } else { Mode::Encrypt };
        let p = CostParams::default().with_overhead(TimeQuantum::shifts(ov));
        let pes = parallel_pes(mode);
        for w in pes.windows(2) {
            let a = PipelineConfig::new(mode, l, w[0], true, p).unwrap();
            let b = PipelineConfig::new(mode, l, w[1], true, p).unwrap();
            prop_assert!(paper_pipeline_time(&b) <= paper_pipeline_time(&a));
            prop_assert!(flowshop_makespan(&b) <= flowshop_makespan(&a));
        }
        // Without overhead, splitting never loses to the serial stage.
        let serial = PipelineConfig::simple(mode, l, 1, false).unwrap();
        let split = PipelineConfig::simple(mode, l, pes[0], true).unwrap();
        prop_assert!(paper_pipeline_time(&split) <= paper_pipeline_time(&serial));
    }

    #[test]
    fn metrics_ignore_the_time_unit(
        dec in any::<bool>(),
        l in 1usize..60,
        idx in 0usize..5,
        ov in 0i64..20,
        num in 1i64..50,
        den in 1i64..50,
    ) {
        let mode = if dec { Mode::Decrypt } else { Mode::Encrypt };
        let m = parallel_pes(mode)[idx];
        let k = Rational::new(num, den);
        let p = CostParams::default().with_overhead(TimeQuantum::shifts(ov));
        let a = model_report(&PipelineConfig::new(mode, l, m, true, p).unwrap()).unwrap();
        let b = model_report(&PipelineConfig::new(mode, l, m, true, p.scaled(k)).unwrap()).unwrap();
        prop_assert_eq!(b.paper_pipeline, a.paper_pipeline.scale(k));
        prop_assert_eq!(b.flowshop, a.flowshop.scale(k));
        for (x, y) in [
            (a.vs_sequential, b.vs_sequential),
            (a.vs_serial_pipeline, b.vs_serial_pipeline),
            (a.flowshop_vs_sequential, b.flowshop_vs_sequential),
        ] {
            prop_assert_eq!(x.speedup, y.speedup);
            prop_assert_eq!(x.efficiency, y.efficiency);
            prop_assert_eq!(x.improvement, y.improvement);
        }
    }

    #[test]
    fn metric_identities(base in 1i64..100_000, par in 1i64..100_000, m in 1usize..65) {
        let r = metrics(TimeQuantum::shifts(base), TimeQuantum::shifts(par), m).unwrap();
        prop_assert_eq!(r.speedup, Rational::new(base, par));
        prop_assert_eq!(r.efficiency * Rational::from_integer(m as i64), r.speedup);
        prop_assert_eq!(r.improvement, Rational::from_integer(1) - Rational::new(par, base));
    }
}
