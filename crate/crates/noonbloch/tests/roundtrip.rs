use noonbloch::table::*;
use noonbloch::verify::{CheckRecord, CheckStatus, VerificationReport};
use proptest::prelude::*;

fn any_f64() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), -1e3f64..1e3, 0.0f64..1e-300]
}

fn same_bits(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits()
}

proptest! {
    #[test]
    fn density_tables(rows in prop::collection::vec((any_f64(), any::<i64>(), any_f64()), 0..40)) {
        let rows: Vec<DensityRow> = rows.into_iter().map(|(z, site, n)| DensityRow { z, site, n }).collect();
        let mut buf = Vec::new();
        write_density(&mut buf, &rows).unwrap();
        let back = read_density(&buf[..]).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert!(same_bits(a.z, b.z) && same_bits(a.n, b.n) && a.site == b.site);
        }
    }

    #[test]
    fn gamma_tables(rows in prop::collection::vec(
        (any_f64(), -60i64..60, -60i64..60, prop::option::of(0.0f64..2.0), any::<bool>()), 0..40)
    ) {
        let rows: Vec<GammaRow> = rows
            .into_iter()
            .map(|(z, x, y, gamma, degenerate)| GammaRow { z, x, y, gamma, degenerate })
            .collect();
        let mut buf = Vec::new();
        write_gamma(&mut buf, &rows).unwrap();
        prop_assert_eq!(read_gamma(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn matrix_tables(z in any_f64(), p in 0u32..10, first in -40i64..0, len in 1usize..12, seed in any_f64()) {
        let sites: Vec<i64> = (first..first + len as i64).collect();
        let entries: Vec<Vec<f64>> = (0..len)
            .map(|i| (0..len).map(|j| seed * (i * len + j) as f64 / 7.0).collect())
            .collect();
        let table = MatrixTable { z, p, q: 10 - p, sites, entries };
        let mut buf = Vec::new();
        write_matrix(&mut buf, &table).unwrap();
        prop_assert_eq!(read_matrix(&buf[..]).unwrap(), table);
    }

    #[test]
    fn period_tables(a in any_f64(), b in any_f64(), c in any_f64()) {
        let rec = PeriodRecord { estimated_period: a, predicted_period: b, relative_error: c };
        let mut buf = Vec::new();
        write_period(&mut buf, &rec).unwrap();
        prop_assert_eq!(read_period(&buf[..]).unwrap(), rec);
    }
}

#[test]
fn report_table() {
    let report = VerificationReport {
        checks: vec![
            CheckRecord { name: "ode".into(), tolerance: 1e-30, max_deviation: Some(3e-13), status: CheckStatus::Fail(None) },
            CheckRecord { name: "oracle".into(), tolerance: 1e-9, max_deviation: None, status: CheckStatus::Skipped("N>4".into()) },
            CheckRecord {
                name: "period_law".into(),
                tolerance: 0.01,
                max_deviation: None,
                status: CheckStatus::Fail(Some("no dominant peak, ratio 2.1".into())),
            },
        ],
    };
    let mut buf = Vec::new();
    write_report(&mut buf, &report).unwrap();
    assert_eq!(read_report(&buf[..]).unwrap(), report);
}
