use proptest::prelude::*;

use turboscale::trace_io::{emit_trace, parse_trace, Trace, TraceTick};

fn arb_trace() -> impl Strategy<Value = Trace> {
    (1usize..6, 1usize..30).prop_flat_map(|(n, ticks)| {
        (
            prop::collection::vec(prop::collection::vec(0.0f64..=1.0, n), ticks),
            prop::collection::vec(0.001f64..10.0, ticks),
        )
            .prop_map(move |(rows, gaps)| {
                let mut t = 0.0;
                let ticks = rows
                    .into_iter()
                    .zip(gaps)
                    .map(|(utilization, gap)| {
                        let tick = TraceTick {
                            time_s: t,
                            utilization,
                        };
                        t += gap;
                        tick
                    })
                    .collect();
                Trace { n_cores: n, ticks }
            })
    })
}

proptest! {
    #[test]
    fn arbitrary_traces_survive_a_file_round_trip(trace in arb_trace()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        std::fs::write(&path, emit_trace(&trace)).unwrap();
        let back = Trace::load(&path).unwrap();
        prop_assert_eq!(&back, &trace);
        prop_assert_eq!(emit_trace(&back), std::fs::read_to_string(&path).unwrap());
    }
}

#[test]
fn bundled_traces_parse() {
    for name in ["tblastx_like.csv", "saturated_3core.csv"] {
        let path = format!("{}/fixtures/traces/{name}", env!("CARGO_MANIFEST_DIR"));
        let bytes = std::fs::read(&path).unwrap();
        let t = parse_trace(&bytes).unwrap();
        assert_eq!(t.n_cores, 4);
        assert_eq!(
            emit_trace(&t).as_bytes(),
            &bytes[..],
            "{name} is in canonical form"
        );
    }
}
