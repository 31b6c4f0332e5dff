//! What the OS sees of a Turbo-capable ladder, with Turbo on and off.

use turboscale::model::{export_pstate_table, read_pstate_table, ProcessorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ProcessorSpec::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/specs/i7_default.json"
    ))?;
    for turbo in [true, false] {
        let table = export_pstate_table(&spec.ladder, turbo);
        println!("turbo {}:", if turbo { "enabled" } else { "disabled" });
        for e in &table {
            let tag = if e.turbo_indicator {
                "  (turbo indicator)"
            } else {
                ""
            };
            println!("  P{:<2} {:>8} kHz{tag}", e.pstate_index, e.reported_khz);
        }
        let reported: Vec<u64> = table.iter().map(|e| e.reported_khz).collect();
        if let Some(s) = read_pstate_table(&reported) {
            println!(
                "  read back: guaranteed {} kHz, turbo present: {}",
                s.guaranteed_khz, s.turbo_present
            );
        }
    }
    Ok(())
}
