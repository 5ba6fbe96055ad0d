//! Steps a lossy battery frame by frame and prints the energy bookkeeping.

use ehstore::{step, BatteryParams, BatteryState, Energy};

fn main() -> ehstore::Result<()> {
    let params = BatteryParams::new(300.0, 50.0, 0.85, 0.80)?;
    let mut state = BatteryState::with_energy(120.0, &params)?;
    let frames = [
        (200.0, 80.0),
        (0.0, 90.0),
        (10.0, 100.0),
        (400.0, 0.0),
        (0.0, 300.0),
    ];
    println!(
        "{:>6} {:>6} {:>8} {:>8} {:>8} {:>8}  flags",
        "u", "p", "E", "consumed", "overflow", "losses"
    );
    for (u, p) in frames {
        let (next, out) = step(state, Energy::new(u)?, Energy::new(p)?, &params);
        state = next;
        let mut flags = Vec::new();
        if out.underflow {
            flags.push("underflow");
        }
        if out.outage {
            flags.push("outage");
        }
        println!(
            "{u:>6.0} {p:>6.0} {:>8.2} {:>8.2} {:>8.2} {:>8.2}  {}",
            state.energy.get(),
            out.consumed.get(),
            out.overflow_loss.get(),
            out.charging_loss.get() + out.discharging_loss.get(),
            flags.join(",")
        );
    }
    Ok(())
}
