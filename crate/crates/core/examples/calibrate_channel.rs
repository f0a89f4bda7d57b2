//! Channel calibration: choose the threshold shift per trapped electron so a
//! given number of electrons pinches the channel, then print the staircase of
//! current levels. Optional arguments: pinch count, overdrive in mV.

use spt_sim::trap_dynamics::{channel_current, ChannelCalibration, TrapState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let mut cal = ChannelCalibration::default();
    if let Some(n) = args.next() {
        cal.pinch_count = n.parse()?;
    }
    if let Some(mv) = args.next() {
        cal.overdrive = mv.parse::<f64>()? * 1e-3;
    }
    let (model, gate_bias) = cal.calibrate();
    println!("gate bias        {gate_bias:+.4} V");
    println!("G0               {:.4e} S/V", model.g0);
    println!("dVth per trap    {:.4} mV", model.dvth_trap * 1e3);
    println!("dVth per donor   {:.4} mV", model.dvth_ion * 1e3);

    let soaked = TrapState::new(cal.pinch_count + 2, cal.donor_total).with_ionized(cal.donor_total);
    let i0 = channel_current(&model, gate_bias, &soaked);
    for n in 0..=cal.pinch_count + 2 {
        let i = channel_current(&model, gate_bias, &soaked.with_trapped(n));
        println!("{n:3} trapped  {:9.4} nA  {:6.2}%", i * 1e9, 100.0 * i / i0);
    }

    // Threshold versus soak: from dark to fully photo-ionized donors.
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let s = soaked
            .with_ionized((frac * f64::from(cal.donor_total)) as u32)
            .with_trapped(0);
        println!(
            "soak {:4.0}%  V_th = {:+.3} V",
            frac * 100.0,
            model.threshold(&s)
        );
    }
    Ok(())
}
