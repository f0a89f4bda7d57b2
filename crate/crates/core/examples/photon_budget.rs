//! How much of a wide illumination spot reaches a 1 µm gate window, and the
//! resulting absorbed photon rate.

use spt_sim::derived::{
    absorbed_photon_rate, window_power_fraction, BeamGeometry, BeamProfile, PhotonBudget,
};

fn main() {
    let reference = BeamGeometry::reference();
    println!("window area: {:.3e} cm^2", reference.window_area());
    println!("{:>12} {:>14} {:>14}", "spot (um)", "gaussian", "uniform");
    for spot in [10.0, 100.0, 1000.0, 5000.0] {
        let g = window_power_fraction(&BeamGeometry {
            spot_diameter: spot,
            ..reference
        });
        let u = window_power_fraction(&BeamGeometry {
            spot_diameter: spot,
            profile: BeamProfile::Uniform,
            ..reference
        });
        println!("{spot:12.0} {g:14.3e} {u:14.3e}");
    }

    // Power at the fibre end that puts ~100 photons/s of 1.3 µm light on the window.
    let fraction = window_power_fraction(&reference);
    let power = 1.9e-10;
    let budget = absorbed_photon_rate(power, 1.3, fraction, 0.01);
    println!(
        "\n{power:.1e} W total -> {:.1} photons/s in the window, {:.2} absorbed/s",
        budget.incident_rate_in_window, budget.absorbed_rate
    );
    assert_eq!(PhotonBudget::from_incident(100.0, 0.01).absorbed_rate, 1.0);
}
