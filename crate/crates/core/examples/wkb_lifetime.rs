//! WKB transmission through rectangular barriers, and how the lifetime of a
//! trapped electron scales with barrier thickness.

use spt_sim::derived::{tunneling_time, wkb_transmission};

fn main() {
    let (dz, mass_barrier, height) = (0.01, 0.075, 0.35);
    // Electron 0.1 eV above the bottom of a 4.5 nm well of mass 0.041.
    let (well_width, well_mass, energy) = (4.5, 0.041, 0.1);

    println!("{:>10} {:>12} {:>14}", "width (nm)", "T", "lifetime (s)");
    for width in [2.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0] {
        let n = (width / dz) as usize + 1;
        let t = wkb_transmission(&vec![height; n], &vec![mass_barrier; n], dz, energy);
        let life = tunneling_time(well_width, well_mass, energy, t);
        println!("{width:10.1} {t:12.3e} {:14.3e}", life.tau);
    }
}
