//! The built-in material table and the band offsets it implies.

use spt_sim::materials::{band_offsets, MaterialTable};

fn main() {
    let table = MaterialTable::builtin();
    println!("table {} at {} K", table.version(), table.temperature());
    for m in table.iter() {
        println!(
            "{:16} Eg {:.4} eV  me {:.4}  mhh {:.3}  eps {:5.2}  g {:+.1}",
            m.name, m.e_g, m.m_e, m.m_hh, m.eps_r, m.g_e
        );
    }
    let names: Vec<&str> = table.names().collect();
    for a in &names {
        for b in &names {
            if a < b {
                let (dec, dev) = band_offsets(table.lookup(a).unwrap(), table.lookup(b).unwrap());
                println!("{a} -> {b}: dEc {dec:+.3} eV, dEv {dev:+.3} eV");
            }
        }
    }
}
