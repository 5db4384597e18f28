use sqpc_core::band::{self_consistent_band_with, ScfOptions};
use sqpc_core::material::default_wafer;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let doping: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(4.9e-4);
    let mut wafer = default_wafer();
    wafer.layers[2].doping_per_nm3 = doping;
    let opts = ScfOptions::default();
    match self_consistent_band_with(&wafer, 0.28, &opts) {
        Ok(res) => {
            println!(
                "doping {:.3e} -> n_s = {:.4e} cm^-2 in {} iterations (donor {:.3e}, surf {:.3e} e/nm^2)",
                doping,
                res.band.sheet_density * 1e-4,
                res.iterations,
                res.donor_sheet,
                res.surface_charge,
            );
            for (i, p) in res.band.eigenstates.iter().enumerate() {
                println!("  E_{} = {:.3} meV", i + 1, p.energy);
            }
        }
        Err(e) => println!("doping {:.3e} -> ERROR: {e}", doping),
    }
}
