use sqpc_core::config::SimulationConfig;
use sqpc_core::gates::saddle_fit;
use sqpc_core::material::{DeviceGeometry, Interfaces};
use sqpc_core::sweep::{detect_plateaus, gate_sweep, Model, SweepRange};

fn main() {
    let device: usize = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(5);
    let mut cfg = SimulationConfig::default();
    cfg.device = DeviceGeometry::table_device(device).unwrap();
    cfg.device.interfaces = Interfaces::One;
    cfg.device_index = Some(device);
    cfg.delta_0 = 0.0;

    for vg in [-0.005, -0.01, -0.02, -0.03, -0.04, -0.06] {
        if let Some(s) = saddle_fit(&cfg.device, vg, cfg.m_eff).unwrap() {
            println!(
                "V_g={vg:7.3}: V0={:8.3} meV, hw_x={:.3}, hw_y={:.3}, ratio={:.2}, open~{:.2}",
                s.v0,
                s.hbar_omega_x,
                s.hbar_omega_y,
                s.hbar_omega_y / s.hbar_omega_x,
                (14.49 - s.v0) / s.hbar_omega_y
            );
        } else {
            println!("V_g={vg:7.3}: no barrier");
        }
    }

    let range = SweepRange { start: -0.06, stop: -0.001, step: 0.0001 };
    let trace = gate_sweep(&cfg, Model::Analytic, 0.0, &range).unwrap();
    let plateaus = detect_plateaus(&trace, 1.0, 0.002).unwrap();
    for p in &plateaus {
        println!("plateau [{:.4}, {:.4}] V  height {:.5} G0", p.v_start, p.v_end, p.height);
    }
}
