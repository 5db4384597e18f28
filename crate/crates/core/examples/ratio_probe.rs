use sqpc_core::gates::saddle_fit;
use sqpc_core::material::{DeviceGeometry, Interfaces};

fn main() {
    for (lc, wc) in [(400.0, 400.0), (400.0, 200.0), (400.0, 100.0), (800.0, 100.0), (1200.0, 100.0), (1600.0, 100.0), (1200.0, 150.0)] {
        let device = DeviceGeometry {
            l_c_nm: lc, w_c_nm: wc, l_j_um: 1.4, w_j_um: 5.0, depth_nm: 120.0,
            interfaces: Interfaces::One, z: 0.0,
        };
        if let Some(s) = saddle_fit(&device, -0.03, 0.037).unwrap() {
            println!(
                "L_c={lc:6.0} W_c={wc:6.0}: V0={:7.2} hw_x={:.3} hw_y={:.3} ratio={:.2}",
                s.v0, s.hbar_omega_x, s.hbar_omega_y, s.hbar_omega_y / s.hbar_omega_x
            );
        }
    }
}
