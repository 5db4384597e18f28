use sqpc_core::band::{solve_poisson_1d, Grid1d, PoissonBc};

fn main() {
    let grid = Grid1d::uniform(0.0, 500.0, 0.25).unwrap();
    let n = grid.len();
    let mut charge = vec![0.0; n];
    for (i, &x) in grid.positions.iter().enumerate() {
        if x >= 47.0 && x < 62.0 {
            charge[i] = 4.9e-4; // donor slab
        }
    }
    let eps = vec![13.2; n];
    let u = solve_poisson_1d(&charge, &eps, &grid, PoissonBc::Dirichlet(200.0), PoissonBc::Neumann).unwrap();
    for &x in &[0.0, 25.0, 47.0, 62.0, 100.0, 122.0, 137.0, 152.0, 300.0, 500.0] {
        let i = (x / 0.25) as usize;
        println!("U({x:6.1} nm) = {:10.3} meV", u[i.min(n - 1)]);
    }
}
