use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use waterbomb_opt::design::{DesignVector, GeometryParams, MaterialPair};
use waterbomb_opt::engine::{total_energy, Configuration};
use waterbomb_opt::mesh::build_mesh;

fn main() {
    let x = DesignVector { th1: 0.1, th2: 0.7464317169008073, th3: 0.8039955395199434, omega: 0.5, h_ratio: 0.3 };
    let g = GeometryParams { resolution: 1, ..GeometryParams::default() };
    let mesh = build_mesh(&x, &g, &MaterialPair::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1103506105053402449);
    let mut config = Configuration::from_mesh(&mesh);
    for p in &mut config.positions {
        p.x += rng.gen_range(-0.5..0.5);
        p.y += rng.gen_range(-0.5..0.5);
        p.z += rng.gen_range(-0.5..0.5);
    }
    config.update_psi_ref(&mesh).unwrap();
    let mut flipped = config.clone();
    for p in &mut flipped.positions { p.z = -p.z; }
    flipped.update_psi_ref(&mesh).unwrap();
    // per-hinge comparison
    for (i, _h) in mesh.hinges.iter().enumerate() {
        println!("hinge {i} psi {:.6} vs {:.6} (sum {:.6})", config.psi_ref[i], flipped.psi_ref[i], config.psi_ref[i] + flipped.psi_ref[i]);
    }
    let (u, _) = total_energy(&mesh, &config).unwrap();
    let (uf, _) = total_energy(&mesh, &flipped).unwrap();
    println!("U {u:.6} Uflip {uf:.6}");
}
