use lpjohn::functions::*;
use lpjohn::solver::*;
use lpjohn::validation::*;

fn main() {
    let corpus = builtin_corpus(&FunctionOptions::default()).unwrap();
    for name in ["gaussian-diag-4-1", "gauge-square-q2", "gauge-hexagon-q2", "grid-smoothed-max"] {
        let m = corpus.iter().find(|m| m.name == name).unwrap();
        let r32 = solve_ep(&m.f, 32.0, &SolveOptions::default()).unwrap();
        let rinf = solve_ep(&m.f, f64::INFINITY, &SolveOptions::default()).unwrap();
        let gap = (rinf.ellipsoid.mass() - r32.ellipsoid.mass()).abs() / r32.ellipsoid.mass();
        println!("{name}: J(E_32)={:.6} J(E_inf)={:.6} gap={:.4}", r32.ellipsoid.mass(), rinf.ellipsoid.mass(), gap);
    }
}
