#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

pub const PRTP_SUPPORT: [f64; 4] = [0.0, 1.0, 1.5, 3.0];
pub const EMUC_SUPPORT: [f64; 3] = [1.0, 1.5, 2.0];
pub const IMPACT_SUPPORT: [f64; 3] = [-3.0, -2.0, -1.0];

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_metaemu"));
    cmd.env_remove("METAEMU_SEED").env_remove("RUST_LOG");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn pick(rng: &mut ChaCha8Rng, support: &[f64], probs: &[f64]) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (s, p) in support.iter().zip(probs) {
        acc += p;
        if u < acc {
            return *s;
        }
    }
    *support.last().unwrap()
}

/// Estimates CSV with scc linear in the assumptions and noise growing with prtp.
/// Four estimates per paper.
pub fn synthetic_csv(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut out = String::from("scc,year,prtp,emuc,impact,growth_impact,impact_kind,weight,paper_id\n");
    for i in 0..n {
        let prtp = pick(&mut rng, &PRTP_SUPPORT, &[0.2, 0.4, 0.25, 0.15]);
        let emuc = pick(&mut rng, &EMUC_SUPPORT, &[0.3, 0.3, 0.4]);
        let impact = pick(&mut rng, &IMPACT_SUPPORT, &[0.2, 0.5, 0.3]);
        let year = rng.random_range(1990..=2020);
        let weight = rng.random_range(1..=4) as f64 / 2.0;
        let scc = 250.0 - 66.0 * prtp - 30.0 * (emuc - 1.0) - 15.0 * impact
            + 0.5 * (year as f64 - 2005.0)
            + (20.0 + 10.0 * prtp) * noise.sample(&mut rng);
        out.push_str(&format!(
            "{scc:.3},{year},{prtp},{emuc},{impact},,level,{weight},paper{}\n",
            i / 4
        ));
    }
    out
}

pub fn write_distribution(path: &Path, assumption: &str, support: &[f64], probability: &[f64]) {
    let body = json!({"assumption": assumption, "support": support, "probability": probability});
    std::fs::write(path, body.to_string()).unwrap();
}
