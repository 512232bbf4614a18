// Running an experiment from a TOML config and reading its manifest.

use seqrpf::experiments::{parse_config, run_loaded, Kind, RunManifest};

const CONFIG: &str = r#"
kind = "llt"

[system]
type = "iid-coin"
window = 4

[params]
n_list = [128, 256, 512]
"#;

/// Runs the config into a scratch directory and returns its manifest.
pub fn run_example() -> seqrpf::Result<RunManifest> {
    let loaded = parse_config(CONFIG, Kind::Llt)?;
    let dir = std::env::temp_dir().join(format!("seqrpf-example-{}", std::process::id()));
    let manifest = run_loaded(Kind::Llt, &loaded, &dir, None, Some(2))?;
    println!("config hash {}", manifest.config_hash);
    for f in &manifest.outputs {
        println!("wrote {}", dir.join(f).display());
    }
    print!("{}", std::fs::read_to_string(dir.join("llt.csv"))?);
    std::fs::remove_dir_all(&dir)?;
    Ok(manifest)
}

#[allow(dead_code)]
fn main() {
    run_example().expect("experiment_runner");
}
