mod rpf_triplets {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/rpf_triplets.rs"));
}
mod circle_maps {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/circle_maps.rs"));
}
mod gibbs_mixing {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/gibbs_mixing.rs"));
}
mod limit_theorems {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/limit_theorems.rs"));
}
mod large_deviations {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/large_deviations.rs"));
}
mod random_environment {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/random_environment.rs"));
}
mod experiment_runner {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/experiment_runner.rs"));
}

#[test]
fn rpf_triplets_runs() {
    let delta = rpf_triplets::run_example().expect("rpf_triplets");
    assert!(delta > 0.0 && delta < 1.0);
}

#[test]
fn circle_maps_runs() {
    let lambda = circle_maps::run_example().expect("circle_maps");
    assert!(lambda > 1.0);
}

#[test]
fn gibbs_mixing_runs() {
    let delta = gibbs_mixing::run_example().expect("gibbs_mixing");
    assert!(delta < 1.0);
}

#[test]
fn limit_theorems_runs() {
    let band = limit_theorems::run_example().expect("limit_theorems");
    assert!(band.is_finite() && band > 0.0);
}

#[test]
fn large_deviations_runs() {
    let worst = large_deviations::run_example().expect("large_deviations");
    assert!(worst < 1e-8);
}

#[test]
fn random_environment_runs() {
    let exponent = random_environment::run_example().expect("random_environment");
    assert!(exponent < 0.0);
}

#[test]
fn experiment_runner_runs() {
    let m = experiment_runner::run_example().expect("experiment_runner");
    assert!(m.outputs.contains(&"llt.csv".to_string()));
}
