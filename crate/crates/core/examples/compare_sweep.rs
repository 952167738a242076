//! The experiment driver as a library: a small compare run written to a
//! temporary directory, then the manifest read back and verified.

use qwalk::experiment::{self, Command, ExperimentError, Manifest, RunConfig, MANIFEST_FILE};

fn main() -> Result<(), ExperimentError> {
    let mut config = RunConfig::defaults(Command::Compare);
    config.apply_overrides(["theta = 1/4, 1/3", "p = 0.05", "walkers = 200", "steps = 600"])?;
    config.out_dir = std::env::temp_dir().join("qwalk-compare-example");

    match experiment::run(Command::Compare, &config) {
        Ok(outcome) => println!("within tolerance, max deviation {:?}", outcome.max_deviation),
        Err(e @ ExperimentError::Tolerance { .. }) => println!("{e}"),
        Err(e) => return Err(e),
    }
    print!("{}", std::fs::read_to_string(config.out_dir.join("compare.csv"))?);

    let manifest = Manifest::parse(&std::fs::read_to_string(config.out_dir.join(MANIFEST_FILE))?)?;
    println!("manifest config matches: {}", manifest.config == config);
    println!("checksums verify: {}", manifest.verify(&config.out_dir)?);
    Ok(())
}
