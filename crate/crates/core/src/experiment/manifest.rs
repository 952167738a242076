//! Run manifests: what ran, with which parameters, and what it wrote.

use std::path::Path;

use sha2::{Digest, Sha256};

use super::config::{Command, RunConfig};
use super::ExperimentError;

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub command: Command,
    pub version: String,
    pub seed: u64,
    pub duration_secs: f64,
    pub config: RunConfig,
    /// `(file name, lowercase hex SHA-256)` in write order.
    pub checksums: Vec<(String, String)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String, ExperimentError> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut out = format!(
            "command = {}\nversion = {}\nseed = {}\nduration_secs = {:.3}\n\n[config]\n",
            self.command.name(),
            self.version,
            self.seed,
            self.duration_secs
        );
        out.push_str(&self.config.to_text());
        out.push_str("\n[checksums]\n");
        for (name, hash) in &self.checksums {
            out.push_str(&format!("{name} = {hash}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let bad = |msg: &str| ExperimentError::Config(format!("manifest: {msg}"));
        let mut header = Vec::new();
        let mut config = String::new();
        let mut checksums = Vec::new();
        let mut section = "";
        for line in text.lines() {
            let trimmed = line.trim();
            match trimmed {
                "[config]" | "[checksums]" => {
                    section = trimmed;
                    continue;
                }
                "" => continue,
                _ => {}
            }
            match section {
                "" => header.push(
                    trimmed
                        .split_once('=')
                        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                        .ok_or_else(|| bad("malformed header line"))?,
                ),
                "[config]" => {
                    config.push_str(line);
                    config.push('\n');
                }
                _ => {
                    let (k, v) = trimmed.split_once('=').ok_or_else(|| bad("malformed checksum line"))?;
                    checksums.push((k.trim().to_string(), v.trim().to_string()));
                }
            }
        }
        let field = |key: &str| {
            header
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| bad(&format!("missing `{key}`")))
        };
        let command = Command::from_name(&field("command")?).ok_or_else(|| bad("unknown command"))?;
        Ok(Self {
            command,
            version: field("version")?,
            seed: field("seed")?.parse().map_err(|_| bad("bad seed"))?,
            duration_secs: field("duration_secs")?.parse().map_err(|_| bad("bad duration"))?,
            config: RunConfig::parse(command, &config)?,
            checksums,
        })
    }

    /// Recomputes every checksum against the files in `dir`.
    pub fn verify(&self, dir: &Path) -> Result<bool, ExperimentError> {
        for (name, hash) in &self.checksums {
            if &sha256_file(&dir.join(name))? != hash {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn render_parse_round_trip() {
        let mut config = RunConfig::defaults(Command::Purity);
        config.seed = 99;
        let m = Manifest {
            command: Command::Purity,
            version: "0.1.0".into(),
            seed: 99,
            duration_secs: 1.5,
            config,
            checksums: vec![("purity.csv".into(), sha256_hex(b"x"))],
        };
        assert_eq!(Manifest::parse(&m.render()).unwrap(), m);
    }
}
