//! Experiment manifests: one key/value file that fixes every seed, size and
//! learner setting of a run.
//!
//! ```text
//! seed = 1
//! scale = desk
//! puf.variant = ideal-entropy
//! dataset.size = 20000
//! learners = mlp, gbnn, boosted-trees, tree, forest
//! learner.boosted-trees.boost_tree_depth = 20
//! ```
//!
//! Unset seeds derive from `seed`; unset learner keys take the family
//! defaults for the chosen scale.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use pufbench::kv::{parse_list, KvMap};
use pufbench::learn::{Family, LearnerConfig};
use pufbench::mix::child_seed;
use pufbench::puf::{fingerprint_bytes, PufConfig, Variant};
use pufbench::{Error, Result};
use sha2::{Digest, Sha256};

pub const DESK_DATASET_SIZE: usize = 20_000;
pub const PAPER_DATASET_SIZE: usize = 80_000;

const PUF_SEED_SLOT: u64 = 1;
const DATASET_SEED_SLOT: u64 = 2;
const SPLIT_SEED_SLOT: u64 = 3;
const QUALITY_SEED_SLOT: u64 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Paper,
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Paper => "paper",
        })
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            other => Err(Error::InvalidConfig(format!("unknown scale {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QualitySettings {
    pub devices: usize,
    pub challenges: usize,
    pub repeats: usize,
    pub flip_rate: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerEntry {
    /// File-name-safe label, unique within a manifest.
    pub name: String,
    pub config: LearnerConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentManifest {
    pub seed: u64,
    pub scale: Scale,
    pub puf: PufConfig,
    pub dataset_size: usize,
    pub dataset_seed: u64,
    pub split_seed: u64,
    pub learners: Vec<LearnerEntry>,
    pub quality: QualitySettings,
    /// Not part of the run identity.
    pub out: Option<PathBuf>,
}

/// Command-line values that take precedence over the manifest file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub scale: Option<Scale>,
    pub learners: Option<String>,
    pub out: Option<PathBuf>,
}

/// The negative-control experiment: ideal-entropy responses attacked by
/// the five standard learners.
pub const DEFAULT_MANIFEST: &str = "\
seed = 1
scale = desk
puf.variant = ideal-entropy
learners = mlp, gbnn, boosted-trees, tree, forest
learner.boosted-trees.boost_tree_depth = 20
";

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-' || b == b'_')
}

impl ExperimentManifest {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, &Overrides::default())
    }

    pub fn parse_with(text: &str, overrides: &Overrides) -> Result<Self> {
        let mut kv = KvMap::parse(text)?;
        if let Some(seed) = overrides.seed {
            kv.insert("seed", seed);
        }
        if let Some(scale) = overrides.scale {
            kv.insert("scale", scale);
        }
        if let Some(list) = &overrides.learners {
            kv.insert("learners", list);
        }
        let seed: u64 = kv.take_or("seed", 0)?;
        let scale: Scale = kv.take_or("scale", Scale::Desk)?;
        let out: Option<PathBuf> = kv.take::<String>("out")?.map(PathBuf::from);

        let mut puf_kv = kv.take_prefixed("puf.");
        if puf_kv.is_empty() {
            return Err(Error::InvalidConfig("manifest has no puf.* keys".into()));
        }
        if !puf_kv.contains_key("seed") {
            puf_kv.insert("seed", child_seed(seed, PUF_SEED_SLOT));
        }
        let puf = PufConfig::from_kv(&mut puf_kv)?;
        puf_kv.finish()?;

        let default_size = match scale {
            Scale::Desk => DESK_DATASET_SIZE,
            Scale::Paper => PAPER_DATASET_SIZE,
        };
        let dataset_size: usize = kv.take_or("dataset.size", default_size)?;
        if dataset_size == 0 {
            return Err(Error::InvalidConfig("dataset.size must be at least 1".into()));
        }
        let dataset_seed = kv.take_or("dataset.seed", child_seed(seed, DATASET_SEED_SLOT))?;
        let split_seed = kv.take_or("split.seed", child_seed(seed, SPLIT_SEED_SLOT))?;

        let quality = QualitySettings {
            devices: kv.take_or("quality.devices", 16)?,
            challenges: kv.take_or("quality.challenges", 1000)?,
            repeats: kv.take_or("quality.repeats", 5)?,
            flip_rate: kv.take_or("quality.flip_rate", 0.05)?,
            seed: kv.take_or("quality.seed", child_seed(seed, QUALITY_SEED_SLOT))?,
        };
        if quality.devices < 2 || quality.challenges == 0 || quality.repeats < 2 {
            return Err(Error::InvalidConfig("quality needs >= 2 devices, >= 1 challenge and >= 2 repeats".into()));
        }
        if !(0.0..=1.0).contains(&quality.flip_rate) {
            return Err(Error::InvalidConfig(format!("quality.flip_rate {} outside [0, 1]", quality.flip_rate)));
        }

        let names: Vec<String> = parse_list(&kv.take_or("learners", String::new())?)?;
        let mut learner_keys = kv.take_prefixed("learner.");
        let mut learners = Vec::with_capacity(names.len());
        for name in names {
            if !valid_name(&name) {
                return Err(Error::InvalidConfig(format!("learner name {name:?} must be [a-z0-9_-]+")));
            }
            if learners.iter().any(|l: &LearnerEntry| l.name == name) {
                return Err(Error::InvalidConfig(format!("learner {name:?} listed twice")));
            }
            let mut lk = learner_keys.take_prefixed(&format!("{name}."));
            if !lk.contains_key("family") {
                lk.insert("family", &name);
            }
            let family: Family = lk.take_required::<String>("family")?.parse()?;
            let mut defaults = LearnerConfig::new(family).with_seed(child_seed(seed, fingerprint_bytes(name.as_bytes())));
            if scale == Scale::Paper {
                defaults = defaults.paper_scale();
            }
            let mut merged = defaults.to_kv();
            merged.merge(lk);
            let config = LearnerConfig::from_kv(&mut merged)?;
            merged.finish()?;
            learners.push(LearnerEntry { name, config });
        }
        // A command-line learner list may drop learners the file configures.
        if overrides.learners.is_none() {
            learner_keys.finish().map_err(|e| Error::InvalidConfig(format!("settings for an unlisted learner: {e}")))?;
        }
        kv.finish()?;

        Ok(ExperimentManifest {
            seed,
            scale,
            puf,
            dataset_size,
            dataset_seed,
            split_seed,
            learners,
            quality,
            out: overrides.out.clone().or(out),
        })
    }

    /// Fully explicit form; parsing it back yields the same manifest (minus `out`).
    pub fn render(&self) -> String {
        let mut kv = KvMap::default();
        kv.insert("seed", self.seed);
        kv.insert("scale", self.scale);
        for (k, v) in self.puf.to_kv().iter() {
            kv.insert(&format!("puf.{k}"), v);
        }
        kv.insert("dataset.size", self.dataset_size);
        kv.insert("dataset.seed", self.dataset_seed);
        kv.insert("split.seed", self.split_seed);
        kv.insert("quality.devices", self.quality.devices);
        kv.insert("quality.challenges", self.quality.challenges);
        kv.insert("quality.repeats", self.quality.repeats);
        kv.insert("quality.flip_rate", self.quality.flip_rate);
        kv.insert("quality.seed", self.quality.seed);
        let names: Vec<&str> = self.learners.iter().map(|l| l.name.as_str()).collect();
        kv.insert("learners", names.join(","));
        for l in &self.learners {
            for (k, v) in l.config.to_kv().iter() {
                kv.insert(&format!("learner.{}.{k}", l.name), v);
            }
        }
        kv.render()
    }

    /// SHA-256 of the explicit form, hex encoded.
    pub fn run_id(&self) -> String {
        hex::encode(Sha256::digest(self.render().as_bytes()))
    }

    pub fn learner(&self, name: &str) -> Option<&LearnerEntry> {
        self.learners.iter().find(|l| l.name == name)
    }
}

impl Default for ExperimentManifest {
    fn default() -> Self {
        ExperimentManifest::parse(DEFAULT_MANIFEST).expect("built-in manifest is valid")
    }
}

/// Positive-control manifest: a 64-stage arbiter attacked by logistic
/// regression on parity features, 10,000 training CRPs.
pub fn arbiter_control(seed: u64) -> ExperimentManifest {
    let text = format!(
        "seed = {seed}\npuf.variant = {}\npuf.n_c = 64\ndataset.size = 14285\nlearners = linear\n",
        Variant::Arbiter
    );
    ExperimentManifest::parse(&text).expect("built-in manifest is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_round_trips() {
        let m = ExperimentManifest::default();
        let back = ExperimentManifest::parse(&m.render()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.run_id(), m.run_id());
        assert_eq!(m.learners.len(), 5);
        assert_eq!(m.learner("boosted-trees").unwrap().config.boost_tree_depth, 20);
        assert_eq!(m.dataset_size, DESK_DATASET_SIZE);
    }

    #[test]
    fn overrides_take_precedence() {
        let o = Overrides { seed: Some(9), scale: Some(Scale::Paper), learners: Some("tree".into()), out: None };
        let m = ExperimentManifest::parse_with(DEFAULT_MANIFEST, &o).unwrap();
        assert_eq!(m.seed, 9);
        assert_eq!(m.dataset_size, PAPER_DATASET_SIZE);
        assert_eq!(m.learners.len(), 1);
        assert_ne!(m.run_id(), ExperimentManifest::default().run_id());
    }

    #[test]
    fn paper_scale_widens_the_network() {
        let o = Overrides { scale: Some(Scale::Paper), ..Default::default() };
        let m = ExperimentManifest::parse_with(DEFAULT_MANIFEST, &o).unwrap();
        assert_eq!(m.learner("mlp").unwrap().config.mlp_hidden, vec![5000, 2048, 1024, 512, 256, 64]);
    }

    #[test]
    fn named_learners_with_explicit_family() {
        let m = ExperimentManifest::parse(
            "puf.variant = arbiter\nlearners = shallow, deep\nlearner.shallow.family = tree\nlearner.shallow.tree_depth = 2\nlearner.deep.family = tree\n",
        )
        .unwrap();
        assert_eq!(m.learners[0].config.tree_depth, 2);
        assert_eq!(m.learners[1].config.tree_depth, 20);
        assert_ne!(m.learners[0].config.seed, m.learners[1].config.seed);
    }

    #[test]
    fn invalid_manifests() {
        for text in [
            "",
            "puf.variant = ideal-entropy\ndataset.size = 0",
            "puf.variant = ideal-entropy\nlearners = tree, tree",
            "puf.variant = ideal-entropy\nlearners = tree\nlearner.forest.n_trees = 3",
            "puf.variant = ideal-entropy\nlearners = Tree",
            "puf.variant = ideal-entropy\nbogus = 1",
            "puf.variant = ideal-entropy\nlearners = tree\nlearner.tree.tree_depth = 40",
            "puf.variant = arbiter\npuf.n_r = 4",
        ] {
            assert!(ExperimentManifest::parse(text).is_err(), "{text:?}");
        }
    }

    #[test]
    fn arbiter_control_has_ten_thousand_training_records() {
        let m = arbiter_control(3);
        let (train, _, _) = pufbench::dataset::split_sizes(m.dataset_size);
        assert_eq!(train, 10_000);
    }
}
