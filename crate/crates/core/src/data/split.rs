use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::LabelVector;

/// Disjoint train/validation/test node sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions { train: 0.6, val: 0.2 }
    }
}

fn ceil_share(fraction: f64, count: usize) -> usize {
    // tolerance keeps exact products like 0.6 * 5 from rounding up to 4
    (fraction * count as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Per-class stratified split.
///
/// Each class of size `c` is shuffled, then `ceil(train * c)` nodes go to
/// training, `ceil(val * c)` of the remainder to validation and the rest to
/// test. Every output list is sorted ascending.
pub fn make_split(labels: &LabelVector, fractions: SplitFractions, seed: u64) -> Result<SplitSpec> {
    if !(fractions.train > 0.0 && fractions.val >= 0.0 && fractions.train + fractions.val <= 1.0) {
        return Err(Error::Config(format!("invalid split fractions {fractions:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = SplitSpec {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
        seed,
    };
    for (class, mut members) in labels.class_members().into_iter().enumerate() {
        if members.len() < 3 {
            return Err(Error::ClassTooSmall {
                class,
                count: members.len(),
            });
        }
        members.shuffle(&mut rng);
        let c = members.len();
        let n_train = ceil_share(fractions.train, c).min(c);
        let n_val = ceil_share(fractions.val, c).min(c - n_train);
        split.train.extend_from_slice(&members[..n_train]);
        split.val.extend_from_slice(&members[n_train..n_train + n_val]);
        split.test.extend_from_slice(&members[n_train + n_val..]);
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

impl SplitSpec {
    /// Text form: `seed:`, `train:`, `val:` and `test:` lines with
    /// whitespace-separated node ids.
    pub fn to_text(&self) -> String {
        let mut out = format!("seed: {}\n", self.seed);
        for (name, ids) in [("train", &self.train), ("val", &self.val), ("test", &self.test)] {
            let _ = write!(out, "{name}:");
            for id in ids {
                let _ = write!(out, " {id}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let mut seed = None;
        let mut lists: [Option<Vec<usize>>; 3] = [None, None, None];
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected `key: values`"))?;
            let parse_ids = || -> Result<Vec<usize>> {
                rest.split_whitespace()
                    .map(|t| t.parse().map_err(|_| Error::parse(origin, i + 1, format!("bad node id {t:?}"))))
                    .collect()
            };
            match key.trim() {
                "seed" => {
                    seed = Some(
                        rest.trim()
                            .parse()
                            .map_err(|_| Error::parse(origin, i + 1, "bad seed"))?,
                    )
                }
                "train" => lists[0] = Some(parse_ids()?),
                "val" => lists[1] = Some(parse_ids()?),
                "test" => lists[2] = Some(parse_ids()?),
                other => return Err(Error::parse(origin, i + 1, format!("unknown key {other:?}"))),
            }
        }
        let missing = |what: &str| Error::Config(format!("{}: missing `{what}:` line", origin.display()));
        let [train, val, test] = lists;
        Ok(SplitSpec {
            seed: seed.ok_or_else(|| missing("seed"))?,
            train: train.ok_or_else(|| missing("train"))?,
            val: val.ok_or_else(|| missing("val"))?,
            test: test.ok_or_else(|| missing("test"))?,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_text(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_nodes_of_one_class() {
        let labels = LabelVector::new(vec![0; 10], 1).unwrap();
        let s = make_split(&labels, SplitFractions::default(), 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (6, 2, 2));
    }

    #[test]
    fn rounding_rule() {
        let labels = LabelVector::new(vec![0; 5], 1).unwrap();
        let s = make_split(&labels, SplitFractions::default(), 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (3, 1, 1));
        let labels = LabelVector::new(vec![0; 7], 1).unwrap();
        let s = make_split(&labels, SplitFractions::default(), 1).unwrap();
        // ceil(4.2) = 5 train, ceil(1.4) = 2 val, 0 test
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (5, 2, 0));
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let labels = LabelVector::from_labels((0..60).map(|i| i % 3).collect()).unwrap();
        let a = make_split(&labels, SplitFractions::default(), 9).unwrap();
        let b = make_split(&labels, SplitFractions::default(), 9).unwrap();
        let c = make_split(&labels, SplitFractions::default(), 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn small_class_is_named() {
        let labels = LabelVector::from_labels(vec![0, 0, 0, 1, 1]).unwrap();
        match make_split(&labels, SplitFractions::default(), 0) {
            Err(Error::ClassTooSmall { class, count }) => assert_eq!((class, count), (1, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn text_round_trip() {
        let labels = LabelVector::from_labels((0..12).map(|i| i % 2).collect()).unwrap();
        let s = make_split(&labels, SplitFractions::default(), 77).unwrap();
        let back = SplitSpec::from_text(&s.to_text(), Path::new("split.txt")).unwrap();
        assert_eq!(back, s);
        assert!(SplitSpec::from_text("seed: 1\ntrain: 1 x\n", Path::new("s")).is_err());
        assert!(SplitSpec::from_text("seed: 1\ntrain: 1\nval: 2\n", Path::new("s")).is_err());
    }
}
