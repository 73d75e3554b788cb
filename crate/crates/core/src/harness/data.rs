//! Multimodal datasets: synthetic generation and the plain-text file format.
//!
//! ```text
//! M,C,N
//! d_1,...,d_M
//! id,label,<d_1 values>,...,<d_M values>     (one row per sample; empty label = unknown)
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::RngStream;
use crate::types::MultimodalInstance;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub classes: usize,
    pub dims: Vec<usize>,
    pub instances: Vec<MultimodalInstance>,
    index: HashMap<usize, usize>,
}

impl Dataset {
    pub fn new(classes: usize, dims: Vec<usize>, instances: Vec<MultimodalInstance>) -> Result<Self> {
        if classes < 2 {
            return Err(invalid("dataset needs at least two classes"));
        }
        let mut index = HashMap::with_capacity(instances.len());
        for (i, x) in instances.iter().enumerate() {
            x.check_dims(&dims)?;
            if let Some(y) = x.label {
                if y >= classes {
                    return Err(invalid(format!("instance {} has label {y} >= {classes}", x.id)));
                }
            }
            if index.insert(x.id, i).is_some() {
                return Err(invalid(format!("duplicate instance id {}", x.id)));
            }
        }
        Ok(Self {
            classes,
            dims,
            instances,
            index,
        })
    }

    pub fn modalities(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&MultimodalInstance> {
        self.index.get(&id).map(|&i| &self.instances[i])
    }

    /// Instances for `ids`, in iteration order. Panics on unknown ids.
    pub fn select<'a, I: IntoIterator<Item = &'a usize>>(&self, ids: I) -> Vec<&MultimodalInstance> {
        ids.into_iter()
            .map(|id| self.get(*id).unwrap_or_else(|| panic!("unknown instance id {id}")))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{},{},{}", self.modalities(), self.classes, self.len());
        let dims: Vec<String> = self.dims.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{}", dims.join(","));
        for x in &self.instances {
            let _ = write!(out, "{},", x.id);
            if let Some(y) = x.label {
                let _ = write!(out, "{y}");
            }
            for v in x.features.iter().flatten() {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Parse(msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty dataset file".into()))?;
        let head: Vec<usize> = header
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| bad(format!("bad header '{header}'"))))
            .collect::<Result<_>>()?;
        let [m, c, n] = head[..] else {
            return Err(bad(format!("header must be M,C,N, got '{header}'")));
        };
        let dim_line = lines.next().ok_or_else(|| bad("missing dimension line".into()))?;
        let dims: Vec<usize> = dim_line
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| bad(format!("bad dimension line '{dim_line}'"))))
            .collect::<Result<_>>()?;
        if dims.len() != m {
            return Err(bad(format!("{} dimensions listed for {m} modalities", dims.len())));
        }
        let width: usize = dims.iter().sum();
        let mut instances = Vec::with_capacity(n);
        for (row, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 + width {
                return Err(bad(format!("row {} has {} fields, expected {}", row + 1, fields.len(), 2 + width)));
            }
            let id: usize = fields[0].parse().map_err(|_| bad(format!("bad id '{}'", fields[0])))?;
            let label = if fields[1].is_empty() {
                None
            } else {
                Some(fields[1].parse().map_err(|_| bad(format!("bad label '{}'", fields[1])))?)
            };
            let values: Vec<f64> = fields[2..]
                .iter()
                .map(|s| s.parse().map_err(|_| bad(format!("bad feature '{s}'"))))
                .collect::<Result<_>>()?;
            let mut features = Vec::with_capacity(m);
            let mut offset = 0;
            for &d in &dims {
                features.push(values[offset..offset + d].to_vec());
                offset += d;
            }
            instances.push(MultimodalInstance { id, label, features });
        }
        if instances.len() != n {
            return Err(bad(format!("header declares {n} rows, found {}", instances.len())));
        }
        Dataset::new(c, dims, instances)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Class-conditional Gaussian data with per-modality signal strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub dims: Vec<usize>,
    pub classes: usize,
    pub samples: usize,
    /// Signal strength per modality in [0,1]; 0 makes a modality pure noise.
    pub informativeness: Vec<f64>,
    pub noise: f64,
    /// When set, modality 0 only separates classes below the threshold and
    /// modality 1 only the rest.
    pub drift_threshold: Option<usize>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            dims: vec![16, 16],
            classes: 6,
            samples: 3000,
            informativeness: vec![1.0, 1.0],
            noise: 1.0,
            drift_threshold: None,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(invalid("every modality needs a positive dimension"));
        }
        if self.informativeness.len() != self.dims.len() {
            return Err(invalid("one informativeness value per modality"));
        }
        if self.informativeness.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(invalid("informativeness must lie in [0,1]"));
        }
        if self.classes < 2 || self.samples < self.classes {
            return Err(invalid("need at least two classes and one sample per class"));
        }
        if !(self.noise.is_finite() && self.noise > 0.0) {
            return Err(invalid("noise must be positive"));
        }
        if let Some(t) = self.drift_threshold {
            if self.dims.len() < 2 || t == 0 || t >= self.classes {
                return Err(invalid("drift needs two modalities and a threshold in 1..C-1"));
            }
        }
        Ok(())
    }

    fn informative(&self, modality: usize, class: usize) -> bool {
        match (self.drift_threshold, modality) {
            (Some(t), 0) => class < t,
            (Some(t), 1) => class >= t,
            _ => true,
        }
    }
}

/// Samples `spec.samples` instances with balanced labels `id % C`.
pub fn generate_synthetic(spec: &SyntheticSpec, rng: &RngStream) -> Result<Dataset> {
    spec.validate()?;
    let mut r = rng.rng();
    let mut means = vec![Vec::with_capacity(spec.dims.len()); spec.classes];
    for (c, row) in means.iter_mut().enumerate() {
        for (m, &d) in spec.dims.iter().enumerate() {
            let strength = if spec.informative(m, c) { spec.informativeness[m] } else { 0.0 };
            let mu: Vec<f64> = (0..d)
                .map(|_| {
                    let g: f64 = StandardNormal.sample(&mut r);
                    strength * g
                })
                .collect();
            row.push(mu);
        }
    }
    let instances = (0..spec.samples)
        .map(|id| {
            let label = id % spec.classes;
            let features = means[label]
                .iter()
                .map(|mu| {
                    mu.iter()
                        .map(|m| {
                            let e: f64 = StandardNormal.sample(&mut r);
                            m + spec.noise * e
                        })
                        .collect()
                })
                .collect();
            MultimodalInstance {
                id,
                label: Some(label),
                features,
            }
        })
        .collect();
    Dataset::new(spec.classes, spec.dims.clone(), instances)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SyntheticSpec {
        SyntheticSpec {
            dims: vec![3, 2],
            classes: 3,
            samples: 30,
            informativeness: vec![1.0, 0.5],
            noise: 0.5,
            drift_threshold: None,
        }
    }

    #[test]
    fn same_seed_same_file() {
        let a = generate_synthetic(&small_spec(), &RngStream::new(1, "data")).unwrap();
        let b = generate_synthetic(&small_spec(), &RngStream::new(1, "data")).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let c = generate_synthetic(&small_spec(), &RngStream::new(2, "data")).unwrap();
        assert_ne!(a.to_text(), c.to_text());
    }

    #[test]
    fn text_round_trip() {
        let mut d = generate_synthetic(&small_spec(), &RngStream::new(3, "data")).unwrap();
        d.instances[4].label = None;
        let text = d.to_text();
        let back = Dataset::parse(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.instances, d.instances);
        assert!(text.starts_with("2,3,30\n3,2\n"));
    }

    #[test]
    fn zero_informativeness_means_shared_mean() {
        let spec = SyntheticSpec {
            informativeness: vec![0.0, 0.0],
            noise: 1e-9,
            ..small_spec()
        };
        let d = generate_synthetic(&spec, &RngStream::new(4, "data")).unwrap();
        assert!(d.instances.iter().flat_map(|x| x.features.iter().flatten()).all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn drift_silences_modalities_per_class() {
        let spec = SyntheticSpec {
            dims: vec![4, 4],
            classes: 4,
            samples: 40,
            informativeness: vec![1.0, 1.0],
            noise: 1e-9,
            drift_threshold: Some(2),
        };
        let d = generate_synthetic(&spec, &RngStream::new(5, "data")).unwrap();
        for x in &d.instances {
            let y = x.label.unwrap();
            let m0_zero = x.features[0].iter().all(|v| v.abs() < 1e-6);
            let m1_zero = x.features[1].iter().all(|v| v.abs() < 1e-6);
            assert_eq!(m0_zero, y >= 2);
            assert_eq!(m1_zero, y < 2);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = small_spec();
        s.informativeness = vec![1.5, 0.0];
        assert!(s.validate().is_err());
        let mut s = small_spec();
        s.drift_threshold = Some(3);
        assert!(s.validate().is_err());
        let mut s = small_spec();
        s.noise = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn parse_errors() {
        assert!(Dataset::parse("").is_err());
        assert!(Dataset::parse("1,2,1\n2\n0,0,1.0\n").is_err());
        assert!(Dataset::parse("1,2,2\n1\n0,0,1.0\n").is_err());
        assert!(Dataset::parse("1,2,1\n1\n0,5,1.0\n").is_err());
    }
}
