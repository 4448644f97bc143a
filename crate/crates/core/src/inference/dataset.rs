use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::io::fmt_f64;

/// Labelled feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

/// Seed of the bundled toy dataset.
pub const TOY_SEED: u64 = 20_210_601;

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Dimension {
                expected: features.len(),
                actual: labels.len(),
            });
        }
        let n_features = features.first().map_or(0, Vec::len);
        if let Some(bad) = features.iter().find(|f| f.len() != n_features) {
            return Err(Error::Dimension {
                expected: n_features,
                actual: bad.len(),
            });
        }
        if features.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset", "features must be finite"));
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        Ok(Self {
            features,
            labels,
            n_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Gaussian blobs: 4 classes, 16 features, 512 samples, unit-variance
    /// noise around class centres of norm 3.5.
    pub fn toy() -> Self {
        Self::blobs(4, 16, 512, 3.5, TOY_SEED)
    }

    pub fn blobs(
        n_classes: usize,
        n_features: usize,
        n_samples: usize,
        radius: f64,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centres: Vec<Vec<f64>> = (0..n_classes)
            .map(|_| {
                let v: Vec<f64> = (0..n_features)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter().map(|x| x * radius / norm).collect()
            })
            .collect();
        let mut features = Vec::with_capacity(n_samples);
        let mut labels = Vec::with_capacity(n_samples);
        for i in 0..n_samples {
            let label = i % n_classes;
            let x = centres[label]
                .iter()
                .map(|c| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    c + z
                })
                .collect();
            features.push(x);
            labels.push(label);
        }
        Self {
            features,
            labels,
            n_classes,
        }
    }

    /// Reads `feature_0,...,feature_{n-1},label`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().next_back() != Some("label") {
            return Err(Error::invalid(
                "dataset header",
                "last column must be `label`",
            ));
        }
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let n = row.len();
            let parsed = row
                .iter()
                .take(n - 1)
                .map(|v| v.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Error::invalid("dataset feature", format!("row {}: {e}", line + 1)))?;
            let label = row[n - 1]
                .parse::<usize>()
                .map_err(|e| Error::invalid("dataset label", format!("row {}: {e}", line + 1)))?;
            features.push(parsed);
            labels.push(label);
        }
        Self::new(features, labels)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.n_features())
            .map(|i| format!("feature_{i}"))
            .collect();
        header.push("label".into());
        wtr.write_record(&header)?;
        for (x, y) in self.features.iter().zip(&self.labels) {
            let mut rec: Vec<String> = x.iter().map(|v| fmt_f64(*v)).collect();
            rec.push(y.to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}
