use crate::error::{Error, Result};

/// Multichannel observations `X_0 … X_{N-1}`, stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    channels: Vec<Vec<f64>>,
}

impl SampleMatrix {
    /// Requires at least one channel, equal channel lengths, an even
    /// positive length and finite values.
    pub fn new(channels: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = channels.first() else {
            return Err(Error::domain("sample has no channels"));
        };
        let n = first.len();
        if n == 0 || n % 2 != 0 {
            return Err(Error::domain(format!(
                "sample length must be even and positive, got {n}"
            )));
        }
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::domain("channels have different lengths"));
        }
        if channels.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::domain("sample contains non-finite values"));
        }
        Ok(SampleMatrix { channels })
    }

    /// Builds from time-major rows, dropping the final row when the count is
    /// odd. Returns whether a row was dropped.
    pub fn from_rows_truncating(rows: &[Vec<f64>]) -> Result<(Self, bool)> {
        let Some(first) = rows.first() else {
            return Err(Error::domain("sample has no rows"));
        };
        let p = first.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::domain("rows have different widths"));
        }
        let truncated = rows.len() % 2 == 1;
        let n = rows.len() - usize::from(truncated);
        let channels = (0..p).map(|c| rows[..n].iter().map(|r| r[c]).collect()).collect();
        Ok((SampleMatrix::new(channels)?, truncated))
    }

    pub fn p(&self) -> usize {
        self.channels.len()
    }

    pub fn n(&self) -> usize {
        self.channels[0].len()
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    /// Observation vector at time `t`.
    pub fn row(&self, t: usize) -> Vec<f64> {
        self.channels.iter().map(|c| c[t]).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.channels
            .iter()
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect()
    }

    /// Copy with each channel's sample mean removed.
    pub fn demeaned(&self) -> SampleMatrix {
        let channels = self
            .channels
            .iter()
            .zip(self.means())
            .map(|(c, m)| c.iter().map(|x| x - m).collect())
            .collect();
        SampleMatrix { channels }
    }
}
