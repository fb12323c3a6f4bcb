//! Exact Fisher–Jenks natural breaks.
//!
//! Dynamic programming over the sorted distinct values (weighted by
//! multiplicity) minimizing the total within-class sum of squared deviations.
//! Equal values always share a class; when there are fewer distinct values
//! than requested classes, the number of classes collapses to the distinct
//! count. Among equally good partitions the one with the earliest break
//! positions wins.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JenksError {
    #[error("cannot classify an empty list")]
    Empty,
    #[error("number of classes must be at least 1")]
    NoClasses,
    #[error("non-finite value {0}")]
    NonFinite(f64),
}

/// One class: inclusive value bounds and the number of input values it holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassRange {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

struct Prefix {
    weight: Vec<f64>,
    sum: Vec<f64>,
    squares: Vec<f64>,
}

impl Prefix {
    fn new(values: &[f64], weights: &[usize]) -> Self {
        let mut prefix = Prefix {
            weight: vec![0.0],
            sum: vec![0.0],
            squares: vec![0.0],
        };
        for (&v, &w) in values.iter().zip(weights) {
            let w = w as f64;
            prefix.weight.push(prefix.weight.last().unwrap() + w);
            prefix.sum.push(prefix.sum.last().unwrap() + w * v);
            prefix.squares.push(prefix.squares.last().unwrap() + w * v * v);
        }
        prefix
    }

    /// Weighted SSD of distinct values `from..to`.
    fn cost(&self, from: usize, to: usize) -> f64 {
        let w = self.weight[to] - self.weight[from];
        let s = self.sum[to] - self.sum[from];
        let q = self.squares[to] - self.squares[from];
        (q - s * s / w).max(0.0)
    }
}

fn tolerance(cost: f64) -> f64 {
    1e-9 * cost.abs().max(1.0)
}

/// Class ranges for `values`, lowest class first.
pub fn jenks_breaks(values: &[f64], k: usize) -> Result<Vec<ClassRange>, JenksError> {
    if values.is_empty() {
        return Err(JenksError::Empty);
    }
    if k == 0 {
        return Err(JenksError::NoClasses);
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(JenksError::NonFinite(bad));
    }

    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::new();
    let mut weights: Vec<usize> = Vec::new();
    for v in sorted {
        if distinct.last() == Some(&v) {
            *weights.last_mut().unwrap() += 1;
        } else {
            distinct.push(v);
            weights.push(1);
        }
    }

    let m = distinct.len();
    let classes = k.min(m);
    let prefix = Prefix::new(&distinct, &weights);

    // best[c][i]: least cost of splitting distinct[i..] into c + 1 classes.
    let mut best = vec![vec![f64::INFINITY; m + 1]; classes];
    for (i, cell) in best[0].iter_mut().enumerate().take(m) {
        *cell = prefix.cost(i, m);
    }
    for c in 1..classes {
        for i in 0..m.saturating_sub(c) {
            best[c][i] = (i + 1..=m - c)
                .map(|j| prefix.cost(i, j) + best[c - 1][j])
                .fold(f64::INFINITY, f64::min);
        }
    }

    // Walk forward taking the earliest break that stays optimal.
    let mut bounds = Vec::with_capacity(classes);
    let mut start = 0;
    for c in (1..classes).rev() {
        let target = best[c][start];
        let end = (start + 1..=m - c)
            .find(|&j| prefix.cost(start, j) + best[c - 1][j] <= target + tolerance(target))
            .expect("an optimal break exists");
        bounds.push((start, end));
        start = end;
    }
    bounds.push((start, m));

    Ok(bounds
        .into_iter()
        .map(|(from, to)| ClassRange {
            lower: distinct[from],
            upper: distinct[to - 1],
            count: weights[from..to].iter().sum(),
        })
        .collect())
}

/// Zero-based class index of each value, in input order.
pub fn jenks_classify(values: &[f64], k: usize) -> Result<Vec<usize>, JenksError> {
    let ranges = jenks_breaks(values, k)?;
    Ok(values
        .iter()
        .map(|v| ranges.iter().position(|r| *v <= r.upper).unwrap_or(ranges.len() - 1))
        .collect())
}
