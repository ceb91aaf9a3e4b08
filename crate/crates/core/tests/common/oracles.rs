//! Straight-from-the-definition reference implementations.

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n - 1.0);
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / (n - 1.0);
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum::<f64>() / (n - 1.0);
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx.sqrt() * vy.sqrt()))
}

/// rank = (#smaller) + (#equal + 1) / 2
pub fn ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let less = v.iter().filter(|b| *b < a).count() as f64;
            let equal = v.iter().filter(|b| *b == a).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&ranks(x), &ranks(y))
}

/// tau-b by enumerating every pair.
pub fn kendall(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1;
            } else if dy == 0.0 {
                ty += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                c += 1;
            } else {
                d += 1;
            }
        }
    }
    let denom = (((c + d + tx) * (c + d + ty)) as f64).sqrt();
    (denom > 0.0).then(|| (c - d) as f64 / denom)
}

/// Groups rows by document, correlates each group with >= 2 rows and
/// averages the defined ones. Returns (mean, used, skipped).
pub fn summary_level(rows: &[(String, f64, f64)], f: fn(&[f64], &[f64]) -> Option<f64>) -> (f64, usize, usize) {
    let mut docs: Vec<String> = rows.iter().map(|r| r.0.clone()).collect();
    docs.sort();
    docs.dedup();
    let mut values = Vec::new();
    let mut skipped = 0;
    for doc in docs {
        let m: Vec<f64> = rows.iter().filter(|r| r.0 == doc).map(|r| r.1).collect();
        let h: Vec<f64> = rows.iter().filter(|r| r.0 == doc).map(|r| r.2).collect();
        match (m.len() >= 2).then(|| f(&m, &h)).flatten() {
            Some(v) => values.push(v),
            None => skipped += 1,
        }
    }
    (values.iter().sum::<f64>() / values.len() as f64, values.len(), skipped)
}

/// Small-range integers so ties are common.
pub fn random_vectors(rng: &mut impl rand::Rng, max_len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rng.random_range(2..=max_len);
    let range = rng.random_range(2..12);
    let x = (0..n).map(|_| rng.random_range(0..range) as f64).collect();
    let y = (0..n).map(|_| if rng.random_bool(0.3) { rng.random::<f64>() } else { rng.random_range(0..range) as f64 }).collect();
    (x, y)
}
