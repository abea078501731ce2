use alloc::vec::Vec;

use super::Recording;
use crate::error::bail;
use crate::Result;

/// Subtracts the cross-channel mean from every channel at every sample.
pub fn average_reref(rec: &Recording) -> Result<Recording> {
    let c = rec.n_channels();
    if c < 2 {
        bail!(
            Degenerate,
            "average reference of a single channel is identically zero"
        );
    }
    let n = rec.n_samples();
    let mut mean = alloc::vec![0.0; n];
    for row in rec.data() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= c as f64;
    }
    let data = rec
        .data()
        .iter()
        .map(|row| row.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();
    Ok(rec.with_data(data))
}

/// Replaces each bad channel with the unweighted mean of the good channels.
pub fn interpolate_channels(rec: &Recording, bad: &[usize]) -> Result<Recording> {
    let c = rec.n_channels();
    if let Some(&idx) = bad.iter().find(|&&i| i >= c) {
        bail!(
            Argument,
            "bad channel index {idx} out of range for {c} channels"
        );
    }
    let mut is_bad = alloc::vec![false; c];
    for &i in bad {
        is_bad[i] = true;
    }
    let good: Vec<usize> = (0..c).filter(|&i| !is_bad[i]).collect();
    if good.is_empty() {
        bail!(Data, "every channel is marked bad");
    }
    if good.len() == c {
        return Ok(rec.clone());
    }
    let n = rec.n_samples();
    let mut fill = alloc::vec![0.0; n];
    for &g in &good {
        for (f, v) in fill.iter_mut().zip(rec.channel(g)) {
            *f += v;
        }
    }
    for f in fill.iter_mut() {
        *f /= good.len() as f64;
    }
    let data = (0..c)
        .map(|i| {
            if is_bad[i] {
                fill.clone()
            } else {
                rec.channel(i).to_vec()
            }
        })
        .collect();
    Ok(rec.with_data(data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::String;
    use alloc::vec;

    fn rec(data: Vec<Vec<f64>>) -> Recording {
        let labels = (0..data.len())
            .map(|i| format!("E{i}"))
            .collect::<Vec<String>>();
        Recording::new(data, 100.0, labels, vec![], "s").unwrap()
    }

    #[test]
    fn two_channel_reref_is_half_difference() {
        let a = vec![1.0, 4.0, -2.0];
        let b = vec![3.0, 0.0, 5.0];
        let out = average_reref(&rec(vec![a.clone(), b.clone()])).unwrap();
        for i in 0..3 {
            assert!((out.channel(0)[i] - (a[i] - b[i]) / 2.0).abs() < 1e-12);
            assert!((out.channel(1)[i] - (b[i] - a[i]) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reref_zero_mean_and_idempotent() {
        let r = rec(vec![
            vec![1.0, 2.0, 3.0],
            vec![-4.0, 0.5, 9.0],
            vec![0.0, 0.0, 1e3],
        ]);
        let once = average_reref(&r).unwrap();
        for i in 0..3 {
            let s: f64 = once.data().iter().map(|row| row[i]).sum();
            assert!(s.abs() < 1e-9);
        }
        let twice = average_reref(&once).unwrap();
        for (x, y) in once
            .data()
            .iter()
            .flatten()
            .zip(twice.data().iter().flatten())
        {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn reref_single_channel_is_an_error() {
        assert!(matches!(
            average_reref(&rec(vec![vec![1.0, 2.0]])),
            Err(crate::Error::Degenerate(_))
        ));
    }

    #[test]
    fn interpolation_uses_mean_of_good_channels() {
        let r = rec(vec![vec![1.0, 2.0], vec![100.0, 100.0], vec![3.0, 6.0]]);
        let out = interpolate_channels(&r, &[1]).unwrap();
        assert_eq!(out.channel(1), &[2.0, 4.0]);
        assert_eq!(out.channel(0), r.channel(0));
        assert_eq!(interpolate_channels(&r, &[]).unwrap(), r);
        assert!(matches!(
            interpolate_channels(&r, &[0, 1, 2]),
            Err(crate::Error::Data(_))
        ));
        assert!(matches!(
            interpolate_channels(&r, &[3]),
            Err(crate::Error::Argument(_))
        ));
    }
}
