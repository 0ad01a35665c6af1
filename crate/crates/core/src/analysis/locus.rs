use num_complex::Complex64;

use super::roots::{poly_roots, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::tf::{polyadd, polymul, RationalTF};

#[derive(Debug, Clone, PartialEq)]
pub struct RootLocusData {
    pub gains: Vec<f64>,
    /// `poles[i][b]` is branch `b` at `gains[i]`; branches are matched to
    /// their nearest predecessor so each column traces a continuous curve.
    pub poles: Vec<Vec<Complex64>>,
}

impl RootLocusData {
    pub fn branch_count(&self) -> usize {
        self.poles.first().map_or(0, Vec::len)
    }

    /// Largest distance any branch moves between adjacent gains.
    pub fn max_hop(&self) -> f64 {
        self.poles
            .windows(2)
            .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).norm()))
            .fold(0.0, f64::max)
    }
}

/// Closed-loop characteristic polynomial `den_L(s) + K num_L(s)` of unity
/// negative feedback around `K * compensator * plant`.
pub fn closed_loop_polynomial(plant: &RationalTF, compensator: &RationalTF, gain: f64) -> Vec<f64> {
    let num = polymul(&plant.num, &compensator.num);
    let den = polymul(&plant.den, &compensator.den);
    let scaled: Vec<f64> = num.iter().map(|c| c * gain).collect();
    polyadd(&den, &scaled)
}

pub fn closed_loop_poles(plant: &RationalTF, compensator: &RationalTF, gain: f64) -> Result<Vec<Complex64>> {
    let poly = closed_loop_polynomial(plant, compensator, gain);
    let first = poly.iter().position(|c| *c != 0.0).unwrap_or(poly.len());
    Ok(poly_roots(&poly[first..], DEFAULT_TOL)?.roots)
}

pub fn root_locus(plant: &RationalTF, compensator: &RationalTF, gains: &[f64]) -> Result<RootLocusData> {
    let open_loop = plant.series(compensator);
    if !open_loop.is_proper() {
        return Err(Error::param("compensator", "loop transfer function must be proper"));
    }
    if gains.is_empty() {
        return Err(Error::param("gains", "gain grid is empty"));
    }
    if gains.iter().any(|k| !(*k > 0.0 && k.is_finite())) || gains.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("gains", "must be positive and strictly ascending"));
    }

    let mut poles: Vec<Vec<Complex64>> = Vec::with_capacity(gains.len());
    for &k in gains {
        let mut current = closed_loop_poles(plant, compensator, k)?;
        if let Some(prev) = poles.last() {
            current = match_branches(prev, current);
        }
        poles.push(current);
    }
    Ok(RootLocusData {
        gains: gains.to_vec(),
        poles,
    })
}

/// Greedy nearest-neighbour assignment of new roots onto existing branches:
/// the closest (branch, root) pair over all candidates is fixed first.
fn match_branches(prev: &[Complex64], current: Vec<Complex64>) -> Vec<Complex64> {
    let mut pairs: Vec<(f64, usize, usize)> = prev
        .iter()
        .enumerate()
        .flat_map(|(b, p)| current.iter().enumerate().map(move |(r, c)| ((c - p).norm(), b, r)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut assigned: Vec<Option<Complex64>> = vec![None; prev.len()];
    let mut used = vec![false; current.len()];
    for (_, b, r) in pairs {
        if assigned[b].is_none() && !used[r] {
            assigned[b] = Some(current[r]);
            used[r] = true;
        }
    }
    assigned.into_iter().map(|p| p.expect("branch count is constant")).collect()
}

/// Geometric gain grid with `points` samples between `min` and `max`.
pub fn log_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let (a, b) = (min.ln(), max.ln());
            (0..points)
                .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
                .collect()
        }
    }
}

pub fn linear_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..points)
            .map(|i| min + (max - min) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plant() -> RationalTF {
        // 1 / ((s - 2)(s + 3))
        RationalTF::new(vec![1.0], vec![1.0, 1.0, -6.0]).unwrap()
    }

    #[test]
    fn small_gain_starts_at_open_loop_poles() {
        let locus = root_locus(&plant(), &RationalTF::constant(1.0), &[1e-9, 1e-8]).unwrap();
        let mut first = locus.poles[0].clone();
        crate::analysis::roots::sort_roots(&mut first);
        assert!((first[0].re + 3.0).abs() < 1e-6);
        assert!((first[1].re - 2.0).abs() < 1e-6);
    }

    #[test]
    fn branch_count_constant_and_continuous() {
        let coarse = root_locus(&plant(), &RationalTF::constant(1.0), &log_grid(0.01, 100.0, 50)).unwrap();
        let fine = root_locus(&plant(), &RationalTF::constant(1.0), &log_grid(0.01, 100.0, 400)).unwrap();
        assert!(coarse.poles.iter().all(|p| p.len() == 2));
        assert!(fine.max_hop() < coarse.max_hop());
    }

    #[test]
    fn slow_branch_is_not_stolen_on_coarse_grids() {
        // poles at -5, -0.2, +5; the outer pair meets and leaves the axis
        let den = polymul(&polymul(&[1.0, 5.0], &[1.0, 0.2]), &[1.0, -5.0]);
        let p = RationalTF::new(vec![1.0], den).unwrap();
        let locus = root_locus(&p, &RationalTF::constant(1.0), &[0.01, 2.0]).unwrap();
        let slow = locus.poles[0].iter().position(|z| (z.re + 0.2).abs() < 0.01).unwrap();
        assert!((locus.poles[1][slow].re + 0.2).abs() < 0.1, "{:?}", locus.poles[1]);
    }

    #[test]
    fn rejects_bad_grids_and_improper_loops() {
        assert!(root_locus(&plant(), &RationalTF::constant(1.0), &[2.0, 1.0]).is_err());
        assert!(root_locus(&plant(), &RationalTF::constant(1.0), &[0.0, 1.0]).is_err());
        let improper = RationalTF::new(vec![1.0, 0.0, 0.0, 0.0], vec![1.0]).unwrap();
        assert!(root_locus(&plant(), &improper, &[1.0]).is_err());
    }
}
