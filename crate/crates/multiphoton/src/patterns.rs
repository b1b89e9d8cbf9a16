//! Photon occupation patterns over optical modes.
//!
//! Mode indices are 0-based everywhere in the API; the text formats
//! (CSV, CLI) use 1-based indices and conversion happens only at that
//! boundary, in [`OccupationPattern::parse_one_based`] and
//! [`OccupationPattern::format_one_based`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A multiset of occupied modes: `(mode, multiplicity)` pairs with strictly
/// increasing mode indices and multiplicities of at least one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OccupationPattern {
    occupations: Vec<(usize, usize)>,
}

impl OccupationPattern {
    pub fn new(occupations: Vec<(usize, usize)>) -> Result<Self> {
        if occupations.is_empty() {
            return Err(Error::invalid("occupation pattern must contain a photon"));
        }
        for w in occupations.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::invalid("mode indices must be strictly increasing"));
            }
        }
        if occupations.iter().any(|&(_, m)| m == 0) {
            return Err(Error::invalid("multiplicities must be at least one"));
        }
        Ok(Self { occupations })
    }

    /// Build from a list of occupied modes, repeats allowed, any order.
    pub fn from_modes(modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::invalid("occupation pattern must contain a photon"));
        }
        let mut sorted = modes.to_vec();
        sorted.sort_unstable();
        let mut occ: Vec<(usize, usize)> = Vec::new();
        for &m in &sorted {
            match occ.last_mut() {
                Some((mode, mult)) if *mode == m => *mult += 1,
                _ => occ.push((m, 1)),
            }
        }
        Ok(Self { occupations: occ })
    }

    pub fn occupations(&self) -> &[(usize, usize)] {
        &self.occupations
    }

    /// Total photon number.
    pub fn photons(&self) -> usize {
        self.occupations.iter().map(|&(_, m)| m).sum()
    }

    pub fn collision_free(&self) -> bool {
        self.occupations.iter().all(|&(_, m)| m == 1)
    }

    /// Largest occupied mode index.
    pub fn max_mode(&self) -> usize {
        self.occupations.last().map(|&(m, _)| m).unwrap_or(0)
    }

    /// Expand to one entry per photon, modes nondecreasing. The position in
    /// this list is the photon label used by overlap matrices and W tensors.
    pub fn expand(&self) -> Vec<usize> {
        let mut modes = Vec::with_capacity(self.photons());
        for &(mode, mult) in &self.occupations {
            modes.extend(std::iter::repeat_n(mode, mult));
        }
        modes
    }

    /// Product of multiplicity factorials, as a float.
    pub fn multiplicity_factorial(&self) -> f64 {
        self.occupations
            .iter()
            .map(|&(_, m)| (1..=m).map(|k| k as f64).product::<f64>())
            .product()
    }

    /// Parse `"1,2,5"`-style text with 1-based modes, repeats allowed.
    pub fn parse_one_based(text: &str) -> Result<Self> {
        let mut modes = Vec::new();
        for part in text.split(',') {
            let v: usize = part.trim().parse().map_err(|_| {
                Error::Parse(format!("bad mode index `{part}` in pattern `{text}`"))
            })?;
            if v == 0 {
                return Err(Error::Parse(format!(
                    "mode indices are 1-based, got 0 in `{text}`"
                )));
            }
            modes.push(v - 1);
        }
        Self::from_modes(&modes)
    }

    /// Comma-joined 1-based modes, one entry per photon, ascending.
    pub fn format_one_based(&self) -> String {
        self.expand()
            .iter()
            .map(|m| (m + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// An incoherent classical mixture of input patterns with equal photon number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputMixture {
    components: Vec<(f64, OccupationPattern)>,
}

impl InputMixture {
    pub fn new(components: Vec<(f64, OccupationPattern)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("mixture must have at least one component"));
        }
        if components.iter().any(|&(w, _)| w.is_nan() || w < 0.0) {
            return Err(Error::invalid("mixture weights must be non-negative"));
        }
        let total: f64 = components.iter().map(|&(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        let n = components[0].1.photons();
        if components.iter().any(|(_, p)| p.photons() != n) {
            return Err(Error::invalid(
                "all mixture components must have equal photon number",
            ));
        }
        Ok(Self { components })
    }

    /// A single pattern as a trivial mixture.
    pub fn pure(pattern: OccupationPattern) -> Self {
        Self {
            components: vec![(1.0, pattern)],
        }
    }

    pub fn components(&self) -> &[(f64, OccupationPattern)] {
        &self.components
    }

    pub fn photons(&self) -> usize {
        self.components[0].1.photons()
    }

    pub fn max_mode(&self) -> usize {
        self.components
            .iter()
            .map(|(_, p)| p.max_mode())
            .max()
            .unwrap_or(0)
    }
}

/// All collision-free patterns of `photons` photons over `modes` modes, in
/// lexicographic order of their mode lists.
pub fn collision_free_patterns(modes: usize, photons: usize) -> Vec<OccupationPattern> {
    let mut out = Vec::new();
    if photons == 0 || photons > modes {
        return out;
    }
    let mut combo: Vec<usize> = (0..photons).collect();
    loop {
        out.push(OccupationPattern {
            occupations: combo.iter().map(|&m| (m, 1)).collect(),
        });
        // next lexicographic combination
        let mut i = photons;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if combo[i] != i + modes - photons {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        combo[i] += 1;
        for j in (i + 1)..photons {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// Binomial coefficient as a float; used for support-size checks.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_modes_merges_collisions() {
        let p = OccupationPattern::from_modes(&[3, 0, 0, 1]).unwrap();
        assert_eq!(p.occupations(), &[(0, 2), (1, 1), (3, 1)]);
        assert_eq!(p.photons(), 4);
        assert!(!p.collision_free());
        assert_eq!(p.expand(), vec![0, 0, 1, 3]);
        assert_eq!(p.multiplicity_factorial(), 2.0);
    }

    #[test]
    fn support_sizes_match_binomials() {
        assert_eq!(collision_free_patterns(13, 3).len(), 286);
        assert_eq!(collision_free_patterns(5, 5).len(), 1);
        assert_eq!(collision_free_patterns(4, 5).len(), 0);
        assert_eq!(binomial(15, 5), 3003.0);
    }

    #[test]
    fn patterns_are_lexicographic_and_unique() {
        let pats = collision_free_patterns(6, 3);
        assert_eq!(pats.len(), 20);
        for w in pats.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn one_based_round_trip() {
        let p = OccupationPattern::parse_one_based("1,1,2,4").unwrap();
        assert_eq!(p.expand(), vec![0, 0, 1, 3]);
        assert_eq!(p.format_one_based(), "1,1,2,4");
        assert!(OccupationPattern::parse_one_based("0,1").is_err());
        assert!(OccupationPattern::parse_one_based("1,x").is_err());
    }

    #[test]
    fn mixture_checks_weights_and_photon_number() {
        let a = OccupationPattern::from_modes(&[0, 1, 2, 3]).unwrap();
        let b = OccupationPattern::from_modes(&[0, 0, 1, 1]).unwrap();
        let third = 1.0 / 3.0;
        assert!(InputMixture::new(vec![
            (third, a.clone()),
            (third, b.clone()),
            (third, a.clone())
        ])
        .is_ok());
        assert!(InputMixture::new(vec![(0.5, a.clone()), (0.4, b.clone())]).is_err());
        let c = OccupationPattern::from_modes(&[0, 1]).unwrap();
        assert!(InputMixture::new(vec![(0.5, a), (0.5, c)]).is_err());
    }
}
