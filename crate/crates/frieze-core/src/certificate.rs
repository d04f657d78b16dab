//! The certified threshold chain.
//!
//! Given a positive-density set, a pattern, and an accuracy `epsilon`,
//! this module computes, with exact rational arithmetic throughout:
//!
//! * `eps_bar` — the sharpened accuracy driving the per-target search
//!   windows (`min(epsilon, 1)` for singleton patterns, strictly below
//!   `min(epsilon, 1/(2*span))` otherwise, so that consecutive windows
//!   cannot overlap);
//! * `delta` — a density slack with `(beta+delta)/(beta-delta) < 1 + eps_bar/2`;
//! * `n0` — the convergence onset: from `n0` on, the running average
//!   stays within `delta` of `beta`;
//! * `N0` (`window_floor`) — the threshold from which every tolerance
//!   window around any target in `[0, 1]` is guaranteed to contain a
//!   member;
//! * `N = max(k, N0)` (`scale_floor`) — the final threshold: scales of
//!   the pattern exist for every `n >= N`.
//!
//! Every inequality in the chain is strict and checked by exact
//! cross-multiplied comparisons; nothing here goes through floating
//! point. For eventually periodic sets the onset is computed in closed
//! form (valid for all `n`); otherwise it is validated on a finite
//! horizon and the certificate records that basis explicitly.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed};

use crate::density::{
    closed_form_beta, default_oscillation_threshold, default_zero_threshold, estimate_beta,
    periodic_structure,
};
use crate::error::Error;
use crate::rat::{self, RatioInt};
use crate::set_model::SetSpec;

/// Cap on the onset scan length.
pub const MAX_ONSET_SCAN: u64 = 100_000_000;

/// A finite, strictly increasing integer pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalePattern {
    values: Vec<i64>,
}

impl ScalePattern {
    pub fn new(values: Vec<i64>) -> Result<Self, Error> {
        if values.is_empty() {
            return Err(Error::invalid("pattern must be nonempty"));
        }
        if !values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("pattern must be strictly increasing"));
        }
        Ok(ScalePattern { values })
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// `q_k - q_1`; `None` for singleton patterns.
    pub fn span(&self) -> Option<u64> {
        if self.values.len() > 1 {
            Some((self.values[self.values.len() - 1] - self.values[0]) as u64)
        } else {
            None
        }
    }
}

impl fmt::Display for ScalePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, v) in self.values.iter().enumerate() {
            if idx > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for ScalePattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let values = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::invalid(format!("invalid pattern entry `{tok}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        ScalePattern::new(values)
    }
}

/// How the convergence onset was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnsetBasis {
    /// Valid for every `n`: derived from the set's eventual periodicity.
    ClosedForm,
    /// Checked exactly on `[n0, horizon]` only.
    FiniteHorizon(u64),
}

impl fmt::Display for OnsetBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OnsetBasis::ClosedForm => f.write_str("closed_form"),
            OnsetBasis::FiniteHorizon(h) => write!(f, "finite_horizon:{h}"),
        }
    }
}

/// The full certified constant chain for one `(set, pattern, epsilon)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FriezeCertificate<T: RatioInt> {
    pub pattern: ScalePattern,
    /// Requested accuracy.
    pub epsilon: Ratio<T>,
    /// Sharpened accuracy; search windows in certified mode use this.
    pub eps_bar: Ratio<T>,
    /// Forward density of the set.
    pub beta: Ratio<T>,
    /// Whether `beta` comes from a closed form.
    pub beta_exact: bool,
    /// Density slack.
    pub delta: Ratio<T>,
    /// Convergence onset of the running average.
    pub n0: u64,
    pub n0_basis: OnsetBasis,
    /// From this `n` on, every target window contains a member.
    pub window_floor: u64,
    /// `max(k, window_floor)`: scales exist for every `n >=` this.
    pub scale_floor: u64,
}

/// Sharpened accuracy for the search windows.
///
/// Singleton pattern: exactly `min(epsilon, 1)`. Otherwise any value
/// strictly below `min(epsilon, 1/(2*span))` works; this takes half of
/// that bound, which is exactly representable and comfortably strict.
pub fn choose_eps_bar<T: RatioInt>(
    epsilon: &Ratio<T>,
    pattern: &ScalePattern,
) -> Result<Ratio<T>, Error> {
    if !epsilon.is_positive() {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let one = Ratio::one();
    match pattern.span() {
        None => Ok(epsilon.min(&one).clone()),
        Some(span) => {
            let half_inv_span: Ratio<T> = rat::of_u64s(1, 2 * span);
            let bound = epsilon.min(&half_inv_span).clone();
            Ok(bound / rat::from_u64::<T>(2))
        }
    }
}

/// Density slack `delta = beta * eps_bar / (2 * (4 + eps_bar))`, half of
/// the supremum allowed by the chain inequality
/// `(beta+delta)/(beta-delta) < 1 + eps_bar/2`.
pub fn choose_delta<T: RatioInt>(
    beta: &Ratio<T>,
    eps_bar: &Ratio<T>,
) -> Result<Ratio<T>, Error> {
    if !beta.is_positive() {
        return Err(Error::CertificationFailed(
            "density must be positive to certify".into(),
        ));
    }
    if beta > &Ratio::one() {
        return Err(Error::invalid("density cannot exceed 1"));
    }
    if !eps_bar.is_positive() {
        return Err(Error::invalid("eps_bar must be positive"));
    }
    let four: Ratio<T> = rat::from_u64(4);
    let two: Ratio<T> = rat::from_u64(2);
    Ok(beta * eps_bar / (two * (four + eps_bar)))
}

/// Convergence onset: the smallest `n0` with `|beta - A(n)| < delta` for
/// every `n >= n0` (closed-form basis) or for every `n` in
/// `[n0, horizon]` (finite-horizon basis). Exact in both cases.
pub fn find_n0<T: RatioInt>(
    spec: &SetSpec,
    beta: &Ratio<T>,
    delta: &Ratio<T>,
    horizon: u64,
) -> Result<(u64, OnsetBasis), Error> {
    if !delta.is_positive() {
        return Err(Error::invalid("delta must be positive"));
    }
    let closed = closed_form_beta::<T>(spec);
    if closed.as_ref() == Some(beta) {
        let st = periodic_structure(spec).expect("closed form implies structure");
        return Ok((onset_closed_form(spec, beta, delta, st.modulus, st.cutoff)?, OnsetBasis::ClosedForm));
    }
    let n0 = onset_finite_horizon(spec, beta, delta, horizon)?;
    Ok((n0, OnsetBasis::FiniteHorizon(horizon)))
}

/// Incremental exact test for `|beta - c(n)/n| >= delta`, i.e.
/// `|c(n) * q_beta - p_beta * n| * q_delta >= p_delta * q_beta * n`.
struct DeviationScan<T: RatioInt> {
    q_beta: T,
    p_beta: T,
    q_delta: T,
    /// `p_delta * q_beta`, the per-step increment of the right side.
    rhs_step: T,
    /// `c(n) * q_beta - p_beta * n`, updated incrementally.
    excess: T,
    rhs: T,
}

impl<T: RatioInt> DeviationScan<T> {
    fn new(beta: &Ratio<T>, delta: &Ratio<T>) -> Self {
        let rhs_step = delta.numer().clone() * beta.denom().clone();
        DeviationScan {
            q_beta: beta.denom().clone(),
            p_beta: beta.numer().clone(),
            q_delta: delta.denom().clone(),
            rhs_step,
            excess: T::zero(),
            rhs: T::zero(),
        }
    }

    /// Advances from `n-1` to `n`, given the membership bit of `n-1`.
    /// Returns whether `n` violates the closeness condition.
    fn step(&mut self, member: bool) -> bool {
        if member {
            self.excess = self.excess.clone() + self.q_beta.clone();
        }
        self.excess = self.excess.clone() - self.p_beta.clone();
        self.rhs = self.rhs.clone() + self.rhs_step.clone();
        self.excess.abs() * self.q_delta.clone() >= self.rhs
    }
}

fn onset_closed_form<T: RatioInt>(
    spec: &SetSpec,
    beta: &Ratio<T>,
    delta: &Ratio<T>,
    modulus: u64,
    cutoff: u64,
) -> Result<u64, Error> {
    // Peak of |c(n)*q - p*n| over one full period past the cutoff; the
    // same value bounds the deviation numerator for every n past the
    // cutoff, because membership (and hence the count excess) is
    // periodic there.
    let lo = cutoff.max(1);
    let q = beta.denom().clone();
    let p = beta.numer().clone();
    let mut excess = T::zero();
    let mut peak = T::zero();
    for n in 1..lo + modulus {
        if spec.contains((n - 1) as i64) {
            excess = excess.clone() + q.clone();
        }
        excess = excess.clone() - p.clone();
        if n >= lo && excess.abs() > peak {
            peak = excess.abs();
        }
    }
    // Deviations at n can only reach delta while
    // n <= peak * q_delta / (q * p_delta); past max(cutoff, that) the
    // condition holds forever.
    let deviation_cap = Ratio::new(
        peak * delta.denom().clone(),
        q.clone() * delta.numer().clone(),
    );
    let cap = deviation_cap
        .floor()
        .to_integer()
        .to_u64()
        .ok_or(Error::Capacity {
            what: "onset scan length",
            requested: u64::MAX,
            limit: MAX_ONSET_SCAN,
        })?;
    let scan_to = cutoff.max(cap);
    if scan_to > MAX_ONSET_SCAN {
        return Err(Error::Capacity {
            what: "onset scan length",
            requested: scan_to,
            limit: MAX_ONSET_SCAN,
        });
    }
    let mut scan = DeviationScan::new(beta, delta);
    let mut last_bad: u64 = 0;
    for n in 1..=scan_to {
        if scan.step(spec.contains((n - 1) as i64)) {
            last_bad = n;
        }
    }
    Ok(last_bad + 1)
}

fn onset_finite_horizon<T: RatioInt>(
    spec: &SetSpec,
    beta: &Ratio<T>,
    delta: &Ratio<T>,
    horizon: u64,
) -> Result<u64, Error> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be positive"));
    }
    let w = spec.window(horizon - 1)?;
    let mut scan = DeviationScan::new(beta, delta);
    let mut last_bad: u64 = 0;
    for n in 1..=horizon {
        if scan.step(w.bit(n - 1)) {
            last_bad = n;
        }
    }
    if last_bad >= horizon {
        return Err(Error::CertificationFailed(format!(
            "the running average still deviates by delta at the horizon {horizon}; \
             increase the horizon or the accuracy"
        )));
    }
    Ok(last_bad + 1)
}

/// `N0`: the smallest integer strictly above
/// `max(2*n0 / (eps_bar*(beta-delta)), 4/eps_bar)`.
pub fn window_floor_from<T: RatioInt>(
    n0: u64,
    eps_bar: &Ratio<T>,
    beta: &Ratio<T>,
    delta: &Ratio<T>,
) -> u64 {
    assert!(eps_bar.is_positive() && beta > delta, "chain preconditions");
    let two_n0: Ratio<T> = rat::from_u64(2 * n0);
    let four: Ratio<T> = rat::from_u64(4);
    let first = two_n0 / (eps_bar * (beta - delta));
    let second = four / eps_bar;
    let bound = first.max(second);
    let floor = bound
        .floor()
        .to_integer()
        .to_u64()
        .expect("window floor fits in u64");
    floor + 1
}

/// Runs the whole chain with default density thresholds.
pub fn build_certificate<T: RatioInt>(
    spec: &SetSpec,
    pattern: &ScalePattern,
    epsilon: &Ratio<T>,
    horizon: u64,
) -> Result<FriezeCertificate<T>, Error> {
    build_certificate_with(
        spec,
        pattern,
        epsilon,
        horizon,
        &default_zero_threshold(),
        &default_oscillation_threshold(),
    )
}

/// Runs the whole chain: density verdict, then
/// `eps_bar -> delta -> n0 -> N0 -> N`.
pub fn build_certificate_with<T: RatioInt>(
    spec: &SetSpec,
    pattern: &ScalePattern,
    epsilon: &Ratio<T>,
    horizon: u64,
    zero_threshold: &Ratio<T>,
    oscillation_threshold: &Ratio<T>,
) -> Result<FriezeCertificate<T>, Error> {
    let est = estimate_beta(spec, horizon, zero_threshold, oscillation_threshold)?;
    if !est.verdict.is_positive() {
        return Err(Error::CertificateRefused {
            verdict: est.verdict,
        });
    }
    let eps_bar = choose_eps_bar(epsilon, pattern)?;
    let delta = choose_delta(&est.beta, &eps_bar)?;
    let (n0, n0_basis) = find_n0(spec, &est.beta, &delta, horizon)?;
    let window_floor = window_floor_from(n0, &eps_bar, &est.beta, &delta);
    debug_assert!(window_floor > n0);
    let scale_floor = window_floor.max(pattern.k() as u64);
    let cert = FriezeCertificate {
        pattern: pattern.clone(),
        epsilon: epsilon.clone(),
        eps_bar,
        beta: est.beta,
        beta_exact: est.exact,
        delta,
        n0,
        n0_basis,
        window_floor,
        scale_floor,
    };
    debug_assert_eq!(cert.check(), Ok(()));
    Ok(cert)
}

impl<T: RatioInt> FriezeCertificate<T> {
    /// Verifies every chain inequality by exact comparison. `Err` carries
    /// the first violated clause.
    pub fn check(&self) -> Result<(), String> {
        let one: Ratio<T> = Ratio::one();
        let two: Ratio<T> = rat::from_u64(2);
        if !self.eps_bar.is_positive() || &self.eps_bar > (&self.epsilon).min(&one) {
            return Err("eps_bar must lie in (0, min(epsilon, 1)]".into());
        }
        if let Some(span) = self.pattern.span() {
            let half_inv: Ratio<T> = rat::of_u64s(1, 2 * span);
            if self.eps_bar >= half_inv {
                return Err("eps_bar must be strictly below 1/(2*span)".into());
            }
            if self.eps_bar >= self.epsilon {
                return Err("eps_bar must be strictly below epsilon".into());
            }
        }
        if self.eps_bar >= two {
            return Err("eps_bar must be below 2".into());
        }
        if !self.delta.is_positive() || self.delta >= self.beta {
            return Err("delta must lie in (0, beta)".into());
        }
        let ratio = (&self.beta + &self.delta) / (&self.beta - &self.delta);
        if ratio >= one + &self.eps_bar / two.clone() {
            return Err("(beta+delta)/(beta-delta) must stay below 1 + eps_bar/2".into());
        }
        let n0_rat: Ratio<T> = rat::from_u64(self.n0);
        let floor_rat: Ratio<T> = rat::from_u64(self.window_floor);
        let first = rat::from_u64::<T>(2) * n0_rat / (&self.eps_bar * (&self.beta - &self.delta));
        let second = rat::from_u64::<T>(4) / &self.eps_bar;
        if floor_rat <= first.max(second) {
            return Err("N0 must strictly exceed both chain bounds".into());
        }
        if self.window_floor <= self.n0 {
            return Err("N0 must exceed n0".into());
        }
        if self.scale_floor != self.window_floor.max(self.pattern.k() as u64) {
            return Err("N must equal max(k, N0)".into());
        }
        Ok(())
    }

    /// Flat key-value record, one field per line, rationals as `p/q`.
    pub fn record(&self, set_text: Option<&str>) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        if let Some(set_text) = set_text {
            writeln!(s, "set {set_text}").unwrap();
        }
        writeln!(s, "pattern {}", self.pattern).unwrap();
        writeln!(s, "epsilon {}", rat::render(&self.epsilon)).unwrap();
        writeln!(s, "eps_bar {}", rat::render(&self.eps_bar)).unwrap();
        writeln!(s, "beta {}", rat::render(&self.beta)).unwrap();
        writeln!(s, "beta_exact {}", self.beta_exact).unwrap();
        writeln!(s, "delta {}", rat::render(&self.delta)).unwrap();
        writeln!(s, "n0 {}", self.n0).unwrap();
        writeln!(s, "n0_basis {}", self.n0_basis).unwrap();
        writeln!(s, "N0 {}", self.window_floor).unwrap();
        writeln!(s, "N {}", self.scale_floor).unwrap();
        s
    }

    /// Parses a record produced by [`Self::record`] (used for fixtures).
    pub fn parse_record(text: &str) -> Result<Self, Error> {
        let mut fields = std::collections::BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(' ')
                .ok_or_else(|| Error::invalid(format!("bad record line `{line}`")))?;
            fields.insert(key.to_string(), value.trim().to_string());
        }
        let get = |key: &str| {
            fields
                .get(key)
                .ok_or_else(|| Error::invalid(format!("missing record field `{key}`")))
        };
        let ratio = |key: &str| -> Result<Ratio<T>, Error> {
            rat::parse::<T>(get(key)?).map_err(|e| Error::invalid(e.to_string()))
        };
        let int = |key: &str| -> Result<u64, Error> {
            get(key)?
                .parse::<u64>()
                .map_err(|_| Error::invalid(format!("bad integer field `{key}`")))
        };
        let basis_text = get("n0_basis")?;
        let n0_basis = if basis_text == "closed_form" {
            OnsetBasis::ClosedForm
        } else if let Some(h) = basis_text.strip_prefix("finite_horizon:") {
            OnsetBasis::FiniteHorizon(
                h.parse()
                    .map_err(|_| Error::invalid("bad finite_horizon value"))?,
            )
        } else {
            return Err(Error::invalid(format!("bad n0_basis `{basis_text}`")));
        };
        Ok(FriezeCertificate {
            pattern: get("pattern")?.parse()?,
            epsilon: ratio("epsilon")?,
            eps_bar: ratio("eps_bar")?,
            beta: ratio("beta")?,
            beta_exact: get("beta_exact")? == "true",
            delta: ratio("delta")?,
            n0: int("n0")?,
            n0_basis,
            window_floor: int("N0")?,
            scale_floor: int("N")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    type R = Ratio<BigInt>;

    fn r(num: i64, den: i64) -> R {
        Ratio::new(BigInt::from(num), BigInt::from(den))
    }

    fn pat(values: &[i64]) -> ScalePattern {
        ScalePattern::new(values.to_vec()).unwrap()
    }

    fn evens() -> SetSpec {
        SetSpec::residues(2, vec![0]).unwrap()
    }

    fn integers() -> SetSpec {
        SetSpec::residues(1, vec![0]).unwrap()
    }

    #[test]
    fn eps_bar_for_singletons_caps_at_one() {
        assert_eq!(choose_eps_bar::<BigInt>(&r(3, 1), &pat(&[7])).unwrap(), r(1, 1));
        assert_eq!(
            choose_eps_bar::<BigInt>(&r(1, 2), &pat(&[0])).unwrap(),
            r(1, 2)
        );
    }

    #[test]
    fn eps_bar_for_wider_patterns_halves_the_bound() {
        // span 2: min(1/10, 1/4) halved.
        assert_eq!(
            choose_eps_bar::<BigInt>(&r(1, 10), &pat(&[0, 1, 2])).unwrap(),
            r(1, 20)
        );
        // span 8 with large epsilon: min(3, 1/16) halved.
        assert_eq!(
            choose_eps_bar::<BigInt>(&r(3, 1), &pat(&[1, 4, 9])).unwrap(),
            r(1, 32)
        );
        assert!(choose_eps_bar::<BigInt>(&r(0, 1), &pat(&[0, 1])).is_err());
        assert!(choose_eps_bar::<BigInt>(&r(-1, 2), &pat(&[0])).is_err());
    }

    #[test]
    fn delta_is_half_the_supremum() {
        let delta = choose_delta::<BigInt>(&r(1, 1), &r(1, 1)).unwrap();
        assert_eq!(delta, r(1, 10));
        let lhs = (r(1, 1) + &delta) / (r(1, 1) - &delta);
        assert_eq!(lhs, r(11, 9));
        assert!(lhs < r(3, 2));

        // beta = 1/2, eps_bar = 1/20: supremum is 1/162, half is 1/324.
        let delta = choose_delta::<BigInt>(&r(1, 2), &r(1, 20)).unwrap();
        assert_eq!(delta, r(1, 324));
        // The supremum itself would violate the strict inequality.
        let at_sup = (r(1, 2) + r(1, 162)) / (r(1, 2) - r(1, 162));
        assert_eq!(at_sup, r(41, 40));
        assert!(at_sup >= r(1, 1) + r(1, 40));

        assert!(choose_delta::<BigInt>(&r(0, 1), &r(1, 2)).is_err());
        assert!(choose_delta::<BigInt>(&r(3, 2), &r(1, 2)).is_err());
    }

    #[test]
    fn onset_for_the_evens_with_explicit_slack() {
        // Deviation at odd n is 1/(2n): the last n with 1/(2n) >= 1/162
        // is 81, so the onset is 82.
        let (n0, basis) = find_n0::<BigInt>(&evens(), &r(1, 2), &r(1, 162), 10_000).unwrap();
        assert_eq!(n0, 82);
        assert_eq!(basis, OnsetBasis::ClosedForm);
        // Minimality witness: 81 still deviates by at least delta.
        let avg = crate::density::birkhoff_average::<BigInt>(&evens(), 81).unwrap();
        assert!((r(1, 2) - avg).abs() >= r(1, 162));
    }

    #[test]
    fn onset_for_the_full_line_is_one() {
        let (n0, basis) = find_n0::<BigInt>(&integers(), &r(1, 1), &r(1, 100), 10_000).unwrap();
        assert_eq!(n0, 1);
        assert_eq!(basis, OnsetBasis::ClosedForm);
    }

    #[test]
    fn onset_finite_horizon_for_bernoulli() {
        let spec = SetSpec::bernoulli(Ratio::new(3, 10), 42).unwrap();
        let horizon = 1_000_000;
        let beta: R = crate::density::birkhoff_average(&spec, horizon).unwrap();
        let (n0, basis) = find_n0::<BigInt>(&spec, &beta, &r(1, 100), horizon).unwrap();
        assert_eq!(basis, OnsetBasis::FiniteHorizon(horizon));
        // The scan is its own oracle; the value must be reproducible.
        assert_eq!(n0, 2_845);
        // And n0 really is a boundary: n0 - 1 deviates, everything in
        // [n0, n0 + 2000] does not.
        let counts = crate::density::cumulative_counts(&spec, n0 + 2_000).unwrap();
        let dev = |n: u64| (&beta - r(counts[n as usize] as i64, n as i64)).abs();
        assert!(dev(n0 - 1) >= r(1, 100));
        for n in n0..=n0 + 2_000 {
            assert!(dev(n) < r(1, 100));
        }
    }

    #[test]
    fn onset_unreachable_horizon_fails() {
        // Tiny delta that the Bernoulli averages cannot satisfy by 10^4.
        let spec = SetSpec::bernoulli(Ratio::new(3, 10), 42).unwrap();
        let err = find_n0::<BigInt>(&spec, &r(3, 10), &r(1, 1_000_000_000), 10_000);
        assert!(matches!(err, Err(Error::CertificationFailed(_))));
    }

    #[test]
    fn window_floor_examples() {
        assert_eq!(window_floor_from::<BigInt>(1, &r(1, 1), &r(1, 1), &r(1, 10)), 5);
        // Evens with the explicit slack 1/162 and onset 82:
        // max(164/((1/20)(40/81)), 80) = 6642, so the floor is 6643.
        assert_eq!(
            window_floor_from::<BigInt>(82, &r(1, 20), &r(1, 2), &r(1, 162)),
            6_643
        );
    }

    #[test]
    fn full_chain_for_the_evens() {
        let cert =
            build_certificate::<BigInt>(&evens(), &pat(&[0, 1, 2]), &r(1, 10), 10_000).unwrap();
        assert_eq!(cert.eps_bar, r(1, 20));
        assert_eq!(cert.beta, r(1, 2));
        assert!(cert.beta_exact);
        assert_eq!(cert.delta, r(1, 324));
        assert_eq!(cert.n0, 162);
        assert_eq!(cert.n0_basis, OnsetBasis::ClosedForm);
        assert_eq!(cert.window_floor, 13_041);
        assert_eq!(cert.scale_floor, 13_041);
        assert_eq!(cert.check(), Ok(()));
    }

    #[test]
    fn full_chain_for_the_full_line_singleton() {
        let cert =
            build_certificate::<BigInt>(&integers(), &pat(&[0]), &r(1, 1), 10_000).unwrap();
        assert_eq!(cert.eps_bar, r(1, 1));
        assert_eq!(cert.n0, 1);
        assert_eq!(cert.window_floor, 5);
        assert_eq!(cert.scale_floor, 5);
        assert_eq!(cert.check(), Ok(()));
    }

    #[test]
    fn refusal_for_zero_density_sets() {
        let err = build_certificate::<BigInt>(
            &SetSpec::PowersOfTwo,
            &pat(&[0, 1]),
            &r(1, 10),
            10_000,
        );
        match err {
            Err(Error::CertificateRefused { verdict }) => {
                assert_eq!(verdict, crate::density::Verdict::LikelyZero)
            }
            other => panic!("expected refusal, got {other:?}"),
        }
        let err = build_certificate::<BigInt>(
            &SetSpec::explicit(vec![1, 5]).unwrap(),
            &pat(&[0, 1]),
            &r(1, 10),
            10_000,
        );
        assert!(matches!(err, Err(Error::CertificateRefused { .. })));
    }

    #[test]
    fn record_round_trip() {
        let cert =
            build_certificate::<BigInt>(&evens(), &pat(&[0, 1, 2]), &r(1, 10), 10_000).unwrap();
        let text = cert.record(Some("residue(2;0)"));
        assert!(text.contains("eps_bar 1/20"));
        assert!(text.contains("n0_basis closed_form"));
        let back = FriezeCertificate::<BigInt>::parse_record(&text).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn chain_agrees_across_scalar_types() {
        let eps_big = choose_eps_bar::<BigInt>(&r(1, 10), &pat(&[0, 1, 2])).unwrap();
        let eps_fixed =
            choose_eps_bar::<i128>(&Ratio::new(1, 10), &pat(&[0, 1, 2])).unwrap();
        assert_eq!(eps_big.numer(), &BigInt::from(*eps_fixed.numer()));
        assert_eq!(eps_big.denom(), &BigInt::from(*eps_fixed.denom()));

        let d_big = choose_delta::<BigInt>(&r(2, 5), &eps_big).unwrap();
        let d_fixed = choose_delta::<i128>(&Ratio::new(2, 5), &eps_fixed).unwrap();
        assert_eq!(d_big.numer(), &BigInt::from(*d_fixed.numer()));
        assert_eq!(d_big.denom(), &BigInt::from(*d_fixed.denom()));

        assert_eq!(
            window_floor_from::<BigInt>(82, &r(1, 20), &r(1, 2), &r(1, 162)),
            window_floor_from::<i128>(
                82,
                &Ratio::new(1, 20),
                &Ratio::new(1, 2),
                &Ratio::new(1, 162)
            )
        );
    }

    proptest! {
        #[test]
        fn delta_always_satisfies_the_chain_inequality(
            bn in 1u64..1000, bd in 1u64..1000, en in 1u64..1000, ed in 1u64..1000,
        ) {
            let beta = r(bn.min(bd) as i64, bd as i64);
            // eps_bar in (0, 2)
            let eps_bar = r(en as i64, ed as i64).min(r(2 * ed as i64 - 1, ed as i64));
            let eps_bar = eps_bar.min(r(199, 100));
            let delta = choose_delta::<BigInt>(&beta, &eps_bar).unwrap();
            prop_assert!(delta > r(0, 1));
            prop_assert!(delta < beta);
            let lhs = (&beta + &delta) / (&beta - &delta);
            prop_assert!(lhs < r(1, 1) + eps_bar / r(2, 1));
        }

        #[test]
        fn eps_bar_always_below_two(
            en in 1u64..10_000, ed in 1u64..100,
            a in -50i64..50, b in 1i64..60,
        ) {
            let pattern = pat(&[a, a + b]);
            let eps = r(en as i64, ed as i64);
            let eps_bar = choose_eps_bar::<BigInt>(&eps, &pattern).unwrap();
            prop_assert!(eps_bar < r(2, 1));
            prop_assert!(eps_bar < eps);
            let span = pattern.span().unwrap();
            prop_assert!(eps_bar < r(1, 2 * span as i64));
        }
    }
}
