//! Forward density, Birkhoff averages, and density verdicts.
//!
//! The running average of the cylinder indicator along shifts of the
//! observer sequence equals the counting density of the set: summing
//! `indicator(i)` for `i < n` counts the members below `n`. Everything
//! here is exact rational arithmetic; a limit, however, cannot be checked
//! by a finite machine, so [`estimate_beta`] returns a three-tier verdict:
//! exact (closed form available), empirical (finite horizon with small
//! tail oscillation), or inconclusive. Downstream certification refuses
//! anything that is not positively exact or positively empirical.

use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;

use crate::error::Error;
use crate::rat::{self, RatioInt};
use crate::set_model::SetSpec;

/// Joint-modulus cap for closed forms; beyond this the spec is treated
/// as non-periodic and handled empirically.
pub const MAX_JOINT_MODULUS: u64 = 10_000_000;

/// Outcome of a density estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Positive density from a closed form.
    ExactPositive,
    /// Positive density supported by the finite horizon diagnostics.
    EmpiricalPositive,
    /// Density is zero (exactly, or the averages collapse toward zero).
    LikelyZero,
    /// The diagnostics support neither conclusion.
    Inconclusive,
}

impl Verdict {
    pub fn is_positive(self) -> bool {
        matches!(self, Verdict::ExactPositive | Verdict::EmpiricalPositive)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::ExactPositive => "exact_positive",
            Verdict::EmpiricalPositive => "empirical_positive",
            Verdict::LikelyZero => "likely_zero",
            Verdict::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

/// Density estimate with its diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityEstimate<T: RatioInt> {
    /// The (estimated or exact) forward density.
    pub beta: Ratio<T>,
    /// True when `beta` comes from a closed form.
    pub exact: bool,
    /// Horizon used for the diagnostics.
    pub horizon: u64,
    /// `max |A(n) - beta|` over `n` in `[horizon/2, horizon]`, where
    /// `A(n)` is the running average.
    pub tail_oscillation: Ratio<T>,
    pub verdict: Verdict,
}

/// Default positivity threshold for the verdict (1/10).
pub fn default_zero_threshold<T: RatioInt>() -> Ratio<T> {
    rat::of_u64s(1, 10)
}

/// Default tail-oscillation threshold for the verdict (1/20).
pub fn default_oscillation_threshold<T: RatioInt>() -> Ratio<T> {
    rat::of_u64s(1, 20)
}

/// `#{0 <= i <= n : i in N} / (n + 1)`, exactly.
pub fn partial_forward_density<T: RatioInt>(spec: &SetSpec, n: u64) -> Result<Ratio<T>, Error> {
    let w = spec.window(n)?;
    Ok(rat::of_u64s(w.count_ones(), n + 1))
}

/// The running indicator average `(1/n) * sum_{i<n} indicator(i)`,
/// computed through the observer window. Exact; requires `n >= 1`.
pub fn birkhoff_average<T: RatioInt>(spec: &SetSpec, n: u64) -> Result<Ratio<T>, Error> {
    if n == 0 {
        return Err(Error::invalid("birkhoff average needs n >= 1"));
    }
    let w = spec.window(n - 1)?;
    Ok(rat::of_u64s(w.count_ones(), n))
}

/// Two-sided diagnostic density `#{-n <= i <= n : i in N} / (2n + 1)`.
/// Not used by the certification chain.
pub fn two_sided_partial_density<T: RatioInt>(spec: &SetSpec, n: u64) -> Ratio<T> {
    let n = n as i64;
    let mut count: u64 = 0;
    for i in -n..=n {
        if spec.contains(i) {
            count += 1;
        }
    }
    rat::of_u64s(count, 2 * n as u64 + 1)
}

/// Member counts below each index: `counts[j] = #{0 <= i < j}`, for
/// `j` in `0..=up_to`.
pub fn cumulative_counts(spec: &SetSpec, up_to: u64) -> Result<Vec<u64>, Error> {
    const MAX_PREFIX: u64 = 1 << 27;
    if up_to >= MAX_PREFIX {
        return Err(Error::Capacity {
            what: "cumulative count entries",
            requested: up_to + 1,
            limit: MAX_PREFIX,
        });
    }
    if up_to == 0 {
        return Ok(vec![0]);
    }
    let w = spec.window(up_to - 1)?;
    let mut counts = Vec::with_capacity(up_to as usize + 1);
    counts.push(0u64);
    let mut acc = 0u64;
    w.for_each(|_, bit| {
        acc += u64::from(bit);
        counts.push(acc);
    });
    Ok(counts)
}

/// Eventual periodicity of a spec: membership is `modulus`-periodic for
/// all indices `>= cutoff`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PeriodicStructure {
    pub modulus: u64,
    pub cutoff: u64,
}

/// Structure for specs built from residue classes, progressions, finite
/// sets, and boolean combinations thereof. `None` for Bernoulli, Primes,
/// PowersOfTwo, and Bitmap, and when the joint modulus exceeds
/// [`MAX_JOINT_MODULUS`].
pub(crate) fn periodic_structure(spec: &SetSpec) -> Option<PeriodicStructure> {
    match spec {
        SetSpec::Explicit { elements } => Some(PeriodicStructure {
            modulus: 1,
            cutoff: elements.last().map_or(0, |&e| e.max(0) as u64 + 1),
        }),
        SetSpec::ResidueClasses { modulus, .. } => Some(PeriodicStructure {
            modulus: *modulus,
            cutoff: 0,
        }),
        SetSpec::ArithmeticProgression { difference, .. } => Some(PeriodicStructure {
            modulus: *difference,
            cutoff: 0,
        }),
        SetSpec::Union(a, b) | SetSpec::Intersection(a, b) | SetSpec::Difference(a, b) => {
            let sa = periodic_structure(a)?;
            let sb = periodic_structure(b)?;
            let g = gcd(sa.modulus, sb.modulus);
            let lcm = sa
                .modulus
                .checked_mul(sb.modulus / g)
                .filter(|&m| m <= MAX_JOINT_MODULUS)?;
            Some(PeriodicStructure {
                modulus: lcm,
                cutoff: sa.cutoff.max(sb.cutoff),
            })
        }
        SetSpec::Bernoulli { .. }
        | SetSpec::Primes
        | SetSpec::PowersOfTwo
        | SetSpec::Bitmap { .. } => None,
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact forward density when the spec is eventually periodic: the member
/// count over one full period past the cutoff, divided by the modulus.
/// Finite perturbations do not move the limit, so `Explicit` leaves
/// contribute exactly zero.
pub fn closed_form_beta<T: RatioInt>(spec: &SetSpec) -> Option<Ratio<T>> {
    let st = periodic_structure(spec)?;
    let mut count: u64 = 0;
    for j in 0..st.modulus {
        if spec.contains((st.cutoff + j) as i64) {
            count += 1;
        }
    }
    Some(rat::of_u64s(count, st.modulus))
}

/// Density estimation with verdict.
///
/// Closed forms are exact and decide immediately. Otherwise `beta` is the
/// running average at the horizon, and the verdict weighs the tail
/// oscillation plus three checkpoint averages at `H/100`, `H/10`, `H`.
pub fn estimate_beta<T: RatioInt>(
    spec: &SetSpec,
    horizon: u64,
    zero_threshold: &Ratio<T>,
    oscillation_threshold: &Ratio<T>,
) -> Result<DensityEstimate<T>, Error> {
    if horizon < 1_000 {
        return Err(Error::invalid("horizon must be at least 1000"));
    }
    if let Some(beta) = closed_form_beta::<T>(spec) {
        let tail = tail_oscillation(spec, horizon, &beta)?;
        let verdict = if beta.is_zero() {
            Verdict::LikelyZero
        } else {
            Verdict::ExactPositive
        };
        return Ok(DensityEstimate {
            beta,
            exact: true,
            horizon,
            tail_oscillation: tail,
            verdict,
        });
    }

    let w = spec.window(horizon - 1)?;
    let count_at = |n: u64| w.count_ones_below(n);
    let beta: Ratio<T> = rat::of_u64s(count_at(horizon), horizon);
    let tail = tail_oscillation_from_window(&w, horizon, &beta);

    let checkpoints = [horizon / 100, horizon / 10, horizon];
    let averages: Vec<Ratio<T>> = checkpoints
        .iter()
        .map(|&n| rat::of_u64s(count_at(n), n))
        .collect();

    let verdict = if beta > *zero_threshold && tail < *oscillation_threshold {
        Verdict::EmpiricalPositive
    } else if averages.iter().all(|a| a < zero_threshold)
        && averages[0] >= averages[1]
        && averages[1] >= averages[2]
    {
        Verdict::LikelyZero
    } else {
        Verdict::Inconclusive
    };

    Ok(DensityEstimate {
        beta,
        exact: false,
        horizon,
        tail_oscillation: tail,
        verdict,
    })
}

fn tail_oscillation<T: RatioInt>(
    spec: &SetSpec,
    horizon: u64,
    beta: &Ratio<T>,
) -> Result<Ratio<T>, Error> {
    let w = spec.window(horizon - 1)?;
    Ok(tail_oscillation_from_window(&w, horizon, beta))
}

/// `max |c(n)/n - beta|` over `n in [horizon/2, horizon]`, tracked as an
/// exact fraction. All cross products stay below 2^124 because window
/// lengths are capped at 2^31 bits, so u128 arithmetic is exact here.
fn tail_oscillation_from_window<T: RatioInt>(
    w: &crate::set_model::ObserverWindow,
    horizon: u64,
    beta: &Ratio<T>,
) -> Ratio<T> {
    let pb = beta
        .numer()
        .to_u128()
        .expect("density numerator fits in u128");
    let qb = beta
        .denom()
        .to_u128()
        .expect("density denominator fits in u128");
    let lo = (horizon / 2).max(1);
    let mut c = w.count_ones_below(lo - 1) as u128;
    let mut best_num: u128 = 0;
    let mut best_den: u128 = 1;
    for n in lo..=horizon {
        c += u128::from(w.bit(n - 1));
        let lhs = c * qb;
        let rhs = pb * n as u128;
        let num = lhs.abs_diff(rhs);
        let den = qb * n as u128;
        if num * best_den > best_num * den {
            best_num = num;
            best_den = den;
        }
    }
    rat::of_u128s(best_num, best_den)
}
