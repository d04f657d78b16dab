//! Searching for scaled copies of a pattern inside a set.
//!
//! The targets of a pattern `q_1 < ... < q_k` are the exact rationals
//! `t_i = (q_i - q_1)/(q_k - q_1)` (just `[0]` for singletons). An
//! `n`-scale is one member `r_i` per target with `|r_i/n - t_i|` below
//! the tolerance, all distinct. Searches walk candidates outward from
//! the scaled target `t_i * n`, nearest first (ties toward the smaller
//! index), with the open interval bounds handled by exact rational
//! comparisons: a boundary integer is excluded, never rounded in.
//!
//! Two modes:
//!
//! * **Certified** uses the sharpened tolerance from a certificate. Its
//!   windows are pairwise disjoint, so per-target searches are
//!   independent and distinctness is automatic.
//! * **Loose** uses the plain accuracy `epsilon` (the form in which the
//!   guarantee is stated); windows may overlap, so one candidate per
//!   target is chosen by a backtracking assignment that keeps the
//!   witnesses distinct, refined to the minimal maximum residual for
//!   small patterns.

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::certificate::ScalePattern;
use crate::error::Error;
use crate::rat::{self, RatioInt};
use crate::set_model::{ObserverWindow, SetSpec};

/// Loose-mode pattern width cap.
pub const MAX_LOOSE_TARGETS: usize = 64;
/// Patterns up to this width get the exact min-max refinement.
const EXHAUSTIVE_TARGETS: usize = 8;
/// Node budget for the refinement search.
const REFINE_NODE_BUDGET: u64 = 1_000_000;

/// The normalized rational targets of a pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetVector<T: RatioInt> {
    t: Vec<Ratio<T>>,
}

impl<T: RatioInt> TargetVector<T> {
    /// `t_1 = 0`, `t_i = (q_i - q_1)/(q_k - q_1)`, `t_k = 1`; `[0]` when
    /// `k = 1`.
    pub fn for_pattern(pattern: &ScalePattern) -> Self {
        let q = pattern.values();
        let t = match pattern.span() {
            None => vec![Ratio::zero()],
            Some(span) => q
                .iter()
                .map(|&qi| {
                    Ratio::new(
                        T::from_i64(qi - q[0]).expect("pattern offset fits"),
                        T::from_u64(span).expect("span fits"),
                    )
                })
                .collect(),
        };
        TargetVector { t }
    }

    pub fn values(&self) -> &[Ratio<T>] {
        &self.t
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// The scaled targets `t_i * n`.
    pub fn tau(&self, n: u64) -> Vec<Ratio<T>> {
        let n: Ratio<T> = rat::from_u64(n);
        self.t.iter().map(|t| t * &n).collect()
    }
}

/// Search tolerance regime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchMode<T: RatioInt> {
    /// Tolerance from a certificate; windows provably disjoint.
    Certified { eps_bar: Ratio<T> },
    /// The guarantee's own tolerance; distinctness enforced explicitly.
    Loose,
}

/// A found scale with its exact residuals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleResult<T: RatioInt> {
    pub n: u64,
    /// One member per target, in target order.
    pub r: Vec<u64>,
    /// `|r_i/n - t_i|`, exact.
    pub residuals: Vec<Ratio<T>>,
    pub mode: SearchMode<T>,
    /// Outcome of the independent re-check ([`verify_scale`]).
    pub verified: bool,
}

impl<T: RatioInt> ScaleResult<T> {
    pub fn max_residual(&self) -> Option<&Ratio<T>> {
        self.residuals.iter().max()
    }
}

/// Search outcome: witnesses, or the index of the first target that could
/// not be filled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome<T: RatioInt> {
    Found(ScaleResult<T>),
    NotFound { target_index: usize },
}

impl<T: RatioInt> SearchOutcome<T> {
    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found(_))
    }

    pub fn result(&self) -> Option<&ScaleResult<T>> {
        match self {
            SearchOutcome::Found(r) => Some(r),
            SearchOutcome::NotFound { .. } => None,
        }
    }
}

pub(crate) trait BitSource {
    fn member(&self, i: u64) -> bool;
}

impl BitSource for ObserverWindow {
    fn member(&self, i: u64) -> bool {
        self.bit(i)
    }
}

struct SpecSource<'a>(&'a SetSpec);

impl BitSource for SpecSource<'_> {
    fn member(&self, i: u64) -> bool {
        self.0.contains(i as i64)
    }
}

/// Integer candidates of `{0..n} ∩ (n(t-tol), n(t+tol))` in
/// nearest-to-target order, ties toward the smaller integer.
struct NearestCandidates {
    below: i128, // next candidate at or below the target
    above: i128, // next candidate above the target
    lo: i128,
    hi: i128,
    // 2 * tau as an exact fraction, for the side comparison.
    twice_tau_num: i128,
    tau_den: i128,
}

impl NearestCandidates {
    fn new<T: RatioInt>(n: u64, t: &Ratio<T>, tol: &Ratio<T>) -> Self {
        debug_assert!(!t.is_negative() && t <= &Ratio::one(), "target outside [0, 1]");
        let n_rat: Ratio<T> = rat::from_u64(n);
        let tau = &n_rat * t;
        let lo_excl = &tau - &n_rat * tol;
        let hi_excl = &tau + &n_rat * tol;
        // Smallest integer strictly above lo_excl, clamped at 0.
        let lo = (lo_excl.floor().to_integer().to_i128().expect("window bound fits") + 1).max(0);
        // Largest integer strictly below hi_excl, clamped at n.
        let hi_int = if hi_excl.is_integer() {
            hi_excl.to_integer().to_i128().expect("window bound fits") - 1
        } else {
            hi_excl.floor().to_integer().to_i128().expect("window bound fits")
        };
        let hi = hi_int.min(n as i128);
        let below = tau
            .floor()
            .to_integer()
            .to_i128()
            .expect("target fits")
            .min(hi);
        let twice_tau = &tau + &tau;
        NearestCandidates {
            below,
            above: below + 1,
            lo,
            hi,
            twice_tau_num: twice_tau.numer().to_i128().expect("2*tau numerator fits"),
            tau_den: twice_tau.denom().to_i128().expect("tau denominator fits"),
        }
    }
}

impl Iterator for NearestCandidates {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let below_alive = self.below >= self.lo;
        let above_alive = self.above <= self.hi;
        let take_below = match (below_alive, above_alive) {
            (false, false) => return None,
            (true, false) => true,
            (false, true) => false,
            // tau - below <= above - tau  <=>  2*tau <= below + above
            (true, true) => self.twice_tau_num <= (self.below + self.above) * self.tau_den,
        };
        if take_below {
            let r = self.below;
            self.below -= 1;
            Some(r as u64)
        } else {
            let r = self.above;
            self.above += 1;
            Some(r as u64)
        }
    }
}

fn nearest_member<T: RatioInt>(
    source: &impl BitSource,
    n: u64,
    t: &Ratio<T>,
    tol: &Ratio<T>,
) -> Option<u64> {
    NearestCandidates::new(n, t, tol).find(|&r| source.member(r))
}

/// The single-target search: the member of the window
/// `{0..n} ∩ (n(t-tol), n(t+tol))` minimizing `|r/n - t|` (ties toward
/// smaller `r`), or `None` when the window holds no member.
///
/// The window must cover `0..=n` and `t` must lie in `[0, 1]`.
pub fn find_r_for_t<T: RatioInt>(
    window: &ObserverWindow,
    n: u64,
    t: &Ratio<T>,
    tol: &Ratio<T>,
) -> Option<u64> {
    assert!(
        window.len() > n,
        "window of length {} does not cover 0..={n}",
        window.len()
    );
    nearest_member(window, n, t, tol)
}

/// Whether consecutive target windows of half-width `eps_bar` are
/// pairwise disjoint for every pattern with this span: `2*eps_bar < 1/span`
/// (integer patterns have consecutive target gaps of at least `1/span`).
/// Vacuously true for singletons.
pub fn windows_disjoint<T: RatioInt>(pattern: &ScalePattern, eps_bar: &Ratio<T>) -> bool {
    match pattern.span() {
        None => true,
        Some(span) => {
            let two_eps = rat::from_u64::<T>(2) * eps_bar;
            two_eps < rat::of_u64s(1, span)
        }
    }
}

/// Searches for an `n`-scale of the pattern.
///
/// Certified mode runs one independent nearest-first search per target.
/// Loose mode assigns distinct witnesses by backtracking in target order
/// over nearest-first candidates; for patterns up to 8 targets the
/// assignment is then refined to the exact minimal maximum residual.
pub fn find_scale<T: RatioInt>(
    spec: &SetSpec,
    pattern: &ScalePattern,
    epsilon: &Ratio<T>,
    n: u64,
    mode: SearchMode<T>,
) -> Result<SearchOutcome<T>, Error> {
    let k = pattern.k();
    if (n as u128) < k as u128 {
        return Err(Error::invalid(format!(
            "n = {n} is below the pattern width {k}"
        )));
    }
    if n > i64::MAX as u64 {
        return Err(Error::Capacity {
            what: "scale index n",
            requested: n,
            limit: i64::MAX as u64,
        });
    }
    if !epsilon.is_positive() {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let targets = TargetVector::for_pattern(pattern);
    let source = SpecSource(spec);

    let r = match &mode {
        SearchMode::Certified { eps_bar } => {
            if !eps_bar.is_positive() {
                return Err(Error::invalid("eps_bar must be positive"));
            }
            if !windows_disjoint(pattern, eps_bar) {
                return Err(Error::invalid(
                    "certified mode requires 2*eps_bar < 1/span so that target windows are disjoint",
                ));
            }
            let mut r = Vec::with_capacity(k);
            for (i, t) in targets.values().iter().enumerate() {
                match nearest_member(&source, n, t, eps_bar) {
                    Some(found) => r.push(found),
                    None => return Ok(SearchOutcome::NotFound { target_index: i }),
                }
            }
            r
        }
        SearchMode::Loose => {
            if k > MAX_LOOSE_TARGETS {
                return Err(Error::invalid(format!(
                    "loose mode supports at most {MAX_LOOSE_TARGETS} targets"
                )));
            }
            match assign_distinct(&source, n, targets.values(), epsilon) {
                Ok(r) => r,
                Err(target_index) => return Ok(SearchOutcome::NotFound { target_index }),
            }
        }
    };

    let n_rat: Ratio<T> = rat::from_u64(n);
    let residuals: Vec<Ratio<T>> = targets
        .values()
        .iter()
        .zip(&r)
        .map(|(t, &ri)| (rat::from_u64::<T>(ri) / &n_rat - t).abs())
        .collect();
    let mut result = ScaleResult {
        n,
        r,
        residuals,
        mode,
        verified: false,
    };
    result.verified = verify_scale(spec, pattern, epsilon, &result);
    Ok(SearchOutcome::Found(result))
}

/// Candidate members of one target window, grown on demand in
/// residual-ascending order.
struct LazyCandidates<'a, S: BitSource, T: RatioInt> {
    iter: NearestCandidates,
    source: &'a S,
    found: Vec<u64>,
    exhausted: bool,
    target: Ratio<T>,
}

impl<'a, S: BitSource, T: RatioInt> LazyCandidates<'a, S, T> {
    fn new(source: &'a S, n: u64, t: &Ratio<T>, tol: &Ratio<T>) -> Self {
        LazyCandidates {
            iter: NearestCandidates::new(n, t, tol),
            source,
            found: Vec::new(),
            exhausted: false,
            target: t.clone(),
        }
    }

    fn get(&mut self, idx: usize) -> Option<u64> {
        while self.found.len() <= idx && !self.exhausted {
            match self.iter.by_ref().find(|&r| self.source.member(r)) {
                Some(r) => self.found.push(r),
                None => self.exhausted = true,
            }
        }
        self.found.get(idx).copied()
    }

    fn residual(&self, r: u64, n: u64) -> Ratio<T> {
        (rat::of_u64s::<T>(r, n) - &self.target).abs()
    }
}

/// Backtracking assignment of distinct witnesses, then (for small k) an
/// exact bottleneck refinement. Returns the chosen members in target
/// order, or the index of the target that could not be filled.
fn assign_distinct<S: BitSource, T: RatioInt>(
    source: &S,
    n: u64,
    targets: &[Ratio<T>],
    tol: &Ratio<T>,
) -> Result<Vec<u64>, usize> {
    let k = targets.len();
    let mut lists: Vec<LazyCandidates<'_, S, T>> = targets
        .iter()
        .map(|t| LazyCandidates::new(source, n, t, tol))
        .collect();

    // A target with an empty window can be reported immediately.
    for (i, list) in lists.iter_mut().enumerate() {
        if list.get(0).is_none() {
            return Err(i);
        }
    }

    // Depth-first greedy in target order with full backtracking:
    // complete for feasibility and deterministic.
    let mut chosen: Vec<u64> = Vec::with_capacity(k);
    let mut cursors: Vec<usize> = vec![0; k];
    let mut deepest = 0usize;
    loop {
        let level = chosen.len();
        if level == k {
            break;
        }
        deepest = deepest.max(level);
        let mut idx = cursors[level];
        let next = loop {
            match lists[level].get(idx) {
                Some(r) if chosen.contains(&r) => idx += 1,
                other => break other,
            }
        };
        match next {
            Some(r) => {
                cursors[level] = idx + 1;
                chosen.push(r);
            }
            None => {
                cursors[level] = 0;
                match chosen.pop() {
                    Some(_) => {}
                    None => return Err(deepest),
                }
            }
        }
    }

    if k <= EXHAUSTIVE_TARGETS {
        refine_bottleneck(&mut lists, n, &mut chosen);
    }
    Ok(chosen)
}

/// Exact min-max refinement: branch-and-bound over residual-sorted
/// candidates, keeping the first assignment realizing each strictly
/// smaller maximum residual. The initial assignment bounds the search,
/// so only candidates strictly better than the incumbent's bottleneck
/// are ever expanded.
fn refine_bottleneck<S: BitSource, T: RatioInt>(
    lists: &mut [LazyCandidates<'_, S, T>],
    n: u64,
    best: &mut Vec<u64>,
) {
    let k = lists.len();
    let mut best_max: Ratio<T> = best
        .iter()
        .enumerate()
        .map(|(i, &r)| lists[i].residual(r, n))
        .max()
        .expect("nonempty assignment");
    if best_max.is_zero() {
        return;
    }
    let mut budget = REFINE_NODE_BUDGET;
    let mut current: Vec<u64> = Vec::with_capacity(k);
    dfs_refine(lists, n, &mut current, &mut best_max, best, &mut budget);
}

fn dfs_refine<S: BitSource, T: RatioInt>(
    lists: &mut [LazyCandidates<'_, S, T>],
    n: u64,
    current: &mut Vec<u64>,
    best_max: &mut Ratio<T>,
    best: &mut Vec<u64>,
    budget: &mut u64,
) {
    let level = current.len();
    if level == lists.len() {
        // Strictly better by construction of the pruning bound.
        *best_max = current
            .iter()
            .enumerate()
            .map(|(i, &r)| lists[i].residual(r, n))
            .max()
            .expect("nonempty assignment");
        best.clone_from(current);
        return;
    }
    let mut idx = 0;
    loop {
        if *budget == 0 {
            return;
        }
        *budget -= 1;
        let Some(r) = lists[level].get(idx) else {
            return;
        };
        if lists[level].residual(r, n) >= *best_max {
            return; // residual-ascending order: nothing further helps
        }
        if !current.contains(&r) {
            current.push(r);
            dfs_refine(lists, n, current, best_max, best, budget);
            current.pop();
        }
        idx += 1;
    }
}

/// Independent re-check of a claimed scale: every witness is a member,
/// witnesses are pairwise distinct (for `k > 1`), and every residual
/// satisfies `|r_i - t_i * n| < n * epsilon` by exact comparison. Shares
/// no state with the search.
pub fn verify_scale<T: RatioInt>(
    spec: &SetSpec,
    pattern: &ScalePattern,
    epsilon: &Ratio<T>,
    result: &ScaleResult<T>,
) -> bool {
    let k = pattern.k();
    if result.r.len() != k {
        return false;
    }
    if result.r.iter().any(|&r| r > result.n) {
        return false;
    }
    if !result.r.iter().all(|&r| spec.contains(r as i64)) {
        return false;
    }
    if k > 1 {
        let mut sorted = result.r.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
    }
    let n_rat: Ratio<T> = rat::from_u64(result.n);
    let bound = &n_rat * epsilon;
    let targets = TargetVector::<T>::for_pattern(pattern);
    targets
        .values()
        .iter()
        .zip(&result.r)
        .all(|(t, &r)| (rat::from_u64::<T>(r) - t * &n_rat).abs() < bound)
}
