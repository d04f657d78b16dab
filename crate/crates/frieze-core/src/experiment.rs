//! Empirical measurements around the certified threshold.
//!
//! The guarantee is "scales exist for every `n >= N`"; a finite machine
//! probes it through a window: the *empirical minimal N* is the smallest
//! `N'` such that loose-mode searches succeed for every
//! `n in [N', N'+W]`. Reports pair that with the certified threshold,
//! scan the certified range for failures (there must be none), and
//! record everything as byte-reproducible CSV: exact arithmetic, fixed
//! tie-breaks, and counter-based randomness leave nothing
//! platform-dependent.

use std::collections::BTreeMap;
use std::io::{self, Write};

use num_rational::Ratio;

use crate::certificate::{build_certificate, FriezeCertificate, ScalePattern};
use crate::error::Error;
use crate::rat::{self, RatioInt};
use crate::scale_search::{find_scale, ScaleResult, SearchMode, SearchOutcome};
use crate::set_model::SetSpec;

/// One scanned scale index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow<T: RatioInt> {
    pub n: u64,
    pub success: bool,
    /// Witnesses in target order (empty on failure).
    pub r: Vec<u64>,
    pub max_residual: Option<Ratio<T>>,
}

/// A full certified-versus-empirical comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentReport<T: RatioInt> {
    pub set_text: String,
    pub pattern: ScalePattern,
    pub epsilon: Ratio<T>,
    /// Window width `W` of the "for all n" proxy.
    pub window: u64,
    /// Upper bound of the empirical scan.
    pub n_max: u64,
    pub certificate: Option<FriezeCertificate<T>>,
    /// Why certification was not possible, when it was not.
    pub refusal: Option<String>,
    pub empirical_n: Option<u64>,
    /// Scale indices in `[N, N+W]` without a loose-mode scale (certified
    /// runs only; must be empty when the chain is sound).
    pub failures: Vec<u64>,
    /// `N - empirical_N`.
    pub slack: Option<i64>,
    pub rows: Vec<ReportRow<T>>,
}

fn loose_row<T: RatioInt>(
    spec: &SetSpec,
    pattern: &ScalePattern,
    epsilon: &Ratio<T>,
    n: u64,
) -> Result<ReportRow<T>, Error> {
    let outcome = find_scale(spec, pattern, epsilon, n, SearchMode::Loose)?;
    Ok(match outcome {
        SearchOutcome::Found(ScaleResult { r, residuals, .. }) => ReportRow {
            n,
            success: true,
            max_residual: residuals.iter().max().cloned(),
            r,
        },
        SearchOutcome::NotFound { .. } => ReportRow {
            n,
            success: false,
            r: Vec::new(),
            max_residual: None,
        },
    })
}

/// Smallest `N' >= k` such that loose-mode searches succeed for every
/// `n in [N', N'+window]`, or `None` when no such `N' <= n_max` exists.
pub fn minimal_empirical_n<T: RatioInt>(
    spec: &SetSpec,
    pattern: &ScalePattern,
    epsilon: &Ratio<T>,
    window: u64,
    n_max: u64,
) -> Result<Option<u64>, Error> {
    empirical_scan(spec, pattern, epsilon, window, n_max, &mut |_row| {})
}

fn empirical_scan<T: RatioInt>(
    spec: &SetSpec,
    pattern: &ScalePattern,
    epsilon: &Ratio<T>,
    window: u64,
    n_max: u64,
    collect: &mut impl FnMut(&ReportRow<T>),
) -> Result<Option<u64>, Error> {
    let k = pattern.k() as u64;
    if window == 0 {
        return Err(Error::invalid("window must be at least 1"));
    }
    if n_max < k + window {
        return Err(Error::invalid("n_max must be at least k + window"));
    }
    let mut run_start: Option<u64> = None;
    for n in k..=n_max + window {
        let row = loose_row(spec, pattern, epsilon, n)?;
        collect(&row);
        if row.success {
            let start = *run_start.get_or_insert(n);
            if start <= n_max && n - start == window {
                return Ok(Some(start));
            }
        } else {
            run_start = None;
        }
    }
    Ok(None)
}

/// Loose-mode rows for every `n` in `[n_lo, n_hi]` (CLI scans).
pub fn scan_rows<T: RatioInt>(
    spec: &SetSpec,
    pattern: &ScalePattern,
    epsilon: &Ratio<T>,
    n_lo: u64,
    n_hi: u64,
) -> Result<Vec<ReportRow<T>>, Error> {
    let k = pattern.k() as u64;
    if !(k <= n_lo && n_lo <= n_hi) {
        return Err(Error::invalid("need k <= n_lo <= n_hi"));
    }
    (n_lo..=n_hi)
        .map(|n| loose_row(spec, pattern, epsilon, n))
        .collect()
}

/// All `n` in `[n_lo, n_hi]` where the loose-mode search fails, ascending.
pub fn failure_scan<T: RatioInt>(
    spec: &SetSpec,
    pattern: &ScalePattern,
    epsilon: &Ratio<T>,
    n_lo: u64,
    n_hi: u64,
) -> Result<Vec<u64>, Error> {
    let k = pattern.k() as u64;
    if !(k <= n_lo && n_lo <= n_hi) {
        return Err(Error::invalid("need k <= n_lo <= n_hi"));
    }
    let mut failures = Vec::new();
    for n in n_lo..=n_hi {
        if !loose_row(spec, pattern, epsilon, n)?.success {
            failures.push(n);
        }
    }
    Ok(failures)
}

/// Smallest `a` in `[anchor_lo, anchor_hi]` such that the set contains the
/// exact translated copy `a + (q_i - q_1)` for every `i`; `None` if the
/// range holds no copy. Approximation is genuinely needed exactly when
/// such copies do not exist (the evens contain no copy of `{0, 1}`).
pub fn exact_copy_exists(
    spec: &SetSpec,
    pattern: &ScalePattern,
    anchor_lo: i64,
    anchor_hi: i64,
) -> Option<i64> {
    let q = pattern.values();
    let offsets: Vec<i64> = q.iter().map(|&qi| qi - q[0]).collect();
    (anchor_lo..=anchor_hi).find(|&a| {
        offsets
            .iter()
            .all(|&d| a.checked_add(d).is_some_and(|x| spec.contains(x)))
    })
}

/// Runs the full pipeline: certificate (or recorded refusal), empirical
/// minimal N, and a failure scan over the certified range `[N, N+W]`.
pub fn compare_report<T: RatioInt>(
    spec: &SetSpec,
    pattern: &ScalePattern,
    epsilon: &Ratio<T>,
    horizon: u64,
    window: u64,
) -> Result<ExperimentReport<T>, Error> {
    let k = pattern.k() as u64;
    let (certificate, refusal) = match build_certificate(spec, pattern, epsilon, horizon) {
        Ok(cert) => (Some(cert), None),
        Err(e @ (Error::CertificateRefused { .. } | Error::CertificationFailed(_))) => {
            (None, Some(e.to_string()))
        }
        Err(other) => return Err(other),
    };

    let n_max = match &certificate {
        Some(cert) => cert.scale_floor.max(k + window),
        None => (k + 4 * window).max(2_000),
    };

    let mut rows: BTreeMap<u64, ReportRow<T>> = BTreeMap::new();
    let empirical_n = empirical_scan(spec, pattern, epsilon, window, n_max, &mut |row| {
        rows.insert(row.n, row.clone());
    })?;

    let mut failures = Vec::new();
    if let Some(cert) = &certificate {
        for n in cert.scale_floor..=cert.scale_floor + window {
            let row = rows
                .get(&n)
                .cloned()
                .map_or_else(|| loose_row(spec, pattern, epsilon, n), Ok)?;
            if !row.success {
                failures.push(n);
            }
            rows.insert(n, row);
        }
    }

    let slack = match (&certificate, empirical_n) {
        (Some(cert), Some(emp)) => Some(cert.scale_floor as i64 - emp as i64),
        _ => None,
    };

    Ok(ExperimentReport {
        set_text: spec.to_string(),
        pattern: pattern.clone(),
        epsilon: epsilon.clone(),
        window,
        n_max,
        certificate,
        refusal,
        empirical_n,
        failures,
        slack,
        rows: rows.into_values().collect(),
    })
}

impl<T: RatioInt> ExperimentReport<T> {
    /// Byte-reproducible CSV: a `#`-prefixed key-value summary block,
    /// then the header and one row per scanned `n`. Rationals appear as
    /// separate numerator/denominator columns.
    pub fn write_csv(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "# set {}", self.set_text)?;
        writeln!(out, "# pattern {}", self.pattern)?;
        writeln!(out, "# epsilon {}", rat::render(&self.epsilon))?;
        writeln!(out, "# window {}", self.window)?;
        writeln!(out, "# n_max {}", self.n_max)?;
        match &self.certificate {
            Some(cert) => {
                writeln!(out, "# certified true")?;
                for line in cert.record(None).lines() {
                    writeln!(out, "# cert_{line}")?;
                }
            }
            None => {
                writeln!(out, "# certified false")?;
                if let Some(refusal) = &self.refusal {
                    writeln!(out, "# refusal {refusal}")?;
                }
            }
        }
        match self.empirical_n {
            Some(n) => writeln!(out, "# empirical_N {n}")?,
            None => writeln!(out, "# empirical_N none")?,
        }
        match self.slack {
            Some(s) => writeln!(out, "# slack {s}")?,
            None => writeln!(out, "# slack none")?,
        }
        if self.certificate.is_some() {
            if self.failures.is_empty() {
                writeln!(out, "# failures_in_certified_range none")?;
            } else {
                let list: Vec<String> = self.failures.iter().map(u64::to_string).collect();
                writeln!(out, "# failures_in_certified_range {}", list.join(";"))?;
            }
        }
        writeln!(out, "n,success,r_list,max_residual_num,max_residual_den")?;
        for row in &self.rows {
            let r_list: Vec<String> = row.r.iter().map(u64::to_string).collect();
            let (num, den) = match &row.max_residual {
                Some(res) => (res.numer().to_string(), res.denom().to_string()),
                None => (String::new(), String::new()),
            };
            writeln!(
                out,
                "{},{},{},{},{}",
                row.n,
                row.success,
                r_list.join(";"),
                num,
                den
            )?;
        }
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}
