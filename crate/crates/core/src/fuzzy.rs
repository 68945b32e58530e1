//! Piecewise-linear membership functions over visit counts, linguistic
//! classification, and the min-intersection decision rule used to pick the
//! frequent visitor.

use std::fmt;

use thiserror::Error;

use crate::topology::Imsi;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FuzzyError {
    #[error("no branch of {label} matches visit count {visits}")]
    NoBranchMatches { label: LinguisticLabel, visits: u32 },
    #[error("empty input")]
    EmptyInput,
}

/// Crisp frequency category attached to a subscriber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LinguisticLabel {
    Low,
    Medium,
    High,
}

impl fmt::Display for LinguisticLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinguisticLabel::Low => f.write_str("Low"),
            LinguisticLabel::Medium => f.write_str("Medium"),
            LinguisticLabel::High => f.write_str("High"),
        }
    }
}

/// Half-open-ish interval over visit counts; each bound may be inclusive
/// or exclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub lo_inclusive: bool,
    pub hi: f64,
    pub hi_inclusive: bool,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lo_inclusive {
            v >= self.lo
        } else {
            v > self.lo
        };
        let below = if self.hi_inclusive {
            v <= self.hi
        } else {
            v < self.hi
        };
        above && below
    }
}

/// One branch: an interval condition paired with an affine expression
/// `slope * visits + intercept`. Branches are checked in listed order and
/// the first match wins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub condition: Interval,
    pub slope: f64,
    pub intercept: f64,
}

/// Piecewise-linear map from a visit count to a degree in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipFunction {
    pub label: LinguisticLabel,
    pub branches: Vec<Branch>,
    /// Closed domain interval (the universal set of visit counts).
    pub domain: (f64, f64),
}

/// Evaluates the first matching branch and clamps the result into [0, 1].
pub fn eval_membership(func: &MembershipFunction, visits: u32) -> Result<f64, FuzzyError> {
    let v = f64::from(visits);
    for b in &func.branches {
        if b.condition.contains(v) {
            return Ok((b.slope * v + b.intercept).clamp(0.0, 1.0));
        }
    }
    Err(FuzzyError::NoBranchMatches {
        label: func.label,
        visits,
    })
}

/// Fuzzy-set intersection realized as the pointwise minimum.
pub fn min_intersection(degrees: &[f64]) -> Result<f64, FuzzyError> {
    if degrees.is_empty() {
        return Err(FuzzyError::EmptyInput);
    }
    Ok(degrees.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Picks the candidate with the minimum membership degree; ties break to
/// the lexicographically smallest IMSI.
pub fn select_frequent(candidates: &[(Imsi, f64)]) -> Result<(Imsi, f64), FuzzyError> {
    let mut best: Option<&(Imsi, f64)> = None;
    for c in candidates {
        best = Some(match best {
            None => c,
            Some(b) => {
                if c.1 < b.1 || (c.1 == b.1 && c.0 < b.0) {
                    c
                } else {
                    b
                }
            }
        });
    }
    best.cloned().ok_or(FuzzyError::EmptyInput)
}

/// Crisp thresholds on the weekly total that reproduce the reference
/// classification table: total <= low_max is Low, <= medium_max Medium,
/// above that High.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassifyThresholds {
    pub low_max: u32,
    pub medium_max: u32,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        Self {
            low_max: 2,
            medium_max: 5,
        }
    }
}

/// Per-subscriber visit tallies over an observation window of `window_days`
/// days.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitStats {
    pub imsi: Imsi,
    pub window_days: usize,
    pub per_day_visits: Vec<u32>,
    pub total_visits: u32,
}

impl VisitStats {
    pub fn new(imsi: Imsi, window_days: usize) -> Self {
        Self {
            imsi,
            window_days,
            per_day_visits: vec![0; window_days],
            total_visits: 0,
        }
    }

    pub fn from_pattern(imsi: Imsi, per_day: &[u32]) -> Self {
        Self {
            imsi,
            window_days: per_day.len(),
            per_day_visits: per_day.to_vec(),
            total_visits: per_day.iter().sum(),
        }
    }
}

/// Maps a weekly total onto its crisp label.
pub fn classify_total(total: u32, t: &ClassifyThresholds) -> LinguisticLabel {
    if total <= t.low_max {
        LinguisticLabel::Low
    } else if total <= t.medium_max {
        LinguisticLabel::Medium
    } else {
        LinguisticLabel::High
    }
}

pub fn classify_visits(stats: &VisitStats, t: &ClassifyThresholds) -> LinguisticLabel {
    classify_total(stats.total_visits, t)
}

/// The three membership functions of one universal set of visit counts.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzySetSpec {
    pub low: MembershipFunction,
    pub medium: MembershipFunction,
    pub high: MembershipFunction,
    pub domain: (f64, f64),
}

impl FuzzySetSpec {
    pub fn function(&self, label: LinguisticLabel) -> &MembershipFunction {
        match label {
            LinguisticLabel::Low => &self.low,
            LinguisticLabel::Medium => &self.medium,
            LinguisticLabel::High => &self.high,
        }
    }
}

fn branch(lo: f64, lo_in: bool, hi: f64, hi_in: bool, slope: f64, intercept: f64) -> Branch {
    Branch {
        condition: Interval {
            lo,
            lo_inclusive: lo_in,
            hi,
            hi_inclusive: hi_in,
        },
        slope,
        intercept,
    }
}

const INF: f64 = f64::INFINITY;

/// Membership functions over the observation interval [0, 20].
///
/// Branches are normalized to first-match-wins half-open intervals. The
/// Medium rising branch is sometimes quoted as "(No_of_visits-12)/5 for
/// 9 < v < 12", which goes negative on its own interval; it is defined
/// here as "(v-8)/5 for 8 < v < 12", continuous with Medium(8) = 0 and
/// consistent with Medium(12) = (14-12)/5 = 0.4 on the falling branch.
pub fn observation_spec() -> FuzzySetSpec {
    let low = MembershipFunction {
        label: LinguisticLabel::Low,
        branches: vec![
            // 1, No_of_visits <= 4
            branch(-INF, false, 4.0, true, 0.0, 1.0),
            // (8 - v)/5, 4 < v < 8
            branch(4.0, false, 8.0, false, -0.2, 1.6),
            // 0, v >= 8
            branch(8.0, true, INF, false, 0.0, 0.0),
        ],
        domain: (0.0, 20.0),
    };
    let medium = MembershipFunction {
        label: LinguisticLabel::Medium,
        branches: vec![
            // 0, v <= 8
            branch(-INF, false, 8.0, true, 0.0, 0.0),
            // (v - 8)/5, 8 < v < 12   (instead of "(v-12)/5, 9 < v < 12")
            branch(8.0, false, 12.0, false, 0.2, -1.6),
            // (14 - v)/5, 12 <= v < 14
            branch(12.0, true, 14.0, false, -0.2, 2.8),
            // 1, v >= 14   (instead of the contradictory "1, 14 < v >= 15")
            branch(14.0, true, INF, false, 0.0, 1.0),
        ],
        domain: (0.0, 20.0),
    };
    let high = MembershipFunction {
        label: LinguisticLabel::High,
        branches: vec![
            // 0, v < 16
            branch(-INF, false, 16.0, false, 0.0, 0.0),
            // (18 - v)/5, 16 <= v < 18
            branch(16.0, true, 18.0, false, -0.2, 3.6),
            // 1, v >= 18
            branch(18.0, true, INF, false, 0.0, 1.0),
        ],
        domain: (0.0, 20.0),
    };
    FuzzySetSpec {
        low,
        medium,
        high,
        domain: (0.0, 20.0),
    }
}

/// Weekly membership functions over [0, 7].
///
/// Low is 1 for v <= 1 and falls to 0 at v = 2, Medium is a triangle
/// peaking near 4, and High is 1 for v >= 6 — chosen so the crisp
/// thresholds in [`ClassifyThresholds`] and these curves agree on every
/// reference visit total.
pub fn weekly_spec() -> FuzzySetSpec {
    let low = MembershipFunction {
        label: LinguisticLabel::Low,
        branches: vec![
            // 1, v <= 1  (the v = 1 boundary must classify Low)
            branch(-INF, false, 1.0, true, 0.0, 1.0),
            // falls from 1 at v = 1 to 0 at v = 2
            branch(1.0, false, 2.0, false, -1.0, 2.0),
            // 0, v >= 2
            branch(2.0, true, INF, false, 0.0, 0.0),
        ],
        domain: (0.0, 7.0),
    };
    let medium = MembershipFunction {
        label: LinguisticLabel::Medium,
        branches: vec![
            // 0, v <= 2
            branch(-INF, false, 2.0, true, 0.0, 0.0),
            // (v - 2)/3, 2 < v < 4
            branch(2.0, false, 4.0, false, 1.0 / 3.0, -2.0 / 3.0),
            // (6 - v)/3, 4 <= v < 6
            branch(4.0, true, 6.0, false, -1.0 / 3.0, 2.0),
            // 0, v >= 6
            branch(6.0, true, INF, false, 0.0, 0.0),
        ],
        domain: (0.0, 7.0),
    };
    let high = MembershipFunction {
        label: LinguisticLabel::High,
        branches: vec![
            // 0, v < 5
            branch(-INF, false, 5.0, false, 0.0, 0.0),
            // (7 - v)/3, 5 <= v < 6
            branch(5.0, true, 6.0, false, -1.0 / 3.0, 7.0 / 3.0),
            // 1, v >= 6
            branch(6.0, true, INF, false, 0.0, 1.0),
        ],
        domain: (0.0, 7.0),
    };
    FuzzySetSpec {
        low,
        medium,
        high,
        domain: (0.0, 7.0),
    }
}

/// The two built-in fuzzy set specs: observation interval [0, 20] and
/// weekly interval [0, 7].
pub fn default_fuzzy_specs() -> (FuzzySetSpec, FuzzySetSpec) {
    (observation_spec(), weekly_spec())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecParseError {
    #[error("line {line}: expected `label, interval, slope, intercept` or `domain, lo, hi`, got {got:?}")]
    Malformed { line: usize, got: String },
    #[error("line {line}: unknown label {got:?}")]
    UnknownLabel { line: usize, got: String },
    #[error("line {line}: bad number {got:?}")]
    BadNumber { line: usize, got: String },
    #[error("line {line}: bad interval {got:?} (expected e.g. `[4 .. 8)` with inf/-inf allowed)")]
    BadInterval { line: usize, got: String },
    #[error("missing `domain` line")]
    MissingDomain,
    #[error("label {0} has no branches")]
    MissingLabel(LinguisticLabel),
}

fn parse_num(s: &str, line: usize) -> Result<f64, SpecParseError> {
    match s.trim() {
        "inf" | "+inf" => Ok(INF),
        "-inf" => Ok(-INF),
        t => t.parse::<f64>().map_err(|_| SpecParseError::BadNumber {
            line,
            got: s.to_string(),
        }),
    }
}

fn parse_interval(s: &str, line: usize) -> Result<Interval, SpecParseError> {
    let bad = || SpecParseError::BadInterval {
        line,
        got: s.to_string(),
    };
    let t = s.trim();
    let lo_inclusive = match t.chars().next() {
        Some('[') => true,
        Some('(') => false,
        _ => return Err(bad()),
    };
    let hi_inclusive = match t.chars().last() {
        Some(']') => true,
        Some(')') => false,
        _ => return Err(bad()),
    };
    let inner = &t[1..t.len() - 1];
    let (lo, hi) = inner.split_once("..").ok_or_else(bad)?;
    Ok(Interval {
        lo: parse_num(lo, line)?,
        lo_inclusive,
        hi: parse_num(hi, line)?,
        hi_inclusive,
    })
}

/// Parses a membership-function override file.
///
/// Format, one record per line with `#` comments:
///
/// ```text
/// domain, 0, 20
/// low, (-inf .. 4], 0, 1
/// low, (4 .. 8), -0.2, 1.6
/// low, [8 .. inf), 0, 0
/// ```
///
/// Branch order within a label is the listed order (first match wins).
pub fn parse_fuzzy_spec(text: &str) -> Result<FuzzySetSpec, SpecParseError> {
    let mut domain: Option<(f64, f64)> = None;
    let mut branches: [Vec<Branch>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let fields: Vec<&str> = stripped.splitn(2, ',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(SpecParseError::Malformed {
                line,
                got: raw.to_string(),
            });
        }
        if fields[0].eq_ignore_ascii_case("domain") {
            let parts: Vec<&str> = fields[1].split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(SpecParseError::Malformed {
                    line,
                    got: raw.to_string(),
                });
            }
            domain = Some((parse_num(parts[0], line)?, parse_num(parts[1], line)?));
            continue;
        }
        let label = match fields[0].to_ascii_lowercase().as_str() {
            "low" => 0,
            "medium" => 1,
            "high" => 2,
            other => {
                return Err(SpecParseError::UnknownLabel {
                    line,
                    got: other.to_string(),
                })
            }
        };
        // rest: interval, slope, intercept — interval itself contains no commas.
        let rest: Vec<&str> = fields[1].split(',').map(str::trim).collect();
        if rest.len() != 3 {
            return Err(SpecParseError::Malformed {
                line,
                got: raw.to_string(),
            });
        }
        branches[label].push(Branch {
            condition: parse_interval(rest[0], line)?,
            slope: parse_num(rest[1], line)?,
            intercept: parse_num(rest[2], line)?,
        });
    }
    let domain = domain.ok_or(SpecParseError::MissingDomain)?;
    let [low_b, med_b, high_b] = branches;
    let make = |label, bs: Vec<Branch>| {
        if bs.is_empty() {
            Err(SpecParseError::MissingLabel(label))
        } else {
            Ok(MembershipFunction {
                label,
                branches: bs,
                domain,
            })
        }
    };
    Ok(FuzzySetSpec {
        low: make(LinguisticLabel::Low, low_b)?,
        medium: make(LinguisticLabel::Medium, med_b)?,
        high: make(LinguisticLabel::High, high_b)?,
        domain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    fn eval(spec: &FuzzySetSpec, label: LinguisticLabel, v: u32) -> f64 {
        eval_membership(spec.function(label), v).unwrap()
    }

    #[test]
    fn observation_anchor_values() {
        let spec = observation_spec();
        assert!((eval(&spec, LinguisticLabel::Low, 5) - 0.6).abs() < TOL);
        assert!((eval(&spec, LinguisticLabel::Medium, 12) - 0.4).abs() < TOL);
        assert!((eval(&spec, LinguisticLabel::High, 17) - 0.2).abs() < TOL);
        assert!((eval(&spec, LinguisticLabel::Low, 0) - 1.0).abs() < TOL);
        assert!((eval(&spec, LinguisticLabel::High, 18) - 1.0).abs() < TOL);
        // Boundary v = 4 belongs to the constant branch.
        assert!((eval(&spec, LinguisticLabel::Low, 4) - 1.0).abs() < TOL);
    }

    #[test]
    fn weekly_boundaries() {
        let spec = weekly_spec();
        assert!((eval(&spec, LinguisticLabel::Low, 1) - 1.0).abs() < TOL);
        assert!((eval(&spec, LinguisticLabel::High, 7) - 1.0).abs() < TOL);
        assert!((eval(&spec, LinguisticLabel::High, 6) - 1.0).abs() < TOL);
    }

    #[test]
    fn min_intersection_cases() {
        assert_eq!(min_intersection(&[0.6, 0.4, 0.2]).unwrap(), 0.2);
        assert_eq!(min_intersection(&[0.7]).unwrap(), 0.7);
        assert_eq!(min_intersection(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(min_intersection(&[]).unwrap_err(), FuzzyError::EmptyInput);
    }

    #[test]
    fn select_frequent_worked_example() {
        let cands = vec![
            (Imsi::new("S1"), 0.6),
            (Imsi::new("S2"), 0.4),
            (Imsi::new("S3"), 0.2),
        ];
        assert_eq!(select_frequent(&cands).unwrap(), (Imsi::new("S3"), 0.2));
        assert_eq!(
            select_frequent(&[(Imsi::new("X"), 0.5)]).unwrap(),
            (Imsi::new("X"), 0.5)
        );
        // Documented tie-break: smallest IMSI.
        let tie = vec![(Imsi::new("B"), 0.3), (Imsi::new("A"), 0.3)];
        assert_eq!(select_frequent(&tie).unwrap(), (Imsi::new("A"), 0.3));
        assert_eq!(select_frequent(&[]).unwrap_err(), FuzzyError::EmptyInput);
    }

    #[test]
    fn classify_reference_rows() {
        let t = ClassifyThresholds::default();
        assert_eq!(classify_total(1, &t), LinguisticLabel::Low);
        assert_eq!(classify_total(0, &t), LinguisticLabel::Low);
        assert_eq!(classify_total(4, &t), LinguisticLabel::Medium);
        assert_eq!(classify_total(16, &t), LinguisticLabel::High);
    }

    #[test]
    fn spec_file_round_trip_of_low() {
        let text = "\
# observation Low, transcribed
domain, 0, 20
low, (-inf .. 4], 0, 1
low, (4 .. 8), -0.2, 1.6
low, [8 .. inf), 0, 0
medium, [0 .. inf), 0, 0
high, [0 .. inf), 0, 0
";
        let spec = parse_fuzzy_spec(text).unwrap();
        let builtin = observation_spec();
        for v in 0..=20 {
            assert_eq!(
                eval_membership(&spec.low, v).unwrap(),
                eval_membership(&builtin.low, v).unwrap()
            );
        }
    }

    #[test]
    fn spec_file_errors() {
        assert!(matches!(
            parse_fuzzy_spec("low, [0 .. 1), 0, 1\n").unwrap_err(),
            SpecParseError::MissingDomain
        ));
        assert!(matches!(
            parse_fuzzy_spec("domain, 0, 7\nfoo, [0 .. 1), 0, 1\n").unwrap_err(),
            SpecParseError::UnknownLabel { line: 2, .. }
        ));
    }

    proptest! {
        #[test]
        fn degrees_always_in_unit_interval(v in 0u32..=200) {
            let (obs, weekly) = default_fuzzy_specs();
            for spec in [&obs, &weekly] {
                for label in [LinguisticLabel::Low, LinguisticLabel::Medium, LinguisticLabel::High] {
                    let d = eval_membership(spec.function(label), v).unwrap();
                    prop_assert!((0.0..=1.0).contains(&d));
                }
            }
        }

        #[test]
        fn min_monotone_under_extension(xs in prop::collection::vec(0.0f64..=1.0, 1..8),
                                        extra in prop::collection::vec(0.0f64..=1.0, 0..4)) {
            let base = min_intersection(&xs).unwrap();
            let mut ext = xs.clone();
            ext.extend(extra);
            prop_assert!(min_intersection(&ext).unwrap() <= base);
        }

        #[test]
        fn select_frequent_permutation_invariant(
            degrees in prop::collection::vec(0.0f64..=1.0, 1..6),
            rot in 0usize..6,
        ) {
            let cands: Vec<(Imsi, f64)> = degrees
                .iter()
                .enumerate()
                .map(|(i, d)| (Imsi::new(format!("S{i}")), *d))
                .collect();
            let mut rotated = cands.clone();
            rotated.rotate_left(rot % cands.len());
            prop_assert_eq!(select_frequent(&cands).unwrap(), select_frequent(&rotated).unwrap());
        }

        #[test]
        fn classification_monotone(a in 0u32..50, b in 0u32..50) {
            let t = ClassifyThresholds::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(classify_total(lo, &t) <= classify_total(hi, &t));
        }
    }
}
