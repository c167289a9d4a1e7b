//! Reproduction of the published two-component Student-mixture tables:
//! standardized VaR quantiles at α = 0.01 and α = 0.001, and the companion
//! ES-multiplier tables.
//!
//! Every expected cell is embedded exactly as printed. Cells are classified:
//! `MatchRequired` cells must reproduce within [`QUANTILE_TOLERANCE`];
//! `FlaggedMisprint` cells are known typos that the harness confirms as
//! deviations rather than matching; `NonAuthoritative` cells (the whole of
//! both ES tables) are compared and reported but never asserted, because the
//! printed ES values are inconsistent with any tail-average coefficient —
//! they fall orders of magnitude below the VaR quantiles they accompany.
//! Comparisons for those use the validated ES multiplier (see
//! [`crate::es::EsConvention`]).

use serde::Serialize;

use crate::error::Result;
use crate::es::{es_multiplier, EsConvention, EsRoute};
use crate::model::GeneratorKind;
use crate::var::solve_quantile;

/// Absolute tolerance for match-required quantile cells (tables print 5–6
/// significant digits).
pub const QUANTILE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellStatus {
    MatchRequired,
    FlaggedMisprint,
    NonAuthoritative,
}

impl CellStatus {
    fn label(self) -> &'static str {
        match self {
            CellStatus::MatchRequired => "match-required",
            CellStatus::FlaggedMisprint => "flagged-misprint",
            CellStatus::NonAuthoritative => "non-authoritative",
        }
    }
}

/// What the table's cells contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TableKind {
    /// Standardized mixture quantiles q with β·G₁(q) + (1−β)·G₂(q) = α.
    Quantile,
    /// Standardized ES multipliers for the same mixtures.
    EsMultiplier,
}

/// One embedded reference table: β rows × (ν₁, ν₂) columns.
#[derive(Debug, Clone)]
pub struct TableSpec {
    pub name: &'static str,
    pub alpha: f64,
    pub kind: TableKind,
    pub nu_pairs: &'static [(f64, f64)],
    pub betas: &'static [f64],
    /// `expected[row][col]` for β = betas\[row\], pair = nu_pairs\[col\].
    pub expected: &'static [&'static [f64]],
    /// (row, col) coordinates of known misprints.
    pub flagged: &'static [(usize, usize)],
    /// false loads every cell as [`CellStatus::NonAuthoritative`].
    pub authoritative: bool,
}

impl TableSpec {
    pub fn status(&self, row: usize, col: usize) -> CellStatus {
        if !self.authoritative {
            CellStatus::NonAuthoritative
        } else if self.flagged.contains(&(row, col)) {
            CellStatus::FlaggedMisprint
        } else {
            CellStatus::MatchRequired
        }
    }

    /// Consistency of the embedded dimensions.
    pub fn check(&self) -> bool {
        self.expected.len() == self.betas.len()
            && self.expected.iter().all(|r| r.len() == self.nu_pairs.len())
            && self.flagged.iter().all(|&(r, c)| r < self.betas.len() && c < self.nu_pairs.len())
    }
}

/// One compared cell.
#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub table: &'static str,
    pub alpha: f64,
    pub beta: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub expected: f64,
    pub computed: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub status: CellStatus,
    /// Within tolerance of the printed value.
    pub pass: bool,
    /// Per-cell solver failure, surfaced instead of aborting the table.
    pub error: Option<String>,
}

/// A fully compared table.
#[derive(Debug, Clone)]
pub struct TableReport {
    pub name: &'static str,
    pub alpha: f64,
    pub kind: TableKind,
    pub cells: Vec<CellReport>,
}

impl TableReport {
    /// All match-required cells reproduce within tolerance (drives exit
    /// status; flagged and non-authoritative cells never fail a run).
    pub fn required_all_pass(&self) -> bool {
        self.cells
            .iter()
            .filter(|c| c.status == CellStatus::MatchRequired)
            .all(|c| c.pass)
    }

    /// Every flagged misprint indeed deviates from the computed value.
    pub fn flagged_all_deviate(&self) -> bool {
        self.cells
            .iter()
            .filter(|c| c.status == CellStatus::FlaggedMisprint)
            .all(|c| !c.pass && c.error.is_none())
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let mut by_status = (0, 0, 0);
        for c in &self.cells {
            match c.status {
                CellStatus::MatchRequired => by_status.0 += 1,
                CellStatus::FlaggedMisprint => by_status.1 += 1,
                CellStatus::NonAuthoritative => by_status.2 += 1,
            }
        }
        by_status
    }

    /// CSV with one row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "table,alpha,beta,nu1,nu2,expected,computed,abs_diff,rel_diff,status,pass\n",
        );
        for c in &self.cells {
            // {:?} on floats prints the shortest round-trip form
            out.push_str(&format!(
                "{},{},{},{},{},{:?},{:?},{:?},{:?},{},{}\n",
                c.table,
                c.alpha,
                c.beta,
                c.nu1,
                c.nu2,
                c.expected,
                c.computed,
                c.abs_diff,
                c.rel_diff,
                c.status.label(),
                c.pass
            ));
        }
        out
    }
}

fn compute_cell(kind: TableKind, alpha: f64, beta: f64, nu1: f64, nu2: f64) -> Result<f64> {
    let mix = [
        (beta, GeneratorKind::StudentT { nu: nu1 }),
        (1.0 - beta, GeneratorKind::StudentT { nu: nu2 }),
    ];
    let q = solve_quantile(&mix, alpha, 1)?;
    match kind {
        TableKind::Quantile => Ok(q.q_alpha),
        TableKind::EsMultiplier => Ok(es_multiplier(
            &mix,
            q.q_alpha,
            alpha,
            1,
            EsRoute::ClosedForm,
            EsConvention::Validated,
        )?
        .value),
    }
}

/// Compute every cell of `spec` and diff it against the printed value.
/// Solver failures are recorded per cell, never propagated.
pub fn reproduce_table(spec: &TableSpec) -> TableReport {
    let mut cells = Vec::with_capacity(spec.betas.len() * spec.nu_pairs.len());
    for (row, &beta) in spec.betas.iter().enumerate() {
        for (col, &(nu1, nu2)) in spec.nu_pairs.iter().enumerate() {
            let expected = spec.expected[row][col];
            let status = spec.status(row, col);
            let (computed, error) = match compute_cell(spec.kind, spec.alpha, beta, nu1, nu2) {
                Ok(v) => (v, None),
                Err(e) => (f64::NAN, Some(e.to_string())),
            };
            let abs_diff = (computed - expected).abs();
            let rel_diff = abs_diff / expected.abs().max(f64::MIN_POSITIVE);
            cells.push(CellReport {
                table: spec.name,
                alpha: spec.alpha,
                beta,
                nu1,
                nu2,
                expected,
                computed,
                abs_diff,
                rel_diff,
                status,
                pass: error.is_none() && abs_diff <= QUANTILE_TOLERANCE,
                error,
            });
        }
    }
    TableReport { name: spec.name, alpha: spec.alpha, kind: spec.kind, cells }
}

/// β-monotonicity violations in the PRINTED values of a quantile table:
/// each (ν₁, ν₂) column must be monotone in β, rising when ν₁ < ν₂
/// (more weight on the heavier tail) and falling when ν₁ > ν₂. Returns the
/// (row, col) of every cell that breaks the direction against its
/// predecessor — this is exactly how the embedded misprints were found.
pub fn expected_monotonicity_violations(spec: &TableSpec) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (col, &(nu1, nu2)) in spec.nu_pairs.iter().enumerate() {
        let rising = nu1 < nu2;
        for row in 1..spec.betas.len() {
            let prev = spec.expected[row - 1][col];
            let cur = spec.expected[row][col];
            let ok = if rising { cur > prev } else { cur < prev };
            if !ok {
                // attribute the break to whichever neighbor is off-trend
                // relative to the rest of the column; report both-adjacent
                // cells conservatively as the breaking row
                out.push((row, col));
            }
        }
    }
    out
}

const PAIRS_16: &[(f64, f64)] = &[
    (2.0, 3.0),
    (3.0, 4.0),
    (4.0, 6.0),
    (5.0, 8.0),
    (6.0, 10.0),
    (7.0, 15.0),
    (8.0, 40.0),
    (9.0, 16.0),
    (10.0, 20.0),
    (20.0, 30.0),
    (200.0, 300.0),
    (250.0, 50.0),
    (275.0, 15.0),
    (300.0, 55.0),
    (400.0, 10.0),
    (1000.0, 5.0),
];

const PAIRS_8: &[(f64, f64)] = &[
    (2.0, 3.0),
    (3.0, 4.0),
    (4.0, 6.0),
    (5.0, 8.0),
    (6.0, 10.0),
    (7.0, 15.0),
    (8.0, 40.0),
    (9.0, 16.0),
];

const PAIRS_ES: &[(f64, f64)] =
    &[(2.0, 3.0), (3.0, 4.0), (4.0, 6.0), (7.0, 15.0), (8.0, 40.0)];

const BETAS_10: &[f64] = &[0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50];
const BETAS_7: &[f64] = &[0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50];
const BETAS_6: &[f64] = &[0.25, 0.30, 0.35, 0.40, 0.45, 0.50];

#[rustfmt::skip]
const Q_001: &[&[f64]] = &[
    &[4.64839, 3.78507, 3.17184, 3.91919, 2.78228, 2.62175, 2.44602, 2.59524,
      2.53963, 2.46079, 2.33916, 2.40018, 2.58957, 2.39322, 2.7432, 3.3202],
    &[4.7586, 3.82348, 3.20124, 2.94213, 2.80092, 2.64116, 2.46906, 2.60704,
      2.55132, 2.46432, 2.33947, 2.39709, 2.57661, 2.39036, 2.72242, 3.27401],
    &[4.87115, 3.86216, 3.23086, 2.9652, 2.81965, 2.6607, 2.49235, 2.61887,
      2.56304, 2.46785, 2.33978, 2.39399, 2.56359, 2.38750, 2.7014, 3.22632],
    &[4.98587, 3.9011, 3.26066, 2.98846, 2.83846, 2.68035, 2.51586, 2.63073,
      2.5748, 2.47139, 2.3401, 2.3909, 2.55051, 2.38464, 2.68019, 3.17715],
    &[5.10258, 3.94025, 3.29063, 3.01177, 2.85734, 2.70009, 2.53957, 2.64261,
      2.58658, 2.47492, 2.34041, 2.3878, 2.53738, 2.38178, 2.6588, 3.12651],
    &[5.22106, 3.97962, 3.32075, 3.03518, 2.87629, 2.71991, 2.56344, 2.65452,
      2.59838, 2.47846, 2.34073, 2.38471, 2.52422, 2.37892, 2.63726, 3.07446],
    &[5.34113, 4.01917, 3.35100, 3.05866, 2.89528, 2.7398, 2.58744, 2.66644,
      2.6102, 2.482, 2.34104, 2.38161, 2.51102, 2.37605, 2.61559, 3.02112],
    &[5.46259, 4.05888, 3.38136, 3.08221, 2.91432, 2.75974, 2.6115, 2.67838,
      2.62204, 2.48553, 2.34136, 2.37851, 2.49779, 2.37319, 2.59382, 2.96663],
    &[5.58523, 4.09873, 3.41180, 3.10502, 2.93339, 2.77972, 2.6357, 2.69033,
      2.63389, 2.48907, 2.34167, 2.37541, 2.48455, 2.37033, 2.57198, 2.91121],
    &[5.70886, 4.13870, 3.44231, 3.12946, 2.95248, 2.79972, 2.65989, 2.70228,
      2.64574, 2.49261, 2.34199, 2.37232, 2.4713, 2.36746, 2.55009, 2.85513],
];

#[rustfmt::skip]
const Q_0001: &[&[f64]] = &[
    &[12.8878, 7.84891, 5.66393, 4.82769, 4.39245, 3.98902, 3.62286, 3.82625],
    &[13.5577, 8.01412, 5.77451, 4.90665, 4.45334, 4.05064, 3.69896, 3.86013],
    &[14.2205, 8.17734, 5.88317, 4.98414, 4.51241, 4.11084, 3.77242, 3.89346],
    &[14.874, 8.33840, 5.98975, 5.06004, 4.57030, 4.16948, 3.84285, 3.92621],
    &[15.5168, 8.49717, 6.09412, 5.13427, 4.62694, 4.22648, 3.91007, 3.95838],
    &[16.1480, 8.65357, 6.19624, 5.20677, 4.68229, 4.28179, 3.97400, 3.98993],
    &[16.7671, 8.80753, 6.29604, 5.27752, 4.73634, 4.33537, 3.03470, 4.02087],
];

#[rustfmt::skip]
const ES_001: &[&[f64]] = &[
    &[6.36587, 1.29375, 0.243125, 0.00290856, 0.000681262],
    &[7.01881, 1.41000, 0.279435, 0.00341273, 0.000793844],
    &[7.64714, 1.52252, 0.31424, 0.00389277, 0.0008997532],
    &[8.25196, 1.63141, 0.34759, 0.0043495, 0.000997532],
    &[8.83444, 1.73679, 0.379538, 0.00478369, 0.00108926],
    &[9.3957, 1.83877, 0.410131, 0.00519619, 0.00117468],
];

#[rustfmt::skip]
const ES_0001: &[&[f64]] = &[
    &[20.8961, 3.03289, 0.576689, 0.00661826, 0.00164597],
    &[23.1642, 3.32289, 0.666054, 0.0074621, 0.00180969],
    &[25.2707, 3.58757, 0.716427, 0.008196, 0.00194229],
    &[27.239, 3.83719, 0.776394, 0.00883632, 0.00205071],
    &[29.0885, 4.07077, 0.830853, 0.00939711, 0.00214048],
    &[30.8351, 4.28993, 0.880508, 0.00989055, 0.00221577],
];

/// The four embedded reference tables. The published 100%-confidence
/// (α = 0) quantile table is deliberately absent: the defining tail equation
/// has no finite solution at α = 0, so it cannot be a reproduction target.
pub fn builtin_tables() -> Vec<TableSpec> {
    vec![
        TableSpec {
            name: "quantile-alpha-0.01",
            alpha: 0.01,
            kind: TableKind::Quantile,
            nu_pairs: PAIRS_16,
            betas: BETAS_10,
            expected: Q_001,
            // beta = 0.05, pair (5,8): printed 3.91919, breaks column
            // monotonicity; consistent with a typo for 2.91919
            flagged: &[(0, 3)],
            authoritative: true,
        },
        TableSpec {
            name: "quantile-alpha-0.001",
            alpha: 0.001,
            kind: TableKind::Quantile,
            nu_pairs: PAIRS_8,
            betas: BETAS_7,
            expected: Q_0001,
            // beta = 0.50, pair (8,40): printed 3.03470 below its 3.974
            // predecessor; consistent with a typo for 4.03470
            flagged: &[(6, 6)],
            authoritative: true,
        },
        TableSpec {
            name: "es-multiplier-alpha-0.01",
            alpha: 0.01,
            kind: TableKind::EsMultiplier,
            nu_pairs: PAIRS_ES,
            betas: BETAS_6,
            expected: ES_001,
            flagged: &[],
            authoritative: false,
        },
        TableSpec {
            name: "es-multiplier-alpha-0.001",
            alpha: 0.001,
            kind: TableKind::EsMultiplier,
            nu_pairs: PAIRS_ES,
            betas: BETAS_6,
            expected: ES_0001,
            flagged: &[],
            authoritative: false,
        },
    ]
}

/// Run every builtin table.
pub fn reproduce_builtin() -> Vec<TableReport> {
    builtin_tables().iter().map(reproduce_table).collect()
}

/// Human-readable comparison summary across `reports`, including the
/// measured factor between the published ES coefficient and the validated
/// tail average.
pub fn discrepancy_report(reports: &[TableReport]) -> String {
    let mut out = String::new();
    out.push_str("Reference-table reproduction report\n");
    out.push_str("===================================\n\n");
    for r in reports {
        let (required, flagged, non_auth) = r.counts();
        out.push_str(&format!(
            "table {} (alpha = {}): {} match-required, {} flagged-misprint, {} non-authoritative\n",
            r.name, r.alpha, required, flagged, non_auth
        ));
        let failures: Vec<&CellReport> = r
            .cells
            .iter()
            .filter(|c| c.status == CellStatus::MatchRequired && !c.pass)
            .collect();
        if failures.is_empty() && required > 0 {
            out.push_str(&format!(
                "  all {required} match-required cells reproduce within {QUANTILE_TOLERANCE:.0e} absolute\n"
            ));
        }
        for c in failures {
            out.push_str(&format!(
                "  FAIL beta={} ({},{}): printed {} vs computed {} (abs diff {:.2e}){}\n",
                c.beta,
                c.nu1,
                c.nu2,
                c.expected,
                c.computed,
                c.abs_diff,
                c.error.as_deref().map(|e| format!(" [{e}]")).unwrap_or_default()
            ));
        }
        for c in r.cells.iter().filter(|c| c.status == CellStatus::FlaggedMisprint) {
            out.push_str(&format!(
                "  flagged misprint beta={} ({},{}): printed {} vs computed {:.6}; deviation {}\n",
                c.beta,
                c.nu1,
                c.nu2,
                c.expected,
                c.computed,
                if c.pass { "NOT confirmed" } else { "confirmed" }
            ));
        }
        if r.kind == TableKind::EsMultiplier {
            let worst = r
                .cells
                .iter()
                .map(|c| c.rel_diff)
                .fold(0.0f64, f64::max);
            out.push_str(&format!(
                "  non-authoritative: printed values compared against the validated ES \
                 multiplier, max relative deviation {worst:.2e}; the printed cells are \
                 inconsistent with any tail-average coefficient (they fall orders of \
                 magnitude below the matching VaR quantiles) and are reported only\n"
            ));
        }
        out.push('\n');
    }

    out.push_str("ES coefficient conventions\n");
    out.push_str("--------------------------\n");
    out.push_str(
        "The published closed-form ES coefficient is exactly twice the validated \
         tail average E[loss | loss > VaR] obtained by direct integration and \
         confirmed by simulation. The engine defaults to the validated value; \
         the doubled form stays available as the as-published convention.\n\n",
    );
    for (nu, alpha) in [(3.0, 0.05), (3.0, 0.01), (4.0, 0.01), (8.0, 0.01)] {
        let mix = [(1.0, GeneratorKind::StudentT { nu })];
        let q = solve_quantile(&mix, alpha, 1).expect("quantile").q_alpha;
        let validated =
            es_multiplier(&mix, q, alpha, 1, EsRoute::ClosedForm, EsConvention::Validated)
                .expect("multiplier")
                .value;
        let published =
            es_multiplier(&mix, q, alpha, 1, EsRoute::ClosedForm, EsConvention::AsPublished)
                .expect("multiplier")
                .value;
        out.push_str(&format!(
            "  nu={nu}, alpha={alpha}: validated {validated:.6}, as-published {published:.6}, ratio {:.1}\n",
            published / validated
        ));
    }
    out.push_str(
        "\nThe published 100%-confidence (alpha = 0) quantile table is excluded: \
         the tail equation has no finite solution at alpha = 0.\n",
    );
    out
}
