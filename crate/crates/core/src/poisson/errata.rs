//! Comparison of the transcribed closed forms with the map-derived kernels.
//! The map is the reference; every disagreement becomes an errata entry.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt::Write;

use super::kernel::{closed_form, gd1_closed_form, kernel, BracketKernel, DiagonalReading};
use super::PhaseWindow;
use crate::error::{Error, Result};
use crate::rmatrix::Splitting;
use crate::scalar::QScalar;
use crate::symbol::Basis;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Family {
    TLinear,
    TLinearIsotropic,
    TQuadratic,
    TQuadraticIsotropic,
    DLinear,
    DQuadratic,
    Gd1Quadratic,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::TLinear,
        Family::TLinearIsotropic,
        Family::TQuadratic,
        Family::TQuadraticIsotropic,
        Family::DLinear,
        Family::DQuadratic,
        Family::Gd1Quadratic,
    ];

    pub fn structure(self) -> u8 {
        match self {
            Family::TLinear | Family::TLinearIsotropic | Family::DLinear => 1,
            _ => 2,
        }
    }

    pub fn splitting(self) -> Splitting {
        let (sigma, basis) = match self {
            Family::TLinear | Family::TQuadratic => (-1, Basis::T),
            Family::TLinearIsotropic | Family::TQuadraticIsotropic => (0, Basis::T),
            _ => (-1, Basis::D),
        };
        Splitting { sigma, basis }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::TLinear => "linear T-basis kernels, sigma=-1",
            Family::TLinearIsotropic => "linear T-basis kernels, sigma=0",
            Family::TQuadratic => "quadratic T-basis kernels, sigma=-1",
            Family::TQuadraticIsotropic => "quadratic T-basis kernels, sigma=0",
            Family::DLinear => "linear D-basis kernels",
            Family::DQuadratic => "quadratic D-basis kernels",
            Family::Gd1Quadratic => "quadratic q-GD1 kernels",
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum Agreement {
    Equal,
    /// `derived = κ · printed`.
    Proportional(QScalar),
    Mismatch,
    NoFormula,
}

#[derive(Clone, PartialEq, Debug)]
pub struct Comparison {
    pub family: Family,
    pub window: PhaseWindow,
    pub i: i64,
    pub j: i64,
    pub agreement: Agreement,
    pub derived: BracketKernel,
    pub printed: Option<BracketKernel>,
}

impl Comparison {
    /// `κ` for a nonzero entry that agrees up to a constant.
    pub fn kappa(&self) -> Option<QScalar> {
        match &self.agreement {
            Agreement::Equal if !self.derived.is_zero() => Some(QScalar::one()),
            Agreement::Proportional(k) => Some(k.clone()),
            _ => None,
        }
    }
}

pub fn compare(family: Family, window: &PhaseWindow, i: i64, j: i64, reading: DiagonalReading) -> Result<Comparison> {
    let split = family.splitting();
    let derived = kernel(family.structure(), split, window, i, j)?;
    let printed = match family {
        Family::Gd1Quadratic => gd1_closed_form(i, j),
        _ => closed_form(family.structure(), split, window, i, j, reading),
    };
    let printed = match printed {
        Ok(p) => p,
        Err(Error::IndexOutOfFormula { .. }) => {
            return Ok(Comparison { family, window: *window, i, j, agreement: Agreement::NoFormula, derived, printed: None })
        }
        Err(e) => return Err(e),
    };
    let agreement = if derived == printed {
        Agreement::Equal
    } else {
        match derived.ratio_to(&printed) {
            Some(k) => Agreement::Proportional(k),
            None => Agreement::Mismatch,
        }
    };
    Ok(Comparison { family, window: *window, i, j, agreement, derived, printed: Some(printed) })
}

/// The diagonal reading under which the column-`n` formula matches the map
/// at `i = j = n` for more of the `n` in `1..=max_n`; `None` on a tie.
pub fn decide_diagonal_reading(max_n: i64) -> Result<Option<DiagonalReading>> {
    let mut score = [0usize; 2];
    for (k, r) in [DiagonalReading::Additive, DiagonalReading::Exclusive].into_iter().enumerate() {
        for n in 1..=max_n {
            if compare(Family::DLinear, &PhaseWindow::d(n), n, n, r)?.agreement == Agreement::Equal {
                score[k] += 1;
            }
        }
    }
    Ok(match score[0].cmp(&score[1]) {
        core::cmp::Ordering::Greater => Some(DiagonalReading::Additive),
        core::cmp::Ordering::Less => Some(DiagonalReading::Exclusive),
        core::cmp::Ordering::Equal => None,
    })
}

/// Windows and index ranges of the standard comparison.
pub fn standard_grid(family: Family) -> Vec<(PhaseWindow, Vec<(i64, i64)>)> {
    let square = |lo: i64, hi: i64| -> Vec<(i64, i64)> { (lo..=hi).flat_map(|i| (lo..=hi).map(move |j| (i, j))).collect() };
    match family {
        Family::TLinear => {
            let mut out = Vec::new();
            for n in 0..=3 {
                for m in -3..=1.min(n) {
                    out.push((PhaseWindow::t(n, m), square(m, n)));
                }
            }
            out
        }
        Family::TLinearIsotropic => {
            let mut out = Vec::new();
            for n in 0..=3 {
                for m in -3..=0 {
                    out.push((PhaseWindow::t(n, m), square(m, n)));
                }
            }
            out
        }
        Family::TQuadratic | Family::TQuadraticIsotropic => {
            vec![
                (PhaseWindow::t(1, 0), square(0, 1)),
                (PhaseWindow::t(2, -2), square(-2, 2)),
                (PhaseWindow::t(3, -1), square(-1, 3)),
            ]
        }
        Family::DLinear => (0..=2).map(|n| (PhaseWindow::d(n), square(0, n + 3))).collect(),
        Family::DQuadratic => vec![
            (PhaseWindow::gd(1), square(0, 1)),
            (PhaseWindow::d(1), square(0, 3)),
            (PhaseWindow::gd(2), square(0, 2)),
            (PhaseWindow::d(2), square(0, 3)),
        ],
        Family::Gd1Quadratic => vec![(PhaseWindow::gd(1), square(0, 1))],
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct FamilySummary {
    pub family: Family,
    pub entries: usize,
    pub equal: usize,
    pub proportional: usize,
    pub mismatched: usize,
    pub no_formula: usize,
    /// Distinct constants among nonzero agreeing entries.
    pub kappas: Vec<QScalar>,
}

impl FamilySummary {
    /// One constant relates every nonzero entry with a formula, and nothing mismatches.
    pub fn global_kappa(&self) -> Option<&QScalar> {
        (self.mismatched == 0 && self.kappas.len() == 1).then(|| &self.kappas[0])
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct ErrataReport {
    pub reading: DiagonalReading,
    pub comparisons: Vec<Comparison>,
}

impl ErrataReport {
    pub fn build(families: &[Family]) -> Result<Self> {
        let reading = decide_diagonal_reading(3)?.unwrap_or(DiagonalReading::Additive);
        let mut comparisons = Vec::new();
        for &f in families {
            for (w, idx) in standard_grid(f) {
                for (i, j) in idx {
                    comparisons.push(compare(f, &w, i, j, reading)?);
                }
            }
        }
        Ok(ErrataReport { reading, comparisons })
    }

    pub fn summary(&self, family: Family) -> FamilySummary {
        let mut s =
            FamilySummary { family, entries: 0, equal: 0, proportional: 0, mismatched: 0, no_formula: 0, kappas: Vec::new() };
        let mut seen = BTreeSet::new();
        for c in self.comparisons.iter().filter(|c| c.family == family) {
            s.entries += 1;
            match &c.agreement {
                Agreement::Equal => s.equal += 1,
                Agreement::Proportional(_) => s.proportional += 1,
                Agreement::Mismatch => s.mismatched += 1,
                Agreement::NoFormula => s.no_formula += 1,
            }
            if let Some(k) = c.kappa() {
                let key = format!("{k}");
                if seen.insert(key) {
                    s.kappas.push(k);
                }
            }
        }
        s
    }

    pub fn entries(&self) -> impl Iterator<Item = &Comparison> {
        self.comparisons.iter().filter(|c| !matches!(c.agreement, Agreement::Equal | Agreement::NoFormula))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# closed-form errata (reference: kernels derived from the maps)");
        let _ = writeln!(
            out,
            "diagonal term of the column-n linear D-basis formula: {}",
            match self.reading {
                DiagonalReading::Additive => "added to the i<=n branch at i=n",
                DiagonalReading::Exclusive => "replaces the i<=n branch at i=n",
            }
        );
        let mut families: Vec<Family> = self.comparisons.iter().map(|c| c.family).collect();
        families.dedup();
        for f in families {
            let s = self.summary(f);
            let ks: Vec<String> = s.kappas.iter().map(|k| format!("{k}")).collect();
            let _ = writeln!(
                out,
                "{}: {} entries, {} equal, {} proportional, {} mismatched, {} without formula, kappa {{{}}}",
                f.name(),
                s.entries,
                s.equal,
                s.proportional,
                s.mismatched,
                s.no_formula,
                ks.join(", ")
            );
        }
        for c in self.entries() {
            let w = &c.window;
            let win = match (w.hi, w.lo) {
                (Some(h), Some(l)) => format!("({h},{l})"),
                (Some(h), None) => format!("(n={h})"),
                _ => format!("{w:?}"),
            };
            let _ = writeln!(out, "- {} window {} entry ({},{})", c.family.name(), win, c.i, c.j);
            match &c.agreement {
                Agreement::Proportional(k) => {
                    let _ = writeln!(out, "  derived = ({k}) * printed");
                }
                _ => {
                    let _ = writeln!(out, "  derived: {}", c.derived);
                    if let Some(p) = &c.printed {
                        let _ = writeln!(out, "  printed: {p}");
                        let _ = writeln!(out, "  difference: {}", c.derived.sub(p));
                    }
                }
            }
        }
        out
    }
}
