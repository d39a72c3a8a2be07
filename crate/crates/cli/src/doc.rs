//! JSON documents read and written by the CLI. Complex numbers are `[re, im]`
//! pairs, series terms are `[m, n, re, im]` for `c·x^m yⁿ`.

use std::collections::BTreeMap;

use saddlenode::algebra::{BiSeries, CoeffTable, Complex64, Poly1};
use saddlenode::geometry::FormalClass;
use saddlenode::leaf::{DulacField, Unit};
use saddlenode::normalform::NormalFormData;
use serde::{Deserialize, Serialize};

use crate::Failure;

pub type Pair = [f64; 2];
pub type Term = (u32, u32, f64, f64);

/// Rounds to 15 significant digits so that output is stable and readable.
pub fn round15(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.14e}").parse().unwrap_or(v)
}

pub fn pair(c: Complex64) -> Pair {
    [round15(c.re), round15(c.im)]
}

fn complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn series(terms: &[Term], what: &str) -> Result<BiSeries, Failure> {
    let mut s = BiSeries::new();
    for (i, &(m, n, re, im)) in terms.iter().enumerate() {
        if !(re.is_finite() && im.is_finite()) {
            return Err(Failure::Validation(format!("{what}[{i}]: coefficient must be finite")));
        }
        s.add_term(m, n, Complex64::new(re, im));
    }
    Ok(s)
}

fn terms(s: &BiSeries) -> Vec<Term> {
    let mut out: Vec<Term> = s
        .terms()
        .map(|(m, n, c)| (m, n, round15(c.re), round15(c.im)))
        .collect();
    out.sort_by_key(|t| (t.1, t.0));
    out
}

/// `U·(x^{k+1}∂x + y(1 + μx^k + xR)∂y)`; the unit is either the series `U`
/// or the normal-form pair `P`, `G` with `U = P/(1 + xPG)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDoc {
    pub k: u32,
    pub mu: Pair,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<Term>>,
    #[serde(rename = "R", default)]
    pub r: Vec<Term>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Pair>>,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<Term>>,
}

impl FieldDoc {
    pub fn to_field(&self) -> Result<DulacField, Failure> {
        let mu = complex(self.mu);
        let r = series(&self.r, "R")?;
        match (&self.u, &self.p, &self.g) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(Failure::Validation(
                "U: give either U or the pair P, G, not both".into(),
            )),
            (u, None, None) => {
                let unit = match u {
                    Some(t) => Unit::Series(series(t, "U")?),
                    None => Unit::one(),
                };
                Ok(DulacField::new(self.k, mu, unit, r)?)
            }
            (None, p, g) => {
                let p = match p {
                    Some(c) => Poly1::new(c.iter().map(|&v| complex(v)).collect()),
                    None => Poly1::constant(Complex64::new(1.0, 0.0)),
                };
                let g = series(g.as_deref().unwrap_or(&[]), "G")?;
                if let Some((m, _, _)) = g.terms().find(|&(_, n, _)| n == 0) {
                    return Err(Failure::Validation(format!("G: G(x,0) must vanish, found term x^{m} y^0")));
                }
                let class = FormalClass::new(self.k, mu, p.clone())?;
                Ok(DulacField::with_class(class, Unit::NormalForm { p, g }, r)?)
            }
        }
    }

    pub fn from_normal_form(nf: &NormalFormData) -> Self {
        let p = (0..=nf.class.k as usize).map(|i| pair(nf.class.p.coeff(i))).collect();
        Self {
            k: nf.class.k,
            mu: pair(nf.class.mu),
            u: None,
            r: terms(&nf.r_series()),
            p: Some(p),
            g: Some(terms(&nf.g_series())),
        }
    }
}

/// Per-sector coefficient lists keyed by `j`; entry `i` is the coefficient of `h^{i+1}`.
pub type Table = BTreeMap<String, Vec<Pair>>;

pub fn table(t: &CoeffTable) -> Table {
    (0..t.k())
        .map(|j| (j.to_string(), (1..=t.degree()).map(|n| pair(t.get(j, n))).collect()))
        .collect()
}

pub fn real_table(t: &CoeffTable) -> BTreeMap<String, Vec<f64>> {
    (0..t.k())
        .map(|j| (j.to_string(), (1..=t.degree()).map(|n| round15(t.get(j, n).re)).collect()))
        .collect()
}

pub fn read_table(t: &Table, k: u32, what: &str) -> Result<CoeffTable, Failure> {
    let mut rows = Vec::with_capacity(k as usize);
    for j in 0..k {
        let row = t
            .get(&j.to_string())
            .ok_or_else(|| Failure::Validation(format!("{what}: missing sector \"{j}\"")))?;
        if row.is_empty() {
            return Err(Failure::Validation(format!("{what}.{j}: at least one coefficient is required")));
        }
        rows.push(row.iter().map(|&p| complex(p)).collect::<Vec<_>>());
    }
    if let Some(extra) = t.keys().find(|key| key.parse::<u32>().map_or(true, |j| j >= k)) {
        return Err(Failure::Validation(format!("{what}: unexpected sector key \"{extra}\" for k = {k}")));
    }
    CoeffTable::from_rows(rows).map_err(|e| Failure::Validation(format!("{what}: {e}")))
}

/// Orbital and temporal moduli of a field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModulusDoc {
    pub k: u32,
    pub mu: Pair,
    pub orbital: Table,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temporal: Option<Table>,
}

/// Coefficients `ψ_i` of `ψ(h) = Σ ψ_i h^{i+1}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomyDoc {
    pub psi: Vec<Pair>,
}

impl HolonomyDoc {
    pub fn coeffs(&self) -> Vec<Complex64> {
        self.psi.iter().map(|&p| complex(p)).collect()
    }
}

pub fn mu_of(doc: Pair) -> Complex64 {
    complex(doc)
}
