//! Embedded reference values (see `data/reference.toml`).

use std::sync::OnceLock;

use serde::Deserialize;

const RAW: &str = include_str!("../data/reference.toml");

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Row {
    pub q: usize,
    pub rho1_00: f64,
    pub alpha0: f64,
    pub rho1_alpha0: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Minimum {
    pub alpha0: f64,
    pub s0: f64,
    pub s0_rounded: f64,
    pub s0_plot: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kappa1 {
    pub l: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub schema: String,
    pub table1: Vec<Table1Row>,
    pub minimum: Minimum,
    pub kappa1: Vec<Kappa1>,
}

impl Reference {
    pub fn table1_row(&self, q: usize) -> Option<&Table1Row> {
        self.table1.iter().find(|r| r.q == q)
    }

    pub fn kappa1(&self, l: usize) -> Option<f64> {
        self.kappa1.iter().find(|k| k.l == l).map(|k| k.value)
    }
}

pub fn reference() -> &'static Reference {
    static REF: OnceLock<Reference> = OnceLock::new();
    REF.get_or_init(|| toml::from_str(RAW).expect("embedded reference.toml is valid"))
}
