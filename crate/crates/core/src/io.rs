//! JSON file formats for potentials, Weyl tables, boundary data and the
//! dynamical inputs, plus the `a+bi` command-line notation.
//!
//! Matrices are stored as `{"re": [[...]], "im": [[...]]}` (row-major) and
//! complex scalars as `{"re": x, "im": y}`. Unknown keys are ignored, so
//! files may carry extra metadata such as the resolved configuration.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dirac::{DiracPotential, SystemKind};
use crate::dynamical::{ExplicitInverseData, ResponseKernel, TimeDomainPotential};
use crate::error::{invalid, Result};
use crate::evolution::{BoundaryData, Equation, Field2D};
use crate::weyl::{Convention, WeylSample, WeylTable};
use crate::{CMatrix64, Grid64, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<C64> for ComplexJson {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for C64 {
    fn from(z: ComplexJson) -> Self {
        C64::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix64) -> Self {
        let rows = |f: fn(&C64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect();
        Self { re: rows(|z| z.re), im: Some(rows(|z| z.im)) }
    }

    pub fn to_matrix(&self) -> Result<CMatrix64> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || self.re.iter().any(|r| r.len() != cols) {
            return Err(invalid("matrix rows must be non-empty and of equal length"));
        }
        if let Some(im) = &self.im {
            if im.len() != rows || im.iter().any(|r| r.len() != cols) {
                return Err(invalid("real and imaginary parts differ in shape"));
            }
        }
        Ok(CMatrix64::from_fn(rows, cols, |i, j| {
            C64::new(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
        }))
    }
}

fn matrices(v: &[MatrixJson]) -> Result<Vec<CMatrix64>> {
    v.iter().map(MatrixJson::to_matrix).collect()
}

fn to_json<V: Serialize>(v: &V) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| invalid(format!("serialization failed: {e}")))
}

fn from_json<V: DeserializeOwned>(s: &str) -> Result<V> {
    serde_json::from_str(s).map_err(|e| invalid(format!("malformed JSON: {e}")))
}

fn checked_grid(g: Grid64) -> Result<Grid64> {
    Grid64::new(g.x0, g.h, g.n)
}

/// Reads a file to a string, reporting the path on failure.
pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

/// Parses `a+bi` notation: `2`, `-1.5i`, `i`, `0+1i`, `1e-3-2i`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    t.parse::<C64>().map_err(|_| invalid(format!("cannot parse complex number {s:?}")))
}

pub fn format_complex(z: C64) -> String {
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Comma-separated list of complex numbers.
pub fn parse_complex_list(s: &str) -> Result<Vec<C64>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(parse_complex).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialFile {
    pub kind: SystemKind,
    pub m1: usize,
    pub m2: usize,
    pub grid: Grid64,
    #[serde(default)]
    pub v: Vec<MatrixJson>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<MatrixJson>>,
}

impl PotentialFile {
    pub fn from_potential(pot: &DiracPotential<f64>) -> Self {
        let field = pot.nwave_field();
        Self {
            kind: pot.kind(),
            m1: pot.m1(),
            m2: pot.m2(),
            grid: *pot.grid(),
            v: if field.is_some() { Vec::new() } else { pot.samples().iter().map(MatrixJson::from_matrix).collect() },
            d: field.map(|f| f.d.clone()),
            rho: field.map(|f| f.rho.iter().map(MatrixJson::from_matrix).collect()),
        }
    }

    pub fn to_potential(&self) -> Result<DiracPotential<f64>> {
        let grid = checked_grid(self.grid)?;
        match self.kind {
            SystemKind::NWave => {
                let d = self.d.clone().ok_or_else(|| invalid("nwave potential needs \"D\""))?;
                let rho = self.rho.as_deref().ok_or_else(|| invalid("nwave potential needs \"rho\""))?;
                DiracPotential::nwave(grid, d, matrices(rho)?)
            }
            kind => DiracPotential::new(kind, self.m1, self.m2, grid, matrices(&self.v)?),
        }
    }
}

pub fn potential_to_json(pot: &DiracPotential<f64>) -> Result<String> {
    to_json(&PotentialFile::from_potential(pot))
}

pub fn potential_from_json(s: &str) -> Result<DiracPotential<f64>> {
    from_json::<PotentialFile>(s)?.to_potential()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeylSampleJson {
    pub z: ComplexJson,
    pub phi: MatrixJson,
    #[serde(default)]
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeylTableFile {
    pub m1: usize,
    pub m2: usize,
    pub convention: Convention,
    #[serde(rename = "M", default)]
    pub offset: f64,
    pub samples: Vec<WeylSampleJson>,
}

impl WeylTableFile {
    pub fn from_table(table: &WeylTable<f64>) -> Self {
        Self {
            m1: table.m1,
            m2: table.m2,
            convention: table.convention,
            offset: table.offset,
            samples: table
                .samples
                .iter()
                .map(|s| WeylSampleJson { z: s.z.into(), phi: MatrixJson::from_matrix(&s.phi), residual: s.residual })
                .collect(),
        }
    }

    pub fn to_table(&self) -> Result<WeylTable<f64>> {
        let samples = self
            .samples
            .iter()
            .map(|s| Ok(WeylSample { z: s.z.into(), phi: s.phi.to_matrix()?, residual: s.residual }))
            .collect::<Result<_>>()?;
        WeylTable::new(self.m1, self.m2, self.convention, self.offset, samples)
    }
}

pub fn weyl_table_to_json(table: &WeylTable<f64>) -> Result<String> {
    to_json(&WeylTableFile::from_table(table))
}

pub fn weyl_table_from_json(s: &str) -> Result<WeylTable<f64>> {
    from_json::<WeylTableFile>(s)?.to_table()
}

/// A boundary channel: real samples for the sine-Gordon family, matrix
/// samples otherwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelJson {
    Real(Vec<f64>),
    Matrix(Vec<MatrixJson>),
    Scalar(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryFile {
    pub equation: Equation,
    pub t_grid: Grid64,
    pub channels: BTreeMap<String, ChannelJson>,
}

impl BoundaryFile {
    pub fn from_data(data: &BoundaryData<f64>) -> Self {
        let reals = |v: &[CMatrix64]| ChannelJson::Real(v.iter().map(|m| m[(0, 0)].re).collect());
        let mats = |v: &[CMatrix64]| ChannelJson::Matrix(v.iter().map(MatrixJson::from_matrix).collect());
        let mut channels = BTreeMap::new();
        match data.equation {
            Equation::Dnls | Equation::Fnls => {
                channels.insert("h2".into(), mats(&data.h2));
                channels.insert("h3".into(), mats(&data.h3));
            }
            Equation::Sge => {
                channels.insert("h2".into(), reals(&data.h2));
            }
            Equation::Csge => {
                channels.insert("h2".into(), reals(&data.h2));
                channels.insert("h3".into(), reals(&data.h3));
                channels.insert("h4".into(), ChannelJson::Scalar(data.h4.unwrap_or(0.0)));
                channels.insert("c".into(), ChannelJson::Scalar(data.c.unwrap_or(0.0)));
            }
            Equation::Nwave => {
                channels.insert("rho".into(), mats(&data.rho));
                channels.insert("d_hat".into(), ChannelJson::Real(data.d_hat.clone()));
            }
        }
        Self { equation: data.equation, t_grid: data.t_grid, channels }
    }

    fn channel(&self, name: &str) -> Result<&ChannelJson> {
        self.channels.get(name).ok_or_else(|| invalid(format!("boundary data lacks channel {name:?}")))
    }

    fn reals(&self, name: &str) -> Result<Vec<f64>> {
        match self.channel(name)? {
            ChannelJson::Real(v) => Ok(v.clone()),
            ChannelJson::Matrix(v) => v.iter().map(|m| Ok(m.to_matrix()?[(0, 0)].re)).collect(),
            ChannelJson::Scalar(_) => Err(invalid(format!("channel {name:?} must be a list"))),
        }
    }

    fn mats(&self, name: &str) -> Result<Vec<CMatrix64>> {
        match self.channel(name)? {
            ChannelJson::Matrix(v) => matrices(v),
            ChannelJson::Real(v) => Ok(v.iter().map(|&x| CMatrix64::from_element(1, 1, C64::new(x, 0.0))).collect()),
            ChannelJson::Scalar(_) => Err(invalid(format!("channel {name:?} must be a list"))),
        }
    }

    fn scalar(&self, name: &str) -> Result<f64> {
        match self.channel(name)? {
            ChannelJson::Scalar(x) => Ok(*x),
            _ => Err(invalid(format!("channel {name:?} must be a number"))),
        }
    }

    pub fn to_data(&self) -> Result<BoundaryData<f64>> {
        let t = checked_grid(self.t_grid)?;
        match self.equation {
            eq @ (Equation::Dnls | Equation::Fnls) => BoundaryData::nls(eq, t, self.mats("h2")?, self.mats("h3")?),
            Equation::Sge => BoundaryData::sge(t, &self.reals("h2")?),
            Equation::Csge => {
                BoundaryData::csge(t, &self.reals("h2")?, &self.reals("h3")?, self.scalar("h4")?, self.scalar("c")?)
            }
            Equation::Nwave => BoundaryData::nwave(t, self.reals("d_hat")?, self.mats("rho")?),
        }
    }
}

pub fn boundary_to_json(data: &BoundaryData<f64>) -> Result<String> {
    to_json(&BoundaryFile::from_data(data))
}

pub fn boundary_from_json(s: &str) -> Result<BoundaryData<f64>> {
    from_json::<BoundaryFile>(s)?.to_data()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResponseFile {
    pub t_grid: Grid64,
    pub r: Vec<ComplexJson>,
}

pub fn response_to_json(kernel: &ResponseKernel<f64>) -> Result<String> {
    to_json(&ResponseFile { t_grid: kernel.t_grid, r: kernel.r.iter().map(|&z| z.into()).collect() })
}

pub fn response_from_json(s: &str) -> Result<ResponseKernel<f64>> {
    let f: ResponseFile = from_json(s)?;
    ResponseKernel::new(checked_grid(f.t_grid)?, f.r.into_iter().map(C64::from).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplicitFile {
    pub n: usize,
    pub alpha: MatrixJson,
    pub theta1: Vec<ComplexJson>,
    pub theta2: Vec<ComplexJson>,
}

pub fn explicit_to_json(data: &ExplicitInverseData<f64>) -> Result<String> {
    let col = |m: &CMatrix64| m.iter().map(|&z| z.into()).collect();
    to_json(&ExplicitFile {
        n: data.n(),
        alpha: MatrixJson::from_matrix(&data.alpha),
        theta1: col(&data.theta1),
        theta2: col(&data.theta2),
    })
}

pub fn explicit_from_json(s: &str) -> Result<ExplicitInverseData<f64>> {
    let f: ExplicitFile = from_json(s)?;
    let alpha = f.alpha.to_matrix()?;
    if alpha.shape() != (f.n, f.n) || f.theta1.len() != f.n || f.theta2.len() != f.n {
        return Err(invalid("alpha must be n x n and theta1, theta2 of length n"));
    }
    let col = |v: Vec<ComplexJson>| v.into_iter().map(C64::from).collect();
    ExplicitInverseData::new(alpha, col(f.theta1), col(f.theta2))
}

/// Time-domain potential `{"grid", "p", "q"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeDomainFile {
    pub grid: Grid64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

pub fn time_domain_to_json(pot: &TimeDomainPotential<f64>) -> Result<String> {
    to_json(&TimeDomainFile { grid: pot.grid, p: pot.p.clone(), q: pot.q.clone() })
}

pub fn time_domain_from_json(s: &str) -> Result<TimeDomainPotential<f64>> {
    let f: TimeDomainFile = from_json(s)?;
    TimeDomainPotential::new(checked_grid(f.grid)?, f.p, f.q)
}

/// Field on a rectangle, `{"x_grid", "t_grid", "values"}` with
/// `values[it][ix]` a matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldFile {
    pub x_grid: Grid64,
    pub t_grid: Grid64,
    pub values: Vec<Vec<MatrixJson>>,
}

pub fn field_to_json(field: &Field2D<f64>) -> Result<String> {
    let values = field.values.iter().map(|row| row.iter().map(MatrixJson::from_matrix).collect()).collect();
    to_json(&FieldFile { x_grid: field.x_grid, t_grid: field.t_grid, values })
}

pub fn field_from_json(s: &str) -> Result<Field2D<f64>> {
    let f: FieldFile = from_json(s)?;
    let (xg, tg) = (checked_grid(f.x_grid)?, checked_grid(f.t_grid)?);
    if f.values.len() != tg.n || f.values.iter().any(|r| r.len() != xg.n) {
        return Err(invalid("field values must be t_grid.n rows of x_grid.n matrices"));
    }
    let values = f.values.iter().map(|row| matrices(row)).collect::<Result<_>>()?;
    Ok(Field2D { x_grid: xg, t_grid: tg, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn complex_notation() {
        assert_eq!(parse_complex("0+1i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-2.5").unwrap(), c(-2.5, 0.0));
        assert_eq!(parse_complex("1e-3-2i").unwrap(), c(1e-3, -2.0));
        assert_eq!(parse_complex(" 1 + 2i ").unwrap(), c(1.0, 2.0));
        assert!(parse_complex("1+").is_err());
        for z in [c(0.0, 1.0), c(-1.25, -3.0), c(1e-12, 0.0)] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
        assert_eq!(parse_complex_list("0+1i,1+1i, 2i").unwrap().len(), 3);
    }

    #[test]
    fn potential_round_trip_is_exact() {
        let grid = Grid64::new(0.0, 0.1, 11).unwrap();
        let pot = DiracPotential::from_fn(SystemKind::Skew, 1, 2, grid, |x| {
            CMatrix64::from_row_slice(1, 2, &[c(x.sin(), 0.3), c(-x, x * x)])
        })
        .unwrap();
        let back = potential_from_json(&potential_to_json(&pot).unwrap()).unwrap();
        assert_eq!(back, pot);
    }

    #[test]
    fn nwave_potential_round_trip() {
        let grid = Grid64::new(0.0, 0.5, 3).unwrap();
        let rho = CMatrix64::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.0, 0.0)]);
        let pot = DiracPotential::nwave(grid, vec![2.0, 1.0], vec![rho; 3]).unwrap();
        let json = potential_to_json(&pot).unwrap();
        assert!(json.contains("\"D\""));
        assert_eq!(potential_from_json(&json).unwrap(), pot);
    }

    #[test]
    fn parses_handwritten_potential() {
        let s = r#"{"kind": "sa", "m1": 1, "m2": 1, "grid": {"x0": 0, "h": 0.5, "n": 2},
                    "v": [{"re": [[0]], "im": [[0]]}, {"re": [[1]]}], "note": "ignored"}"#;
        let pot = potential_from_json(s).unwrap();
        assert_eq!(pot.samples()[1][(0, 0)], c(1.0, 0.0));
        let bad = r#"{"kind": "sa", "m1": 1, "m2": 1, "grid": {"x0": 0, "h": -1, "n": 2}, "v": []}"#;
        assert!(potential_from_json(bad).unwrap_err().is_validation());
        assert!(potential_from_json("{").unwrap_err().is_validation());
    }

    #[test]
    fn weyl_table_round_trip() {
        let phi = CMatrix64::from_element(1, 1, c(0.1, -0.2));
        let samples = vec![WeylSample { z: c(0.0, 1.0), phi, residual: 1e-9 }];
        let table = WeylTable::new(1, 1, Convention::Phi, 0.0, samples).unwrap();
        let json = weyl_table_to_json(&table).unwrap();
        assert!(json.contains("\"M\""));
        assert_eq!(weyl_table_from_json(&json).unwrap(), table);
    }

    #[test]
    fn boundary_round_trips() {
        let t = Grid64::new(0.0, 0.25, 5).unwrap();
        let m = |x: f64| CMatrix64::from_element(1, 1, c(x, -x));
        let nls = BoundaryData::nls(Equation::Fnls, t, t.nodes().map(m).collect(), t.nodes().map(|x| m(2.0 * x)).collect()).unwrap();
        assert_eq!(boundary_from_json(&boundary_to_json(&nls).unwrap()).unwrap(), nls);
        let h2: Vec<f64> = t.nodes().map(|x| 0.5 + x).collect();
        let csge = BoundaryData::csge(t, &h2, &h2, 0.3, 1.0).unwrap();
        assert_eq!(boundary_from_json(&boundary_to_json(&csge).unwrap()).unwrap(), csge);
        let sge = r#"{"equation": "sge", "t_grid": {"x0": 0, "h": 0.5, "n": 3}, "channels": {"h2": [0, 0, 0]}}"#;
        assert_eq!(boundary_from_json(sge).unwrap().h2.len(), 3);
        let missing = r#"{"equation": "dnls", "t_grid": {"x0": 0, "h": 0.5, "n": 3}, "channels": {}}"#;
        assert!(boundary_from_json(missing).is_err());
    }

    #[test]
    fn dynamical_files_round_trip() {
        let t = Grid64::new(0.0, 0.1, 8).unwrap();
        let r = ResponseKernel::from_fn(t, |x| c(0.0, -0.5) * (-x / 2.0).exp()).unwrap();
        assert_eq!(response_from_json(&response_to_json(&r).unwrap()).unwrap(), r);

        let alpha = CMatrix64::from_element(1, 1, c(0.0, -0.5));
        let data = ExplicitInverseData::new(alpha, vec![c(0.5, 0.0)], vec![c(0.5, 0.0)]).unwrap();
        assert_eq!(explicit_from_json(&explicit_to_json(&data).unwrap()).unwrap(), data);
        let wrong = r#"{"n": 2, "alpha": {"re": [[0]], "im": [[-0.5]]}, "theta1": [{"re": 0.5}], "theta2": [{"re": 0.5}]}"#;
        assert!(explicit_from_json(wrong).is_err());

        let g = Grid64::new(0.0, 0.5, 3).unwrap();
        let td = TimeDomainPotential::new(g, vec![0.1, 0.2, 0.3], vec![0.0, -1.0, 2.5]).unwrap();
        assert_eq!(time_domain_from_json(&time_domain_to_json(&td).unwrap()).unwrap(), td);
    }

    #[test]
    fn field_round_trip() {
        let xg = Grid64::new(0.0, 0.5, 3).unwrap();
        let tg = Grid64::new(0.0, 0.25, 2).unwrap();
        let field = Field2D::from_fn(xg, tg, |x, t| CMatrix64::from_element(1, 1, c(x, t)));
        assert_eq!(field_from_json(&field_to_json(&field).unwrap()).unwrap(), field);
        let short = r#"{"x_grid": {"x0": 0, "h": 1, "n": 2}, "t_grid": {"x0": 0, "h": 1, "n": 2}, "values": [[]]}"#;
        assert!(field_from_json(short).is_err());
    }
}
