//! Schema, data ingest and design assembly.
//!
//! A dataset is split into three numeric blocks: sure columns `X0` (with an
//! implicit intercept in front), candidate variables `X`, and the level
//! indicators `Z = [Z_1 | ... | Z_p]`. Factors always use full indicator
//! coding, one column per level, so the full design is rank deficient.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Fit};

/// Name given to the implicit intercept column of `X0`.
pub const INTERCEPT: &str = "(intercept)";

/// A categorical predictor and its declared levels, in coding order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub name: String,
    pub levels: Vec<String>,
}

/// Roles of the data columns. The intercept is never listed; it is always
/// added as the first sure column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictorSchema {
    pub response: String,
    #[serde(default)]
    pub sure: Vec<String>,
    #[serde(default)]
    pub variables: Vec<String>,
    #[serde(default)]
    pub factors: Vec<FactorSpec>,
}

impl PredictorSchema {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let schema: PredictorSchema =
            toml::from_str(text).map_err(|e| Error::Schema(format!("cannot parse schema: {e}")))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("schema serializes to TOML")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Checks name distinctness and level counts.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        seen.insert(INTERCEPT.to_string());
        let names = std::iter::once(&self.response)
            .chain(&self.sure)
            .chain(&self.variables)
            .chain(self.factors.iter().map(|f| &f.name));
        for name in names {
            if name.trim().is_empty() {
                return Err(Error::Schema("empty column name".into()));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::Schema(format!("column `{name}` declared more than once")));
            }
        }
        for f in &self.factors {
            if f.levels.len() < 2 {
                return Err(Error::Schema(format!(
                    "factor `{}` declares {} level(s); at least 2 are required",
                    f.name,
                    f.levels.len()
                )));
            }
            let mut lv = HashSet::new();
            for l in &f.levels {
                if !lv.insert(l) {
                    return Err(Error::Schema(format!("factor `{}` repeats level `{l}`", f.name)));
                }
            }
        }
        Ok(())
    }

    /// Number of sure columns including the intercept.
    pub fn k0(&self) -> usize {
        self.sure.len() + 1
    }
}

/// Raw string cells keyed by header name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DataFrame {
    columns: BTreeMap<String, Vec<String>>,
    header: Vec<String>,
    n: usize,
}

impl DataFrame {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_column(&mut self, name: &str, cells: Vec<String>) -> Result<()> {
        if !self.header.is_empty() && cells.len() != self.n {
            return Err(Error::Schema(format!(
                "column `{name}` has {} rows, expected {}",
                cells.len(),
                self.n
            )));
        }
        if self.columns.contains_key(name) {
            return Err(Error::Schema(format!("duplicate header `{name}`")));
        }
        self.n = cells.len();
        self.header.push(name.to_string());
        self.columns.insert(name.to_string(), cells);
        Ok(())
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn column(&self, name: &str) -> Option<&[String]> {
        self.columns.get(name).map(|c| c.as_slice())
    }

    pub fn read_csv(path: &Path, delimiter: u8) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(file, delimiter)
    }

    pub fn from_reader<R: std::io::Read>(reader: R, delimiter: u8) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Schema(format!("cannot read header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Schema(format!("row {}: {e}", row + 2)))?;
            for (col, cell) in record.iter().enumerate() {
                cells[col].push(cell.to_string());
            }
        }
        let mut frame = DataFrame::new();
        for (name, col) in header.into_iter().zip(cells) {
            frame.push_column(&name, col)?;
        }
        Ok(frame)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W, delimiter: u8) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
        let io = |e: csv::Error| Error::Config(format!("cannot write csv: {e}"));
        wtr.write_record(&self.header).map_err(io)?;
        for i in 0..self.n {
            let row: Vec<&str> = self.header.iter().map(|h| self.columns[h][i].as_str()).collect();
            wtr.write_record(&row).map_err(io)?;
        }
        wtr.flush().map_err(|e| Error::Config(format!("cannot write csv: {e}")))?;
        Ok(())
    }
}

/// Location of one factor's indicator columns inside `Z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorBlock {
    pub name: String,
    pub levels: Vec<String>,
    pub offset: usize,
}

impl FactorBlock {
    pub fn width(&self) -> usize {
        self.levels.len()
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.levels.len()
    }
}

/// Immutable numeric blocks of a dataset.
#[derive(Debug, Clone)]
pub struct DesignAssembly {
    y: DVector<f64>,
    x0: DMatrix<f64>,
    x: DMatrix<f64>,
    z: DMatrix<f64>,
    sure_names: Vec<String>,
    variable_names: Vec<String>,
    factors: Vec<FactorBlock>,
    cell_counts: Vec<Vec<usize>>,
    sse_null: f64,
}

/// Reads the data file and assembles the design blocks described by `schema`.
pub fn ingest(data_path: &Path, schema: &PredictorSchema, delimiter: u8) -> Result<DesignAssembly> {
    let frame = DataFrame::read_csv(data_path, delimiter)?;
    DesignAssembly::from_frame(schema, &frame)
}

fn numeric_column(frame: &DataFrame, name: &str) -> Result<Vec<f64>> {
    let cells = frame
        .column(name)
        .ok_or_else(|| Error::Schema(format!("column `{name}` not found in data")))?;
    cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c.is_empty() {
                return Err(Error::Schema(format!("missing value in `{name}` at row {}", i + 1)));
            }
            match c.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Schema(format!(
                    "non-numeric or non-finite value `{c}` in `{name}` at row {}",
                    i + 1
                ))),
            }
        })
        .collect()
}

fn factor_codes(frame: &DataFrame, spec: &FactorSpec) -> Result<Vec<usize>> {
    let cells = frame
        .column(&spec.name)
        .ok_or_else(|| Error::Schema(format!("column `{}` not found in data", spec.name)))?;
    let index: BTreeMap<&str, usize> =
        spec.levels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c.is_empty() {
                return Err(Error::Schema(format!("missing value in `{}` at row {}", spec.name, i + 1)));
            }
            index.get(c.as_str()).copied().ok_or_else(|| {
                Error::Schema(format!(
                    "factor `{}` has undeclared level `{c}` at row {}",
                    spec.name,
                    i + 1
                ))
            })
        })
        .collect()
}

impl DesignAssembly {
    /// Builds the assembly from parsed cells, enforcing every data invariant.
    pub fn from_frame(schema: &PredictorSchema, frame: &DataFrame) -> Result<Self> {
        schema.validate()?;
        let n = frame.nrows();
        let y = numeric_column(frame, &schema.response)?;
        let sure = schema
            .sure
            .iter()
            .map(|s| numeric_column(frame, s))
            .collect::<Result<Vec<_>>>()?;
        let vars = schema
            .variables
            .iter()
            .map(|s| numeric_column(frame, s))
            .collect::<Result<Vec<_>>>()?;
        let codes = schema
            .factors
            .iter()
            .map(|f| factor_codes(frame, f).map(|c| (f.clone(), c)))
            .collect::<Result<Vec<_>>>()?;

        let x0 = DMatrix::from_fn(n, sure.len() + 1, |i, j| if j == 0 { 1.0 } else { sure[j - 1][i] });
        let x = DMatrix::from_fn(n, vars.len(), |i, j| vars[j][i]);
        let mut sure_names = vec![INTERCEPT.to_string()];
        sure_names.extend(schema.sure.iter().cloned());
        Self::from_blocks(
            DVector::from_vec(y),
            x0,
            sure_names,
            x,
            schema.variables.clone(),
            codes,
        )
    }

    /// Builds the assembly from numeric blocks and per-row level codes.
    /// `x0` must already contain the intercept column.
    pub fn from_blocks(
        y: DVector<f64>,
        x0: DMatrix<f64>,
        sure_names: Vec<String>,
        x: DMatrix<f64>,
        variable_names: Vec<String>,
        factors: Vec<(FactorSpec, Vec<usize>)>,
    ) -> Result<Self> {
        let n = y.len();
        if x0.nrows() != n || x.nrows() != n {
            return Err(Error::Usage("design blocks disagree on the number of rows".into()));
        }
        if x0.ncols() != sure_names.len() || x.ncols() != variable_names.len() {
            return Err(Error::Usage("column names do not match block widths".into()));
        }
        let l: usize = factors.iter().map(|(f, _)| f.levels.len()).sum();
        let mut z = DMatrix::zeros(n, l);
        let mut blocks = Vec::with_capacity(factors.len());
        let mut cell_counts = Vec::with_capacity(factors.len());
        let mut offset = 0;
        for (spec, codes) in factors {
            if spec.levels.len() < 2 {
                return Err(Error::Schema(format!("factor `{}` needs at least 2 levels", spec.name)));
            }
            if codes.len() != n {
                return Err(Error::Usage(format!("factor `{}` has the wrong number of rows", spec.name)));
            }
            let mut counts = vec![0usize; spec.levels.len()];
            for (i, &c) in codes.iter().enumerate() {
                if c >= spec.levels.len() {
                    return Err(Error::Schema(format!("factor `{}` code {c} out of range", spec.name)));
                }
                counts[c] += 1;
                z[(i, offset + c)] = 1.0;
            }
            if let Some(j) = counts.iter().position(|&c| c == 0) {
                return Err(Error::EmptyCell {
                    factor: spec.name.clone(),
                    level: spec.levels[j].clone(),
                });
            }
            blocks.push(FactorBlock {
                name: spec.name,
                levels: spec.levels,
                offset,
            });
            cell_counts.push(counts);
            offset += blocks.last().map(FactorBlock::width).unwrap_or(0);
        }

        let required = x0.ncols() + x.ncols() + 1;
        if n < required {
            return Err(Error::InsufficientData { n, required });
        }
        let r0 = linalg::rank(&x0);
        if r0 != x0.ncols() {
            return Err(Error::DegenerateData(format!(
                "sure columns have rank {r0} but there are {} of them",
                x0.ncols()
            )));
        }
        let sse_null = linalg::least_squares(&x0, &y).sse;
        Ok(Self {
            y,
            x0,
            x,
            z,
            sure_names,
            variable_names,
            factors: blocks,
            cell_counts,
            sse_null,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of sure columns (intercept included).
    pub fn k0(&self) -> usize {
        self.x0.ncols()
    }

    /// Number of candidate numeric variables.
    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    /// Number of factors.
    pub fn p(&self) -> usize {
        self.factors.len()
    }

    /// Total number of level columns.
    pub fn l(&self) -> usize {
        self.z.ncols()
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn x0(&self) -> &DMatrix<f64> {
        &self.x0
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn sure_names(&self) -> &[String] {
        &self.sure_names
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn factors(&self) -> &[FactorBlock] {
        &self.factors
    }

    pub fn cell_counts(&self) -> &[Vec<usize>] {
        &self.cell_counts
    }

    pub fn level_counts(&self) -> Vec<usize> {
        self.factors.iter().map(FactorBlock::width).collect()
    }

    pub fn sse_null(&self) -> f64 {
        self.sse_null
    }

    pub fn factor_index(&self, name: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| Error::Usage(format!("unknown factor `{name}`")))
    }

    /// Copy of this assembly where one factor keeps only the given level
    /// columns. Used to build full-rank (baseline) codings for comparison;
    /// the result no longer satisfies the one-level-per-row invariant.
    pub fn with_factor_columns(&self, factor: usize, keep: &[usize]) -> Result<Self> {
        let block = self
            .factors
            .get(factor)
            .ok_or_else(|| Error::Usage(format!("factor index {factor} out of range")))?;
        if keep.is_empty() || keep.iter().any(|&j| j >= block.width()) {
            return Err(Error::Usage("invalid level selection".into()));
        }
        let mut cols = Vec::new();
        let mut factors = Vec::new();
        let mut counts = Vec::new();
        for (h, b) in self.factors.iter().enumerate() {
            let offset = cols.len();
            let levels: Vec<usize> = if h == factor { keep.to_vec() } else { (0..b.width()).collect() };
            cols.extend(levels.iter().map(|&j| b.offset + j));
            factors.push(FactorBlock {
                name: b.name.clone(),
                levels: levels.iter().map(|&j| b.levels[j].clone()).collect(),
                offset,
            });
            counts.push(levels.iter().map(|&j| self.cell_counts[h][j]).collect());
        }
        Ok(Self {
            z: self.z.select_columns(cols.iter()),
            factors,
            cell_counts: counts,
            ..self.clone()
        })
    }

    /// Rank of the full design `[X0 | X | Z]`.
    pub fn full_rank(&self) -> usize {
        linalg::rank(&linalg::hstack(&[&self.x0, &self.x, &self.z]))
    }
}

/// Inclusion indicators over the `k` variables and `L` level columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelGamma {
    pub variable_bits: Vec<bool>,
    pub level_bits: Vec<bool>,
}

impl ModelGamma {
    pub fn null(k: usize, l: usize) -> Self {
        Self {
            variable_bits: vec![false; k],
            level_bits: vec![false; l],
        }
    }

    pub fn full(k: usize, l: usize) -> Self {
        Self {
            variable_bits: vec![true; k],
            level_bits: vec![true; l],
        }
    }

    /// Model number `index` in lexicographic order: bit 0 of the string
    /// (the first variable) is the most significant.
    pub fn from_index(index: u64, k: usize, l: usize) -> Self {
        let width = k + l;
        let bit = |j: usize| (index >> (width - 1 - j)) & 1 == 1;
        Self {
            variable_bits: (0..k).map(bit).collect(),
            level_bits: (k..width).map(bit).collect(),
        }
    }

    pub fn index(&self) -> u64 {
        self.variable_bits
            .iter()
            .chain(&self.level_bits)
            .fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn is_null(&self) -> bool {
        !self.variable_bits.iter().chain(&self.level_bits).any(|&b| b)
    }

    pub fn size(&self) -> usize {
        self.variable_bits.iter().chain(&self.level_bits).filter(|&&b| b).count()
    }

    pub fn active_variables(&self) -> usize {
        self.variable_bits.iter().filter(|&&b| b).count()
    }

    /// Number of active levels of the factor occupying `block`.
    pub fn active_levels(&self, block: &FactorBlock) -> usize {
        self.level_bits[block.range()].iter().filter(|&&b| b).count()
    }

    /// Bit string, variables then levels, e.g. `10|011`.
    pub fn label(&self) -> String {
        let bits = |v: &[bool]| v.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
        format!("{}|{}", bits(&self.variable_bits), bits(&self.level_bits))
    }

    fn check(&self, assembly: &DesignAssembly) -> Result<()> {
        if self.variable_bits.len() != assembly.k() || self.level_bits.len() != assembly.l() {
            return Err(Error::Usage(format!(
                "model has dimensions ({}, {}) but the design has (k, L) = ({}, {})",
                self.variable_bits.len(),
                self.level_bits.len(),
                assembly.k(),
                assembly.l()
            )));
        }
        Ok(())
    }
}

/// `[X0 | X_γ | Z_γ]` with columns in schema order.
pub fn model_design(assembly: &DesignAssembly, gamma: &ModelGamma) -> Result<DMatrix<f64>> {
    gamma.check(assembly)?;
    let vars: Vec<usize> = (0..assembly.k()).filter(|&j| gamma.variable_bits[j]).collect();
    let levels: Vec<usize> = (0..assembly.l()).filter(|&j| gamma.level_bits[j]).collect();
    let n = assembly.n();
    let k0 = assembly.k0();
    let mut m = DMatrix::zeros(n, k0 + vars.len() + levels.len());
    m.view_mut((0, 0), (n, k0)).copy_from(&assembly.x0);
    for (c, &j) in vars.iter().enumerate() {
        m.set_column(k0 + c, &assembly.x.column(j));
    }
    for (c, &j) in levels.iter().enumerate() {
        m.set_column(k0 + vars.len() + c, &assembly.z.column(j));
    }
    Ok(m)
}

/// Rank of the model design and the residual sum of squares of its fit.
pub fn rank_and_sse(assembly: &DesignAssembly, gamma: &ModelGamma) -> Result<Fit> {
    if gamma.is_null() {
        gamma.check(assembly)?;
        return Ok(Fit {
            rank: assembly.k0(),
            sse: assembly.sse_null,
        });
    }
    let m = model_design(assembly, gamma)?;
    Ok(linalg::least_squares(&m, &assembly.y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(cols: &[(&str, &[&str])]) -> DataFrame {
        let mut f = DataFrame::new();
        for (name, cells) in cols {
            f.push_column(name, cells.iter().map(|s| s.to_string()).collect()).unwrap();
        }
        f
    }

    fn two_level_schema() -> PredictorSchema {
        PredictorSchema {
            response: "y".into(),
            sure: vec![],
            variables: vec![],
            factors: vec![FactorSpec {
                name: "a".into(),
                levels: vec!["1".into(), "2".into()],
            }],
        }
    }

    #[test]
    fn two_level_factor_with_two_observations_each() {
        let f = frame(&[("y", &["1.0", "1.5", "3.0", "2.5"]), ("a", &["1", "1", "2", "2"])]);
        let d = DesignAssembly::from_frame(&two_level_schema(), &f).unwrap();
        assert_eq!(d.n(), 4);
        assert_eq!(d.k0(), 1);
        assert_eq!(d.l(), 2);
        let expected = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(d.z(), &expected);
        assert_eq!(d.cell_counts(), &[vec![2, 2]]);
    }

    #[test]
    fn undeclared_level_is_a_schema_error() {
        let f = frame(&[("y", &["1", "2", "3", "4"]), ("a", &["1", "1", "3", "2"])]);
        let err = DesignAssembly::from_frame(&two_level_schema(), &f).unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err}");
    }

    #[test]
    fn missing_column_is_a_schema_error() {
        let f = frame(&[("y", &["1", "2", "3", "4"])]);
        let err = DesignAssembly::from_frame(&two_level_schema(), &f).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn empty_level_is_reported() {
        let mut s = two_level_schema();
        s.factors[0].levels.push("3".into());
        let f = frame(&[("y", &["1", "2", "3", "4"]), ("a", &["1", "1", "2", "2"])]);
        let err = DesignAssembly::from_frame(&s, &f).unwrap_err();
        assert!(matches!(err, Error::EmptyCell { ref level, .. } if level == "3"));
    }

    #[test]
    fn too_few_rows() {
        let mut s = two_level_schema();
        s.factors.clear();
        s.sure = vec!["s".into()];
        s.variables = vec!["v".into()];
        let f = frame(&[("y", &["1", "2", "3"]), ("s", &["1", "5", "2"]), ("v", &["0", "1", "1"])]);
        let err = DesignAssembly::from_frame(&s, &f).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { n: 3, required: 4 }));
    }

    #[test]
    fn missing_and_non_finite_cells_are_rejected() {
        let f = frame(&[("y", &["1", "", "3", "4"]), ("a", &["1", "1", "2", "2"])]);
        assert!(matches!(
            DesignAssembly::from_frame(&two_level_schema(), &f),
            Err(Error::Schema(_))
        ));
        let f = frame(&[("y", &["1", "inf", "3", "4"]), ("a", &["1", "1", "2", "2"])]);
        assert!(matches!(
            DesignAssembly::from_frame(&two_level_schema(), &f),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn schema_rejects_duplicates_and_single_level_factors() {
        let mut s = two_level_schema();
        s.variables = vec!["y".into()];
        assert!(s.validate().is_err());
        let mut s = two_level_schema();
        s.factors[0].levels.truncate(1);
        assert!(s.validate().is_err());
        let mut s = two_level_schema();
        s.factors[0].levels = vec!["x".into(), "x".into()];
        assert!(s.validate().is_err());
    }

    #[test]
    fn schema_round_trips_through_toml() {
        let s = PredictorSchema {
            response: "bmi".into(),
            sure: vec!["w".into(), "h".into()],
            variables: vec!["screens".into()],
            factors: vec![
                FactorSpec { name: "sport".into(), levels: vec!["a".into(), "b c".into(), "\"q\"".into()] },
                FactorSpec { name: "food".into(), levels: vec!["1".into(), "2".into()] },
            ],
        };
        let text = s.to_toml_string();
        assert_eq!(PredictorSchema::from_toml_str(&text).unwrap(), s);
    }

    #[test]
    fn gamma_index_is_lexicographic() {
        let g = ModelGamma::from_index(0b101, 1, 2);
        assert_eq!(g.variable_bits, vec![true]);
        assert_eq!(g.level_bits, vec![false, true]);
        assert_eq!(g.index(), 0b101);
        assert_eq!(g.label(), "1|01");
    }

    #[test]
    fn model_design_selects_columns() {
        let f = frame(&[("y", &["1.0", "1.5", "3.0", "2.5"]), ("a", &["1", "1", "2", "2"])]);
        let d = DesignAssembly::from_frame(&two_level_schema(), &f).unwrap();
        assert_eq!(model_design(&d, &ModelGamma::null(0, 2)).unwrap(), *d.x0());
        let m = model_design(&d, &ModelGamma::from_index(0b01, 0, 2)).unwrap();
        assert_eq!(m.ncols(), 2);
        assert_eq!(m.column(1), d.z().column(1));
        assert_eq!(model_design(&d, &ModelGamma::full(0, 2)).unwrap().ncols(), 3);
        assert!(matches!(model_design(&d, &ModelGamma::null(1, 2)), Err(Error::Usage(_))));
    }

    #[test]
    fn full_indicator_coding_drops_one_rank() {
        let f = frame(&[
            ("y", &["1", "2", "3", "4", "5", "7"]),
            ("a", &["1", "2", "3", "1", "2", "3"]),
        ]);
        let mut s = two_level_schema();
        s.factors[0].levels = vec!["1".into(), "2".into(), "3".into()];
        let d = DesignAssembly::from_frame(&s, &f).unwrap();
        let full = rank_and_sse(&d, &ModelGamma::full(0, 3)).unwrap();
        assert_eq!(full.rank, d.k0() + 3 - 1);
        let two = rank_and_sse(&d, &ModelGamma::from_index(0b011, 0, 3)).unwrap();
        assert_eq!(two.rank, full.rank);
        assert!((two.sse - full.sse).abs() <= 1e-12 * full.sse.max(1.0));
        let null = rank_and_sse(&d, &ModelGamma::null(0, 3)).unwrap();
        assert_eq!(null.rank, 1);
        assert_eq!(null.sse, d.sse_null());
    }
}
