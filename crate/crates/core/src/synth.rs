//! Seeded synthetic datasets shaped like the studies the method targets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::design::{DataFrame, DesignAssembly, FactorSpec, PredictorSchema};
use crate::error::{Error, Result};

/// A generated dataset together with its schema.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub schema: PredictorSchema,
    pub frame: DataFrame,
}

impl Dataset {
    pub fn assemble(&self) -> Result<DesignAssembly> {
        DesignAssembly::from_frame(&self.schema, &self.frame)
    }
}

fn cells(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn labels(codes: &[usize], levels: &[String]) -> Vec<String> {
    codes.iter().map(|&c| levels[c].clone()).collect()
}

/// Level codes with the given cell sizes, shuffled.
fn codes_with_sizes(rng: &mut ChaCha8Rng, sizes: &[usize]) -> Vec<usize> {
    let mut codes: Vec<usize> = sizes.iter().enumerate().flat_map(|(j, &m)| std::iter::repeat_n(j, m)).collect();
    codes.shuffle(rng);
    codes
}

/// Near-equal cell sizes summing to `n`.
pub fn balanced_sizes(n: usize, levels: usize) -> Vec<usize> {
    (0..levels).map(|j| n / levels + (j < n % levels) as usize).collect()
}

/// Obesity-study shape: `n = 1002`, three numeric sure columns, two candidate
/// variables and factors with 6 and 3 levels (`2^11` models).
///
/// Signal: `x1` strong, `x2` weak, level 1 of `sport` and level 3 of
/// `diet` shifted.
pub fn obesity_like(seed: u64) -> Dataset {
    let n = 1002;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sport_levels: Vec<String> = (1..=6).map(|j| format!("s{j}")).collect();
    let diet_levels: Vec<String> = (1..=3).map(|j| format!("d{j}")).collect();
    let sport = codes_with_sizes(&mut rng, &[240, 200, 180, 160, 120, 102]);
    let diet = codes_with_sizes(&mut rng, &[400, 350, 252]);
    let mut normal = || rng.sample::<f64, _>(StandardNormal);
    let mut col = |_: usize| (0..n).map(|_| normal()).collect::<Vec<f64>>();
    let (age, sex, height, x1, x2, noise) = (col(0), col(1), col(2), col(3), col(4), col(5));
    let y: Vec<f64> = (0..n)
        .map(|i| {
            25.0 + 0.8 * age[i] + 0.3 * sex[i] - 0.5 * height[i] + 0.5 * x1[i] + 0.08 * x2[i]
                - 0.6 * (sport[i] == 0) as u8 as f64
                + 0.4 * (diet[i] == 2) as u8 as f64
                + 2.0 * noise[i]
        })
        .collect();

    let mut frame = DataFrame::new();
    let push = |f: &mut DataFrame, name: &str, c: Vec<String>| f.push_column(name, c).expect("fresh column");
    push(&mut frame, "bmi", cells(&y));
    push(&mut frame, "age", cells(&age));
    push(&mut frame, "sex", cells(&sex));
    push(&mut frame, "height", cells(&height));
    push(&mut frame, "x1", cells(&x1));
    push(&mut frame, "x2", cells(&x2));
    push(&mut frame, "sport", labels(&sport, &sport_levels));
    push(&mut frame, "diet", labels(&diet, &diet_levels));
    Dataset {
        schema: PredictorSchema {
            response: "bmi".into(),
            sure: vec!["age".into(), "sex".into(), "height".into()],
            variables: vec!["x1".into(), "x2".into()],
            factors: vec![
                FactorSpec {
                    name: "sport".into(),
                    levels: sport_levels,
                },
                FactorSpec {
                    name: "diet".into(),
                    levels: diet_levels,
                },
            ],
        },
        frame,
    }
}

/// Intercept-only model with one factor whose `shifted` levels have their
/// mean moved by `shift` noise standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct OneFactorScenario {
    pub seed: u64,
    pub cell_sizes: Vec<usize>,
    pub shifted: Vec<usize>,
    pub shift: f64,
    /// Number of pure-noise candidate variables.
    pub noise_variables: usize,
}

impl OneFactorScenario {
    pub fn balanced(seed: u64, n: usize, levels: usize, shifted: Vec<usize>, shift: f64) -> Self {
        Self {
            seed,
            cell_sizes: balanced_sizes(n, levels),
            shifted,
            shift,
            noise_variables: 0,
        }
    }

    pub fn generate(&self) -> Result<Dataset> {
        let levels = self.cell_sizes.len();
        if self.shifted.iter().any(|&j| j >= levels) {
            return Err(Error::Usage("shifted level out of range".into()));
        }
        let n: usize = self.cell_sizes.iter().sum();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let codes = codes_with_sizes(&mut rng, &self.cell_sizes);
        let level_names: Vec<String> = (1..=levels).map(|j| format!("l{j}")).collect();
        let y: Vec<f64> = codes
            .iter()
            .map(|c| {
                let mu = if self.shifted.contains(c) { self.shift } else { 0.0 };
                mu + rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        let mut frame = DataFrame::new();
        frame.push_column("y", cells(&y))?;
        let mut variables = Vec::new();
        for v in 0..self.noise_variables {
            let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let name = format!("x{}", v + 1);
            frame.push_column(&name, cells(&x))?;
            variables.push(name);
        }
        frame.push_column("a", labels(&codes, &level_names))?;
        Ok(Dataset {
            schema: PredictorSchema {
                response: "y".into(),
                sure: vec![],
                variables,
                factors: vec![FactorSpec {
                    name: "a".into(),
                    levels: level_names,
                }],
            },
            frame,
        })
    }
}

/// Pure-noise response with `k` candidate variables and one factor of
/// `levels` levels.
pub fn pure_noise(seed: u64, n: usize, k: usize, levels: usize) -> Result<Dataset> {
    OneFactorScenario {
        seed,
        cell_sizes: balanced_sizes(n, levels),
        shifted: vec![],
        shift: 0.0,
        noise_variables: k,
    }
    .generate()
}
