//! Exact intersection theory on the compactified fibre surfaces.
//!
//! Two independent descriptions are kept side by side:
//!
//! * [`CurveConfig`]: the configuration at infinity (`C, E, F, G` or
//!   `C, D₁, D₂`) with its intersection matrix. The class `Q` of a twistor-line
//!   image, its self-intersection and canonical degree are all derived from
//!   this matrix alone.
//! * [`BlowupModel`]: an explicit blow-up of `P²` (D series) or of a
//!   Hirzebruch surface (A series), carrying the same curves as classes in
//!   a full Picard lattice. Used to cross-check the configuration data.
//!
//! Everything is computed with arbitrary-size integers and rationals.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PicardError {
    #[error("no explicit blow-up model for {0}")]
    UnsupportedType(ConfigType),
    #[error("invalid configuration parameters: {0}")]
    InvalidParameter(String),
    #[error("restricted intersection matrix is singular")]
    SingularSystem,
    #[error("solution has non-integral coefficient {value} for {curve}")]
    NonIntegralSolution { curve: String, value: String },
    #[error("unknown curve or basis element {0}")]
    UnknownName(String),
    #[error("integer {0} does not fit in 64 bits")]
    Overflow(String),
}

/// ADE type of the configuration at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConfigType {
    /// `A_{2ℓ−1}`, stored by `ℓ`.
    A { ell: u32 },
    D { k: u32 },
    E { k: u32 },
}

impl fmt::Display for ConfigType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ConfigType::A { ell } => write!(f, "A{}", 2 * ell - 1),
            ConfigType::D { k } => write!(f, "D{k}"),
            ConfigType::E { k } => write!(f, "E{k}"),
        }
    }
}

impl std::str::FromStr for ConfigType {
    type Err = PicardError;

    /// Parses `A5`, `D7`, `E8` (case-insensitive). `A` needs an odd index.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PicardError::InvalidParameter(format!("cannot parse type {s:?}"));
        let s = s.trim();
        let (head, tail) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
        let n: u32 = tail.parse().map_err(|_| bad())?;
        let kind = match head.to_ascii_uppercase().as_str() {
            "A" if n % 2 == 1 => ConfigType::A { ell: n.div_ceil(2) },
            "D" => ConfigType::D { k: n },
            "E" => ConfigType::E { k: n },
            _ => return Err(bad()),
        };
        CurveConfig::new(kind)?;
        Ok(kind)
    }
}

impl ConfigType {
    /// Order of the binary polyhedral group Γ.
    pub fn gamma_order(self) -> u64 {
        match self {
            ConfigType::A { ell } => 2 * ell as u64,
            ConfigType::D { k } => 4 * (k as u64 - 2),
            ConfigType::E { k: 6 } => 24,
            ConfigType::E { k: 7 } => 48,
            ConfigType::E { .. } => 120,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub self_intersection: i64,
}

/// Rational curves at infinity of the compactified fibre.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub kind: ConfigType,
    pub curves: Vec<Curve>,
    /// Symmetric 0/1 matrix of transverse intersections.
    pub adjacency: Vec<Vec<u8>>,
    /// |Γ|, stored rather than derived so that `Q² = |Γ|` stays a check.
    pub gamma_order: u64,
}

impl CurveConfig {
    pub fn new(kind: ConfigType) -> Result<Self, PicardError> {
        let curve = |name: &str, s: i64| Curve {
            name: name.to_string(),
            self_intersection: s,
        };
        let curves = match kind {
            ConfigType::A { ell } if ell >= 1 => {
                let l = ell as i64;
                vec![curve("C", 0), curve("D1", -l), curve("D2", -l)]
            }
            ConfigType::D { k } if k >= 4 => {
                vec![curve("C", -1), curve("E", -(k as i64 - 2)), curve("F", -2), curve("G", -2)]
            }
            ConfigType::E { k } if (6..=8).contains(&k) => {
                vec![curve("C", -1), curve("E", 3 - k as i64), curve("F", -2), curve("G", -3)]
            }
            _ => return Err(PicardError::InvalidParameter(format!("{kind:?}"))),
        };
        // C is the hub; every other curve meets it once and nothing else.
        let n = curves.len();
        let adjacency = (0..n)
            .map(|i| (0..n).map(|j| u8::from(i != j && (i == 0 || j == 0))).collect())
            .collect();
        Ok(CurveConfig {
            kind,
            curves,
            adjacency,
            gamma_order: kind.gamma_order(),
        })
    }

    pub fn a_series(ell: u32) -> Result<Self, PicardError> {
        Self::new(ConfigType::A { ell })
    }

    pub fn d_series(k: u32) -> Result<Self, PicardError> {
        Self::new(ConfigType::D { k })
    }

    pub fn e_series(k: u32) -> Result<Self, PicardError> {
        Self::new(ConfigType::E { k })
    }

    pub fn names(&self) -> Vec<String> {
        self.curves.iter().map(|c| c.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, PicardError> {
        self.curves
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| PicardError::UnknownName(name.to_string()))
    }

    pub fn gram(&self) -> Vec<Vec<BigInt>> {
        let n = self.curves.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            BigInt::from(self.curves[i].self_intersection)
                        } else {
                            BigInt::from(self.adjacency[i][j])
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// `K·Cᵢ = −2 − Cᵢ²` for each curve (adjunction on a smooth rational curve).
    pub fn canonical_degrees(&self) -> Vec<BigInt> {
        self.curves
            .iter()
            .map(|c| BigInt::from(-2 - c.self_intersection))
            .collect()
    }

    pub fn class(&self, coeffs: &[i64]) -> DivisorClass {
        DivisorClass::new(self.names(), coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn basis_class(&self, name: &str) -> Result<DivisorClass, PicardError> {
        let i = self.index_of(name)?;
        let mut coeffs = vec![BigInt::zero(); self.curves.len()];
        coeffs[i] = BigInt::one();
        Ok(DivisorClass::new(self.names(), coeffs))
    }
}

/// Integer combination of named basis classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorClass {
    pub basis: Vec<String>,
    pub coeffs: Vec<BigInt>,
}

impl DivisorClass {
    pub fn new(basis: Vec<String>, coeffs: Vec<BigInt>) -> Self {
        assert_eq!(basis.len(), coeffs.len(), "basis/coefficient length mismatch");
        DivisorClass { basis, coeffs }
    }

    pub fn zero(basis: Vec<String>) -> Self {
        let n = basis.len();
        DivisorClass::new(basis, vec![BigInt::zero(); n])
    }

    pub fn coeff(&self, name: &str) -> Option<&BigInt> {
        self.basis.iter().position(|b| b == name).map(|i| &self.coeffs[i])
    }

    pub fn coeffs_i64(&self) -> Result<Vec<i64>, PicardError> {
        self.coeffs.iter().map(to_i64).collect()
    }

    pub fn scaled(&self, s: &BigInt) -> Self {
        DivisorClass::new(self.basis.clone(), self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn plus(&self, other: &DivisorClass) -> Self {
        assert_eq!(self.basis, other.basis, "classes over different bases");
        DivisorClass::new(
            self.basis.clone(),
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn minus(&self, other: &DivisorClass) -> Self {
        self.plus(&other.scaled(&BigInt::from(-1)))
    }

    pub fn neg(&self) -> Self {
        self.scaled(&BigInt::from(-1))
    }
}

impl fmt::Display for DivisorClass {
    /// Renders as e.g. `60C+12E+30F+20G`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, c) in self.basis.iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            if mag.is_one() {
                write!(f, "{sign}{name}")?;
            } else {
                write!(f, "{sign}{mag}{name}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn to_i64(v: &BigInt) -> Result<i64, PicardError> {
    v.to_i64().ok_or_else(|| PicardError::Overflow(v.to_string()))
}

fn bilinear(gram: &[Vec<BigInt>], a: &[BigInt], b: &[BigInt]) -> BigInt {
    let mut acc = BigInt::zero();
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            acc += ai * &gram[i][j] * bj;
        }
    }
    acc
}

/// Picard lattice of a rational surface: named basis, Gram matrix, and the
/// canonical class in that basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicardLattice {
    pub basis: Vec<String>,
    pub gram: Vec<Vec<BigInt>>,
    pub canonical: Vec<BigInt>,
}

impl PicardLattice {
    /// `P²` with hyperplane class `H`, `H² = 1`, `K = −3H`.
    pub fn projective_plane() -> Self {
        PicardLattice {
            basis: vec!["H".to_string()],
            gram: vec![vec![BigInt::one()]],
            canonical: vec![BigInt::from(-3)],
        }
    }

    /// Hirzebruch surface `P(O ⊕ O(n))` in the basis (fibre `Fib`, negative
    /// section `Sinf`): `Fib² = 0`, `Fib·Sinf = 1`, `Sinf² = −n`,
    /// `K = −2 Sinf − (n+2) Fib`.
    pub fn hirzebruch(n: u32) -> Self {
        let n = BigInt::from(n);
        PicardLattice {
            basis: vec!["Fib".to_string(), "Sinf".to_string()],
            gram: vec![
                vec![BigInt::zero(), BigInt::one()],
                vec![BigInt::one(), -n.clone()],
            ],
            canonical: vec![-(n + BigInt::from(2)), BigInt::from(-2)],
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Adds the total transform of a new exceptional curve: orthogonal to
    /// everything, self-intersection −1, and `K ↦ K + e`.
    pub fn blow_up(&mut self, name: &str) -> usize {
        for row in &mut self.gram {
            row.push(BigInt::zero());
        }
        let n = self.basis.len();
        let mut last = vec![BigInt::zero(); n + 1];
        last[n] = BigInt::from(-1);
        self.gram.push(last);
        self.basis.push(name.to_string());
        self.canonical.push(BigInt::one());
        n
    }

    pub fn pair(&self, a: &DivisorClass, b: &DivisorClass) -> BigInt {
        bilinear(&self.gram, &self.padded(a), &self.padded(b))
    }

    pub fn canonical_class(&self) -> DivisorClass {
        DivisorClass::new(self.basis.clone(), self.canonical.clone())
    }

    /// Expresses a class over a prefix of this basis in the full basis.
    pub fn padded(&self, d: &DivisorClass) -> Vec<BigInt> {
        assert!(
            d.basis.len() <= self.basis.len() && self.basis.starts_with(&d.basis),
            "class basis is not a prefix of the lattice basis"
        );
        let mut v = d.coeffs.clone();
        v.resize(self.basis.len(), BigInt::zero());
        v
    }

    pub fn element(&self, name: &str) -> Result<DivisorClass, PicardError> {
        let i = self
            .basis
            .iter()
            .position(|b| b == name)
            .ok_or_else(|| PicardError::UnknownName(name.to_string()))?;
        let mut coeffs = vec![BigInt::zero(); self.rank()];
        coeffs[i] = BigInt::one();
        Ok(DivisorClass::new(self.basis.clone(), coeffs))
    }
}

/// A lattice together with named curves tracked as strict transforms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowupModel {
    pub lattice: PicardLattice,
    pub curves: BTreeMap<String, DivisorClass>,
}

impl BlowupModel {
    pub fn new(lattice: PicardLattice) -> Self {
        BlowupModel {
            lattice,
            curves: BTreeMap::new(),
        }
    }

    pub fn add_curve(&mut self, name: &str, coeffs: &[i64]) {
        let class = DivisorClass::new(
            self.lattice.basis.clone(),
            coeffs.iter().map(|&c| BigInt::from(c)).collect(),
        );
        self.curves.insert(name.to_string(), class);
    }

    /// Blows up a point lying on exactly the listed curves (each smooth
    /// there). The new exceptional class is subtracted from their strict
    /// transforms. A point infinitely near an earlier one is handled by
    /// listing that earlier exceptional curve in `through`.
    pub fn blow_up(&mut self, exceptional: &str, through: &[&str]) -> Result<(), PicardError> {
        for name in through {
            if !self.curves.contains_key(*name) {
                return Err(PicardError::UnknownName(name.to_string()));
            }
        }
        let idx = self.lattice.blow_up(exceptional);
        let basis = self.lattice.basis.clone();
        for class in self.curves.values_mut() {
            class.basis = basis.clone();
            class.coeffs.push(BigInt::zero());
        }
        for name in through {
            let class = self.curves.get_mut(*name).expect("checked above");
            class.coeffs[idx] -= 1;
        }
        let mut e = vec![BigInt::zero(); basis.len()];
        e[idx] = BigInt::one();
        self.curves.insert(exceptional.to_string(), DivisorClass::new(basis, e));
        Ok(())
    }

    pub fn curve(&self, name: &str) -> Result<&DivisorClass, PicardError> {
        self.curves
            .get(name)
            .ok_or_else(|| PicardError::UnknownName(name.to_string()))
    }

    pub fn pair(&self, a: &str, b: &str) -> Result<BigInt, PicardError> {
        Ok(self.lattice.pair(self.curve(a)?, self.curve(b)?))
    }

    /// Gram matrix of the named curves.
    pub fn restricted_gram(&self, names: &[String]) -> Result<Vec<Vec<BigInt>>, PicardError> {
        names
            .iter()
            .map(|a| names.iter().map(|b| self.pair(a, b)).collect())
            .collect()
    }

    /// `Σ cᵢ Cᵢ` for a class written over configuration curve names.
    pub fn combine(&self, d: &DivisorClass) -> Result<DivisorClass, PicardError> {
        let mut acc = DivisorClass::zero(self.lattice.basis.clone());
        for (name, c) in d.basis.iter().zip(&d.coeffs) {
            acc = acc.plus(&self.curve(name)?.scaled(c));
        }
        Ok(acc)
    }
}

/// Explicit blow-up realization of the configuration.
///
/// * `D(k)`: the plane blown up at `x`, `f`, `e₁…e_k`, where the conic `E`
///   passes through `f, e₁…e_k` and the line `G` through `x` is tangent to
///   `E` at `f`; then at the point `a` on the exceptional curve over `f` where
///   `E`, `G` and that curve meet. Basis `H, Ex, Ef, E1…Ek, Ea`.
/// * `A(2ℓ−1)`: the Hirzebruch surface `P(O ⊕ O(ℓ))` blown up at `2ℓ`
///   points of the zero section; `C` a fibre, `D₁` the infinity section,
///   `D₂` the strict transform of the zero section.
pub fn blowup_model(kind: ConfigType) -> Result<BlowupModel, PicardError> {
    match kind {
        ConfigType::D { k } if k >= 4 => {
            let mut m = BlowupModel::new(PicardLattice::projective_plane());
            m.add_curve("E", &[2]);
            m.add_curve("G", &[1]);
            m.blow_up("Ex", &["G"])?;
            m.blow_up("Ef", &["E", "G"])?;
            for i in 1..=k {
                m.blow_up(&format!("E{i}"), &["E"])?;
            }
            // tangency at f: E, G and the exceptional curve over f share a point
            m.blow_up("Ea", &["E", "G", "Ef"])?;
            let f = m.curves.remove("Ef").expect("inserted above");
            let c = m.curves.remove("Ea").expect("inserted above");
            m.curves.insert("F".to_string(), f);
            m.curves.insert("C".to_string(), c);
            m.curves.retain(|name, _| ["C", "E", "F", "G"].contains(&name.as_str()));
            Ok(m)
        }
        ConfigType::A { ell } if ell >= 1 => {
            let l = ell as i64;
            let mut m = BlowupModel::new(PicardLattice::hirzebruch(ell));
            m.add_curve("C", &[1, 0]);
            m.add_curve("D1", &[0, 1]);
            m.add_curve("D2", &[l, 1]);
            for i in 1..=2 * ell {
                m.blow_up(&format!("A{i}"), &["D2"])?;
            }
            m.curves.retain(|name, _| ["C", "D1", "D2"].contains(&name.as_str()));
            Ok(m)
        }
        ConfigType::E { .. } => Err(PicardError::UnsupportedType(kind)),
        _ => Err(PicardError::InvalidParameter(format!("{kind:?}"))),
    }
}

/// The class `Q = Σ aᵢ Cᵢ` with `Q·C = 2` and `Q·Cᵢ = 0` for every other
/// configuration curve, by exact rational elimination.
pub fn solve_q(config: &CurveConfig) -> Result<DivisorClass, PicardError> {
    let gram = config.gram();
    let n = gram.len();
    let hub = config.index_of("C")?;
    let mut rhs = vec![BigRational::zero(); n];
    rhs[hub] = BigRational::from_integer(BigInt::from(2));
    let mut a: Vec<Vec<BigRational>> = gram
        .iter()
        .map(|row| row.iter().map(|v| BigRational::from_integer(v.clone())).collect())
        .collect();
    let sol = solve_rational(&mut a, rhs).ok_or(PicardError::SingularSystem)?;
    let coeffs = sol
        .into_iter()
        .zip(&config.curves)
        .map(|(v, curve)| {
            if v.is_integer() {
                Ok(v.to_integer())
            } else {
                Err(PicardError::NonIntegralSolution {
                    curve: curve.name.clone(),
                    value: v.to_string(),
                })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DivisorClass::new(config.names(), coeffs))
}

fn solve_rational(a: &mut [Vec<BigRational>], mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &a[col][col];
            let (pivot, target) = if r < col {
                let (lo, hi) = a.split_at_mut(col);
                (&hi[0], &mut lo[r])
            } else {
                let (lo, hi) = a.split_at_mut(r);
                (&lo[col], &mut hi[0])
            };
            for (t, p) in target[col..n].iter_mut().zip(&pivot[col..n]) {
                *t -= &factor * p;
            }
            let delta = &factor * &b[col];
            b[r] -= delta;
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairings {
    /// `D·D`.
    pub self_: BigInt,
    /// `K·D`.
    pub canonical: BigInt,
}

/// `D·D` from the configuration Gram matrix and `K·D` by extending
/// adjunction linearly.
pub fn pairings(config: &CurveConfig, d: &DivisorClass) -> Result<Pairings, PicardError> {
    let coeffs = align(config, d)?;
    let self_ = bilinear(&config.gram(), &coeffs, &coeffs);
    let canonical = config
        .canonical_degrees()
        .iter()
        .zip(&coeffs)
        .map(|(k, c)| k * c)
        .sum();
    Ok(Pairings { self_, canonical })
}

fn align(config: &CurveConfig, d: &DivisorClass) -> Result<Vec<BigInt>, PicardError> {
    let mut out = vec![BigInt::zero(); config.curves.len()];
    for (name, c) in d.basis.iter().zip(&d.coeffs) {
        out[config.index_of(name)?] += c;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QClass {
    pub basis: Vec<String>,
    pub coeffs: Vec<i64>,
}

/// Consequences of the class `Q` for one configuration type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremReport {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(rename = "Q")]
    pub q: QClass,
    #[serde(rename = "Q2")]
    pub q2: i64,
    #[serde(rename = "KQ")]
    pub kq: i64,
    /// Expected node count `|Γ|/2 − 1`.
    pub delta: i64,
    /// `Q² + 1 − 2δ`.
    pub family_dim: i64,
    /// `(K·Q + Q²)/2 + 1`.
    pub genus_arith: i64,
    pub pass: bool,
}

pub fn verify_theorem(config: &CurveConfig) -> Result<TheoremReport, PicardError> {
    let q = solve_q(config)?;
    let p = pairings(config, &q)?;
    let q2 = to_i64(&p.self_)?;
    let kq = to_i64(&p.canonical)?;
    let gamma = config.gamma_order as i64;
    let delta = gamma / 2 - 1;
    let family_dim = q2 + 1 - 2 * delta;
    let adj = kq + q2;
    let genus_arith = adj.div_euclid(2) + 1;
    let pass = gamma % 2 == 0
        && adj % 2 == 0
        && q2 == gamma
        && kq == -4
        && family_dim == 3
        && genus_arith == delta;
    Ok(TheoremReport {
        kind: config.kind.to_string(),
        q: QClass {
            basis: q.basis.clone(),
            coeffs: q.coeffs_i64()?,
        },
        q2,
        kq,
        delta,
        family_dim,
        genus_arith,
        pass,
    })
}

/// Every configuration type the report sweep covers: `A(2ℓ−1)` for
/// `ℓ = 1..=ell_max`, `D(k)` for `k = 4..=k_max`, and `E6, E7, E8`.
pub fn standard_types(ell_max: u32, k_max: u32) -> Vec<ConfigType> {
    let mut out: Vec<ConfigType> = (1..=ell_max).map(|ell| ConfigType::A { ell }).collect();
    out.extend((4..=k_max).map(|k| ConfigType::D { k }));
    out.extend((6..=8).map(|k| ConfigType::E { k }));
    out
}
