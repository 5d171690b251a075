//! Explicit subgroups of `GL_2(F_l1) x ... x GL_2(F_lk)`.
//!
//! Elements are packed into a single `u64`: each component matrix
//! `[[a, b], [c, d]]` over `F_l` becomes the base-`l` number `abcd`, and the
//! components are combined in mixed radix with the first component most
//! significant, so numeric order is lexicographic order of the entries.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{gl2_order, Rational};
use crate::modmath;

pub type Mat2 = [u32; 4];

pub const DEFAULT_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntangleError {
    #[error("modulus {0} is not a prime below 2^16")]
    InvalidModulus(u64),
    #[error("moduli must be distinct")]
    RepeatedModulus,
    #[error("generator {generator}: {reason}")]
    InvalidGenerator { generator: usize, reason: String },
    #[error("closure exceeds the cap of {0} elements")]
    ClosureCapExceeded(usize),
    #[error("product of component sizes does not fit the element encoding")]
    EncodingOverflow,
    #[error("component {0}: element is not of order 2")]
    NotOrderTwo(usize),
    #[error("component {0}: element does not commute with the ambient projection")]
    NotCentral(usize),
    #[error("norm-one generators are not in the ambient group")]
    NotInAmbient,
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("factor {0}: character is not a surjection onto +-1")]
    CharacterNotSurjective(usize),
    #[error("need at least two factors")]
    TooFewFactors,
    #[error("group description: {0}")]
    Description(String),
}

fn identity() -> Mat2 {
    [1, 0, 0, 1]
}

fn mat_mul(x: &Mat2, y: &Mat2, l: u32) -> Mat2 {
    let l = l as u64;
    let [a, b, c, d] = x.map(u64::from);
    let [e, f, g, h] = y.map(u64::from);
    [
        ((a * e + b * g) % l) as u32,
        ((a * f + b * h) % l) as u32,
        ((c * e + d * g) % l) as u32,
        ((c * f + d * h) % l) as u32,
    ]
}

fn det(x: &Mat2, l: u32) -> u32 {
    let l = l as u64;
    let [a, b, c, d] = x.map(u64::from);
    ((a * d % l + l * l - b * c % l) % l) as u32
}

/// Reduce integer entries into `[0, l)`.
pub fn reduce_matrix(entries: [i64; 4], l: u32) -> Mat2 {
    entries.map(|v| v.rem_euclid(l as i64) as u32)
}

/// One matrix per component, component `i` over `F_{l_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatrixTuple {
    pub components: Vec<Mat2>,
}

impl MatrixTuple {
    pub fn new(components: Vec<Mat2>) -> Self {
        MatrixTuple { components }
    }

    pub fn identity(k: usize) -> Self {
        MatrixTuple { components: vec![identity(); k] }
    }

    /// `m` in component `i`, identity elsewhere.
    pub fn embed(k: usize, i: usize, m: Mat2) -> Self {
        let mut t = Self::identity(k);
        t.components[i] = m;
        t
    }

    pub fn validate(&self, moduli: &[u32]) -> Result<(), String> {
        if self.components.len() != moduli.len() {
            return Err(format!("{} components for {} moduli", self.components.len(), moduli.len()));
        }
        for (i, (m, &l)) in self.components.iter().zip(moduli).enumerate() {
            if m.iter().any(|&v| v >= l) {
                return Err(format!("component {i} has entries outside [0, {l})"));
            }
            if det(m, l) == 0 {
                return Err(format!("component {i} is singular mod {l}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Codec {
    moduli: Vec<u32>,
    /// Place value of each component.
    weights: Vec<u64>,
    radices: Vec<u64>,
    space: u64,
}

impl Codec {
    fn new(moduli: &[u32]) -> Result<Self, EntangleError> {
        let radices: Vec<u64> = moduli.iter().map(|&l| (l as u64).pow(4)).collect();
        let mut weights = vec![0u64; moduli.len()];
        let mut w: u64 = 1;
        for i in (0..moduli.len()).rev() {
            weights[i] = w;
            w = w.checked_mul(radices[i]).ok_or(EntangleError::EncodingOverflow)?;
        }
        Ok(Codec { moduli: moduli.to_vec(), weights, radices, space: w })
    }

    fn encode_matrix(m: &Mat2, l: u32) -> u64 {
        let l = l as u64;
        ((m[0] as u64 * l + m[1] as u64) * l + m[2] as u64) * l + m[3] as u64
    }

    fn decode_matrix(mut c: u64, l: u32) -> Mat2 {
        let l = l as u64;
        let mut m = [0u32; 4];
        for slot in m.iter_mut().rev() {
            *slot = (c % l) as u32;
            c /= l;
        }
        m
    }

    fn component_code(&self, code: u64, i: usize) -> u64 {
        code / self.weights[i] % self.radices[i]
    }

    fn encode(&self, t: &MatrixTuple) -> u64 {
        t.components
            .iter()
            .zip(&self.moduli)
            .zip(&self.weights)
            .map(|((m, &l), &w)| Self::encode_matrix(m, l) * w)
            .sum()
    }

    fn decode(&self, code: u64) -> MatrixTuple {
        let components = (0..self.moduli.len())
            .map(|i| Self::decode_matrix(self.component_code(code, i), self.moduli[i]))
            .collect();
        MatrixTuple { components }
    }

    fn identity_code(&self, i: usize) -> u64 {
        Self::encode_matrix(&identity(), self.moduli[i])
    }
}

/// Right multiplication by a generator, touching only its non-identity
/// components.
struct SparseGenerator {
    parts: Vec<(usize, Mat2)>,
}

impl SparseGenerator {
    fn apply(&self, codec: &Codec, code: u64) -> u64 {
        let mut out = code;
        for &(i, ref g) in &self.parts {
            let l = codec.moduli[i];
            let c = codec.component_code(code, i);
            let m = Codec::decode_matrix(c, l);
            let n = Codec::encode_matrix(&mat_mul(&m, g, l), l);
            out = out - c * codec.weights[i] + n * codec.weights[i];
        }
        out
    }
}

enum Visited {
    Bits(Vec<u64>),
    Hash(HashSet<u64>),
}

impl Visited {
    const BITSET_LIMIT: u64 = 1 << 30;

    fn new(space: u64) -> Self {
        if space <= Self::BITSET_LIMIT {
            Visited::Bits(vec![0; space.div_ceil(64) as usize])
        } else {
            Visited::Hash(HashSet::new())
        }
    }

    fn insert(&mut self, code: u64) -> bool {
        match self {
            Visited::Bits(bits) => {
                let (w, b) = ((code / 64) as usize, code % 64);
                let fresh = bits[w] >> b & 1 == 0;
                bits[w] |= 1 << b;
                fresh
            }
            Visited::Hash(set) => set.insert(code),
        }
    }
}

/// An enumerated subgroup; `elements` is sorted.
#[derive(Debug, Clone)]
pub struct MatrixTupleGroup {
    codec: Codec,
    generators: Vec<MatrixTuple>,
    elements: Vec<u64>,
}

/// Enumerate the subgroup generated by `generators`.
pub fn generate_closure(
    moduli: &[u32],
    generators: &[MatrixTuple],
    cap: usize,
) -> Result<MatrixTupleGroup, EntangleError> {
    for &l in moduli {
        if l >= 1 << 16 || !modmath::is_prime(l as u64) {
            return Err(EntangleError::InvalidModulus(l as u64));
        }
    }
    let mut sorted = moduli.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != moduli.len() {
        return Err(EntangleError::RepeatedModulus);
    }
    for (g, t) in generators.iter().enumerate() {
        t.validate(moduli)
            .map_err(|reason| EntangleError::InvalidGenerator { generator: g, reason })?;
    }
    let codec = Codec::new(moduli)?;
    let sparse: Vec<SparseGenerator> = generators
        .iter()
        .map(|t| SparseGenerator {
            parts: t
                .components
                .iter()
                .enumerate()
                .filter(|(_, m)| **m != identity())
                .map(|(i, m)| (i, *m))
                .collect(),
        })
        .filter(|g| !g.parts.is_empty())
        .collect();

    let start = codec.encode(&MatrixTuple::identity(moduli.len()));
    let mut visited = Visited::new(codec.space);
    visited.insert(start);
    let mut elements = vec![start];
    let mut head = 0;
    while head < elements.len() {
        let code = elements[head];
        head += 1;
        for g in &sparse {
            let next = g.apply(&codec, code);
            if visited.insert(next) {
                if elements.len() == cap {
                    return Err(EntangleError::ClosureCapExceeded(cap));
                }
                elements.push(next);
            }
        }
    }
    elements.sort_unstable();
    Ok(MatrixTupleGroup { codec, generators: generators.to_vec(), elements })
}

/// A primitive root mod `l`.
fn primitive_root(l: u32) -> u32 {
    if l == 2 {
        return 1;
    }
    let l64 = l as u64;
    let factors = modmath::prime_factors(l64 - 1);
    (2..l)
        .find(|&g| factors.iter().all(|&q| modmath::pow_mod(g as u64, (l64 - 1) / q, l64) != 1))
        .expect("prime modulus has a primitive root")
}

/// `diag(g, 1)` and the two elementary transvections; they generate
/// `GL_2(F_l)`.
pub fn gl2_generators(l: u32) -> Vec<Mat2> {
    vec![[primitive_root(l), 0, 0, 1], [1, 1, 0, 1], [1, 0, 1, 1]]
}

/// Generators of the full product `GL_2(F_l1) x ... x GL_2(F_lk)`.
pub fn full_product_generators(moduli: &[u32]) -> Vec<MatrixTuple> {
    let k = moduli.len();
    moduli
        .iter()
        .enumerate()
        .flat_map(|(i, &l)| gl2_generators(l).into_iter().map(move |m| MatrixTuple::embed(k, i, m)))
        .collect()
}

pub fn full_product(moduli: &[u32], cap: usize) -> Result<MatrixTupleGroup, EntangleError> {
    generate_closure(moduli, &full_product_generators(moduli), cap)
}

impl MatrixTupleGroup {
    pub fn moduli(&self) -> &[u32] {
        &self.codec.moduli
    }

    pub fn generators(&self) -> &[MatrixTuple] {
        &self.generators
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, idx: usize) -> MatrixTuple {
        self.codec.decode(self.elements[idx])
    }

    pub fn elements(&self) -> impl Iterator<Item = MatrixTuple> + '_ {
        self.elements.iter().map(|&c| self.codec.decode(c))
    }

    pub fn contains(&self, t: &MatrixTuple) -> bool {
        t.validate(self.moduli()).is_ok() && self.elements.binary_search(&self.codec.encode(t)).is_ok()
    }

    /// Number of elements whose every component is non-trivial.
    pub fn everywhere_nontrivial(&self) -> usize {
        let ids: Vec<u64> = (0..self.moduli().len()).map(|i| self.codec.identity_code(i)).collect();
        self.elements
            .iter()
            .filter(|&&code| ids.iter().enumerate().all(|(i, &id)| self.codec.component_code(code, i) != id))
            .count()
    }

    /// Size of the image of the projection onto component `i`.
    pub fn projection_order(&self, i: usize) -> usize {
        let mut seen: Vec<u64> = self.elements.iter().map(|&c| self.codec.component_code(c, i)).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

/// Fraction of elements non-trivial in every component.
pub fn delta_exact(g: &MatrixTupleGroup) -> Rational {
    Rational::new(BigInt::from(g.everywhere_nontrivial()), BigInt::from(g.order()))
}

/// `prod (1 - 1/|proj_i(G)|)`: the density the group would have if its
/// projections were independent.
pub fn naive_product(g: &MatrixTupleGroup) -> Rational {
    (0..g.moduli().len()).fold(Rational::one(), |acc, i| {
        let n = g.projection_order(i) as i64;
        acc * Rational::new(BigInt::from(n - 1), BigInt::from(n))
    })
}

/// `delta_exact / naive_product`, undefined when some projection is trivial.
pub fn alpha_from_group(g: &MatrixTupleGroup) -> Option<Rational> {
    let naive = naive_product(g);
    if naive.is_zero() {
        None
    } else {
        Some(delta_exact(g) / naive)
    }
}

/// The subgroup of `<e_1> x <e_2> x <e_3>` with an even number of
/// non-trivial entries. With `require_central` each `e_i` must commute with
/// the `i`-th component of every ambient generator; without it any
/// involutions in the ambient group are accepted.
pub fn norm_one_construction(
    elements: &[Mat2],
    ambient: &MatrixTupleGroup,
    require_central: bool,
) -> Result<MatrixTupleGroup, EntangleError> {
    let moduli = ambient.moduli().to_vec();
    if moduli.len() != 3 {
        return Err(EntangleError::ComponentCount { expected: 3, got: moduli.len() });
    }
    if elements.len() != 3 {
        return Err(EntangleError::ComponentCount { expected: 3, got: elements.len() });
    }
    for (i, (e, &l)) in elements.iter().zip(&moduli).enumerate() {
        let valid = e.iter().all(|&v| v < l) && det(e, l) != 0;
        if !valid || *e == identity() || mat_mul(e, e, l) != identity() {
            return Err(EntangleError::NotOrderTwo(i));
        }
        if require_central {
            for g in ambient.generators() {
                let h = &g.components[i];
                if mat_mul(e, h, l) != mat_mul(h, e, l) {
                    return Err(EntangleError::NotCentral(i));
                }
            }
        }
    }
    let id = identity();
    let gens = vec![
        MatrixTuple::new(vec![elements[0], elements[1], id]),
        MatrixTuple::new(vec![id, elements[1], elements[2]]),
    ];
    if !gens.iter().all(|g| ambient.contains(g)) {
        return Err(EntangleError::NotInAmbient);
    }
    generate_closure(&moduli, &gens, 4)
}

/// `<e_1> x <e_2> x <e_3>`, the order-8 group containing the norm-one
/// subgroup.
pub fn involution_product(moduli: &[u32], elements: &[Mat2]) -> Result<MatrixTupleGroup, EntangleError> {
    if elements.len() != moduli.len() {
        return Err(EntangleError::ComponentCount { expected: moduli.len(), got: elements.len() });
    }
    let k = moduli.len();
    let gens: Vec<MatrixTuple> = elements.iter().enumerate().map(|(i, &e)| MatrixTuple::embed(k, i, e)).collect();
    generate_closure(moduli, &gens, 1 << k)
}

/// A factor of size `size` with a character onto `+-1` whose kernel has
/// `kernel_size` elements, identity included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterFactor {
    pub size: u64,
    pub kernel_size: u64,
}

impl CharacterFactor {
    /// A group of even order with an index-2 kernel.
    pub fn sign(size: u64) -> Self {
        CharacterFactor { size, kernel_size: size / 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Index2Model {
    pub factors: Vec<CharacterFactor>,
    /// Order of the kernel of the product character.
    pub group_order: BigUint,
    pub everywhere_nontrivial: BigUint,
    pub density: Rational,
}

/// Count elements of `ker(prod chi_i)` that are non-trivial in every factor
/// by convolving the per-factor fibre sizes over the sign.
pub fn index2_character_subgroup(factors: &[CharacterFactor]) -> Result<Index2Model, EntangleError> {
    if factors.len() < 2 {
        return Err(EntangleError::TooFewFactors);
    }
    for (i, f) in factors.iter().enumerate() {
        if f.kernel_size == 0 || f.kernel_size * 2 != f.size {
            return Err(EntangleError::CharacterNotSurjective(i));
        }
    }
    // fibre[0]: character +1, fibre[1]: character -1.
    let mut all = [BigUint::one(), BigUint::zero()];
    let mut nontrivial = [BigUint::one(), BigUint::zero()];
    for f in factors {
        let plus = BigUint::from(f.kernel_size);
        let minus = BigUint::from(f.size - f.kernel_size);
        let plus_nt = BigUint::from(f.kernel_size - 1);
        all = [&all[0] * &plus + &all[1] * &minus, &all[0] * &minus + &all[1] * &plus];
        nontrivial = [
            &nontrivial[0] * &plus_nt + &nontrivial[1] * &minus,
            &nontrivial[0] * &minus + &nontrivial[1] * &plus_nt,
        ];
    }
    let [group_order, _] = all;
    let [everywhere_nontrivial, _] = nontrivial;
    let density = Rational::new(
        BigInt::from(everywhere_nontrivial.clone()),
        BigInt::from(group_order.clone()),
    );
    Ok(Index2Model { factors: factors.to_vec(), group_order, everywhere_nontrivial, density })
}

/// `prod (1 - 1/#GL_2(F_l))` over `moduli`.
pub fn full_product_density(moduli: &[u32]) -> Rational {
    moduli.iter().fold(Rational::one(), |acc, &l| {
        let n = gl2_order(l as u64);
        acc * Rational::new(BigInt::from(n - 1), BigInt::from(n))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Construction {
    NormOne {
        elements: Vec<[i64; 4]>,
        #[serde(default = "default_true")]
        central: bool,
    },
    Index2 {
        factor_sizes: Vec<u64>,
    },
}

fn default_true() -> bool {
    true
}

/// A group read from JSON: moduli, generator matrices as integer
/// quadruples `[a, b, c, d]`, and an optional construction applied to the
/// generated group.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDescription {
    #[serde(default)]
    pub moduli: Vec<u32>,
    #[serde(default)]
    pub generators: Vec<Vec<[i64; 4]>>,
    /// Use the standard generators of the full product instead.
    #[serde(default)]
    pub full_product: bool,
    #[serde(default)]
    pub cap: Option<usize>,
    #[serde(default)]
    pub construction: Option<Construction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub moduli: Vec<u32>,
    pub order: String,
    pub projections: Vec<u64>,
    pub everywhere_nontrivial: String,
    pub delta_exact: String,
    pub naive: String,
    pub alpha: Option<String>,
}

impl GroupDescription {
    pub fn from_json(text: &str) -> Result<Self, EntangleError> {
        serde_json::from_str(text).map_err(|e| EntangleError::Description(e.to_string()))
    }

    pub fn build(&self) -> Result<MatrixTupleGroup, EntangleError> {
        let cap = self.cap.unwrap_or(DEFAULT_CAP);
        if self.full_product {
            return full_product(&self.moduli, cap);
        }
        let gens: Vec<MatrixTuple> = self
            .generators
            .iter()
            .map(|g| {
                MatrixTuple::new(g.iter().zip(&self.moduli).map(|(&m, &l)| reduce_matrix(m, l)).collect())
            })
            .collect();
        for (i, g) in self.generators.iter().enumerate() {
            if g.len() != self.moduli.len() {
                return Err(EntangleError::InvalidGenerator {
                    generator: i,
                    reason: format!("{} components for {} moduli", g.len(), self.moduli.len()),
                });
            }
        }
        generate_closure(&self.moduli, &gens, cap)
    }

    pub fn evaluate(&self) -> Result<GroupSummary, EntangleError> {
        match &self.construction {
            Some(Construction::Index2 { factor_sizes }) => {
                let factors: Vec<CharacterFactor> = factor_sizes.iter().map(|&n| CharacterFactor::sign(n)).collect();
                if factor_sizes.iter().any(|&n| n % 2 == 1) {
                    let i = factor_sizes.iter().position(|&n| n % 2 == 1).unwrap_or(0);
                    return Err(EntangleError::CharacterNotSurjective(i));
                }
                let model = index2_character_subgroup(&factors)?;
                let naive = factor_sizes.iter().fold(Rational::one(), |acc, &n| {
                    acc * Rational::new(BigInt::from(n - 1), BigInt::from(n))
                });
                let alpha = (!naive.is_zero()).then(|| (&model.density / &naive).to_string());
                Ok(GroupSummary {
                    moduli: self.moduli.clone(),
                    order: model.group_order.to_string(),
                    projections: factor_sizes.clone(),
                    everywhere_nontrivial: model.everywhere_nontrivial.to_string(),
                    delta_exact: model.density.to_string(),
                    naive: naive.to_string(),
                    alpha,
                })
            }
            Some(Construction::NormOne { elements, central }) => {
                let ambient = self.build()?;
                let es: Vec<Mat2> =
                    elements.iter().zip(&self.moduli).map(|(&m, &l)| reduce_matrix(m, l)).collect();
                Ok(summarize(&norm_one_construction(&es, &ambient, *central)?))
            }
            None => Ok(summarize(&self.build()?)),
        }
    }
}

pub fn summarize(g: &MatrixTupleGroup) -> GroupSummary {
    GroupSummary {
        moduli: g.moduli().to_vec(),
        order: g.order().to_string(),
        projections: (0..g.moduli().len()).map(|i| g.projection_order(i) as u64).collect(),
        everywhere_nontrivial: g.everywhere_nontrivial().to_string(),
        delta_exact: delta_exact(g).to_string(),
        naive: naive_product(g).to_string(),
        alpha: alpha_from_group(g).map(|a| a.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{charsum_alpha, rat};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    const MINUS_ONE: fn(u32) -> Mat2 = |l| [l - 1, 0, 0, l - 1];

    #[test]
    fn trivial_group() {
        let g = generate_closure(&[5], &[], DEFAULT_CAP).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(delta_exact(&g), rat(0, 1));
        assert!(alpha_from_group(&g).is_none());
        let empty = generate_closure(&[], &[], DEFAULT_CAP).unwrap();
        assert_eq!(empty.order(), 1);
    }

    #[test]
    fn gl2_orders() {
        for l in [2u32, 3, 5, 7, 11] {
            let g = full_product(&[l], DEFAULT_CAP).unwrap();
            assert_eq!(g.order() as u128, gl2_order(l as u64), "l = {l}");
        }
    }

    #[test]
    fn full_product_two_three() {
        let g = full_product(&[2, 3], DEFAULT_CAP).unwrap();
        assert_eq!(g.order(), 288);
        assert_eq!(delta_exact(&g), rat(235, 288));
        assert_eq!(alpha_from_group(&g), Some(rat(1, 1)));
        // Element order is lexicographic in the entries.
        let elems: Vec<MatrixTuple> = g.elements().collect();
        assert!(elems.windows(2).all(|w| w[0].components < w[1].components));
    }

    #[test]
    fn closure_is_a_subgroup() {
        let g = full_product(&[2, 5], DEFAULT_CAP).unwrap();
        let elems: Vec<MatrixTuple> = g.elements().collect();
        let moduli = g.moduli().to_vec();
        for x in elems.iter().step_by(37) {
            for y in elems.iter().step_by(53) {
                let prod = MatrixTuple::new(
                    x.components.iter().zip(&y.components).zip(&moduli).map(|((a, b), &l)| mat_mul(a, b, l)).collect(),
                );
                assert!(g.contains(&prod));
            }
        }
        assert!(g.contains(&MatrixTuple::identity(2)));
    }

    #[test]
    fn cap_and_validation() {
        assert_eq!(full_product(&[5], 100).unwrap_err(), EntangleError::ClosureCapExceeded(100));
        assert_eq!(full_product(&[4], 100).unwrap_err(), EntangleError::InvalidModulus(4));
        assert_eq!(full_product(&[3, 3], 100).unwrap_err(), EntangleError::RepeatedModulus);
        let singular = MatrixTuple::new(vec![[1, 1, 1, 1]]);
        assert!(matches!(
            generate_closure(&[3], &[singular], 100),
            Err(EntangleError::InvalidGenerator { generator: 0, .. })
        ));
    }

    #[test]
    fn norm_one_klein_group() {
        let moduli = [7, 11, 13];
        let es: Vec<Mat2> = moduli.iter().map(|&l| MINUS_ONE(l)).collect();
        let h_prime = involution_product(&moduli, &es).unwrap();
        assert_eq!(h_prime.order(), 8);
        assert_eq!(delta_exact(&h_prime), rat(1, 8));
        let h = norm_one_construction(&es, &h_prime, true).unwrap();
        assert_eq!(h.order(), 4);
        assert_eq!(delta_exact(&h), rat(0, 1));
        assert_eq!(naive_product(&h), rat(1, 8));
        for t in h.elements().filter(|t| *t != MatrixTuple::identity(3)) {
            let trivial = t.components.iter().filter(|m| **m == identity()).count();
            assert_eq!(trivial, 1);
        }
    }

    #[test]
    fn norm_one_errors() {
        let moduli = [7, 11, 13];
        let es: Vec<Mat2> = moduli.iter().map(|&l| MINUS_ONE(l)).collect();
        let h_prime = involution_product(&moduli, &es).unwrap();
        let mut bad = es.clone();
        bad[1] = [2, 0, 0, 1];
        assert_eq!(norm_one_construction(&bad, &h_prime, true).unwrap_err(), EntangleError::NotOrderTwo(1));
        bad[1] = identity();
        assert_eq!(norm_one_construction(&bad, &h_prime, true).unwrap_err(), EntangleError::NotOrderTwo(1));

        // diag(-1, 1) is an involution that does not commute with a transvection.
        let ambient = generate_closure(
            &[5, 7, 11],
            &[
                MatrixTuple::new(vec![[4, 0, 0, 1], identity(), identity()]),
                MatrixTuple::new(vec![[1, 1, 0, 1], identity(), identity()]),
                MatrixTuple::embed(3, 1, MINUS_ONE(7)),
                MatrixTuple::embed(3, 2, MINUS_ONE(11)),
            ],
            DEFAULT_CAP,
        )
        .unwrap();
        let es = [[4, 0, 0, 1], MINUS_ONE(7), MINUS_ONE(11)];
        assert_eq!(norm_one_construction(&es, &ambient, true).unwrap_err(), EntangleError::NotCentral(0));
        let h = norm_one_construction(&es, &ambient, false).unwrap();
        assert_eq!(delta_exact(&h), rat(0, 1));

        let two = full_product(&[2, 3], DEFAULT_CAP).unwrap();
        assert!(matches!(
            norm_one_construction(&[[0, 1, 1, 0], MINUS_ONE(3)], &two, false),
            Err(EntangleError::ComponentCount { expected: 3, got: 2 })
        ));
    }

    /// `S_3 x S_3 x AGL_1(F_5)` realized inside `GL_2(F_2) x GL_2(F_3) x
    /// GL_2(F_5)` with non-central involutions; the norm-one subgroup has
    /// index 180.
    #[test]
    fn degree_180_example() {
        let id = identity();
        let gens = vec![
            MatrixTuple::new(vec![[1, 1, 0, 1], id, id]),
            MatrixTuple::new(vec![[0, 1, 1, 0], id, id]),
            MatrixTuple::new(vec![id, [1, 1, 0, 1], id]),
            MatrixTuple::new(vec![id, [2, 0, 0, 1], id]),
            MatrixTuple::new(vec![id, id, [2, 0, 0, 1]]),
            MatrixTuple::new(vec![id, id, [1, 1, 0, 1]]),
        ];
        let g = generate_closure(&[2, 3, 5], &gens, DEFAULT_CAP).unwrap();
        assert_eq!(g.order(), 6 * 6 * 20);
        let es = [[0, 1, 1, 0], [2, 0, 0, 1], [4, 0, 0, 1]];
        assert!(norm_one_construction(&es, &g, true).is_err());
        let h = norm_one_construction(&es, &g, false).unwrap();
        assert_eq!(g.order() / h.order(), 180);
        assert_eq!(delta_exact(&h), rat(0, 1));
        assert!(delta_exact(&g) > rat(0, 1));
    }

    #[test]
    fn direct_product_multiplicativity() {
        let a = full_product(&[2, 3], DEFAULT_CAP).unwrap();
        let b = full_product(&[5], DEFAULT_CAP).unwrap();
        let ab = full_product(&[2, 3, 5], DEFAULT_CAP).unwrap();
        assert_eq!(delta_exact(&ab), delta_exact(&a) * delta_exact(&b));

        let k = involution_product(&[7, 11, 13], &[MINUS_ONE(7), MINUS_ONE(11), MINUS_ONE(13)]).unwrap();
        let k2 = generate_closure(
            &[7, 11, 13, 2],
            &[
                MatrixTuple::new(vec![MINUS_ONE(7), MINUS_ONE(11), identity(), identity()]),
                MatrixTuple::new(vec![identity(), MINUS_ONE(11), MINUS_ONE(13), identity()]),
                MatrixTuple::embed(4, 3, [1, 1, 0, 1]),
                MatrixTuple::embed(4, 3, [0, 1, 1, 0]),
            ],
            DEFAULT_CAP,
        )
        .unwrap();
        assert_eq!(k2.order(), 24);
        assert_eq!(delta_exact(&k2), rat(0, 1));
        assert_eq!(delta_exact(&k), rat(1, 8));
    }

    #[test]
    fn index2_examples() {
        let m = index2_character_subgroup(&[CharacterFactor::sign(2), CharacterFactor::sign(2)]).unwrap();
        assert_eq!(m.group_order, BigUint::from(2u32));
        assert_eq!(m.density, rat(1, 2));

        let m = index2_character_subgroup(&[CharacterFactor::sign(6), CharacterFactor::sign(13200)]).unwrap();
        let alpha = charsum_alpha(&BTreeMap::from([(2, 6), (11, 13200)])).unwrap();
        assert_eq!(m.density, alpha * rat(5, 6) * rat(13199, 13200));

        assert_eq!(index2_character_subgroup(&[CharacterFactor::sign(6)]), Err(EntangleError::TooFewFactors));
        let bad = CharacterFactor { size: 6, kernel_size: 6 };
        assert_eq!(
            index2_character_subgroup(&[CharacterFactor::sign(6), bad]),
            Err(EntangleError::CharacterNotSurjective(1))
        );
    }

    /// Materialize `Z/n_1 x ... x Z/n_k` with the character "parity of the
    /// residue" and count the kernel directly.
    fn explicit_index2(sizes: &[u64]) -> Rational {
        let total: u64 = sizes.iter().product();
        let (mut order, mut good) = (0u64, 0u64);
        for mut code in 0..total {
            let mut parity = 0;
            let mut nontrivial = true;
            for &n in sizes {
                let x = code % n;
                code /= n;
                parity ^= x & 1;
                nontrivial &= x != 0;
            }
            if parity == 0 {
                order += 1;
                good += nontrivial as u64;
            }
        }
        rat(good as i64, order as i64)
    }

    #[test]
    fn index2_matches_explicit_enumeration() {
        for sizes in [vec![2, 2], vec![6, 4], vec![2, 6, 10], vec![8, 12, 2, 4], vec![48, 6]] {
            let factors: Vec<_> = sizes.iter().map(|&n| CharacterFactor::sign(n)).collect();
            assert_eq!(index2_character_subgroup(&factors).unwrap().density, explicit_index2(&sizes), "{sizes:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn index2_matches_charsum(halves in prop::collection::vec(1u64..5000, 2..5)) {
            let sizes: Vec<u64> = halves.iter().map(|h| 2 * h).collect();
            let factors: Vec<_> = sizes.iter().map(|&n| CharacterFactor::sign(n)).collect();
            let model = index2_character_subgroup(&factors).unwrap();
            let degrees: BTreeMap<u64, u128> =
                sizes.iter().enumerate().map(|(i, &n)| (i as u64, n as u128)).collect();
            let naive = sizes.iter().fold(rat(1, 1), |acc, &n| acc * rat(n as i64 - 1, n as i64));
            prop_assert_eq!(model.density, charsum_alpha(&degrees).unwrap() * naive);
        }

        #[test]
        fn index2_matches_enumeration(halves in prop::collection::vec(1u64..8, 2..5)) {
            let sizes: Vec<u64> = halves.iter().map(|h| 2 * h).collect();
            let factors: Vec<_> = sizes.iter().map(|&n| CharacterFactor::sign(n)).collect();
            prop_assert_eq!(index2_character_subgroup(&factors).unwrap().density, explicit_index2(&sizes));
        }
    }

    #[test]
    fn description_round_trip() {
        let text = r#"{"moduli":[7,11,13],"generators":[[[-1,0,0,-1],[1,0,0,1],[1,0,0,1]],[[1,0,0,1],[-1,0,0,-1],[1,0,0,1]],[[1,0,0,1],[1,0,0,1],[-1,0,0,-1]]],"construction":{"norm_one":{"elements":[[-1,0,0,-1],[-1,0,0,-1],[-1,0,0,-1]]}}}"#;
        let desc = GroupDescription::from_json(text).unwrap();
        let s = desc.evaluate().unwrap();
        assert_eq!(s.order, "4");
        assert_eq!(s.delta_exact, "0");
        assert_eq!(s.naive, "1/8");

        let desc = GroupDescription::from_json(r#"{"moduli":[2,3],"full_product":true}"#).unwrap();
        assert_eq!(desc.evaluate().unwrap().delta_exact, "235/288");

        let desc = GroupDescription::from_json(r#"{"construction":{"index2":{"factor_sizes":[2,2]}}}"#).unwrap();
        let s = desc.evaluate().unwrap();
        assert_eq!((s.delta_exact.as_str(), s.alpha.as_deref()), ("1/2", Some("2")));

        assert!(GroupDescription::from_json(r#"{"moduli":[2],"bogus":1}"#).is_err());
    }
}
