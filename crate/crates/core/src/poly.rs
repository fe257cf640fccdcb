//! Polynomials over `F_q`, Lagrange interpolation at zero and Birkhoff
//! interpolation from mixed value/derivative constraints.

use std::collections::HashSet;
use std::ops::{Add, Mul};

use rand::RngCore;

use crate::error::{Error, Result};
use crate::field::{FieldElement, Matrix, Modulus, Solution};

/// Coefficient vector, index `i` holding the coefficient of `X^i`.
///
/// Always normalized: no trailing zero coefficients, and the zero polynomial
/// is the single coefficient `[0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<FieldElement>,
    modulus: Modulus,
}

impl Polynomial {
    pub fn new(modulus: &Modulus, coeffs: Vec<FieldElement>) -> Result<Self> {
        if coeffs.iter().any(|c| c.modulus() != modulus) {
            return Err(Error::ModulusMismatch);
        }
        Ok(Self::normalized(modulus, coeffs))
    }

    fn normalized(modulus: &Modulus, mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(FieldElement::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(modulus.zero());
        }
        Polynomial { coeffs, modulus: modulus.clone() }
    }

    pub fn from_u64(modulus: &Modulus, coeffs: &[u64]) -> Self {
        Self::normalized(modulus, coeffs.iter().map(|&c| modulus.elem(c)).collect())
    }

    pub fn zero(modulus: &Modulus) -> Self {
        Self::normalized(modulus, Vec::new())
    }

    pub fn constant(c: FieldElement) -> Self {
        let m = c.modulus().clone();
        Self::normalized(&m, vec![c])
    }

    /// Random polynomial of degree at most `degree` with `P(0) = constant`.
    /// Every non-constant coefficient is uniform over the whole field.
    pub fn random<R: RngCore + ?Sized>(degree: usize, constant: &FieldElement, rng: &mut R) -> Self {
        let m = constant.modulus().clone();
        let mut coeffs = Vec::with_capacity(degree + 1);
        coeffs.push(constant.clone());
        coeffs.extend((0..degree).map(|_| m.random(rng)));
        Self::normalized(&m, coeffs)
    }

    /// Like [`Polynomial::random`] but with a nonzero leading coefficient,
    /// so the degree is exactly `degree`.
    pub fn random_exact_degree<R: RngCore + ?Sized>(degree: usize, constant: &FieldElement, rng: &mut R) -> Self {
        let m = constant.modulus().clone();
        if degree == 0 {
            return Self::constant(constant.clone());
        }
        let mut coeffs = Vec::with_capacity(degree + 1);
        coeffs.push(constant.clone());
        coeffs.extend((1..degree).map(|_| m.random(rng)));
        coeffs.push(m.random_nonzero(rng));
        Self::normalized(&m, coeffs)
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn constant_term(&self) -> &FieldElement {
        &self.coeffs[0]
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &FieldElement) -> Result<FieldElement> {
        if x.modulus() != &self.modulus {
            return Err(Error::ModulusMismatch);
        }
        Ok(self.horner(x))
    }

    pub fn eval_at(&self, x: u64) -> FieldElement {
        self.horner(&self.modulus.elem(x))
    }

    fn horner(&self, x: &FieldElement) -> FieldElement {
        self.coeffs.iter().rev().fold(self.modulus.zero(), |acc, c| &(&acc * x) + c)
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Polynomial {
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * &self.modulus.elem(i as u64)).collect();
        Self::normalized(&self.modulus, coeffs)
    }

    pub fn scale(&self, by: &FieldElement) -> Polynomial {
        Self::normalized(&self.modulus, self.coeffs.iter().map(|c| c * by).collect())
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = self.modulus.zero();
        let coeffs = (0..n).map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero)).collect();
        Polynomial::normalized(&self.modulus, coeffs)
    }
}

impl Mul<&FieldElement> for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &FieldElement) -> Polynomial {
        self.scale(rhs)
    }
}

fn check_abscissae(xs: &[FieldElement]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::invalid("interpolation needs at least one point"));
    }
    let mut seen = HashSet::with_capacity(xs.len());
    for x in xs {
        if x.is_zero() {
            return Err(Error::invalid("interpolation point at x = 0"));
        }
        if !seen.insert(x) {
            return Err(Error::invalid(format!("duplicate interpolation point x = {x}")));
        }
    }
    Ok(())
}

/// Lagrange basis values at zero: `w_i = prod_{j != i} x_j / (x_j - x_i)`,
/// so that `P(0) = sum_i w_i * P(x_i)` for any `P` of degree `< xs.len()`.
pub fn lagrange_weights_at_zero(xs: &[FieldElement]) -> Result<Vec<FieldElement>> {
    check_abscissae(xs)?;
    let m = xs[0].modulus().clone();
    if xs.iter().any(|x| x.modulus() != &m) {
        return Err(Error::ModulusMismatch);
    }
    xs.iter()
        .enumerate()
        .map(|(i, xi)| {
            let (num, den) = xs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold((m.one(), m.one()), |(num, den), (_, xj)| (&num * xj, &den * &(xj - xi)));
            num.try_div(&den)
        })
        .collect()
}

/// `P(0)` of the unique polynomial of degree `< points.len()` through `points`.
pub fn lagrange_at_zero(points: &[(FieldElement, FieldElement)]) -> Result<FieldElement> {
    let xs: Vec<_> = points.iter().map(|(x, _)| x.clone()).collect();
    let weights = lagrange_weights_at_zero(&xs)?;
    let m = xs[0].modulus();
    let mut acc = m.zero();
    for (w, (_, y)) in weights.iter().zip(points) {
        acc = &acc + &w.try_mul(y)?;
    }
    Ok(acc)
}

/// Value at `at` of the polynomial of degree `< points.len()` through
/// `points` (distinct abscissae; zero allowed).
pub fn lagrange_eval(points: &[(FieldElement, FieldElement)], at: &FieldElement) -> Result<FieldElement> {
    if points.is_empty() {
        return Err(Error::invalid("interpolation needs at least one point"));
    }
    let mut seen = HashSet::with_capacity(points.len());
    if !points.iter().all(|(x, _)| seen.insert(x)) {
        return Err(Error::invalid("duplicate interpolation point"));
    }
    let m = at.modulus();
    let mut acc = m.zero();
    for (i, (xi, yi)) in points.iter().enumerate() {
        let (num, den) = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .try_fold((m.one(), m.one()), |(num, den), (_, (xj, _))| -> Result<_> {
                Ok((num.try_mul(&at.try_sub(xj)?)?, &den * &(xi - xj)))
            })?;
        acc = &acc + &(&num.try_div(&den)? * yi);
    }
    Ok(acc)
}

/// Which quantity a Birkhoff constraint pins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Order {
    Value = 0,
    Derivative = 1,
}

/// `P^(order)(point) = value`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BirkhoffConstraint {
    pub point: FieldElement,
    pub order: Order,
    pub value: FieldElement,
}

impl BirkhoffConstraint {
    pub fn value(point: FieldElement, value: FieldElement) -> Self {
        BirkhoffConstraint { point, order: Order::Value, value }
    }

    pub fn derivative(point: FieldElement, value: FieldElement) -> Self {
        BirkhoffConstraint { point, order: Order::Derivative, value }
    }

    /// Coefficients of the linear functional `c -> P^(order)(point)` on the
    /// coefficient vector of a degree-`degree` polynomial.
    pub fn row(&self, degree: usize) -> Vec<FieldElement> {
        birkhoff_row(&self.point, self.order, degree)
    }
}

pub(crate) fn birkhoff_row(point: &FieldElement, order: Order, degree: usize) -> Vec<FieldElement> {
    let m = point.modulus();
    let mut row = Vec::with_capacity(degree + 1);
    let mut power = m.one();
    match order {
        Order::Value => {
            for _ in 0..=degree {
                row.push(power.clone());
                power = &power * point;
            }
        }
        Order::Derivative => {
            // d/dX X^j = j X^(j-1)
            row.push(m.zero());
            for j in 1..=degree {
                row.push(&m.elem(j as u64) * &power);
                power = &power * point;
            }
        }
    }
    row
}

/// The square Birkhoff system for `constraints` against a degree-`degree`
/// polynomial. Rejects exact `(point, order)` duplicates.
pub fn birkhoff_matrix(constraints: &[BirkhoffConstraint], degree: usize) -> Result<Matrix> {
    let m = constraints
        .first()
        .map(|c| c.point.modulus().clone())
        .ok_or_else(|| Error::invalid("no Birkhoff constraints"))?;
    let mut seen = HashSet::new();
    let mut rows = Vec::with_capacity(constraints.len());
    for c in constraints {
        if c.point.modulus() != &m || c.value.modulus() != &m {
            return Err(Error::ModulusMismatch);
        }
        if !seen.insert((c.point.clone(), c.order)) {
            return Err(Error::invalid(format!(
                "duplicate Birkhoff constraint at x = {} (order {})",
                c.point, c.order as u8
            )));
        }
        rows.push(c.row(degree));
    }
    Matrix::from_rows(&m, degree + 1, rows)
}

/// Recovers the unique polynomial of degree `<= degree` meeting exactly
/// `degree + 1` constraints, or [`Error::Unsolvable`] when the Birkhoff
/// matrix is singular.
pub fn birkhoff_solve(constraints: &[BirkhoffConstraint], degree: usize) -> Result<Polynomial> {
    if constraints.len() != degree + 1 {
        return Err(Error::invalid(format!(
            "{} constraints for a degree-{degree} polynomial (need {})",
            constraints.len(),
            degree + 1
        )));
    }
    let matrix = birkhoff_matrix(constraints, degree)?;
    let rhs: Vec<_> = constraints.iter().map(|c| c.value.clone()).collect();
    match matrix.solve(&rhs)? {
        Solution::Unique(coeffs) => Polynomial::new(matrix.modulus(), coeffs),
        _ => Err(Error::Unsolvable),
    }
}
