//! Parametric polynomial curves `x(s), y(s)` and their least-squares fits.
//!
//! Coefficients are stored highest power first, in the caller's parameter
//! units (seconds for trajectories, meters of travelled distance for map
//! segments). Internally every fit is solved on the parameter shifted to its
//! midpoint and scaled to `[-1, 1]`, then mapped back; solving directly in raw
//! units is hopeless for long segments at degree 7 or more.
//!
//! The solver is a square-root-free modified Gram-Schmidt, so the same code
//! runs on floats and on exact field types.

use thiserror::Error;

use crate::geo::TimedSample;
use crate::geom::PlanarPoint;
use crate::scalar::{abs_value, from_usize, is_finite_value, lit, Field};

/// Condition estimate of the scaled normal matrix above which a fit is refused.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("underdetermined fit: {samples} samples for {unknowns} unknowns")]
    Underdetermined { samples: usize, unknowns: usize },
    #[error("ill-conditioned fit (condition estimate {estimate:e})")]
    IllConditioned { estimate: f64 },
    #[error("invalid fit input: {0}")]
    InvalidInput(String),
}

/// A pair of same-degree polynomials over one scalar parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve2D<T> {
    coeffs_x: Vec<T>,
    coeffs_y: Vec<T>,
    param_range: (T, T),
}

/// Result of evaluating a curve, flagging parameters outside its fitted range.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T> {
    pub point: PlanarPoint<T>,
    pub extrapolated: bool,
}

/// A hard equality constraint `curve(param) == point` for [`fit_pinned`].
#[derive(Debug, Clone, PartialEq)]
pub struct Pin<T> {
    pub param: T,
    pub point: PlanarPoint<T>,
}

fn horner<T: Field>(coeffs: &[T], s: &T) -> T {
    coeffs
        .iter()
        .fold(T::zero(), |acc, c| acc * s.clone() + c.clone())
}

/// Derivative coefficients, highest power first.
fn differentiate<T: Field>(coeffs: &[T]) -> Vec<T> {
    let d = coeffs.len().saturating_sub(1);
    if d == 0 {
        return vec![T::zero()];
    }
    coeffs[..d]
        .iter()
        .enumerate()
        .map(|(i, c)| c.clone() * from_usize::<T>(d - i))
        .collect()
}

impl<T: Field> Curve2D<T> {
    /// Builds a curve from highest-power-first coefficient vectors.
    pub fn new(coeffs_x: Vec<T>, coeffs_y: Vec<T>, param_range: (T, T)) -> Result<Self, FitError> {
        if coeffs_x.is_empty() || coeffs_x.len() != coeffs_y.len() {
            return Err(FitError::InvalidInput(format!(
                "coefficient vectors must be non-empty and equal length (got {} and {})",
                coeffs_x.len(),
                coeffs_y.len()
            )));
        }
        if !(param_range.0 <= param_range.1) {
            return Err(FitError::InvalidInput("parameter range is reversed".into()));
        }
        let all_finite = coeffs_x
            .iter()
            .chain(&coeffs_y)
            .chain([&param_range.0, &param_range.1])
            .all(is_finite_value);
        if !all_finite {
            return Err(FitError::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self {
            coeffs_x,
            coeffs_y,
            param_range,
        })
    }

    /// Constant curve at `p`.
    pub fn constant(p: PlanarPoint<T>, param_range: (T, T)) -> Self {
        Self {
            coeffs_x: vec![p.x],
            coeffs_y: vec![p.y],
            param_range,
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs_x.len() - 1
    }

    pub fn coeffs_x(&self) -> &[T] {
        &self.coeffs_x
    }

    pub fn coeffs_y(&self) -> &[T] {
        &self.coeffs_y
    }

    pub fn param_range(&self) -> &(T, T) {
        &self.param_range
    }

    pub fn with_param_range(mut self, lo: T, hi: T) -> Self {
        self.param_range = (lo, hi);
        self
    }

    /// Horner evaluation at `s`, flagging extrapolation.
    pub fn evaluate(&self, s: &T) -> Evaluation<T> {
        let extrapolated = *s < self.param_range.0 || *s > self.param_range.1;
        Evaluation {
            point: self.point_at(s),
            extrapolated,
        }
    }

    /// Horner evaluation at `s` without range metadata.
    pub fn point_at(&self, s: &T) -> PlanarPoint<T> {
        PlanarPoint::new(horner(&self.coeffs_x, s), horner(&self.coeffs_y, s))
    }

    /// Analytic first derivative `(dx/ds, dy/ds)` at `s`.
    pub fn derivative_at(&self, s: &T) -> (T, T) {
        let d = self.derivative();
        (horner(&d.coeffs_x, s), horner(&d.coeffs_y, s))
    }

    /// The derivative curve, same parameter range, degree reduced by one
    /// (degree 0 stays a zero constant).
    pub fn derivative(&self) -> Self {
        Self {
            coeffs_x: differentiate(&self.coeffs_x),
            coeffs_y: differentiate(&self.coeffs_y),
            param_range: self.param_range.clone(),
        }
    }

    /// `n` points at equally spaced parameters from `s0` to `s1` inclusive.
    pub fn sample_uniform(
        &self,
        s0: &T,
        s1: &T,
        n: usize,
    ) -> Result<Vec<PlanarPoint<T>>, FitError> {
        if n < 2 || !(*s0 < *s1) {
            return Err(FitError::InvalidInput(
                "sample_uniform needs n >= 2 and s0 < s1".into(),
            ));
        }
        let step = (s1.clone() - s0.clone()) / from_usize::<T>(n - 1);
        Ok((0..n)
            .map(|k| {
                let s = if k == n - 1 {
                    s1.clone()
                } else {
                    s0.clone() + step.clone() * from_usize::<T>(k)
                };
                self.point_at(&s)
            })
            .collect())
    }

    /// Sum of squared residuals of both coordinates over `(params, points)`.
    pub fn sse(&self, params: &[T], points: &[PlanarPoint<T>]) -> T {
        params.iter().zip(points).fold(T::zero(), |acc, (s, p)| {
            let q = self.point_at(s);
            let dx = q.x - p.x.clone();
            let dy = q.y - p.y.clone();
            acc + dx.clone() * dx + dy.clone() * dy
        })
    }
}

/// Fits a curve of `degree` through timestamped samples.
pub fn fit_curve<T: Field>(
    samples: &[TimedSample<T>],
    degree: usize,
) -> Result<Curve2D<T>, FitError> {
    let params: Vec<T> = samples.iter().map(|s| s.t.clone()).collect();
    let points: Vec<PlanarPoint<T>> = samples.iter().map(|s| s.p.clone()).collect();
    fit_points(&params, &points, degree)
}

/// Unconstrained least-squares fit of `x(s)` and `y(s)`, solved independently.
pub fn fit_points<T: Field>(
    params: &[T],
    points: &[PlanarPoint<T>],
    degree: usize,
) -> Result<Curve2D<T>, FitError> {
    fit_pinned(params, points, degree, &[])
}

/// Least-squares fit subject to exact interpolation of every pin.
///
/// The curve is written as `h(u) + w(u) q(u)` where `h` interpolates the pins,
/// `w` vanishes on them and `q` is the free part fitted to the residual
/// targets. With no pins this is the ordinary fit. The resulting parameter
/// range covers the data and the pins.
pub fn fit_pinned<T: Field>(
    params: &[T],
    points: &[PlanarPoint<T>],
    degree: usize,
    pins: &[Pin<T>],
) -> Result<Curve2D<T>, FitError> {
    if params.len() != points.len() {
        return Err(FitError::InvalidInput(format!(
            "{} parameters for {} points",
            params.len(),
            points.len()
        )));
    }
    if pins.len() > degree + 1 {
        return Err(FitError::InvalidInput(format!(
            "{} pins exceed the {} coefficients of degree {degree}",
            pins.len(),
            degree + 1
        )));
    }
    let free = degree + 1 - pins.len();
    if params.len() < free || (pins.is_empty() && params.is_empty()) {
        return Err(FitError::Underdetermined {
            samples: params.len(),
            unknowns: free,
        });
    }
    let finite = params
        .iter()
        .chain(points.iter().flat_map(|p| [&p.x, &p.y]))
        .chain(pins.iter().flat_map(|p| [&p.param, &p.point.x, &p.point.y]))
        .all(is_finite_value);
    if !finite {
        return Err(FitError::InvalidInput("non-finite sample".into()));
    }

    let all_params = params.iter().chain(pins.iter().map(|p| &p.param));
    let (lo, hi) = all_params.fold((None::<T>, None::<T>), |(lo, hi), s| {
        let lo = match lo {
            Some(l) if l <= *s => Some(l),
            _ => Some(s.clone()),
        };
        let hi = match hi {
            Some(h) if h >= *s => Some(h),
            _ => Some(s.clone()),
        };
        (lo, hi)
    });
    let (lo, hi) = (lo.expect("non-empty"), hi.expect("non-empty"));
    let two = lit::<T>(2.0);
    let mid = (lo.clone() + hi.clone()) / two.clone();
    let mut half = (hi.clone() - lo.clone()) / two;
    if half == T::zero() {
        if degree == 0 && pins.len() <= 1 {
            half = T::one();
        } else {
            return Err(FitError::IllConditioned {
                estimate: f64::INFINITY,
            });
        }
    }
    let scale = |s: &T| (s.clone() - mid.clone()) / half.clone();

    for (i, a) in pins.iter().enumerate() {
        if pins[..i].iter().any(|b| b.param == a.param) {
            return Err(FitError::InvalidInput("duplicate pin parameter".into()));
        }
    }

    // h: Lagrange interpolant through the pins, w: product of (u - u_j).
    let pin_u: Vec<T> = pins.iter().map(|p| scale(&p.param)).collect();
    let mut w = vec![T::one()];
    for u in &pin_u {
        w = mul_linear(&w, &-u.clone(), &T::one());
    }
    let mut hx = vec![T::zero()];
    let mut hy = vec![T::zero()];
    for (j, pin) in pins.iter().enumerate() {
        let mut basis = vec![T::one()];
        let mut denom = T::one();
        for (k, uk) in pin_u.iter().enumerate() {
            if k != j {
                basis = mul_linear(&basis, &-uk.clone(), &T::one());
                denom = denom * (pin_u[j].clone() - uk.clone());
            }
        }
        hx = add_scaled(&hx, &basis, &(pin.point.x.clone() / denom.clone()));
        hy = add_scaled(&hy, &basis, &(pin.point.y.clone() / denom));
    }

    let mut px = hx.clone();
    let mut py = hy.clone();
    if free > 0 {
        let us: Vec<T> = params.iter().map(scale).collect();
        let wu: Vec<T> = us.iter().map(|u| eval_low(&w, u)).collect();
        let tx: Vec<T> = us
            .iter()
            .zip(points)
            .map(|(u, p)| p.x.clone() - eval_low(&hx, u))
            .collect();
        let ty: Vec<T> = us
            .iter()
            .zip(points)
            .map(|(u, p)| p.y.clone() - eval_low(&hy, u))
            .collect();
        let (cx, cy) = if is_exact::<T>() {
            exact_least_squares(&us, &wu, free, &tx, &ty)?
        } else {
            let columns: Vec<Vec<T>> = (0..free)
                .map(|k| {
                    us.iter()
                        .zip(&wu)
                        .map(|(u, wv)| wv.clone() * pow(u, k))
                        .collect()
                })
                .collect();
            least_squares(&columns, &tx, &ty)?
        };
        px = add_poly(&px, &mul_poly(&w, &cx));
        py = add_poly(&py, &mul_poly(&w, &cy));
    }
    px.resize(degree + 1, T::zero());
    py.resize(degree + 1, T::zero());

    // u = alpha * s + beta
    let alpha = T::one() / half.clone();
    let beta = -mid / half;
    let mut ax = compose_affine(&px, &alpha, &beta);
    let mut ay = compose_affine(&py, &alpha, &beta);
    ax.reverse();
    ay.reverse();
    Curve2D::new(ax, ay, (lo, hi))
}

/// Solves two least-squares problems sharing the design `columns` with a
/// square-root-free modified Gram-Schmidt factorisation `A = Q R`
/// (`R` unit upper triangular, `Q` orthogonal columns).
fn least_squares<T: Field>(
    columns: &[Vec<T>],
    bx: &[T],
    by: &[T],
) -> Result<(Vec<T>, Vec<T>), FitError> {
    let m = columns.len();
    let dot = |a: &[T], b: &[T]| {
        a.iter()
            .zip(b)
            .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
    };
    let mut q: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut qnorm: Vec<T> = Vec::with_capacity(m);
    let mut r = vec![vec![T::zero(); m]; m];
    let mut max_col = T::zero();
    for (k, col) in columns.iter().enumerate() {
        let col_norm = dot(col, col);
        if col_norm > max_col {
            max_col = col_norm;
        }
        let mut v = col.clone();
        for j in 0..k {
            let rjk = dot(&q[j], &v) / qnorm[j].clone();
            for (vi, qi) in v.iter_mut().zip(&q[j]) {
                *vi = vi.clone() - rjk.clone() * qi.clone();
            }
            r[j][k] = rjk;
        }
        let nv = dot(&v, &v);
        if nv == T::zero() {
            return Err(FitError::IllConditioned {
                estimate: f64::INFINITY,
            });
        }
        q.push(v);
        qnorm.push(nv);
    }
    let min_q = qnorm
        .iter()
        .fold(None::<T>, |m, v| match m {
            Some(x) if x <= *v => Some(x),
            _ => Some(v.clone()),
        })
        .expect("at least one column");
    if max_col > lit::<T>(MAX_CONDITION) * min_q.clone() {
        let estimate = (max_col / min_q).to_f64().unwrap_or(f64::INFINITY);
        return Err(FitError::IllConditioned { estimate });
    }

    let solve = |b: &[T]| -> Vec<T> {
        let mut res = b.to_vec();
        let mut z = vec![T::zero(); m];
        for j in 0..m {
            z[j] = dot(&q[j], &res) / qnorm[j].clone();
            for (ri, qi) in res.iter_mut().zip(&q[j]) {
                *ri = ri.clone() - z[j].clone() * qi.clone();
            }
        }
        let mut x = vec![T::zero(); m];
        for k in (0..m).rev() {
            let mut v = z[k].clone();
            for j in k + 1..m {
                v = v - r[k][j].clone() * x[j].clone();
            }
            x[k] = v;
        }
        x
    };
    Ok((solve(bx), solve(by)))
}

/// Whether `T` represents `1 + 2^-200` distinctly from 1, as rationals do.
fn is_exact<T: Field>() -> bool {
    T::one() + lit::<T>(2f64.powi(-200)) != T::one()
}

/// Exact solution of the normal equations for the columns `w(u) u^k`.
///
/// The Gram matrix only depends on `i + j`, so it is built from `2m - 1`
/// moments; Gaussian elimination then solves it without rounding.
fn exact_least_squares<T: Field>(
    us: &[T],
    wu: &[T],
    m: usize,
    bx: &[T],
    by: &[T],
) -> Result<(Vec<T>, Vec<T>), FitError> {
    let mut moments = vec![T::zero(); 2 * m - 1];
    let mut rx = vec![T::zero(); m];
    let mut ry = vec![T::zero(); m];
    for (l, (u, w)) in us.iter().zip(wu).enumerate() {
        let mut p = w.clone() * w.clone();
        let mut q = w.clone();
        for (k, slot) in moments.iter_mut().enumerate() {
            *slot = slot.clone() + p.clone();
            if k < m {
                rx[k] = rx[k].clone() + q.clone() * bx[l].clone();
                ry[k] = ry[k].clone() + q.clone() * by[l].clone();
                q = q * u.clone();
            }
            p = p * u.clone();
        }
    }
    let mut a: Vec<Vec<T>> = (0..m)
        .map(|i| {
            let mut row: Vec<T> = moments[i..i + m].to_vec();
            row.push(rx[i].clone());
            row.push(ry[i].clone());
            row
        })
        .collect();
    for k in 0..m {
        // The Gram matrix is positive definite unless the design is singular.
        if a[k][k] == T::zero() {
            return Err(FitError::IllConditioned {
                estimate: f64::INFINITY,
            });
        }
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot = &top[k];
        for row in rest {
            let f = row[k].clone() / pivot[k].clone();
            for (v, p) in row[k..].iter_mut().zip(&pivot[k..]) {
                *v = v.clone() - f.clone() * p.clone();
            }
        }
    }
    let mut x = vec![T::zero(); m];
    let mut y = vec![T::zero(); m];
    for k in (0..m).rev() {
        let mut vx = a[k][m].clone();
        let mut vy = a[k][m + 1].clone();
        for j in k + 1..m {
            vx = vx - a[k][j].clone() * x[j].clone();
            vy = vy - a[k][j].clone() * y[j].clone();
        }
        x[k] = vx / a[k][k].clone();
        y[k] = vy / a[k][k].clone();
    }
    Ok((x, y))
}

// Polynomials below are lowest power first.

fn pow<T: Field>(u: &T, k: usize) -> T {
    (0..k).fold(T::one(), |acc, _| acc * u.clone())
}

fn eval_low<T: Field>(p: &[T], u: &T) -> T {
    p.iter()
        .rev()
        .fold(T::zero(), |acc, c| acc * u.clone() + c.clone())
}

/// `p * (b + a u)`
fn mul_linear<T: Field>(p: &[T], b: &T, a: &T) -> Vec<T> {
    let mut out = vec![T::zero(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i] = out[i].clone() + c.clone() * b.clone();
        out[i + 1] = out[i + 1].clone() + c.clone() * a.clone();
    }
    out
}

fn mul_poly<T: Field>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

fn add_poly<T: Field>(a: &[T], b: &[T]) -> Vec<T> {
    add_scaled(a, b, &T::one())
}

fn add_scaled<T: Field>(a: &[T], b: &[T], k: &T) -> Vec<T> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(T::zero);
            let y = b.get(i).cloned().unwrap_or_else(T::zero);
            x + y * k.clone()
        })
        .collect()
}

/// Coefficients of `p(alpha s + beta)` in powers of `s`.
fn compose_affine<T: Field>(p: &[T], alpha: &T, beta: &T) -> Vec<T> {
    let mut out = vec![T::zero()];
    for c in p.iter().rev() {
        out = mul_linear(&out, beta, alpha);
        out[0] = out[0].clone() + c.clone();
    }
    out.truncate(p.len());
    out
}

/// Largest absolute coefficient, used for relative comparisons in tests.
pub fn max_abs_coeff<T: Field>(c: &Curve2D<T>) -> T {
    c.coeffs_x
        .iter()
        .chain(&c.coeffs_y)
        .map(abs_value)
        .fold(T::zero(), |m, v| if v > m { v } else { m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn pt(x: f64, y: f64) -> PlanarPoint<f64> {
        PlanarPoint::new(x, y)
    }

    fn naive_eval(coeffs: &[f64], s: f64) -> f64 {
        let d = coeffs.len() - 1;
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * s.powi((d - i) as i32))
            .sum()
    }

    /// Independent oracle: explicit normal equations in raw units solved by
    /// Gaussian elimination with partial pivoting.
    #[allow(clippy::needless_range_loop)]
    fn normal_equations_oracle(ts: &[f64], vs: &[f64], degree: usize) -> Vec<f64> {
        let m = degree + 1;
        let mut a = vec![vec![0.0; m + 1]; m];
        for (t, v) in ts.iter().zip(vs) {
            let row: Vec<f64> = (0..m).map(|k| t.powi((degree - k) as i32)).collect();
            for i in 0..m {
                for j in 0..m {
                    a[i][j] += row[i] * row[j];
                }
                a[i][m] += row[i] * v;
            }
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())
                .unwrap();
            a.swap(c, p);
            for r in c + 1..m {
                let f = a[r][c] / a[c][c];
                for k in c..=m {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
        let mut x = vec![0.0; m];
        for i in (0..m).rev() {
            let s: f64 = (i + 1..m).map(|j| a[i][j] * x[j]).sum();
            x[i] = (a[i][m] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn exact_cubic_recovery() {
        let samples: Vec<_> = (0..10)
            .map(|i| {
                let t = i as f64 * 0.7 - 2.0;
                TimedSample::new(t, pt(2.0 * t.powi(3) - t + 4.0, t * t))
            })
            .collect();
        let c = fit_curve(&samples, 3).unwrap();
        for (got, want) in c.coeffs_x().iter().zip([2.0, 0.0, -1.0, 4.0]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        for (got, want) in c.coeffs_y().iter().zip([0.0, 1.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        assert_eq!(c.param_range(), &(-2.0, 4.3));
    }

    #[test]
    fn constant_samples() {
        let samples: Vec<_> = (0..7)
            .map(|t| TimedSample::new(t as f64, pt(5.0, 7.0)))
            .collect();
        let c = fit_curve(&samples, 3).unwrap();
        for (i, (x, y)) in c.coeffs_x().iter().zip(c.coeffs_y()).enumerate() {
            let (wx, wy) = if i == 3 { (5.0, 7.0) } else { (0.0, 0.0) };
            assert!((x - wx).abs() < 1e-9 && (y - wy).abs() < 1e-9);
        }
    }

    #[test]
    fn noisy_fit_matches_normal_equations_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let truth = [0.02, -0.3, 1.5, 10.0];
        let ts: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        let xs: Vec<f64> = ts
            .iter()
            .map(|&t| naive_eval(&truth, t) + noise.sample(&mut rng))
            .collect();
        let ys: Vec<f64> = ts
            .iter()
            .map(|&t| -naive_eval(&truth, t) + noise.sample(&mut rng))
            .collect();
        let pts: Vec<_> = xs.iter().zip(&ys).map(|(&x, &y)| pt(x, y)).collect();
        let c = fit_points(&ts, &pts, 3).unwrap();
        let ox = normal_equations_oracle(&ts, &xs, 3);
        let oy = normal_equations_oracle(&ts, &ys, 3);
        for (a, b) in c
            .coeffs_x()
            .iter()
            .zip(&ox)
            .chain(c.coeffs_y().iter().zip(&oy))
        {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-12), "{a} vs {b}");
        }
    }

    #[test]
    fn evaluate_and_flags() {
        let c = Curve2D::new(
            vec![2.0, 0.0, -1.0, 4.0],
            vec![1.0, 0.0, 0.0, 0.0],
            (0.0, 1.0),
        )
        .unwrap();
        let e = c.evaluate(&1.0);
        assert_eq!(e.point.x, 5.0);
        assert!(!e.extrapolated);
        assert_eq!(c.point_at(&0.0), pt(4.0, 0.0));
        assert!(c.evaluate(&1.5).extrapolated);
        assert!(c.evaluate(&-0.1).extrapolated);
        assert_eq!(c.derivative_at(&1.0).0, 5.0);
    }

    #[test]
    fn degree_zero_derivative_is_zero() {
        let c = Curve2D::constant(pt(3.0, 4.0), (0.0, 1.0));
        assert_eq!(c.derivative_at(&17.0), (0.0, 0.0));
        assert_eq!(c.derivative().degree(), 0);
    }

    #[test]
    fn sample_uniform_endpoints_and_constant() {
        let c = Curve2D::new(vec![1.0, -2.0, 0.5], vec![0.3, 0.0, 1.0], (0.0, 3.0)).unwrap();
        let two = c.sample_uniform(&0.5, &2.5, 2).unwrap();
        assert_eq!(two, vec![c.point_at(&0.5), c.point_at(&2.5)]);
        let k = Curve2D::constant(pt(1.0, 2.0), (0.0, 1.0));
        assert!(k
            .sample_uniform(&0.0, &9.0, 5)
            .unwrap()
            .iter()
            .all(|p| *p == pt(1.0, 2.0)));
        let many = c.sample_uniform(&-1.0, &4.0, 101).unwrap();
        for (k, p) in many.iter().enumerate() {
            let s = if k == 100 {
                4.0
            } else {
                -1.0 + k as f64 * 0.05
            };
            assert_eq!(*p, c.point_at(&s));
        }
        assert!(c.sample_uniform(&0.0, &1.0, 1).is_err());
        assert!(c.sample_uniform(&1.0, &1.0, 3).is_err());
    }

    #[test]
    fn error_paths() {
        let pts = vec![pt(0.0, 0.0); 3];
        assert!(matches!(
            fit_points(&[0.0, 1.0, 2.0], &pts, 3),
            Err(FitError::Underdetermined {
                samples: 3,
                unknowns: 4
            })
        ));
        assert!(matches!(
            fit_points(&[1.0; 5], &[pt(0.0, 0.0); 5], 2),
            Err(FitError::IllConditioned { .. })
        ));
        // Two distinct parameters cannot support a quadratic.
        assert!(matches!(
            fit_points(&[1.0, 1.0, 2.0, 2.0], &[pt(0.0, 0.0); 4], 2),
            Err(FitError::IllConditioned { .. })
        ));
        assert!(fit_points(&[0.0, f64::NAN], &[pt(0.0, 0.0); 2], 1).is_err());
        assert!(Curve2D::new(vec![1.0], vec![1.0, 2.0], (0.0, 1.0)).is_err());
        assert!(Curve2D::new(vec![1.0], vec![1.0], (1.0, 0.0)).is_err());
        // Degree zero over a single repeated parameter is still a mean.
        let c = fit_points(&[3.0, 3.0], &[pt(1.0, 1.0), pt(3.0, 5.0)], 0).unwrap();
        assert_eq!(c.point_at(&0.0), pt(2.0, 3.0));
    }

    #[test]
    fn pins_are_interpolated_exactly() {
        let ts: Vec<f64> = (0..=40).map(|i| i as f64).collect();
        let pts: Vec<_> = ts.iter().map(|&t| pt(t, 0.01 * t * t)).collect();
        let pins = [
            Pin {
                param: 0.0,
                point: pt(-1.0, 0.5),
            },
            Pin {
                param: 40.0,
                point: pt(41.0, 15.0),
            },
        ];
        let c = fit_pinned(&ts, &pts, 4, &pins).unwrap();
        assert!(c.point_at(&0.0).distance(&pt(-1.0, 0.5)) < 1e-9);
        assert!(c.point_at(&40.0).distance(&pt(41.0, 15.0)) < 1e-9);
        let one = fit_pinned(&ts, &pts, 2, &pins[..1]).unwrap();
        assert!(one.point_at(&0.0).distance(&pt(-1.0, 0.5)) < 1e-9);
        // Pins outside the data widen the reported range.
        let far = [Pin {
            param: 50.0,
            point: pt(50.0, 25.0),
        }];
        assert_eq!(
            fit_pinned(&ts, &pts, 2, &far).unwrap().param_range(),
            &(0.0, 50.0)
        );
    }

    #[test]
    fn exact_rational_fit() {
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        let coeffs = [r(3, 7), r(-2, 1), r(0, 1), r(5, 3)];
        let params: Vec<BigRational> = (0..9).map(|k| r(k * 13, 10)).collect();
        let pts: Vec<_> = params
            .iter()
            .map(|t| {
                let v = coeffs
                    .iter()
                    .fold(r(0, 1), |a, c| a * t.clone() + c.clone());
                PlanarPoint::new(v.clone(), -v)
            })
            .collect();
        let c = fit_points(&params, &pts, 3).unwrap();
        assert_eq!(c.coeffs_x(), &coeffs[..]);
        assert_eq!(c.sse(&params, &pts), r(0, 1));
    }

    #[test]
    fn works_in_single_precision() {
        let ts: Vec<f32> = (0..20).map(|i| i as f32 * 0.5).collect();
        let pts: Vec<_> = ts
            .iter()
            .map(|&t| PlanarPoint::new(1.0 + 2.0 * t, 3.0 - t))
            .collect();
        let c = fit_points(&ts, &pts, 1).unwrap();
        assert!((c.coeffs_x()[0] - 2.0).abs() < 1e-4);
        assert!((c.coeffs_y()[1] - 3.0).abs() < 1e-4);
    }

    fn random_curve(rng: &mut ChaCha8Rng, degree: usize) -> Curve2D<f64> {
        let cx = (0..=degree).map(|_| rng.random_range(-2.0..2.0)).collect();
        let cy = (0..=degree).map(|_| rng.random_range(-2.0..2.0)).collect();
        Curve2D::new(cx, cy, (-3.0, 3.0)).unwrap()
    }

    #[test]
    fn evaluate_matches_power_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let deg = rng.random_range(0..8);
            let c = random_curve(&mut rng, deg);
            let s = rng.random_range(-3.0..3.0);
            let p = c.point_at(&s);
            let scale = 1.0
                + naive_eval(
                    &c.coeffs_x().iter().map(|v| v.abs()).collect::<Vec<_>>(),
                    s.abs(),
                );
            assert!((p.x - naive_eval(c.coeffs_x(), s)).abs() <= 1e-12 * scale);
            assert!(
                (p.y - naive_eval(c.coeffs_y(), s)).abs() <= 1e-12 * (1.0 + 3f64.powi(8) * 2.0)
            );
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-5;
        for _ in 0..20 {
            let deg = rng.random_range(1..7);
            let c = random_curve(&mut rng, deg);
            for _ in 0..100 {
                let s = rng.random_range(-3.0..3.0);
                let (dx, dy) = c.derivative_at(&s);
                let fx = (c.point_at(&(s + h)).x - c.point_at(&(s - h)).x) / (2.0 * h);
                let fy = (c.point_at(&(s + h)).y - c.point_at(&(s - h)).y) / (2.0 * h);
                assert!((dx - fx).abs() <= 1e-6 * dx.abs().max(1.0), "{dx} vs {fx}");
                assert!((dy - fy).abs() <= 1e-6 * dy.abs().max(1.0));
            }
        }
    }

    #[test]
    fn least_squares_optimality_under_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let noise = Normal::new(0.0, 1.0).unwrap();
        for _ in 0..100 {
            let deg = rng.random_range(1..6);
            let truth = random_curve(&mut rng, deg);
            let ts: Vec<f64> = (0..30).map(|_| rng.random_range(-3.0..3.0)).collect();
            let pts: Vec<_> = ts
                .iter()
                .map(|t| {
                    let p = truth.point_at(t);
                    pt(p.x + noise.sample(&mut rng), p.y + noise.sample(&mut rng))
                })
                .collect();
            let c = fit_points(&ts, &pts, deg).unwrap();
            let base = c.sse(&ts, &pts);
            for k in 0..=deg {
                for sign in [-1e-3, 1e-3] {
                    let mut cx = c.coeffs_x().to_vec();
                    cx[k] += sign;
                    let px = Curve2D::new(cx, c.coeffs_y().to_vec(), (-3.0, 3.0)).unwrap();
                    assert!(px.sse(&ts, &pts) > base);
                    let mut cy = c.coeffs_y().to_vec();
                    cy[k] += sign;
                    let py = Curve2D::new(c.coeffs_x().to_vec(), cy, (-3.0, 3.0)).unwrap();
                    assert!(py.sse(&ts, &pts) > base);
                }
            }
        }
    }

    #[test]
    fn exact_recovery_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let deg = rng.random_range(0..=9);
            // Coordinates stay within 1e3 m over parameters within 1e3.
            let span = rng.random_range(10.0..1000.0);
            let truth_u = random_curve(&mut rng, deg);
            let n = deg + 1 + rng.random_range(0..20);
            // One jittered parameter per stratum; fully random draws can
            // cluster into a genuinely singular design.
            let ts: Vec<f64> = (0..n)
                .map(|k| (k as f64 + rng.random_range(0.0..1.0)) * span / n as f64)
                .collect();
            let pts: Vec<_> = ts
                .iter()
                .map(|t| truth_u.point_at(&(2.0 * t / span - 1.0)) * 50.0)
                .collect();
            let c = fit_points(&ts, &pts, deg).unwrap_or_else(|e| panic!("deg {deg} n {n}: {e}"));
            assert!(c.sse(&ts, &pts) <= 1e-12, "deg {deg}: {}", c.sse(&ts, &pts));
        }
    }

    #[test]
    fn refit_of_sampled_curve_is_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let deg = rng.random_range(0..6);
            let c = random_curve(&mut rng, deg);
            let n = 2 * (deg + 1) + 3;
            let pts = c.sample_uniform(&-3.0, &3.0, n).unwrap();
            let ts: Vec<f64> = (0..n)
                .map(|k| -3.0 + 6.0 * k as f64 / (n - 1) as f64)
                .collect();
            let r = fit_points(&ts, &pts, deg).unwrap();
            for (a, b) in r
                .coeffs_x()
                .iter()
                .zip(c.coeffs_x())
                .chain(r.coeffs_y().iter().zip(c.coeffs_y()))
            {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }
}
