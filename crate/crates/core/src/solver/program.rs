//! Fractional programs `max theta(x) / w(x)` over a box with linear
//! constraints, solved by bisection on the level `zeta`.
//!
//! The numerator is a quadratic and the denominator is affine. Each level
//! test maximizes `theta - zeta * w` exactly by enumerating the faces of the
//! feasible polytope and solving the stationarity system on each face, so the
//! test stays globally correct even where the ratio is not quasiconcave.

use super::SolverError;

/// Largest supported number of decision variables.
pub const MAX_DIM: usize = 4;

const FEAS_TOL: f64 = 1e-10;
const TIE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub coef: Vec<f64>,
    pub constant: f64,
}

impl Affine {
    pub fn new(coef: Vec<f64>, constant: f64) -> Self {
        Self { coef, constant }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Self {
            coef: vec![0.0; dim],
            constant: value,
        }
    }

    pub fn dim(&self) -> usize {
        self.coef.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.coef.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn is_constant(&self) -> bool {
        self.coef.iter().all(|&c| c == 0.0)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            coef: self.coef.iter().map(|c| c * k).collect(),
            constant: self.constant * k,
        }
    }

    pub fn add(&self, other: &Affine) -> Self {
        Self {
            coef: self
                .coef
                .iter()
                .zip(&other.coef)
                .map(|(a, b)| a + b)
                .collect(),
            constant: self.constant + other.constant,
        }
    }

    pub fn sub(&self, other: &Affine) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn offset(&self, k: f64) -> Self {
        Self {
            coef: self.coef.clone(),
            constant: self.constant + k,
        }
    }
}

/// `x' Q x + g' x + c` with symmetric `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub q: Vec<Vec<f64>>,
    pub g: Vec<f64>,
    pub c: f64,
}

impl Quadratic {
    pub fn zero(dim: usize) -> Self {
        Self {
            q: vec![vec![0.0; dim]; dim],
            g: vec![0.0; dim],
            c: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn from_affine(a: &Affine) -> Self {
        Self {
            q: vec![vec![0.0; a.dim()]; a.dim()],
            g: a.coef.clone(),
            c: a.constant,
        }
    }

    /// Product of two affine functions.
    pub fn product(a: &Affine, b: &Affine) -> Self {
        let n = a.dim();
        let mut q = vec![vec![0.0; n]; n];
        for (i, row) in q.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = 0.5 * (a.coef[i] * b.coef[j] + a.coef[j] * b.coef[i]);
            }
        }
        let g = (0..n)
            .map(|i| a.constant * b.coef[i] + b.constant * a.coef[i])
            .collect();
        Self {
            q,
            g,
            c: a.constant * b.constant,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.c;
        for i in 0..self.dim() {
            v += self.g[i] * x[i];
            for j in 0..self.dim() {
                v += self.q[i][j] * x[i] * x[j];
            }
        }
        v
    }

    pub fn add(&self, other: &Quadratic) -> Self {
        let n = self.dim();
        Self {
            q: (0..n)
                .map(|i| (0..n).map(|j| self.q[i][j] + other.q[i][j]).collect())
                .collect(),
            g: self.g.iter().zip(&other.g).map(|(a, b)| a + b).collect(),
            c: self.c + other.c,
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            q: self
                .q
                .iter()
                .map(|row| row.iter().map(|v| v * k).collect())
                .collect(),
            g: self.g.iter().map(|v| v * k).collect(),
            c: self.c * k,
        }
    }

    pub fn sub_affine(&self, a: &Affine) -> Self {
        self.add(&Quadratic::from_affine(&a.scale(-1.0)))
    }
}

/// `a' x <= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub a: Vec<f64>,
    pub b: f64,
}

impl LinearConstraint {
    /// `f(x) >= bound` for affine `f`.
    pub fn at_least(f: &Affine, bound: f64) -> Self {
        Self {
            a: f.coef.iter().map(|c| -c).collect(),
            b: f.constant - bound,
        }
    }

    pub fn slack(&self, x: &[f64]) -> f64 {
        self.b - self.a.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalProgram {
    pub numerator: Quadratic,
    pub denominator: Affine,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub constraints: Vec<LinearConstraint>,
}

/// Solution of a [`FractionalProgram`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Final bracket on the optimal ratio.
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

impl FractionalProgram {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.dim();
        let bad = |msg: &str| Err(SolverError::InvalidProgram(msg.to_string()));
        if n == 0 || n > MAX_DIM {
            return bad("dimension must be between 1 and 4");
        }
        if self.upper.len() != n
            || self.numerator.dim() != n
            || self.numerator.q.iter().any(|row| row.len() != n)
            || self.denominator.dim() != n
            || self.constraints.iter().any(|c| c.a.len() != n)
        {
            return bad("inconsistent dimensions");
        }
        if self
            .lower
            .iter()
            .zip(&self.upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u))
        {
            return bad("box bounds must be finite with lower <= upper");
        }
        if self.constraints.len() > 6 {
            return bad("at most 6 linear constraints are supported");
        }
        Ok(())
    }

    pub fn ratio(&self, x: &[f64]) -> f64 {
        self.numerator.eval(x) / self.denominator.eval(x)
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
            && self.constraints.iter().all(|c| c.slack(x) >= -tol)
    }

    /// Exact global maximizer of `numerator - zeta * denominator` over the
    /// feasible set, or `None` when the set is empty. Ties go to the
    /// lexicographically smallest point.
    pub fn maximize_level(&self, zeta: f64) -> Option<(Vec<f64>, f64)> {
        let objective = self.numerator.sub_affine(&self.denominator.scale(zeta));
        maximize_quadratic(&objective, &self.lower, &self.upper, &self.constraints)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum VarState {
    Lower,
    Upper,
    Free,
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Solves `m z = rhs` in place by Gaussian elimination with partial pivoting.
fn solve_dense(m: &mut [[f64; 12]], rhs: &mut [f64], n: usize) -> bool {
    let scale = m[..n]
        .iter()
        .flat_map(|row| row[..n].iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return n == 0;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot][col].abs() <= 1e-12 * scale {
            return false;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor != 0.0 {
                for k in col..n {
                    m[row][k] -= factor * m[col][k];
                }
                rhs[row] -= factor * rhs[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for k in col + 1..n {
            acc -= m[col][k] * rhs[k];
        }
        rhs[col] = acc / m[col][col];
    }
    true
}

/// Exact maximum of a quadratic over a box intersected with half-spaces.
///
/// The maximizer lies in the relative interior of some face, where it is a
/// stationary point of the objective restricted to the face's affine hull.
/// Every face (each variable at a bound or free, each constraint active or
/// not) is visited and its stationarity system solved; singular systems are
/// skipped because their maximizers reappear on lower-dimensional faces.
pub fn maximize_quadratic(
    f: &Quadratic,
    lower: &[f64],
    upper: &[f64],
    constraints: &[LinearConstraint],
) -> Option<(Vec<f64>, f64)> {
    let n = lower.len();
    let m = constraints.len();
    let mut states = [VarState::Lower; MAX_DIM];
    let mut best: Option<(Vec<f64>, f64)> = None;
    let choices = |i: usize| if lower[i] == upper[i] { 1 } else { 3 };
    let total: usize = (0..n).map(choices).product();

    for code in 0..total {
        let mut rest = code;
        for (i, state) in states.iter_mut().enumerate().take(n) {
            let k = choices(i);
            *state = match rest % k {
                0 => VarState::Lower,
                1 => VarState::Upper,
                _ => VarState::Free,
            };
            rest /= k;
        }
        let free: Vec<usize> = (0..n).filter(|&i| states[i] == VarState::Free).collect();
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = match states[i] {
                VarState::Lower => lower[i],
                VarState::Upper => upper[i],
                VarState::Free => 0.0,
            };
        }
        for mask in 0u32..(1u32 << m) {
            let active: Vec<usize> = (0..m).filter(|&j| mask & (1 << j) != 0).collect();
            if active.len() > free.len() {
                continue;
            }
            let mut point = x.clone();
            if !free.is_empty() {
                let size = free.len() + active.len();
                let mut mat = [[0.0f64; 12]; 12];
                let mut rhs = [0.0f64; 12];
                for (r, &i) in free.iter().enumerate() {
                    for (c, &j) in free.iter().enumerate() {
                        mat[r][c] = 2.0 * f.q[i][j];
                    }
                    let mut fixed = f.g[i];
                    for j in 0..n {
                        if states[j] != VarState::Free {
                            fixed += 2.0 * f.q[i][j] * x[j];
                        }
                    }
                    rhs[r] = -fixed;
                    for (c, &k) in active.iter().enumerate() {
                        mat[r][free.len() + c] = -constraints[k].a[i];
                    }
                }
                for (r, &k) in active.iter().enumerate() {
                    let row = free.len() + r;
                    for (c, &j) in free.iter().enumerate() {
                        mat[row][c] = constraints[k].a[j];
                    }
                    let mut b = constraints[k].b;
                    for j in 0..n {
                        if states[j] != VarState::Free {
                            b -= constraints[k].a[j] * x[j];
                        }
                    }
                    rhs[row] = b;
                }
                if !solve_dense(&mut mat, &mut rhs, size) {
                    continue;
                }
                for (r, &i) in free.iter().enumerate() {
                    point[i] = rhs[r];
                }
            } else if !active.is_empty() {
                continue;
            }
            let in_box = point
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| v.is_finite() && *v >= l - FEAS_TOL && *v <= u + FEAS_TOL);
            if !in_box {
                continue;
            }
            for i in 0..n {
                point[i] = point[i].clamp(lower[i], upper[i]);
            }
            if constraints.iter().any(|c| c.slack(&point) < -FEAS_TOL) {
                continue;
            }
            let value = f.eval(&point);
            let better = match &best {
                None => true,
                Some((bx, bv)) => {
                    let tie = TIE_TOL * (1.0 + bv.abs());
                    value > bv + tie || ((value - bv).abs() <= tie && lex_less(&point, bx))
                }
            };
            if better {
                best = Some((point, value));
            }
        }
    }
    best
}

/// Maximizes `theta / w` by bisection on the level `zeta` within `[0, 1]`
/// (extended upward if the first feasible point already exceeds 1).
///
/// Requires `w > 0` on the feasible set. A constant denominator is solved by a
/// single exact maximization; so is one that varies only along fixed coordinates.
pub fn bisect_quasiconcave(
    prog: &FractionalProgram,
    tol: f64,
) -> Result<ProgramSolution, SolverError> {
    prog.validate()?;
    if !(tol > 0.0) {
        return Err(SolverError::InvalidInput(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    let (x0, _) = prog.maximize_level(0.0).ok_or(SolverError::Infeasible(
        "the constraint set is empty".into(),
    ))?;
    if prog.denominator.eval(&x0) <= 0.0 {
        return Err(SolverError::DegenerateDenominator);
    }
    let fixed_denominator = prog
        .denominator
        .coef
        .iter()
        .enumerate()
        .all(|(i, &c)| c == 0.0 || prog.lower[i] == prog.upper[i]);
    if fixed_denominator {
        let value = prog.ratio(&x0);
        return Ok(ProgramSolution {
            x: x0,
            value,
            lower: value,
            upper: value,
            iterations: 1,
        });
    }

    let mut best_x = x0;
    let mut best_v = prog.ratio(&best_x);
    let mut lo = best_v.max(0.0);
    let mut hi = 1.0f64.max(lo);
    let mut iterations = 1;
    let mut last_feasible = true;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let zeta = if last_feasible {
            (lo + 0.5 * tol).min(mid)
        } else {
            mid
        };
        iterations += 1;
        match prog.maximize_level(zeta) {
            Some((x, level)) if level >= 0.0 => {
                if prog.denominator.eval(&x) <= 0.0 {
                    return Err(SolverError::DegenerateDenominator);
                }
                let v = prog.ratio(&x);
                if v > best_v {
                    best_v = v;
                    best_x = x;
                }
                lo = lo.max(zeta).max(v);
                hi = hi.max(lo);
                last_feasible = true;
            }
            _ => {
                hi = zeta;
                last_feasible = false;
            }
        }
        if iterations > 10_000 {
            break;
        }
    }
    Ok(ProgramSolution {
        x: best_x,
        value: best_v,
        lower: lo,
        upper: hi,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_dim(numerator: Quadratic, denominator: Affine) -> FractionalProgram {
        FractionalProgram {
            numerator,
            denominator,
            lower: vec![0.0],
            upper: vec![1.0],
            constraints: vec![],
        }
    }

    #[test]
    fn linear_objective() {
        let prog = one_dim(
            Quadratic::from_affine(&Affine::new(vec![1.0], 0.0)),
            Affine::constant(1, 1.0),
        );
        let sol = bisect_quasiconcave(&prog, 1e-9).unwrap();
        assert_eq!(sol.x, vec![1.0]);
        assert!((sol.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concave_over_affine_matches_grid() {
        // rho (2 - rho) / (1 + rho)
        let rho = Affine::new(vec![1.0], 0.0);
        let two_minus = Affine::new(vec![-1.0], 2.0);
        let prog = one_dim(
            Quadratic::product(&rho, &two_minus),
            Affine::new(vec![1.0], 1.0),
        );
        let sol = bisect_quasiconcave(&prog, 1e-9).unwrap();
        let grid = (0..=1_000_000)
            .map(|k| {
                let r = k as f64 / 1e6;
                r * (2.0 - r) / (1.0 + r)
            })
            .fold(f64::MIN, f64::max);
        assert!((sol.value - grid).abs() < 1e-6);
        assert!(sol.upper - sol.lower <= 1e-9);
        // Optimum at sqrt(3) - 1.
        assert!((sol.x[0] - (3f64.sqrt() - 1.0)).abs() < 1e-6);
    }

    #[test]
    fn empty_constraint_set_is_infeasible() {
        let mut prog = one_dim(
            Quadratic::from_affine(&Affine::new(vec![1.0], 0.0)),
            Affine::constant(1, 1.0),
        );
        prog.constraints.push(LinearConstraint {
            a: vec![1.0],
            b: -0.5,
        });
        assert!(matches!(
            bisect_quasiconcave(&prog, 1e-7),
            Err(SolverError::Infeasible(_))
        ));
    }

    #[test]
    fn rejects_bad_programs() {
        let prog = FractionalProgram {
            numerator: Quadratic::zero(5),
            denominator: Affine::constant(5, 1.0),
            lower: vec![0.0; 5],
            upper: vec![1.0; 5],
            constraints: vec![],
        };
        assert!(matches!(
            bisect_quasiconcave(&prog, 1e-7),
            Err(SolverError::InvalidProgram(_))
        ));
    }

    #[test]
    fn ties_prefer_smallest_point() {
        // Flat objective in the second coordinate.
        let prog = FractionalProgram {
            numerator: Quadratic::from_affine(&Affine::new(vec![1.0, 0.0], 0.0)),
            denominator: Affine::new(vec![0.0, 0.0], 1.0),
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 1.0],
            constraints: vec![],
        };
        let sol = bisect_quasiconcave(&prog, 1e-9).unwrap();
        assert_eq!(sol.x, vec![1.0, 0.0]);
    }

    #[test]
    fn constrained_quadratic_hits_the_constraint() {
        // max x + y subject to x + 2y <= 1 over the unit box.
        let f = Quadratic::from_affine(&Affine::new(vec![1.0, 1.0], 0.0));
        let c = LinearConstraint {
            a: vec![1.0, 2.0],
            b: 1.0,
        };
        let (x, v) = maximize_quadratic(&f, &[0.0, 0.0], &[1.0, 1.0], &[c]).unwrap();
        assert_eq!(x, vec![1.0, 0.0]);
        assert!((v - 1.0).abs() < 1e-12);
    }

    proptest! {
        /// Random 2-D quadratics (possibly indefinite) against a dense grid.
        #[test]
        fn face_enumeration_is_global(
            q11 in -2.0..2.0f64, q12 in -2.0..2.0f64, q22 in -2.0..2.0f64,
            g1 in -2.0..2.0f64, g2 in -2.0..2.0f64,
            a1 in -1.0..1.0f64, a2 in -1.0..1.0f64, b in 0.0..1.0f64,
        ) {
            let f = Quadratic { q: vec![vec![q11, q12], vec![q12, q22]], g: vec![g1, g2], c: 0.0 };
            let c = LinearConstraint { a: vec![a1, a2], b };
            let (x, v) = maximize_quadratic(&f, &[0.0, 0.0], &[1.0, 1.0], std::slice::from_ref(&c)).unwrap();
            prop_assert!(c.slack(&x) >= -1e-9);
            let n = 400;
            let mut grid = f64::MIN;
            for i in 0..=n {
                for j in 0..=n {
                    let p = [i as f64 / n as f64, j as f64 / n as f64];
                    if c.slack(&p) >= 0.0 {
                        grid = grid.max(f.eval(&p));
                    }
                }
            }
            prop_assert!(v >= grid - 1e-9, "exact {} < grid {}", v, grid);
            prop_assert!((v - f.eval(&x)).abs() < 1e-12);
        }
    }
}
