//! Finite windows into the ball hierarchy and the exact action of the
//! hierarchical Laplacian on them.
//!
//! A window is the set of level-j balls inside one root ball at level K. On
//! mean-zero functions supported in the root ball the infinite operator
//! restricts exactly to a finite matrix: the levels j+1..K contribute their
//! averaging projectors, and every ball strictly larger than the root
//! contributes the scalar λ_{K+1} because averages of a mean-zero function
//! over such balls vanish. The matrix therefore satisfies the eigenfunction
//! identity L f_B = λ(B') f_B for every ball B with its parent B' inside the
//! window; that identity is asserted in tests rather than assumed.

use crate::error::{Error, Result};
use crate::space::{EigenvalueProfile, HomogeneousSpace};

/// Hard cap on window size; dense matrices stay cheap below this.
pub const MAX_WINDOW_LEAVES: usize = 4096;

/// Address of a ball as the successor path descending from a root ball.
/// `path[i]` selects a successor at level `root_level - i`, so an empty path
/// addresses the root itself and `level = root_level - path.len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallAddress {
    root_level: i64,
    path: Vec<u32>,
}

impl BallAddress {
    pub fn root(root_level: i64) -> Self {
        BallAddress {
            root_level,
            path: Vec::new(),
        }
    }

    pub fn child(&self, index: u32) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        BallAddress {
            root_level: self.root_level,
            path,
        }
    }

    pub fn level(&self) -> i64 {
        self.root_level - self.path.len() as i64
    }

    pub fn root_level(&self) -> i64 {
        self.root_level
    }

    pub fn path(&self) -> &[u32] {
        &self.path
    }

    /// Two balls are nested iff one path extends the other.
    pub fn nested(&self, other: &BallAddress) -> bool {
        if self.root_level != other.root_level {
            return false;
        }
        let (short, long) = if self.path.len() <= other.path.len() {
            (&self.path, &other.path)
        } else {
            (&other.path, &self.path)
        };
        long.starts_with(short)
    }
}

/// A window: the level-`fine` balls inside one root ball.
#[derive(Clone, Debug)]
pub struct Window {
    fine: i64,
    root_level: i64,
    /// n_ℓ for ℓ = fine+1 ..= root_level
    degrees: Vec<usize>,
    /// leaves per level-(fine+i) ball, strides[0] = 1
    strides: Vec<usize>,
}

impl Window {
    pub fn new(space: &HomogeneousSpace, fine: i64, root_level: i64) -> Result<Self> {
        if fine >= root_level {
            return Err(Error::domain(format!(
                "window needs fine level {fine} < root level {root_level}"
            )));
        }
        let mut degrees = Vec::new();
        let mut strides = vec![1usize];
        for level in (fine + 1)..=root_level {
            let n = space.degree(level)? as usize;
            let next = strides
                .last()
                .unwrap()
                .checked_mul(n)
                .ok_or_else(|| Error::Resource("window leaf count overflows".into()))?;
            if next > MAX_WINDOW_LEAVES {
                return Err(Error::Resource(format!(
                    "window would hold {next} leaves, cap is {MAX_WINDOW_LEAVES}"
                )));
            }
            degrees.push(n);
            strides.push(next);
        }
        Ok(Window {
            fine,
            root_level,
            degrees,
            strides,
        })
    }

    pub fn fine_level(&self) -> i64 {
        self.fine
    }

    pub fn root_level(&self) -> i64 {
        self.root_level
    }

    pub fn leaves(&self) -> usize {
        *self.strides.last().unwrap()
    }

    /// Leaves per level-`level` ball.
    pub fn stride(&self, level: i64) -> usize {
        self.strides[(level - self.fine) as usize]
    }

    /// Half-open leaf range covered by a ball given as a path from the root.
    pub fn ball_leaf_range(&self, ball: &BallAddress) -> Result<(usize, usize)> {
        if ball.root_level() != self.root_level {
            return Err(Error::domain(
                "ball address is rooted at a different level than the window",
            ));
        }
        let level = ball.level();
        if level < self.fine {
            return Err(Error::domain(format!(
                "ball level {level} is below the window's fine level {}",
                self.fine
            )));
        }
        let mut offset = 0usize;
        for (i, &step) in ball.path().iter().enumerate() {
            let parent_level = self.root_level - i as i64;
            let n = self.degrees[(parent_level - self.fine) as usize - 1];
            if step as usize >= n {
                return Err(Error::domain(format!(
                    "path entry {step} out of range for a ball with {n} successors"
                )));
            }
            offset += step as usize * self.stride(parent_level - 1);
        }
        Ok((offset, offset + self.stride(level)))
    }

    /// Ball addresses of all balls at `level` inside the window, in leaf order.
    pub fn balls_at_level(&self, level: i64) -> Result<Vec<BallAddress>> {
        if level < self.fine || level > self.root_level {
            return Err(Error::domain(format!(
                "level {level} outside window [{}, {}]",
                self.fine, self.root_level
            )));
        }
        let mut out = vec![BallAddress::root(self.root_level)];
        let mut current = self.root_level;
        while current > level {
            let n = self.degrees[(current - self.fine) as usize - 1];
            let mut next = Vec::with_capacity(out.len() * n);
            for b in &out {
                for i in 0..n {
                    next.push(b.child(i as u32));
                }
            }
            out = next;
            current -= 1;
        }
        Ok(out)
    }
}

/// Real-valued function on the leaves of a window.
#[derive(Clone, Debug)]
pub struct TreeFunction {
    window: Window,
    values: Vec<f64>,
    mean_zero: bool,
}

impl TreeFunction {
    pub fn new(window: Window, values: Vec<f64>) -> Result<Self> {
        if values.len() != window.leaves() {
            return Err(Error::domain(format!(
                "window holds {} leaves but {} values supplied",
                window.leaves(),
                values.len()
            )));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mean_zero = mean.abs() <= 1e-12 * scale;
        Ok(TreeFunction {
            window,
            values,
            mean_zero,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn mean_zero(&self) -> bool {
        self.mean_zero
    }

    /// Mean with respect to the reference measure; leaves at one level all
    /// carry the same measure, so this is the plain average.
    pub fn weighted_mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Inner product with the V(fine) leaf weights.
    pub fn weighted_inner(&self, other: &TreeFunction, space: &HomogeneousSpace) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::domain("windows of different size"));
        }
        let w = space.volume(self.window.fine_level())?;
        Ok(w * self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>())
    }
}

/// The eigenfunction attached to a ball B strictly inside the window:
/// the normalized indicator of B minus the normalized indicator of its parent.
pub fn eigenfunction(
    space: &HomogeneousSpace,
    window: &Window,
    ball: &BallAddress,
) -> Result<TreeFunction> {
    let level = ball.level();
    if level >= window.root_level() {
        return Err(Error::domain(
            "the root ball has no parent inside the window",
        ));
    }
    if level < window.fine_level() {
        return Err(Error::domain("ball lies below the window"));
    }
    let (lo, hi) = window.ball_leaf_range(ball)?;
    let parent = BallAddress {
        root_level: ball.root_level(),
        path: ball.path()[..ball.path().len() - 1].to_vec(),
    };
    let (plo, phi) = window.ball_leaf_range(&parent)?;
    let inv_m = 1.0 / space.volume(level)?;
    let inv_mp = 1.0 / space.volume(level + 1)?;
    let mut values = vec![0.0; window.leaves()];
    for v in &mut values[plo..phi] {
        *v = -inv_mp;
    }
    for v in &mut values[lo..hi] {
        *v = inv_m - inv_mp;
    }
    TreeFunction::new(window.clone(), values)
}

/// Dense window matrix of the hierarchical Laplacian, acting on mean-zero
/// functions supported in the window's root ball.
#[derive(Clone, Debug)]
pub struct WindowOperator {
    n: usize,
    entries: Vec<f64>,
    window: Window,
}

pub fn laplacian_matrix(
    _space: &HomogeneousSpace,
    profile: &EigenvalueProfile,
    window: &Window,
) -> Result<WindowOperator> {
    let n = window.leaves();
    let fine = window.fine_level();
    let root = window.root_level();
    let depth = (root - fine) as usize;

    // S[i] = Σ_{ℓ = fine+i .. root} C_ℓ / m_ℓ  for i = 1..=depth
    let mut suffix = vec![0.0f64; depth + 2];
    for i in (1..=depth).rev() {
        let level = fine + i as i64;
        let c = profile.choice_coefficient(level)?;
        if c <= 0.0 {
            return Err(Error::domain(format!(
                "choice weight C_{level} = {c} is not positive"
            )));
        }
        suffix[i] = suffix[i + 1] + c / window.stride(level) as f64;
    }
    let lambda_fine = profile.lambda(fine + 1)?;
    let diag = lambda_fine - suffix[1];

    let mut entries = vec![0.0f64; n * n];
    for a in 0..n {
        entries[a * n + a] = diag;
        for b in (a + 1)..n {
            // coarsest level where a and b part ways determines the block sum
            let mut i = 1;
            while a / window.stride(fine + i as i64) != b / window.stride(fine + i as i64) {
                i += 1;
            }
            let v = -suffix[i];
            entries[a * n + b] = v;
            entries[b * n + a] = v;
        }
    }
    Ok(WindowOperator {
        n,
        entries,
        window: window.clone(),
    })
}

impl WindowOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }

    pub fn apply_slice(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.entries[r * self.n..(r + 1) * self.n];
            *o = row.iter().zip(values).map(|(m, v)| m * v).sum();
        }
        out
    }

    pub fn apply(&self, f: &TreeFunction) -> Result<TreeFunction> {
        if !f.mean_zero() {
            return Err(Error::domain(
                "window operator is only defined on mean-zero functions",
            ));
        }
        TreeFunction::new(self.window.clone(), self.apply_slice(f.values()))
    }

    /// Dense product self · other.
    pub fn compose(&self, other: &WindowOperator) -> Result<WindowOperator> {
        if self.n != other.n {
            return Err(Error::domain("operator size mismatch"));
        }
        let n = self.n;
        let mut entries = vec![0.0f64; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == 0.0 {
                    continue;
                }
                let row_k = &other.entries[k * n..(k + 1) * n];
                for (c, e) in entries[r * n..(r + 1) * n].iter_mut().enumerate() {
                    *e += a * row_k[c];
                }
            }
        }
        Ok(WindowOperator {
            n,
            entries,
            window: self.window.clone(),
        })
    }

    /// Largest asymmetry `|L[a,b] - L[b,a]|`; zero by construction here,
    /// kept for diagnostics of composed operators.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.n {
            for b in (a + 1)..self.n {
                worst = worst.max((self.entry(a, b) - self.entry(b, a)).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &WindowOperator) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::EigenvalueProfile;

    fn q2_setup() -> (HomogeneousSpace, EigenvalueProfile, Window) {
        let space = HomogeneousSpace::p_adic(2).unwrap();
        let profile = EigenvalueProfile::standard_from_metric(&space).unwrap();
        let window = Window::new(&space, 0, 4).unwrap();
        (space, profile, window)
    }

    #[test]
    fn leaf_ranges_follow_paths() {
        let (_space, _, window) = q2_setup();
        assert_eq!(window.leaves(), 16);
        let root = BallAddress::root(4);
        assert_eq!(window.ball_leaf_range(&root).unwrap(), (0, 16));
        let b = root.child(1); // level 3
        assert_eq!(window.ball_leaf_range(&b).unwrap(), (8, 16));
        let bb = b.child(0).child(1); // level 1
        assert_eq!(window.ball_leaf_range(&bb).unwrap(), (10, 12));
        assert!(b.nested(&bb));
        assert!(!root.child(0).nested(&bb));
        assert!(window.ball_leaf_range(&root.child(2)).is_err());
    }

    #[test]
    fn eigenfunction_shape() {
        let (space, _, window) = q2_setup();
        let ball = BallAddress::root(4).child(0).child(1); // level 2
        let f = eigenfunction(&space, &window, &ball).unwrap();
        assert!(f.mean_zero());
        assert!(f.weighted_mean().abs() < 1e-15);
        // exactly two distinct nonzero value levels
        let mut distinct: Vec<f64> = f.values().iter().cloned().filter(|v| *v != 0.0).collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        assert_eq!(distinct.len(), 2);
        let inv_m = 1.0 / space.volume(2).unwrap();
        let inv_mp = 1.0 / space.volume(3).unwrap();
        assert!(distinct.contains(&(inv_m - inv_mp)));
        assert!(distinct.contains(&(-inv_mp)));
        // the root has no parent inside the window
        assert!(eigenfunction(&space, &window, &BallAddress::root(4)).is_err());
    }

    #[test]
    fn eigenfunctions_with_disjoint_parents_are_orthogonal() {
        let (space, _, window) = q2_setup();
        let b1 = BallAddress::root(4).child(0).child(0); // parent = child(0)
        let b2 = BallAddress::root(4).child(1).child(1); // parent = child(1), disjoint
        let f1 = eigenfunction(&space, &window, &b1).unwrap();
        let f2 = eigenfunction(&space, &window, &b2).unwrap();
        let ip = f1.weighted_inner(&f2, &space).unwrap();
        assert!(ip.abs() < 1e-14);
    }

    #[test]
    fn eigen_identity_on_dyadic_window() {
        let (space, profile, window) = q2_setup();
        let op = laplacian_matrix(&space, &profile, &window).unwrap();
        assert_eq!(op.symmetry_defect(), 0.0);
        for level in 0..4i64 {
            for ball in window.balls_at_level(level).unwrap() {
                let f = eigenfunction(&space, &window, &ball).unwrap();
                let want = profile.lambda(level + 1).unwrap();
                let lf = op.apply(&f).unwrap();
                let resid = lf
                    .values()
                    .iter()
                    .zip(f.values())
                    .fold(0.0f64, |m, (l, v)| m.max((l - want * v).abs()));
                assert!(
                    resid <= 1e-12 * want,
                    "level {level}: residual {resid} vs λ = {want}"
                );
            }
        }
        // zero function maps to zero
        let zero = TreeFunction::new(window.clone(), vec![0.0; window.leaves()]).unwrap();
        assert!(op.apply(&zero).unwrap().values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn window_cap_is_enforced() {
        let space = HomogeneousSpace::p_adic(2).unwrap();
        assert!(matches!(
            Window::new(&space, 0, 13),
            Err(Error::Resource(_))
        ));
    }
}
