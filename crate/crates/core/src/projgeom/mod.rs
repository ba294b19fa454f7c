//! Holomorphic curves into ℙⁿ(ℂ), hyperplanes, and N-subgeneral position.

mod rank;
mod subsets;

pub use rank::{matrix_rank, RANK_REL_TOL};
pub use subsets::{combinations, subsets_up_to};

use num_complex::Complex64;
use thiserror::Error;

use crate::funcalg::{Eval, Expr, FuncError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("dimension mismatch: map lives in P^{map} but hyperplane has {coeffs} coefficients")]
    DimensionMismatch { map: usize, coeffs: usize },
    #[error("a mapping needs at least one component")]
    NoComponents,
    #[error("every component is identically zero")]
    AllComponentsZero,
    #[error("components share a common zero near {0} (not a reduced representation)")]
    CommonZero(Complex64),
    #[error("hyperplane `{0}` has the zero coefficient vector")]
    ZeroHyperplane(String),
    #[error("need q >= N + 1 >= n + 1, got q = {q}, N = {big_n}, n = {n}")]
    BadCounts { q: usize, big_n: usize, n: usize },
    #[error(transparent)]
    Func(#[from] FuncError),
}

/// Magnitude below which all components count as simultaneously vanishing.
pub const COMMON_ZERO_TOL: f64 = 1e-9;

/// A reduced representation `[f₀ : … : f_n]` together with the shift offset `c`.
#[derive(Clone, Debug)]
pub struct ProjectiveMap {
    components: Vec<Expr>,
    shift_offset: Complex64,
}

impl ProjectiveMap {
    /// Builds a map, rejecting all-zero maps and components with a common
    /// zero on the probe grid (integer-and-half lattice in `[-4, 4]²`).
    pub fn new(components: Vec<Expr>, shift_offset: Complex64) -> Result<Self, GeomError> {
        Self::with_declared_zeros(components, shift_offset, &[])
    }

    /// As [`ProjectiveMap::new`], additionally probing the caller's list of
    /// known component zeros.
    pub fn with_declared_zeros(
        components: Vec<Expr>,
        shift_offset: Complex64,
        declared: &[Complex64],
    ) -> Result<Self, GeomError> {
        if components.is_empty() {
            return Err(GeomError::NoComponents);
        }
        let mut all_zero = true;
        for f in &components {
            if !f.is_identically_zero()? {
                all_zero = false;
                break;
            }
        }
        if all_zero {
            return Err(GeomError::AllComponentsZero);
        }
        let grid = (-8..=8).flat_map(|a| (-8..=8).map(move |b| Complex64::new(a as f64 * 0.5, b as f64 * 0.5)));
        for z in grid.chain(declared.iter().copied()) {
            let vanishes = components.iter().all(|f| match f.eval_wide(z) {
                Eval::Value(w) => w.ln_abs() < COMMON_ZERO_TOL.ln(),
                _ => false,
            });
            if vanishes {
                return Err(GeomError::CommonZero(z));
            }
        }
        Ok(ProjectiveMap {
            components,
            shift_offset,
        })
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// `n` for a map into ℙⁿ.
    pub fn dim(&self) -> usize {
        self.components.len() - 1
    }

    pub fn shift_offset(&self) -> Complex64 {
        self.shift_offset
    }

    pub fn with_shift_offset(&self, c: Complex64) -> Self {
        ProjectiveMap {
            components: self.components.clone(),
            shift_offset: c,
        }
    }

    /// `f̄^{[k]}`: every component shifted by `k·c`.
    pub fn shifted(&self, k: usize) -> ProjectiveMap {
        let off = self.shift_offset * k as f64;
        ProjectiveMap {
            components: self.components.iter().map(|f| f.shift(off)).collect(),
            shift_offset: self.shift_offset,
        }
    }

    /// `(f, H) = Σ h_k f_k`.
    pub fn intersect(&self, h: &Hyperplane) -> Result<Expr, GeomError> {
        intersect(self, h)
    }
}

/// `H: h₀w₀ + … + h_n w_n = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    coeffs: Vec<Complex64>,
    label: String,
}

impl Hyperplane {
    pub fn new(coeffs: Vec<Complex64>, label: impl Into<String>) -> Result<Self, GeomError> {
        let label = label.into();
        if coeffs.iter().all(|c| c.norm() == 0.0) {
            return Err(GeomError::ZeroHyperplane(label));
        }
        Ok(Hyperplane { coeffs, label })
    }

    /// Real-coefficient shorthand used heavily by tests and fixtures.
    pub fn real(coeffs: &[f64], label: impl Into<String>) -> Result<Self, GeomError> {
        Hyperplane::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect(), label)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Euclidean norm ‖H‖ of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `(f, H) = h₀f₀ + … + h_n f_n` as an expression.
pub fn intersect(f: &ProjectiveMap, h: &Hyperplane) -> Result<Expr, GeomError> {
    if h.coeffs.len() != f.components.len() {
        return Err(GeomError::DimensionMismatch {
            map: f.dim(),
            coeffs: h.coeffs.len(),
        });
    }
    Ok(h.coeffs
        .iter()
        .zip(&f.components)
        .filter(|(c, _)| c.norm() != 0.0)
        .map(|(c, fk)| fk.clone() * *c)
        .fold(Expr::zero(), |acc, t| acc + t))
}

/// Outcome of the N-subgeneral position test.
#[derive(Clone, Debug, PartialEq)]
pub enum PositionCertificate {
    /// Every listed (N+1)-subset has coefficient rank n+1.
    Pass { verified: Vec<Vec<usize>> },
    /// `witness` is an (N+1)-subset whose coefficient rank is `rank < n+1`.
    Fail { witness: Vec<usize>, rank: usize },
}

impl PositionCertificate {
    pub fn passed(&self) -> bool {
        matches!(self, PositionCertificate::Pass { .. })
    }
}

/// `q` hyperplanes of ℙⁿ with a claimed subgenerality index `N`.
///
/// Plane indices are 0-based throughout the crate.
#[derive(Clone, Debug)]
pub struct HyperplaneSystem {
    planes: Vec<Hyperplane>,
    big_n: usize,
    n: usize,
}

impl HyperplaneSystem {
    pub fn new(planes: Vec<Hyperplane>, big_n: usize) -> Result<Self, GeomError> {
        let Some(first) = planes.first() else {
            return Err(GeomError::BadCounts { q: 0, big_n, n: 0 });
        };
        let width = first.coeffs.len();
        if let Some(bad) = planes.iter().find(|h| h.coeffs.len() != width) {
            return Err(GeomError::DimensionMismatch {
                map: width - 1,
                coeffs: bad.coeffs.len(),
            });
        }
        let n = width - 1;
        let q = planes.len();
        if !(q > big_n && big_n >= n) {
            return Err(GeomError::BadCounts { q, big_n, n });
        }
        Ok(HyperplaneSystem { planes, big_n, n })
    }

    pub fn planes(&self) -> &[Hyperplane] {
        &self.planes
    }

    pub fn q(&self) -> usize {
        self.planes.len()
    }

    /// The subgenerality index `N`.
    pub fn big_n(&self) -> usize {
        self.big_n
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Same planes, different claimed `N`.
    pub fn with_big_n(&self, big_n: usize) -> Result<Self, GeomError> {
        HyperplaneSystem::new(self.planes.clone(), big_n)
    }

    /// `rk(R) = dim V(R)`; `rk(∅) = 0`.
    pub fn rank_of_subset(&self, subset: &[usize]) -> usize {
        if subset.is_empty() {
            return 0;
        }
        let rows: Vec<&[Complex64]> = subset.iter().map(|&j| self.planes[j].coeffs.as_slice()).collect();
        matrix_rank(&rows)
    }

    /// Checks every (N+1)-subset for full rank n+1.
    pub fn check_subgeneral(&self) -> PositionCertificate {
        let mut verified = Vec::new();
        for subset in combinations(self.q(), self.big_n + 1) {
            let rank = self.rank_of_subset(&subset);
            if rank < self.n + 1 {
                return PositionCertificate::Fail { witness: subset, rank };
            }
            verified.push(subset);
        }
        PositionCertificate::Pass { verified }
    }

    /// True when the system is in general position (`N = n` test on these planes).
    pub fn in_general_position(&self) -> bool {
        HyperplaneSystem {
            planes: self.planes.clone(),
            big_n: self.n,
            n: self.n,
        }
        .check_subgeneral()
        .passed()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::annulus_points;
    use crate::Expr;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plane(coeffs: &[f64]) -> Hyperplane {
        Hyperplane::real(coeffs, "H").unwrap()
    }

    fn ez(k: f64) -> Expr {
        (Expr::real(k) * Expr::z()).exp()
    }

    #[test]
    fn intersect_examples() {
        let f = ProjectiveMap::new(vec![Expr::one(), Expr::z().exp()], c(1.0, 0.0)).unwrap();
        let g = f.intersect(&plane(&[0.0, 1.0])).unwrap();
        for p in annulus_points(10, 0.0, 3.0, 1) {
            assert!((g.eval(p).value().unwrap() - p.exp()).norm() < 1e-14);
        }
        let f = ProjectiveMap::new(vec![Expr::one(), Expr::z()], c(1.0, 0.0)).unwrap();
        let g = f.intersect(&plane(&[1.0, -1.0])).unwrap();
        assert!(g.eval(c(1.0, 0.0)).value().unwrap().norm() < 1e-15);
        assert!((g.eval(c(3.0, 0.0)).value().unwrap() - c(-2.0, 0.0)).norm() < 1e-15);

        let f = ProjectiveMap::new(vec![Expr::one(), ez(1.0), ez(2.0)], c(1.0, 0.0)).unwrap();
        let g = f.intersect(&plane(&[1.0, -2.0, 1.0])).unwrap();
        // symbolic expansion oracle: 1 - 2e^z + e^{2z} = (e^z - 1)^2
        for p in annulus_points(20, 0.0, 3.0, 2) {
            let want = (p.exp() - 1.0).powi(2);
            assert!((g.eval(p).value().unwrap() - want).norm() < 1e-12 * want.norm().max(1.0));
        }
        for k in -2..=2 {
            let z0 = c(0.0, std::f64::consts::TAU * k as f64);
            assert!(g.eval(z0).value().unwrap().norm() < 1e-12);
        }
        assert!(matches!(
            f.intersect(&plane(&[1.0, 1.0])),
            Err(GeomError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn map_validation() {
        assert!(matches!(
            ProjectiveMap::new(vec![Expr::zero(), Expr::zero()], c(1.0, 0.0)),
            Err(GeomError::AllComponentsZero)
        ));
        // z and z·e^z share the zero at the origin
        let f = ProjectiveMap::new(vec![Expr::z(), Expr::z() * ez(1.0)], c(1.0, 0.0));
        assert!(matches!(f, Err(GeomError::CommonZero(_))));
        let shifted = Expr::z() - Expr::constant(c(0.3, 0.1));
        let f =
            ProjectiveMap::with_declared_zeros(vec![shifted.clone(), shifted * ez(1.0)], c(1.0, 0.0), &[c(0.3, 0.1)]);
        assert!(matches!(f, Err(GeomError::CommonZero(_))));
        assert!(Hyperplane::real(&[0.0, 0.0], "bad").is_err());
    }

    #[test]
    fn rank_examples() {
        let pts = HyperplaneSystem::new(vec![plane(&[1.0, 0.0]), plane(&[0.0, 1.0]), plane(&[1.0, 1.0])], 1).unwrap();
        assert_eq!(pts.rank_of_subset(&[]), 0);
        assert_eq!(pts.rank_of_subset(&[0, 1]), 2);
        assert_eq!(pts.rank_of_subset(&[2]), 1);

        let four = HyperplaneSystem::new(
            vec![
                plane(&[1.0, 0.0, 0.0]),
                plane(&[0.0, 1.0, 0.0]),
                plane(&[0.0, 0.0, 1.0]),
                plane(&[1.0, 2.0, 3.0]),
            ],
            2,
        )
        .unwrap();
        for r in combinations(4, 3) {
            let rows: Vec<Vec<f64>> = r
                .iter()
                .map(|&j| four.planes()[j].coeffs().iter().map(|c| c.re).collect())
                .collect();
            let det = det3(&rows);
            assert!(det.abs() > 1e-9, "brute-force determinant oracle");
            assert_eq!(four.rank_of_subset(&r), 3);
        }
    }

    fn det3(m: &[Vec<f64>]) -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    #[test]
    fn subgeneral_examples() {
        let sys = HyperplaneSystem::new(vec![plane(&[1.0, 0.0]), plane(&[0.0, 1.0]), plane(&[1.0, 1.0])], 1).unwrap();
        assert!(sys.check_subgeneral().passed());

        let dup = HyperplaneSystem::new(
            vec![
                plane(&[1.0, 0.0]),
                plane(&[0.0, 1.0]),
                plane(&[1.0, 1.0]),
                plane(&[1.0, 1.0]),
            ],
            1,
        )
        .unwrap();
        match dup.check_subgeneral() {
            PositionCertificate::Fail { witness, rank } => {
                assert_eq!(witness, vec![2, 3]);
                assert_eq!(rank, 1);
            }
            other => panic!("{other:?}"),
        }

        // five lines of P^2; lines 0, 1, 2 pass through [0:0:1]
        let planes = vec![
            plane(&[1.0, 0.0, 0.0]),
            plane(&[0.0, 1.0, 0.0]),
            plane(&[1.0, 1.0, 0.0]),
            plane(&[0.0, 0.0, 1.0]),
            plane(&[1.0, 2.0, 5.0]),
        ];
        let sys = HyperplaneSystem::new(planes.clone(), 2).unwrap();
        match sys.check_subgeneral() {
            PositionCertificate::Fail { witness, .. } => assert_eq!(witness, vec![0, 1, 2]),
            other => panic!("{other:?}"),
        }
        let sys3 = HyperplaneSystem::new(planes, 3).unwrap();
        let brute = combinations(5, 4).all(|r| sys3.rank_of_subset(&r) == 3);
        assert_eq!(sys3.check_subgeneral().passed(), brute);
        assert!(brute);
        assert!(!sys3.in_general_position());
    }

    #[test]
    fn subgeneral_with_big_n_equal_n_is_general_position() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(1..=3);
            let q = rng.gen_range(n + 2..=n + 5);
            let planes: Vec<Hyperplane> = (0..q)
                .filter_map(|_| {
                    Hyperplane::real(&(0..=n).map(|_| rng.gen_range(-2..=2) as f64).collect::<Vec<_>>(), "H").ok()
                })
                .collect();
            if planes.len() <= n + 1 {
                continue;
            }
            let sys = HyperplaneSystem::new(planes, n).unwrap();
            assert_eq!(sys.check_subgeneral().passed(), sys.in_general_position());
        }
    }

    #[test]
    fn subgeneral_rank_lower_bound() {
        // rk(R) >= |R| - (N - n) for every |R| <= N + 1 once N-subgeneral position holds
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut checked = 0;
        while checked < 40 {
            let n = rng.gen_range(1..=3);
            let big_n = rng.gen_range(n..=n + 2);
            let q = rng.gen_range(big_n + 1..=big_n + 4);
            let pool: Vec<Vec<f64>> = (0..q)
                .map(|_| (0..=n).map(|_| rng.gen_range(-2..=2) as f64).collect())
                .collect();
            let planes: Vec<Hyperplane> = (0..q)
                .filter_map(|_| Hyperplane::real(&pool[rng.gen_range(0..q)], "H").ok())
                .collect();
            let Ok(sys) = HyperplaneSystem::new(planes, big_n) else {
                continue;
            };
            if !sys.check_subgeneral().passed() {
                continue;
            }
            checked += 1;
            for r in subsets_up_to(sys.q(), big_n + 1) {
                let lower = r.len() as i64 - (big_n as i64 - n as i64);
                assert!(sys.rank_of_subset(&r) as i64 >= lower);
            }
        }
    }

    proptest! {
        #[test]
        fn intersect_is_linear_in_h(a_re in -3.0..3.0f64, a_im in -3.0..3.0f64, b_re in -3.0..3.0f64,
                                    h1 in proptest::collection::vec(-2.0..2.0f64, 3),
                                    h2 in proptest::collection::vec(-2.0..2.0f64, 3)) {
            let f = ProjectiveMap::new(vec![Expr::one(), ez(1.0), Expr::z().sin()], c(1.0, 0.0)).unwrap();
            let (a, b) = (c(a_re, a_im), c(b_re, 0.0));
            let combo: Vec<Complex64> = h1.iter().zip(&h2).map(|(x, y)| a * x + b * y).collect();
            prop_assume!(combo.iter().any(|v| v.norm() > 1e-6));
            prop_assume!(h1.iter().any(|v| v.abs() > 1e-6) && h2.iter().any(|v| v.abs() > 1e-6));
            let lhs = f.intersect(&Hyperplane::new(combo, "c").unwrap()).unwrap();
            let g1 = f.intersect(&Hyperplane::real(&h1, "1").unwrap()).unwrap();
            let g2 = f.intersect(&Hyperplane::real(&h2, "2").unwrap()).unwrap();
            for p in annulus_points(8, 0.0, 2.0, 5) {
                let want = a * g1.eval(p).value().unwrap() + b * g2.eval(p).value().unwrap();
                let got = lhs.eval(p).value().unwrap();
                prop_assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0));
            }
        }
    }
}
