//! Monotone maps on the grid and closed-form one-dimensional transport.
//!
//! A [`MonotoneMap`] stores its values at the grid nodes and is extended
//! piecewise linearly between nodes, constantly beyond the outermost nodes.
//! The `defined` mask marks nodes whose value was determined by data; the
//! remaining nodes were filled by interpolation.

use crate::error::{Error, Result};
use crate::measures::{Grid, Measure};

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneMap {
    grid: Grid,
    z: Vec<f64>,
    defined: Vec<bool>,
}

impl MonotoneMap {
    pub fn new(grid: Grid, z: Vec<f64>, defined: Vec<bool>) -> Result<Self> {
        if z.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: z.len(),
            });
        }
        if defined.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: defined.len(),
            });
        }
        for (j, &v) in z.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidMap(format!(
                    "value at node {j} is not finite"
                )));
            }
            grid.check_contains(v)?;
        }
        if let Some(j) = z.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidMap(format!(
                "values decrease between nodes {j} and {}",
                j + 1
            )));
        }
        Ok(Self { grid, z, defined })
    }

    /// Fully defined map from node values.
    pub fn from_values(grid: Grid, z: Vec<f64>) -> Result<Self> {
        let defined = vec![true; z.len()];
        Self::new(grid, z, defined)
    }

    /// Samples `f` at the nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(grid, grid.nodes().into_iter().map(f).collect())
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.z
    }

    #[inline]
    pub fn defined_mask(&self) -> &[bool] {
        &self.defined
    }

    /// Piecewise-linear evaluation; exact at nodes, constant beyond the end nodes.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        self.grid.check_contains(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        let m = self.z.len();
        let s = self.grid.node_coordinate(x);
        if s <= 0.0 {
            return self.z[0];
        }
        if s >= (m - 1) as f64 {
            return self.z[m - 1];
        }
        let nearest = s.round() as usize;
        if self.grid.node(nearest) == x {
            return self.z[nearest];
        }
        let i = (s.floor() as usize).min(m - 2);
        let t = s - i as f64;
        let v = self.z[i] + t * (self.z[i + 1] - self.z[i]);
        v.clamp(self.z[i], self.z[i + 1])
    }

    fn is_defined_near(&self, x: f64) -> bool {
        let s = self
            .grid
            .node_coordinate(x)
            .clamp(0.0, (self.z.len() - 1) as f64);
        self.defined[s.round() as usize]
    }
}

/// Integration weights on the nodes: a discrete probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeWeights {
    grid: Grid,
    w: Vec<f64>,
}

impl NodeWeights {
    pub fn new(grid: Grid, w: Vec<f64>) -> Result<Self> {
        if w.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: w.len(),
            });
        }
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidWeights(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self { grid, w })
    }

    pub fn uniform(grid: Grid) -> Self {
        let m = grid.len();
        Self {
            grid,
            w: vec![1.0 / m as f64; m],
        }
    }

    /// All mass on node `j`.
    pub fn point(grid: Grid, j: usize) -> Result<Self> {
        let mut w = vec![0.0; grid.len()];
        *w.get_mut(j)
            .ok_or_else(|| Error::InvalidWeights(format!("node {j} out of range")))? = 1.0;
        Self::new(grid, w)
    }

    /// Cell masses of one measure.
    pub fn from_measure(mu: &Measure) -> Self {
        Self {
            grid: *mu.grid(),
            w: mu.cell_masses(),
        }
    }

    /// Normalizes nonnegative node masses to sum to one.
    pub fn normalized(grid: Grid, mut w: Vec<f64>) -> Result<Self> {
        let total: f64 = w.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidWeights(format!(
                "cannot normalize total {total}"
            )));
        }
        w.iter_mut().for_each(|v| *v /= total);
        Self::new(grid, w)
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.w
    }
}

/// Fills nodes with `defined == false` by linear interpolation between the
/// nearest defined neighbours, constantly beyond the outermost defined node.
pub(crate) fn fill_undefined(z: &mut [f64], defined: &[bool]) -> Result<()> {
    let anchors: Vec<usize> = (0..z.len()).filter(|&j| defined[j]).collect();
    let (&first, &last) = match (anchors.first(), anchors.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => {
            return Err(Error::InvalidMap(
                "no defined node to interpolate from".into(),
            ))
        }
    };
    for j in 0..first {
        z[j] = z[first];
    }
    for j in last + 1..z.len() {
        z[j] = z[last];
    }
    for pair in anchors.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let span = (b - a) as f64;
        for j in a + 1..b {
            let t = (j - a) as f64 / span;
            z[j] = (z[a] + t * (z[b] - z[a])).clamp(z[a], z[b]);
        }
    }
    Ok(())
}

/// The optimal (monotone) transport map `F_nu^{-1} o F_mu` at the nodes.
///
/// Nodes in cells without `mu`-mass are not determined by the pair and are
/// filled by interpolation.
pub fn optimal_map(mu: &Measure, nu: &Measure) -> Result<MonotoneMap> {
    mu.grid().ensure_same(nu.grid())?;
    let grid = *mu.grid();
    let defined: Vec<bool> = mu.cell_masses().into_iter().map(|w| w > 0.0).collect();
    let mut z: Vec<f64> = grid
        .nodes()
        .into_iter()
        .map(|x| grid.clamp(nu.quantile_at(mu.cdf(x))))
        .collect();
    fill_undefined(&mut z, &defined)?;
    MonotoneMap::new(grid, z, defined)
}

/// `t # mu`, computed on quantiles.
pub fn pushforward(t: &MonotoneMap, mu: &Measure) -> Result<Measure> {
    t.grid().ensure_same(mu.grid())?;
    let q = mu
        .quantiles()
        .iter()
        .map(|&v| t.eval_unchecked(v))
        .collect();
    Measure::new(*mu.grid(), q)
}

/// `outer o inner` at the nodes. A node stays defined when `inner` is defined
/// there and `outer` is defined at the node nearest to the image point.
pub fn compose(outer: &MonotoneMap, inner: &MonotoneMap) -> Result<MonotoneMap> {
    outer.grid().ensure_same(inner.grid())?;
    let z: Vec<f64> = inner.z.iter().map(|&v| outer.eval_unchecked(v)).collect();
    let defined = inner
        .z
        .iter()
        .zip(&inner.defined)
        .map(|(&v, &d)| d && outer.is_defined_near(v))
        .collect();
    MonotoneMap::new(inner.grid, z, defined)
}

pub fn identity_map(grid: Grid) -> MonotoneMap {
    MonotoneMap {
        grid,
        z: grid.nodes(),
        defined: vec![true; grid.len()],
    }
}

/// `L^2(w)` distance between two maps at the nodes.
pub fn map_l2_distance(a: &MonotoneMap, b: &MonotoneMap, w: &NodeWeights) -> Result<f64> {
    a.grid().ensure_same(b.grid())?;
    a.grid().ensure_same(w.grid())?;
    let ss: f64 =
        a.z.iter()
            .zip(&b.z)
            .zip(&w.w)
            .map(|((x, y), wj)| wj * (x - y) * (x - y))
            .sum();
    Ok(ss.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{density_to_measure, wasserstein_distance, DensityCurve};
    use crate::simulation::zeta;
    use proptest::prelude::*;

    fn beta_measure(grid: Grid, a: f64, b: f64) -> Measure {
        let ln_b = statrs::function::beta::ln_beta(a, b);
        let d = DensityCurve::from_fn(grid, |x| {
            ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_b).exp()
        })
        .unwrap();
        density_to_measure(&d)
    }

    #[test]
    fn self_transport_is_identity() {
        let g = Grid::unit(400).unwrap();
        let mu = beta_measure(g, 2.0, 3.0);
        let t = optimal_map(&mu, &mu).unwrap();
        let (lo, hi) = mu.support();
        for (j, x) in g.nodes().into_iter().enumerate() {
            if !t.defined_mask()[j] {
                continue;
            }
            if x > lo && x < hi {
                assert!((t.values()[j] - x).abs() < 1e-12);
            } else {
                // cell straddles the end of the support
                assert!((t.values()[j] - x).abs() <= g.cell_width());
            }
        }
    }

    #[test]
    fn uniform_dilation() {
        let g = Grid::new(0.0, 2.0, 1000).unwrap();
        let mu = Measure::uniform(g, 0.0, 1.0).unwrap();
        let nu = Measure::uniform(g, 0.0, 2.0).unwrap();
        let t = optimal_map(&mu, &nu).unwrap();
        let mut n_defined = 0;
        for (j, x) in g.nodes().into_iter().enumerate() {
            if t.defined_mask()[j] {
                n_defined += 1;
                assert!((t.values()[j] - 2.0 * x).abs() < 1e-9);
            }
        }
        assert_eq!(n_defined, 500);
    }

    #[test]
    fn recovers_zeta4_from_pushforward() {
        let g = Grid::unit(1000).unwrap();
        let mu = beta_measure(g, 2.0, 2.0);
        let t0 = MonotoneMap::from_fn(g, |x| zeta(4, x)).unwrap();
        let nu = pushforward(&t0, &mu).unwrap();
        let t = optimal_map(&mu, &nu).unwrap();
        let sup = g
            .nodes()
            .into_iter()
            .enumerate()
            .filter(|&(j, _)| t.defined_mask()[j])
            .map(|(j, x)| (t.values()[j] - zeta(4, x)).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 2e-3, "sup error {sup}");
    }

    #[test]
    fn pushforward_examples() {
        let g = Grid::unit(1000).unwrap();
        let mu = beta_measure(g, 3.0, 2.0);
        let same = pushforward(&identity_map(g), &mu).unwrap();
        assert!(wasserstein_distance(&same, &mu).unwrap() < 1e-12);

        let c = MonotoneMap::from_values(g, vec![0.3; 1000]).unwrap();
        assert!(pushforward(&c, &mu).unwrap().is_point_mass());

        let u = Measure::uniform(g, 0.0, 1.0).unwrap();
        let t = MonotoneMap::from_fn(g, |x| zeta(2, x)).unwrap();
        let out = pushforward(&t, &u).unwrap();
        for (k, v) in out.quantiles().iter().enumerate() {
            assert!((v - zeta(2, g.level(k))).abs() < 1e-6);
        }
    }

    #[test]
    fn evaluate_examples() {
        let g = Grid::unit(10).unwrap();
        let t = MonotoneMap::from_fn(g, |x| x * x).unwrap();
        for j in 0..10 {
            assert_eq!(t.evaluate(g.node(j)).unwrap(), t.values()[j]);
        }
        let mid = 0.5 * (g.node(2) + g.node(3));
        assert!((t.evaluate(mid).unwrap() - 0.5 * (t.values()[2] + t.values()[3])).abs() < 1e-15);
        let id = identity_map(g);
        for i in 0..=100 {
            let x = g.node(0) + (g.node(9) - g.node(0)) * i as f64 / 100.0;
            assert!((id.evaluate(x).unwrap() - x).abs() < 1e-12);
        }
        assert_eq!(t.evaluate(0.0).unwrap(), t.values()[0]);
        assert_eq!(t.evaluate(1.0).unwrap(), t.values()[9]);
        assert!(matches!(t.evaluate(1.5), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn identity_values() {
        let g = Grid::unit(4).unwrap();
        assert_eq!(identity_map(g).values(), &[0.125, 0.375, 0.625, 0.875]);
        assert!((identity_map(Grid::unit(10).unwrap()).evaluate(0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn compose_with_identity() {
        let g = Grid::unit(200).unwrap();
        let id = identity_map(g);
        // values kept inside [x_1, x_m] so the identity's constant tails do not bite
        let t = MonotoneMap::from_fn(g, |x| 0.1 + 0.8 * x * x).unwrap();
        let left = compose(&id, &t).unwrap();
        let right = compose(&t, &id).unwrap();
        for j in 0..200 {
            assert!((left.values()[j] - t.values()[j]).abs() < 1e-12);
            assert!((right.values()[j] - t.values()[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn compose_zeta_pair_is_monotone() {
        let g = Grid::unit(1000).unwrap();
        let a = MonotoneMap::from_fn(g, |x| zeta(1, x)).unwrap();
        let b = MonotoneMap::from_fn(g, |x| zeta(-1, x)).unwrap();
        let c = compose(&a, &b).unwrap();
        assert!(c.values().windows(2).all(|w| w[0] <= w[1]));
        // constant beyond the end nodes, so the endpoints are off by about h/2
        assert!(c.evaluate(0.0).unwrap().abs() < 1e-3);
        assert!((c.evaluate(1.0).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn grid_mismatch_errors() {
        let g = Grid::unit(10).unwrap();
        let h = Grid::unit(11).unwrap();
        let mu = Measure::uniform(g, 0.0, 1.0).unwrap();
        let nu = Measure::uniform(h, 0.0, 1.0).unwrap();
        assert_eq!(optimal_map(&mu, &nu), Err(Error::GridMismatch));
        assert_eq!(pushforward(&identity_map(h), &mu), Err(Error::GridMismatch));
        assert_eq!(
            compose(&identity_map(h), &identity_map(g)),
            Err(Error::GridMismatch)
        );
        assert_eq!(
            map_l2_distance(&identity_map(g), &identity_map(g), &NodeWeights::uniform(h)),
            Err(Error::GridMismatch)
        );
    }

    #[test]
    fn l2_distance_examples() {
        let g = Grid::unit(100).unwrap();
        let id = identity_map(g);
        let w = NodeWeights::uniform(g);
        assert_eq!(map_l2_distance(&id, &id, &w).unwrap(), 0.0);
        let shifted = MonotoneMap::from_fn(g, |x| (x + 0.1).min(1.0)).unwrap();
        // restrict to nodes where no clipping happens
        let mut wv = vec![0.0; 100];
        let unclipped: Vec<usize> = (0..100).filter(|&j| g.node(j) + 0.1 <= 1.0).collect();
        for &j in &unclipped {
            wv[j] = 1.0 / unclipped.len() as f64;
        }
        let w = NodeWeights::new(g, wv).unwrap();
        assert!((map_l2_distance(&id, &shifted, &w).unwrap() - 0.1).abs() < 1e-12);
        let p = NodeWeights::point(g, 37).unwrap();
        let sq = MonotoneMap::from_fn(g, |x| x * x).unwrap();
        let d = map_l2_distance(&id, &sq, &p).unwrap();
        assert!((d - (g.node(37) - g.node(37).powi(2)).abs()).abs() < 1e-15);
    }

    #[test]
    fn fill_interpolates_and_extends() {
        let mut z = vec![0.0, 0.2, 0.0, 0.0, 0.8, 0.0];
        fill_undefined(&mut z, &[false, true, false, false, true, false]).unwrap();
        let expect = [0.2, 0.2, 0.4, 0.6, 0.8, 0.8];
        for (a, b) in z.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn flatness_identity() {
        let g = Grid::unit(1000).unwrap();
        let cases = [
            ((2.0, 5.0), (3.0, 3.0), (5.0, 2.0)),
            ((1.5, 1.5), (2.0, 7.0), (6.0, 4.0)),
            ((4.0, 4.0), (1.2, 3.0), (9.0, 2.5)),
        ];
        for (b, m, n) in cases {
            let base = beta_measure(g, b.0, b.1);
            let mu = beta_measure(g, m.0, m.1);
            let nu = beta_measure(g, n.0, n.1);
            let w = NodeWeights::from_measure(&base);
            let lhs = wasserstein_distance(&mu, &nu).unwrap();
            let rhs = map_l2_distance(
                &optimal_map(&base, &nu).unwrap(),
                &optimal_map(&base, &mu).unwrap(),
                &w,
            )
            .unwrap();
            assert!((lhs - rhs).abs() <= 5e-3, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn transport_recovers_smooth_maps() {
        let g = Grid::unit(1000).unwrap();
        let mu = beta_measure(g, 2.5, 3.5);
        let t = MonotoneMap::from_fn(g, |x| 0.5 * x + 0.5 * x * x).unwrap();
        let r = optimal_map(&mu, &pushforward(&t, &mu).unwrap()).unwrap();
        for j in 0..1000 {
            if r.defined_mask()[j] {
                assert!((r.values()[j] - t.values()[j]).abs() <= 1e-3);
            }
        }
    }

    fn arb_map(m: usize) -> impl Strategy<Value = MonotoneMap> {
        proptest::collection::vec(0.0..1.0f64, m).prop_map(move |mut v| {
            v.sort_by(f64::total_cmp);
            MonotoneMap::from_values(Grid::unit(m).unwrap(), v).unwrap()
        })
    }

    fn arb_measure(m: usize) -> impl Strategy<Value = Measure> {
        proptest::collection::vec(0.0..1.0f64, m).prop_map(move |mut v| {
            v.sort_by(f64::total_cmp);
            Measure::new(Grid::unit(m).unwrap(), v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn operations_preserve_monotonicity(
            a in arb_map(24), b in arb_map(24), mu in arb_measure(24), nu in arb_measure(24),
        ) {
            let c = compose(&a, &b).unwrap();
            prop_assert!(c.values().windows(2).all(|w| w[0] <= w[1]));
            let p = pushforward(&a, &mu).unwrap();
            prop_assert!(p.quantiles().windows(2).all(|w| w[0] <= w[1]));
            let t = optimal_map(&mu, &nu).unwrap();
            prop_assert!(t.values().windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn pushforward_quantile_identity(a in arb_map(24), mu in arb_measure(24)) {
            let p = pushforward(&a, &mu).unwrap();
            for (out, &q) in p.quantiles().iter().zip(mu.quantiles()) {
                prop_assert_eq!(*out, a.evaluate(q).unwrap());
            }
        }

        #[test]
        fn evaluate_is_monotone(a in arb_map(12), x in 0.0..1.0f64, y in 0.0..1.0f64) {
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(a.evaluate(lo).unwrap() <= a.evaluate(hi).unwrap());
        }
    }
}
