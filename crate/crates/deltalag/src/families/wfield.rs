//! Path-integrated potential of the closed 1-form 2⟨dψ, iψ⟩.
//!
//! For a Lagrangian immersion ψ the 1-form with components
//! g_j = 2⟨ψ_{u_j}, iψ⟩ is closed, so the potential w with w_{u_j} = g_j
//! exists locally. It is pinned by w(anchor) = 0 with the anchor at the
//! domain origin (or center when the origin lies outside the box).

use crate::ambient::{apply_j, inner_unchecked};
use crate::immersion::ChartImmersion;
use crate::{Error, Result, Tolerances};

#[derive(Clone)]
pub struct WField {
    psi: ChartImmersion,
    anchor: Vec<f64>,
    quad_tol: f64,
    /// max |∂_k g_j − ∂_j g_k| observed on the sample sweep.
    pub closedness_residual: f64,
}

/// Builds the potential, first checking that the 1-form is closed (which is
/// the Lagrangian condition on ψ).
pub fn integrate_w(psi: &ChartImmersion, tol: &Tolerances) -> Result<WField> {
    let m = psi.dim();
    let mut residual: f64 = 0.0;
    let mut points = psi.halton(9);
    points.push(psi.center());
    for u in &points {
        let jet = psi.evaluate_jet(u, 1)?;
        for j in 0..m {
            let jj = apply_j(&jet.first[j]);
            for k in (j + 1)..m {
                let anti = 2.0
                    * (inner_unchecked(&jet.first[j], &apply_j(&jet.first[k]))
                        - inner_unchecked(&jet.first[k], &jj));
                residual = residual.max(anti.abs());
            }
        }
    }
    if residual > 1e-8 {
        return Err(Error::NotClosed { residual });
    }
    let inside_origin = psi
        .domain()
        .iter()
        .all(|&(lo, hi)| lo <= 0.0 && 0.0 <= hi);
    let anchor = if inside_origin {
        vec![0.0; m]
    } else {
        psi.center()
    };
    Ok(WField {
        psi: psi.clone(),
        anchor,
        quad_tol: tol.quadrature,
        closedness_residual: residual,
    })
}

impl WField {
    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    /// Components g_j(u) = 2⟨ψ_{u_j}, iψ⟩.
    pub fn integrand(&self, u: &[f64]) -> Result<Vec<f64>> {
        let jet = self.psi.evaluate_jet(u, 1)?;
        let jv = apply_j(&jet.value);
        Ok(jet
            .first
            .iter()
            .map(|d| 2.0 * inner_unchecked(d, &jv))
            .collect())
    }

    fn path_value(&self, u: &[f64], axes: &[usize]) -> Result<f64> {
        let m = self.psi.dim();
        if u.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: u.len(),
            });
        }
        let mut point = self.anchor.clone();
        let mut w = 0.0;
        for &axis in axes {
            let (a, b) = (self.anchor[axis], u[axis]);
            if a != b {
                let f = |s: f64| {
                    let mut p = point.clone();
                    p[axis] = s;
                    self.integrand(&p).map(|g| g[axis]).unwrap_or(f64::NAN)
                };
                w += super::adaptive_simpson(&f, a, b, self.quad_tol);
            }
            point[axis] = b;
        }
        Ok(w)
    }

    /// w(u), integrating along the axis-ordered path from the anchor.
    pub fn value(&self, u: &[f64]) -> Result<f64> {
        let axes: Vec<usize> = (0..self.psi.dim()).collect();
        self.path_value(u, &axes)
    }

    /// Largest discrepancy between the axis-ordered path and the reversed
    /// one over `count` sample points; a loop-integral (closedness) check.
    pub fn loop_residual(&self, count: usize) -> Result<f64> {
        let axes: Vec<usize> = (0..self.psi.dim()).collect();
        let rev: Vec<usize> = axes.iter().rev().copied().collect();
        let mut res: f64 = 0.0;
        for u in self.psi.halton(count) {
            let a = self.path_value(&u, &axes)?;
            let b = self.path_value(&u, &rev)?;
            res = res.max((a - b).abs());
        }
        Ok(res)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientSpace;
    use crate::immersion::{shear_chart, ExactMap};
    use crate::jet::{CJet, Jet};
    use std::sync::Arc;

    struct TwoCircles;
    impl ExactMap for TwoCircles {
        fn dim(&self) -> usize {
            2
        }
        fn space(&self) -> AmbientSpace {
            AmbientSpace::flat(2)
        }
        fn eval(&self, u: &[f64], order: usize) -> crate::Result<Vec<CJet>> {
            let s = 0.5f64.sqrt();
            Ok((0..2)
                .map(|k| CJet::exp_i(&Jet::variable(2, order, k, u[k])).scale(s))
                .collect())
        }
    }

    #[test]
    fn potential_of_circle_product_is_linear() {
        // ψ = (e^{iu₁}, e^{iu₂})/√2: g_j = 2·Im(i e^{iu_j} conj(e^{iu_j}))/2 = 1
        let chart = crate::immersion::ChartImmersion::from_exact(
            "two-circles",
            vec![(-1.0, 1.0); 2],
            false,
            Arc::new(TwoCircles),
        );
        let w = integrate_w(&chart, &Tolerances::default()).unwrap();
        for u in chart.halton(10) {
            let expect = u[0] + u[1];
            assert!((w.value(&u).unwrap() - expect).abs() < 1e-10);
        }
        assert!(w.loop_residual(6).unwrap() < 1e-10);
    }

    #[test]
    fn potential_of_totally_real_plane_vanishes() {
        let chart = crate::families::plugins::totally_real_plane();
        let w = integrate_w(&chart, &Tolerances::default()).unwrap();
        for u in chart.halton(8) {
            assert!(w.value(&u).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn non_lagrangian_input_is_rejected() {
        let chart = shear_chart();
        assert!(matches!(
            integrate_w(&chart, &Tolerances::default()),
            Err(Error::NotClosed { .. })
        ));
    }
}
