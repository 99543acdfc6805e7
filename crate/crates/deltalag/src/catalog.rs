//! Built-in family registry and the JSON chart-spec format.
//!
//! A chart document is either a named built-in family with parameters,
//!
//! ```json
//! {"family": "ratio4-extensor", "params": {"mu0": 0.4}}
//! ```
//!
//! or a polynomial gradient graph,
//!
//! ```json
//! {"graph": {"m": 3, "terms": [{"coeff": 0.25, "powers": [2, 1, 0]}]}}
//! ```
//!
//! Documents round-trip exactly: parsing and re-serializing a spec
//! reproduces the same value (field names and term order are canonical).

use crate::delta::DeltaOptions;
use crate::families::{
    build_family_c5, build_family_ch5_iii, build_family_ch5_iv, build_family_ch5_v,
    build_family_ch5_vi, build_family_cp5, complex_extensor, example_3_13_chart,
    ratio4_generating_curve, ratio4_legendre_lift, totally_real_hyperbolic_lift,
    totally_real_plane, totally_real_sphere_lift, CurveModel, ThetaForm,
};
use crate::immersion::{
    gradient_graph_chart, random_gradient_graph, shear_chart, torus_chart, ChartImmersion,
};
use crate::poly::{Polynomial, Term};
use crate::{Error, Result, Tolerances};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub m: usize,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChartSpec {
    Family {
        family: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    Graph {
        graph: GraphSpec,
    },
}

impl ChartSpec {
    pub fn family(name: &str, params: &[(&str, f64)]) -> Self {
        ChartSpec::Family {
            family: name.to_string(),
            params: params
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chart specs always serialize")
    }
}

/// A chart plus what the verifier should expect of it.
pub struct BuiltChart {
    pub chart: ChartImmersion,
    /// When true, the family is one of the classified ideal ones and the
    /// equality residual is part of the verification criteria.
    pub expect_equality: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamDescriptor {
    pub name: &'static str,
    pub default: f64,
    pub doc: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyDescriptor {
    pub name: &'static str,
    pub description: &'static str,
    pub ideal: bool,
    pub params: Vec<ParamDescriptor>,
}

pub fn builtin_families() -> Vec<FamilyDescriptor> {
    let p = |name, default, doc| ParamDescriptor { name, default, doc };
    vec![
        FamilyDescriptor {
            name: "gradient-graph",
            description: "random Lagrangian gradient graph u ↦ u + i∇f(u) in C^m",
            ideal: false,
            params: vec![
                p("seed", 1.0, "RNG seed for the potential"),
                p("m", 5.0, "intrinsic dimension"),
                p("degree", 3.0, "potential degree"),
            ],
        },
        FamilyDescriptor {
            name: "torus",
            description: "product of unit circles in C^m (flat, non-minimal)",
            ideal: false,
            params: vec![p("m", 5.0, "number of circle factors")],
        },
        FamilyDescriptor {
            name: "nonlagrangian-shear",
            description: "the plane (u₁ + iu₂, u₂) ⊂ C²: fails the Lagrangian check",
            ideal: false,
            params: vec![],
        },
        FamilyDescriptor {
            name: "ratio4-extensor",
            description: "complex extensor of S⁴ via the curvature-4θ′ generating curve (C⁵)",
            ideal: true,
            params: vec![
                p("mu0", 0.5, "μ at the apogee t = 0"),
                p("span", 0.8, "curve parameter half-span"),
            ],
        },
        FamilyDescriptor {
            name: "ratio4-cp5",
            description: "ratio-4 H-umbilical lift (z₁, z₂·y) into S¹¹(1) over a Legendre curve",
            ideal: true,
            params: vec![p("mu0", 0.5, "μ(0), with ν(0) = 0")],
        },
        FamilyDescriptor {
            name: "ratio4-ch5",
            description: "ratio-4 H-umbilical lift into H₁¹¹(−1) over a Legendre curve",
            ideal: true,
            params: vec![p("mu0", 1.2, "μ(0) > 1 (the k < 0 branch), with ν(0) = 0")],
        },
        FamilyDescriptor {
            name: "ch5-example-3-13",
            description: "closed-form ratio-4 lift into H₁¹¹(−1) with μ(t) = sech 2t",
            ideal: true,
            params: vec![],
        },
        FamilyDescriptor {
            name: "c5-ideal",
            description: "warped-product family in C⁵ over a CP⁴ minimal factor (smoke plugin)",
            ideal: true,
            params: vec![p("c", 1.0, "first-integral constant c > 0")],
        },
        FamilyDescriptor {
            name: "cp5-ideal",
            description: "warped-product family lifted into S¹¹(1) over a CP⁴ minimal factor",
            ideal: true,
            params: vec![p("c", 1.0, "first-integral constant c > 0")],
        },
        FamilyDescriptor {
            name: "ch5-branch-iii",
            description: "CH⁵ family with k = c² > 0 over a CH⁴ minimal factor",
            ideal: true,
            params: vec![
                p("c", 0.3, "constant with c² < 2/(3√3)"),
                p(
                    "theta_printed",
                    0.0,
                    "1 integrates the printed product form of dθ/dμ (comparison only)",
                ),
            ],
        },
        FamilyDescriptor {
            name: "ch5-branch-iv",
            description: "CH⁵ family with k = −c² < 0 over a CP⁴ minimal factor",
            ideal: true,
            params: vec![p("c", 0.5, "first-integral constant c > 0")],
        },
        FamilyDescriptor {
            name: "ch5-branch-v",
            description: "CH⁵ potential-form family over a minimal Lagrangian factor in C⁴",
            ideal: true,
            params: vec![],
        },
        FamilyDescriptor {
            name: "ch5-branch-vi",
            description: "CH⁵ family over two minimal Lagrangian surfaces in C²",
            ideal: true,
            params: vec![p(
                "cubic",
                0.0,
                "1 uses cubic harmonic potentials (curved factors) instead of quadratics",
            )],
        },
    ]
}

fn get_params(
    params: &BTreeMap<String, f64>,
    allowed: &[&str],
) -> Result<()> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::ChartSpec(format!(
                "unknown parameter `{key}` (allowed: {})",
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

fn param(params: &BTreeMap<String, f64>, name: &str, default: f64) -> f64 {
    params.get(name).copied().unwrap_or(default)
}

/// Builds a chart from a spec; plugin verification runs inside the family
/// builders.
pub fn build_chart(spec: &ChartSpec, tol: &Tolerances, opts: &DeltaOptions) -> Result<BuiltChart> {
    match spec {
        ChartSpec::Graph { graph } => {
            if graph.terms.iter().any(|t| t.powers.len() != graph.m) {
                return Err(Error::ChartSpec(
                    "every term must carry one exponent per variable".into(),
                ));
            }
            let poly = Polynomial::new(graph.m, graph.terms.clone());
            Ok(BuiltChart {
                chart: gradient_graph_chart(poly, "graph"),
                expect_equality: false,
            })
        }
        ChartSpec::Family { family, params } => {
            let chart = match family.as_str() {
                "gradient-graph" => {
                    get_params(params, &["seed", "m", "degree"])?;
                    let seed = param(params, "seed", 1.0) as u64;
                    let m = param(params, "m", 5.0) as usize;
                    let degree = param(params, "degree", 3.0) as u32;
                    random_gradient_graph(seed, m, degree)?
                }
                "torus" => {
                    get_params(params, &["m"])?;
                    torus_chart(param(params, "m", 5.0) as usize)
                }
                "nonlagrangian-shear" => {
                    get_params(params, &[])?;
                    shear_chart()
                }
                "ratio4-extensor" => {
                    get_params(params, &["mu0", "span"])?;
                    let span = param(params, "span", 0.8);
                    let curve =
                        ratio4_generating_curve(param(params, "mu0", 0.5), (-span, span))?;
                    complex_extensor(Arc::new(curve), 5)?
                }
                "ratio4-cp5" => {
                    get_params(params, &["mu0"])?;
                    ratio4_legendre_lift(CurveModel::Sphere, param(params, "mu0", 0.5))?
                }
                "ratio4-ch5" => {
                    get_params(params, &["mu0"])?;
                    ratio4_legendre_lift(CurveModel::Hyperbolic, param(params, "mu0", 1.2))?
                }
                "ch5-example-3-13" => {
                    get_params(params, &[])?;
                    example_3_13_chart()
                }
                "c5-ideal" => {
                    get_params(params, &["c"])?;
                    build_family_c5(param(params, "c", 1.0), &totally_real_sphere_lift(), tol, opts)?
                }
                "cp5-ideal" => {
                    get_params(params, &["c"])?;
                    build_family_cp5(
                        param(params, "c", 1.0),
                        &totally_real_sphere_lift(),
                        tol,
                        opts,
                    )?
                }
                "ch5-branch-iii" => {
                    get_params(params, &["c", "theta_printed"])?;
                    let form = if param(params, "theta_printed", 0.0) != 0.0 {
                        ThetaForm::PrintedProduct
                    } else {
                        ThetaForm::Reciprocal
                    };
                    build_family_ch5_iii(
                        param(params, "c", 0.3),
                        &totally_real_hyperbolic_lift(),
                        form,
                        tol,
                        opts,
                    )?
                }
                "ch5-branch-iv" => {
                    get_params(params, &["c"])?;
                    build_family_ch5_iv(
                        param(params, "c", 0.5),
                        &totally_real_sphere_lift(),
                        tol,
                        opts,
                    )?
                }
                "ch5-branch-v" => {
                    get_params(params, &[])?;
                    build_family_ch5_v(&totally_real_plane(), tol, opts)?
                }
                "ch5-branch-vi" => {
                    get_params(params, &["cubic"])?;
                    let (f1, f2) = if param(params, "cubic", 0.0) != 0.0 {
                        (
                            // Re (x+iy)³ and Im (x+iy)³, scaled down
                            Polynomial::new(
                                2,
                                vec![
                                    Term {
                                        coeff: 0.2,
                                        powers: vec![3, 0],
                                    },
                                    Term {
                                        coeff: -0.6,
                                        powers: vec![1, 2],
                                    },
                                ],
                            ),
                            Polynomial::new(
                                2,
                                vec![
                                    Term {
                                        coeff: 0.6,
                                        powers: vec![2, 1],
                                    },
                                    Term {
                                        coeff: -0.2,
                                        powers: vec![0, 3],
                                    },
                                ],
                            ),
                        )
                    } else {
                        (
                            Polynomial::new(
                                2,
                                vec![
                                    Term {
                                        coeff: 1.0,
                                        powers: vec![2, 0],
                                    },
                                    Term {
                                        coeff: -1.0,
                                        powers: vec![0, 2],
                                    },
                                ],
                            ),
                            Polynomial::new(
                                2,
                                vec![Term {
                                    coeff: 1.0,
                                    powers: vec![1, 1],
                                }],
                            ),
                        )
                    };
                    build_family_ch5_vi(&f1, &f2, tol, opts)?
                }
                other => {
                    return Err(Error::ChartSpec(format!(
                        "unknown family `{other}` (see the `families` subcommand)"
                    )))
                }
            };
            let ideal = builtin_families()
                .iter()
                .find(|d| d.name == family.as_str())
                .map(|d| d.ideal)
                .unwrap_or(false);
            Ok(BuiltChart {
                chart,
                expect_equality: ideal,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_specs_round_trip() {
        let spec = ChartSpec::family("ratio4-extensor", &[("mu0", 0.4)]);
        let json = spec.to_json();
        let back = ChartSpec::from_json(&json).unwrap();
        assert_eq!(spec, back);
        assert_eq!(json, back.to_json());

        let graph = ChartSpec::Graph {
            graph: GraphSpec {
                m: 3,
                terms: vec![Term {
                    coeff: 0.25,
                    powers: vec![2, 1, 0],
                }],
            },
        };
        let json = graph.to_json();
        let back = ChartSpec::from_json(&json).unwrap();
        assert_eq!(graph, back);
        assert_eq!(json, back.to_json());
    }

    #[test]
    fn unknown_family_and_params_are_rejected(){
        let tol = Tolerances::default();
        let opts = DeltaOptions::fast(4);
        let bad = ChartSpec::family("no-such-family", &[]);
        assert!(build_chart(&bad, &tol, &opts).is_err());
        let bad = ChartSpec::family("torus", &[("nope", 1.0)]);
        assert!(build_chart(&bad, &tol, &opts).is_err());
    }

    #[test]
    fn every_builtin_family_builds() {
        let tol = Tolerances::default();
        let opts = DeltaOptions::fast(6);
        for desc in builtin_families() {
            let spec = ChartSpec::family(desc.name, &[]);
            let built = build_chart(&spec, &tol, &opts);
            assert!(built.is_ok(), "{} failed: {:?}", desc.name, built.err().map(|e| e.to_string()));
        }
    }
}
