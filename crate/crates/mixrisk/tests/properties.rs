//! Randomized property checks over the special functions, the quantile
//! solver, and the risk measures.

use proptest::prelude::*;

use mixrisk::es::{es_generic, EsConvention};
use mixrisk::model::{EllipticComponent, GeneratorKind, Matrix, MixtureModel, Portfolio};
use mixrisk::specfun::{gauss_2f1, normal_tail, reg_incomplete_beta, student_tail};
use mixrisk::var::{aggregate_var, incremental_var, solve_quantile, var_common_moments};

fn nu_strategy() -> impl Strategy<Value = f64> {
    2.1f64..50.0
}

fn alpha_strategy() -> impl Strategy<Value = f64> {
    0.001f64..0.4
}

/// A 1-3 dimensional shared-moment Student/normal mixture with a portfolio.
#[derive(Debug, Clone)]
struct CommonCase {
    dim: usize,
    raw: Vec<f64>,     // dim*dim entries, turned into A·Aᵗ + I/2
    weights: Vec<f64>, // un-normalized
    nus: Vec<Option<f64>>,
    delta: Vec<f64>,
    alpha: f64,
}

fn common_case() -> impl Strategy<Value = CommonCase> {
    (1usize..=3)
        .prop_flat_map(|dim| {
            (
                Just(dim),
                proptest::collection::vec(-1.0f64..1.0, dim * dim),
                proptest::collection::vec(0.05f64..1.0, 1..=3),
                proptest::collection::vec(
                    proptest::option::weighted(0.7, 2.5f64..20.0),
                    3,
                ),
                proptest::collection::vec(
                    (0.1f64..2.0, proptest::bool::ANY),
                    dim,
                ),
                alpha_strategy(),
            )
        })
        .prop_map(|(dim, raw, weights, nus, signed, alpha)| CommonCase {
            dim,
            raw,
            weights,
            nus,
            delta: signed.into_iter().map(|(m, neg)| if neg { -m } else { m }).collect(),
            alpha,
        })
}

fn build(case: &CommonCase) -> (mixrisk::model::ValidatedModel<f64>, Portfolio<f64>) {
    let n = case.dim;
    let scale: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let dot: f64 =
                        (0..n).map(|k| case.raw[i * n + k] * case.raw[j * n + k]).sum();
                    dot + if i == j { 0.5 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let total: f64 = case.weights.iter().sum();
    let components: Vec<EllipticComponent<f64>> = case
        .weights
        .iter()
        .enumerate()
        .map(|(i, w)| EllipticComponent {
            weight: w / total,
            mean: vec![0.0; n],
            scale: Matrix::from_rows(&scale).unwrap(),
            generator: match case.nus[i] {
                Some(nu) => GeneratorKind::StudentT { nu },
                None => GeneratorKind::Normal,
            },
        })
        .collect();
    let model = MixtureModel { components, dimension: n }.validate().unwrap();
    (model, Portfolio::new(case.delta.clone()).unwrap())
}

proptest! {
    // ---------------------------------------------------------- specfun

    #[test]
    fn incomplete_beta_complement_symmetry(
        x in 0.001f64..0.999,
        a in 0.2f64..30.0,
        b in 0.2f64..30.0,
    ) {
        let lhs = reg_incomplete_beta(x, a, b).unwrap();
        let rhs = 1.0 - reg_incomplete_beta(1.0 - x, b, a).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn hypergeometric_at_zero_is_one(
        a in 0.1f64..20.0,
        b in 0.1f64..20.0,
        c in 0.5f64..20.0,
    ) {
        prop_assert_eq!(gauss_2f1(a, b, c, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn student_tail_is_a_survival_function(
        s in 0.01f64..50.0,
        ds in 0.01f64..5.0,
        nu in nu_strategy(),
    ) {
        let g = student_tail(s, nu).unwrap();
        prop_assert!(g > 0.0 && g < 0.5);
        // strictly decreasing
        prop_assert!(student_tail(s + ds, nu).unwrap() < g);
    }

    #[test]
    fn heavier_tails_dominate_the_normal(s in 0.8f64..20.0, nu in nu_strategy()) {
        // for thresholds beyond the crossover region the Student tail
        // exceeds the normal tail
        prop_assert!(student_tail(s, nu).unwrap() > normal_tail(s) * (1.0 - 1e-12));
    }

    // ---------------------------------------------------------- quantiles

    #[test]
    fn quantile_is_decreasing_in_alpha(
        nu in nu_strategy(),
        a1 in 0.001f64..0.2,
        bump in 0.01f64..0.25,
    ) {
        let mix = [(1.0f64, GeneratorKind::StudentT { nu })];
        let q1 = solve_quantile(&mix, a1, 1).unwrap().q_alpha;
        let q2 = solve_quantile(&mix, a1 + bump, 1).unwrap().q_alpha;
        prop_assert!(q1 > q2);
    }

    #[test]
    fn splitting_a_component_changes_nothing(
        nu in nu_strategy(),
        alpha in alpha_strategy(),
        beta in 0.05f64..0.95,
    ) {
        // {(β, g), (1−β, g)} is the same law as {(1, g)}
        let merged = [(1.0f64, GeneratorKind::StudentT { nu })];
        let split = [
            (beta, GeneratorKind::StudentT { nu }),
            (1.0 - beta, GeneratorKind::StudentT { nu }),
        ];
        let q_merged = solve_quantile(&merged, alpha, 1).unwrap().q_alpha;
        let q_split = solve_quantile(&split, alpha, 1).unwrap().q_alpha;
        prop_assert!((q_merged - q_split).abs() <= 1e-9 * q_merged);
    }

    #[test]
    fn huge_degrees_of_freedom_approach_the_normal_quantile(alpha in 0.005f64..0.4) {
        let student = [(1.0f64, GeneratorKind::StudentT { nu: 5e5 })];
        let normal = [(1.0f64, GeneratorKind::Normal)];
        let qs = solve_quantile(&student, alpha, 1).unwrap().q_alpha;
        let qn = solve_quantile(&normal, alpha, 1).unwrap().q_alpha;
        prop_assert!((qs - qn).abs() <= 2e-3 * qn.max(1.0));
    }

    // ---------------------------------------------------------- risk measures

    #[test]
    fn es_dominates_var_and_both_scale(case in common_case(), c in 0.5f64..3.0) {
        let (model, p) = build(&case);
        let var = var_common_moments(&p, &model, case.alpha).unwrap();
        let es = es_generic(&p, &model, case.alpha, &var, EsConvention::default()).unwrap();
        prop_assert!(es.es.unwrap() >= es.var);

        let scaled_p = Portfolio::new(p.delta.iter().map(|d| c * d).collect()).unwrap();
        let scaled = var_common_moments(&scaled_p, &model, case.alpha).unwrap();
        prop_assert!((scaled.var - c * var.var).abs() <= 1e-9 * (c * var.var).abs().max(1.0));
    }

    #[test]
    fn euler_contributions_recompose_var(case in common_case()) {
        let (model, p) = build(&case);
        let var = var_common_moments(&p, &model, case.alpha).unwrap().var;
        let parts = incremental_var(&p, &model, case.alpha).unwrap();
        let total: f64 = parts.iter().sum();
        prop_assert!((total - var).abs() <= 1e-9 * var.abs().max(1.0));
    }

    #[test]
    fn identical_markets_aggregate_by_correlation(
        case in common_case(),
        rho in -0.9f64..0.9,
    ) {
        // two copies of one market with implied correlation ρ aggregate to
        // V·√(2+2ρ)
        let (model, p) = build(&case);
        let report = var_common_moments(&p, &model, case.alpha).unwrap();
        let q = report.quantile.unwrap().q_alpha;
        let v = report.var;
        let cross = rho * (v / q) * (v / q);
        let agg = aggregate_var(v, v, q, cross).unwrap();
        prop_assert!((agg - v * (2.0 + 2.0 * rho).sqrt()).abs() <= 1e-9 * v.max(1.0));
    }
}
