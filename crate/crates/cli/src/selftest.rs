//! Built-in analytic-oracle battery: quick closed-form checks of every
//! numerical layer, printable from the command line.

use fracguide::{
    caputo_l1, check_quadratic_inequality, check_saddle, default_tolerance, gamma, mittag_leffler,
    paper_example, rl_integral, solve_euler, CauchyProblem, FracOrder, GridFunction, RhsFunction,
    TimeGrid, Trajectory,
};

struct Check {
    label: &'static str,
    run: fn() -> Result<(), String>,
}

fn expect_close(label: &str, got: f64, want: f64, rel_tol: f64) -> Result<(), String> {
    let denom = want.abs().max(1e-300);
    let rel = (got - want).abs() / denom;
    if rel <= rel_tol {
        Ok(())
    } else {
        Err(format!(
            "{label}: got {got:.12e}, want {want:.12e} (rel err {rel:.2e})"
        ))
    }
}

fn gamma_identities() -> Result<(), String> {
    expect_close(
        "gamma(1)",
        gamma(1.0).map_err(|e| e.to_string())?,
        1.0,
        1e-12,
    )?;
    expect_close(
        "gamma(0.5)",
        gamma(0.5).map_err(|e| e.to_string())?,
        std::f64::consts::PI.sqrt(),
        1e-12,
    )?;
    expect_close(
        "gamma(5)",
        gamma(5.0).map_err(|e| e.to_string())?,
        24.0,
        1e-12,
    )?;
    expect_close(
        "gamma(50)",
        gamma(50.0).map_err(|e| e.to_string())?,
        6.0828186403426756087e62,
        1e-12,
    )
}

fn mittag_leffler_checks() -> Result<(), String> {
    for &z in &[-5.0, -2.5, 0.0, 2.5, 5.0] {
        expect_close(
            "E_1(z) vs exp",
            mittag_leffler(1.0, z).map_err(|e| e.to_string())?,
            z.exp(),
            1e-9,
        )?;
    }
    expect_close(
        "E_0.5(1)",
        mittag_leffler(0.5, 1.0).map_err(|e| e.to_string())?,
        5.0089800807622834663,
        1e-9,
    )
}

fn power_rules() -> Result<(), String> {
    let alpha = FracOrder::new(0.5).expect("valid order");
    let n = 512;
    let grid = TimeGrid::uniform(1.0, n).expect("valid grid");

    let ones = GridFunction::sample_scalar(grid.clone(), |_| 1.0);
    let integral = rl_integral(alpha, &ones);
    expect_close(
        "I^0.5 of 1 at t=1",
        integral.value(n)[0],
        1.0 / gamma(1.5).map_err(|e| e.to_string())?,
        1e-12,
    )?;

    let linear = GridFunction::sample_scalar(grid.clone(), |t| t);
    let deriv = caputo_l1(alpha, &linear).map_err(|e| e.to_string())?;
    expect_close(
        "D^0.5 of t at t=1",
        deriv.value(n)[0],
        1.0 / gamma(1.5).map_err(|e| e.to_string())?,
        1e-12,
    )?;

    let quadratic = GridFunction::sample_scalar(grid, |t| t * t);
    let deriv = caputo_l1(alpha, &quadratic).map_err(|e| e.to_string())?;
    expect_close(
        "D^0.5 of t^2 at t=1",
        deriv.value(n)[0],
        2.0 / gamma(2.5).map_err(|e| e.to_string())?,
        1e-2,
    )
}

fn solver_relaxation() -> Result<(), String> {
    let rhs = RhsFunction::new(1, 1.0, |_, x| vec![x[0]]).map_err(|e| e.to_string())?;
    let problem = CauchyProblem::new(rhs, FracOrder::new(0.5).expect("valid"), vec![1.0], 1.0)
        .map_err(|e| e.to_string())?;
    let n = 1024;
    let grid = TimeGrid::uniform(1.0, n).expect("valid grid");
    let x = solve_euler(&problem, &grid).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    for m in 0..=n {
        let exact = mittag_leffler(0.5, grid.t(m).sqrt()).map_err(|e| e.to_string())?;
        worst = worst.max((x.value(m)[0] - exact).abs() / exact);
    }
    if worst <= 0.01 {
        Ok(())
    } else {
        Err(format!(
            "relaxation solve: sup rel err {worst:.3e} above 1e-2"
        ))
    }
}

fn quadratic_inequality() -> Result<(), String> {
    let alpha = FracOrder::new(0.5).expect("valid");
    let n = 1024;
    let grid = TimeGrid::uniform(1.0, n).expect("valid grid");
    let x = Trajectory::sample(grid, 2, |t| vec![t, 0.0]).map_err(|e| e.to_string())?;
    let tol = default_tolerance(alpha, 1.0 / n as f64);
    let report = check_quadratic_inequality(&x, alpha, tol).map_err(|e| e.to_string())?;
    if report.is_violated() {
        Err(format!(
            "quadratic inequality violated: {:.3e} above tol {:.3e}",
            report.max_violation, report.tolerance_used
        ))
    } else {
        Ok(())
    }
}

fn saddle_gap() -> Result<(), String> {
    let config = paper_example();
    let check = check_saddle(
        &config.dynamics,
        1.0,
        &[0.3, -0.7],
        &[0.5, 0.2],
        &config.p,
        &config.q,
    )
    .map_err(|e| e.to_string())?;
    if check.gap.abs() <= 1e-12 && check.gap >= -1e-12 {
        Ok(())
    } else {
        Err(format!(
            "separable saddle gap {:.3e} out of tolerance",
            check.gap
        ))
    }
}

const CHECKS: &[Check] = &[
    Check {
        label: "gamma classical identities",
        run: gamma_identities,
    },
    Check {
        label: "mittag-leffler vs exp and reference",
        run: mittag_leffler_checks,
    },
    Check {
        label: "fractional power rules",
        run: power_rules,
    },
    Check {
        label: "solver relaxation convergence",
        run: solver_relaxation,
    },
    Check {
        label: "quadratic inequality on smooth case",
        run: quadratic_inequality,
    },
    Check {
        label: "separable saddle gap",
        run: saddle_gap,
    },
];

/// Run the battery, printing one line per check; `Err` carries the first
/// failure.
pub fn run() -> Result<(), String> {
    let mut failed = Vec::new();
    for check in CHECKS {
        match (check.run)() {
            Ok(()) => println!("ok      {}", check.label),
            Err(msg) => {
                println!("FAILED  {} -- {msg}", check.label);
                failed.push(check.label);
            }
        }
    }
    if failed.is_empty() {
        println!("selftest: {} checks passed", CHECKS.len());
        Ok(())
    } else {
        Err(format!(
            "selftest: {} of {} checks failed",
            failed.len(),
            CHECKS.len()
        ))
    }
}
