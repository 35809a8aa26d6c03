//! Text and CSV rendering of estimation results.
//!
//! Significance stars appear only in the text tables; machine formats carry
//! the raw numbers and nothing else. CSV cells use the shortest
//! round-tripping float representation, text tables a fixed display
//! precision.

use crate::egarch::EgarchFit;
use crate::regression::{ProxyOutcome, RegressionFit, TwoStageReport};

/// Conventional markers: `***` at 1%, `**` at 5%, `*` at 10%.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

/// Four significant display decimals, falling back to scientific notation
/// outside the comfortable fixed-point range.
fn fmt_value(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0.0000".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e6).contains(&a) {
        format!("{v:.4e}")
    } else {
        format!("{v:.4}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_value).unwrap_or_else(|| "--".to_string())
}

const RULE: &str = "------------------------------------------------------------------------";

fn coefficient_header() -> String {
    format!(
        "{:<24}{:>12}{:>12}{:>12}{:>12}\n",
        "Variable", "Coef.", "Std.Err.", "t-Stat", "Prob."
    )
}

/// One coefficient table for an OLS fit.
pub fn render_regression_text(fit: &RegressionFit, title: &str) -> String {
    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    out.push_str(RULE);
    out.push('\n');
    out.push_str(&coefficient_header());
    for i in 0..fit.k {
        out.push_str(&format!(
            "{:<24}{:>12}{:>12}{:>12}{:>12} {}\n",
            fit.coefficient_names[i],
            fmt_value(fit.coefficients[i]),
            fmt_value(fit.std_errors[i]),
            fmt_value(fit.t_stats[i]),
            fmt_value(fit.p_values[i]),
            significance_stars(fit.p_values[i]),
        ));
    }
    out.push_str(RULE);
    out.push('\n');
    out.push_str(&format!(
        "N = {}    R^2 = {}    adj. R^2 = {}    resid. s.e. = {}\n",
        fit.n,
        fmt_value(fit.r_squared),
        fmt_value(fit.adj_r_squared),
        fmt_value(fit.residual_std_error),
    ));
    out
}

/// Stage-one panel followed by one stage-two block per sentiment proxy,
/// including the ones that failed (with the reason).
pub fn render_two_stage_text(report: &TwoStageReport, label: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("Two-stage volatility regressions: {label}\n\n"));
    out.push_str(&render_regression_text(
        &report.stage_one,
        "Stage one: AR(1) mean equation",
    ));
    for proxy in &report.proxies {
        out.push('\n');
        match &proxy.outcome {
            ProxyOutcome::Fit(fit) => {
                out.push_str(&render_regression_text(
                    fit,
                    &format!("Stage two: squared residuals on {}", proxy.kind),
                ));
            }
            ProxyOutcome::Failed(reason) => {
                out.push_str(&format!(
                    "Stage two: squared residuals on {}\n  failed: {reason}\n",
                    proxy.kind
                ));
            }
        }
    }
    out
}

/// Tidy CSV for a two-stage report: one row per coefficient, with the fit
/// statistics repeated on each row of its block.
pub fn render_two_stage_csv(report: &TwoStageReport) -> String {
    let mut out = String::from(
        "stage,proxy,variable,coefficient,std_error,t_stat,p_value,r_squared,adj_r_squared,n\n",
    );
    let push_fit = |stage: &str, proxy: &str, fit: &RegressionFit, out: &mut String| {
        for i in 0..fit.k {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                stage,
                proxy,
                fit.coefficient_names[i],
                fit.coefficients[i],
                fit.std_errors[i],
                fit.t_stats[i],
                fit.p_values[i],
                fit.r_squared,
                fit.adj_r_squared,
                fit.n,
            ));
        }
    };
    push_fit("one", "", &report.stage_one, &mut out);
    for proxy in &report.proxies {
        if let ProxyOutcome::Fit(fit) = &proxy.outcome {
            push_fit("two", &proxy.kind.to_string(), fit, &mut out);
        }
    }
    out
}

/// One coefficient panel for a fitted variance model. Standard errors may be
/// unavailable (pinned fits, indefinite information); those columns show
/// `--`.
pub fn render_egarch_text(fit: &EgarchFit, title: &str) -> String {
    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    out.push_str(RULE);
    out.push('\n');
    out.push_str(&format!(
        "{:<24}{:>12}{:>12}{:>12}{:>12}\n",
        "Variable", "Coef.", "Std.Err.", "z-Stat", "Prob."
    ));
    let values = fit.params.to_vec();
    for (i, name) in fit.param_names.iter().enumerate() {
        let se = fit.standard_errors.as_ref().map(|v| v[i]);
        let z = fit.t_stats.as_ref().map(|v| v[i]);
        let p = fit.p_values.as_ref().map(|v| v[i]);
        let stars = p.map(significance_stars).unwrap_or("");
        out.push_str(&format!(
            "{:<24}{:>12}{:>12}{:>12}{:>12} {}\n",
            name,
            fmt_value(values[i]),
            fmt_opt(se),
            fmt_opt(z),
            fmt_opt(p),
            stars,
        ));
    }
    out.push_str(RULE);
    out.push('\n');
    out.push_str(&format!(
        "N = {}    k = {}    logL = {}    AIC/obs = {}    SC/obs = {}\n",
        fit.n,
        fit.k,
        fmt_value(fit.log_likelihood),
        fmt_value(fit.aic),
        fmt_value(fit.sc),
    ));
    out.push_str(&format!(
        "adj. R^2 = {}    sigma0^2 = {}    {} after {} iterations (start {} of {})\n",
        fmt_value(fit.adj_r_squared),
        fmt_value(fit.sigma0_sq),
        if fit.convergence.converged {
            "converged"
        } else {
            "stopped"
        },
        fit.convergence.iterations,
        fit.convergence.multistart_index,
        fit.convergence.starts_tried,
    ));
    for w in &fit.convergence.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    out
}

/// Side-by-side panels for the same specification fitted per period, in the
/// familiar coefficients-over-standard-errors layout. `None` marks a period
/// whose fit failed.
pub fn render_egarch_comparison(columns: &[(String, Option<&EgarchFit>)], title: &str) -> String {
    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    out.push_str(RULE);
    out.push('\n');
    let Some(reference) = columns.iter().find_map(|(_, f)| *f) else {
        out.push_str("no period produced a fit\n");
        return out;
    };
    out.push_str(&format!("{:<18}", ""));
    for (label, _) in columns {
        out.push_str(&format!("{label:>16}"));
    }
    out.push('\n');
    for (i, name) in reference.param_names.iter().enumerate() {
        out.push_str(&format!("{name:<18}"));
        for (_, fit) in columns {
            match fit {
                Some(f) => {
                    let stars = f
                        .p_values
                        .as_ref()
                        .map(|p| significance_stars(p[i]))
                        .unwrap_or("");
                    out.push_str(&format!(
                        "{:>16}",
                        format!("{}{}", fmt_value(f.params.to_vec()[i]), stars)
                    ));
                }
                None => out.push_str(&format!("{:>16}", "--")),
            }
        }
        out.push('\n');
        out.push_str(&format!("{:<18}", ""));
        for (_, fit) in columns {
            let cell = match fit {
                Some(f) => match &f.standard_errors {
                    Some(ses) => format!("({})", fmt_value(ses[i])),
                    None => "--".to_string(),
                },
                None => "--".to_string(),
            };
            out.push_str(&format!("{cell:>16}"));
        }
        out.push('\n');
    }
    out.push_str(RULE);
    out.push('\n');
    let summary_rows: [(&str, fn(&EgarchFit) -> String); 5] = [
        ("log-likelihood", |f| fmt_value(f.log_likelihood)),
        ("AIC per obs", |f| fmt_value(f.aic)),
        ("SC per obs", |f| fmt_value(f.sc)),
        ("adj. R^2", |f| fmt_value(f.adj_r_squared)),
        ("observations", |f| f.n.to_string()),
    ];
    for (label, getter) in summary_rows {
        out.push_str(&format!("{label:<18}"));
        for (_, fit) in columns {
            let cell = fit.map(getter).unwrap_or_else(|| "--".to_string());
            out.push_str(&format!("{cell:>16}"));
        }
        out.push('\n');
    }
    out
}

/// Tidy CSV for per-period variance fits: coefficient rows first, then the
/// summary statistics as pseudo-variables with empty inference columns.
pub fn render_egarch_csv(columns: &[(String, Option<&EgarchFit>)]) -> String {
    let mut out = String::from("period,variable,value,std_error,z_stat,p_value\n");
    for (label, fit) in columns {
        let Some(f) = fit else { continue };
        let values = f.params.to_vec();
        for (i, name) in f.param_names.iter().enumerate() {
            let se = f
                .standard_errors
                .as_ref()
                .map(|v| v[i].to_string())
                .unwrap_or_default();
            let z = f
                .t_stats
                .as_ref()
                .map(|v| v[i].to_string())
                .unwrap_or_default();
            let p = f
                .p_values
                .as_ref()
                .map(|v| v[i].to_string())
                .unwrap_or_default();
            out.push_str(&format!("{label},{},{},{se},{z},{p}\n", name, values[i]));
        }
        for (name, value) in [
            ("log_likelihood", f.log_likelihood),
            ("aic_per_obs", f.aic),
            ("sc_per_obs", f.sc),
            ("adj_r_squared", f.adj_r_squared),
            ("n", f.n as f64),
        ] {
            out.push_str(&format!("{label},{name},{value},,,\n"));
        }
    }
    out
}
