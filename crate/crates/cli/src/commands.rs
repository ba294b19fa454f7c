//! One function per subcommand. Each returns a verdict, a one-line headline
//! and the artifacts to write; nothing here touches the filesystem.

use anyhow::{anyhow, Context, Result};
use nevlab::determinants::{
    matrix_transform_check, nondegenerate_over_constants, nondegenerate_over_periodic, Degeneracy,
};
use nevlab::nevanlinna::{growth_table, logdiff_constant, order_estimates, GrowthTable, LogDiffSample};
use nevlab::nochka::{compute_weights, fmt_rational, verify_weights, CheckRecord};
use nevlab::projgeom::{HyperplaneSystem, PositionCertificate, ProjectiveMap};
use nevlab::sampling::annulus_points;
use nevlab::smt::{borel_partition, chen_margin_with, defects_with, smt_margin_with, SmtReport, Tolerances, Verdict};
use nevlab::Complex64;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::output::{num, opt, Artifacts, Table};
use crate::svg::{line_plot, Axes, Series};

pub struct Outcome {
    pub verdict: Verdict,
    pub headline: String,
    pub artifacts: Artifacts,
}

fn map(cfg: &ExperimentConfig) -> Result<&ProjectiveMap> {
    cfg.map.as_ref().ok_or_else(|| anyhow!("no mapping configured"))
}

fn system(cfg: &ExperimentConfig) -> Result<&HyperplaneSystem> {
    cfg.system.as_ref().ok_or_else(|| anyhow!("no hyperplanes configured"))
}

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn checks_json(records: &[CheckRecord]) -> Value {
    records
        .iter()
        .map(|r| json!({ "check": format!("{:?}", r.kind), "passed": r.passed, "detail": r.detail, "witness": r.witness }))
        .collect()
}

fn growth_csv(table: &GrowthTable, file: &str) -> Table {
    let labels = &table.meta.plane_labels;
    let mut header = vec!["r".to_string(), "T".to_string()];
    for l in labels {
        header.push(format!("N_{l}"));
        header.push(format!("m_{l}"));
        header.push(format!("residual_{l}"));
    }
    let mut t = Table {
        file: file.into(),
        notes: vec![
            format!(
                "growth table, K = {} quadrature points, c = {}",
                table.meta.quadrature_points, table.meta.c
            ),
            "T: characteristic function T_f(r), circle average of log||f|| minus its value at r = 1".into(),
            "N_H: counting function of the zeros of (f,H); m_H: proximity function of H".into(),
            "residual_H: T - N_H - m_H, bounded in r by the first main theorem".into(),
        ],
        header,
        rows: Vec::new(),
    };
    for row in &table.rows {
        let mut rec = vec![num(row.r), num(row.t)];
        for j in 0..labels.len() {
            rec.push(num(row.counting[j]));
            rec.push(num(row.proximity[j]));
            rec.push(num(row.t - row.counting[j] - row.proximity[j]));
        }
        t.push(rec);
    }
    t
}

pub fn check_position(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sys = system(cfg)?;
    let cert = sys.check_subgeneral();
    let general = sys.in_general_position();
    let (verdict, detail, headline) = match &cert {
        PositionCertificate::Pass { verified } => (
            Verdict::Pass,
            json!({ "subsets_checked": verified.len() }),
            format!(
                "{} hyperplanes in P^{} are in {}-subgeneral position",
                sys.q(),
                sys.n(),
                sys.big_n()
            ),
        ),
        PositionCertificate::Fail { witness, rank } => (
            Verdict::Fail,
            json!({ "witness": witness, "rank": rank }),
            format!("planes {witness:?} have rank {rank} < n + 1 = {}", sys.n() + 1),
        ),
    };
    let report = json!({
        "command": "check-position",
        "verdict": verdict.to_string(),
        "q": sys.q(), "n": sys.n(), "N": sys.big_n(),
        "general_position": general,
        "certificate": detail,
    });
    Ok(Outcome {
        verdict,
        headline,
        artifacts: Artifacts {
            tables: Vec::new(),
            plots: Vec::new(),
            report,
        },
    })
}

pub fn nochka(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sys = system(cfg)?;
    let w = compute_weights(sys)?;
    let cert = verify_weights(&w, sys);
    let verdict = Verdict::from_bool(cert.passed());
    let mut t = Table::new("weights.csv", &["j", "label", "weight", "weight_decimal"]).note(format!(
        "Nochka weights, constant {} ({})",
        fmt_rational(&w.constant),
        w.constant_f64()
    ));
    for (j, (x, h)) in w.weights.iter().zip(sys.planes()).enumerate() {
        t.push(vec![
            j.to_string(),
            h.label().to_string(),
            fmt_rational(x),
            num(w.weights_f64()[j]),
        ]);
    }
    let report = json!({
        "command": "nochka",
        "verdict": verdict.to_string(),
        "q": sys.q(), "n": sys.n(), "N": sys.big_n(),
        "constant": fmt_rational(&w.constant),
        "weights": w.weights.iter().map(fmt_rational).collect::<Vec<_>>(),
        "checks": checks_json(&cert.records),
    });
    Ok(Outcome {
        verdict,
        headline: format!(
            "constant {} on {} planes, verifier {}",
            fmt_rational(&w.constant),
            sys.q(),
            verdict
        ),
        artifacts: Artifacts {
            tables: vec![t],
            plots: Vec::new(),
            report,
        },
    })
}

fn degeneracy_json(d: &Degeneracy) -> Value {
    match d {
        Degeneracy::Nondegenerate { witness, relative } => {
            json!({ "nondegenerate": true, "witness": cjson(*witness), "relative": relative })
        }
        Degeneracy::Degenerate { witnesses } => json!({ "nondegenerate": false, "samples": witnesses.len() }),
    }
}

/// Residual budget for `C(fB) = det B · C(f)`.
const TRANSFORM_TOL: f64 = 1e-8;

pub fn casorati(cfg: &ExperimentConfig) -> Result<Outcome> {
    let f = map(cfg)?;
    let periodic = nondegenerate_over_periodic(f)?;
    let constants = nondegenerate_over_constants(f)?;
    let m = f.components().len();
    let count = cfg.raw.options.transforms;
    let entries = annulus_points(count * m * m, 0.5, 2.0, cfg.seed);
    let mut t = Table::new("transforms.csv", &["sample", "det_b_re", "det_b_im", "residual"]).note(format!(
        "|C(fB) - det B C(f)| relative to the Hadamard bound, {count} random B from seed {}",
        cfg.seed
    ));
    let mut worst: f64 = 0.0;
    for (s, chunk) in entries.chunks(m * m).enumerate() {
        let b: Vec<Vec<Complex64>> = chunk.chunks(m).map(|row| row.to_vec()).collect();
        let residual = matrix_transform_check(f, &b).with_context(|| format!("transform {s}"))?;
        let det = complex_det(&b);
        worst = worst.max(residual);
        t.push(vec![s.to_string(), num(det.re), num(det.im), num(residual)]);
    }
    let verdict = Verdict::from_bool(periodic.is_nondegenerate() && worst <= TRANSFORM_TOL);
    let report = json!({
        "command": "casorati",
        "verdict": verdict.to_string(),
        "c": cjson(f.shift_offset()),
        "over_periodic": degeneracy_json(&periodic),
        "over_constants": degeneracy_json(&constants),
        "transform_max_residual": worst,
        "transform_tolerance": TRANSFORM_TOL,
    });
    let word = |d: &Degeneracy| {
        if d.is_nondegenerate() {
            "nondegenerate"
        } else {
            "degenerate"
        }
    };
    Ok(Outcome {
        verdict,
        headline: format!(
            "C(f) {} over periodic functions, W(f) {} over constants, max transform residual {worst:.2e}",
            word(&periodic),
            word(&constants)
        ),
        artifacts: Artifacts {
            tables: vec![t],
            plots: Vec::new(),
            report,
        },
    })
}

/// Gaussian elimination with partial pivoting, for reporting `det B`.
fn complex_det(b: &[Vec<Complex64>]) -> Complex64 {
    let mut a: Vec<Vec<Complex64>> = b.to_vec();
    let n = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let Some(p) = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())) else {
            break;
        };
        if a[p][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        det *= a[col][col];
        for i in col + 1..n {
            let factor = a[i][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[i][k] -= factor * v;
            }
        }
    }
    det
}

fn t_plot(table: &GrowthTable) -> (String, String) {
    let pts = table.rows.iter().map(|r| (r.r, r.t)).collect();
    let svg = line_plot(
        "characteristic function",
        "r",
        "T_f(r)",
        Axes {
            log_x: true,
            log_y: true,
        },
        &[Series::new("T_f", pts)],
    );
    ("tchar.svg".into(), svg)
}

fn order_json(table: &GrowthTable) -> Value {
    match order_estimates(table) {
        Ok(e) => json!({
            "order": e.order, "hyperorder": e.hyperorder,
            "order_residual": e.order_residual, "hyperorder_residual": e.hyperorder_residual,
        }),
        Err(e) => json!({ "unavailable": e.to_string() }),
    }
}

fn planes_of(cfg: &ExperimentConfig) -> (&[nevlab::projgeom::Hyperplane], usize) {
    match &cfg.system {
        Some(s) => (s.planes(), s.big_n()),
        None => (&[], cfg.map.as_ref().map_or(0, |f| f.dim())),
    }
}

pub fn tchar(cfg: &ExperimentConfig) -> Result<Outcome> {
    let f = map(cfg)?;
    let (planes, big_n) = planes_of(cfg);
    let table = growth_table(f, planes, big_n, &cfg.grid)?;
    let verdict = Verdict::from_bool(table.all_finite());
    let last = table.rows.last().expect("grid is nonempty");
    let report = json!({
        "command": "tchar",
        "verdict": verdict.to_string(),
        "quadrature": cfg.grid.quadrature_points(),
        "radii": table.radii(),
        "T": table.t_values(),
        "estimates": order_json(&table),
    });
    Ok(Outcome {
        verdict,
        headline: format!("T_f({}) = {:.6} over {} radii", last.r, last.t, table.rows.len()),
        artifacts: Artifacts {
            tables: vec![growth_csv(&table, "growth.csv")],
            plots: vec![t_plot(&table)],
            report,
        },
    })
}

pub fn fmt_check(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<Outcome> {
    let f = map(cfg)?;
    let sys = system(cfg)?;
    let table = growth_table(f, sys.planes(), sys.big_n(), &cfg.grid)?;
    let budget = tol.relative * table.rows.last().expect("grid is nonempty").t.max(1.0);
    let mut per_plane = Vec::new();
    let mut series = Vec::new();
    let mut worst: f64 = 0.0;
    for (j, h) in sys.planes().iter().enumerate() {
        let res = table.fmt_residual(j);
        let hi = res.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = res.iter().copied().fold(f64::INFINITY, f64::min);
        let osc = hi - lo;
        worst = worst.max(osc);
        per_plane
            .push(json!({ "label": h.label(), "oscillation": osc, "min": lo, "max": hi, "passed": osc <= budget }));
        series.push(Series::new(
            h.label(),
            table.rows.iter().map(|r| r.r).zip(res).collect(),
        ));
    }
    let verdict = Verdict::from_bool(worst <= budget);
    let svg = line_plot(
        "first main theorem residual T - N - m",
        "r",
        "residual",
        Axes {
            log_x: true,
            log_y: false,
        },
        &series,
    );
    let report = json!({
        "command": "fmt-check",
        "verdict": verdict.to_string(),
        "budget": budget,
        "relative_tolerance": tol.relative,
        "planes": per_plane,
    });
    Ok(Outcome {
        verdict,
        headline: format!("max oscillation {worst:.4} against budget {budget:.4}"),
        artifacts: Artifacts {
            tables: vec![growth_csv(&table, "growth.csv")],
            plots: vec![("fmt.svg".into(), svg)],
            report,
        },
    })
}

pub fn logdiff(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<Outcome> {
    let g = cfg.function.as_ref().ok_or_else(|| anyhow!("no function configured"))?;
    let (alpha, delta) = (cfg.raw.options.alpha, cfg.raw.options.delta);
    let (samples, offset) =
        LogDiffSample::sweep(g, cfg.c, cfg.grid.radii(), alpha, delta, cfg.grid.quadrature_points())?;
    let mut t = Table::new("logdiff.csv", &["r", "proximity", "characteristic", "bound", "holds"])
        .note(format!("m(r, g(z+c)/g(z)) against K(alpha, delta, c)/r^delta (T_g(alpha(r+|c|)) + log+ 1/|g(0)|), alpha = {alpha}, delta = {delta}"))
        .note("characteristic: T_g evaluated at alpha(r+|c|)");
    let mut held = 0;
    for s in &samples {
        let ok = s.holds(1e-9);
        held += ok as usize;
        t.push(vec![
            num(s.r),
            num(s.proximity),
            num(s.characteristic),
            num(s.bound),
            ok.to_string(),
        ]);
    }
    let fraction = held as f64 / samples.len() as f64;
    let verdict = Verdict::from_bool(fraction >= 1.0 - tol.exceptional_fraction);
    let radii: Vec<f64> = samples.iter().map(|s| s.r).collect();
    let svg = line_plot(
        "logarithmic difference estimate",
        "r",
        "value",
        Axes {
            log_x: true,
            log_y: true,
        },
        &[
            Series::new(
                "proximity",
                radii.iter().copied().zip(samples.iter().map(|s| s.proximity)).collect(),
            ),
            Series::new(
                "bound",
                radii.iter().copied().zip(samples.iter().map(|s| s.bound)).collect(),
            )
            .dashed(),
        ],
    );
    let report = json!({
        "command": "logdiff",
        "verdict": verdict.to_string(),
        "function": g.to_string(),
        "c": cjson(cfg.c),
        "alpha": alpha, "delta": delta,
        "constant": logdiff_constant(alpha, delta, cfg.c.norm()),
        "recentering_offset": cjson(offset),
        "holds_fraction": fraction,
        "failing_radii": samples.iter().filter(|s| !s.holds(1e-9)).map(|s| s.r).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        verdict,
        headline: format!("bound holds on {held}/{} radii", samples.len()),
        artifacts: Artifacts {
            tables: vec![t],
            plots: vec![("logdiff.svg".into(), svg)],
            report,
        },
    })
}

fn margin_outcome(name: &str, cfg: &ExperimentConfig, rep: SmtReport) -> Result<Outcome> {
    let sys = system(cfg)?;
    let weights = compute_weights(sys)?;
    let mut t = Table::new(
        "margin.csv",
        &[
            "r",
            "T",
            "lhs",
            "counting_sum",
            "det_counting",
            "rhs",
            "margin",
            "tol",
            "quadrature_error",
            "relative_margin",
            "exceptional",
        ],
    )
    .note(format!(
        "{} form, coefficient {}, lhs = (q-2N+n-1) T with q-2N+n-1 = {}",
        rep.form.name(),
        fmt_rational(&rep.coefficient),
        rep.excess
    ))
    .note("rhs = counting_sum - coefficient * det_counting; margin = rhs - lhs; exceptional when margin < -tol");
    for row in &rep.rows {
        t.push(vec![
            num(row.r),
            num(row.t),
            num(row.lhs),
            num(row.counting_sum),
            num(row.det_counting),
            num(row.rhs),
            num(row.margin),
            num(row.tol),
            num(row.quadrature_error),
            opt(row.relative_margin),
            row.exceptional.to_string(),
        ]);
    }
    let radii: Vec<f64> = rep.rows.iter().map(|r| r.r).collect();
    let svg = line_plot(
        &format!("second main theorem margin ({})", rep.form.name()),
        "r",
        "margin",
        Axes {
            log_x: true,
            log_y: false,
        },
        &[
            Series::new(
                "margin",
                radii.iter().copied().zip(rep.rows.iter().map(|r| r.margin)).collect(),
            ),
            Series::new(
                "-tol",
                radii.iter().copied().zip(rep.rows.iter().map(|r| -r.tol)).collect(),
            )
            .dashed(),
        ],
    );
    let within = rep.rows.iter().filter(|r| !r.exceptional).count();
    let report = json!({
        "command": name,
        "verdict": rep.verdict.to_string(),
        "form": rep.form.name(),
        "coefficient": fmt_rational(&rep.coefficient),
        "excess": rep.excess,
        "q": sys.q(), "n": sys.n(), "N": sys.big_n(),
        "nochka_constant": fmt_rational(&weights.constant),
        "nochka_weights": weights.weights.iter().map(fmt_rational).collect::<Vec<_>>(),
        "hyperorder_estimate": rep.hyperorder,
        "pass_fraction": rep.pass_fraction(),
        "exceptional_radii": rep.exceptional_radii,
        "tolerances": {
            "relative": rep.tolerances.relative,
            "exceptional_fraction": rep.tolerances.exceptional_fraction,
        },
    });
    Ok(Outcome {
        verdict: rep.verdict,
        headline: format!("margin >= -tol on {within}/{} radii", rep.rows.len()),
        artifacts: Artifacts {
            tables: vec![t, growth_csv(&rep.table, "growth.csv")],
            plots: vec![("margin.svg".into(), svg)],
            report,
        },
    })
}

pub fn smt(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<Outcome> {
    let rep = smt_margin_with(map(cfg)?, system(cfg)?, &cfg.grid, tol)?;
    margin_outcome("smt", cfg, rep)
}

pub fn chen(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<Outcome> {
    let rep = chen_margin_with(map(cfg)?, system(cfg)?, &cfg.grid, tol)?;
    margin_outcome("chen", cfg, rep)
}

pub fn defects(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<Outcome> {
    let sys = system(cfg)?;
    let rep = defects_with(map(cfg)?, sys, &cfg.grid, tol)?;
    let mut t = Table::new("defects.csv", &["quantity", "label", "value"]).note(format!(
        "estimated on the top grid quartile r in [{}, {}]",
        rep.quartile_radii[0],
        rep.quartile_radii[rep.quartile_radii.len() - 1]
    ));
    for (h, d) in sys.planes().iter().zip(&rep.per_plane) {
        t.push(vec!["delta".into(), h.label().into(), num(*d)]);
    }
    t.push(vec!["delta_C".into(), "casorati".into(), num(rep.delta_c)]);
    if let Some(w) = rep.delta_w {
        t.push(vec!["delta_W".into(), "wronskian".into(), num(w)]);
    }
    let report = json!({
        "command": "defects",
        "verdict": rep.verdict.to_string(),
        "quartile_radii": rep.quartile_radii,
        "per_plane": rep.per_plane,
        "delta_c": rep.delta_c,
        "delta_w": rep.delta_w,
        "coefficient": fmt_rational(&rep.coefficient),
        "bound": rep.bound,
        "slack": rep.slack,
        "chen_slack": rep.chen_slack,
        "in_bounds": rep.in_bounds,
    });
    Ok(Outcome {
        verdict: rep.verdict,
        headline: format!("defect relation slack {:.4} against 2N-n+1 = {}", rep.slack, rep.bound),
        artifacts: Artifacts {
            tables: vec![t],
            plots: Vec::new(),
            report,
        },
    })
}

pub fn partition(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rep = borel_partition(&cfg.functions, cfg.c)?;
    let mut t = Table::new("pairs.csv", &["i", "j", "residual"]).note(
        "max over samples of |rho(z+c) - rho(z)| / (1 + |rho(z)|), rho = g_i/g_j; empty when no sample was usable",
    );
    for p in &rep.pairs {
        t.push(vec![p.i.to_string(), p.j.to_string(), opt(p.residual)]);
    }
    let sums_ok = rep.class_sum_residuals.is_none() || rep.class_sums_vanish();
    let verdict = Verdict::from_bool(rep.inconclusive.is_empty() && sums_ok);
    let report = json!({
        "command": "partition",
        "verdict": verdict.to_string(),
        "functions": cfg.functions.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        "c": cjson(cfg.c),
        "classes": rep.classes,
        "dimension_bound": rep.dimension_bound,
        "inconclusive": rep.inconclusive,
        "total_sum_residual": rep.total_sum_residual,
        "class_sum_residuals": rep.class_sum_residuals,
    });
    Ok(Outcome {
        verdict,
        headline: format!("{} classes: {:?}", rep.classes.len(), rep.classes),
        artifacts: Artifacts {
            tables: vec![t],
            plots: Vec::new(),
            report,
        },
    })
}
