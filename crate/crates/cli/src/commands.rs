use std::sync::Arc;

use serde_json::{json, Value};

use teacup::dominance::{fosd_check, loss_cdf, sign_changes};
use teacup::figures::{
    default_path_grid, entropy_grid, optimal_path, DEFAULT_BINARY_PAYOFF, DEFAULT_TERNARY_PAYOFF,
};
use teacup::gibbs::{optimal_distribution_with, SolverOptions};
use teacup::hypothesis::{decide, power_curve};
use teacup::{
    exact_size, max_entropy, optimal_distribution, p_value, run_simulation, Alternative,
    EntropyLevel, Error, ExperimentDesign, GibbsSolution, LossClassTable, Orientation,
    RejectionRegion, Result, SimConfig, Tail,
};

use crate::output::{envelope, g17, print_csv, print_json, to_json};
use crate::{
    DesignArgs, DominanceArgs, FigureArgs, Format, PowerArgs, SimulateArgs, SolveArgs, TableArgs,
    TestArgs, DEFAULT_GRID_POINTS,
};

fn table_for(d: &DesignArgs) -> Result<Arc<LossClassTable>> {
    Ok(Arc::new(LossClassTable::new(ExperimentDesign::new(
        d.cups, d.tm,
    )?)?))
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

fn class_rows(table: &LossClassTable) -> Vec<Value> {
    (0..table.len())
        .map(|k| {
            json!({
                "class": k,
                "successes": table.successes()[k],
                "multiplicity": table.multiplicities()[k],
                "loss": table.losses()[k],
            })
        })
        .collect()
}

pub fn table(a: &TableArgs) -> Result<()> {
    let t = table_for(&a.design)?;
    if a.format == Format::Csv {
        let rows: Vec<Vec<String>> = (0..t.len())
            .map(|k| {
                vec![
                    k.to_string(),
                    t.successes()[k].to_string(),
                    t.multiplicities()[k].to_string(),
                    t.losses()[k].to_string(),
                ]
            })
            .collect();
        print_csv(&["class", "successes", "multiplicity", "loss"], &rows);
        return Ok(());
    }
    print_json(&envelope(
        "table",
        json!({ "cups": a.design.cups, "tm": a.design.tm, "format": format_name(a.format) }),
        json!({
            "total": t.total(),
            "max_entropy": max_entropy(t.design()).value(),
            "classes": class_rows(&t),
        }),
    ));
    Ok(())
}

fn solution_json(s: &GibbsSolution) -> Value {
    let t = s.table();
    let masses = s.dist.class_masses();
    let classes: Vec<Value> = (0..t.len())
        .map(|k| {
            json!({
                "class": k,
                "successes": t.successes()[k],
                "multiplicity": t.multiplicities()[k],
                "loss": t.losses()[k],
                "probability": s.dist.probabilities()[k],
                "class_mass": masses[k],
            })
        })
        .collect();
    json!({
        "beta": s.beta.value(),
        "temperature": if s.beta.value() > 0.0 { json!(s.beta.temperature()) } else { Value::Null },
        "target_entropy": s.target.value(),
        "entropy": s.entropy,
        "expected_loss": s.expected_loss,
        "expected_successes": s.expected_successes,
        "log_normalizer": s.log_normalizer,
        "orientation": to_json(&s.orientation),
        "dirac_limit": s.dirac_limit,
        "classes": classes,
    })
}

fn entropy_level(
    design: ExperimentDesign,
    h: Option<f64>,
    frac: Option<f64>,
) -> Result<EntropyLevel> {
    match (h, frac) {
        (Some(h), _) => EntropyLevel::new(h),
        (None, Some(f)) => EntropyLevel::fraction_of_max(design, f),
        (None, None) => Err(Error::InvalidArgument(
            "an entropy level is required".into(),
        )),
    }
}

pub fn solve(a: &SolveArgs) -> Result<()> {
    let t = table_for(&a.design)?;
    let h = entropy_level(t.design(), a.entropy, a.entropy_frac)?;
    let options = SolverOptions {
        tolerance: a.tolerance,
        orientation: if a.maximize {
            Orientation::Maximize
        } else {
            Orientation::Minimize
        },
        ..SolverOptions::default()
    };
    let s = optimal_distribution_with(&t, h, &options)?;
    print_json(&envelope(
        "solve",
        json!({
            "cups": a.design.cups,
            "tm": a.design.tm,
            "entropy": a.entropy,
            "entropy_frac": a.entropy_frac,
            "maximize": a.maximize,
            "tolerance": a.tolerance,
            "max_iterations": options.max_iterations,
        }),
        solution_json(&s),
    ));
    Ok(())
}

pub fn test(a: &TestArgs) -> Result<()> {
    let t = table_for(&a.design)?;
    let region = RejectionRegion::named(a.region.kind(), &t)?;
    let decision = decide(&t, &region, a.observed_loss, a.level)?;
    let mut p_values = serde_json::Map::new();
    for tail in [Tail::RightSuccess, Tail::LeftSuccess, Tail::TwoSided] {
        let p = p_value(&t, a.observed_loss, tail)?;
        p_values.insert(
            to_json(&tail).as_str().expect("tail name").to_string(),
            json!({ "exact": p.exact.to_string(), "value": p.value }),
        );
    }
    print_json(&envelope(
        "test",
        json!({
            "cups": a.design.cups,
            "tm": a.design.tm,
            "observed_loss": a.observed_loss,
            "region": region.name(),
            "level": a.level,
        }),
        json!({
            "region": region.name(),
            "region_losses": region.classes.iter().map(|&k| t.losses()[k]).collect::<Vec<_>>(),
            "size": decision.report.size.to_string(),
            "size_value": decision.report.size_value,
            "size_within_level": decision.report.rejects_at_level,
            "observed_class": decision.observed_class,
            "observed_in_region": decision.observed_in_region,
            "rejects": decision.rejects,
            "p_values": p_values,
        }),
    ));
    Ok(())
}

pub fn power(a: &PowerArgs) -> Result<()> {
    let t = table_for(&a.design)?;
    let region = RejectionRegion::named(a.region.kind(), &t)?;
    let hbar = max_entropy(t.design());
    let grid_points = a.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
    let grid: Vec<EntropyLevel> = match &a.h_grid {
        Some(hs) => hs
            .iter()
            .map(|&h| EntropyLevel::new(h))
            .collect::<Result<_>>()?,
        None => {
            if grid_points == 0 {
                return Err(Error::InvalidArgument(
                    "grid-points must be at least 1".into(),
                ));
            }
            (1..=grid_points)
                .map(|i| EntropyLevel::fraction_of_max(t.design(), i as f64 / grid_points as f64))
                .collect::<Result<_>>()?
        }
    };
    let size = exact_size(&t, &region, teacup::hypothesis::DEFAULT_LEVEL)?;
    let curve = power_curve(&t, &region, &grid)?;
    if a.format == Format::Csv {
        let rows: Vec<Vec<String>> = curve
            .iter()
            .map(|p| {
                vec![
                    g17(p.h.value()),
                    g17(p.h.value() / hbar.value()),
                    g17(p.power),
                ]
            })
            .collect();
        print_csv(&["h", "fraction_of_max", "power"], &rows);
        return Ok(());
    }
    let points: Vec<Value> = curve
        .iter()
        .map(|p| json!({ "h": p.h.value(), "fraction_of_max": p.h.value() / hbar.value(), "power": p.power }))
        .collect();
    print_json(&envelope(
        "power",
        json!({
            "cups": a.design.cups,
            "tm": a.design.tm,
            "region": region.name(),
            "h_grid": a.h_grid,
            "grid_points": if a.h_grid.is_some() { Value::Null } else { json!(grid_points) },
            "format": format_name(a.format),
        }),
        json!({
            "size": size.size.to_string(),
            "size_value": size.size_value,
            "max_entropy": hbar.value(),
            "points": points,
        }),
    ));
    Ok(())
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let t = table_for(&a.design)?;
    let region = RejectionRegion::named(a.region.kind(), &t)?;
    let alternative = if a.entropy.is_some() || a.entropy_frac.is_some() {
        Alternative::Entropy(entropy_level(t.design(), a.entropy, a.entropy_frac)?)
    } else {
        Alternative::Null
    };
    let workers = match a.workers {
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let report = run_simulation(&SimConfig {
        design: t.design(),
        alternative,
        region: region.clone(),
        replications: a.reps,
        seed: a.seed,
        workers,
    })?;
    let exact = match alternative {
        Alternative::Null => exact_size(&t, &region, teacup::hypothesis::DEFAULT_LEVEL)?.size_value,
        Alternative::Entropy(h) => teacup::power(&t, &region, h)?,
    };
    let exact_se = (exact * (1.0 - exact) / a.reps as f64).sqrt();
    let mut results = to_json(&report);
    results["exact_rejection_probability"] = json!(exact);
    results["exact_standard_error"] = json!(exact_se);
    results["losses"] = json!(t.losses());
    print_json(&envelope(
        "simulate",
        json!({
            "cups": a.design.cups,
            "tm": a.design.tm,
            "alternative": match alternative {
                Alternative::Null => json!("null"),
                Alternative::Entropy(h) => json!({ "entropy": h.value() }),
            },
            "entropy": a.entropy,
            "entropy_frac": a.entropy_frac,
            "region": region.name(),
            "reps": a.reps,
            "seed": a.seed,
        }),
        results,
    ));
    Ok(())
}

pub fn figure(a: &FigureArgs) -> Result<()> {
    let dimension = a.dimension as usize;
    let payoff = match &a.payoff {
        Some(c) => c.clone(),
        None if dimension == 2 => DEFAULT_BINARY_PAYOFF.to_vec(),
        None => DEFAULT_TERNARY_PAYOFF.to_vec(),
    };
    if payoff.len() != dimension {
        return Err(Error::InvalidArgument(format!(
            "payoff has {} entries but the simplex has dimension {dimension}",
            payoff.len()
        )));
    }
    if a.path_points == 0 {
        return Err(Error::InvalidArgument(
            "path-points must be at least 1".into(),
        ));
    }
    let grid = entropy_grid(dimension, a.resolution)?;
    let path = optimal_path(&payoff, &default_path_grid(dimension, a.path_points))?;
    if a.format == Format::Csv {
        let coords = |c: &[f64]| {
            (0..3)
                .map(|i| c.get(i).map_or(String::new(), |&x| g17(x)))
                .collect::<Vec<_>>()
        };
        let mut rows = Vec::with_capacity(grid.len() + path.points.len());
        for (i, p) in grid.iter().enumerate() {
            let mut row = vec![
                "grid".to_string(),
                i.to_string(),
                String::new(),
                g17(p.entropy),
                String::new(),
                String::new(),
            ];
            row.extend(coords(&p.coordinates));
            rows.push(row);
        }
        for (i, p) in path.points.iter().enumerate() {
            let mut row = vec![
                "path".to_string(),
                i.to_string(),
                g17(p.h),
                g17(p.entropy),
                g17(p.beta),
                g17(p.payoff),
            ];
            row.extend(coords(&p.distribution));
            rows.push(row);
        }
        print_csv(
            &[
                "series", "index", "h", "entropy", "beta", "payoff", "p1", "p2", "p3",
            ],
            &rows,
        );
        return Ok(());
    }
    print_json(&envelope(
        "figure",
        json!({
            "dimension": dimension,
            "resolution": a.resolution,
            "payoff": payoff,
            "path_points": a.path_points,
            "format": format_name(a.format),
        }),
        json!({ "grid": to_json(&grid), "path": to_json(&path) }),
    ));
    Ok(())
}

pub fn dominance(a: &DominanceArgs) -> Result<()> {
    let t = table_for(&a.design)?;
    let low = optimal_distribution(&t, EntropyLevel::new(a.h_low)?)?;
    let high = optimal_distribution(&t, EntropyLevel::new(a.h_high)?)?;
    let verdict = fosd_check(&low, &high)?;
    let side = |s: &GibbsSolution| {
        json!({
            "h": s.target.value(),
            "beta": s.beta.value(),
            "expected_loss": s.expected_loss,
            "class_masses": s.dist.class_masses(),
            "loss_cdf": loss_cdf(&s.dist).cdf,
        })
    };
    print_json(&envelope(
        "dominance",
        json!({ "cups": a.design.cups, "tm": a.design.tm, "h_low": a.h_low, "h_high": a.h_high }),
        json!({
            "dominates": verdict.dominates,
            "max_violation": verdict.max_violation,
            "sign_changes": sign_changes(low.dist.probabilities(), high.dist.probabilities(), 1e-15),
            "losses": t.losses(),
            "low": side(&low),
            "high": side(&high),
        }),
    ));
    Ok(())
}
