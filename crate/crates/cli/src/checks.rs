//! The identity suite run by `dvbc check` on a document's bundle.

use std::sync::Arc;

use dvbc_core::cochain::{
    cup, curvature, d_nabla, d_nabla_hom, d_scalar, dot_cochain1_section, dot_sections, hom_action,
    nabla, wedge,
};
use dvbc_core::fixtures::{random_cochain, random_scalar_cochain};
use dvbc_core::tolerance::max_abs_diff;
use dvbc_core::{
    is_flat, is_metric_compatible, Bundle, CochainError, ProductOrder, ScalarCochain, Tolerance,
    VBCochain, Verdict,
};
use nalgebra::DMatrix;

use crate::document::{Document, NamedCochain};
use crate::report::{Report, Status};
use crate::CliError;

/// Random inputs drawn per identity.
pub const SAMPLES: u64 = 3;

fn threshold(tol: &Tolerance, scale: f64) -> f64 {
    tol.abs + tol.rel * scale
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Largest residual and the magnitude it is measured against.
#[derive(Default)]
struct Worst {
    residual: f64,
    scale: f64,
    cases: usize,
}

impl Worst {
    fn record(&mut self, lhs: &VBCochain, rhs: &VBCochain) {
        self.residual = self.residual.max(lhs.distance(rhs));
        self.scale = self.scale.max(lhs.max_abs()).max(rhs.max_abs());
        self.cases += 1;
    }

    fn report(&self, report: &mut Report, name: &str, tol: &Tolerance) {
        report.measure(
            name,
            self.residual,
            threshold(tol, self.scale),
            format!("{} cases", self.cases),
        );
    }
}

fn seeds(seed: u64) -> impl Iterator<Item = u64> {
    (0..SAMPLES).map(move |i| seed.wrapping_add(i))
}

fn sample(bundle: &Arc<Bundle>, k: usize, seed: u64) -> Result<VBCochain, CliError> {
    random_cochain(bundle, k, seed).map_err(|e| CliError::Compute(e.to_string()))
}

fn sample_scalar(bundle: &Arc<Bundle>, l: usize, seed: u64) -> Result<ScalarCochain, CliError> {
    random_scalar_cochain(bundle.complex(), l, seed).map_err(|e| CliError::Compute(e.to_string()))
}

fn involution(doc: &Document, bundle: &Bundle, tol: &Tolerance, report: &mut Report) {
    let mut worst = 0.0f64;
    let mut bad = None;
    if let Verdict::Violation { at, residual } = bundle.check_involution(tol) {
        worst = residual;
        bad = Some(at.to_string());
    }
    for (&(i, j), inv) in &doc.inverses {
        let u = bundle.transport(i, j).expect("stored edge");
        let left = u * inv;
        let right = inv * u;
        let r = max_abs_diff(&left, &DMatrix::identity(left.nrows(), left.ncols())).max(
            max_abs_diff(&right, &DMatrix::identity(right.nrows(), right.ncols())),
        );
        if r > worst {
            worst = r;
        }
        if !tol.is_identity(&left) || !tol.is_identity(&right) {
            bad.get_or_insert_with(|| format!("[{i},{j}]"));
        }
    }
    let detail = match &bad {
        Some(at) => format!("first violation on edge {at}"),
        None => format!("{} declared inverses", doc.inverses.len()),
    };
    let status = if bad.is_some() {
        Status::Fail
    } else {
        Status::Pass
    };
    report.push("involution", status, Some(worst), detail);
}

fn bianchi(bundle: &Arc<Bundle>, tol: &Tolerance, report: &mut Report) -> Result<(), CochainError> {
    let tets = bundle.complex().count(3);
    if tets == 0 {
        report.push("bianchi", Status::Skip, None, "no 3-simplices");
        return Ok(());
    }
    let f = curvature(bundle);
    let residual = d_nabla_hom(&f)?.max_abs();
    report.measure(
        "bianchi",
        residual,
        threshold(tol, f.max_abs()),
        format!("{tets} tetrahedra"),
    );
    Ok(())
}

fn d_nabla_squared(
    doc: &Document,
    bundle: &Arc<Bundle>,
    tol: &Tolerance,
    seed: u64,
    report: &mut Report,
) -> Result<(), CliError> {
    let dim = bundle.complex().dimension();
    if dim < 2 {
        report.push("d_nabla_squared", Status::Skip, None, "no 2-simplices");
        return Ok(());
    }
    let f = curvature(bundle);
    let mut worst = Worst::default();
    let mut inputs = Vec::new();
    for k in 0..=1.min(dim - 2) {
        for s in seeds(seed) {
            inputs.push(sample(bundle, k, s)?);
        }
    }
    for c in doc.cochains.values() {
        if let NamedCochain::Vector(a) = c {
            if a.degree() + 2 <= dim && a.first_missing().is_none() {
                inputs.push(a.clone());
            }
        }
    }
    for a in &inputs {
        worst.record(&d_nabla(&d_nabla(a)?)?, &hom_action(&f, a)?);
    }
    worst.report(report, "d_nabla_squared", tol);
    Ok(())
}

fn leibniz_sections(
    bundle: &Arc<Bundle>,
    tol: &Tolerance,
    seed: u64,
    report: &mut Report,
) -> Result<(), CliError> {
    if bundle.complex().dimension() < 1 {
        report.push("leibniz_sections", Status::Skip, None, "no edges");
        return Ok(());
    }
    let order = ProductOrder::WFirst;
    let mut worst = Worst::default();
    for s in seeds(seed) {
        let sec = sample(bundle, 0, s)?;
        let f = sample_scalar(bundle, 0, s ^ 0x5bd1)?;
        let lhs = nabla(&wedge(&sec, &f, order)?)?;
        let rhs = wedge(&sec, &d_scalar(&f), order)?.combine(
            1.0,
            &wedge(&nabla(&sec)?, &f, order)?,
            1.0,
        )?;
        worst.record(&lhs, &rhs);
    }
    worst.report(report, "leibniz_sections", tol);
    Ok(())
}

fn degree_pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..dim).flat_map(move |k| (0..dim - k).map(move |l| (k, l)))
}

fn leibniz_cup(
    bundle: &Arc<Bundle>,
    tol: &Tolerance,
    seed: u64,
    report: &mut Report,
) -> Result<(), CliError> {
    let dim = bundle.complex().dimension();
    if dim < 1 {
        report.push("leibniz_cup", Status::Skip, None, "no edges");
        return Ok(());
    }
    let order = ProductOrder::AlphaFirst;
    let mut worst = Worst::default();
    for (k, l) in degree_pairs(dim) {
        for s in seeds(seed) {
            let a = sample(bundle, k, s)?;
            let w = sample_scalar(bundle, l, s ^ 0x2c9f)?;
            let lhs = d_nabla(&cup(&a, &w, order)?)?;
            let rhs = cup(&d_nabla(&a)?, &w, order)?.combine(
                1.0,
                &cup(&a, &d_scalar(&w), order)?,
                sign(k),
            )?;
            worst.record(&lhs, &rhs);
        }
    }
    worst.report(report, "leibniz_cup", tol);
    Ok(())
}

fn leibniz_wedge(
    bundle: &Arc<Bundle>,
    tol: &Tolerance,
    seed: u64,
    report: &mut Report,
) -> Result<(), CliError> {
    let dim = bundle.complex().dimension();
    if dim < 1 {
        report.push("leibniz_wedge", Status::Skip, None, "no edges");
        return Ok(());
    }
    let flat = is_flat(bundle, tol).flat;
    let order = ProductOrder::AlphaFirst;
    let mut worst = Worst::default();
    let mut skipped = 0;
    for (k, l) in degree_pairs(dim) {
        if l > 0 && !flat {
            skipped += 1;
            continue;
        }
        for s in seeds(seed) {
            let a = sample(bundle, k, s)?;
            let w = sample_scalar(bundle, l, s ^ 0x7e11)?;
            let lhs = d_nabla(&wedge(&a, &w, order)?)?;
            let rhs = wedge(&d_nabla(&a)?, &w, order)?.combine(
                1.0,
                &wedge(&a, &d_scalar(&w), order)?,
                sign(k),
            )?;
            worst.record(&lhs, &rhs);
        }
    }
    worst.report(report, "leibniz_wedge", tol);
    if skipped > 0 {
        report.push(
            "leibniz_wedge_higher",
            Status::Skip,
            None,
            format!("{skipped} degree pairs with l ≥ 1 need a flat connection"),
        );
    }
    Ok(())
}

fn metric_checks(
    doc: &Document,
    bundle: &Arc<Bundle>,
    tol: &Tolerance,
    seed: u64,
    report: &mut Report,
) -> Result<(), CliError> {
    let Some(metric) = &doc.metric else {
        return Ok(());
    };
    let verdict =
        is_metric_compatible(bundle, metric, tol).map_err(|e| CliError::Compute(e.to_string()))?;
    match verdict {
        Verdict::Pass => report.push("metric_transports", Status::Pass, None, ""),
        Verdict::Violation { at, residual } => report.push(
            "metric_transports",
            Status::Fail,
            Some(residual),
            format!("edge {at}"),
        ),
    }
    if bundle.complex().dimension() < 1 {
        return Ok(());
    }
    let mut residual = 0.0f64;
    let mut scale = 0.0f64;
    for s in seeds(seed) {
        let a = sample(bundle, 0, s)?;
        let b = sample(bundle, 0, s ^ 0x4f3a)?;
        let lhs = d_scalar(&dot_sections(&a, &b, metric)?);
        let rhs = dot_cochain1_section(&nabla(&a)?, &b, metric)?.combine(
            1.0,
            &dot_cochain1_section(&nabla(&b)?, &a, metric)?,
            1.0,
        )?;
        residual = residual.max(lhs.distance(&rhs));
        scale = scale.max(lhs.values().values().fold(0.0, |m, x| m.max(x.abs())));
    }
    report.measure(
        "metric_leibniz",
        residual,
        threshold(tol, scale),
        format!("{SAMPLES} section pairs"),
    );
    Ok(())
}

fn gauged_transports(doc: &Document, bundle: &Bundle, report: &mut Report) -> Result<(), CliError> {
    let Some(g) = &doc.gauge else {
        return Ok(());
    };
    let gauged = bundle
        .apply_gauge(g)
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let dev = gauged
        .stored_transports()
        .values()
        .map(|u| max_abs_diff(u, &DMatrix::identity(u.nrows(), u.ncols())))
        .fold(0.0, f64::max);
    report.push(
        "gauged_transports",
        Status::Info,
        Some(dev),
        "max |g_i U_ij g_j⁻¹ − I| after applying the gauge section",
    );
    Ok(())
}

/// Runs every applicable identity on the document's bundle.
pub fn run(doc: &Document, tol: &Tolerance, seed: u64) -> Result<Report, CliError> {
    let bundle = doc
        .bundle
        .as_ref()
        .ok_or_else(|| CliError::Usage("the document has no bundle section".into()))?;
    let mut report = Report::new(format!(
        "identity checks (tol abs {:.1e}, rel {:.1e}, seed {seed})",
        tol.abs, tol.rel
    ));
    involution(doc, bundle, tol, &mut report);
    bianchi(bundle, tol, &mut report)?;
    d_nabla_squared(doc, bundle, tol, seed, &mut report)?;
    leibniz_sections(bundle, tol, seed, &mut report)?;
    leibniz_cup(bundle, tol, seed, &mut report)?;
    leibniz_wedge(bundle, tol, seed, &mut report)?;
    metric_checks(doc, bundle, tol, seed, &mut report)?;
    gauged_transports(doc, bundle, &mut report)?;
    Ok(report)
}
