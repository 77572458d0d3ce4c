use std::io::Write;

use majorana_core::dynamics::{
    berry_phase, cone_cyclic_state, decompose, evolve_schrodinger, trajectory_records, DriveField,
};
use majorana_core::entanglement::{classify, count_partitions, measure_report, witnesses};
use majorana_core::geometry::{
    ensemble_stats, field_csv, husimi_q, husimi_zero_directions, latlong_grid, multipoles_with, random_state,
    wigner_imaginary_part, wigner_sphere, ANTICOHERENCE_THRESHOLD,
};
use majorana_core::permanent::{antipodal_basis_for, symmetric_overlap};
use majorana_core::stellar::ZValue;
use majorana_core::{Constellation, Exec, SpinState};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::input::{parse_document, parse_drive, Document, Sources};

/// Colatitude bands used by `random --samples` ensemble statistics.
const ENSEMBLE_BANDS: usize = 10;

pub struct Output {
    pub result: Value,
    pub csv: Option<String>,
}

impl Output {
    fn json(result: Value) -> Self {
        Output { result, csv: None }
    }
}

pub struct Context {
    pub cfg: RunConfig,
    /// The convention came from a flag or config file rather than the
    /// default, so a piped envelope may not override it.
    pub explicit_convention: bool,
    pub sources: Sources,
}

impl Context {
    fn exec(&self) -> Exec {
        if self.cfg.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    fn load(&mut self) -> CliResult<Document> {
        let path = self.cfg.input.clone();
        let bytes = self.sources.read(path.as_deref())?;
        let (doc, found) = parse_document(&bytes, self.cfg.convention)?;
        if let (Some(conv), false) = (found, self.explicit_convention) {
            self.cfg.convention = conv;
        }
        Ok(doc)
    }

    fn load_other(&mut self) -> CliResult<Document> {
        let path = self
            .cfg
            .other
            .clone()
            .ok_or_else(|| CliError::invalid("overlap needs --other FILE"))?;
        let bytes = self.sources.read(Some(&path))?;
        Ok(parse_document(&bytes, self.cfg.convention)?.0)
    }

    fn load_drive(&mut self) -> CliResult<DriveField> {
        let path = self
            .cfg
            .drive
            .clone()
            .ok_or_else(|| CliError::invalid(format!("{} needs --drive FILE", self.cfg.subcommand)))?;
        let bytes = self.sources.read(Some(&path))?;
        parse_drive(&bytes)
    }

    fn constellation(&self, doc: &Document) -> CliResult<Constellation> {
        doc.constellation(self.cfg.tolerance, self.cfg.convention)
    }

    fn grid(&self) -> CliResult<Vec<[f64; 3]>> {
        if self.cfg.grid == 0 {
            return Err(CliError::invalid("--grid must be positive"));
        }
        Ok(latlong_grid(self.cfg.grid, 2 * self.cfg.grid))
    }

    fn csv_allowed(&self, allowed: bool) -> CliResult<()> {
        if self.cfg.format == Format::Csv && !allowed {
            return Err(CliError::invalid(format!(
                "{} has no CSV form; use --format json",
                self.cfg.subcommand
            )));
        }
        Ok(())
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result types serialize")
}

fn z_csv(z: &Option<ZValue>) -> String {
    match z {
        Some(ZValue::Finite([re, im])) => format!("{re},{im}"),
        _ => "inf,inf".into(),
    }
}

pub fn run(ctx: &mut Context) -> CliResult<Output> {
    let name = ctx.cfg.subcommand.clone();
    match name.as_str() {
        "stars" => stars(ctx),
        "state" => state(ctx),
        "classify" => simple(ctx, |ctx, doc| {
            let c = ctx.constellation(doc)?;
            let p = classify(&c);
            Ok(json!({
                "two_s": c.two_s,
                "partition": p.parts,
                "slocc_label": p.slocc_label,
                "petrov_label": p.petrov_label,
                "tolerance": p.tolerance,
            }))
        }),
        "measures" => simple(ctx, |ctx, doc| {
            let s = doc.state()?;
            let c = ctx.constellation(doc)?;
            Ok(to_value(&measure_report(&s, &c, ctx.exec())?))
        }),
        "witness" => simple(ctx, |ctx, doc| {
            let s = doc.state()?;
            let c = ctx.constellation(doc)?;
            let table = multipoles_with(&s, s.two_s(), ANTICOHERENCE_THRESHOLD, ctx.cfg.convention)?;
            Ok(to_value(&witnesses(&c, &table)?))
        }),
        "multipoles" => multipoles(ctx),
        "qfunc" => qfunc(ctx),
        "wigner" => wigner(ctx),
        "overlap" => overlap(ctx),
        "basis" => simple(ctx, |ctx, doc| {
            let s = doc.state()?;
            let c = ctx.constellation(doc)?;
            let b = antipodal_basis_for(&s, &c)?;
            Ok(json!({
                "two_s": s.two_s(),
                "states": b.states.iter().map(|v| to_value(&v.to_record())).collect::<Vec<_>>(),
                "cluster": b.cluster,
                "gram_determinant": b.gram_determinant,
                "max_overlap": b.max_overlap,
            }))
        }),
        "evolve" => evolve(ctx),
        "berry" => berry(ctx),
        "random" => random(ctx),
        "partitions" => partitions(ctx),
        other => Err(CliError::invalid(format!("unknown subcommand {other}"))),
    }
}

fn simple(ctx: &mut Context, f: impl FnOnce(&Context, &Document) -> CliResult<Value>) -> CliResult<Output> {
    ctx.csv_allowed(false)?;
    let doc = ctx.load()?;
    Ok(Output::json(f(ctx, &doc)?))
}

fn stars(ctx: &mut Context) -> CliResult<Output> {
    let doc = ctx.load()?;
    let c = ctx.constellation(&doc)?;
    let rec = c.to_record();
    let csv = (ctx.cfg.format == Format::Csv).then(|| {
        let mut s = String::from("z_re,z_im,x,y,z,multiplicity\n");
        for (star, r) in c.stars.iter().zip(&rec.stars) {
            let n = star.n;
            s.push_str(&format!("{},{},{},{},{}\n", z_csv(&r.z), n[0], n[1], n[2], star.multiplicity));
        }
        s
    });
    Ok(Output { result: to_value(&rec), csv })
}

fn state(ctx: &mut Context) -> CliResult<Output> {
    ctx.csv_allowed(false)?;
    let doc = ctx.load()?;
    Ok(Output::json(to_value(&doc.state()?.to_record())))
}

fn multipoles(ctx: &mut Context) -> CliResult<Output> {
    let doc = ctx.load()?;
    let s = doc.state()?;
    let max_l = ctx.cfg.max_l.unwrap_or(s.two_s());
    let table = multipoles_with(&s, max_l, ANTICOHERENCE_THRESHOLD, ctx.cfg.convention)?;
    let entries = table.entries();
    let csv = (ctx.cfg.format == Format::Csv).then(|| {
        let mut out = String::from("l,m,re,im\n");
        for e in &entries {
            out.push_str(&format!("{},{},{},{}\n", e.l, e.m, e.re, e.im));
        }
        out
    });
    Ok(Output {
        result: json!({
            "two_s": s.two_s(),
            "max_l": max_l,
            "anticoherence_order": table.anticoherence_order,
            "threshold": table.threshold,
            "rank_norms": table.rank_norms(),
            "star_discrepancy": table.star_discrepancy(),
            "moments": to_value(&entries),
        }),
        csv,
    })
}

fn field_output(ctx: &Context, samples: &[majorana_core::geometry::FieldSample], extra: Value) -> Output {
    let mut result = json!({
        "n_theta": ctx.cfg.grid,
        "n_phi": 2 * ctx.cfg.grid,
        "points": samples.len(),
    });
    if let (Value::Object(r), Value::Object(e)) = (&mut result, extra) {
        r.extend(e);
    }
    if ctx.cfg.format == Format::Csv {
        Output { result, csv: Some(field_csv(samples)) }
    } else {
        if let Value::Object(r) = &mut result {
            r.insert("samples".into(), to_value(&samples));
        }
        Output::json(result)
    }
}

fn qfunc(ctx: &mut Context) -> CliResult<Output> {
    let doc = ctx.load()?;
    let s = doc.state()?;
    let c = ctx.constellation(&doc)?;
    let field = husimi_q(&s, &ctx.grid()?, ctx.exec())?;
    let extra = json!({
        "max": field.max,
        "zeros": husimi_zero_directions(&c),
    });
    Ok(field_output(ctx, &field.samples, extra))
}

fn wigner(ctx: &mut Context) -> CliResult<Output> {
    let doc = ctx.load()?;
    let s = doc.state()?;
    let max_l = ctx.cfg.max_l.unwrap_or(s.two_s());
    let grid = ctx.grid()?;
    let samples = wigner_sphere(&s, &grid, max_l, ctx.exec())?;
    let extra = json!({
        "max_l": max_l,
        "max_imaginary_part": wigner_imaginary_part(&s, &grid, max_l)?,
    });
    Ok(field_output(ctx, &samples, extra))
}

fn overlap(ctx: &mut Context) -> CliResult<Output> {
    ctx.csv_allowed(false)?;
    let a = ctx.load()?;
    let b = ctx.load_other()?;
    let (sa, sb) = (a.state()?, b.state()?);
    let direct = sa.inner(&sb)?;
    let perm = symmetric_overlap(&ctx.constellation(&a)?, &ctx.constellation(&b)?)?;
    Ok(Output::json(json!({
        "two_s": sa.two_s(),
        "inner": [direct.re, direct.im],
        "fidelity": direct.norm_sqr(),
        "permanent_modulus": perm.norm(),
        "discrepancy": (perm.norm() - direct.norm()).abs(),
    })))
}

fn write_trajectory(ctx: &Context, records: &[majorana_core::dynamics::TrajectoryRecord]) -> CliResult<()> {
    let Some(path) = &ctx.cfg.trajectory else {
        return Ok(());
    };
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(&to_value(r)).expect("records serialize");
        writeln!(w, "{line}").map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn evolve(ctx: &mut Context) -> CliResult<Output> {
    ctx.csv_allowed(false)?;
    let doc = ctx.load()?;
    let drive = ctx.load_drive()?;
    let s = doc.state()?;
    let traj = evolve_schrodinger(&s, &drive, ctx.cfg.steps)?;
    write_trajectory(ctx, &trajectory_records(&traj))?;
    let last = traj.states.last().expect("trajectory has samples");
    Ok(Output::json(json!({
        "drive": to_value(&drive),
        "samples": traj.times.len(),
        "period": drive.period(),
        "final_state": to_value(&last.to_record()),
        "final_stars": traj.star_paths.iter().map(|p| p[p.len() - 1]).collect::<Vec<_>>(),
        "final_partition": traj.partitions.last(),
        "endpoint_fidelity": s.fidelity(last)?,
        "energy_integral": traj.energy_integral,
        "max_norm_drift": traj.max_norm_drift,
        "flagged_steps": traj.flagged_steps,
    })))
}

fn berry(ctx: &mut Context) -> CliResult<Output> {
    ctx.csv_allowed(false)?;
    let drive;
    let s: SpinState = if let Some(index) = ctx.cfg.cyclic {
        let two_s = ctx
            .cfg
            .two_s
            .ok_or_else(|| CliError::invalid("--cyclic needs --two-s"))?;
        drive = ctx.load_drive()?;
        cone_cyclic_state(two_s, &drive, index)?
    } else {
        let doc = ctx.load()?;
        drive = ctx.load_drive()?;
        doc.state()?
    };
    let traj = evolve_schrodinger(&s, &drive, ctx.cfg.steps)?;
    write_trajectory(ctx, &trajectory_records(&traj))?;
    let phase = berry_phase(&traj)?;
    let parts = decompose(&traj)?;
    Ok(Output::json(json!({
        "drive": to_value(&drive),
        "initial_state": to_value(&s.to_record()),
        "berry": to_value(&phase),
        "decomposition": to_value(&parts),
        "flagged_steps": traj.flagged_steps,
        "max_norm_drift": traj.max_norm_drift,
    })))
}

fn random(ctx: &mut Context) -> CliResult<Output> {
    ctx.csv_allowed(false)?;
    let two_s = ctx.cfg.two_s.ok_or_else(|| CliError::invalid("random needs --two-s"))?;
    if two_s == 0 {
        return Err(CliError::invalid("--two-s must be at least 1"));
    }
    let result = match ctx.cfg.samples {
        0 => return Err(CliError::invalid("--samples must be positive")),
        1 => to_value(&random_state(two_s, ctx.cfg.seed).to_record()),
        k => to_value(&ensemble_stats(two_s, k, ctx.cfg.seed, ENSEMBLE_BANDS, ctx.exec())?),
    };
    Ok(Output::json(result))
}

fn partitions(ctx: &mut Context) -> CliResult<Output> {
    ctx.csv_allowed(false)?;
    let n = ctx.cfg.n.ok_or_else(|| CliError::invalid("partitions needs --n"))?;
    let count = count_partitions(n).ok_or_else(|| CliError::new("SIZE_GUARD", format!("p({n}) overflows 128 bits")))?;
    let count = match u64::try_from(count) {
        Ok(c) => json!(c),
        Err(_) => json!(count.to_string()),
    };
    Ok(Output::json(json!({ "n": n, "count": count })))
}
