//! Command-line surface: closed-form bounds, sharp-constant oracle runs,
//! mesh interpolation, and the reproduction suite.

use cellbounds::error::Error;
use cellbounds::fields;
use cellbounds::geometry::CellKind;
use cellbounds::interpolation::{self as interp, CellQuadrature, MeshScalarPlan};
use cellbounds::io::{self, MeshDocument, ValuesSection};
use cellbounds::mesh::NodalScalarField;
use cellbounds::oracle::{self, OracleOptions, OracleRun};
use cellbounds::reproduce::{self, ReproduceConfig};
use cellbounds::scalar_bounds::{self as scalar, BoundKind, CpMode};
use cellbounds::vector_bounds as vector;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cellbounds",
    about = "Bounds for Poincare-type constants of mesh cells, flux-preserving \
             interpolation, and a finite-element sharp-constant oracle",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Machine,
}

#[derive(Args)]
struct CommonOpts {
    /// Output format.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Print every applicable closed-form bound for a cell.
    Bounds {
        /// Cell file.
        cell: PathBuf,
        /// Face selection, overriding the file's GAMMA section (e.g. "0" or "0,2").
        #[arg(long)]
        gamma: Option<String>,
        /// Which C_P bound feeds composite formulas: "convex", "classical",
        /// or a numeric user-supplied value.
        #[arg(long, default_value = "convex")]
        cp_mode: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Compute a sharp constant with the finite-element oracle.
    Sharp {
        cell: PathBuf,
        #[arg(long)]
        gamma: Option<String>,
        /// Which constant: the classical constant needs no faces.
        #[arg(long, value_enum, default_value = "scalar")]
        mode: SharpMode,
        /// Finest refinement level.
        #[arg(long, default_value_t = 4)]
        level: usize,
        /// Eigen-solver seed.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Eigen-solver relative tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Interpolate a field over a mesh and report errors and bounds.
    Interp {
        mesh: PathBuf,
        /// Field identifier (see --list-fields), or "from-file" for the
        /// mesh file's nodal VALUES section.
        #[arg(long, default_value = "x1")]
        field: String,
        #[arg(long, value_enum, default_value = "scalar")]
        mode: InterpMode,
        /// Face plan: "first-face", "all-faces", or "faces:i,j,..." (one per cell).
        #[arg(long, default_value = "first-face")]
        plan: String,
        /// Write the piecewise-constant interpolant to this mesh file.
        #[arg(long)]
        output: Option<PathBuf>,
        /// List the registered analytic fields and exit.
        #[arg(long)]
        list_fields: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the full desk-scale reproduction suite.
    Reproduce {
        #[arg(long, default_value_t = 20240)]
        seed: u64,
        /// Oracle level for 2D cells.
        #[arg(long, default_value_t = 5)]
        level_2d: usize,
        /// Oracle level for 3D cells.
        #[arg(long, default_value_t = 4)]
        level_3d: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SharpMode {
    Scalar,
    Trace,
    Vector,
    Classical,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InterpMode {
    Scalar,
    Vector,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let failures = serde_json::json!({ "failures": [e.to_string()] });
            eprintln!("{failures}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Bounds {
            cell,
            gamma,
            cp_mode,
            common,
        } => cmd_bounds(&cell, gamma.as_deref(), &cp_mode, common.format),
        Command::Sharp {
            cell,
            gamma,
            mode,
            level,
            seed,
            tolerance,
            common,
        } => cmd_sharp(&cell, gamma.as_deref(), mode, level, seed, tolerance, common.format),
        Command::Interp {
            mesh,
            field,
            mode,
            plan,
            output,
            list_fields,
            common,
        } => {
            if list_fields {
                println!("scalar fields:");
                for f in fields::SCALAR_FIELD_NAMES {
                    println!("  {f}");
                }
                println!("vector fields:");
                for f in fields::VECTOR_FIELD_NAMES {
                    println!("  {f}");
                }
                println!("  from-file (nodal VALUES section of the mesh file)");
                return Ok(ExitCode::SUCCESS);
            }
            cmd_interp(&mesh, &field, mode, &plan, output.as_deref(), common.format)
        }
        Command::Reproduce {
            seed,
            level_2d,
            level_3d,
            common,
        } => cmd_reproduce(seed, level_2d, level_3d, common.format),
    }
}

fn parse_gamma(s: &str) -> Result<Vec<usize>, Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidFaceSelection(format!("bad face index '{t}'")))
        })
        .collect()
}

fn parse_cp_mode(s: &str) -> Result<CpMode, Error> {
    match s {
        "convex" => Ok(CpMode::Convex),
        "classical" => Ok(CpMode::Classical),
        other => other
            .parse::<f64>()
            .map(CpMode::Value)
            .map_err(|_| Error::PreconditionNotMet(format!("bad cp-mode '{other}'"))),
    }
}

// ---- bounds -----------------------------------------------------------------

#[derive(Serialize)]
struct BoundRow {
    target: &'static str,
    kind: &'static str,
    value: f64,
    formula: String,
    preconditions: Vec<String>,
}

#[derive(Serialize)]
struct BoundsReport {
    cell_kind: String,
    dimension: usize,
    diameter: f64,
    measure: f64,
    gamma: Option<Vec<usize>>,
    rows: Vec<BoundRow>,
    notes: Vec<String>,
}

fn bound_row(target: &'static str, b: &scalar::ConstantBound) -> BoundRow {
    BoundRow {
        target,
        kind: match b.kind {
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
            BoundKind::Exact => "exact",
        },
        value: b.value,
        formula: b.formula.label().to_string(),
        preconditions: b
            .preconditions
            .iter()
            .map(|p| format!("{}={}", p.name, p.met))
            .collect(),
    }
}

fn cmd_bounds(
    path: &PathBuf,
    gamma_override: Option<&str>,
    cp_mode: &str,
    format: Format,
) -> Result<ExitCode, Error> {
    let doc = io::parse_cell_file(&std::fs::read_to_string(path)?)?;
    let cell = doc.cell;
    let mode = parse_cp_mode(cp_mode)?;
    let gamma = match gamma_override {
        Some(s) => Some(parse_gamma(s)?),
        None => doc.gamma,
    };
    let mut rows = Vec::new();
    let mut notes = Vec::new();

    rows.push(bound_row("C_P", &scalar::cp_upper_classical(&cell)?));
    match scalar::cp_upper_convex(&cell) {
        Ok(b) => rows.push(bound_row("C_P", &b)),
        Err(e) => notes.push(format!("convex bound not applicable: {e}")),
    }
    if cell.dim() == 2 {
        rows.push(bound_row("C_P", &scalar::cp_lower_cheng(&cell)?));
    }
    if let Ok(b) = scalar::cp_upper_isosceles(&cell) {
        rows.push(bound_row("C_P", &b));
    }

    if let Some(g) = &gamma {
        match scalar::exact_table1(&cell, g)? {
            Some(b) => rows.push(bound_row("C_Gamma", &b)),
            None => notes.push("no exact catalogue entry for this selection".into()),
        }
        if g.len() == 1 {
            let f = g[0];
            let composite: Result<scalar::ConstantBound, Error> = match cell.kind() {
                CellKind::Triangle => scalar::c_gamma_triangle(&cell, f, mode),
                CellKind::Quadrilateral => {
                    scalar::c_gamma_quadrilateral(&cell, f, scalar::QuadSplit::Auto, mode)
                }
                CellKind::Tetrahedron => scalar::c_gamma_tetrahedron(&cell, f),
                CellKind::Pyramid => scalar::c_gamma_pyramid(&cell, f),
                CellKind::Prism if f == 0 => scalar::c_gamma_prism(&cell, mode),
                _ => Err(Error::PreconditionNotMet(
                    "no closed-form bound for this cell kind; the generic majorant requires a flux field"
                        .into(),
                )),
            };
            match composite {
                Ok(b) => rows.push(bound_row("C_Gamma", &b)),
                Err(e) => notes.push(e.to_string()),
            }
            if cell.kind() == CellKind::Prism && f == 0 {
                if let Ok(b) = scalar::c_gamma_prism_constant_height(&cell) {
                    rows.push(bound_row("C_Gamma", &b));
                }
            }
        }
        if cell.dim() == 2 {
            rows.push(bound_row("C_Gamma", &scalar::c_gamma_lower(&cell)?));
        }
        // vector composition when the selection forms a valid normal system
        if g.len() == cell.dim() {
            if let Ok(ns) = cell.normal_system(g) {
                let per_face: Result<Vec<_>, Error> = g
                    .iter()
                    .map(|&f| scalar::best_c_gamma_upper(&cell, &[f], mode))
                    .collect();
                if let Ok(constants) = per_face {
                    if let Ok(vc) = vector::vector_constant(&constants, &ns) {
                        rows.push(BoundRow {
                            target: "vector",
                            kind: "upper",
                            value: vc.value,
                            formula: format!("{:?}", vc.formula),
                            preconditions: vec![format!("lambda_min={}", vc.lambda_min)],
                        });
                    }
                }
            }
        }
    } else {
        notes.push("no face selection: only classical-constant bounds printed".into());
    }

    let report = BoundsReport {
        cell_kind: cell.kind().name().to_string(),
        dimension: cell.dim(),
        diameter: cell.diameter()?,
        measure: cell.measure()?,
        gamma,
        rows,
        notes,
    };
    match format {
        Format::Machine => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
        Format::Csv => {
            println!("target,kind,value,formula,preconditions");
            for r in &report.rows {
                println!(
                    "{},{},{},{},{}",
                    r.target,
                    r.kind,
                    r.value,
                    r.formula,
                    r.preconditions.join(";")
                );
            }
        }
        Format::Text => {
            println!(
                "{} cell, d = {}, diameter {:.6}, measure {:.6}",
                report.cell_kind, report.dimension, report.diameter, report.measure
            );
            if let Some(g) = &report.gamma {
                println!("selected faces: {g:?}");
            }
            for r in &report.rows {
                let pre = if r.preconditions.is_empty() {
                    String::new()
                } else {
                    format!("  [{}]", r.preconditions.join(", "))
                };
                println!("  {:8} {:5}  {:<12.8}  {}{}", r.target, r.kind, r.value, r.formula, pre);
            }
            for n in &report.notes {
                println!("  note: {n}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

// ---- sharp ------------------------------------------------------------------

#[derive(Serialize)]
struct SharpReport {
    cell_kind: String,
    mode: &'static str,
    gamma: Option<Vec<usize>>,
    run: OracleRun,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form_upper: Option<f64>,
}

fn cmd_sharp(
    path: &PathBuf,
    gamma_override: Option<&str>,
    mode: SharpMode,
    level: usize,
    seed: u64,
    tolerance: f64,
    format: Format,
) -> Result<ExitCode, Error> {
    let doc = io::parse_cell_file(&std::fs::read_to_string(path)?)?;
    let cell = doc.cell;
    let gamma = match gamma_override {
        Some(s) => Some(parse_gamma(s)?),
        None => doc.gamma,
    };
    let opts = OracleOptions {
        tol: tolerance,
        seed,
        ..Default::default()
    };
    let need_gamma = || {
        gamma.clone().ok_or_else(|| {
            Error::InvalidFaceSelection("this mode needs a GAMMA selection".into())
        })
    };
    let (mode_name, run, upper): (&'static str, OracleRun, Option<f64>) = match mode {
        SharpMode::Classical => (
            "classical",
            oracle::sharp_cp(&cell, level, &opts)?,
            scalar::cp_upper_convex(&cell)
                .or_else(|_| scalar::cp_upper_classical(&cell))
                .ok()
                .map(|b| b.value),
        ),
        SharpMode::Scalar => {
            let g = need_gamma()?;
            let upper = scalar::best_c_gamma_upper(&cell, &g, CpMode::Convex)
                .ok()
                .map(|b| b.value);
            ("scalar", oracle::sharp_c_gamma(&cell, &g, level, &opts)?, upper)
        }
        SharpMode::Trace => {
            let g = need_gamma()?;
            ("trace", oracle::sharp_trace_constant(&cell, &g, level, &opts)?, None)
        }
        SharpMode::Vector => {
            let g = need_gamma()?;
            let upper = (|| {
                let ns = cell.normal_system(&g).ok()?;
                let constants: Option<Vec<_>> = g
                    .iter()
                    .map(|&f| scalar::best_c_gamma_upper(&cell, &[f], CpMode::Convex).ok())
                    .collect();
                vector::vector_constant(&constants?, &ns).ok().map(|v| v.value)
            })();
            (
                "vector",
                oracle::sharp_vector_constant(&cell, &g, level, &opts)?,
                upper,
            )
        }
    };
    let report = SharpReport {
        cell_kind: cell.kind().name().to_string(),
        mode: mode_name,
        gamma,
        run,
        closed_form_upper: upper,
    };
    match format {
        Format::Machine => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
        Format::Csv => {
            println!("level,unknowns,eigenvalue,constant,delta");
            for r in &report.run.rows {
                println!(
                    "{},{},{},{},{}",
                    r.level, r.unknowns, r.eigenvalue, r.constant, r.delta
                );
            }
        }
        Format::Text => {
            println!(
                "{} constant of a {} cell{}",
                report.mode,
                report.cell_kind,
                report
                    .gamma
                    .as_ref()
                    .map(|g| format!(", faces {g:?}"))
                    .unwrap_or_default()
            );
            println!("{:>5} {:>9} {:>16} {:>12} {:>10}", "level", "unknowns", "eigenvalue", "constant", "delta");
            for r in &report.run.rows {
                println!(
                    "{:>5} {:>9} {:>16.10} {:>12.8} {:>10.2e}",
                    r.level, r.unknowns, r.eigenvalue, r.constant, r.delta
                );
            }
            let res = &report.run.result;
            println!(
                "constant {:.8} (extrapolated {:.8}), residual {:.2e}, constraint residual {:.2e}",
                res.constant, res.extrapolated_constant, res.residual, res.constraint_residual
            );
            if let Some(u) = report.closed_form_upper {
                println!("closed-form upper bound {u:.8}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

// ---- interp ------------------------------------------------------------------

#[derive(Serialize)]
struct InterpReport {
    mode: &'static str,
    field: String,
    cells: usize,
    bound: f64,
    l2_error: Option<f64>,
    h1_seminorm: Option<f64>,
    error_over_bound_times_seminorm: Option<f64>,
    worst_preservation_residual: f64,
    values_written: Option<String>,
}

fn cmd_interp(
    path: &PathBuf,
    field: &str,
    mode: InterpMode,
    plan: &str,
    output: Option<&std::path::Path>,
    format: Format,
) -> Result<ExitCode, Error> {
    let doc = io::parse_mesh_file(&std::fs::read_to_string(path)?)?;
    let mesh = doc.mesh.clone();
    let quad = CellQuadrature::default();
    let scalar_plan = if plan == "first-face" {
        MeshScalarPlan::FirstFace
    } else if plan == "all-faces" {
        MeshScalarPlan::AllFaces
    } else if let Some(rest) = plan.strip_prefix("faces:") {
        MeshScalarPlan::Faces(parse_gamma(rest)?)
    } else {
        return Err(Error::InvalidPlan(format!("unknown plan '{plan}'")));
    };

    let report = match mode {
        InterpMode::Scalar => {
            // nodal data or analytic field
            let (i, err, h1) = if field == "from-file" {
                let Some(ValuesSection::VertexScalar(values)) = &doc.values else {
                    return Err(Error::InvalidPlan(
                        "from-file needs a 'VALUES vertex scalar' section".into(),
                    ));
                };
                let nodal = NodalScalarField::new(&mesh, values.clone())?;
                let i = interp::interp_mesh_scalar(&nodal, &mesh, &scalar_plan, CpMode::Convex, &quad)?;
                let regions = interp::mesh_regions(&mesh);
                let err = interp::l2_error_scalar(&nodal, &regions, &i.values, &quad)?;
                let h1 = nodal.h1_seminorm();
                (i, err, h1)
            } else {
                let w = fields::scalar_field(field)?;
                let i = interp::interp_mesh_scalar(&w, &mesh, &scalar_plan, CpMode::Convex, &quad)?;
                let regions = interp::mesh_regions(&mesh);
                let err = interp::l2_error_scalar(&w, &regions, &i.values, &quad)?;
                let h1 = interp::h1_seminorm_scalar(&w, &regions, &quad)?;
                (i, err, h1)
            };
            // preservation residual per cell on the plan faces
            let mut worst: f64 = 0.0;
            if !matches!(scalar_plan, MeshScalarPlan::AllFaces) {
                for (ci, mc) in mesh.cells.iter().enumerate() {
                    let g = match &scalar_plan {
                        MeshScalarPlan::Faces(f) => f[ci],
                        _ => 0,
                    };
                    let val = i.values[ci];
                    let resid = if field == "from-file" {
                        let Some(ValuesSection::VertexScalar(values)) = &doc.values else {
                            unreachable!()
                        };
                        let nodal = NodalScalarField::new(&mesh, values.clone())?;
                        quad.face_mean(&mc.cell, g, &|p: &cellbounds::geometry::Point| {
                            cellbounds::fields::ScalarField::eval(&nodal, p) - val
                        })?
                    } else {
                        let w = fields::scalar_field(field)?;
                        quad.face_mean(&mc.cell, g, &|p: &cellbounds::geometry::Point| {
                            cellbounds::fields::ScalarField::eval(&w, p) - val
                        })?
                    };
                    worst = worst.max(resid.abs());
                }
            }
            let written = write_values(output, &doc, ValuesSection::CellScalar(i.values.clone()))?;
            InterpReport {
                mode: "scalar",
                field: field.to_string(),
                cells: mesh.cells.len(),
                bound: i.bound.value,
                l2_error: Some(err),
                h1_seminorm: Some(h1),
                error_over_bound_times_seminorm: Some(err / (i.bound.value * h1).max(f64::MIN_POSITIVE)),
                worst_preservation_residual: worst,
                values_written: written,
            }
        }
        InterpMode::Vector => {
            let v = fields::vector_field(field)?;
            let i = interp::interp_mesh_vector(&v, &mesh, CpMode::Convex, &quad)?;
            let regions = interp::mesh_regions(&mesh);
            let err = interp::l2_error_vector(&v, &regions, &i.values, &quad)?;
            let h1 = interp::h1_seminorm_vector(&v, &regions, &quad)?;
            let mut worst: f64 = 0.0;
            for (mc, val) in mesh.cells.iter().zip(&i.values) {
                let faces = interp::first_independent_faces(&mc.cell)?;
                worst = worst
                    .max(interp::flux_preservation_residual(&v, &mc.cell, &faces, val, &quad)?);
            }
            let written = write_values(output, &doc, ValuesSection::CellVector(i.values.clone()))?;
            InterpReport {
                mode: "vector",
                field: field.to_string(),
                cells: mesh.cells.len(),
                bound: i.bound.value,
                l2_error: Some(err),
                h1_seminorm: Some(h1),
                error_over_bound_times_seminorm: Some(err / (i.bound.value * h1).max(f64::MIN_POSITIVE)),
                worst_preservation_residual: worst,
                values_written: written,
            }
        }
    };

    match format {
        Format::Machine => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
        Format::Csv => {
            println!("quantity,value");
            println!("cells,{}", report.cells);
            println!("bound,{}", report.bound);
            if let Some(e) = report.l2_error {
                println!("l2_error,{e}");
            }
            if let Some(h) = report.h1_seminorm {
                println!("h1_seminorm,{h}");
            }
            if let Some(r) = report.error_over_bound_times_seminorm {
                println!("error_over_bound,{r}");
            }
            println!("worst_preservation_residual,{}", report.worst_preservation_residual);
        }
        Format::Text => {
            println!(
                "{} interpolation of '{}' over {} cells",
                report.mode, report.field, report.cells
            );
            println!("  bound constant     {:.8}", report.bound);
            if let (Some(e), Some(h)) = (report.l2_error, report.h1_seminorm) {
                println!("  L2 error           {e:.8}");
                println!("  H1 seminorm        {h:.8}");
                println!(
                    "  error / (C |grad|) {:.6}",
                    report.error_over_bound_times_seminorm.unwrap()
                );
            }
            println!(
                "  worst preservation residual {:.3e}",
                report.worst_preservation_residual
            );
            if let Some(p) = &report.values_written {
                println!("  interpolant written to {p}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_values(
    output: Option<&std::path::Path>,
    doc: &MeshDocument,
    values: ValuesSection,
) -> Result<Option<String>, Error> {
    let Some(path) = output else {
        return Ok(None);
    };
    let out = MeshDocument {
        mesh: doc.mesh.clone(),
        hull_measure: doc.hull_measure,
        values: Some(values),
    };
    std::fs::write(path, io::write_mesh_file(&out))?;
    Ok(Some(path.display().to_string()))
}

// ---- reproduce ----------------------------------------------------------------

fn cmd_reproduce(
    seed: u64,
    level_2d: usize,
    level_3d: usize,
    format: Format,
) -> Result<ExitCode, Error> {
    let cfg = ReproduceConfig {
        seed,
        level_2d,
        level_3d,
    };
    let result = reproduce::run_all(&cfg);
    match format {
        Format::Machine => println!("{}", serde_json::to_string_pretty(&result).unwrap()),
        Format::Csv => {
            println!("criterion,check,measured,expected,mode,passed");
            for c in &result.criteria {
                for ch in &c.checks {
                    println!(
                        "{},{},{},{},{},{}",
                        c.id,
                        ch.label.replace(',', ";"),
                        ch.measured,
                        ch.expected,
                        ch.mode,
                        ch.passed
                    );
                }
            }
        }
        Format::Text => {
            for c in &result.criteria {
                print!("{}", reproduce::render_criterion(c));
            }
            println!(
                "overall: {}",
                if result.passed { "PASS" } else { "FAIL" }
            );
        }
    }
    if result.passed {
        Ok(ExitCode::SUCCESS)
    } else {
        let failures: Vec<String> = result
            .criteria
            .iter()
            .flat_map(|c| {
                c.checks
                    .iter()
                    .filter(|ch| !ch.passed)
                    .map(move |ch| format!("criterion {}: {}", c.id, ch.label))
            })
            .collect();
        eprintln!("{}", serde_json::json!({ "failures": failures }));
        Ok(ExitCode::FAILURE)
    }
}
