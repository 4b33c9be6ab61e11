//! Command implementations: load inputs, call the library, render reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde_json::{json, Map, Value};

use kplanar::designs::{
    affine_resolvable_design, kirkman_search, kts15, nkts18, one_factorization,
    parse_design_file, triangle_matching_search, verify_design, ParsedDesign, ResolvableDesign,
    SearchOutcome, TriangleMatchingDecomposition, DEFAULT_BUDGET,
};
use kplanar::drawing::{
    convex_complete_drawing, crossings_of, two_line_bipartite_drawing, AbstractDrawing,
    CrossingSet, Graph, RectilinearDrawing,
};
use kplanar::probability::{
    bounds_table, closed_form, exact_q, render_4dp, verify_counting_cases, ClosedForm,
    CountingFamily, PairPattern,
};
use kplanar::schemes::{
    scheme_bipartite, scheme_from_design, scheme_k7, scheme_odd, scheme_triangle_matching,
    validate_scheme, BaseLabelSet, Scheme,
};
use kplanar::splitter::{
    best_of, expected_crossings, layout_planes, monte_carlo, sample_labeling, split, Instance,
    Labeling, MonteCarlo, SplitResult,
};
use kplanar::Coord;

use crate::report::{deliver, edge_str, rational_str, read_file, write_file, RunReport};
use crate::{
    Cli, CliError, Command, DesignParams, DesignsCmd, DrawCmd, DrawingArgs, Format, PipelineArgs,
    QCmd, SchemeArgs, SchemeCmd, SplitCmd, TableArgs,
};

/// Shared per-invocation context: the global flags plus the start time.
struct Ctx {
    format: Format,
    out: Option<PathBuf>,
    seed_opt: Option<u64>,
    budget_opt: Option<u64>,
    started: Instant,
}

impl Ctx {
    fn seed(&self) -> u64 {
        self.seed_opt.unwrap_or(0)
    }

    fn budget(&self) -> u64 {
        self.budget_opt.unwrap_or(DEFAULT_BUDGET)
    }

    /// Reject `--format csv` outside `table`.
    fn no_csv(&self) -> Result<(), CliError> {
        if self.format == Format::Csv {
            Err(CliError::Validation("csv output is only available for `table`".into()))
        } else {
            Ok(())
        }
    }

    /// Emit a finished report: JSON renders the `RunReport`, text renders
    /// the human-readable form.
    fn finish(&self, mut report: RunReport, text: String) -> Result<(), CliError> {
        if self.format == Format::Json {
            report.stamp(self.started);
            deliver(&self.out, &report.to_json())
        } else {
            deliver(&self.out, &text)
        }
    }

    /// Emit a command whose primary product is a file artifact.  With
    /// `--out` the artifact goes to the file and the report to stdout;
    /// without it, text mode prints the artifact itself and JSON mode
    /// embeds it in the report under `content`.
    fn finish_artifact(
        &self,
        mut report: RunReport,
        artifact: &str,
        summary: String,
    ) -> Result<(), CliError> {
        match &self.out {
            Some(path) => {
                write_file(path, artifact)?;
                report.output("path", path.display().to_string());
                if self.format == Format::Json {
                    report.stamp(self.started);
                    deliver(&None, &report.to_json())
                } else {
                    deliver(&None, &format!("{summary}\n"))
                }
            }
            None => {
                if self.format == Format::Json {
                    report.output("content", artifact);
                    report.stamp(self.started);
                    deliver(&None, &report.to_json())
                } else {
                    deliver(&None, artifact)
                }
            }
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Ctx {
        format: cli.format,
        out: cli.out,
        seed_opt: cli.seed,
        budget_opt: cli.budget,
        started: Instant::now(),
    };
    match cli.command {
        Command::Designs { cmd } => match cmd {
            DesignsCmd::Build(params) => cmd_designs_build(&ctx, &params),
            DesignsCmd::Search(params) => cmd_designs_search(&ctx, &params),
            DesignsCmd::Verify { file } => cmd_designs_verify(&ctx, &file),
        },
        Command::Scheme { cmd } => match cmd {
            SchemeCmd::Build(args) => cmd_scheme_build(&ctx, &args),
            SchemeCmd::Validate { file } => cmd_scheme_validate(&ctx, &file),
        },
        Command::Q { cmd } => match cmd {
            QCmd::Exact { scheme, pattern } => cmd_q_exact(&ctx, &scheme, &pattern),
            QCmd::Formula { case, k } => cmd_q_formula(&ctx, &case, k),
            QCmd::Cases { scheme, family } => cmd_q_cases(&ctx, &scheme, &family),
        },
        Command::Table(args) => cmd_table(&ctx, &args),
        Command::Draw { cmd } => match cmd {
            DrawCmd::Gen { drawing } => cmd_draw_gen(&ctx, &drawing),
            DrawCmd::Count { file } => cmd_draw_count(&ctx, &file),
        },
        Command::Split { cmd } => match cmd {
            SplitCmd::Run { scheme, drawing, layout_dir } => {
                cmd_split_run(&ctx, &scheme, &drawing, layout_dir.as_deref())
            }
            SplitCmd::Mc { scheme, drawing, trials } => {
                cmd_split_mc(&ctx, &scheme, &drawing, trials)
            }
            SplitCmd::Best { scheme, drawing, trials } => {
                cmd_split_best(&ctx, &scheme, &drawing, trials)
            }
        },
        Command::Pipeline(args) => cmd_pipeline(&ctx, &args),
    }
}

// ---------------------------------------------------------------------------
// input loading
// ---------------------------------------------------------------------------

/// Build a resolvable design from the strongest available source:
/// direct construction, bundled instance, then search.
fn build_design(
    points: u32,
    block: u32,
    budget: u64,
) -> Result<(ResolvableDesign, String), CliError> {
    match block {
        2 => Ok((one_factorization(points)?.as_design(), "one-factorization".into())),
        3 if points == 9 => Ok((affine_resolvable_design(3)?, "affine construction".into())),
        3 if points == 15 => Ok((kts15(), "bundled instance".into())),
        3 => match kirkman_search(points, budget) {
            SearchOutcome::Found { design, nodes } => Ok((design, format!("search ({nodes} nodes)"))),
            SearchOutcome::Infeasible { nodes } => Err(CliError::Infeasible(format!(
                "no resolvable {points}-point triple design exists: search exhausted after \
                 {nodes} nodes"
            ))),
            SearchOutcome::BudgetExhausted { nodes } => Err(CliError::Infeasible(format!(
                "search budget exhausted after {nodes} nodes without a {points}-point \
                 triple design"
            ))),
        },
        l if l >= 2 && points == l * l => {
            Ok((affine_resolvable_design(l)?, "affine construction".into()))
        }
        _ => Err(CliError::Validation(format!(
            "no construction for {points} points with block size {block}; supported: block 2 \
             with even points, block 3 (9 or 15 points, or search), and block l with l² points \
             for prime powers l"
        ))),
    }
}

fn build_triangle_matching(
    points: u32,
    budget: u64,
) -> Result<(TriangleMatchingDecomposition, String), CliError> {
    if points == 18 {
        return Ok((nkts18(), "bundled instance".into()));
    }
    match triangle_matching_search(points, budget) {
        SearchOutcome::Found { design, nodes } => Ok((design, format!("search ({nodes} nodes)"))),
        SearchOutcome::Infeasible { nodes } => Err(CliError::Infeasible(format!(
            "no {points}-point triangle+matching decomposition exists: search exhausted after \
             {nodes} nodes"
        ))),
        SearchOutcome::BudgetExhausted { nodes } => Err(CliError::Infeasible(format!(
            "search budget exhausted after {nodes} nodes without a {points}-point \
             triangle+matching decomposition"
        ))),
    }
}

fn load_scheme(args: &SchemeArgs, budget: u64) -> Result<Scheme, CliError> {
    if let Some(path) = &args.scheme {
        let text = read_file(path)?;
        // Malformed JSON is a parse error; well-formed JSON describing a
        // broken scheme is a validation failure.
        serde_json::from_str::<Value>(&text)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let sch = Scheme::from_json(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let validity = validate_scheme(&sch);
        if !validity.is_valid() {
            return Err(CliError::Validation(format!("{}: {validity}", path.display())));
        }
        return Ok(sch);
    }
    let case = args.case.as_deref().ok_or_else(|| {
        CliError::Validation("scheme source required: --scheme FILE or --case NAME".into())
    })?;
    let need_k = || {
        args.k.ok_or_else(|| CliError::Validation(format!("case {case} needs --k")))
    };
    match case {
        "seven-label" => Ok(scheme_k7()),
        "odd-loops" => Ok(scheme_odd(need_k()?)?),
        "bipartite" => {
            let k = need_k()?;
            if k == 0 {
                return Err(CliError::Validation("bipartite case needs k ≥ 1".into()));
            }
            Ok(scheme_bipartite(k))
        }
        "two-planes" => Ok(scheme_from_design(&one_factorization(2)?.as_design())?),
        "design" => {
            let d = if let Some(path) = &args.design {
                match parse_design_file(&read_file(path)?)? {
                    ParsedDesign::Resolvable(d) => d,
                    ParsedDesign::TriangleMatching(_) => {
                        return Err(CliError::Validation(format!(
                            "{}: holds a triangle+matching decomposition; use \
                             --case triangle-matching for it",
                            path.display()
                        )));
                    }
                }
            } else {
                let points = args.points.ok_or_else(|| {
                    CliError::Validation("design case needs --points and --block, or --design FILE".into())
                })?;
                let block = args.block.ok_or_else(|| {
                    CliError::Validation("design case needs --block".into())
                })?;
                build_design(points, block, budget)?.0
            };
            Ok(scheme_from_design(&d)?)
        }
        "triangle-matching" => {
            let d = if let Some(path) = &args.design {
                match parse_design_file(&read_file(path)?)? {
                    ParsedDesign::TriangleMatching(d) => d,
                    ParsedDesign::Resolvable(_) => {
                        return Err(CliError::Validation(format!(
                            "{}: holds a resolvable design; use --case design for it",
                            path.display()
                        )));
                    }
                }
            } else {
                let points = args.points.ok_or_else(|| {
                    CliError::Validation(
                        "triangle-matching case needs --points or --design FILE".into(),
                    )
                })?;
                build_triangle_matching(points, budget)?.0
            };
            Ok(scheme_triangle_matching(&d)?)
        }
        other => Err(CliError::Validation(format!(
            "unknown scheme case {other:?}; expected seven-label, odd-loops, bipartite, \
             two-planes, design, or triangle-matching"
        ))),
    }
}

fn describe_scheme_args(args: &SchemeArgs, report: &mut RunReport) {
    if let Some(p) = &args.scheme {
        report.input("scheme_file", p.display().to_string());
    }
    if let Some(c) = &args.case {
        report.input("case", c.as_str());
    }
    if let Some(k) = args.k {
        report.input("k", k);
    }
    if let Some(p) = args.points {
        report.input("points", p);
    }
    if let Some(b) = args.block {
        report.input("block", b);
    }
    if let Some(d) = &args.design {
        report.input("design_file", d.display().to_string());
    }
}

enum LoadedDrawing {
    Rect { drawing: RectilinearDrawing<Coord>, crossings: CrossingSet, label: String },
    Abstract { drawing: AbstractDrawing, label: String },
}

impl LoadedDrawing {
    fn graph(&self) -> &Graph {
        match self {
            LoadedDrawing::Rect { drawing, .. } => drawing.graph(),
            LoadedDrawing::Abstract { drawing, .. } => drawing.graph(),
        }
    }

    fn crossings(&self) -> &CrossingSet {
        match self {
            LoadedDrawing::Rect { crossings, .. } => crossings,
            LoadedDrawing::Abstract { drawing, .. } => drawing.crossings(),
        }
    }

    fn instance(&self) -> Instance<'_> {
        Instance::new(self.graph(), self.crossings())
    }

    fn rect(&self) -> Option<&RectilinearDrawing<Coord>> {
        match self {
            LoadedDrawing::Rect { drawing, .. } => Some(drawing),
            LoadedDrawing::Abstract { .. } => None,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            LoadedDrawing::Rect { .. } => "rectilinear",
            LoadedDrawing::Abstract { .. } => "abstract",
        }
    }

    fn label(&self) -> &str {
        match self {
            LoadedDrawing::Rect { label, .. } | LoadedDrawing::Abstract { label, .. } => label,
        }
    }
}

/// A drawing file is rectilinear when its first content line is a `v` line.
fn looks_rectilinear(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.split_whitespace().next() == Some("v"))
}

fn load_drawing(args: &DrawingArgs) -> Result<LoadedDrawing, CliError> {
    if let Some(n) = args.convex {
        if n < 3 {
            return Err(CliError::Validation(format!("--convex needs n ≥ 3, got {n}")));
        }
        let drawing = convex_complete_drawing(n);
        let crossings = crossings_of(&drawing)?;
        return Ok(LoadedDrawing::Rect { drawing, crossings, label: format!("convex K{n}") });
    }
    if let Some(mn) = &args.two_line {
        let (m, n) = (mn[0], mn[1]);
        if m < 1 || n < 1 {
            return Err(CliError::Validation(format!(
                "--two-line needs m, n ≥ 1, got {m}, {n}"
            )));
        }
        let drawing = two_line_bipartite_drawing(m, n);
        let crossings = crossings_of(&drawing)?;
        return Ok(LoadedDrawing::Rect {
            drawing,
            crossings,
            label: format!("two-line K{m},{n}"),
        });
    }
    if let Some(path) = &args.drawing {
        let text = read_file(path)?;
        let label = path.display().to_string();
        return if looks_rectilinear(&text) {
            let drawing = RectilinearDrawing::from_text(&text)?;
            let crossings = crossings_of(&drawing)?;
            Ok(LoadedDrawing::Rect { drawing, crossings, label })
        } else {
            let drawing = AbstractDrawing::from_text(&text)?;
            Ok(LoadedDrawing::Abstract { drawing, label })
        };
    }
    Err(CliError::Validation(
        "drawing source required: --drawing FILE, --convex N, or --two-line M N".into(),
    ))
}

fn describe_drawing_args(args: &DrawingArgs, report: &mut RunReport) {
    if let Some(p) = &args.drawing {
        report.input("drawing_file", p.display().to_string());
    }
    if let Some(n) = args.convex {
        report.input("convex", n);
    }
    if let Some(mn) = &args.two_line {
        report.input("two_line", json!([mn[0], mn[1]]));
    }
}

// ---------------------------------------------------------------------------
// designs
// ---------------------------------------------------------------------------

fn cmd_designs_build(ctx: &Ctx, params: &DesignParams) -> Result<(), CliError> {
    ctx.no_csv()?;
    let mut report = RunReport::new("designs build");
    report.input("points", params.points);
    report.input("budget", ctx.budget());
    let (artifact, summary) = if params.triangle_matching {
        report.input("triangle_matching", true);
        let (d, source) = build_triangle_matching(params.points, ctx.budget())?;
        debug_assert!(verify_design(&d).is_valid());
        report.output("kind", "triangle-matching");
        report.output("points", d.point_count);
        report.output("triangle_classes", d.triangle_classes.len());
        report.output("k", d.k());
        report.output("source", source.as_str());
        let summary = format!(
            "triangle+matching decomposition on {} points ({} triangle classes, k={}) via {source}",
            d.point_count,
            d.triangle_classes.len(),
            d.k()
        );
        (d.to_string(), summary)
    } else {
        let block = params.block.ok_or_else(|| {
            CliError::Validation("designs build needs --block L or --triangle-matching".into())
        })?;
        report.input("block", block);
        let (d, source) = build_design(params.points, block, ctx.budget())?;
        debug_assert!(verify_design(&d).is_valid());
        report.output("kind", "resolvable");
        report.output("points", d.point_count);
        report.output("block", d.block_size);
        report.output("classes", d.classes.len());
        report.output("source", source.as_str());
        let summary = format!(
            "resolvable design: {} points, block size {}, {} parallel classes via {source}",
            d.point_count,
            d.block_size,
            d.classes.len()
        );
        (d.to_string(), summary)
    };
    ctx.finish_artifact(report, &artifact, summary)
}

fn cmd_designs_search(ctx: &Ctx, params: &DesignParams) -> Result<(), CliError> {
    ctx.no_csv()?;
    let mut report = RunReport::new("designs search");
    report.input("points", params.points);
    report.input("budget", ctx.budget());
    let (artifact, summary) = if params.triangle_matching {
        report.input("triangle_matching", true);
        match triangle_matching_search(params.points, ctx.budget()) {
            SearchOutcome::Found { design, nodes } => {
                report.output("kind", "triangle-matching");
                report.output("found", true);
                report.output("nodes", nodes);
                let summary = format!(
                    "found {}-point triangle+matching decomposition after {nodes} nodes",
                    params.points
                );
                (design.to_string(), summary)
            }
            SearchOutcome::Infeasible { nodes } => {
                return Err(CliError::Infeasible(format!(
                    "no {}-point triangle+matching decomposition exists: search exhausted \
                     after {nodes} nodes",
                    params.points
                )));
            }
            SearchOutcome::BudgetExhausted { nodes } => {
                return Err(CliError::Infeasible(format!(
                    "search budget exhausted after {nodes} nodes"
                )));
            }
        }
    } else {
        match params.block {
            Some(3) => {
                report.input("block", 3);
                match kirkman_search(params.points, ctx.budget()) {
                    SearchOutcome::Found { design, nodes } => {
                        report.output("kind", "resolvable");
                        report.output("found", true);
                        report.output("nodes", nodes);
                        let summary = format!(
                            "found {}-point triple design after {nodes} nodes",
                            params.points
                        );
                        (design.to_string(), summary)
                    }
                    SearchOutcome::Infeasible { nodes } => {
                        return Err(CliError::Infeasible(format!(
                            "no resolvable {}-point triple design exists: search exhausted \
                             after {nodes} nodes",
                            params.points
                        )));
                    }
                    SearchOutcome::BudgetExhausted { nodes } => {
                        return Err(CliError::Infeasible(format!(
                            "search budget exhausted after {nodes} nodes"
                        )));
                    }
                }
            }
            Some(2) => {
                return Err(CliError::Validation(
                    "block-2 designs are constructed directly; use `designs build`".into(),
                ));
            }
            _ => {
                return Err(CliError::Validation(
                    "search supports --block 3 or --triangle-matching".into(),
                ));
            }
        }
    };
    ctx.finish_artifact(report, &artifact, summary)
}

fn cmd_designs_verify(ctx: &Ctx, file: &Path) -> Result<(), CliError> {
    ctx.no_csv()?;
    let text = read_file(file)?;
    let parsed = parse_design_file(&text)?;
    let (kind, points, validity) = match &parsed {
        ParsedDesign::Resolvable(d) => ("resolvable", d.point_count, verify_design(d)),
        ParsedDesign::TriangleMatching(d) => {
            ("triangle-matching", d.point_count, verify_design(d))
        }
    };
    let mut report = RunReport::new("designs verify");
    report.input("file", file.display().to_string());
    report.output("kind", kind);
    report.output("points", points);
    report.output("valid", validity.is_valid());
    report.output(
        "violations",
        Value::Array(validity.violations.iter().map(|v| Value::String(v.clone())).collect()),
    );
    let text_out = format!(
        "{}: {kind} design on {points} points: {validity}\n",
        file.display()
    );
    ctx.finish(report, text_out)?;
    if validity.is_valid() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{} fails verification with {} violation(s)",
            file.display(),
            validity.violations.len()
        )))
    }
}

// ---------------------------------------------------------------------------
// schemes
// ---------------------------------------------------------------------------

fn cmd_scheme_build(ctx: &Ctx, args: &SchemeArgs) -> Result<(), CliError> {
    ctx.no_csv()?;
    let sch = load_scheme(args, ctx.budget())?;
    let mut report = RunReport::new("scheme build");
    describe_scheme_args(args, &mut report);
    report.input("budget", ctx.budget());
    report.output("summary", sch.summary());
    report.output("planes", sch.plane_count());
    report.output("types", sch.type_count());
    report.output("base_edges", sch.base_edges().len());
    let summary = format!(
        "scheme {}: {} planes, {} types, {} base edges",
        sch.summary(),
        sch.plane_count(),
        sch.type_count(),
        sch.base_edges().len()
    );
    ctx.finish_artifact(report, &sch.to_json(), summary)
}

fn cmd_scheme_validate(ctx: &Ctx, file: &Path) -> Result<(), CliError> {
    ctx.no_csv()?;
    let text = read_file(file)?;
    serde_json::from_str::<Value>(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", file.display())))?;
    let sch = Scheme::from_json(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", file.display())))?;
    let validity = validate_scheme(&sch);
    let mut report = RunReport::new("scheme validate");
    report.input("file", file.display().to_string());
    report.output("summary", sch.summary());
    report.output("valid", validity.is_valid());
    report.output(
        "violations",
        Value::Array(validity.violations.iter().map(|v| Value::String(v.clone())).collect()),
    );
    let text_out = format!("{}: scheme {}: {validity}\n", file.display(), sch.summary());
    ctx.finish(report, text_out)?;
    if validity.is_valid() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{} fails validation with {} violation(s)",
            file.display(),
            validity.violations.len()
        )))
    }
}

// ---------------------------------------------------------------------------
// probabilities
// ---------------------------------------------------------------------------

fn cmd_q_exact(ctx: &Ctx, scheme_args: &SchemeArgs, pattern: &str) -> Result<(), CliError> {
    ctx.no_csv()?;
    let pattern = PairPattern::from_str(pattern).map_err(CliError::Validation)?;
    let sch = load_scheme(scheme_args, ctx.budget())?;
    let sp = exact_q(&sch, pattern)?;
    let mut report = RunReport::new("q exact");
    describe_scheme_args(scheme_args, &mut report);
    report.input("pattern", pattern.to_string());
    report.output("scheme", sp.scheme.as_str());
    report.output("pattern", pattern.to_string());
    report.output_rational("q", &sp.value);
    let text = format!("{sp}\n≈ {}\n", render_4dp(&sp.value));
    ctx.finish(report, text)
}

fn cmd_q_formula(ctx: &Ctx, case: &str, k: u32) -> Result<(), CliError> {
    ctx.no_csv()?;
    let cf = ClosedForm::from_str(case).map_err(CliError::Validation)?;
    let value = closed_form(cf, k)?;
    let mut report = RunReport::new("q formula");
    report.input("case", cf.to_string());
    report.input("k", k);
    report.output("case", cf.to_string());
    report.output("k", k);
    report.output_rational("value", &value);
    let text = format!("{cf} at k={k}: {} ≈ {}\n", rational_str(&value), render_4dp(&value));
    ctx.finish(report, text)
}

fn cmd_q_cases(ctx: &Ctx, scheme_args: &SchemeArgs, family: &str) -> Result<(), CliError> {
    ctx.no_csv()?;
    let family = CountingFamily::from_str(family).map_err(CliError::Validation)?;
    let sch = load_scheme(scheme_args, ctx.budget())?;
    let breakdown = verify_counting_cases(&sch, family)?;
    let mut report = RunReport::new("q cases");
    describe_scheme_args(scheme_args, &mut report);
    report.input("family", family.to_string());
    report.output("family", family.to_string());
    report.output("scheme", breakdown.scheme.as_str());
    report.output("tuple_count", breakdown.tuple_count);
    report.output_rational("q", &breakdown.q);
    report.output("unclassified", rational_str(&breakdown.unclassified));
    report.output(
        "cases",
        Value::Array(
            breakdown
                .cases
                .iter()
                .map(|c| {
                    json!({
                        "name": c.name,
                        "measured": rational_str(&c.measured),
                        "expected": rational_str(&c.expected),
                        "matches": c.matches(),
                    })
                })
                .collect(),
        ),
    );
    report.output("all_match", breakdown.all_match());
    let verdict = if breakdown.all_match() { "PASS" } else { "FAIL" };
    let text = format!("{breakdown}\naudit: {verdict}\n");
    ctx.finish(report, text)?;
    if breakdown.all_match() {
        Ok(())
    } else {
        Err(CliError::Validation("counting-case audit failed".into()))
    }
}

// ---------------------------------------------------------------------------
// table
// ---------------------------------------------------------------------------

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn cmd_table(ctx: &Ctx, args: &TableArgs) -> Result<(), CliError> {
    let (from, to) = (args.from, args.to);
    if !(2 <= from && from <= to && to <= 50) {
        return Err(CliError::Validation(format!(
            "bad range: need 2 ≤ from ≤ to ≤ 50, got from={from} to={to}"
        )));
    }
    let rows = bounds_table(from, to)?;
    let content = match ctx.format {
        Format::Text => {
            let mut s = String::new();
            for row in &rows {
                writeln!(s, "{row}").expect("write to string");
            }
            s
        }
        Format::Csv => {
            let mut s = String::from(
                "k,old,old_decimal,new,new_decimal,case,lower,lower_decimal,notes\n",
            );
            for row in &rows {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    row.k,
                    rational_str(&row.old_bound),
                    render_4dp(&row.old_bound),
                    rational_str(&row.new_bound),
                    render_4dp(&row.new_bound),
                    row.case,
                    rational_str(&row.lower_bound),
                    render_4dp(&row.lower_bound),
                    csv_quote(&row.notes.join("; ")),
                )
                .expect("write to string");
            }
            s
        }
        Format::Json => {
            let array: Vec<Value> = rows
                .iter()
                .map(|row| {
                    json!({
                        "k": row.k,
                        "old": rational_str(&row.old_bound),
                        "old_decimal": render_4dp(&row.old_bound),
                        "new": rational_str(&row.new_bound),
                        "new_decimal": render_4dp(&row.new_bound),
                        "case": row.case.to_string(),
                        "lower": rational_str(&row.lower_bound),
                        "lower_decimal": render_4dp(&row.lower_bound),
                        "notes": row.notes,
                    })
                })
                .collect();
            let mut s =
                serde_json::to_string_pretty(&Value::Array(array)).expect("table serializes");
            s.push('\n');
            s
        }
    };
    deliver(&ctx.out, &content)
}

// ---------------------------------------------------------------------------
// drawings
// ---------------------------------------------------------------------------

fn cmd_draw_gen(ctx: &Ctx, args: &DrawingArgs) -> Result<(), CliError> {
    ctx.no_csv()?;
    if args.drawing.is_some() {
        return Err(CliError::Validation(
            "`draw gen` generates built-in drawings; use --convex N or --two-line M N".into(),
        ));
    }
    let loaded = load_drawing(args)?;
    let rect = loaded.rect().expect("generators are rectilinear");
    let mut report = RunReport::new("draw gen");
    describe_drawing_args(args, &mut report);
    report.output("kind", loaded.kind());
    report.output("label", loaded.label());
    report.output("vertices", rect.graph().vertex_count());
    report.output("edges", rect.graph().edges().len());
    report.output("crossings", loaded.crossings().count());
    let summary = format!(
        "{}: {} vertices, {} edges, {} crossings",
        loaded.label(),
        rect.graph().vertex_count(),
        rect.graph().edges().len(),
        loaded.crossings().count()
    );
    ctx.finish_artifact(report, &rect.to_text(), summary)
}

fn pattern_counts(crossings: &CrossingSet) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for pair in crossings.pairs() {
        *counts.entry(pair.pattern.to_string()).or_insert(0) += 1;
    }
    counts
}

fn cmd_draw_count(ctx: &Ctx, file: &Path) -> Result<(), CliError> {
    ctx.no_csv()?;
    let loaded = load_drawing(&DrawingArgs {
        drawing: Some(file.to_path_buf()),
        ..DrawingArgs::default()
    })?;
    let counts = pattern_counts(loaded.crossings());
    let mut report = RunReport::new("draw count");
    report.input("file", file.display().to_string());
    report.output("kind", loaded.kind());
    report.output("vertices", loaded.graph().vertex_count());
    report.output("edges", loaded.graph().edges().len());
    report.output("crossings", loaded.crossings().count());
    report.output(
        "patterns",
        Value::Object(counts.iter().map(|(k, &v)| (k.clone(), Value::from(v))).collect()),
    );
    let mut text = format!(
        "{}: {} drawing, {} vertices, {} edges, {} crossings\n",
        file.display(),
        loaded.kind(),
        loaded.graph().vertex_count(),
        loaded.graph().edges().len(),
        loaded.crossings().count()
    );
    for (pattern, count) in &counts {
        writeln!(text, "  {pattern}: {count}").expect("write to string");
    }
    ctx.finish(report, text)
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

/// Insert the fields shared by `split run` and `split best` into a report
/// and render the matching text block.
fn split_outputs(
    report: &mut RunReport,
    text: &mut String,
    loaded: &LoadedDrawing,
    r: &SplitResult,
    labeling: Option<&Labeling>,
) {
    let total = loaded.crossings().count();
    report.output("scheme", r.scheme.as_str());
    report.output("drawing", loaded.label());
    report.output("crossings", total);
    report.output("surviving", r.surviving_count());
    if let Some(lab) = labeling {
        report.output("labels", Value::Array(lab.labels().iter().map(|&l| l.into()).collect()));
        report.output(
            "resolved",
            Value::Object(
                lab.resolved()
                    .iter()
                    .map(|(&e, &p)| (edge_str(e), Value::from(p + 1)))
                    .collect(),
            ),
        );
    }
    let per_plane = r.per_plane_surviving();
    report.output(
        "planes",
        Value::Array(
            r.plane_edges
                .iter()
                .enumerate()
                .map(|(i, edges)| {
                    json!({
                        "plane": i + 1,
                        "edges": edges.iter().map(|&e| edge_str(e)).collect::<Vec<_>>(),
                        "surviving": per_plane[i].len(),
                    })
                })
                .collect(),
        ),
    );
    report.output(
        "surviving_pairs",
        Value::Array(
            r.surviving
                .iter()
                .map(|p| {
                    json!({
                        "e1": edge_str(p.e1),
                        "e2": edge_str(p.e2),
                        "pattern": p.pattern.to_string(),
                        "plane": r.plane_of(p.e1.0, p.e1.1).map(|pl| pl + 1),
                    })
                })
                .collect(),
        ),
    );

    writeln!(
        text,
        "split of {} ({} crossings) under scheme {}",
        loaded.label(),
        total,
        r.scheme
    )
    .expect("write to string");
    for (i, edges) in r.plane_edges.iter().enumerate() {
        writeln!(text, "plane {}: {} edges, {} surviving", i + 1, edges.len(), per_plane[i].len())
            .expect("write to string");
    }
    for p in &r.surviving {
        writeln!(
            text,
            "  {{{}}} × {{{}}} ({}, plane {})",
            edge_str(p.e1),
            edge_str(p.e2),
            p.pattern,
            r.plane_of(p.e1.0, p.e1.1).map(|pl| pl + 1).unwrap_or(0)
        )
        .expect("write to string");
    }
    writeln!(text, "surviving: {} of {}", r.surviving_count(), total).expect("write to string");
}

/// Certify the split by per-plane layout when the input is rectilinear;
/// optionally write the plane drawings to a directory.
fn certify_layout(
    loaded: &LoadedDrawing,
    r: &SplitResult,
    layout_dir: Option<&Path>,
    report: &mut RunReport,
    text: &mut String,
) -> Result<(), CliError> {
    let Some(rect) = loaded.rect() else {
        if layout_dir.is_some() {
            return Err(CliError::Validation(
                "--layout-dir requires a rectilinear drawing".into(),
            ));
        }
        report.output("layout", "not applicable (abstract drawing)");
        writeln!(text, "layout: not applicable (abstract drawing)").expect("write to string");
        return Ok(());
    };
    let layouts = layout_planes(rect, r)?;
    report.output("layout", "certified: per-plane recount equals the surviving set");
    if let Some(dir) = layout_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
        for layout in &layouts {
            let mut content = String::new();
            for (i, &orig) in layout.vertex_map.iter().enumerate() {
                writeln!(content, "# vertex {} was {} in the input drawing", i + 1, orig)
                    .expect("write to string");
            }
            content.push_str(&layout.drawing.to_text());
            let path = dir.join(format!("plane_{:02}.txt", layout.plane + 1));
            write_file(&path, &content)?;
        }
        report.output("layout_dir", dir.display().to_string());
        writeln!(text, "layout: certified; {} plane drawings written to {}", layouts.len(), dir.display())
            .expect("write to string");
    } else {
        writeln!(text, "layout: certified (recount equals the surviving set)")
            .expect("write to string");
    }
    Ok(())
}

fn cmd_split_run(
    ctx: &Ctx,
    scheme_args: &SchemeArgs,
    drawing_args: &DrawingArgs,
    layout_dir: Option<&Path>,
) -> Result<(), CliError> {
    ctx.no_csv()?;
    let sch = load_scheme(scheme_args, ctx.budget())?;
    let loaded = load_drawing(drawing_args)?;
    let lab = sample_labeling(&sch, loaded.graph(), ctx.seed())?;
    let r = split(loaded.instance(), &sch, &lab)?;
    let mut report = RunReport::new("split run");
    describe_scheme_args(scheme_args, &mut report);
    describe_drawing_args(drawing_args, &mut report);
    report.seed = Some(ctx.seed());
    let mut text = String::new();
    split_outputs(&mut report, &mut text, &loaded, &r, Some(&lab));
    certify_layout(&loaded, &r, layout_dir, &mut report, &mut text)?;
    ctx.finish(report, text)
}

fn mc_outputs(mc: &MonteCarlo) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("trials".into(), mc.trials.into());
    m.insert("mean".into(), rational_str(&mc.mean).into());
    m.insert("mean_decimal".into(), render_4dp(&mc.mean).into());
    m.insert("variance".into(), rational_str(&mc.variance).into());
    m.insert("variance_decimal".into(), render_4dp(&mc.variance).into());
    m.insert("std_error".into(), format!("{:.6}", mc.std_error()).into());
    m.insert("min".into(), mc.min.into());
    m.insert("min_seed".into(), mc.min_seed.into());
    m.insert("min_trial".into(), mc.min_trial.into());
    m.insert(
        "histogram".into(),
        Value::Object(
            mc.histogram.iter().map(|(&k, &v)| (k.to_string(), Value::from(v))).collect(),
        ),
    );
    m
}

fn cmd_split_mc(
    ctx: &Ctx,
    scheme_args: &SchemeArgs,
    drawing_args: &DrawingArgs,
    trials: u64,
) -> Result<(), CliError> {
    ctx.no_csv()?;
    if trials < 1 {
        return Err(CliError::Validation("--trials must be at least 1".into()));
    }
    let sch = load_scheme(scheme_args, ctx.budget())?;
    let loaded = load_drawing(drawing_args)?;
    let inst = loaded.instance();
    let expectation = expected_crossings(inst, &sch)?;
    let mc = monte_carlo(inst, &sch, trials, ctx.seed())?;
    let mut report = RunReport::new("split mc");
    describe_scheme_args(scheme_args, &mut report);
    describe_drawing_args(drawing_args, &mut report);
    report.input("trials", trials);
    report.seed = Some(ctx.seed());
    report.output("scheme", sch.summary());
    report.output("drawing", loaded.label());
    report.output("crossings", loaded.crossings().count());
    report.output_rational("expectation", &expectation);
    report.output("mc", Value::Object(mc_outputs(&mc)));
    let text = format!(
        "{} under scheme {}: {} crossings\n\
         exact expectation: {} ≈ {}\n\
         {} trials (master seed {}): mean {} ≈ {}, std error {:.6}\n\
         minimum {} at trial {} (seed {})\n",
        loaded.label(),
        sch.summary(),
        loaded.crossings().count(),
        rational_str(&expectation),
        render_4dp(&expectation),
        mc.trials,
        mc.master_seed,
        rational_str(&mc.mean),
        render_4dp(&mc.mean),
        mc.std_error(),
        mc.min,
        mc.min_trial,
        mc.min_seed,
    );
    ctx.finish(report, text)
}

fn cmd_split_best(
    ctx: &Ctx,
    scheme_args: &SchemeArgs,
    drawing_args: &DrawingArgs,
    trials: u64,
) -> Result<(), CliError> {
    ctx.no_csv()?;
    if trials < 1 {
        return Err(CliError::Validation("--trials must be at least 1".into()));
    }
    let sch = load_scheme(scheme_args, ctx.budget())?;
    let loaded = load_drawing(drawing_args)?;
    let best = best_of(loaded.instance(), &sch, trials, ctx.seed())?;
    let best_seed = best.seed.expect("sampled splits record their seed");
    let mut report = RunReport::new("split best");
    describe_scheme_args(scheme_args, &mut report);
    describe_drawing_args(drawing_args, &mut report);
    report.input("trials", trials);
    report.seed = Some(ctx.seed());
    report.output("trials", trials);
    report.output("best_seed", best_seed);
    let mut text = format!("best of {trials} trials (master seed {}):\n", ctx.seed());
    split_outputs(&mut report, &mut text, &loaded, &best, None);
    certify_layout(&loaded, &best, None, &mut report, &mut text)?;
    writeln!(text, "reproduce with: split run --seed {best_seed}").expect("write to string");
    ctx.finish(report, text)
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

const CONFIG_KEYS: &[&str] = &[
    "scheme.case",
    "scheme.k",
    "scheme.points",
    "scheme.block",
    "scheme.design",
    "scheme.file",
    "drawing.kind",
    "drawing.n",
    "drawing.m",
    "drawing.file",
    "trials",
    "seed",
    "budget",
];

fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Parse(format!("config line {}: expected `key = value`", idx + 1))
        })?;
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(CliError::Parse(format!(
                "config line {}: unknown key {key:?}; known keys: {}",
                idx + 1,
                CONFIG_KEYS.join(", ")
            )));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(CliError::Parse(format!("config line {}: duplicate key {key:?}", idx + 1)));
        }
    }
    Ok(map)
}

fn cfg_int<T: FromStr>(cfg: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    match cfg.get(key) {
        None => Ok(None),
        Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
            CliError::Parse(format!("config key {key}: invalid integer {raw:?}"))
        }),
    }
}

fn cmd_pipeline(ctx: &Ctx, args: &PipelineArgs) -> Result<(), CliError> {
    ctx.no_csv()?;
    let text = read_file(&args.config).map_err(|e| e.at_stage("config"))?;
    let cfg = parse_config(&text).map_err(|e| e.at_stage("config"))?;

    let scheme_args = SchemeArgs {
        scheme: cfg.get("scheme.file").map(PathBuf::from),
        case: cfg.get("scheme.case").cloned(),
        k: cfg_int(&cfg, "scheme.k").map_err(|e| e.at_stage("config"))?,
        points: cfg_int(&cfg, "scheme.points").map_err(|e| e.at_stage("config"))?,
        block: cfg_int(&cfg, "scheme.block").map_err(|e| e.at_stage("config"))?,
        design: cfg.get("scheme.design").map(PathBuf::from),
    };
    let drawing_args = match cfg.get("drawing.kind").map(String::as_str) {
        Some("convex") => DrawingArgs {
            convex: Some(
                cfg_int(&cfg, "drawing.n")
                    .map_err(|e| e.at_stage("config"))?
                    .ok_or_else(|| {
                        CliError::Validation("stage drawing: convex needs drawing.n".into())
                    })?,
            ),
            ..DrawingArgs::default()
        },
        Some("two-line") => {
            let m = cfg_int(&cfg, "drawing.m").map_err(|e| e.at_stage("config"))?;
            let n = cfg_int(&cfg, "drawing.n").map_err(|e| e.at_stage("config"))?;
            match (m, n) {
                (Some(m), Some(n)) => {
                    DrawingArgs { two_line: Some(vec![m, n]), ..DrawingArgs::default() }
                }
                _ => {
                    return Err(CliError::Validation(
                        "stage drawing: two-line needs drawing.m and drawing.n".into(),
                    ));
                }
            }
        }
        Some("file") => DrawingArgs {
            drawing: Some(PathBuf::from(cfg.get("drawing.file").ok_or_else(|| {
                CliError::Validation("stage drawing: kind file needs drawing.file".into())
            })?)),
            ..DrawingArgs::default()
        },
        Some(other) => {
            return Err(CliError::Validation(format!(
                "stage drawing: unknown drawing.kind {other:?}; expected convex, two-line, or file"
            )));
        }
        None => {
            return Err(CliError::Validation("stage drawing: drawing.kind is required".into()));
        }
    };
    let trials: u64 = cfg_int(&cfg, "trials")
        .map_err(|e| e.at_stage("config"))?
        .unwrap_or(1000);
    if trials < 1 {
        return Err(CliError::Validation("stage config: trials must be at least 1".into()));
    }
    let seed = ctx
        .seed_opt
        .or(cfg_int(&cfg, "seed").map_err(|e| e.at_stage("config"))?)
        .unwrap_or(0);
    let budget = ctx
        .budget_opt
        .or(cfg_int(&cfg, "budget").map_err(|e| e.at_stage("config"))?)
        .unwrap_or(DEFAULT_BUDGET);

    let mut validations: Vec<String> = Vec::new();

    let sch = load_scheme(&scheme_args, budget).map_err(|e| e.at_stage("scheme-build"))?;
    let validity = validate_scheme(&sch);
    if !validity.is_valid() {
        return Err(
            CliError::Validation(validity.to_string()).at_stage("scheme-validate")
        );
    }
    validations.push(format!("scheme {}: valid", sch.summary()));

    let loaded = load_drawing(&drawing_args).map_err(|e| e.at_stage("drawing"))?;
    validations.push(format!(
        "drawing {}: {} crossings counted exactly",
        loaded.label(),
        loaded.crossings().count()
    ));

    let inst = loaded.instance();
    let expectation = expected_crossings(inst, &sch).map_err(|e| {
        CliError::from(e).at_stage("expectation")
    })?;

    // Exact per-pattern survival probabilities for the patterns that occur.
    let unipartite = matches!(sch.labels(), BaseLabelSet::Unipartite { .. });
    let mut patterns: Vec<PairPattern> = loaded
        .crossings()
        .pairs()
        .iter()
        .map(|p| match p.pattern {
            PairPattern::SharedOne(Some(_)) if unipartite => PairPattern::SharedOne(None),
            other => other,
        })
        .collect();
    patterns.sort_unstable();
    patterns.dedup();
    let mut q_map = Map::new();
    let mut q_lines = String::new();
    for pattern in patterns {
        let sp = exact_q(&sch, pattern).map_err(|e| CliError::from(e).at_stage("expectation"))?;
        q_map.insert(pattern.to_string(), rational_str(&sp.value).into());
        writeln!(q_lines, "  q({pattern}) = {} ≈ {}", rational_str(&sp.value), render_4dp(&sp.value))
            .expect("write to string");
    }

    let mc =
        monte_carlo(inst, &sch, trials, seed).map_err(|e| CliError::from(e).at_stage("monte-carlo"))?;

    let mut report = RunReport::new("pipeline");
    report.input("config", args.config.display().to_string());
    for (key, value) in &cfg {
        report.input(key, value.as_str());
    }
    report.input("effective_trials", trials);
    report.seed = Some(seed);
    report.output("scheme", sch.summary());
    report.output("drawing", loaded.label());
    report.output("crossings", loaded.crossings().count());
    report.output(
        "validations",
        Value::Array(validations.iter().map(|v| Value::String(v.clone())).collect()),
    );
    report.output("q", Value::Object(q_map));
    report.output_rational("expectation", &expectation);
    report.output("mc", Value::Object(mc_outputs(&mc)));

    let text = format!(
        "pipeline: scheme {} on {} ({} crossings)\n\
         validations:\n{}\
         survival probabilities:\n{}\
         exact expectation: {} ≈ {}\n\
         {} trials (master seed {}): mean {} ≈ {}, std error {:.6}\n\
         minimum {} at trial {} (seed {})\n",
        sch.summary(),
        loaded.label(),
        loaded.crossings().count(),
        validations.iter().map(|v| format!("  {v}\n")).collect::<String>(),
        q_lines,
        rational_str(&expectation),
        render_4dp(&expectation),
        mc.trials,
        mc.master_seed,
        rational_str(&mc.mean),
        render_4dp(&mc.mean),
        mc.std_error(),
        mc.min,
        mc.min_trial,
        mc.min_seed,
    );
    ctx.finish(report, text)
}
