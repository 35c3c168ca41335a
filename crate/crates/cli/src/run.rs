//! Batch command driver: parses the input files, applies one subcommand per
//! run, and produces a machine-readable report (one `STATUS<TAB>item<TAB>detail`
//! line per item) plus an exit code.
//!
//! Exit codes: 0 on success (including `unknown` results unless strict mode
//! is on), 1 on check failures, 2 on parse or arity errors, 3 on internal
//! invariant violations.

use std::fmt;
use std::path::{Path, PathBuf};

use tf_kernel::goodness::{check_profile_judgement, check_profile_spec, classify_goodness, Profile};
use tf_kernel::judgement::{Judgement, JudgementBody};
use tf_kernel::lf::{self, LfJudgement, LfJudgementBody, LfSpecification};
use tf_kernel::spec::{Declaration, Specification};
use tf_kernel::synth::{check_equal, derive_context_valid, derive_typing, synth_kind, SynthError};
use tf_kernel::syntax::Ann;
use tf_kernel::tfk::{self, KindAnn};

use crate::parse::{parse_file, Dialect, FileItems, Item, LfItem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    Synth,
    Equal,
    Translate,
    Nf,
    Lift,
    Label,
    Erase,
    Roundtrip,
    Classify,
    Profile,
    SnProbe,
}

pub struct Options {
    pub command: Command,
    pub dialect: Dialect,
    pub fuel: u64,
    pub strict_unknown: bool,
    pub includes: Vec<PathBuf>,
    pub to: Option<Dialect>,
    pub profile: Option<Profile>,
    pub files: Vec<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Error,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ok => write!(f, "ok"),
            Status::Error => write!(f, "error"),
            Status::Unknown => write!(f, "unknown"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Line {
    pub status: Status,
    pub item: String,
    pub detail: String,
}

pub struct Outcome {
    pub lines: Vec<Line>,
    /// Translated source text, for the translation subcommands.
    pub output: String,
    pub exit: i32,
}

impl Outcome {
    pub fn stdout(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            s.push_str(&format!("{}\t{}\t{}\n", l.status, l.item, l.detail));
        }
        s.push_str(&self.output);
        s
    }
}

struct State {
    tf: Specification<()>,
    tfk: Specification<KindAnn>,
    lf: LfSpecification,
}

fn basename(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.to_string_lossy().into_owned())
}

fn internal(e: &SynthError) -> bool {
    matches!(e, SynthError::Internal(_))
}

pub fn run(opts: &Options) -> Outcome {
    let mut lines = Vec::new();
    let mut output = String::new();
    let mut exit = 0i32;
    let mut state = State {
        tf: Specification::empty(),
        tfk: Specification::empty(),
        lf: LfSpecification::empty(),
    };
    // Includes are installed silently; errors in them are reported.
    for include in &opts.includes {
        let name = basename(include);
        let text = match std::fs::read_to_string(include) {
            Ok(t) => t,
            Err(e) => {
                lines.push(Line {
                    status: Status::Error,
                    item: name,
                    detail: format!("cannot read include: {e}"),
                });
                return Outcome { lines, output, exit: 2 };
            }
        };
        if let Err(e) = parse_file(
            &text,
            opts.dialect,
            &mut state.tf,
            &mut state.tfk,
            &mut state.lf,
        ) {
            lines.push(Line {
                status: Status::Error,
                item: name,
                detail: format!("parse error: {e}"),
            });
            return Outcome { lines, output, exit: 2 };
        }
    }
    for file in &opts.files {
        let name = basename(file);
        let text = match std::fs::read_to_string(file) {
            Ok(t) => t,
            Err(e) => {
                lines.push(Line {
                    status: Status::Error,
                    item: name,
                    detail: format!("cannot read file: {e}"),
                });
                return Outcome { lines, output, exit: 2 };
            }
        };
        // Processing replays declarations one by one against the state as it
        // was before this file.
        let snapshot_tf = state.tf.clone();
        let snapshot_tfk = state.tfk.clone();
        let snapshot_lf = state.lf.clone();
        let parsed = match parse_file(
            &text,
            opts.dialect,
            &mut state.tf,
            &mut state.tfk,
            &mut state.lf,
        ) {
            Ok(p) => p,
            Err(e) => {
                lines.push(Line {
                    status: Status::Error,
                    item: name,
                    detail: format!("parse error: {e}"),
                });
                return Outcome { lines, output, exit: 2 };
            }
        };
        let result = match &parsed.items {
            FileItems::Tf(items) => run_lamfree(
                opts,
                &name,
                items,
                &parsed.labels,
                snapshot_tf,
                &mut lines,
                &mut output,
            ),
            FileItems::Tfk(items) => run_lamfree(
                opts,
                &name,
                items,
                &parsed.labels,
                snapshot_tfk,
                &mut lines,
                &mut output,
            ),
            FileItems::Lf(items) => run_lf(
                opts,
                &name,
                items,
                &parsed.labels,
                snapshot_lf,
                &mut lines,
                &mut output,
            ),
        };
        match result {
            Ok(()) => {}
            Err(code) => exit = exit.max(code),
        }
    }
    for l in &lines {
        match l.status {
            Status::Error => exit = exit.max(1),
            Status::Unknown if opts.strict_unknown => exit = exit.max(1),
            _ => {}
        }
    }
    Outcome { lines, output, exit }
}

/// Dialect-specific parts of a run, implemented for the two lambda-free
/// dialects.
trait LamfreeOps: Ann + Sized {
    fn dialect() -> Dialect;
    fn roundtrip(
        spec: &Specification<Self>,
        j: &Judgement<Self>,
        fuel: u64,
    ) -> Result<String, String>;
    fn translate_spec_text(
        spec: &Specification<Self>,
        items: &[Item<Self>],
        to: Dialect,
        fuel: u64,
    ) -> Result<String, String>;
}

fn run_lamfree<A: LamfreeOps>(
    opts: &Options,
    file: &str,
    items: &[Item<A>],
    labels: &[String],
    mut spec: Specification<A>,
    lines: &mut Vec<Line>,
    output: &mut String,
) -> Result<(), i32> {
    let fuel = opts.fuel;
    match opts.command {
        Command::Classify => {
            for item in items {
                if let Item::Declaration(d) = item {
                    spec.push(d.clone()).map_err(|_| 2)?;
                }
            }
            let class = classify_goodness(&spec, fuel);
            lines.push(Line {
                status: Status::Ok,
                item: format!("{file}:spec"),
                detail: class.describe(),
            });
            return Ok(());
        }
        Command::Profile => {
            let profile = opts.profile.unwrap_or(Profile::SparTwo);
            let mut clean = true;
            for (i, item) in items.iter().enumerate() {
                match item {
                    Item::Declaration(d) => {
                        spec.push(d.clone()).map_err(|_| 2)?;
                    }
                    Item::Check(j) => {
                        for v in check_profile_judgement(j, profile) {
                            clean = false;
                            lines.push(Line {
                                status: Status::Error,
                                item: item_id(file, i, labels),
                                detail: v.to_string(),
                            });
                        }
                    }
                    Item::Derivation(_) => {}
                }
            }
            for v in check_profile_spec(&spec, profile) {
                clean = false;
                lines.push(Line {
                    status: Status::Error,
                    item: format!("{file}:spec"),
                    detail: v.to_string(),
                });
            }
            if clean {
                lines.push(Line {
                    status: Status::Ok,
                    item: format!("{file}:spec"),
                    detail: format!("no violations ({})", profile.name()),
                });
            }
            return Ok(());
        }
        Command::Translate | Command::Nf | Command::Lift | Command::Label | Command::Erase => {
            let to = translation_target(opts, A::dialect()).map_err(|msg| {
                lines.push(Line {
                    status: Status::Error,
                    item: file.to_string(),
                    detail: msg,
                });
                2
            })?;
            for item in items {
                if let Item::Declaration(d) = item {
                    spec.push(d.clone()).map_err(|_| 2)?;
                }
            }
            match A::translate_spec_text(&spec, items, to, fuel) {
                Ok(text) => {
                    output.push_str(&text);
                    return Ok(());
                }
                Err(msg) => {
                    lines.push(Line {
                        status: Status::Error,
                        item: file.to_string(),
                        detail: msg,
                    });
                    return Err(1);
                }
            }
        }
        _ => {}
    }
    for (i, item) in items.iter().enumerate() {
        let id = item_id(file, i, labels);
        match item {
            Item::Declaration(d) => {
                let before = spec.clone();
                spec.push(d.clone()).map_err(|_| 2)?;
                if opts.command == Command::Check {
                    match tf_kernel::goodness::verify_obligations(
                        &before,
                        &spec,
                        spec.len() - 1,
                        fuel,
                    ) {
                        Ok(()) => lines.push(Line {
                            status: Status::Ok,
                            item: id,
                            detail: "accepted".into(),
                        }),
                        Err(reason) => lines.push(Line {
                            status: Status::Error,
                            item: id,
                            detail: reason,
                        }),
                    }
                } else {
                    lines.push(Line {
                        status: Status::Ok,
                        item: id,
                        detail: "accepted".into(),
                    });
                }
            }
            Item::Check(j) => match opts.command {
                Command::Check => check_judgement(&spec, j, fuel, id, lines),
                Command::Synth => match &j.body {
                    JudgementBody::Typing(m, _) | JudgementBody::Equal(m, _, _) => {
                        match synth_kind(&spec, &j.context, m, fuel) {
                            Ok((kind, _)) => lines.push(Line {
                                status: Status::Ok,
                                item: id,
                                detail: format!("kind {kind}"),
                            }),
                            Err(e) => lines.push(Line {
                                status: if internal(&e) { Status::Error } else { Status::Error },
                                item: id,
                                detail: e.to_string(),
                            }),
                        }
                    }
                    JudgementBody::Valid => lines.push(Line {
                        status: Status::Ok,
                        item: id,
                        detail: "skipped (nothing to synthesise)".into(),
                    }),
                },
                Command::Equal => match &j.body {
                    JudgementBody::Equal(m, n, t) => {
                        match check_equal(&spec, &j.context, m, n, t, fuel) {
                            Ok(Some(_)) => lines.push(Line {
                                status: Status::Ok,
                                item: id,
                                detail: "derived".into(),
                            }),
                            Ok(None) => lines.push(Line {
                                status: Status::Unknown,
                                item: id,
                                detail: format!("not established within fuel {fuel}"),
                            }),
                            Err(e) => lines.push(Line {
                                status: Status::Error,
                                item: id,
                                detail: e.to_string(),
                            }),
                        }
                    }
                    _ => lines.push(Line {
                        status: Status::Ok,
                        item: id,
                        detail: "skipped (not an equality)".into(),
                    }),
                },
                Command::Roundtrip => match A::roundtrip(&spec, j, fuel) {
                    Ok(detail) => lines.push(Line { status: Status::Ok, item: id, detail }),
                    Err(detail) => {
                        lines.push(Line { status: Status::Error, item: id, detail })
                    }
                },
                Command::SnProbe => lines.push(Line {
                    status: Status::Ok,
                    item: id,
                    detail: "skipped (probe runs on the traditional dialect)".into(),
                }),
                _ => {}
            },
            Item::Derivation(d) => match opts.command {
                Command::Check => match tf_kernel::check::check_derivation(&spec, d) {
                    Ok(()) => lines.push(Line {
                        status: Status::Ok,
                        item: id,
                        detail: "checked".into(),
                    }),
                    Err(e) => lines.push(Line {
                        status: Status::Error,
                        item: id,
                        detail: e.to_string(),
                    }),
                },
                _ => lines.push(Line {
                    status: Status::Ok,
                    item: id,
                    detail: "skipped".into(),
                }),
            },
        }
    }
    Ok(())
}

fn item_id(file: &str, index: usize, labels: &[String]) -> String {
    let label = labels.get(index).map(String::as_str).unwrap_or("item");
    format!("{file}:{}:{label}", index + 1)
}

fn check_judgement<A: Ann>(
    spec: &Specification<A>,
    j: &Judgement<A>,
    fuel: u64,
    id: String,
    lines: &mut Vec<Line>,
) {
    let result: Result<Option<String>, SynthError> = match &j.body {
        JudgementBody::Valid => {
            derive_context_valid(spec, &j.context, fuel).map(|_| Some("derived".into()))
        }
        JudgementBody::Typing(m, t) => {
            derive_typing(spec, &j.context, m, t, fuel).map(|_| Some("derived".into()))
        }
        JudgementBody::Equal(m, n, t) => {
            match derive_context_valid(spec, &j.context, fuel)
                .and_then(|_| check_equal(spec, &j.context, m, n, t, fuel))
            {
                Ok(Some(_)) => Ok(Some("derived".into())),
                Ok(None) => Ok(None),
                Err(e) => Err(e),
            }
        }
    };
    match result {
        Ok(Some(detail)) => lines.push(Line { status: Status::Ok, item: id, detail }),
        Ok(None) => lines.push(Line {
            status: Status::Unknown,
            item: id,
            detail: format!("not established within fuel {fuel}"),
        }),
        Err(e) => lines.push(Line {
            status: Status::Error,
            item: id,
            detail: e.to_string(),
        }),
    }
}

fn translation_target(opts: &Options, from: Dialect) -> Result<Dialect, String> {
    let to = match opts.command {
        Command::Label => Dialect::Tfk,
        Command::Erase => Dialect::Tf,
        Command::Lift => Dialect::Lf,
        Command::Nf => Dialect::Tf,
        Command::Translate => opts.to.ok_or("translate requires --to")?,
        _ => return Err("not a translation".into()),
    };
    let valid = match (from, to) {
        (Dialect::Tf, Dialect::Tfk | Dialect::Lf) => true,
        (Dialect::Tfk, _) => true,
        (Dialect::Lf, Dialect::Tf | Dialect::Tfk) => true,
        (Dialect::Tf, Dialect::Tf) => true,
        _ => false,
    };
    if valid {
        Ok(to)
    } else {
        Err(format!("cannot translate {} to {}", from.name(), to.name()))
    }
}

impl LamfreeOps for () {
    fn dialect() -> Dialect {
        Dialect::Tf
    }

    fn roundtrip(
        spec: &Specification<()>,
        j: &Judgement<()>,
        fuel: u64,
    ) -> Result<String, String> {
        let JudgementBody::Typing(m, t) = &j.body else {
            return Ok("skipped (not a typing judgement)".into());
        };
        derive_typing(spec, &j.context, m, t, fuel).map_err(|e| e.to_string())?;
        let labelled_spec = tfk::label_specification(spec).map_err(|e| e.to_string())?;
        let lf_spec = lf::lift_specification(&labelled_spec);
        let kctx = tfk::label_context(spec, &j.context).map_err(|e| e.to_string())?;
        let lifted_ctx = lf::lift_context(&kctx);
        let labelled = tfk::label_object(spec, &j.context, m).map_err(|e| e.to_string())?;
        let lifted = lf::lift_object(&labelled);
        let back = lf::nf_object_base(&lf_spec, &lifted_ctx, &lifted)
            .map_err(|e| e.to_string())?;
        if &back == m {
            Ok("exact".into())
        } else {
            Err(format!("readback differs: {back}"))
        }
    }

    fn translate_spec_text(
        spec: &Specification<()>,
        items: &[Item<()>],
        to: Dialect,
        _fuel: u64,
    ) -> Result<String, String> {
        let labelled = tfk::label_specification(spec).map_err(|e| e.to_string())?;
        match to {
            Dialect::Tf => Ok(render_lamfree(spec, items, |j| Ok(j.clone()))),
            Dialect::Tfk => {
                let spec2 = spec.clone();
                Ok(render_translated(&labelled, items, move |j| {
                    tfk::label_judgement(&spec2, j).map_err(|e| e.to_string())
                }))
            }
            Dialect::Lf => {
                let lf_spec = lf::lift_specification(&labelled);
                let spec2 = spec.clone();
                let mut out = lf_spec.to_string();
                for item in items {
                    if let Item::Check(j) = item {
                        let kj = tfk::label_judgement(&spec2, j).map_err(|e| e.to_string())?;
                        out.push_str(&format!("check {}.\n", lf::lift_judgement(&kj)));
                    }
                }
                Ok(out)
            }
        }
    }
}

impl LamfreeOps for KindAnn {
    fn dialect() -> Dialect {
        Dialect::Tfk
    }

    fn roundtrip(
        spec: &Specification<KindAnn>,
        j: &Judgement<KindAnn>,
        fuel: u64,
    ) -> Result<String, String> {
        let JudgementBody::Typing(m, t) = &j.body else {
            return Ok("skipped (not a typing judgement)".into());
        };
        derive_typing(spec, &j.context, m, t, fuel).map_err(|e| e.to_string())?;
        let erased_spec = tfk::erase_specification(spec);
        let lf_spec = lf::lift_specification(spec);
        let lifted_ctx = lf::lift_context(&j.context);
        let lifted = lf::lift_object(m);
        let nf = lf::nf_object_base(&lf_spec, &lifted_ctx, &lifted)
            .map_err(|e| e.to_string())?;
        let erased_ctx = tfk::erase_context(&j.context);
        let relabelled = tfk::label_object(&erased_spec, &erased_ctx, &nf)
            .map_err(|e| e.to_string())?;
        match check_equal(spec, &j.context, m, &relabelled, t, fuel) {
            Ok(Some(_)) => Ok("up to equality".into()),
            Ok(None) => Err(format!("roundtrip equality not established within fuel {fuel}")),
            Err(e) => Err(e.to_string()),
        }
    }

    fn translate_spec_text(
        spec: &Specification<KindAnn>,
        items: &[Item<KindAnn>],
        to: Dialect,
        _fuel: u64,
    ) -> Result<String, String> {
        match to {
            Dialect::Tf => {
                let erased = tfk::erase_specification(spec);
                Ok(render_translated(&erased, items, |j| Ok(tfk::erase_judgement(j))))
            }
            Dialect::Tfk => Ok(render_lamfree(spec, items, |j| Ok(j.clone()))),
            Dialect::Lf => {
                let lf_spec = lf::lift_specification(spec);
                let mut out = lf_spec.to_string();
                for item in items {
                    if let Item::Check(j) = item {
                        out.push_str(&format!("check {}.\n", lf::lift_judgement(j)));
                    }
                }
                Ok(out)
            }
        }
    }
}

fn render_lamfree<A: Ann>(
    spec: &Specification<A>,
    items: &[Item<A>],
    mut judge: impl FnMut(&Judgement<A>) -> Result<Judgement<A>, String>,
) -> String {
    let mut out = String::new();
    let mut decl_index = spec.len() - items.iter().filter(|i| matches!(i, Item::Declaration(_))).count();
    for item in items {
        match item {
            Item::Declaration(_) => {
                out.push_str(&format!("{}\n", spec.declarations()[decl_index]));
                decl_index += 1;
            }
            Item::Check(j) => {
                if let Ok(j2) = judge(j) {
                    out.push_str(&format!("check {j2}.\n"));
                }
            }
            Item::Derivation(d) => {
                out.push_str(&format!("derivation {}.\n", crate::parse::emit_derivation(d)));
            }
        }
    }
    out
}

fn render_translated<A: Ann, B: Ann>(
    translated: &Specification<B>,
    items: &[Item<A>],
    mut judge: impl FnMut(&Judgement<A>) -> Result<Judgement<B>, String>,
) -> String {
    let mut out = String::new();
    let decls: Vec<&Declaration<B>> = translated.declarations().iter().collect();
    let total_items_decls = items
        .iter()
        .filter(|i| matches!(i, Item::Declaration(_)))
        .count();
    let mut decl_index = decls.len() - total_items_decls;
    for item in items {
        match item {
            Item::Declaration(_) => {
                out.push_str(&format!("{}\n", decls[decl_index]));
                decl_index += 1;
            }
            Item::Check(j) => {
                if let Ok(j2) = judge(j) {
                    out.push_str(&format!("check {j2}.\n"));
                }
            }
            Item::Derivation(_) => {}
        }
    }
    out
}

fn run_lf(
    opts: &Options,
    file: &str,
    items: &[LfItem],
    labels: &[String],
    mut spec: LfSpecification,
    lines: &mut Vec<Line>,
    output: &mut String,
) -> Result<(), i32> {
    let fuel = opts.fuel;
    if matches!(
        opts.command,
        Command::Translate | Command::Nf | Command::Lift | Command::Label | Command::Erase
    ) {
        let to = translation_target(opts, Dialect::Lf).map_err(|msg| {
            lines.push(Line { status: Status::Error, item: file.to_string(), detail: msg });
            2
        })?;
        for item in items {
            if let LfItem::Declaration(d) = item {
                spec.push(d.clone()).map_err(|_| 2)?;
            }
        }
        let back = lf::nf_specification(&spec).map_err(|e| {
            lines.push(Line {
                status: Status::Error,
                item: file.to_string(),
                detail: e.to_string(),
            });
            1
        })?;
        let text = match to {
            Dialect::Tf => {
                let mut out = back.to_string();
                for item in items {
                    if let LfItem::Check(j) = item {
                        match lf::nf_judgement(&spec, j) {
                            Ok(lf::NfJudgement::Primitive(p)) => {
                                out.push_str(&format!("check {p}.\n"));
                            }
                            Ok(lf::NfJudgement::Defined(_)) | Err(_) => {}
                        }
                    }
                }
                out
            }
            Dialect::Tfk => {
                let labelled = tfk::label_specification(&back).map_err(|e| {
                    lines.push(Line {
                        status: Status::Error,
                        item: file.to_string(),
                        detail: e.to_string(),
                    });
                    1
                })?;
                labelled.to_string()
            }
            Dialect::Lf => spec.to_string(),
        };
        output.push_str(&text);
        return Ok(());
    }
    for (i, item) in items.iter().enumerate() {
        let id = item_id(file, i, labels);
        match item {
            LfItem::Declaration(d) => {
                let before = spec.clone();
                spec.push(d.clone()).map_err(|_| 2)?;
                if opts.command == Command::Check {
                    let result = check_lf_declaration(&before, d, fuel);
                    match result {
                        Ok(()) => lines.push(Line {
                            status: Status::Ok,
                            item: id,
                            detail: "accepted".into(),
                        }),
                        Err(e) => lines.push(Line {
                            status: Status::Error,
                            item: id,
                            detail: e,
                        }),
                    }
                } else {
                    lines.push(Line {
                        status: Status::Ok,
                        item: id,
                        detail: "accepted".into(),
                    });
                }
            }
            LfItem::Check(j) => match opts.command {
                Command::Check | Command::Equal | Command::Synth => {
                    match lf::check_lf(&spec, j, fuel) {
                        Ok(()) => lines.push(Line {
                            status: Status::Ok,
                            item: id,
                            detail: "derived".into(),
                        }),
                        Err(lf::LfError::FuelExhausted) => lines.push(Line {
                            status: Status::Unknown,
                            item: id,
                            detail: format!("not established within fuel {fuel}"),
                        }),
                        Err(e) => lines.push(Line {
                            status: Status::Error,
                            item: id,
                            detail: e.to_string(),
                        }),
                    }
                }
                Command::Roundtrip => match lf_roundtrip(&spec, j, fuel) {
                    Ok(detail) => lines.push(Line { status: Status::Ok, item: id, detail }),
                    Err(detail) => lines.push(Line { status: Status::Error, item: id, detail }),
                },
                Command::SnProbe => match &j.body {
                    LfJudgementBody::Typing(k, _) | LfJudgementBody::ObjEq(k, _, _) => {
                        match lf::sn_probe(&spec, &j.context, k, fuel) {
                            Ok(probe) => {
                                let rules = probe
                                    .trace
                                    .steps
                                    .iter()
                                    .filter(|s| matches!(s.rule, lf::StepRule::Equation(_)))
                                    .count();
                                let tracking = if probe.nf_invariant_on_beta_eta
                                    && probe.nf_changed_on_rules
                                {
                                    "readback tracks"
                                } else {
                                    "readback anomaly"
                                };
                                match probe.trace.terminal {
                                    lf::Terminal::Normal => lines.push(Line {
                                        status: Status::Ok,
                                        item: id,
                                        detail: format!(
                                            "normal after {} steps ({} rule steps), {tracking}",
                                            probe.trace.steps.len(),
                                            rules
                                        ),
                                    }),
                                    lf::Terminal::FuelExhausted => lines.push(Line {
                                        status: Status::Error,
                                        item: id,
                                        detail: format!(
                                            "fuel exhausted after {} steps; possible non-termination",
                                            probe.trace.steps.len()
                                        ),
                                    }),
                                }
                            }
                            Err(e) => lines.push(Line {
                                status: Status::Error,
                                item: id,
                                detail: e.to_string(),
                            }),
                        }
                    }
                    _ => lines.push(Line {
                        status: Status::Ok,
                        item: id,
                        detail: "skipped (not an object judgement)".into(),
                    }),
                },
                _ => {}
            },
        }
    }
    let _ = output;
    Ok(())
}

fn check_lf_declaration(
    before: &LfSpecification,
    d: &lf::LfDeclaration,
    fuel: u64,
) -> Result<(), String> {
    let mut budget = lf::Budget::new(fuel);
    match d {
        lf::LfDeclaration::Constant { kind, .. } => {
            lf::kind_wf(before, &Vec::new(), kind, &mut budget).map_err(|e| e.to_string())
        }
        lf::LfDeclaration::Equation { telescope, lhs, rhs, kind } => {
            lf::context_valid(before, telescope, &mut budget).map_err(|e| e.to_string())?;
            lf::kind_wf(before, telescope, kind, &mut budget).map_err(|e| e.to_string())?;
            lf::check_object(before, telescope, lhs, kind, &mut budget)
                .map_err(|e| format!("left side: {e}"))?;
            lf::check_object(before, telescope, rhs, kind, &mut budget)
                .map_err(|e| format!("right side: {e}"))
        }
    }
}

fn lf_roundtrip(spec: &LfSpecification, j: &LfJudgement, fuel: u64) -> Result<String, String> {
    let LfJudgementBody::Typing(k, kind) = &j.body else {
        return Ok("skipped (not a typing judgement)".into());
    };
    lf::check_lf(spec, j, fuel).map_err(|e| e.to_string())?;
    let nf = lf::nf_object_base(spec, &j.context, k).map_err(|e| e.to_string())?;
    let tf_spec = lf::nf_specification(spec).map_err(|e| e.to_string())?;
    let tf_ctx = lf::nf_context(spec, &j.context).map_err(|e| e.to_string())?;
    let relabelled =
        tfk::label_object(&tf_spec, &tf_ctx, &nf).map_err(|e| e.to_string())?;
    let relifted = lf::lift_object(&relabelled);
    let eq = LfJudgement {
        context: j.context.clone(),
        body: LfJudgementBody::ObjEq(k.clone(), relifted, kind.clone()),
    };
    lf::check_lf(spec, &eq, fuel).map_err(|e| e.to_string())?;
    Ok("up to conversion".into())
}
