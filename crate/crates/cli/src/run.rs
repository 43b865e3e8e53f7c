//! The batch runner: executes scenario tasks and assembles the report in
//! file order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use etale_entropy::algdyn::{
    gamma_infinity_entropy, gromov_yomdin_gap, h_et, integer_degree, monomial_dynamical_degrees, pullback_correspondence,
    trim_correspondence, MonomialMap, WeightedFamilyEntry,
};
use etale_entropy::etale::{
    conjecture1_search, h_cr, h_omega, host_entropy, theorem1_suite, verify_etale_cover, CandidateOutcome, EntropyValue,
    EvalConfig, GeneratorParams, HcrResult, Provenance, TrialRecord,
};
use etale_entropy::Bracket;

use crate::report::{Report, Settings, TaskReport};
use crate::scenario::{Built, Scenario, TaskOp, TaskSpec};

pub const TOOL: &str = "entropy";

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub cfg: EvalConfig,
    /// Master seed for sampled checks and the seeded suites.
    pub seed: u64,
    pub params: GeneratorParams,
    /// Worker threads; the report order does not depend on it.
    pub jobs: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { cfg: EvalConfig::default(), seed: 0, params: GeneratorParams::default(), jobs: 1 }
    }
}

impl RunOptions {
    /// The evaluator settings with the sampling seed set to the master seed.
    pub fn config(&self) -> EvalConfig {
        EvalConfig { sample_seed: self.seed, ..self.cfg }
    }
}

/// Run every task. A task that fails is recorded and the run continues; a
/// scenario that cannot be built under the given caps fails every task.
pub fn run(sc: &Scenario, opts: &RunOptions) -> Report {
    let cfg = opts.config();
    let tasks = match sc.build(&cfg) {
        Ok(built) => run_tasks(&sc.tasks, &built, opts, &cfg),
        Err(e) => sc
            .tasks
            .iter()
            .map(|t| {
                let mut r = TaskReport::new(&t.id, t.op.name());
                r.fail(format!("scenario does not build: {e}"));
                r
            })
            .collect(),
    };
    Report {
        tool: TOOL.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: opts.seed,
        settings: Settings::from_config(&cfg),
        tasks,
    }
}

fn run_tasks(tasks: &[TaskSpec], built: &Built, opts: &RunOptions, cfg: &EvalConfig) -> Vec<TaskReport> {
    let jobs = opts.jobs.clamp(1, tasks.len().max(1));
    if jobs == 1 {
        return tasks.iter().map(|t| run_task(t, built, opts, cfg)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<TaskReport>>> = Mutex::new(vec![None; tasks.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(t) = tasks.get(i) else { break };
                let r = run_task(t, built, opts, cfg);
                slots.lock().expect("no panics while holding the lock")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every task ran")).collect()
}

fn run_task(task: &TaskSpec, built: &Built, opts: &RunOptions, cfg: &EvalConfig) -> TaskReport {
    let mut r = TaskReport::new(&task.id, task.op.name());
    if let Err(e) = execute(&task.op, built, opts, cfg, &mut r) {
        r.fail(e);
    }
    r
}

fn value(r: &mut TaskReport, name: impl Into<String>, v: &EntropyValue) {
    r.value(name, v.bracket, v.provenance);
}

fn report_hcr(r: &mut TaskReport, h: &HcrResult) {
    value(r, "h_cr", &h.value);
    r.fact("h_cr.best", h.best.as_ref().map_or("none".to_string(), |c| c.to_string()));
    r.fact("h_cr.candidates", format!("{} verified, {} rejected, {} generated", h.verified, h.rejected, h.generated));
    for CandidateOutcome { candidate, result, mode } in &h.declared {
        match result {
            Ok(v) => {
                value(r, format!("candidate {candidate}"), v);
                r.fact(format!("candidate {candidate}"), format!("verified ({mode})"));
            }
            Err(reason) => r.fact(format!("candidate {candidate}"), format!("rejected ({mode}): {reason}")),
        }
    }
}

fn execute(op: &TaskOp, built: &Built, opts: &RunOptions, cfg: &EvalConfig, r: &mut TaskReport) -> Result<(), String> {
    let reg = &built.registry;
    let s = |e: &dyn std::fmt::Display| e.to_string();
    match op {
        TaskOp::HOmega { system, family, candidates, auto, complete } => {
            let rep = h_omega(reg, system, candidates, *auto, family, *complete, cfg).map_err(|e| s(&e))?;
            report_hcr(r, &rep.h_cr);
            for e in &rep.family {
                r.fact(format!("cover {}", e.id), format!("{} {}", e.cover, e.verdict));
                let check = match &e.check.failure {
                    None => format!("valid ({}, density {:?})", e.check.mode, e.check.density).to_lowercase(),
                    Some(f) => format!("failed ({}): {f}", e.check.mode),
                };
                r.fact(format!("compactification {}", e.id), format!("host {} {check}", e.host));
                // excluded entries carry no numbers
                if let (Some(g), Some(h)) = (&e.guarded, &e.check.entropy) {
                    value(r, format!("host {}", e.id), h);
                    r.value(format!("guarded {}", e.id), *g, h.provenance);
                }
                r.fact(format!("contributes {}", e.id), e.contributes());
            }
            match &rep.family_min {
                Some(m) => value(r, "family_min", m),
                None => r.fact("family_min", "none"),
            }
            value(r, "h_omega", &rep.value);
            r.fact("exact", rep.exact);
            for c in &rep.caveats {
                r.caveat(c.clone());
            }
        }
        TaskOp::HCr { system, candidates, auto } => {
            let sys = reg.system(system).map_err(|e| s(&e))?;
            report_hcr(r, &h_cr(sys, candidates, *auto, cfg).map_err(|e| s(&e))?);
        }
        TaskOp::Entropy { system } => {
            let sys = reg.system(system).map_err(|e| s(&e))?;
            value(r, "h_top", &host_entropy(sys, cfg).map_err(|e| s(&e))?);
        }
        TaskOp::VerifyCover { cover } => {
            let w = reg.cover(cover).map_err(|e| s(&e))?;
            let verdict = verify_etale_cover(reg, w, cfg).map_err(|e| s(&e))?;
            r.fact("projection", format!("{} from {} to {}", w.projection.kind(), w.source, w.target));
            r.fact("verdict", &verdict);
            if let Some(m) = verdict.mode() {
                r.fact("mode", m);
            }
            r.fact("etale", verdict.is_verified());
        }
        TaskOp::Gamma { correspondence } => {
            let c = &built.correspondences[correspondence];
            let t = trim_correspondence(c);
            r.fact("trimmed", format!("kept {:?}, removed {:?}", t.kept, t.removed));
            let g = gamma_infinity_entropy(c, cfg.tol).map_err(|e| s(&e))?;
            r.value("gamma", g.bracket, Provenance::Certified);
            r.fact("empty", g.empty);
        }
        TaskOp::HEt { correspondence, pullbacks, declared, monomial } => {
            let c = &built.correspondences[correspondence];
            let mut family = vec![WeightedFamilyEntry::identity(c, cfg.tol).map_err(|e| s(&e))?];
            for (i, p) in pullbacks.iter().enumerate() {
                let mut e = pullback_correspondence(c, p, cfg.tol).map_err(|e| format!("pullback {}: {e}", i + 1))?;
                e.label = format!("pullback{}", i + 1);
                family.push(e);
            }
            for (id, d) in declared {
                let e = WeightedFamilyEntry::declared(id.clone(), built.correspondences[id].clone(), *d, cfg.tol)
                    .map_err(|e| format!("declared {id}: {e}"))?;
                family.push(e);
            }
            for e in &family {
                r.fact(format!("entry {}", e.label), format!("{} points, degree {}", e.correspondence.points(), e.degree));
                r.value(format!("weighted {}", e.label), e.weighted, e.provenance);
            }
            let w = h_et(&family).map_err(|e| s(&e))?;
            r.value("h_et", w.value, w.provenance);
            r.fact("argmax", &w.label);
            if let Some(m) = monomial {
                let m = &built.monomials[m];
                let profile = monomial_dynamical_degrees(m, cfg.tol).map_err(|e| s(&e))?;
                let (bound, argmax) = profile.log_bound();
                r.value("degree_bound", bound, profile.provenance);
                r.fact("degree_bound.argmax", format!("p = {argmax}"));
                for e in &family {
                    let gap = gromov_yomdin_gap(&profile, e.weighted, e.provenance, cfg.tol);
                    let tag = EntropyValue::combine_tag(e.provenance, profile.provenance);
                    r.value(format!("gap {}", e.label), gap.gap, tag);
                    if gap.inconsistent {
                        r.fail(format!("weighted value of {} exceeds the degree bound", e.label));
                    }
                }
            }
        }
        TaskOp::Degrees { monomial } => degrees(&built.monomials[monomial], cfg, r)?,
        TaskOp::Suite { trials } => {
            let rep = theorem1_suite(&opts.params, opts.seed, *trials, cfg).map_err(|e| s(&e))?;
            r.fact("trials", format!("{} of {} completed", rep.completed, rep.trials));
            for p in &rep.parts {
                r.fact(format!("part {}", p.part), format!("{}: {} checks, {} failures", p.name, p.checks, p.failures.len()));
                for f in &p.failures {
                    r.fact(format!("part {} failure", p.part), f);
                }
            }
            for e in &rep.errors {
                r.fact("error", e);
            }
            if !rep.passed() {
                r.fail("suite reported failures");
            }
        }
        TaskOp::Conjecture1 { trials } => {
            let rep = conjecture1_search(&opts.params, opts.seed, *trials, cfg).map_err(|e| s(&e))?;
            r.fact("trials", rep.trials);
            for (kind, n) in &rep.kinds {
                r.fact(format!("kind {kind}"), n);
            }
            r.fact("unverified", rep.unverified);
            r.fact("violations", rep.violations.len());
            for rec in &rep.records {
                r.fact("trial", trial_line(rec));
            }
            if !rep.violations.is_empty() {
                r.fail(format!("certified violations in trials {:?}", rep.violations));
            }
        }
    }
    Ok(())
}

/// One line of the witness log; `--replay` rebuilds the trial from it.
pub fn trial_line(rec: &TrialRecord) -> String {
    let mut line = format!(
        "{} {} base=[{}] cover={} closure=[{}] h(X)={} h(Z)={} certified {}",
        rec.trial,
        rec.kind,
        rec.base,
        rec.cover,
        rec.closure,
        rec.h_base,
        rec.h_closure,
        if rec.violation {
            "VIOLATION"
        } else if rec.verified {
            "ok"
        } else {
            "unverified"
        }
    );
    if !rec.removed.is_empty() {
        line += &format!(" removed={:?}", rec.removed);
    }
    if let Some(n) = &rec.note {
        line += &format!(" ({n})");
    }
    line
}

fn degrees(m: &MonomialMap, cfg: &EvalConfig, r: &mut TaskReport) -> Result<(), String> {
    let profile = monomial_dynamical_degrees(m, cfg.tol).map_err(|e| e.to_string())?;
    r.fact("matrix", m.matrix());
    r.fact("degree", m.degree());
    let mut ints = Vec::new();
    for (p, l) in profile.lambdas.iter().enumerate() {
        r.value(format!("lambda_{p}"), *l, profile.provenance);
        let int = integer_degree(m, &profile, p).map_err(|e| e.to_string())?;
        ints.push(int.as_ref().map_or("?".to_string(), |v| v.to_string()));
    }
    r.fact("integer_profile", format!("({})", ints.join(",")));
    if let Some(growth) = &profile.growth {
        for (p, g) in growth.iter().enumerate() {
            r.value(format!("growth_{p}"), Bracket::exact(*g), Provenance::Numeric);
        }
    }
    r.fact("log_concave", profile.is_log_concave(1e-6));
    let top = profile.lambdas[m.dim()];
    let det = m.degree().to_string().parse::<f64>().unwrap_or(f64::INFINITY);
    r.fact("top_degree_is_det", top.overlaps(&Bracket::exact(det), 1e-6 * det.max(1.0)));
    let (bound, argmax) = profile.log_bound();
    r.value("degree_bound", bound, profile.provenance);
    r.fact("degree_bound.argmax", format!("p = {argmax}"));
    match m.covering_model() {
        Ok(model) => {
            let h = gamma_infinity_entropy(&model, cfg.tol).map_err(|e| e.to_string())?.bracket;
            r.value("h_model", h, Provenance::Certified);
            let gap = gromov_yomdin_gap(&profile, h, Provenance::Certified, cfg.tol);
            r.value("gap", gap.gap, Provenance::Certified);
            if gap.inconsistent {
                r.fail("covering model entropy exceeds the degree bound");
            }
        }
        Err(e) => r.caveat(format!("no covering model: {e}")),
    }
    Ok(())
}
