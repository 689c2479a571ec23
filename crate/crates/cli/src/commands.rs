use crate::report::{Args, Certificate, Failure, RunReport, Status, Verification, SCHEMA};
use apcert::dense::{build_rpg, dense_decide, dense_search, DenseParams};
use apcert::set::{normalize, parse_set_text};
use apcert::subsetsum_ap::{theorem_ss, Profile};
use apcert::sumset_ap::theorem_ka;
use apcert::unbounded::UnboundedSolver;
use apcert::{verify_solution, ArithProgression, CompactSolution, Error, RandomSource, SortedIntSet};
use std::fs;

/// Ends a command early with a status and message.
pub struct Stop {
    pub status: Status,
    pub message: String,
    pub partial: Option<ArithProgression>,
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        let (status, partial) = match &e {
            Error::Exhausted { partial, .. } => (Status::Exhausted, *partial),
            Error::InternalContract(_) | Error::MultiplicityExceeded { .. } => (Status::CertificateFailure, None),
            _ => (Status::Precondition, None),
        };
        Stop {
            status,
            message: e.to_string(),
            partial,
        }
    }
}

fn precondition(message: String) -> Stop {
    Stop {
        status: Status::Precondition,
        message,
        partial: None,
    }
}

pub struct Input {
    pub raw: Vec<i128>,
    pub set: SortedIntSet,
}

pub fn read_input(path: &str) -> Result<Input, Stop> {
    let text = fs::read_to_string(path).map_err(|e| precondition(format!("cannot read {path}: {e}")))?;
    let raw = parse_set_text(&text)?;
    let set = normalize(&raw)?.set;
    Ok(Input { raw, set })
}

pub fn new_report(command: &str, args: Args, seed: u64) -> RunReport {
    RunReport {
        schema: SCHEMA,
        command: command.to_string(),
        args,
        seed,
        ..RunReport::default()
    }
}

/// Progression indices to certify: all of them, a seeded sample, or none.
fn pick_indices(length: i128, verify_all: bool, sample: Option<u64>, seed: u64) -> Vec<i128> {
    if verify_all {
        return (0..=length).collect();
    }
    let Some(n) = sample else { return Vec::new() };
    let mut rng = RandomSource::new(seed).derive(u64::MAX);
    (0..n).map(|_| rng.uniform(0, length)).collect()
}

/// Queries and verifies each index; the verdict comes from the independent
/// verifier, not from the witness.
fn certify<F>(report: &mut RunReport, base: &SortedIntSet, ap: ArithProgression, indices: &[i128], mut query: F) -> u64
where
    F: FnMut(i128, &mut RandomSource) -> apcert::Result<CompactSolution>,
{
    let master = RandomSource::new(report.seed);
    let mut rounds = 0;
    let mut v = Verification::default();
    for &j in indices {
        let mut rng = master.derive(j as u64);
        v.checked += 1;
        match query(j, &mut rng) {
            Ok(sol) => {
                let verdict = verify_solution(base, &sol);
                if !verdict.ok {
                    let reason = verdict.reason.map_or("rejected".to_string(), |r| r.to_string());
                    v.failures.push(Failure { target: sol.target, reason });
                } else if sol.target != ap.term(j) {
                    v.failures.push(Failure {
                        target: sol.target,
                        reason: format!("not term {j} of the progression"),
                    });
                } else {
                    v.passed += 1;
                }
                report.certificates.push(Certificate::new(Some(j), &sol));
            }
            Err(e) => v.failures.push(Failure {
                target: ap.term(j),
                reason: e.to_string(),
            }),
        }
        rounds += rng.rounds();
    }
    report.verification = v;
    rounds
}

fn detail(report: &mut RunReport, key: &str, value: impl ToString) {
    report.details.push((key.to_string(), value.to_string()));
}

fn finish_verification(report: &mut RunReport) -> Result<(), Stop> {
    if report.verification.all_passed() {
        Ok(())
    } else {
        Err(Stop {
            status: Status::CertificateFailure,
            message: format!(
                "{} of {} certificates failed verification",
                report.verification.checked - report.verification.passed,
                report.verification.checked
            ),
            partial: None,
        })
    }
}

pub fn ap_sumset(report: &mut RunReport) -> Result<(), Stop> {
    let input = read_input(&report.args.input)?;
    report.input_size = input.set.len();
    let m = match report.args.m {
        Some(m) => m,
        None => input.set.max().ok_or(Error::EmptySet)? as i128,
    };
    let n = input.set.len() as i128;
    let k = match report.args.k {
        Some(k) => k,
        None => ((m + 1 + n - 1) / n.max(1)).max(1) as u64,
    };
    report.args.m = Some(m);
    report.args.k = Some(k);
    let w = theorem_ka(&input.raw, m, k)?;
    report.ap = Some(w.ap.into());
    report.fold_budget = w.fold_budget;
    detail(report, "k_eff", w.k_eff);
    let indices = pick_indices(w.ap.length, report.args.verify_all, report.args.sample, report.seed);
    let rounds = certify(report, &input.set, w.ap, &indices, |j, rng| w.query(j, rng));
    if !indices.is_empty() {
        detail(report, "mean_sampling_rounds", format!("{:.3}", rounds as f64 / indices.len() as f64));
    }
    finish_verification(report)
}

pub fn ap_subsetsum(report: &mut RunReport, profile: &Profile) -> Result<(), Stop> {
    let input = read_input(&report.args.input)?;
    report.input_size = input.set.len();
    let ell = report.args.ell.ok_or_else(|| precondition("--ell is required".to_string()))?;
    let w = theorem_ss(&input.raw, ell, profile)?;
    report.ap = Some(w.ap.into());
    report.fold_budget = 0;
    let n = input.set.iter().filter(|&x| x > 0).count() as i128;
    let m = input.set.max().unwrap_or(0) as i128;
    detail(report, "coreset_size", w.coreset.len());
    detail(report, "coreset_bound", format!("{:.1}", w.coreset_bound));
    detail(report, "within_coreset_bound", w.within_coreset_bound());
    detail(report, "diff_within_7m_over_n", w.ap.diff * n <= 7 * m);
    detail(report, "ell0", w.ell0);
    detail(report, "augmentation_rounds", w.rounds);
    let indices = pick_indices(w.ap.length, report.args.verify_all, report.args.sample, report.seed);
    // every certificate must also stay inside the coreset
    let coreset = SortedIntSet::from_sorted(w.coreset.clone())?;
    certify(report, &coreset, w.ap, &indices, |j, rng| w.query(j, rng));
    finish_verification(report)
}

pub fn unbounded(report: &mut RunReport) -> Result<(), Stop> {
    let input = read_input(&report.args.input)?;
    report.input_size = input.set.len();
    let t = report.args.target.ok_or_else(|| precondition("--target is required".to_string()))?;
    let solver = UnboundedSolver::new(&input.raw)?;
    detail(report, "threshold", solver.threshold);
    detail(report, "t0", solver.t0);
    let mut rng = RandomSource::new(report.seed);
    let sol = solver.solve(t, &mut rng)?;
    let mut v = Verification {
        checked: 1,
        ..Verification::default()
    };
    let inside = sol.x.iter().all(|&(a, _)| input.set.contains(a));
    let total: i128 = sol.x.iter().map(|&(a, c)| a as i128 * c as i128).sum();
    if inside && total == t {
        v.passed = 1;
    } else {
        v.failures.push(Failure {
            target: t,
            reason: format!("multipliers sum to {total}"),
        });
    }
    report.x = Some(sol.x);
    report.verification = v;
    finish_verification(report)
}

pub fn dense(report: &mut RunReport, profile: &Profile) -> Result<(), Stop> {
    let input = read_input(&report.args.input)?;
    report.input_size = input.set.len();
    let t = report.args.target.ok_or_else(|| precondition("--target is required".to_string()))?;
    let dd = build_rpg(&input.raw, &DenseParams::for_profile(profile))?;
    detail(report, "gamma", dd.gamma);
    detail(report, "s", dd.s);
    detail(report, "d", dd.d);
    detail(report, "ell_p", dd.ell_p);
    detail(report, "region_lo", dd.region_lo);
    detail(report, "region_hi", dd.region_hi);
    let yes = dense_decide(&dd, t)?;
    report.decision = Some(yes);
    if !yes {
        return Err(Stop {
            status: Status::No,
            message: format!("{t} is not a subset sum"),
            partial: None,
        });
    }
    let mut rng = RandomSource::new(report.seed);
    let sol = dense_search(&dd, t, &mut rng)?;
    let verdict = verify_solution(&input.set, &sol);
    let mut v = Verification {
        checked: 1,
        ..Verification::default()
    };
    if verdict.ok {
        v.passed = 1;
    } else {
        v.failures.push(Failure {
            target: t,
            reason: verdict.reason.map_or("rejected".to_string(), |r| r.to_string()),
        });
    }
    report.certificates.push(Certificate::new(None, &sol));
    report.verification = v;
    finish_verification(report)
}

/// Replays a saved report's certificates against an input set.
pub fn verify(report: &mut RunReport, saved_path: &str) -> Result<(), Stop> {
    let input = read_input(&report.args.input)?;
    report.input_size = input.set.len();
    let text = fs::read_to_string(saved_path).map_err(|e| precondition(format!("cannot read {saved_path}: {e}")))?;
    let saved: RunReport =
        serde_json::from_str(&text).map_err(|e| precondition(format!("cannot parse {saved_path}: {e}")))?;
    if saved.schema != SCHEMA {
        return Err(precondition(format!("unsupported report schema {}", saved.schema)));
    }
    let ap: Option<ArithProgression> = saved.ap.map(Into::into);
    let mut v = Verification::default();
    for c in &saved.certificates {
        v.checked += 1;
        let verdict = verify_solution(&input.set, &c.solution(saved.fold_budget));
        let on_ap = match (c.index, ap) {
            (Some(j), Some(p)) => p.index_of(c.target) == Some(j),
            (Some(_), None) => false,
            (None, _) => Some(c.target) == saved.args.target,
        };
        if !verdict.ok {
            let reason = verdict.reason.map_or("rejected".to_string(), |r| r.to_string());
            v.failures.push(Failure { target: c.target, reason });
        } else if !on_ap {
            v.failures.push(Failure {
                target: c.target,
                reason: "target does not match the reported progression".to_string(),
            });
        } else {
            v.passed += 1;
        }
    }
    if let Some(x) = &saved.x {
        v.checked += 1;
        let target = saved.args.target.unwrap_or(0);
        let inside = x.iter().all(|&(a, _)| input.set.contains(a));
        let total: i128 = x.iter().map(|&(a, c)| a as i128 * c as i128).sum();
        if inside && total == target {
            v.passed += 1;
        } else {
            v.failures.push(Failure {
                target,
                reason: format!("multipliers sum to {total}"),
            });
        }
    }
    report.verification = v;
    finish_verification(report)
}
