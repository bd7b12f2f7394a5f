//! Acceptance run: one line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use podtmc::checker::{
    check_mixed_time, check_skolem_form, eval_prob_term, model_check, prop5_equivalence,
    simulate_runs, Assignment, CtlEvaluator, Verdict, WmloEvaluator,
};
use podtmc::logic::{eliminate_clock, parse_ctl, translate_prop2, CmpOp, Ctl, ProbTerm, ROOT_TIME};
use podtmc::markov::{bilinear_form, rat, Agent, PathPrefix, Rational};
use podtmc::reductions::{
    diophantine_chain, diophantine_to_formula, lrs_eval, lrs_to_bilinear, lrs_to_companion,
    nonemptiness_formula, pfa_to_podtmc, pfa_value, stochastic_embedding, words, IntPolynomial,
    Pfa, P_EXP, P_LIN,
};
use podtmc::semantics::fixtures::knowledge_gap_chain;
use podtmc::semantics::{spr_belief, ObservationSequence, Semantics};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const BOTH: [Semantics; 2] = [Semantics::Clock, Semantics::PerfectRecall];

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Filter correctness against path grouping.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut histories = 0usize;
    for seed in 0..200u64 {
        let shape = ModelShape { max_states: 4, max_obs: 3, agents: 2, max_succ: 4 };
        let model = random_model(&mut rng(1_000 + seed), shape);
        for agent in model.agent_names().map(Agent::named).collect::<Vec<_>>() {
            for t in 0..=5 {
                for (seen, mass) in brute_force_histories(&model, &agent, t) {
                    let h = ObservationSequence::new(agent.clone(), seen).map_err(err)?;
                    let b = spr_belief(&model, &h).map_err(err)?;
                    ensure(b.posterior.weights() == normalize(&mass), || {
                        format!("model seed {seed}, history {h}")
                    })?;
                    histories += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("200 models, {histories} histories, {:.2?}", elapsed))
}

fn point_for(pfa: &Pfa, first: usize, word: &[usize]) -> PathPrefix {
    let na = pfa.alphabet().len();
    let mut q = (0..pfa.states().len()).find(|&q| !pfa.init()[q].is_zero()).unwrap();
    let mut states = vec![q * na + first];
    for &a in word {
        let m = pfa.letter_matrix(a);
        q = (0..pfa.states().len()).find(|&q2| !m[(q, q2)].is_zero()).unwrap();
        states.push(q * na + a);
    }
    PathPrefix::new(states).unwrap()
}

/// Automaton encoding: agent probabilities are word values, and bounded
/// nonemptiness matches word enumeration.
fn criterion_2() -> Outcome {
    let term = ProbTerm::Current(Agent::named("i"), Box::new(Ctl::prop("p")));
    let mut points = 0usize;
    let mut nonempty = 0usize;
    for seed in 0..50u64 {
        let pfa = random_pfa(&mut rng(2_000 + seed));
        let model = pfa_to_podtmc(&pfa);
        ensure(model.validate().is_empty(), || format!("pfa seed {seed}: encoding not stochastic"))?;
        let all = words(pfa.alphabet().len(), 5);
        let mut above = false;
        for w in &all {
            let letters: Vec<&str> = w.iter().map(|&a| pfa.alphabet()[a].as_str()).collect();
            let expected = pfa_value(&pfa, &letters).map_err(err)?;
            above |= expected > *pfa.threshold();
            for first in 0..pfa.alphabet().len() {
                let point = point_for(&pfa, first, w);
                let v = eval_prob_term(&model, Semantics::PerfectRecall, &term, &point, w.len()).map_err(err)?;
                ensure(v == expected, || format!("pfa seed {seed}, word {letters:?}: {v} vs {expected}"))?;
                points += 1;
            }
        }
        let empty_word = sum((0..pfa.states().len()).filter(|&q| pfa.accepting()[q]).map(|q| &pfa.init()[q]));
        above |= empty_word > *pfa.threshold();
        let phi = nonemptiness_formula(&pfa, 5);
        let holds = model_check(&model, Semantics::PerfectRecall, &phi, None).map_err(err)?.verdict == Verdict::Holds;
        ensure(holds == above, || format!("pfa seed {seed}: EF<=5 gives {holds}, words give {above}"))?;
        nonempty += usize::from(holds);
    }
    Ok(format!("50 automata, {points} points, {nonempty} nonempty at bound 5"))
}

/// Chain closed forms and the Diophantine corpus.
fn criterion_3() -> Outcome {
    let chain = diophantine_chain();
    let mut half_t = Rational::one();
    for t in 0..=30usize {
        let lin = &half_t * Rational::from_integer((t as i64).into());
        ensure(chain.marginal(P_EXP, t) == half_t, || format!("Pr(p_exp({t}))"))?;
        ensure(chain.marginal(P_LIN, t) == lin, || format!("Pr(p_lin({t}))"))?;
        half_t *= rat(1, 2);
    }
    let corpus: [(&str, Option<&[u64]>); 4] =
        [("x - 2", Some(&[2])), ("x^2 + 1", None), ("x^2 - y", Some(&[0, 0])), ("2*x - 3", None)];
    let mut shown = Vec::new();
    for (text, expected) in corpus {
        let p = IntPolynomial::parse(text).map_err(err)?;
        let v = check_mixed_time(&chain, &diophantine_to_formula(&p).map_err(err)?, 10).map_err(err)?;
        match (&v, expected) {
            (Verdict::Witness(a), Some(root)) => {
                let point: Vec<u64> = a.0.iter().map(|(_, t)| *t).collect();
                ensure(p.eval(&point).map_err(err)?.is_zero(), || format!("{text}: {a} is not a root"))?;
                ensure(point == root, || format!("{text}: expected {root:?}, got {a}"))?;
            }
            (Verdict::NoWitnessUpTo(10), None) => {}
            _ => return Err(format!("{text}: unexpected {v}")),
        }
        shown.push(format!("{text}: {v}"));
    }
    let roots = [[0u64, 0], [1, 1], [2, 4]];
    let p = IntPolynomial::parse("x^2 - y").map_err(err)?;
    for r in roots {
        ensure(p.eval(&r).map_err(err)?.is_zero(), || format!("x^2 - y at {r:?}"))?;
    }
    Ok(format!("t = 0..30 exact; {}", shown.join("; ")))
}

/// Knowledge against certainty.
fn criterion_4() -> Outcome {
    let agents = vec![Agent::named("i"), Agent::Top, Agent::Bottom];
    let shape = CtlShape { agents, depth: 2, size: 6, prior: true, unbounded: false };
    let mut fr = rng(4_000);
    let formulas: Vec<Ctl> = (0..50).map(|_| random_ctl(&mut fr, &shape)).collect();
    for seed in 0..100u64 {
        let model = random_model(&mut rng(4_100 + seed), ModelShape::SMALL);
        for phi in &formulas {
            for sem in BOTH {
                let ok = prop5_equivalence(&model, sem, phi, 4).map_err(err)?;
                ensure(ok, || format!("model seed {seed}, {phi} under {sem}"))?;
            }
        }
    }
    let gap = knowledge_gap_chain();
    let know = parse_ctl("K[i](F not_q)").map_err(err)?;
    let sure = parse_ctl("Pr[i](F not_q) = 1").map_err(err)?;
    let f = parse_ctl("F not_q").map_err(err)?;
    for sem in BOTH {
        let k = model_check(&gap, sem, &know, None).map_err(err)?.verdict;
        let p = model_check(&gap, sem, &sure, None).map_err(err)?.verdict;
        ensure(k == Verdict::Fails(None) && p == Verdict::Holds, || format!("fixture under {sem}: K {k}, Pr {p}"))?;
        ensure(!prop5_equivalence(&gap, sem, &f, 0).map_err(err)?, || "fixture equivalence held".into())?;
    }
    Ok("100 models x 50 formulas, both semantics; fixture: not K[i](F not_q) while Pr[i](F not_q) = 1".into())
}

fn at(n: u64) -> Assignment {
    Assignment(vec![(ROOT_TIME.to_string(), n)])
}

/// Both translations preserve truth.
fn criterion_5() -> Outcome {
    for seed in 0..100u64 {
        let mut r = rng(5_000 + seed);
        let model = random_model(&mut r, ModelShape { agents: 2, ..ModelShape::SMALL });
        let shape = CtlShape { agents: agents_of(&model), depth: 3, size: 7, prior: true, unbounded: false };
        let phi = random_ctl(&mut r, &shape);
        for sem in BOTH {
            let psi = translate_prop2(&phi, sem, &model);
            let mut ctl = CtlEvaluator::new(&model, sem, 6).map_err(err)?;
            let mut fo = WmloEvaluator::new(&model, sem, 6);
            for n in 0..=3u64 {
                let lhs = ctl.satisfaction(&phi, n as usize).map_err(err)?;
                let rhs = fo.truth(&psi, &at(n)).map_err(err)?;
                ensure(lhs == rhs, || format!("translation, seed {seed}, {phi} at {n} under {sem}"))?;
            }
        }
    }
    for seed in 0..100u64 {
        let mut r = rng(5_500 + seed);
        let model = random_model(&mut r, ModelShape { agents: 2, ..ModelShape::SMALL });
        let shape = CtlShape { agents: agents_of(&model), depth: 2, size: 7, prior: true, unbounded: false };
        let psi = translate_prop2(&random_ctl(&mut r, &shape), Semantics::Clock, &model);
        let flat = eliminate_clock(&psi, &model).map_err(err)?;
        let mut fo = WmloEvaluator::new(&model, Semantics::Clock, 6);
        for n in 0..=4u64 {
            let before = fo.truth(&psi, &at(n)).map_err(err)?;
            let after = fo.truth(&flat, &at(n)).map_err(err)?;
            ensure(before == after, || format!("clock elimination, seed {seed}, {psi} at {n}"))?;
        }
    }
    Ok("100 translation pairs and 100 clock-elimination pairs agree".into())
}

/// Matrix forms of recurrences and the stochastic embedding.
fn criterion_6() -> Outcome {
    for seed in 0..100u64 {
        let lrs = random_lrs(&mut rng(6_000 + seed));
        let a = lrs_to_companion(&lrs);
        let (v, b, w) = lrs_to_bilinear(&lrs);
        let last = a.cols() - 1;
        let mut power = a.clone();
        for n in 1..=20u64 {
            let u = lrs_eval(&lrs, n as usize);
            ensure(power[(0, last)] == u, || format!("companion, {lrs}, n = {n}"))?;
            ensure(bilinear_form(&v, &b, n, &w).map_err(err)? == u, || format!("bilinear, {lrs}, n = {n}"))?;
            power = naive_mul(&power, &a);
        }
    }
    for seed in 0..100u64 {
        let a = random_int_matrix(&mut rng(6_500 + seed));
        let e = stochastic_embedding(&a).map_err(err)?;
        ensure(e.b.is_stochastic(), || format!("embedding of seed {seed} is not stochastic"))?;
        let k = a.rows();
        let mut power = a.clone();
        for n in 1..=25u64 {
            let entry = &power[(0, k - 1)];
            let value = e.value(n).map_err(err)?;
            ensure(entry.is_zero() == (value == e.c), || format!("= direction, seed {seed}, n = {n}"))?;
            ensure((*entry > Rational::zero()) == (value > e.c), || format!("> direction, seed {seed}, n = {n}"))?;
            power = naive_mul(&power, &a);
        }
    }
    Ok("100 recurrences (n = 1..20), 100 matrices (n = 1..25)".into())
}

/// Zero-threshold questions are decided.
fn criterion_7() -> Outcome {
    let ops = [CmpOp::Eq, CmpOp::Gt, CmpOp::Ge, CmpOp::Le, CmpOp::Lt];
    let mut counts = [0usize; 2];
    for seed in 0..100u64 {
        let mut r = rng(7_000 + seed);
        let model = random_model(&mut r, ModelShape { max_succ: 4, ..ModelShape::SMALL });
        let p = PROPS[r.gen_range(0..2)];
        let marginals: Vec<Rational> = (0..=64).map(|t| model.marginal(p, t)).collect();
        for op in ops {
            let v = check_skolem_form(&model, p, op, &Rational::zero(), 3).map_err(err)?;
            let exists = marginals.iter().any(|m| op.holds(m, &Rational::zero()));
            match v {
                Verdict::Holds if exists => counts[0] += 1,
                Verdict::Fails(_) if !exists => counts[1] += 1,
                other => return Err(format!("seed {seed}, Pr({p}) {} 0: {other}, transient says {exists}", op.symbol())),
            }
        }
    }
    Ok(format!("100 models x 5 comparisons: {} holds, {} fails, none undecided", counts[0], counts[1]))
}

/// Sampling agrees with exact marginals.
fn criterion_8() -> Outcome {
    let n = 100_000;
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let model = random_model(&mut rng(8_000 + seed), ModelShape::SMALL);
        let table = simulate_runs(&model, 6, n, seed);
        for t in [1, 3, 6] {
            let d = model.distribution_at(t);
            for s in 0..model.num_states() {
                let p = d.get(s).to_f64().unwrap();
                let f = table.frequency(t, s);
                let sigma = (p * (1.0 - p) / n as f64).sqrt();
                if sigma == 0.0 {
                    ensure(f == p, || format!("seed {seed}, t {t}, state {s}: {f} vs {p}"))?;
                } else {
                    let z = (f - p).abs() / sigma;
                    worst = worst.max(z);
                    ensure(z <= 4.0, || format!("seed {seed}, t {t}, state {s}: {z:.2} sigma"))?;
                }
            }
        }
    }
    Ok(format!("10 models, largest deviation {worst:.2} sigma"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("filter correctness", criterion_1),
        ("automaton correspondence", criterion_2),
        ("chain closed forms and Diophantine corpus", criterion_3),
        ("knowledge versus certainty", criterion_4),
        ("translation equivalence", criterion_5),
        ("recurrence forms and embedding", criterion_6),
        ("zero-threshold decisions", criterion_7),
        ("Monte Carlo agreement", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.2}s] {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.2}s] {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
