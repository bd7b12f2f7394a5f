mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;

use num_traits::Zero;
use podtmc::checker::{check_skolem_form, eval_point, eval_prob_term, model_check, simulate_runs, Verdict};
use podtmc::logic::{CmpOp, Comparison, Ctl, ProbTerm};
use podtmc::markov::{Agent, Model, Rational};
use podtmc::semantics::Semantics;

/// Bounded temporal formulas over `p` and `q` without path quantifiers or
/// agents, with temporal depth at most `depth`.
fn random_path_body(r: &mut impl Rng, size: usize, depth: usize) -> Ctl {
    if size == 0 || r.gen_bool(0.15) {
        return Ctl::prop(PROPS[r.gen_range(0..2)]);
    }
    match r.gen_range(0..5) {
        0 => random_path_body(r, size - 1, depth).not(),
        1 => random_path_body(r, size / 2, depth).and(random_path_body(r, size / 2, depth)),
        2 | 3 if depth > 0 => random_path_body(r, size - 1, depth - 1).next(),
        _ if depth > 0 => {
            let k = r.gen_range(0..=depth);
            let a = random_path_body(r, size / 2, depth - k);
            let b = random_path_body(r, size / 2, depth - k);
            a.until_within(b, k as u32)
        }
        _ => random_path_body(r, size - 1, depth).not(),
    }
}

fn depth_of(phi: &Ctl) -> usize {
    match phi {
        Ctl::True | Ctl::Prop(_) => 0,
        Ctl::Not(a) => depth_of(a),
        Ctl::And(a, b) => depth_of(a).max(depth_of(b)),
        Ctl::Next(a) => 1 + depth_of(a),
        Ctl::BoundedUntil(a, b, k) => *k as usize + depth_of(a).max(depth_of(b)),
        other => panic!("oracle does not cover {other}"),
    }
}

/// Truth of a quantifier-free formula on a fixed path at position `m`.
fn on_path(model: &Model, phi: &Ctl, path: &[usize], m: usize) -> bool {
    match phi {
        Ctl::True => true,
        Ctl::Prop(p) => model.holds(path[m], p),
        Ctl::Not(a) => !on_path(model, a, path, m),
        Ctl::And(a, b) => on_path(model, a, path, m) && on_path(model, b, path, m),
        Ctl::Next(a) => on_path(model, a, path, m + 1),
        Ctl::BoundedUntil(a, b, k) => (0..=*k as usize).any(|j| {
            on_path(model, b, path, m + j) && (0..j).all(|i| on_path(model, a, path, m + i))
        }),
        other => panic!("oracle does not cover {other}"),
    }
}

/// `Pr_i(phi)` at the point given by `point`, from cylinder sums over the
/// agent's indistinguishable prefixes.
fn oracle_current(model: &Model, sem: Semantics, agent: &Agent, phi: &Ctl, point: &[usize]) -> Rational {
    let m = point.len() - 1;
    let d = depth_of(phi);
    let obs = |s: usize| model.observation(agent, s).unwrap();
    let same = |path: &[usize]| match sem {
        Semantics::Clock => obs(path[m]) == obs(point[m]),
        Semantics::PerfectRecall => (0..=m).all(|k| obs(path[k]) == obs(point[k])),
    };
    let mut class = Rational::zero();
    let mut good = Rational::zero();
    for (path, p) in all_paths(model, m + d) {
        if same(&path) {
            if on_path(model, phi, &path, m) {
                good += &p;
            }
            class += p;
        }
    }
    good / class
}

fn oracle_prior(model: &Model, agent: &Agent, phi: &Ctl, first: usize) -> Rational {
    let d = depth_of(phi);
    let obs = |s: usize| model.observation(agent, s).unwrap();
    let mut class = Rational::zero();
    let mut good = Rational::zero();
    for (path, p) in all_paths(model, d) {
        if obs(path[0]) == obs(first) {
            if on_path(model, phi, &path, 0) {
                good += &p;
            }
            class += p;
        }
    }
    good / class
}

fn any_agent(r: &mut impl Rng, model: &Model) -> Agent {
    let agents = agents_of(model);
    agents[r.gen_range(0..agents.len())].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probabilities_are_exact_cylinder_sums(seed in any::<u64>(), m in 0usize..=3) {
        let mut r = rng(seed);
        let model = random_model(&mut r, ModelShape { agents: 2, ..ModelShape::SMALL });
        let agent = any_agent(&mut r, &model);
        let body = random_path_body(&mut r, 6, 5usize.saturating_sub(m).min(3));
        let d = depth_of(&body);
        let paths = all_paths(&model, m);
        let (point, _) = &paths[r.gen_range(0..paths.len())];
        for sem in [Semantics::Clock, Semantics::PerfectRecall] {
            let term = ProbTerm::Current(agent.clone(), Box::new(body.clone()));
            let v = eval_prob_term(&model, sem, &term, &prefix(point), m + d).unwrap();
            prop_assert_eq!(&v, &oracle_current(&model, sem, &agent, &body, point), "{} {}", term, sem);
            let prior = ProbTerm::Prior(agent.clone(), Box::new(body.clone()));
            let v = eval_prob_term(&model, sem, &prior, &prefix(point), m.max(d)).unwrap();
            prop_assert_eq!(&v, &oracle_prior(&model, &agent, &body, point[0]), "{}", prior);
        }
    }

    #[test]
    fn negation_flips_state_formulas(seed in any::<u64>(), m in 0usize..=3) {
        let mut r = rng(seed);
        let model = random_model(&mut r, ModelShape { agents: 2, ..ModelShape::SMALL });
        let shape = CtlShape { agents: agents_of(&model), depth: 2, size: 6, prior: true, unbounded: false };
        let inner = random_ctl(&mut r, &shape);
        let agent = any_agent(&mut r, &model);
        let state_formulas = [
            inner.clone().all(),
            Ctl::know(agent.clone(), inner.clone()),
            Ctl::Compare(Comparison::single(ProbTerm::Current(agent, Box::new(inner.clone())), random_op(&mut r), random_constant(&mut r))),
        ];
        let paths = all_paths(&model, m);
        let (point, _) = &paths[r.gen_range(0..paths.len())];
        for sem in [Semantics::Clock, Semantics::PerfectRecall] {
            for phi in &state_formulas {
                let h = m + 2;
                let yes = eval_point(&model, sem, phi, &prefix(point), h).unwrap();
                let no = eval_point(&model, sem, &phi.clone().not(), &prefix(point), h).unwrap();
                prop_assert_eq!(yes, !no, "{}", phi);
            }
            let e = eval_point(&model, sem, &inner.clone().exists(), &prefix(point), m + 2).unwrap();
            let a = eval_point(&model, sem, &inner.clone().not().all(), &prefix(point), m + 2).unwrap();
            prop_assert_eq!(e, !a);
        }
    }

    #[test]
    fn witnesses_survive_larger_bounds(seed in any::<u64>(), bound in 0u64..=12) {
        let mut r = rng(seed);
        let model = random_model(&mut r, ModelShape::SMALL);
        let c = model.marginal("p", r.gen_range(0..=bound as usize));
        for op in [CmpOp::Eq, CmpOp::Gt, CmpOp::Le] {
            let v = check_skolem_form(&model, "p", op, &c, bound).unwrap();
            if let Verdict::Witness(_) = v {
                for more in [bound + 1, bound + 5, 2 * bound + 20] {
                    prop_assert_eq!(&check_skolem_form(&model, "p", op, &c, more).unwrap(), &v);
                }
            }
        }
    }

    #[test]
    fn blind_eventually_matches_the_marginal_search(seed in any::<u64>(), bound in 0u32..=5) {
        let mut r = rng(seed);
        let model = random_model(&mut r, ModelShape::SMALL);
        let c = random_constant(&mut r);
        prop_assume!(!c.is_zero());
        let op = random_op(&mut r);
        for agent in [Agent::Bottom, Agent::named("i")] {
            if agent != Agent::Bottom && model.observation_symbols(&agent).unwrap().len() != 1 {
                continue;
            }
            let sure = Ctl::Compare(Comparison::single(ProbTerm::Current(agent, Box::new(Ctl::prop("p"))), op, c.clone()));
            let phi = sure.eventually_within(bound).all();
            for sem in [Semantics::Clock, Semantics::PerfectRecall] {
                let checked = model_check(&model, sem, &phi, None).unwrap().verdict;
                let searched = check_skolem_form(&model, "p", op, &c, bound as u64).unwrap();
                prop_assert_eq!(checked == Verdict::Holds, matches!(searched, Verdict::Witness(_)), "{}", phi);
            }
        }
    }
}

#[test]
fn simulated_frequencies_stay_within_four_sigma() {
    for seed in 0..5u64 {
        let model = random_model(&mut rng(seed), ModelShape::SMALL);
        let n = 20_000;
        let table = simulate_runs(&model, 6, n, seed);
        for t in [1, 3, 6] {
            let d = model.distribution_at(t);
            for s in 0..model.num_states() {
                let p = to_f64(d.get(s));
                let sigma = (p * (1.0 - p) / n as f64).sqrt();
                let f = table.frequency(t, s);
                assert!((f - p).abs() <= 4.0 * sigma + 1e-12, "seed {seed} t {t} s {s}: {f} vs {p}");
            }
        }
    }
}

fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap()
}
