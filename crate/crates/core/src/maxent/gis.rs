use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{CondMaxEntModel, MaxEntError, Observation};
use crate::scheme::Field;
use crate::token::UNK;

/// Contexts per work unit. Fixed so that reductions do not depend on the
/// number of worker threads.
const CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GisOptions {
    pub max_iters: usize,
    /// Stop once `max_i |E_model[f_i] - E_emp[f_i]| <= tol`.
    pub tol: f64,
}

impl Default for GisOptions {
    fn default() -> Self {
        GisOptions {
            max_iters: 200,
            tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GisReport {
    /// Scaling iterations actually applied.
    pub iterations: usize,
    pub converged: bool,
    /// Training conditional log-likelihood before each update and at the end.
    pub log_likelihood: Vec<f64>,
    pub max_violation: f64,
    /// The GIS constant: largest active-feature count over (context, outcome).
    pub correction_constant: usize,
}

struct ContextGroup {
    total: f64,
    /// `(outcome, count)` observed with this context.
    observed: Vec<(usize, f64)>,
    active: Vec<(usize, usize)>,
}

/// Generalized Iterative Scaling on the unfloored log-linear model.
///
/// Every (context, outcome) pair is padded to `C` active features by a slack
/// correction feature whose weight stays at zero, so each update
/// `w_i += ln(E_emp[f_i] / E_model[f_i]) / C` cannot lower the conditional
/// log-likelihood.
pub fn train_gis(
    model: &mut CondMaxEntModel,
    events: &[Observation],
    opts: GisOptions,
) -> Result<GisReport, MaxEntError> {
    if events.is_empty() {
        return Err(MaxEntError::NoEvents);
    }
    let n_events = events.len() as f64;
    let groups = group_events(model, events)?;

    let n_feat = model.features().len();
    let mut empirical = vec![0.0; n_feat];
    for g in &groups {
        for &(y, f) in &g.active {
            if let Some(&(_, c)) = g.observed.iter().find(|(oy, _)| *oy == y) {
                empirical[f] += c;
            }
        }
    }
    for e in &mut empirical {
        *e /= n_events;
    }

    let correction_constant = groups
        .iter()
        .map(|g| {
            let mut per_outcome = vec![0usize; model.outcomes().len()];
            for &(y, _) in &g.active {
                per_outcome[y] += 1;
            }
            per_outcome.into_iter().max().unwrap_or(0)
        })
        .max()
        .unwrap_or(0);

    let mut weights: Vec<f64> = model.weights().collect();
    let mut report = GisReport {
        iterations: 0,
        converged: false,
        log_likelihood: Vec::new(),
        max_violation: 0.0,
        correction_constant,
    };
    let c = correction_constant as f64;
    loop {
        let (expected, ll) = expectations(model, &groups, &weights, n_events);
        report.log_likelihood.push(ll);
        report.max_violation = expected
            .iter()
            .zip(&empirical)
            .map(|(e, emp)| (e - emp).abs())
            .fold(0.0, f64::max);
        if report.max_violation <= opts.tol {
            report.converged = true;
            break;
        }
        if report.iterations == opts.max_iters {
            break;
        }
        for (f, w) in weights.iter_mut().enumerate() {
            *w += (empirical[f] / expected[f]).ln() / c;
            if !w.is_finite() {
                return Err(MaxEntError::NonfiniteWeight {
                    feature: f,
                    iteration: report.iterations,
                });
            }
        }
        report.iterations += 1;
    }
    model.set_weights(&weights);
    Ok(report)
}

fn group_events(
    model: &CondMaxEntModel,
    events: &[Observation],
) -> Result<Vec<ContextGroup>, MaxEntError> {
    let mut by_context: BTreeMap<&[Field], BTreeMap<usize, f64>> = BTreeMap::new();
    for ev in events {
        let y = model
            .outcome_id(&ev.outcome)
            .or_else(|| model.outcome_id(UNK))
            .ok_or_else(|| MaxEntError::UnknownOutcome(ev.outcome.clone()))?;
        *by_context
            .entry(ev.context.as_slice())
            .or_default()
            .entry(y)
            .or_default() += 1.0;
    }
    Ok(by_context
        .into_iter()
        .map(|(ctx, observed)| ContextGroup {
            total: observed.values().sum(),
            observed: observed.into_iter().collect(),
            active: model.active_features(ctx),
        })
        .collect())
}

/// Model feature expectations (normalized by event count) and the training
/// log-likelihood. Summation follows context order regardless of threads.
fn expectations(
    model: &CondMaxEntModel,
    groups: &[ContextGroup],
    weights: &[f64],
    n_events: f64,
) -> (Vec<f64>, f64) {
    let partials: Vec<(Vec<(usize, f64)>, f64)> = groups
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut contrib = Vec::new();
            let mut ll = 0.0;
            for g in chunk {
                let logp = model.log_softmax_with(&g.active, |f| weights[f]);
                for &(y, f) in &g.active {
                    contrib.push((f, g.total * logp[y].exp()));
                }
                for &(y, c) in &g.observed {
                    ll += c * logp[y];
                }
            }
            (contrib, ll)
        })
        .collect();
    let mut expected = vec![0.0; weights.len()];
    let mut ll = 0.0;
    for (contrib, part) in partials {
        for (f, v) in contrib {
            expected[f] += v;
        }
        ll += part;
    }
    for e in &mut expected {
        *e /= n_events;
    }
    (expected, ll)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(w: &str) -> Vec<Field> {
        vec![(w.to_string(), "T".to_string())]
    }

    #[test]
    fn no_events_is_an_error() {
        let mut m = CondMaxEntModel::new(vec![], vec!["a".into()], vec![], 0.0).unwrap();
        assert_eq!(
            train_gis(&mut m, &[], GisOptions::default()),
            Err(MaxEntError::NoEvents)
        );
    }

    #[test]
    fn two_outcome_single_feature_fixed_point() {
        let mut events = vec![Observation::new(ctx("x"), "y1"); 7];
        events.extend(vec![Observation::new(ctx("x"), "y2"); 3]);
        // cutoff 4 keeps only the (x, y1) binding
        let mut m = CondMaxEntModel::from_events(
            vec!["4 <= <?>_<*> <?>".into()],
            vec!["y1".into(), "y2".into()],
            &events,
            0.0,
        )
        .unwrap();
        assert_eq!(m.features().len(), 1);
        let report = train_gis(
            &mut m,
            &events,
            GisOptions {
                max_iters: 1000,
                tol: 1e-12,
            },
        )
        .unwrap();
        assert!(report.converged);
        assert_eq!(report.correction_constant, 1);
        assert!((m.features()[0].weight - (7.0f64 / 3.0).ln()).abs() < 1e-9);
        assert!((m.cond_prob(&ctx("x"), "y1") - 0.7).abs() < 1e-12);
    }

    #[test]
    fn deterministic_outcome_weight_grows_without_bound() {
        let events = vec![Observation::new(ctx("x"), "y1"); 5];
        let mut m = CondMaxEntModel::from_events(
            vec!["1 <= <?>_<*> <?>".into()],
            vec!["y1".into(), "y2".into()],
            &events,
            0.0,
        )
        .unwrap();
        let r = train_gis(
            &mut m,
            &events,
            GisOptions {
                max_iters: 50,
                tol: 0.0,
            },
        )
        .unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 50);
        assert!(m.features()[0].weight > 3.0);
        assert!(m.cond_prob(&ctx("x"), "y1") > 0.97);
        assert!(r.log_likelihood.windows(2).all(|w| w[1] >= w[0] - 1e-10));
    }
}
