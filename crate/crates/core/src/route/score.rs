use serde::{Deserialize, Serialize};

use super::{Landmark, Orientation, Progress};

/// One extracted step where any component may be missing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateStep {
    #[serde(default)]
    pub progress: Option<Progress>,
    #[serde(default)]
    pub landmark: Option<Landmark>,
    #[serde(default)]
    pub orientation: Option<Orientation>,
}

impl CandidateStep {
    pub fn complete(landmark: Landmark, orientation: Orientation) -> Self {
        Self {
            progress: Some(Progress::Straight),
            landmark: Some(landmark),
            orientation: Some(orientation),
        }
    }

    pub fn present(&self) -> usize {
        usize::from(self.progress.is_some())
            + usize::from(self.landmark.is_some())
            + usize::from(self.orientation.is_some())
    }

    pub fn is_complete(&self) -> bool {
        self.present() == 3
    }

    pub fn is_empty(&self) -> bool {
        self.present() == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteCandidate {
    pub steps: Vec<CandidateStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteScore {
    pub avg_score: f64,
    pub avg_progress: f64,
}

/// Scores a candidate against a reference route of `reference_n` steps.
///
/// `avg_score` is the fraction of the 3N expected components present (extra
/// components beyond 3N are not rewarded). `avg_progress` is the fraction of
/// landmarks preceding the first step with a missing component.
pub fn score_route(candidate: &RouteCandidate, reference_n: usize) -> RouteScore {
    assert!(reference_n >= 1, "reference route needs at least one step");
    let expected = 3 * reference_n;
    let present: usize = candidate.steps.iter().map(CandidateStep::present).sum();
    let avg_score = present.min(expected) as f64 / expected as f64;

    let first_defect = (0..reference_n).find(|&i| {
        candidate
            .steps
            .get(i)
            .is_none_or(|s| !s.is_complete())
    });
    let avg_progress = match first_defect {
        Some(i) => i as f64 / reference_n as f64,
        None => 1.0,
    };
    RouteScore {
        avg_score,
        avg_progress,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn complete(n: usize) -> RouteCandidate {
        RouteCandidate {
            steps: (0..n)
                .map(|i| {
                    let o = if i + 1 == n { Orientation::Stop } else { Orientation::Left };
                    CandidateStep::complete(Landmark::new(&format!("lm{i}")).unwrap(), o)
                })
                .collect(),
        }
    }

    #[test]
    fn complete_route_scores_one() {
        let s = score_route(&complete(3), 3);
        assert_eq!(s.avg_score, 1.0);
        assert_eq!(s.avg_progress, 1.0);
    }

    #[test]
    fn missing_second_orientation() {
        let mut c = complete(3);
        c.steps[1].orientation = None;
        let s = score_route(&c, 3);
        assert_eq!(s.avg_score, 8.0 / 9.0);
        assert_eq!(s.avg_progress, 1.0 / 3.0);
    }

    #[test]
    fn short_and_overlong_candidates() {
        let s = score_route(&complete(2), 3);
        assert_eq!(s.avg_score, 6.0 / 9.0);
        assert_eq!(s.avg_progress, 2.0 / 3.0);
        let s = score_route(&complete(5), 3);
        assert_eq!(s.avg_score, 1.0);
        assert_eq!(s.avg_progress, 1.0);
        let s = score_route(&RouteCandidate::default(), 2);
        assert_eq!((s.avg_score, s.avg_progress), (0.0, 0.0));
    }

    fn arb_candidate() -> impl Strategy<Value = (RouteCandidate, usize)> {
        (1usize..6).prop_flat_map(|n| {
            let step = (any::<bool>(), any::<bool>(), any::<bool>()).prop_map(|(p, l, o)| CandidateStep {
                progress: p.then_some(Progress::Straight),
                landmark: l.then(|| Landmark::new("x").unwrap()),
                orientation: o.then_some(Orientation::Left),
            });
            (prop::collection::vec(step, 0..8).prop_map(|steps| RouteCandidate { steps }), Just(n))
        })
    }

    proptest! {
        #[test]
        fn removing_a_component_never_helps((cand, n) in arb_candidate(), which in 0usize..24) {
            let before = score_route(&cand, n);
            prop_assert!((0.0..=1.0).contains(&before.avg_score));
            prop_assert!((0.0..=1.0).contains(&before.avg_progress));
            let mut reduced = cand.clone();
            if !reduced.steps.is_empty() {
                let i = which % reduced.steps.len();
                let step = &mut reduced.steps[i];
                match which % 3 {
                    0 => step.progress = None,
                    1 => step.landmark = None,
                    _ => step.orientation = None,
                }
            }
            let after = score_route(&reduced, n);
            prop_assert!(after.avg_score <= before.avg_score);
            prop_assert!(after.avg_progress <= before.avg_progress);
        }

        #[test]
        fn full_progress_iff_nothing_missing((cand, n) in arb_candidate()) {
            let s = score_route(&cand, n);
            let nothing_missing = (0..n).all(|i| cand.steps.get(i).is_some_and(CandidateStep::is_complete));
            prop_assert_eq!(s.avg_progress == 1.0, nothing_missing);
        }
    }
}
