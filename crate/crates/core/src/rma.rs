//! Request management: skip request rounds after runs of silent replies.
//!
//! The scheduler counts consecutive unanswered requests `c` and derives the
//! number `q` of rounds to skip before the next request:
//!
//! | phase | condition          | on silence        |
//! |-------|--------------------|-------------------|
//! | CP    | `c < tr1`          | `q = 0`           |
//! | FSP   | `tr1 <= c < tr2`   | `q = max(1, 2q)`  |
//! | LSP   | `c >= tr2`         | `q = q + 1`       |
//!
//! A reply drops the scheduler back exactly one phase: LSP restarts FSP at
//! `c = tr1, q = 1`; FSP and CP restart CP at `c = 0, q = 0`.
//!
//! Skipped rounds are never sent to the sensor; the base station stores
//! closed-loop forecasts for them ([`fill_skips`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::Forecaster;
use crate::protocol::{Source, StoredValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    /// Classical: request every round.
    #[serde(rename = "CP")]
    Classical,
    /// Fast: skips double.
    #[serde(rename = "FSP")]
    Fast,
    /// Linear: skips grow by one.
    #[serde(rename = "LSP")]
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RmaState {
    c: u64,
    q: u64,
    phase: Phase,
    tr1: u64,
    tr2: u64,
}

fn phase_for(c: u64, tr1: u64, tr2: u64) -> Phase {
    if c < tr1 {
        Phase::Classical
    } else if c < tr2 {
        Phase::Fast
    } else {
        Phase::Linear
    }
}

impl RmaState {
    pub fn new(tr1: u64, tr2: u64) -> Result<Self> {
        Self::with_counters(tr1, tr2, 0, 0)
    }

    /// A state at arbitrary counters; the phase is derived from `c`.
    pub fn with_counters(tr1: u64, tr2: u64, c: u64, q: u64) -> Result<Self> {
        if tr1 == 0 {
            return Err(Error::config("tr1", "must be >= 1"));
        }
        if tr1 >= tr2 {
            return Err(Error::config("tr1", format!("must be < tr2 ({tr1} >= {tr2})")));
        }
        let phase = phase_for(c, tr1, tr2);
        if phase == Phase::Classical && q != 0 {
            return Err(Error::config("q", "must be 0 in the classical phase"));
        }
        Ok(Self {
            c,
            q,
            phase,
            tr1,
            tr2,
        })
    }

    pub fn c(&self) -> u64 {
        self.c
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn thresholds(&self) -> (u64, u64) {
        (self.tr1, self.tr2)
    }

    #[must_use]
    pub fn update(self, replied: bool) -> Self {
        let (c, q) = if replied {
            match self.phase {
                Phase::Linear => (self.tr1, 1),
                Phase::Fast | Phase::Classical => (0, 0),
            }
        } else {
            let c = self.c.saturating_add(1);
            let q = match phase_for(c, self.tr1, self.tr2) {
                Phase::Classical => 0,
                Phase::Fast => self.q.saturating_mul(2).max(1),
                Phase::Linear => self.q.saturating_add(1),
            };
            (c, q)
        };
        Self {
            c,
            q,
            phase: phase_for(c, self.tr1, self.tr2),
            ..self
        }
    }
}

pub fn rma_update(state: RmaState, replied: bool) -> RmaState {
    state.update(replied)
}

/// Contacted round indices (1-based) within `horizon` rounds, consuming one
/// outcome per contact (`true` = the sensor replied). Contacts beyond the end
/// of `outcomes` are treated as silent.
pub fn rma_schedule(tr1: u64, tr2: u64, horizon: usize, outcomes: &[bool]) -> Result<Vec<usize>> {
    let mut state = RmaState::new(tr1, tr2)?;
    let mut contacts = Vec::new();
    let mut round = 1usize;
    let mut outcomes = outcomes.iter().copied();
    while round <= horizon {
        contacts.push(round);
        state = state.update(outcomes.next().unwrap_or(false));
        round = round
            .saturating_add(1)
            .saturating_add(usize::try_from(state.q()).unwrap_or(usize::MAX));
    }
    Ok(contacts)
}

/// Closed-loop forecasts for `count` skipped rounds starting at `from_t`.
/// Each fill is appended to a working copy of `history` before the next one
/// is predicted.
pub fn fill_skips<F: Forecaster + ?Sized>(
    history: &[f64],
    model: &F,
    from_t: usize,
    count: usize,
) -> Result<Vec<StoredValue>> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let mut work = history.to_vec();
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let value_s = model.predict(&work)?;
        work.push(value_s);
        out.push(StoredValue {
            t: from_t + k,
            value_s,
            source: Source::SkippedFill,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::ForecastModel;
    use proptest::prelude::*;

    const ALL_SILENT_CONTACTS: [usize; 16] = [1, 2, 3, 5, 8, 13, 22, 32, 43, 55, 68, 82, 97, 113, 130, 148];

    #[test]
    fn first_skip_enters_fast_phase() {
        let s = RmaState::with_counters(3, 7, 2, 0).unwrap().update(false);
        assert_eq!((s.c(), s.q(), s.phase()), (3, 1, Phase::Fast));
    }

    #[test]
    fn linear_takes_over_at_tr2() {
        let s = RmaState::with_counters(3, 7, 6, 4).unwrap().update(false);
        assert_eq!((s.c(), s.q(), s.phase()), (7, 5, Phase::Linear));
    }

    #[test]
    fn reply_steps_back_one_phase() {
        let s = RmaState::with_counters(3, 7, 9, 7).unwrap().update(true);
        assert_eq!((s.c(), s.q(), s.phase()), (3, 1, Phase::Fast));
        let s = s.update(true);
        assert_eq!((s.c(), s.q(), s.phase()), (0, 0, Phase::Classical));
        let s = s.update(true);
        assert_eq!((s.c(), s.q(), s.phase()), (0, 0, Phase::Classical));
    }

    #[test]
    fn invalid_thresholds() {
        assert!(RmaState::new(7, 3).is_err());
        assert!(RmaState::new(3, 3).is_err());
        assert!(RmaState::new(0, 3).is_err());
        assert!(RmaState::with_counters(3, 7, 1, 2).is_err());
    }

    #[test]
    fn all_silent_schedule() {
        let contacts = rma_schedule(3, 7, 150, &[]).unwrap();
        assert_eq!(contacts, ALL_SILENT_CONTACTS);
        assert_eq!(150 - contacts.len(), 134);
    }

    #[test]
    fn huge_tr1_is_classical() {
        let contacts = rma_schedule(1_000_000_000, 1_000_000_001, 150, &[]).unwrap();
        assert_eq!(contacts, (1..=150).collect::<Vec<_>>());
    }

    #[test]
    fn alternating_outcomes_never_skip() {
        let outcomes: Vec<bool> = (0..200).map(|i| i % 2 == 0).collect();
        let contacts = rma_schedule(3, 7, 100, &outcomes).unwrap();
        assert_eq!(contacts, (1..=100).collect::<Vec<_>>());
    }

    #[test]
    fn single_round() {
        assert_eq!(rma_schedule(3, 7, 1, &[]).unwrap(), vec![1]);
        assert!(rma_schedule(3, 7, 0, &[]).unwrap().is_empty());
    }

    #[test]
    fn fills() {
        let m = ForecastModel::persistence();
        assert!(fill_skips(&[1.0], &m, 5, 0).unwrap().is_empty());
        let out = fill_skips(&[3.0, 20.0], &m, 5, 3).unwrap();
        assert_eq!(out.iter().map(|s| s.value_s).collect::<Vec<_>>(), vec![20.0; 3]);
        assert_eq!(out.iter().map(|s| s.t).collect::<Vec<_>>(), vec![5, 6, 7]);
        assert!(matches!(fill_skips(&[], &m, 1, 2), Err(Error::EmptyHistory)));
    }

    #[test]
    fn seasonal_fill_is_next_cycle() {
        let m = ForecastModel::seasonal_naive(4).unwrap();
        let history = [5.0, 6.0, 7.0, 8.0, 5.0, 6.0, 7.0, 8.0];
        let out = fill_skips(&history, &m, 9, 4).unwrap();
        assert_eq!(out.iter().map(|s| s.value_s).collect::<Vec<_>>(), vec![5.0, 6.0, 7.0, 8.0]);
    }

    proptest! {
        #[test]
        fn phase_always_matches_counter(
            tr1 in 1u64..10,
            gap in 1u64..10,
            outcomes in prop::collection::vec(any::<bool>(), 0..200),
        ) {
            let tr2 = tr1 + gap;
            let mut s = RmaState::new(tr1, tr2).unwrap();
            for replied in outcomes {
                s = rma_update(s, replied);
                prop_assert_eq!(s.phase(), phase_for(s.c(), tr1, tr2));
                if s.phase() == Phase::Classical {
                    prop_assert_eq!(s.q(), 0);
                }
            }
        }

        #[test]
        fn silent_gaps_never_shrink(tr1 in 1u64..10, gap in 1u64..10, horizon in 1usize..2000) {
            let contacts = rma_schedule(tr1, tr1 + gap, horizon, &[]).unwrap();
            let gaps: Vec<usize> = contacts.windows(2).map(|w| w[1] - w[0]).collect();
            prop_assert!(gaps.windows(2).all(|g| g[0] <= g[1]));
        }

        // A reply in the fast phase makes the next two contacts consecutive.
        #[test]
        fn fast_phase_reply_recovers_to_classical(tr1 in 2u64..6, gap in 2u64..6, extra in 0u64..5) {
            let tr2 = tr1 + gap;
            let silent_before = (tr1 + extra).min(tr2 - 1) as usize;
            let mut outcomes = vec![false; silent_before];
            outcomes.push(true);
            let contacts = rma_schedule(tr1, tr2, 500, &outcomes).unwrap();
            let k = silent_before;
            prop_assert_eq!(contacts[k + 1], contacts[k] + 1);
            prop_assert_eq!(contacts[k + 2], contacts[k + 1] + 1);
        }
    }
}
