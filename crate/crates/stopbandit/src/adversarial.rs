//! Oblivious adversaries against which every learner loses a constant per
//! round while the best fixed threshold in hindsight does not.

use serde::{Deserialize, Serialize};
use stopbandit_core::doubling::{run_doubling, Constants, DoublingConfig};
use stopbandit_core::environments::{AdversarialPandora, AdversarialProphet, Code, Environment};
use stopbandit_core::pandora_learner::PandoraFixedOrder;
use stopbandit_core::prophet_learner::ProphetTwo;
use stopbandit_core::rng_stream;

use crate::HarnessError;

const CODE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialOutcome {
    pub horizon: u64,
    pub bias: f64,
    pub hindsight_threshold: f64,
    pub hindsight_mean: f64,
    pub learner_mean: f64,
}

fn mean_over<E: Environment>(env: &mut E, mut round: impl FnMut(&mut E) -> stopbandit_core::Result<f64>) -> Result<f64, HarnessError> {
    let t = env.horizon();
    let mut sum = 0.0;
    for _ in 0..t {
        sum += round(env)?;
    }
    Ok(sum / t as f64)
}

/// Two-variable prophet game against a random code of length `horizon`.
pub fn prophet_demo(horizon: u64, bias: f64, seed: u64, consts: Constants) -> Result<AdversarialOutcome, HarnessError> {
    let code = Code::random(horizon as usize, &mut rng_stream(seed, CODE_STREAM));
    let mut hind = AdversarialProphet::with_code(code.clone(), bias);
    let hindsight_threshold = hind.hindsight_threshold();
    let hindsight_mean = mean_over(&mut hind, |e| e.play_hindsight())?;
    let mut env = AdversarialProphet::with_code(code, bias);
    let mut learner = ProphetTwo::new(consts);
    let mut total = 0.0;
    let mut counting = Counting { inner: &mut env, total: &mut total };
    run_doubling(&DoublingConfig::default(), &mut counting, &mut learner)?;
    Ok(AdversarialOutcome { horizon, bias, hindsight_threshold, hindsight_mean, learner_mean: total / horizon as f64 })
}

/// Two-box Pandora game; the learner keeps the fixed order.
pub fn pandora_demo(horizon: u64, bias: f64, seed: u64, consts: Constants) -> Result<AdversarialOutcome, HarnessError> {
    let code = Code::random(horizon as usize, &mut rng_stream(seed, CODE_STREAM));
    let mut hind = AdversarialPandora::with_code(code.clone(), bias);
    let hindsight_threshold = hind.hindsight_threshold();
    let hindsight_mean = mean_over(&mut hind, |e| e.play_hindsight())?;
    let mut env = AdversarialPandora::with_code(code, bias);
    let mut learner = PandoraFixedOrder::new(AdversarialPandora::COSTS, consts);
    let mut total = 0.0;
    let mut counting = Counting { inner: &mut env, total: &mut total };
    run_doubling(&DoublingConfig::default(), &mut counting, &mut learner)?;
    Ok(AdversarialOutcome { horizon, bias, hindsight_threshold, hindsight_mean, learner_mean: total / horizon as f64 })
}

// Sums realized rewards.
struct Counting<'a, E> {
    inner: &'a mut E,
    total: &'a mut f64,
}

impl<E: Environment> Environment for Counting<'_, E> {
    type Action = E::Action;
    fn horizon(&self) -> u64 {
        self.inner.horizon()
    }
    fn played(&self) -> u64 {
        self.inner.played()
    }
    fn budget(&self) -> u64 {
        self.inner.budget()
    }
    fn play(&mut self, action: &E::Action) -> stopbandit_core::Result<f64> {
        let r = self.inner.play(action)?;
        *self.total += r;
        Ok(r)
    }
}
