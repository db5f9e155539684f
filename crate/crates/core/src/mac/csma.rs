use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calendar::Window;
use crate::phy::CcaResult;
use crate::time::Micros;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsmaParams {
    pub min_be: u32,
    pub max_be: u32,
    pub max_csma_backoffs: u32,
    pub max_frame_retries: u32,
    pub backoff_period_symbols: u32,
}

impl Default for CsmaParams {
    fn default() -> Self {
        CsmaParams { min_be: 3, max_be: 5, max_csma_backoffs: 4, max_frame_retries: 3, backoff_period_symbols: 20 }
    }
}

impl CsmaParams {
    pub fn validate(&self) -> crate::Result<()> {
        if self.min_be > self.max_be {
            return Err(crate::Error::InvalidMacConfig(format!(
                "min_be {} > max_be {}",
                self.min_be, self.max_be
            )));
        }
        if self.max_be > 16 || self.backoff_period_symbols == 0 {
            return Err(crate::Error::InvalidMacConfig(
                "max_be must be <= 16 and backoff_period_symbols positive".into(),
            ));
        }
        Ok(())
    }
}

/// Slotted CSMA-CA counters for one channel access attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsmaState {
    /// Number of busy CCAs so far (NB).
    pub nb: u32,
    /// Current backoff exponent (BE).
    pub be: u32,
}

impl CsmaState {
    pub fn new(params: &CsmaParams) -> Self {
        CsmaState { nb: 0, be: params.min_be }
    }

    /// Random backoff in `[0, 2^BE - 1]` backoff periods.
    pub fn draw_backoff<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.random_range(0..(1u32 << self.be))
    }

    /// Registers a busy CCA. Returns `false` once the backoff budget is spent.
    pub fn on_busy(&mut self, params: &CsmaParams) -> bool {
        self.nb += 1;
        self.be = (self.be + 1).min(params.max_be);
        self.nb <= params.max_csma_backoffs
    }
}

/// First backoff boundary at or after `t`; boundaries are aligned to `origin`.
pub fn align_to_backoff(t: Micros, origin: Micros, period: Micros) -> Micros {
    if t <= origin {
        return origin;
    }
    let p = period.as_micros();
    let since = (t - origin).as_micros();
    origin + Micros(since.div_ceil(p) * p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapOutcome {
    /// CCA reported clear and the frame goes on air at this time.
    Sent(Micros),
    ChannelAccessFailure,
    /// The exchange would not finish before the CAP ends.
    Deferred,
}

/// Runs one slotted CSMA-CA attempt inside `window`, sampling the channel
/// through `cca`. `exchange` is the time the frame needs on air plus the ACK
/// turnaround and the ACK itself.
///
/// Each CCA occupies one backoff period, so a busy sample restarts the
/// backoff from the following boundary.
pub fn cap_attempt<R, F>(
    now: Micros,
    window: Window,
    exchange: Micros,
    params: &CsmaParams,
    backoff_period: Micros,
    rng: &mut R,
    mut cca: F,
) -> CapOutcome
where
    R: Rng + ?Sized,
    F: FnMut(Micros) -> CcaResult,
{
    let mut state = CsmaState::new(params);
    let mut from = align_to_backoff(now.max(window.start), window.start, backoff_period);
    loop {
        let at = from + backoff_period * u64::from(state.draw_backoff(rng));
        if at + exchange > window.end {
            return CapOutcome::Deferred;
        }
        match cca(at) {
            CcaResult::Clear => return CapOutcome::Sent(at),
            CcaResult::Busy => {
                if !state.on_busy(params) {
                    return CapOutcome::ChannelAccessFailure;
                }
                from = at + backoff_period;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PERIOD: Micros = Micros(20_480);
    const EXCHANGE: Micros = Micros(61_696 + 12_288 + 25_856);

    fn cap() -> Window {
        Window { start: Micros(491_520), end: Micros(491_520 * 9) }
    }

    #[test]
    fn idle_channel_sends_within_first_window() {
        let params = CsmaParams::default();
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let now = cap().start;
            match cap_attempt(now, cap(), EXCHANGE, &params, PERIOD, &mut rng, |_| CcaResult::Clear) {
                CapOutcome::Sent(at) => assert!(at - now <= PERIOD * 7),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn saturated_channel_fails_after_five_busy_samples() {
        let params = CsmaParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut samples = 0;
        let out = cap_attempt(cap().start, cap(), EXCHANGE, &params, PERIOD, &mut rng, |_| {
            samples += 1;
            CcaResult::Busy
        });
        assert_eq!(out, CapOutcome::ChannelAccessFailure);
        assert_eq!(samples, params.max_csma_backoffs + 1);
    }

    #[test]
    fn exchange_that_overruns_cap_defers() {
        let params = CsmaParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let late = cap().end - Micros(50_000);
        let out = cap_attempt(late, cap(), EXCHANGE, &params, PERIOD, &mut rng, |_| CcaResult::Clear);
        assert_eq!(out, CapOutcome::Deferred);
    }

    #[test]
    fn backoff_exponent_grows_to_max() {
        let params = CsmaParams::default();
        let mut s = CsmaState::new(&params);
        let mut bes = vec![s.be];
        while s.on_busy(&params) {
            bes.push(s.be);
        }
        assert_eq!(bes, vec![3, 4, 5, 5, 5]);
    }

    #[test]
    fn alignment() {
        let o = Micros(1_000);
        assert_eq!(align_to_backoff(Micros(0), o, PERIOD), o);
        assert_eq!(align_to_backoff(o, o, PERIOD), o);
        assert_eq!(align_to_backoff(o + Micros(1), o, PERIOD), o + PERIOD);
        assert_eq!(align_to_backoff(o + PERIOD, o, PERIOD), o + PERIOD);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn backoff_draws_stay_in_range(seed: u64, busy in 0u32..6) {
                let params = CsmaParams::default();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut s = CsmaState::new(&params);
                for _ in 0..busy {
                    if !s.on_busy(&params) { break; }
                }
                prop_assert!(params.min_be <= s.be && s.be <= params.max_be);
                let k = s.draw_backoff(&mut rng);
                prop_assert!(k < (1 << s.be));
            }
        }
    }
}
