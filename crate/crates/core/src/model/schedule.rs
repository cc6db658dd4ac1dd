/// Learning-rate halving on a stalled development cost.
///
/// A validation that does not improve on the best cost seen so far counts
/// against `patience`; when `patience` such validations accumulate in a row
/// the rate is halved and the count starts over. Any improvement also resets
/// the count.
#[derive(Clone, Debug, PartialEq)]
pub struct LrSchedule {
    lr: f64,
    patience: usize,
    best: Option<f64>,
    stalled: usize,
    halvings: usize,
}

impl LrSchedule {
    pub fn new(lr: f64, patience: usize) -> Self {
        LrSchedule {
            lr,
            patience: patience.max(1),
            best: None,
            stalled: 0,
            halvings: 0,
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn best(&self) -> Option<f64> {
        self.best
    }

    pub fn halvings(&self) -> usize {
        self.halvings
    }

    /// Records one validation cost. Returns true when it triggered a halving.
    pub fn observe(&mut self, dev_cost: f64) -> bool {
        match self.best {
            Some(best) if dev_cost >= best => {
                self.stalled += 1;
                if self.stalled == self.patience {
                    self.lr /= 2.0;
                    self.halvings += 1;
                    self.stalled = 0;
                    return true;
                }
            }
            _ => {
                self.best = Some(dev_cost);
                self.stalled = 0;
            }
        }
        false
    }
}
