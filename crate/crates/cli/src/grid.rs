use std::str::FromStr;

/// Uniform grid given as `start:stop:step`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridArg {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridArg {
    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step).round() as usize + 1
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for GridArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(format!("expected start:stop:step, got {s:?}"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if ![start, stop, step].iter().all(|x| x.is_finite()) {
            return Err("grid bounds must be finite".into());
        }
        if step <= 0.0 {
            return Err("grid step must be positive".into());
        }
        if stop < start {
            return Err("grid stop lies below start".into());
        }
        if (stop - start) / step > 1e8 {
            return Err("grid has more than 1e8 points".into());
        }
        Ok(GridArg { start, stop, step })
    }
}
