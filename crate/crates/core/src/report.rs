//! JSON report envelope shared by the verification checks.

use serde::Serialize;
use serde_json::Value;

/// One check outcome: inputs, outputs, margins, verdict.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub params: Value,
    pub inputs: Value,
    pub outputs: Value,
    pub margins: Value,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(check: &str) -> Self {
        CheckReport {
            check: check.to_string(),
            params: Value::Null,
            inputs: Value::Null,
            outputs: Value::Null,
            margins: Value::Null,
            pass: false,
        }
    }

    pub fn params<T: Serialize>(mut self, v: &T) -> Self {
        self.params = serde_json::to_value(v).unwrap_or(Value::Null);
        self
    }

    pub fn inputs<T: Serialize>(mut self, v: &T) -> Self {
        self.inputs = serde_json::to_value(v).unwrap_or(Value::Null);
        self
    }

    pub fn outputs<T: Serialize>(mut self, v: &T) -> Self {
        self.outputs = serde_json::to_value(v).unwrap_or(Value::Null);
        self
    }

    pub fn margins<T: Serialize>(mut self, v: &T) -> Self {
        self.margins = serde_json::to_value(v).unwrap_or(Value::Null);
        self
    }

    pub fn pass(mut self, ok: bool) -> Self {
        self.pass = ok;
        self
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Log-log regression slope of `y` against `x` (positive data only).
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(1e-300).ln()).collect();
    linear_fit(&lx, &ly).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (s, i) = linear_fit(&x, &y);
        assert!((s - 2.5).abs() < 1e-12);
        assert!((i + 1.0).abs() < 1e-12);
    }

    #[test]
    fn loglog_slope_of_power_law() {
        let x = [8.0, 16.0, 32.0, 64.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-2.0)).collect();
        assert!((loglog_slope(&x, &y) + 2.0).abs() < 1e-12);
    }
}
