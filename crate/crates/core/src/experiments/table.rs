//! Tabular experiment results: one row per (sweep value, method, tier
//! column), where tier is "total", a tier name, or "none" for the
//! unassociated mass of association studies.

use crate::analytics::Method;

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub method: Method,
    pub tier: String,
    /// `None` marks a failed cell.
    pub value: Option<f64>,
    /// 95% CI half-width for Monte-Carlo cells.
    pub ci95: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn push(
        &mut self,
        sweep_value: f64,
        method: Method,
        tier: impl Into<String>,
        value: Option<f64>,
        ci95: Option<f64>,
    ) {
        self.rows.push(ResultRow {
            sweep_value,
            method,
            tier: tier.into(),
            value,
            ci95,
        });
    }

    pub fn failed_cells(&self) -> usize {
        self.rows.iter().filter(|r| r.value.is_none()).count()
    }

    /// Methods in first-appearance order.
    pub fn methods(&self) -> Vec<Method> {
        let mut out = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.method) {
                out.push(r.method);
            }
        }
        out
    }

    /// Tier column labels in first-appearance order.
    pub fn tier_columns(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.rows {
            if !out.iter().any(|t| t == &r.tier) {
                out.push(r.tier.clone());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_orders_are_stable() {
        let mut t = ResultTable::default();
        t.push(0.0, Method::AnalyticExact, "total", Some(0.9), None);
        t.push(0.0, Method::AnalyticExact, "terrestrial", Some(0.5), None);
        t.push(0.0, Method::MonteCarlo, "total", Some(0.89), Some(0.01));
        t.push(1.0, Method::AnalyticExact, "total", None, None);
        assert_eq!(t.methods(), vec![Method::AnalyticExact, Method::MonteCarlo]);
        assert_eq!(t.tier_columns(), vec!["total", "terrestrial"]);
        assert_eq!(t.failed_cells(), 1);
    }
}
