//! CSV ingestion (scenario spaces, historical returns) and frontier
//! emission. UTF-8, decimal points, no thousands separators.

use std::fmt;
use std::path::Path;

use birisk::markowitz::{FrontierRow, GaussianMarket};
use birisk::risk::ScenarioSpace;

#[derive(Debug)]
pub enum CsvError {
    Io(String, std::io::Error),
    /// 1-based line and column of the offending field.
    Parse { line: usize, column: usize, message: String },
    Shape(String),
}

impl fmt::Display for CsvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CsvError::Io(path, e) => write!(f, "cannot read {}: {}", path, e),
            CsvError::Parse { line, column, message } => {
                write!(f, "parse error at line {}, column {}: {}", line, column, message)
            }
            CsvError::Shape(msg) => write!(f, "{}", msg),
        }
    }
}

impl std::error::Error for CsvError {}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(',').map(|f| f.trim()).collect()
}

fn parse_field(field: &str, line: usize, column: usize) -> Result<f64, CsvError> {
    field.parse::<f64>().map_err(|_| CsvError::Parse {
        line,
        column,
        message: format!("`{}` is not a number", field),
    })
}

/// Scenario file: header `prob,asset_1,...,asset_n`, one scenario per
/// row.
pub fn read_scenario_csv(path: &Path) -> Result<ScenarioSpace, CsvError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CsvError::Io(path.display().to_string(), e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CsvError::Shape("scenario file is empty".into()))?;
    let fields = split_fields(header);
    if fields.first() != Some(&"prob") || fields.len() < 3 {
        return Err(CsvError::Parse {
            line: 1,
            column: 1,
            message: "header must be `prob,asset_1,...,asset_n` with n >= 2".into(),
        });
    }
    let n = fields.len() - 1;
    let mut probs = Vec::new();
    let mut returns = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line);
        if fields.len() != n + 1 {
            return Err(CsvError::Parse {
                line: idx + 1,
                column: fields.len(),
                message: format!("expected {} fields, got {}", n + 1, fields.len()),
            });
        }
        probs.push(parse_field(fields[0], idx + 1, 1)?);
        let mut row = Vec::with_capacity(n);
        for (j, field) in fields[1..].iter().enumerate() {
            row.push(parse_field(field, idx + 1, j + 2)?);
        }
        returns.push(row);
    }
    ScenarioSpace::new(returns, probs).map_err(|e| CsvError::Shape(e.to_string()))
}

/// Historical returns: header `asset_1,...,asset_n`, one period per
/// row; at least n + 1 rows of data.
pub fn read_returns_csv(path: &Path) -> Result<Vec<Vec<f64>>, CsvError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CsvError::Io(path.display().to_string(), e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CsvError::Shape("returns file is empty".into()))?;
    let n = split_fields(header).len();
    if n < 2 {
        return Err(CsvError::Parse {
            line: 1,
            column: 1,
            message: "need at least two asset columns".into(),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line);
        if fields.len() != n {
            return Err(CsvError::Parse {
                line: idx + 1,
                column: fields.len(),
                message: format!("expected {} fields, got {}", n, fields.len()),
            });
        }
        let mut row = Vec::with_capacity(n);
        for (j, field) in fields.iter().enumerate() {
            row.push(parse_field(field, idx + 1, j + 1)?);
        }
        rows.push(row);
    }
    if rows.len() < n + 1 {
        return Err(CsvError::Shape(format!(
            "need at least {} observation rows for {} assets, got {}",
            n + 1,
            n,
            rows.len()
        )));
    }
    Ok(rows)
}

/// Frontier table: a commented constants header, then
/// `mu,sigma,w_1,...,w_n` rows at 17 significant digits.
pub fn frontier_csv(market: &GaussianMarket, rows: &[FrontierRow]) -> String {
    let corner = market.corner();
    let mut out = String::new();
    out.push_str(&format!("# alpha = {:.16e}\n", market.alpha()));
    out.push_str(&format!("# beta = {:.16e}\n", market.beta()));
    out.push_str(&format!("# gamma = {:.16e}\n", market.gamma()));
    out.push_str(&format!("# delta = {:.16e}\n", market.delta()));
    out.push_str(&format!("# corner_sigma = {:.16e}\n", corner.sigma));
    out.push_str(&format!("# corner_mu = {:.16e}\n", corner.mu));
    out.push_str(&format!("# asymptote_slope = {:.16e}\n", market.asymptote_slope()));
    out.push_str("mu,sigma");
    for i in 1..=market.num_assets() {
        out.push_str(&format!(",w_{}", i));
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!("{:.16e},{:.16e}", row.mu, row.sigma));
        for w in &row.weights {
            out.push_str(&format!(",{:.16e}", w));
        }
        out.push('\n');
    }
    out
}
