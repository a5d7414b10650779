//! Machine-readable output records.
//!
//! Every record self-describes its parameters; rows never depend on their
//! position in the stream. The CSV column order is fixed:
//! `quantity,r,N,k,q,n,seed,value,error_bound,source`. Divergent values
//! (an infinite expected penetration depth) serialize as the literal `inf`
//! in CSV and as a `{"divergent": true, "plateau": x}` object in JSON.

use serde_json::{json, Map, Value as Json};

pub const CSV_HEADER: &str = "quantity,r,N,k,q,n,seed,value,error_bound,source";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Analytic,
    MonteCarlo,
}

impl Source {
    fn as_str(self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecordValue {
    Real(f64),
    Divergent { plateau: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord {
    pub quantity: &'static str,
    pub r: Option<f64>,
    pub n_boundary: Option<u32>,
    pub k: Option<u32>,
    pub q: Option<f64>,
    /// Quantity-specific count: the local-time index for `local_time_pmf`
    /// rows, the replication count for other Monte Carlo rows.
    pub n: Option<u64>,
    pub seed: Option<u64>,
    pub value: RecordValue,
    pub error_bound: Option<f64>,
    pub source: Source,
}

impl OutputRecord {
    pub fn analytic(quantity: &'static str, value: f64, error_bound: f64) -> Self {
        Self {
            quantity,
            r: None,
            n_boundary: None,
            k: None,
            q: None,
            n: None,
            seed: None,
            value: RecordValue::Real(value),
            error_bound: Some(error_bound),
            source: Source::Analytic,
        }
    }

    pub fn monte_carlo(quantity: &'static str, value: f64, half_width: f64) -> Self {
        Self {
            source: Source::MonteCarlo,
            ..Self::analytic(quantity, value, half_width)
        }
    }

    pub fn divergent(quantity: &'static str, plateau: f64) -> Self {
        Self {
            value: RecordValue::Divergent { plateau },
            error_bound: None,
            ..Self::analytic(quantity, 0.0, 0.0)
        }
    }

    pub fn with_model(mut self, r: f64, n_boundary: u32) -> Self {
        self.r = Some(r);
        self.n_boundary = Some(n_boundary);
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_n(mut self, n: u64) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn csv_row(&self) -> String {
        fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map(|x| x.to_string()).unwrap_or_default()
        }
        let value = match self.value {
            RecordValue::Real(v) => v.to_string(),
            RecordValue::Divergent { .. } => "inf".to_string(),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.quantity,
            opt(&self.r),
            opt(&self.n_boundary),
            opt(&self.k),
            opt(&self.q),
            opt(&self.n),
            opt(&self.seed),
            value,
            opt(&self.error_bound),
            self.source.as_str()
        )
    }

    pub fn json_line(&self) -> String {
        let mut fields = Map::new();
        fields.insert("quantity".into(), json!(self.quantity));
        if let Some(r) = self.r {
            fields.insert("r".into(), json!(r));
        }
        if let Some(n) = self.n_boundary {
            fields.insert("N".into(), json!(n));
        }
        if let Some(k) = self.k {
            fields.insert("k".into(), json!(k));
        }
        if let Some(q) = self.q {
            fields.insert("q".into(), json!(q));
        }
        if let Some(n) = self.n {
            fields.insert("n".into(), json!(n));
        }
        if let Some(seed) = self.seed {
            fields.insert("seed".into(), json!(seed));
        }
        match self.value {
            RecordValue::Real(v) => {
                fields.insert("value".into(), json!(v));
            }
            RecordValue::Divergent { plateau } => {
                fields.insert("value".into(), json!({"divergent": true, "plateau": plateau}));
            }
        }
        if let Some(b) = self.error_bound {
            fields.insert("error_bound".into(), json!(b));
        }
        fields.insert("source".into(), json!(self.source.as_str()));
        Json::Object(fields).to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Writes records to stdout in the selected format, emitting the CSV
/// header exactly once.
pub struct Emitter {
    format: Format,
    header_written: bool,
}

impl Emitter {
    pub fn new(format: Format) -> Self {
        Self {
            format,
            header_written: false,
        }
    }

    pub fn emit(&mut self, record: &OutputRecord) {
        match self.format {
            Format::Csv => {
                if !self.header_written {
                    println!("{CSV_HEADER}");
                    self.header_written = true;
                }
                println!("{}", record.csv_row());
            }
            Format::Json => println!("{}", record.json_line()),
        }
    }
}
