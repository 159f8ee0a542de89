use std::io::Write;

use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::report::write_csv;

pub const RESULT_HEADER: [&str; 9] = [
    "experiment",
    "model",
    "instance",
    "seed",
    "mu",
    "k",
    "mechanism",
    "metric",
    "value",
];

/// One output row. Aggregate rows leave `instance` and `seed` empty; rows
/// not indexed by k leave `k` empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub model: String,
    pub instance: Option<u64>,
    pub seed: Option<u64>,
    pub mu: usize,
    pub k: Option<usize>,
    pub mechanism: String,
    pub metric: String,
    #[serde(serialize_with = "serialize_value")]
    pub value: f64,
}

/// Integers print without a fractional part; everything else uses the
/// shortest round-trip representation.
fn serialize_value<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_value(*v))
}

pub fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

impl ResultRecord {
    fn key(&self) -> (&str, &str, Option<u64>, usize, Option<usize>, &str, &str) {
        (
            &self.experiment,
            &self.model,
            self.instance,
            self.mu,
            self.k,
            &self.mechanism,
            &self.metric,
        )
    }
}

/// Sorts into the canonical output order.
pub fn sort_records(records: &mut [ResultRecord]) {
    records.sort_by(|a, b| a.key().cmp(&b.key()).then(a.value.total_cmp(&b.value)));
}

pub fn write_records<W: Write>(out: W, records: &[ResultRecord]) -> Result<()> {
    write_csv(out, &RESULT_HEADER, records)
}

pub fn records_csv(records: &[ResultRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_records(&mut buf, records)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(instance: Option<u64>, k: Option<usize>, value: f64) -> ResultRecord {
        ResultRecord {
            experiment: "sweep".into(),
            model: "ER-L51".into(),
            instance,
            seed: instance.map(|i| i * 10),
            mu: 4,
            k,
            mechanism: "CSP".into(),
            metric: "inner_size".into(),
            value,
        }
    }

    #[test]
    fn csv_layout() {
        let mut rs = vec![rec(Some(1), Some(2), 3.0), rec(None, None, 0.25), rec(Some(0), Some(1), 7.0)];
        sort_records(&mut rs);
        let csv = records_csv(&rs).unwrap();
        assert_eq!(
            csv,
            "experiment,model,instance,seed,mu,k,mechanism,metric,value\n\
             sweep,ER-L51,,,4,,CSP,inner_size,0.25\n\
             sweep,ER-L51,0,0,4,1,CSP,inner_size,7\n\
             sweep,ER-L51,1,10,4,2,CSP,inner_size,3\n"
        );
    }

    #[test]
    fn value_format() {
        assert_eq!(format_value(51.0), "51");
        assert_eq!(format_value(0.1), "0.1");
        assert_eq!(format_value(-2.0), "-2");
    }
}
