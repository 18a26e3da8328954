use std::io::{self, Write};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use period_hecke::cosets::CosetIndex;
use period_hecke::{ExtRational, FormalSum, IntMat2};
use serde_json::{json, Value};

pub const SCHEMA: &str = "period-hecke/1";

pub fn int(x: &BigInt) -> Value {
    match i64::try_from(x) {
        Ok(v) => json!(v),
        Err(_) => json!(x.to_string()),
    }
}

pub fn matrix(m: &IntMat2) -> Value {
    json!([int(&m.a), int(&m.b), int(&m.c), int(&m.d)])
}

pub fn matrix_cell(m: &IntMat2) -> String {
    format!("[{},{},{},{}]", m.a, m.b, m.c, m.d)
}

pub fn formal(p: &FormalSum) -> Value {
    Value::Array(
        p.terms()
            .map(|(m, k)| json!({ "coeff": int(k), "matrix": matrix(m) }))
            .collect(),
    )
}

pub fn rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn ext(x: &ExtRational) -> String {
    if x.is_neg_infinity() {
        "-inf".into()
    } else if !x.is_finite() {
        "inf".into()
    } else {
        x.to_string()
    }
}

pub fn index(i: &CosetIndex) -> Value {
    json!([i.c(), i.b()])
}

pub fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Adds the schema tag and prints one JSON document.
pub fn emit_json(command: &str, mut body: Value) -> io::Result<()> {
    if let Value::Object(map) = &mut body {
        map.insert("schema".into(), json!(SCHEMA));
        map.insert("command".into(), json!(command));
    }
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &body)?;
    writeln!(out)
}

pub fn emit_csv(header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
}
