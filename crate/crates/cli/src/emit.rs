// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic text output. Every number goes through one formatter
//! (17 significant digits, scientific), so identical runs produce
//! byte-identical files.

use tclq_core::linalg::CMat;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_complex(z: tclq_core::C64) -> String {
    format!("[{}, {}]", fmt_f64(z.re), fmt_f64(z.im))
}

pub fn fmt_matrix(m: &CMat) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let cells: Vec<String> = (0..m.ncols()).map(|j| fmt_complex(m[(i, j)])).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

/// Tiny JSON document builder: ordered keys, deterministic formatting.
pub struct JsonDoc {
    parts: Vec<String>,
}

impl JsonDoc {
    pub fn new() -> Self {
        JsonDoc { parts: Vec::new() }
    }

    pub fn field_raw(&mut self, key: &str, raw: &str) -> &mut Self {
        self.parts.push(format!("\"{key}\": {raw}"));
        self
    }

    pub fn field_str(&mut self, key: &str, value: &str) -> &mut Self {
        self.parts.push(format!("\"{key}\": \"{value}\""));
        self
    }

    pub fn field_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.field_raw(key, &fmt_f64(value))
    }

    pub fn field_usize(&mut self, key: &str, value: usize) -> &mut Self {
        self.parts.push(format!("\"{key}\": {value}"));
        self
    }

    pub fn field_matrix(&mut self, key: &str, m: &CMat) -> &mut Self {
        self.field_raw(key, &fmt_matrix(m))
    }

    pub fn finish(&self) -> String {
        format!("{{{}}}", self.parts.join(", "))
    }
}

pub fn json_array(items: Vec<String>) -> String {
    format!("[{}]", items.join(", "))
}
