//! Text serialization: 17-significant-digit float formatting shared by every
//! CSV/JSON emitter, and the JSON document format for encodings.
//!
//! All floating-point output goes through [`format_float`] so that repeated
//! runs produce byte-identical artifacts and golden-file comparisons are
//! exact. 17 significant digits round-trip any f64 exactly.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::mieds::{Encoding, Segment};
use crate::taylor::{LocalModel, TruncatedPoly};

/// Render a float with 17 significant digits.
pub fn format_float(value: f64) -> String {
    format!("{:.16e}", value)
}

/// serde_json formatter that emits every float through [`format_float`].
/// Non-finite values (which the pipeline never produces in exported
/// documents) degrade to `null`, matching serde_json's own behavior.
struct FloatFormatter {
    indent: usize,
}

impl FloatFormatter {
    fn write_newline<W: Write + ?Sized>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..self.indent {
            w.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl Formatter for FloatFormatter {
    fn write_f64<W: Write + ?Sized>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            w.write_all(format_float(value).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn begin_array<W: Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.indent += 1;
        w.write_all(b"[")
    }

    fn end_array<W: Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.indent -= 1;
        w.write_all(b"]")
    }

    fn begin_array_value<W: Write + ?Sized>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        self.write_newline(w)
    }

    fn begin_object<W: Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.indent += 1;
        w.write_all(b"{")
    }

    fn end_object<W: Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.indent -= 1;
        w.write_all(b"}")
    }

    fn begin_object_key<W: Write + ?Sized>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        self.write_newline(w)
    }

    fn begin_object_value<W: Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        w.write_all(b": ")
    }
}

/// Serialize any value as pretty JSON with exact float formatting.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, FloatFormatter { indent: 0 });
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Io(e.to_string()))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Io(e.to_string()))
}

/// Serialized form of one local model: header plus the dense coefficient
/// lists of every component in graded-lex order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalModelDoc {
    pub dim: usize,
    pub degree: usize,
    pub center: Vec<f64>,
    /// `coefficients[i]` holds component `i`, length `C(dim+degree, degree)`.
    pub coefficients: Vec<Vec<f64>>,
}

impl LocalModelDoc {
    pub fn from_model(model: &LocalModel) -> Self {
        LocalModelDoc {
            dim: model.dim(),
            degree: model.degree(),
            center: model.center().to_vec(),
            coefficients: model
                .components()
                .iter()
                .map(|c| c.dense_coefficients())
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<LocalModel> {
        let components = self
            .coefficients
            .iter()
            .map(|c| TruncatedPoly::from_dense(self.dim, self.degree, c))
            .collect::<Result<Vec<_>>>()?;
        LocalModel::new(self.center.clone(), components)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentDoc {
    pub index: usize,
    pub t_start: f64,
    pub t_stop: f64,
    pub degree: usize,
    pub local_cost: f64,
    pub center: Vec<f64>,
    pub coefficients: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostPoint {
    pub m: usize,
    pub cost: f64,
}

/// On-disk form of an [`Encoding`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodingDoc {
    pub dim: usize,
    pub t0: f64,
    pub dt: f64,
    pub m_star: usize,
    pub total_cost: f64,
    pub cost_curve: Vec<CostPoint>,
    pub switch_states: Vec<Vec<f64>>,
    pub segments: Vec<SegmentDoc>,
}

impl EncodingDoc {
    pub fn from_encoding(encoding: &Encoding) -> Self {
        EncodingDoc {
            dim: encoding.dim,
            t0: encoding.t0,
            dt: encoding.dt,
            m_star: encoding.m_star,
            total_cost: encoding.total_cost,
            cost_curve: encoding
                .cost_curve
                .iter()
                .map(|&(m, cost)| CostPoint { m, cost })
                .collect(),
            switch_states: encoding.switch_states.clone(),
            segments: encoding
                .segments
                .iter()
                .map(|s| {
                    let model = LocalModelDoc::from_model(&s.model);
                    SegmentDoc {
                        index: s.index,
                        t_start: s.t_start,
                        t_stop: s.t_stop,
                        degree: s.k_star,
                        local_cost: s.local_cost,
                        center: model.center,
                        coefficients: model.coefficients,
                    }
                })
                .collect(),
        }
    }

    pub fn to_encoding(&self) -> Result<Encoding> {
        let segments = self
            .segments
            .iter()
            .map(|doc| {
                let model = LocalModelDoc {
                    dim: self.dim,
                    degree: doc.degree,
                    center: doc.center.clone(),
                    coefficients: doc.coefficients.clone(),
                }
                .to_model()?;
                Ok(Segment {
                    index: doc.index,
                    t_start: doc.t_start,
                    t_stop: doc.t_stop,
                    entry_state: doc.center.clone(),
                    k_star: doc.degree,
                    local_cost: doc.local_cost,
                    model,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Encoding {
            m_star: self.m_star,
            segments,
            switch_states: self.switch_states.clone(),
            total_cost: self.total_cost,
            cost_curve: self.cost_curve.iter().map(|p| (p.m, p.cost)).collect(),
            dim: self.dim,
            t0: self.t0,
            dt: self.dt,
        })
    }
}

/// Render an encoding as its JSON document.
pub fn encoding_to_json(encoding: &Encoding) -> Result<String> {
    to_json_string(&EncodingDoc::from_encoding(encoding))
}

/// Parse an encoding document.
pub fn encoding_from_json(text: &str) -> Result<Encoding> {
    let doc: EncodingDoc =
        serde_json::from_str(text).map_err(|e| Error::Io(format!("bad encoding document: {}", e)))?;
    doc.to_encoding()
}

/// CSV export of a cost curve: columns `m,L_total`.
pub fn cost_curve_csv(cost_curve: &[(usize, f64)]) -> String {
    let mut out = String::from("m,L_total\n");
    for (m, cost) in cost_curve {
        out.push_str(&format!("{},{}\n", m, format_float(*cost)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{sin, var, VectorField};
    use crate::mieds::{encode, EncoderConfig};

    #[test]
    fn format_float_has_17_significant_digits() {
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        let tricky = 0.1 + 0.2;
        let round_tripped: f64 = format_float(tricky).parse().unwrap();
        assert_eq!(round_tripped.to_bits(), tricky.to_bits());
    }

    #[test]
    fn local_model_doc_round_trips_exactly() {
        let field = VectorField::new(vec![var(1), -var(1) - 9.81 * sin(var(0))]).unwrap();
        let model = field.local_model(&[0.3, -0.7], 3).unwrap();
        let doc = LocalModelDoc::from_model(&model);
        assert_eq!(doc.coefficients[0].len(), crate::taylor::binomial(5, 3));
        let back = doc.to_model().unwrap();
        assert_eq!(back, model);
        // and byte-exact through JSON
        let text = to_json_string(&doc).unwrap();
        let reparsed: LocalModelDoc = serde_json::from_str(&text).unwrap();
        let text2 = to_json_string(&reparsed).unwrap();
        assert_eq!(text, text2);
        assert_eq!(reparsed.to_model().unwrap(), model);
    }

    #[test]
    fn encoding_document_round_trips() {
        let field = VectorField::new(vec![-var(0)]).unwrap();
        let config = EncoderConfig {
            lambda: 0.1,
            k_max: 2,
            m_max: 3,
            t0: 0.0,
            horizon: 1.0,
            dt: 0.01,
            x0: vec![1.0],
        };
        let encoding = encode(&field, &config).unwrap();
        let text = encoding_to_json(&encoding).unwrap();
        let back = encoding_from_json(&text).unwrap();
        assert_eq!(back.m_star, encoding.m_star);
        assert_eq!(back.cost_curve, encoding.cost_curve);
        assert_eq!(back.segments[0].model, encoding.segments[0].model);
        let text2 = encoding_to_json(&back).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn cost_curve_csv_layout() {
        let csv = cost_curve_csv(&[(1, 2.0), (2, 1.5)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "m,L_total");
        assert_eq!(lines[1], "1,2.0000000000000000e0");
        assert_eq!(lines.len(), 3);
    }
}
