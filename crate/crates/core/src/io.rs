//! JSON and text formats for sequences, spectra, witnesses and diagonals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorization::Witness;
use crate::scalar::Scalar;
use crate::sequence::{Count, DiagonalSequence, SpectrumSpec, Tail};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum CountJson {
    Finite(u64),
    Word(String),
}

impl Default for CountJson {
    fn default() -> Self {
        CountJson::Finite(0)
    }
}

impl CountJson {
    fn to_count(&self, field: &str) -> Result<Count> {
        match self {
            CountJson::Finite(n) => Ok(Count::from_u64(*n)),
            CountJson::Word(w) if w == "inf" => Ok(Count::Infinite),
            CountJson::Word(w) => Err(Error::parse(format!("{field}: expected a natural number or \"inf\", got {w:?}"))),
        }
    }

    fn from_count(c: Count) -> Self {
        match c {
            Count::Zero => CountJson::Finite(0),
            Count::Finite(n) => CountJson::Finite(n),
            Count::Infinite => CountJson::Word("inf".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum TailJson {
    Geometric { first: Scalar, ratio: Scalar },
    Divergent,
}

/// The on-disk sequence format. Values are read in the caller's coordinates;
/// [`SequenceFile::into_sequence`] can shift them so the bottom end is `0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    #[serde(rename = "B")]
    b: Scalar,
    #[serde(default)]
    explicit: Vec<Scalar>,
    #[serde(default)]
    zero_count: CountJson,
    #[serde(default)]
    b_count: CountJson,
    #[serde(default)]
    zero_tail: Option<TailJson>,
    #[serde(default)]
    b_tail: Option<TailJson>,
}

fn tail_from(t: &Option<TailJson>) -> Tail {
    match t {
        None => Tail::Absent,
        Some(TailJson::Geometric { first, ratio }) => Tail::geometric(first.clone(), ratio.clone()),
        Some(TailJson::Divergent) => Tail::Divergent,
    }
}

fn tail_to(t: &Tail) -> Option<TailJson> {
    match t {
        Tail::Absent => None,
        Tail::Geometric { first, ratio } => Some(TailJson::Geometric { first: first.clone(), ratio: ratio.clone() }),
        Tail::Divergent => Some(TailJson::Divergent),
    }
}

impl SequenceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(format!("sequence: {e}")))
    }

    /// Subtracts `shift` from `B` and from every explicit value. Tails and
    /// counts are relative to the end points and do not move.
    pub fn into_sequence(&self, shift: &Scalar) -> Result<DiagonalSequence> {
        let b = &self.b - shift;
        let explicit = self.explicit.iter().map(|x| x - shift).collect();
        let seq = DiagonalSequence::new(b, explicit)?
            .with_zero_count(self.zero_count.to_count("zero_count")?)
            .with_b_count(self.b_count.to_count("b_count")?)
            .with_zero_tail(tail_from(&self.zero_tail))?
            .with_b_tail(tail_from(&self.b_tail))?;
        seq.normalize()?;
        Ok(seq)
    }

    pub fn from_sequence(seq: &DiagonalSequence) -> Self {
        SequenceFile {
            b: seq.b().clone(),
            explicit: seq.explicit().to_vec(),
            zero_count: CountJson::from_count(seq.zero_count()),
            b_count: CountJson::from_count(seq.b_count()),
            zero_tail: tail_to(seq.zero_tail()),
            b_tail: tail_to(seq.b_tail()),
        }
    }
}

pub fn parse_sequence(text: &str) -> Result<DiagonalSequence> {
    SequenceFile::parse(text)?.into_sequence(&Scalar::zero())
}

pub fn sequence_to_json(seq: &DiagonalSequence) -> String {
    serde_json::to_string(&SequenceFile::from_sequence(seq)).expect("sequence serializes")
}

/// Rationals from either a JSON array or a comma-separated list.
pub fn parse_scalar_list(text: &str) -> Result<Vec<Scalar>> {
    let t = text.trim();
    if t.starts_with('[') {
        return serde_json::from_str(t).map_err(|e| Error::parse(format!("list: {e}")));
    }
    t.split(',').map(|p| p.parse()).collect()
}

pub fn parse_witness(text: &str) -> Result<Witness> {
    let w: Witness = serde_json::from_str(text.trim()).map_err(|e| Error::parse(format!("witness: {e}")))?;
    Witness::new(w.counts().to_vec(), w.k())
}

/// Spectrum points, optionally translated so the first point becomes `0`.
/// Returns the spectrum and the shift that was subtracted.
pub fn parse_spectrum(text: &str, translate: bool) -> Result<(SpectrumSpec, Scalar)> {
    let pts = parse_scalar_list(text)?;
    let shift = match (translate, pts.first()) {
        (true, Some(a0)) => a0.clone(),
        _ => Scalar::zero(),
    };
    let shifted = pts.iter().map(|x| x - &shift).collect();
    let spec = SpectrumSpec::new(shifted).map_err(|e| match e {
        Error::Domain(m) if !translate => Error::parse(format!("spectrum: {m} (use --translate for A_0 != 0)")),
        Error::Domain(m) => Error::parse(format!("spectrum: {m}")),
        other => other,
    })?;
    Ok((spec, shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    const DYADIC: &str = r#"{"B":"1","explicit":["1/2"],"zero_count":0,"b_count":0,
        "zero_tail":{"kind":"geometric","first":"1/4","ratio":"1/2"},
        "b_tail":{"kind":"geometric","first":"1/4","ratio":"1/2"}}"#;

    #[test]
    fn dyadic_file_parses() {
        assert_eq!(parse_sequence(DYADIC).unwrap(), DiagonalSequence::two_sided_dyadic());
    }

    #[test]
    fn round_trip() {
        let s = DiagonalSequence::two_sided_dyadic().with_zero_count(Count::Infinite).with_b_tail(Tail::Divergent).unwrap();
        assert_eq!(parse_sequence(&sequence_to_json(&s)).unwrap(), s);
    }

    #[test]
    fn schema_violations() {
        for bad in [
            r#"{"B":"1","explicit":[0.5]}"#,
            r#"{"B":"1","zero_count":"many"}"#,
            r#"{"B":"1","zero_tail":{"kind":"harmonic"}}"#,
            r#"{"explicit":[]}"#,
            r#"{"B":"1","extra":1}"#,
            r#"{"B":"1","explicit":["3/2"]}"#,
        ] {
            assert!(parse_sequence(bad).is_err(), "{bad}");
        }
        let err = parse_sequence("{\n\"B\": 0.5}").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn lists_and_witnesses() {
        assert_eq!(parse_scalar_list("0, 1/4,1").unwrap(), vec![q(0, 1), q(1, 4), q(1, 1)]);
        assert_eq!(parse_scalar_list(r#"["0","1/4",1]"#).unwrap(), vec![q(0, 1), q(1, 4), q(1, 1)]);
        assert_eq!(parse_witness(r#"{"N":[3],"k":-2}"#).unwrap(), Witness::new(vec![3], -2).unwrap());
        assert!(parse_witness(r#"{"N":[0],"k":0}"#).is_err());
    }

    #[test]
    fn translation() {
        let (spec, shift) = parse_spectrum("1,5/4,2", true).unwrap();
        assert_eq!(shift, q(1, 1));
        assert_eq!(spec.points(), &[q(0, 1), q(1, 4), q(1, 1)]);
        assert!(matches!(parse_spectrum("1,5/4,2", false), Err(Error::Parse(_))));
        let f = SequenceFile::parse(r#"{"B":"2","explicit":["3/2"],"zero_count":"inf","b_count":"inf"}"#).unwrap();
        let s = f.into_sequence(&q(1, 1)).unwrap();
        assert_eq!(s.b(), &q(1, 1));
        assert_eq!(s.explicit(), &[q(1, 2)]);
    }
}
