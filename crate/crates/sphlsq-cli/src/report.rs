//! JSON and CSV report emission. Every report embeds the resolved config and
//! a format-version string; floats print with 17 significant digits so
//! identical runs produce byte-identical files.

use serde::Serialize;
use serde_json::ser::Formatter;
use sphlsq::lab::{ConvergenceReport, SlopeFit, SweepRow};
use std::io;

pub const FORMAT_VERSION: &str = "1";

/// Serializes with 2-space indentation and full-precision floats.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let pretty = serde_json::ser::PrettyFormatter::with_indent(b"  ");
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PrettySigDigits(pretty));
    value.serialize(&mut ser).expect("report serialization");
    let mut s = String::from_utf8(buf).expect("utf8 json");
    s.push('\n');
    s
}

/// Pretty formatter delegating everything except f64 rendering.
struct PrettySigDigits<'a>(serde_json::ser::PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()>
        where
            W: ?Sized + io::Write,
        {
            self.0.$name(writer $(, $arg)*)
        })*
    };
}

impl Formatter for PrettySigDigits<'_> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        end_object_key(),
        begin_object_value(),
        end_object_value(),
    );
}

#[derive(Serialize)]
pub struct Envelope<C: Serialize, R: Serialize> {
    pub format_version: &'static str,
    pub command: &'static str,
    pub config: C,
    pub result: R,
}

pub fn envelope<C: Serialize, R: Serialize>(
    command: &'static str,
    config: C,
    result: R,
) -> String {
    to_json_string(&Envelope { format_version: FORMAT_VERSION, command, config, result })
}

#[derive(Serialize)]
pub struct SlopeJson {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub confidence_band: [f64; 2],
    pub points: usize,
}

impl From<SlopeFit> for SlopeJson {
    fn from(s: SlopeFit) -> Self {
        SlopeJson {
            slope: s.slope,
            intercept: s.intercept,
            std_error: s.std_error,
            confidence_band: [s.slope - 1.96 * s.std_error, s.slope + 1.96 * s.std_error],
            points: s.points,
        }
    }
}

#[derive(Serialize)]
pub struct SweepRowJson {
    pub n: u32,
    pub l_n: usize,
    pub kappa: f64,
    pub a_est: f64,
    pub b_est: f64,
    pub err_l2: f64,
    pub err_sn: f64,
    pub err_quad: f64,
    pub stab_lhs: f64,
    pub stab_rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lebesgue: Option<f64>,
}

impl From<&SweepRow> for SweepRowJson {
    fn from(r: &SweepRow) -> Self {
        SweepRowJson {
            n: r.n,
            l_n: r.l_n,
            kappa: r.kappa,
            a_est: r.a_est,
            b_est: r.b_est,
            err_l2: r.err_l2,
            err_sn: r.err_sn,
            err_quad: r.err_quad,
            stab_lhs: r.stab_lhs,
            stab_rhs: r.stab_rhs,
            lebesgue: r.lebesgue,
        }
    }
}

#[derive(Serialize)]
pub struct ConvergenceJson {
    pub family: String,
    pub function: String,
    pub rows: Vec<SweepRowJson>,
    pub gaps: Vec<(u32, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_l2: Option<SlopeJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_sn: Option<SlopeJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_quad: Option<SlopeJson>,
}

impl From<&ConvergenceReport> for ConvergenceJson {
    fn from(rep: &ConvergenceReport) -> Self {
        ConvergenceJson {
            family: rep.family.clone(),
            function: rep.function.clone(),
            rows: rep.rows.iter().map(SweepRowJson::from).collect(),
            gaps: rep.gaps.clone(),
            slope_l2: rep.slope_l2.map(SlopeJson::from),
            slope_sn: rep.slope_sn.map(SlopeJson::from),
            slope_quad: rep.slope_quad.map(SlopeJson::from),
        }
    }
}

/// Sweep CSV: one row per degree with the declared column set.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("n,l_n,kappa,err_l2,err_Sn,err_quad,lebesgue\n");
    for r in rows {
        let leb = r.lebesgue.map(|v| format!("{v:.16e}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            r.n, r.l_n, r.kappa, r.err_l2, r.err_sn, r.err_quad, leb
        ));
    }
    out
}
