//! Admissible taper templates.
//!
//! A template `W` is admissible when it is symmetric, has a unit diagonal and
//! nonnegative entries. Every template carries `V = √W` (elementwise), which
//! enters the MSE through `‖V ∘ Σ‖_F² = Σ w_ij |σ_ij|²`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Scalar;

/// Slack tolerated on negative entries of user-supplied templates before
/// they are clipped to zero.
pub const NEGATIVE_SLACK: f64 = 1e-15;

const MAX_REPORTED_ENTRIES: usize = 16;

/// `sin(x)/x` with the removable singularity filled in.
fn sin_over(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaperTemplate {
    w: DMatrix<f64>,
    v: DMatrix<f64>,
    index_value: f64,
    label: String,
    binary: bool,
    /// `w` as a function of `|i − j|` for Toeplitz templates.
    lag_profile: Option<Vec<f64>>,
}

impl TaperTemplate {
    fn from_profile(p: usize, profile: Vec<f64>, index_value: f64, label: String) -> Self {
        let w = DMatrix::from_fn(p, p, |i, j| profile[i.abs_diff(j)]);
        Self::assemble(w, index_value, label, Some(profile))
    }

    fn assemble(w: DMatrix<f64>, index_value: f64, label: String, lag_profile: Option<Vec<f64>>) -> Self {
        let binary = w.iter().all(|&x| x == 0.0 || x == 1.0);
        // All-ones matrices take the lag path whatever their origin, so every
        // untapered template yields bit-identical statistics.
        let lag_profile = if w.iter().all(|&x| x == 1.0) { Some(vec![1.0; w.nrows()]) } else { lag_profile };
        let v = if binary { w.clone() } else { w.map(f64::sqrt) };
        Self {
            w,
            v,
            index_value,
            label,
            binary,
            lag_profile,
        }
    }

    /// Hard banding: `w_ij = 1` if `|i − j| < k`, else 0.
    pub fn banding(p: usize, k: usize) -> Result<Self> {
        if k < 1 || k > p {
            return Err(Error::InvalidArgument(format!("bandwidth k = {k} outside [1, {p}]")));
        }
        let profile = (0..p).map(|d| if d < k { 1.0 } else { 0.0 }).collect();
        Ok(Self::from_profile(p, profile, k as f64, format!("banding(k={k})")))
    }

    /// Linear-decay taper: 1 up to lag `k/2`, then `2 − 2|i−j|/k`, 0 from lag `k` on.
    pub fn minimax(p: usize, k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidArgument("minimax taper needs k >= 1".into()));
        }
        let kf = k as f64;
        let profile = (0..p)
            .map(|d| {
                let d = d as f64;
                if d <= kf / 2.0 {
                    1.0
                } else if d < kf {
                    2.0 - 2.0 * d / kf
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self::from_profile(p, profile, kf, format!("minimax(k={k})")))
    }

    /// Null-broadening taper `w_ij = sin((i−j)Δ) / ((i−j)Δ)`, negative lobes clipped to 0.
    pub fn sinc(p: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidArgument(format!("sinc width must be positive, got {delta}")));
        }
        let profile = (0..p).map(|d| sin_over(d as f64 * delta).max(0.0)).collect();
        Ok(Self::from_profile(p, profile, delta, format!("sinc(delta={delta})")))
    }

    /// Space-time taper `T_f ⊗ T_θ` with `[T]_ij = (1 + sin((i−j)k)/((i−j)k)) / 2`.
    ///
    /// `pulses` indexes the slow (Doppler) dimension, `sensors` the fast one,
    /// matching steering vectors laid out as `b(v) ⊗ a(θ)`.
    pub fn stap_kron(pulses: usize, sensors: usize, k: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::InvalidArgument(format!("null width must be >= 0, got {k}")));
        }
        if pulses == 0 || sensors == 0 {
            return Err(Error::InvalidArgument("pulses and sensors must be positive".into()));
        }
        let factor = |d: usize| 0.5 * (1.0 + sin_over(d as f64 * k));
        let p = pulses * sensors;
        let w = DMatrix::from_fn(p, p, |i, j| {
            let (mi, qi) = (i / sensors, i % sensors);
            let (mj, qj) = (j / sensors, j % sensors);
            factor(mi.abs_diff(mj)) * factor(qi.abs_diff(qj))
        });
        Ok(Self::assemble(w, k, format!("stap(k={k})"), None))
    }

    /// The all-ones template (no tapering).
    pub fn all_ones(p: usize) -> Self {
        Self::from_profile(p, vec![1.0; p], p as f64, "ones".to_string())
    }

    /// Wraps an arbitrary matrix after checking admissibility. Entries in
    /// `[-NEGATIVE_SLACK, 0)` are clipped to zero.
    pub fn from_matrix(mut w: DMatrix<f64>, index_value: f64, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        validate_matrix(&w, &label)?;
        w.apply(|x| *x = x.max(0.0));
        Ok(Self::assemble(w, index_value, label, None))
    }

    pub fn p(&self) -> usize {
        self.w.nrows()
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn index_value(&self) -> f64 {
        self.index_value
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when every entry is 0 or 1, in which case `V = W`.
    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn is_all_ones(&self) -> bool {
        self.w.iter().all(|&x| x == 1.0)
    }

    pub fn lag_profile(&self) -> Option<&[f64]> {
        self.lag_profile.as_deref()
    }

    /// `‖W∘A‖²`, `d_Aᵀ(W∘W)d_A`, `‖V∘A‖²` and `d_Aᵀ(V∘V)d_A` for a Hermitian `A`.
    pub fn moments(&self, a: &HermitianSummary) -> TemplateMoments {
        debug_assert_eq!(a.p, self.p());
        match &self.lag_profile {
            Some(profile) => {
                let mut m = TemplateMoments::default();
                for (d, &w) in profile.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    m.frob_w += w * w * a.lag_abs_sq[d];
                    m.diag_w += w * w * a.lag_diag[d];
                    m.frob_v += w * a.lag_abs_sq[d];
                    m.diag_v += w * a.lag_diag[d];
                }
                m
            }
            None => self.moments_dense(a),
        }
    }

    /// Entry-by-entry evaluation of [`Self::moments`], valid for any template.
    pub fn moments_dense(&self, a: &HermitianSummary) -> TemplateMoments {
        let p = self.p();
        let mut m = TemplateMoments::default();
        for j in 0..p {
            let wcol = self.w.column(j);
            let acol = a.abs_sq.column(j);
            let dj = a.diag[j];
            for i in 0..p {
                let w = wcol[i];
                let prod = a.diag[i] * dj;
                m.frob_w += w * w * acol[i];
                m.diag_w += w * w * prod;
                m.frob_v += w * acol[i];
                m.diag_v += w * prod;
            }
        }
        m
    }
}

/// Quadratic statistics of a Hermitian matrix against a template.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TemplateMoments {
    /// `‖W ∘ A‖_F²`
    pub frob_w: f64,
    /// `tr((D_A W)²) = d_Aᵀ (W∘W) d_A`
    pub diag_w: f64,
    /// `‖V ∘ A‖_F²`
    pub frob_v: f64,
    /// `tr((D_A V)²) = d_Aᵀ W d_A`
    pub diag_v: f64,
}

/// Per-matrix quantities shared by every template of a family.
#[derive(Debug, Clone)]
pub struct HermitianSummary {
    p: usize,
    abs_sq: DMatrix<f64>,
    diag: Vec<f64>,
    lag_abs_sq: Vec<f64>,
    lag_diag: Vec<f64>,
}

impl HermitianSummary {
    pub fn new<T: Scalar>(a: &DMatrix<T>) -> Self {
        let p = a.nrows();
        let abs_sq = a.map(|x| x.abs_sq());
        let diag: Vec<f64> = (0..p).map(|i| a[(i, i)].re()).collect();
        let mut lag_abs_sq = vec![0.0; p];
        let mut lag_diag = vec![0.0; p];
        for j in 0..p {
            let col = abs_sq.column(j);
            for i in 0..p {
                let d = i.abs_diff(j);
                lag_abs_sq[d] += col[i];
                lag_diag[d] += diag[i] * diag[j];
            }
        }
        Self {
            p,
            abs_sq,
            diag,
            lag_abs_sq,
            lag_diag,
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// `‖A‖_F²`
    pub fn frob(&self) -> f64 {
        self.lag_abs_sq.iter().sum()
    }
}

fn validate_matrix(w: &DMatrix<f64>, label: &str) -> Result<()> {
    if !w.is_square() {
        return Err(Error::DimensionMismatch {
            context: "template (square)",
            expected: w.nrows(),
            found: w.ncols(),
        });
    }
    let p = w.nrows();
    let reject = |reason, offending: Vec<(usize, usize)>| Error::TemplateRejected {
        label: label.to_string(),
        reason,
        offending,
    };
    let bad_diag: Vec<_> = (0..p).filter(|&i| w[(i, i)] != 1.0).map(|i| (i, i)).take(MAX_REPORTED_ENTRIES).collect();
    if !bad_diag.is_empty() {
        return Err(reject("diagonal entries must equal 1", bad_diag));
    }
    let mut negative = Vec::new();
    let mut asymmetric = Vec::new();
    for j in 0..p {
        for i in 0..p {
            let x = w[(i, j)];
            if !x.is_finite() || x < -NEGATIVE_SLACK {
                negative.push((i, j));
            }
            if i < j && x != w[(j, i)] {
                asymmetric.push((i, j));
            }
        }
    }
    if !negative.is_empty() {
        negative.truncate(MAX_REPORTED_ENTRIES);
        return Err(reject("entries must be nonnegative", negative));
    }
    if !asymmetric.is_empty() {
        asymmetric.truncate(MAX_REPORTED_ENTRIES);
        return Err(reject("template must be symmetric", asymmetric));
    }
    Ok(())
}

/// Outcome of [`validate_family`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub p: usize,
    pub members: usize,
    pub contains_all_ones: bool,
}

/// Checks admissibility of every member, a common dimension and strictly
/// increasing indices.
pub fn validate_family(templates: &[TaperTemplate]) -> Result<ValidationReport> {
    let first = templates
        .first()
        .ok_or_else(|| Error::InvalidArgument("template family is empty".into()))?;
    let p = first.p();
    for t in templates {
        if t.p() != p {
            return Err(Error::DimensionMismatch {
                context: "template family",
                expected: p,
                found: t.p(),
            });
        }
        validate_matrix(&t.w, &t.label)?;
        if t.w.iter().any(|&x| x < 0.0) {
            return Err(Error::TemplateRejected {
                label: t.label.clone(),
                reason: "entries must be nonnegative",
                offending: Vec::new(),
            });
        }
    }
    if let Some(pair) = templates.windows(2).find(|w| w[1].index_value <= w[0].index_value) {
        return Err(Error::InvalidArgument(format!(
            "template indices must be strictly increasing ({} then {})",
            pair[0].index_value, pair[1].index_value
        )));
    }
    Ok(ValidationReport {
        p,
        members: templates.len(),
        contains_all_ones: templates.iter().any(TaperTemplate::is_all_ones),
    })
}

/// An ordered, validated collection of templates of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateFamily {
    templates: Vec<TaperTemplate>,
    contains_all_ones: bool,
}

impl TemplateFamily {
    pub fn new(templates: Vec<TaperTemplate>) -> Result<Self> {
        let report = validate_family(&templates)?;
        Ok(Self {
            templates,
            contains_all_ones: report.contains_all_ones,
        })
    }

    pub fn singleton(template: TaperTemplate) -> Self {
        Self::new(vec![template]).expect("constructed templates are admissible")
    }

    pub fn banding(p: usize, ks: &[usize]) -> Result<Self> {
        Self::new(ks.iter().map(|&k| TaperTemplate::banding(p, k)).collect::<Result<_>>()?)
    }

    pub fn minimax(p: usize, ks: &[usize]) -> Result<Self> {
        Self::new(ks.iter().map(|&k| TaperTemplate::minimax(p, k)).collect::<Result<_>>()?)
    }

    pub fn sinc(p: usize, deltas: &[f64]) -> Result<Self> {
        Self::new(deltas.iter().map(|&d| TaperTemplate::sinc(p, d)).collect::<Result<_>>()?)
    }

    pub fn stap(pulses: usize, sensors: usize, ks: &[f64]) -> Result<Self> {
        Self::new(
            ks.iter()
                .map(|&k| TaperTemplate::stap_kron(pulses, sensors, k))
                .collect::<Result<_>>()?,
        )
    }

    pub fn p(&self) -> usize {
        self.templates[0].p()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn contains_all_ones(&self) -> bool {
        self.contains_all_ones
    }

    pub fn templates(&self) -> &[TaperTemplate] {
        &self.templates
    }

    pub fn get(&self, i: usize) -> Option<&TaperTemplate> {
        self.templates.get(i)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TaperTemplate> {
        self.templates.iter()
    }

    /// Position of the member with the given index value.
    pub fn position_of(&self, index_value: f64) -> Option<usize> {
        self.templates.iter().position(|t| t.index_value == index_value)
    }
}

/// Bandwidth search set `[1, 30] ∪ [p − 30, p]`.
pub fn default_bandwidths(p: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (1..=30.min(p)).chain(p.saturating_sub(30).max(1)..=p).collect();
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// `count` log-spaced points in `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum FamilyKind {
    Banding,
    Minimax,
    Sinc,
    Stap { pulses: usize, sensors: usize },
}

/// One entry of a family index list: a literal value or a range expression.
///
/// Range expressions: `a..b` (inclusive integer range whose bounds may be
/// `N`, `p`, `p-N`), or `log:lo:hi:count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexItem {
    Value(f64),
    Expr(String),
}

/// Declarative description of a template family, resolved against `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub kind: FamilyKind,
    pub indices: Vec<IndexItem>,
}

impl Default for FamilySpec {
    fn default() -> Self {
        Self {
            kind: FamilyKind::Banding,
            indices: vec![IndexItem::Expr("1..30".into()), IndexItem::Expr("p-30..p".into())],
        }
    }
}

fn parse_bound(s: &str, p: usize) -> Result<i64> {
    let s = s.trim();
    let p = p as i64;
    let bad = || Error::Parse(format!("bad index bound `{s}`"));
    if s == "p" {
        return Ok(p);
    }
    if let Some(rest) = s.strip_prefix("p-") {
        return Ok(p - rest.trim().parse::<i64>().map_err(|_| bad())?);
    }
    if let Some(rest) = s.strip_prefix("p+") {
        return Ok(p + rest.trim().parse::<i64>().map_err(|_| bad())?);
    }
    s.parse::<i64>().map_err(|_| bad())
}

fn expand_expr(expr: &str, p: usize) -> Result<Vec<f64>> {
    let expr = expr.trim();
    if let Some(rest) = expr.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let bad = || Error::Parse(format!("expected log:lo:hi:count, got `{expr}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi >= lo) {
            return Err(bad());
        }
        return Ok(log_spaced(lo, hi, count));
    }
    if let Some((a, b)) = expr.split_once("..") {
        let (a, b) = (parse_bound(a, p)?, parse_bound(b, p)?);
        return Ok((a..=b).map(|k| k as f64).collect());
    }
    let value = parse_bound(expr, p)
        .map(|k| k as f64)
        .or_else(|_| expr.parse::<f64>().map_err(|_| Error::Parse(format!("bad index `{expr}`"))))?;
    Ok(vec![value])
}

impl FamilySpec {
    pub fn banding_default() -> Self {
        Self::default()
    }

    pub fn minimax_default() -> Self {
        Self {
            kind: FamilyKind::Minimax,
            ..Self::default()
        }
    }

    /// Parses `kind:item,item,...`, e.g. `banding:1..30,p-30..p` or `sinc:log:0.01:1:10`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected `kind:indices`, got `{s}`")))?;
        let kind = match kind.trim() {
            "banding" => FamilyKind::Banding,
            "minimax" => FamilyKind::Minimax,
            "sinc" => FamilyKind::Sinc,
            other => return Err(Error::Parse(format!("unknown family kind `{other}`"))),
        };
        let indices = if rest.trim_start().starts_with("log:") {
            vec![IndexItem::Expr(rest.trim().to_string())]
        } else {
            rest.split(',').map(|x| IndexItem::Expr(x.trim().to_string())).collect()
        };
        Ok(Self { kind, indices })
    }

    /// Sorted, deduplicated index values after range expansion, restricted
    /// to the valid domain of the template kind.
    pub fn resolve_indices(&self, p: usize) -> Result<Vec<f64>> {
        let mut values = Vec::new();
        for item in &self.indices {
            match item {
                IndexItem::Value(v) => values.push(*v),
                IndexItem::Expr(e) => values.extend(expand_expr(e, p)?),
            }
        }
        match self.kind {
            FamilyKind::Banding => values.retain(|&k| k >= 1.0 && k <= p as f64 && k.fract() == 0.0),
            FamilyKind::Minimax => values.retain(|&k| k >= 1.0 && k.fract() == 0.0),
            FamilyKind::Sinc => values.retain(|&k| k > 0.0),
            FamilyKind::Stap { .. } => values.retain(|&k| k >= 0.0),
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        if values.is_empty() {
            return Err(Error::InvalidArgument("family index list resolves to no valid templates".into()));
        }
        Ok(values)
    }

    pub fn build(&self, p: usize) -> Result<TemplateFamily> {
        let values = self.resolve_indices(p)?;
        let ints = || values.iter().map(|&k| k as usize).collect::<Vec<_>>();
        match self.kind {
            FamilyKind::Banding => TemplateFamily::banding(p, &ints()),
            FamilyKind::Minimax => TemplateFamily::minimax(p, &ints()),
            FamilyKind::Sinc => TemplateFamily::sinc(p, &values),
            FamilyKind::Stap { pulses, sensors } => {
                if pulses * sensors != p {
                    return Err(Error::DimensionMismatch {
                        context: "stap family (pulses * sensors)",
                        expected: p,
                        found: pulses * sensors,
                    });
                }
                TemplateFamily::stap(pulses, sensors, &values)
            }
        }
    }
}

/// Null-width search set used by the space-time demo.
pub fn stap_null_widths() -> Vec<f64> {
    log_spaced(1e-3, 1e-1, 20)
}

#[doc(hidden)]
pub fn normalized_sinc(x: f64) -> f64 {
    sin_over(PI * x)
}
